//! Dense state vectors over virtual qubits, big-endian (qubit 0 is the most
//! significant bit of the amplitude index).

use num_complex::Complex64;

use crate::domains::Outcome;
use crate::error::{Error, Result};
use crate::lattice::Lattice;

pub type C64 = Complex64;

/// Largest dense state we are willing to allocate (2^24 amplitudes, 256 MiB).
pub const QUBIT_BUDGET: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QubitLabel {
    /// Slot `slot` of a site; slot `k < degree` belongs to the `k`-th incident bond.
    Virtual { site: usize, slot: usize },
    /// Spin-1/2 boundary spin attached to `site`.
    Terminator { site: usize, index: usize },
    /// A site's virtual qubits compressed onto the two POVM-selected states.
    Logical { site: usize },
}

#[derive(Clone, Debug)]
pub struct DenseState {
    pub amps: Vec<C64>,
    pub labels: Vec<QubitLabel>,
}

impl DenseState {
    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            self.amps.iter_mut().for_each(|a| *a /= n);
        }
        self
    }

    pub fn position(&self, label: QubitLabel) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    pub fn inner(&self, other: &DenseState) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Applies a `2^k x 2^k` row-major matrix to the listed qubits, where
    /// `qubits[0]` is the most significant bit of the matrix index.
    pub fn apply(&mut self, qubits: &[usize], matrix: &[C64]) {
        let q = self.num_qubits();
        let k = qubits.len();
        let dim = 1 << k;
        assert_eq!(matrix.len(), dim * dim);
        let masks: Vec<usize> = qubits.iter().map(|&p| 1 << (q - 1 - p)).collect();
        let all: usize = masks.iter().sum();
        let offsets: Vec<usize> = (0..dim)
            .map(|j| (0..k).filter(|&t| j >> (k - 1 - t) & 1 == 1).map(|t| masks[t]).sum())
            .collect();
        let mut buf = vec![C64::new(0.0, 0.0); dim];
        for base in 0..self.amps.len() {
            if base & all != 0 {
                continue;
            }
            for (j, b) in buf.iter_mut().enumerate() {
                *b = self.amps[base + offsets[j]];
            }
            for i in 0..dim {
                let row = &matrix[i * dim..(i + 1) * dim];
                self.amps[base + offsets[i]] = row.iter().zip(&buf).map(|(m, b)| m * b).sum();
            }
        }
    }

    pub fn apply_single(&mut self, qubit: usize, m: &Mat2) {
        self.apply(&[qubit], &m.0);
    }

    /// Contracts the leading `k` qubits with the given bra rows (each of
    /// length `2^k`). The result has `log2(rows)` new qubits placed last.
    pub fn contract_front(&self, k: usize, rows: &[Vec<C64>], new_labels: &[QubitLabel]) -> DenseState {
        let m = rows.len();
        assert_eq!(1 << new_labels.len(), m);
        let block = self.amps.len() >> k;
        let mut out = vec![C64::new(0.0, 0.0); block * m];
        for (j, row) in rows.iter().enumerate() {
            for (b, &coef) in row.iter().enumerate() {
                if coef == C64::new(0.0, 0.0) {
                    continue;
                }
                let src = &self.amps[b * block..(b + 1) * block];
                for (r, &a) in src.iter().enumerate() {
                    out[r * m + j] += coef * a;
                }
            }
        }
        let mut labels = self.labels[k..].to_vec();
        labels.extend_from_slice(new_labels);
        DenseState { amps: out, labels }
    }

    /// Projects qubit `p` onto `bra` and removes it.
    pub fn project_out(&self, p: usize, bra: [C64; 2]) -> DenseState {
        let q = self.num_qubits();
        let low = 1usize << (q - 1 - p);
        let mut out = Vec::with_capacity(self.amps.len() / 2);
        for i in 0..self.amps.len() {
            if i & low != 0 {
                continue;
            }
            out.push(bra[0] * self.amps[i] + bra[1] * self.amps[i | low]);
        }
        let mut labels = self.labels.clone();
        labels.remove(p);
        DenseState { amps: out, labels }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [C64; 4]);

impl Mat2 {
    pub const fn real(a: f64, b: f64, c: f64, d: f64) -> Mat2 {
        Mat2([C64::new(a, 0.0), C64::new(b, 0.0), C64::new(c, 0.0), C64::new(d, 0.0)])
    }
    pub fn identity() -> Mat2 {
        Mat2::real(1.0, 0.0, 0.0, 1.0)
    }
    pub fn pauli(a: Outcome) -> Mat2 {
        match a {
            Outcome::X => Mat2::real(0.0, 1.0, 1.0, 0.0),
            Outcome::Y => Mat2([C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)]),
            Outcome::Z => Mat2::real(1.0, 0.0, 0.0, -1.0),
        }
    }
    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        Mat2([
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        ])
    }
    pub fn scale(&self, s: C64) -> Mat2 {
        Mat2(self.0.map(|x| x * s))
    }
}

/// Eigenvector of the Pauli `a` with eigenvalue `+1` (`up`) or `-1`.
pub fn axis_state(a: Outcome, up: bool) -> [C64; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let s = if up { 1.0 } else { -1.0 };
    match a {
        Outcome::Z if up => [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        Outcome::Z => [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        Outcome::X => [C64::new(h, 0.0), C64::new(s * h, 0.0)],
        Outcome::Y => [C64::new(h, 0.0), C64::new(0.0, s * h)],
    }
}

/// `|a a ... a>` (or the all-down state) on `k` qubits as a `2^k` vector.
pub fn aligned_state(a: Outcome, up: bool, k: usize) -> Vec<C64> {
    let one = axis_state(a, up);
    let mut v = vec![C64::new(1.0, 0.0)];
    for _ in 0..k {
        v = v.iter().flat_map(|&x| [x * one[0], x * one[1]]).collect();
    }
    v
}

/// Projector onto the symmetric subspace of `k` qubits (`2^k x 2^k`).
pub fn symmetric_projector(k: usize) -> Vec<C64> {
    let dim = 1 << k;
    let mut perms: Vec<Vec<usize>> = vec![vec![]];
    for n in 0..k {
        perms = perms
            .into_iter()
            .flat_map(|p| (0..=n).map(move |i| {
                let mut q = p.clone();
                q.insert(i, n);
                q
            }))
            .collect();
    }
    let weight = 1.0 / perms.len() as f64;
    let mut m = vec![C64::new(0.0, 0.0); dim * dim];
    for j in 0..dim {
        let bits: Vec<usize> = (0..k).map(|t| j >> (k - 1 - t) & 1).collect();
        for p in &perms {
            let i = (0..k).fold(0, |acc, t| (acc << 1) | bits[p[t]]);
            m[i * dim + j] += weight;
        }
    }
    m
}

/// Bra rows `<a a a|` and `<ā ā ā|` selecting a site's POVM outcome.
pub fn compression_rows(a: Outcome, arity: usize) -> Vec<Vec<C64>> {
    [true, false].iter().map(|&up| aligned_state(a, up, arity).iter().map(|x| x.conj()).collect()).collect()
}

/// Squared POVM prefactor: `2/3` for spin-3/2, `1/2` for spin-1.
///
/// Fixed by the trace of the symmetric projector: `3 * 2 * c^2 = k + 1`.
pub fn povm_weight(arity: usize) -> f64 {
    (arity as f64 + 1.0) / 6.0
}

pub fn qubit_count(lattice: &Lattice) -> usize {
    lattice.arity() * lattice.num_sites() + lattice.total_terminators()
}

fn layout(lattice: &Lattice) -> Vec<QubitLabel> {
    let mut labels = Vec::new();
    for site in 0..lattice.num_sites() {
        labels.extend((0..lattice.arity()).map(|slot| QubitLabel::Virtual { site, slot }));
    }
    for site in 0..lattice.num_sites() {
        labels.extend((0..lattice.terminators(site)).map(|index| QubitLabel::Terminator { site, index }));
    }
    labels
}

/// Product of singlets `|01> - |10>` on every bond and boundary pair.
///
/// Bond `e` is oriented from its lower site to its higher site unless
/// `reversed[e]`; a boundary pair is oriented from the site to the terminator.
pub fn singlet_product(lattice: &Lattice, reversed: &[bool]) -> Result<DenseState> {
    let q = qubit_count(lattice);
    if q > QUBIT_BUDGET {
        return Err(Error::QubitBudget { needed: q, budget: QUBIT_BUDGET });
    }
    let labels = layout(lattice);
    let pos = |l: QubitLabel| labels.iter().position(|&x| x == l).expect("qubit in layout");
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let mut slot_of_edge = vec![[usize::MAX; 2]; lattice.num_edges()];
    for site in 0..lattice.num_sites() {
        for (slot, &(_, e)) in lattice.incident(site).iter().enumerate() {
            let side = if lattice.edges()[e].a == site && slot_of_edge[e][0] == usize::MAX { 0 } else { 1 };
            slot_of_edge[e][side] = pos(QubitLabel::Virtual { site, slot });
        }
    }
    for (e, slots) in slot_of_edge.iter().enumerate() {
        let (lo, hi) = (slots[0], slots[1]);
        pairs.push(if reversed.get(e).copied().unwrap_or(false) { (hi, lo) } else { (lo, hi) });
    }
    for site in 0..lattice.num_sites() {
        let deg = lattice.degree(site);
        for index in 0..lattice.terminators(site) {
            pairs.push((pos(QubitLabel::Virtual { site, slot: deg + index }), pos(QubitLabel::Terminator { site, index })));
        }
    }
    let mut amps = vec![C64::new(0.0, 0.0); 1 << q];
    for assign in 0..1usize << pairs.len() {
        let mut idx = 0;
        let mut sign = 1.0;
        for (t, &(first, second)) in pairs.iter().enumerate() {
            if assign >> t & 1 == 0 {
                idx |= 1 << (q - 1 - second);
            } else {
                idx |= 1 << (q - 1 - first);
                sign = -sign;
            }
        }
        amps[idx] = C64::new(sign, 0.0);
    }
    Ok(DenseState { amps, labels })
}

/// Unnormalised AKLT state: singlets projected onto each site's symmetric subspace.
pub fn build_aklt(lattice: &Lattice) -> Result<DenseState> {
    build_aklt_oriented(lattice, &[])
}

pub fn build_aklt_oriented(lattice: &Lattice, reversed: &[bool]) -> Result<DenseState> {
    let mut state = singlet_product(lattice, reversed)?;
    let k = lattice.arity();
    let proj = symmetric_projector(k);
    for site in 0..lattice.num_sites() {
        let qubits: Vec<usize> = (0..k).map(|slot| site * k + slot).collect();
        state.apply(&qubits, &proj);
    }
    Ok(state)
}

/// The post-POVM state with each site compressed to one logical qubit.
///
/// Logical `|0>` / `|1>` stand for `|a a a>` / `|ā ā ā>`. The norm of the
/// result times `povm_weight^N` is the unnormalised outcome probability.
pub fn compress(aklt: &DenseState, lattice: &Lattice, labels: &[Outcome]) -> DenseState {
    let k = lattice.arity();
    let mut state = aklt.clone();
    for (site, &a) in labels.iter().enumerate() {
        debug_assert_eq!(state.labels[0], QubitLabel::Virtual { site, slot: 0 });
        state = state.contract_front(k, &compression_rows(a, k), &[QubitLabel::Logical { site }]);
    }
    state
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Boundary;

    #[test]
    fn symmetric_projector_is_idempotent_with_rank_k_plus_1() {
        for k in 1..=3 {
            let p = symmetric_projector(k);
            let dim = 1 << k;
            let trace: f64 = (0..dim).map(|i| p[i * dim + i].re).sum();
            assert!((trace - (k as f64 + 1.0)).abs() < 1e-12);
            for i in 0..dim {
                for j in 0..dim {
                    let pp: C64 = (0..dim).map(|t| p[i * dim + t] * p[t * dim + j]).sum();
                    assert!((pp - p[i * dim + j]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn singlet_is_antisymmetric() {
        let s = singlet_product(&Lattice::chain(2, Boundary::Open), &[]).unwrap();
        // qubits: site0 slots 0,1; site1 slots 0,1; terminators t0, t1
        assert_eq!(s.num_qubits(), 6);
        assert!((s.norm_sqr() - 8.0).abs() < 1e-12);
    }

    #[test]
    fn apply_matches_manual_pauli() {
        let mut s = DenseState { amps: vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)], labels: vec![QubitLabel::Logical { site: 0 }, QubitLabel::Logical { site: 1 }] };
        s.apply_single(1, &Mat2::pauli(Outcome::X));
        assert_eq!(s.amps[1], C64::new(1.0, 0.0));
        s.apply_single(0, &Mat2::pauli(Outcome::Y));
        assert_eq!(s.amps[3], C64::new(0.0, 1.0));
    }

    #[test]
    fn qubit_budget_is_enforced() {
        let big = Lattice::chain(13, Boundary::Open);
        assert!(matches!(build_aklt(&big), Err(Error::QubitBudget { .. })));
    }
}

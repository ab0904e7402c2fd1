//! Stabilizer checks of post-POVM states against their domain graph.
//!
//! Every check runs on the compressed state (one logical qubit per site),
//! which is exact: the post-POVM state lies in the span of `|a a a>` and
//! `|ā ā ā>` at every site, so `<ψ|P|ψ> = <c|B† P B|c>` for any operator `P`.

use std::collections::VecDeque;

use num_complex::Complex64;
use serde::Serialize;

use crate::domains::{build_graph, label_domains, DomainDecomposition, GraphState, Outcome, OutcomeConfig, Weight};
use crate::error::{Error, Result};
use crate::lattice::Lattice;

use super::dense::{aligned_state, axis_state, build_aklt, compress, DenseState, Mat2, QubitLabel, C64};

const TOL: f64 = 1e-10;

/// Pauli factors on virtual or terminator qubits, times a sign.
#[derive(Clone, Debug, Default)]
pub struct PauliString {
    pub sign: f64,
    pub factors: Vec<(QubitLabel, Outcome)>,
}

impl PauliString {
    pub fn new(sign: f64, factors: Vec<(QubitLabel, Outcome)>) -> Self {
        PauliString { sign, factors }
    }
}

/// Compressed operator: `scalar * ⊗ mats`, keyed by compressed qubit position.
#[derive(Clone, Debug)]
struct LocalOp {
    scalar: C64,
    mats: Vec<(usize, Mat2)>,
}

/// A normalised post-POVM state in compressed form together with its domains.
pub struct EncodedState<'a> {
    lattice: &'a Lattice,
    labels: Vec<Outcome>,
    pub decomp: DomainDecomposition,
    pub graph: GraphState,
    pub state: DenseState,
    /// Unnormalised outcome probability times `<Φ|Φ>`; zero configs are rejected.
    pub weight: f64,
    /// `λ_v = ±1` from a two-colouring of each domain.
    pub lambda: Vec<f64>,
}

impl<'a> EncodedState<'a> {
    pub fn new(lattice: &'a Lattice, config: &OutcomeConfig) -> Result<Self> {
        let aklt = build_aklt(lattice)?;
        let state = compress(&aklt, lattice, config.labels());
        Self::from_compressed(lattice, config, state, aklt.norm_sqr())
    }

    /// Wraps an already compressed state; `aklt_norm` is `<Φ|Φ>`.
    pub fn from_compressed(lattice: &'a Lattice, config: &OutcomeConfig, state: DenseState, aklt_norm: f64) -> Result<Self> {
        let decomp = label_domains(lattice, config)?;
        if decomp.log2_weight() == Weight::Zero {
            return Err(Error::ZeroProbability);
        }
        let weight = state.norm_sqr();
        if weight <= 1e-12 * aklt_norm {
            return Err(Error::ZeroProbability);
        }
        let graph = build_graph(lattice, &decomp);
        let lambda = domain_signs(lattice, &decomp);
        Ok(EncodedState { lattice, labels: config.labels().to_vec(), decomp, graph, state: state.normalized(), weight, lambda })
    }

    fn logical(&self, site: usize) -> usize {
        self.state.position(QubitLabel::Logical { site }).expect("logical qubit")
    }

    fn compress_op(&self, p: &PauliString) -> LocalOp {
        let k = self.lattice.arity();
        let mut touched: Vec<(usize, Vec<Option<Outcome>>)> = Vec::new();
        let mut mats = Vec::new();
        for &(label, a) in &p.factors {
            match label {
                QubitLabel::Virtual { site, slot } => {
                    let entry = match touched.iter_mut().find(|(s, _)| *s == site) {
                        Some(e) => e,
                        None => {
                            touched.push((site, vec![None; k]));
                            touched.last_mut().unwrap()
                        }
                    };
                    assert!(entry.1[slot].is_none(), "two factors on one qubit");
                    entry.1[slot] = Some(a);
                }
                QubitLabel::Terminator { .. } => {
                    let pos = self.state.position(label).expect("terminator qubit");
                    mats.push((pos, Mat2::pauli(a)));
                }
                QubitLabel::Logical { .. } => panic!("logical qubits take compressed operators"),
            }
        }
        for (site, slots) in touched {
            mats.push((self.logical(site), compressed_site_op(self.labels[site], &slots)));
        }
        LocalOp { scalar: C64::new(p.sign, 0.0), mats }
    }

    fn expect_local(&self, state: &DenseState, op: &LocalOp) -> C64 {
        let mut out = state.clone();
        for (pos, m) in &op.mats {
            out.apply_single(*pos, m);
        }
        op.scalar * state.inner(&out)
    }

    /// `<ψ|P|ψ>` for a Pauli string on the uncompressed qubits.
    pub fn expectation(&self, p: &PauliString) -> C64 {
        self.expect_local(&self.state, &self.compress_op(p))
    }

    /// Two-point code stabilizers `λ_u λ_v σ_a^u σ_a^v` of one domain.
    pub fn code_stabilizers(&self, d: usize) -> Vec<PauliString> {
        let members = self.decomp.members(d);
        let a = self.decomp.label(d);
        let root = members[0];
        members[1..]
            .iter()
            .map(|&u| {
                PauliString::new(
                    self.lambda[root] * self.lambda[u],
                    vec![(QubitLabel::Virtual { site: root, slot: 0 }, a), (QubitLabel::Virtual { site: u, slot: 0 }, a)],
                )
            })
            .collect()
    }

    /// Product of bond stabilizers around domain `d`, signed to be `+1`.
    ///
    /// Bonds leaving the domain carry the neighbour's outcome axis, internal
    /// and boundary bonds an axis different from the domain's.
    pub fn domain_generator(&self, d: usize) -> PauliString {
        let a = self.decomp.label(d);
        let other = a.others()[0];
        let mut factors = Vec::new();
        let mut bonds = 0;
        let mut seen = vec![false; self.lattice.num_edges()];
        for &v in self.decomp.members(d) {
            for (slot, &(w, e)) in self.lattice.incident(v).iter().enumerate() {
                if seen[e] {
                    continue;
                }
                seen[e] = true;
                bonds += 1;
                let dw = self.decomp.domain_of(w);
                let axis = if dw == d { other } else { self.decomp.label(dw) };
                factors.push((QubitLabel::Virtual { site: v, slot }, axis));
                factors.push((QubitLabel::Virtual { site: w, slot: slot_of(self.lattice, w, e) }, axis));
            }
            let deg = self.lattice.degree(v);
            for index in 0..self.lattice.terminators(v) {
                bonds += 1;
                factors.push((QubitLabel::Virtual { site: v, slot: deg + index }, other));
                factors.push((QubitLabel::Terminator { site: v, index }, other));
            }
        }
        PauliString::new(if bonds % 2 == 0 { 1.0 } else { -1.0 }, factors)
    }

    pub fn check(&self) -> EncodedReport {
        let mut report = EncodedReport::default();
        for d in 0..self.decomp.num_domains() {
            for s in self.code_stabilizers(d) {
                report.record(format!("code stabilizer of domain {d}"), self.expectation(&s));
            }
            let g = self.domain_generator(d);
            report.record(format!("generator of domain {d}"), self.expectation(&g));
            // Z factors per neighbouring domain must match the logical adjacency.
            let mut count = vec![0usize; self.decomp.num_domains()];
            for &(label, _) in &g.factors {
                if let QubitLabel::Virtual { site, .. } = label {
                    count[self.decomp.domain_of(site)] += 1;
                }
            }
            for (mu, &c) in count.iter().enumerate() {
                if mu != d && (c % 2 == 1) != self.graph.has_edge(d, mu) {
                    report.failures.push(format!("generator of domain {d} has {c} factors on domain {mu}"));
                }
            }
        }
        report
    }

    /// Measures every site of domain `d` except `kept` in the `|a..a> ± |ā..ā>`
    /// basis, for every outcome pattern, and checks the reduced encoding.
    pub fn check_decoding(&self, d: usize, kept: usize) -> Result<EncodedReport> {
        let members = self.decomp.members(d).to_vec();
        if !members.contains(&kept) {
            return Err(Error::Param(format!("site {kept} is not in domain {d}")));
        }
        let measured: Vec<usize> = members.iter().copied().filter(|&u| u != kept).collect();
        let mut report = EncodedReport::default();
        let generators: Vec<LocalOp> = (0..self.decomp.num_domains())
            .flat_map(|c| {
                let mut ops = vec![self.domain_generator(c)];
                if c != d {
                    ops.extend(self.code_stabilizers(c));
                }
                ops
            })
            .map(|p| self.compress_op(&p))
            .collect();
        let kpos = self.logical(kept);
        let mut total = 0.0;
        for pattern in 0..1usize << measured.len() {
            let outcomes: Vec<f64> = (0..measured.len()).map(|i| if pattern >> i & 1 == 0 { 1.0 } else { -1.0 }).collect();
            let mut post = self.state.clone();
            for (&u, &s) in measured.iter().zip(&outcomes) {
                post.apply_single(self.logical(u), &projector(s));
            }
            let p = post.norm_sqr();
            total += p;
            let want = 0.5f64.powi(measured.len() as i32);
            if (p - want).abs() > TOL {
                report.failures.push(format!("outcome pattern {pattern} has probability {p}, expected {want}"));
                continue;
            }
            let post = post.normalized();

            let predicted = self.decoded_prediction(&measured, kept, &outcomes);
            report.record(format!("decoded state for pattern {pattern}"), C64::new(predicted.inner(&post).norm(), 0.0));

            for op in &generators {
                match self.reduce_op(op, &measured, &outcomes, kept, kpos) {
                    Some(reduced) => report.record(format!("reduced generator, pattern {pattern}"), self.expect_local(&post, &reduced)),
                    None => report.failures.push("generator factor on a measured site is not a Pauli".into()),
                }
            }
        }
        if (total - 1.0).abs() > TOL {
            report.failures.push(format!("branch probabilities sum to {total}"));
        }
        Ok(report)
    }

    /// Code-space restriction of the state with the domain read off at `kept`,
    /// the measured qubits set to their outcomes, and `Z` corrected by the sign.
    fn decoded_prediction(&self, measured: &[usize], kept: usize, outcomes: &[f64]) -> DenseState {
        let q = self.state.num_qubits();
        let bit = |pos: usize| 1usize << (q - 1 - pos);
        let kmask = bit(self.logical(kept));
        let flips: Vec<(usize, bool)> =
            measured.iter().map(|&u| (bit(self.logical(u)), self.lambda[u] != self.lambda[kept])).collect();
        let all: usize = flips.iter().map(|f| f.0).sum::<usize>() | kmask;
        let parity: f64 = outcomes.iter().product();
        let mut amps = vec![C64::new(0.0, 0.0); self.state.amps.len()];
        for rest in (0..self.state.amps.len()).filter(|i| i & all == 0) {
            for b in [false, true] {
                let src = flips.iter().filter(|f| f.1 != b).fold(rest | if b { kmask } else { 0 }, |acc, f| acc | f.0);
                let sign = if b && parity < 0.0 { -1.0 } else { 1.0 };
                let a = self.state.amps[src] * sign;
                // each measured qubit sits in the X eigenstate of its outcome
                for sub in 0..1usize << flips.len() {
                    let mut idx = rest | if b { kmask } else { 0 };
                    let mut amp = a;
                    for (i, (f, &s)) in flips.iter().zip(outcomes).enumerate() {
                        let one = sub >> i & 1 == 1;
                        if one {
                            idx |= f.0;
                        }
                        amp *= axis_state(Outcome::X, s > 0.0)[one as usize];
                    }
                    amps[idx] += amp;
                }
            }
        }
        DenseState { amps, labels: self.state.labels.clone() }.normalized()
    }

    /// Rewrites a generator so that it acts trivially on the measured qubits,
    /// using `X_u -> s_u` and `Z_u -> λ_u λ_k Z_k`.
    fn reduce_op(&self, op: &LocalOp, measured: &[usize], outcomes: &[f64], kept: usize, kpos: usize) -> Option<LocalOp> {
        let mut scalar = op.scalar;
        let mut z_on_kept = false;
        let mut mats = Vec::new();
        let mut kept_mat = None;
        for &(pos, m) in &op.mats {
            if let Some(i) = measured.iter().position(|&u| self.logical(u) == pos) {
                let u = measured[i];
                let off_diagonal = m.0[0].norm() < TOL && m.0[3].norm() < TOL;
                let (diag, sx) = if off_diagonal { (Mat2::pauli(Outcome::X).mul(&m), outcomes[i]) } else { (m, 1.0) };
                let d0 = (diag.0[0] + diag.0[3]) / 2.0;
                let d1 = (diag.0[0] - diag.0[3]) / 2.0;
                if diag.0[1].norm() > TOL || diag.0[2].norm() > TOL || (d0.norm() > TOL) == (d1.norm() > TOL) {
                    return None;
                }
                if d0.norm() > TOL {
                    scalar *= d0 * sx;
                } else {
                    scalar *= d1 * sx * self.lambda[u] * self.lambda[kept];
                    z_on_kept = !z_on_kept;
                }
            } else if pos == kpos {
                kept_mat = Some(m);
            } else {
                mats.push((pos, m));
            }
        }
        let mut km = kept_mat.unwrap_or_else(Mat2::identity);
        if z_on_kept {
            km = km.mul(&Mat2::pauli(Outcome::Z));
        }
        mats.push((kpos, km));
        Some(LocalOp { scalar, mats })
    }
}

/// `B† (⊗ σ) B` with `B = [|a a a>, |ā ā ā>]`; unlisted slots carry identity.
fn compressed_site_op(a: Outcome, slots: &[Option<Outcome>]) -> Mat2 {
    let basis = [aligned_state(a, true, 1), aligned_state(a, false, 1)];
    let mut m = Mat2::real(1.0, 1.0, 1.0, 1.0);
    for slot in slots {
        // ⟨a_i| σ |a_j⟩ per slot, multiplied across slots.
        let p = slot.map(Mat2::pauli).unwrap_or_else(Mat2::identity);
        let mut local = [C64::new(0.0, 0.0); 4];
        for i in 0..2 {
            for j in 0..2 {
                let pj = [p.0[0] * basis[j][0] + p.0[1] * basis[j][1], p.0[2] * basis[j][0] + p.0[3] * basis[j][1]];
                local[i * 2 + j] = basis[i][0].conj() * pj[0] + basis[i][1].conj() * pj[1];
            }
        }
        // The aligned states are products, so matrix elements factorise per slot.
        for (x, l) in m.0.iter_mut().zip(local) {
            *x *= l;
        }
    }
    m
}

fn projector(s: f64) -> Mat2 {
    let v = axis_state(Outcome::X, s > 0.0);
    Mat2([v[0] * v[0].conj(), v[0] * v[1].conj(), v[1] * v[0].conj(), v[1] * v[1].conj()])
}

/// Slot of bond `e` at site `w`.
fn slot_of(lattice: &Lattice, w: usize, e: usize) -> usize {
    lattice.incident(w).iter().position(|&(_, f)| f == e).expect("bond incident to site")
}

fn domain_signs(lattice: &Lattice, decomp: &DomainDecomposition) -> Vec<f64> {
    let mut lambda = vec![0.0; lattice.num_sites()];
    let mut queue = VecDeque::new();
    for d in 0..decomp.num_domains() {
        let root = decomp.members(d)[0];
        lambda[root] = 1.0;
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            for w in lattice.neighbors(u) {
                if decomp.domain_of(w) == d && lambda[w] == 0.0 {
                    lambda[w] = -lambda[u];
                    queue.push_back(w);
                }
            }
        }
    }
    lambda
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct EncodedReport {
    pub checks: usize,
    pub failures: Vec<String>,
    pub max_residual: f64,
}

impl EncodedReport {
    fn record(&mut self, what: String, value: Complex64) {
        self.checks += 1;
        let residual = (value - C64::new(1.0, 0.0)).norm();
        self.max_residual = self.max_residual.max(residual);
        if residual > TOL {
            self.failures.push(format!("{what}: expectation {value}"));
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// True iff the post-POVM state is stabilised by every code stabilizer and
/// domain generator, with generator supports matching the domain graph.
pub fn verify_encoded_cluster(lattice: &Lattice, config: &OutcomeConfig) -> Result<bool> {
    Ok(EncodedState::new(lattice, config)?.check().passed())
}

/// Reduces domain `d` onto `kept` and checks both the decoded state and all
/// reduced generators, for every measurement outcome pattern.
pub fn verify_domain_decoding(lattice: &Lattice, config: &OutcomeConfig, d: usize, kept: usize) -> Result<bool> {
    Ok(EncodedState::new(lattice, config)?.check_decoding(d, kept)?.passed())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Boundary;
    use Outcome::*;

    #[test]
    fn open_chain_xzx_and_xzy() {
        let chain = Lattice::chain(3, Boundary::Open);
        for labels in [vec![X, Z, X], vec![X, Z, Y]] {
            let cfg = OutcomeConfig(labels);
            let enc = EncodedState::new(&chain, &cfg).unwrap();
            let report = enc.check();
            assert!(report.passed(), "{:?}", report.failures);
            assert_eq!(enc.graph.num_edges(), 2);
        }
    }

    #[test]
    fn compressed_expectations_match_full_space() {
        use crate::oracle::distribution::povm_element;
        let chain = Lattice::chain(3, Boundary::Open);
        let cfg = OutcomeConfig(vec![X, Z, Y]);
        let enc = EncodedState::new(&chain, &cfg).unwrap();
        let mut full = build_aklt(&chain).unwrap();
        for (site, &a) in cfg.labels().iter().enumerate() {
            full.apply(&[2 * site, 2 * site + 1], &povm_element(a, 2));
        }
        let full = full.normalized();
        for d in 0..3 {
            let g = enc.domain_generator(d);
            let mut out = full.clone();
            for &(label, a) in &g.factors {
                out.apply_single(full.position(label).unwrap(), &Mat2::pauli(a));
            }
            let direct = full.inner(&out) * g.sign;
            assert!((direct - enc.expectation(&g)).norm() < 1e-10, "{d}: {direct} vs {}", enc.expectation(&g));
        }
    }

    #[test]
    fn compressed_pauli_on_own_axis_is_logical_z() {
        let m = compressed_site_op(X, &[Some(X), None, None]);
        let z = Mat2::pauli(Z);
        assert!(m.0.iter().zip(z.0).all(|(a, b)| (a - b).norm() < 1e-12));
        let m = compressed_site_op(Z, &[Some(X), Some(X), Some(Y)]);
        assert!((m.0[2] - C64::new(0.0, 1.0)).norm() < 1e-12);
    }
}

//! Stabilizer tableaux on up to 64 qubits, stored as bitmasks.

use crate::error::{Error, Result};
use crate::domains::Outcome;

/// `i^phase · X^x · Z^z` with bit `q` of `x` / `z` acting on qubit `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pauli {
    pub x: u64,
    pub z: u64,
    pub phase: u8,
}

impl Pauli {
    pub fn identity() -> Pauli {
        Pauli { x: 0, z: 0, phase: 0 }
    }

    /// Hermitian single-qubit Pauli `σ_basis` on qubit `q`.
    pub fn single(q: usize, basis: Outcome) -> Pauli {
        let b = 1u64 << q;
        match basis {
            Outcome::X => Pauli { x: b, z: 0, phase: 0 },
            Outcome::Y => Pauli { x: b, z: b, phase: 1 },
            Outcome::Z => Pauli { x: 0, z: b, phase: 0 },
        }
    }

    pub fn mul(&self, o: &Pauli) -> Pauli {
        let swap = (self.z & o.x).count_ones() as u8;
        Pauli { x: self.x ^ o.x, z: self.z ^ o.z, phase: (self.phase + o.phase + 2 * swap) % 4 }
    }

    pub fn negate(&self) -> Pauli {
        Pauli { phase: (self.phase + 2) % 4, ..*self }
    }

    pub fn anticommutes(&self, o: &Pauli) -> bool {
        ((self.x & o.z).count_ones() + (self.z & o.x).count_ones()) % 2 == 1
    }

    fn support(&self) -> u64 {
        self.x | self.z
    }

    /// Bit `k` of the combined `(x, z)` word, x bits first.
    fn bit(&self, k: usize, n: usize) -> bool {
        if k < n {
            self.x >> k & 1 == 1
        } else {
            self.z >> (k - n) & 1 == 1
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tableau {
    n: usize,
    rows: Vec<Pauli>,
}

impl Tableau {
    /// `|0...0>` on `n` qubits.
    pub fn zero_state(n: usize) -> Self {
        assert!(n <= 64);
        Tableau { n, rows: (0..n).map(|q| Pauli::single(q, Outcome::Z)).collect() }
    }

    /// Graph state with generators `X_v Z_N(v)`.
    pub fn from_graph(n: usize, edges: &[(usize, usize)]) -> Self {
        assert!(n <= 64);
        let mut rows: Vec<Pauli> = (0..n).map(|v| Pauli::single(v, Outcome::X)).collect();
        for &(a, b) in edges {
            rows[a].z ^= 1 << b;
            rows[b].z ^= 1 << a;
        }
        Tableau { n, rows }
    }

    pub fn from_rows(n: usize, rows: Vec<Pauli>) -> Self {
        Tableau { n, rows }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Pauli] {
        &self.rows
    }

    /// Sign with which `p` lies in the stabilizer group, if it does.
    pub fn sign_of(&self, p: &Pauli) -> Option<bool> {
        let pivots = self.eliminated();
        let mut acc = Pauli::identity();
        let mut rest = *p;
        for (col, row) in pivots {
            if rest.bit(col, self.n) {
                acc = acc.mul(&row);
                rest = Pauli { x: rest.x ^ row.x, z: rest.z ^ row.z, phase: 0 };
            }
        }
        if rest.x != 0 || rest.z != 0 {
            return None;
        }
        Some(acc.phase == p.phase)
    }

    /// Pivot column and row of a reduced row echelon form, with phases.
    fn eliminated(&self) -> Vec<(usize, Pauli)> {
        let mut rows = self.rows.clone();
        let mut pivots = Vec::new();
        let mut next = 0;
        for col in 0..2 * self.n {
            let Some(r) = (next..rows.len()).find(|&r| rows[r].bit(col, self.n)) else { continue };
            rows.swap(next, r);
            let pivot = rows[next];
            for (i, row) in rows.iter_mut().enumerate() {
                if i != next && row.bit(col, self.n) {
                    *row = row.mul(&pivot);
                }
            }
            pivots.push((col, next));
            next += 1;
        }
        pivots.into_iter().map(|(c, r)| (c, rows[r])).collect()
    }

    /// Canonical generator list: reduced row echelon form, signs included.
    pub fn canonical(&self) -> Vec<Pauli> {
        self.eliminated().into_iter().map(|(_, r)| r).collect()
    }

    /// Measures `σ_basis` on qubit `q`, keeping the `+1` branch (or `-1` if
    /// `plus` is false). Errors when the wanted outcome has probability zero.
    pub fn measure(&mut self, q: usize, basis: Outcome, plus: bool) -> Result<()> {
        let p = Pauli::single(q, basis);
        let target = if plus { p } else { p.negate() };
        match self.rows.iter().position(|r| r.anticommutes(&p)) {
            Some(k) => {
                let pivot = self.rows[k];
                for (i, row) in self.rows.iter_mut().enumerate() {
                    if i != k && row.anticommutes(&p) {
                        *row = row.mul(&pivot);
                    }
                }
                self.rows[k] = target;
                Ok(())
            }
            None => match self.sign_of(&target) {
                Some(true) => Ok(()),
                Some(false) => Err(if plus { Error::DeterministicMinusOne } else { Error::ZeroProbability }),
                None => unreachable!("full-rank tableau contains every commuting Pauli up to sign"),
            },
        }
    }

    /// Removes qubit `q`, which must be in a Pauli eigenstate stabilised by
    /// one generator. Higher qubits shift down by one.
    pub fn discard(&mut self, q: usize) {
        let bit = 1u64 << q;
        let k = self
            .rows
            .iter()
            .position(|r| r.support() == bit)
            .unwrap_or_else(|| {
                // bring the tableau into a form where qubit q is isolated
                let canon = self.canonical();
                self.rows = canon;
                self.rows.iter().position(|r| r.support() == bit).expect("qubit is not in a product state")
            });
        let pivot = self.rows[k];
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != k && row.support() & bit != 0 {
                *row = row.mul(&pivot);
            }
        }
        self.rows.remove(k);
        let low = bit - 1;
        for row in &mut self.rows {
            debug_assert_eq!(row.support() & bit, 0);
            row.x = (row.x & low) | ((row.x >> 1) & !low);
            row.z = (row.z & low) | ((row.z >> 1) & !low);
        }
        self.n -= 1;
    }

    /// Measure then drop qubit `q`.
    pub fn measure_and_discard(&mut self, q: usize, basis: Outcome, plus: bool) -> Result<()> {
        self.measure(q, basis, plus)?;
        self.discard(q);
        Ok(())
    }

    /// All generators commute and are independent.
    pub fn is_valid(&self) -> bool {
        let commute = self.rows.iter().enumerate().all(|(i, a)| self.rows[i + 1..].iter().all(|b| !a.anticommutes(b)));
        commute && self.rows.len() == self.n && self.eliminated().len() == self.n
    }
}

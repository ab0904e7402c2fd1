//! Exact POVM outcome distributions by brute-force enumeration.

use crate::domains::{Outcome, OutcomeConfig};
use crate::error::{Error, Result};
use crate::lattice::Lattice;

use super::dense::{aligned_state, build_aklt, build_aklt_oriented, compression_rows, povm_weight, symmetric_projector, DenseState, QubitLabel, C64};

/// Enumeration limit on the number of sites (3^10 configurations).
pub const MAX_SITES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spin {
    One,
    ThreeHalves,
}

impl Spin {
    pub fn arity(self) -> usize {
        match self {
            Spin::One => 2,
            Spin::ThreeHalves => 3,
        }
    }
}

/// POVM element `F_a = c (|a..a><a..a| + |ā..ā><ā..ā|)` on `arity` qubits.
pub fn povm_element(a: Outcome, arity: usize) -> Vec<C64> {
    let dim = 1 << arity;
    let c = povm_weight(arity).sqrt();
    let mut m = vec![C64::new(0.0, 0.0); dim * dim];
    for up in [true, false] {
        let v = aligned_state(a, up, arity);
        for i in 0..dim {
            for j in 0..dim {
                m[i * dim + j] += c * v[i] * v[j].conj();
            }
        }
    }
    m
}

/// Largest entry of `Σ_a s_a² F_a† F_a - P_S`, with `scales = [s_x, s_y, s_z]`.
pub fn completeness_residual(spin: Spin, scales: [f64; 3]) -> f64 {
    let k = spin.arity();
    let dim = 1 << k;
    let mut sum = vec![C64::new(0.0, 0.0); dim * dim];
    for (a, s) in Outcome::ALL.into_iter().zip(scales) {
        let f: Vec<C64> = povm_element(a, k).into_iter().map(|x| x * s).collect();
        for i in 0..dim {
            for j in 0..dim {
                let ff: C64 = (0..dim).map(|t| f[t * dim + i].conj() * f[t * dim + j]).sum();
                sum[i * dim + j] += ff;
            }
        }
    }
    let p = symmetric_projector(k);
    sum.iter().zip(&p).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn verify_povm_completeness(spin: Spin) -> bool {
    completeness_residual(spin, [1.0; 3]) <= 1e-12
}

#[derive(Clone, Debug)]
pub struct ExactDistribution {
    pub num_sites: usize,
    /// Indexed by the base-3 configuration index (site 0 least significant).
    pub probs: Vec<f64>,
    /// `<Φ|Φ>` of the unnormalised AKLT state.
    pub norm: f64,
}

impl ExactDistribution {
    pub fn prob(&self, config: &OutcomeConfig) -> f64 {
        self.probs[config_index(config)]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (OutcomeConfig, f64)> + '_ {
        self.probs.iter().enumerate().map(|(i, &p)| (OutcomeConfig::from_index(self.num_sites, i as u64), p))
    }
}

pub fn config_index(config: &OutcomeConfig) -> usize {
    config.labels().iter().rev().fold(0, |acc, &a| acc * 3 + a.index())
}

pub fn exact_distribution(lattice: &Lattice) -> Result<ExactDistribution> {
    exact_distribution_oriented(lattice, &[])
}

/// As [`exact_distribution`] with some bonds' singlets written the other way round.
pub fn exact_distribution_oriented(lattice: &Lattice, reversed: &[bool]) -> Result<ExactDistribution> {
    let n = lattice.num_sites();
    if n > MAX_SITES {
        return Err(Error::Param(format!("{n} sites is too many to enumerate (max {MAX_SITES})")));
    }
    let aklt = if reversed.is_empty() { build_aklt(lattice)? } else { build_aklt_oriented(lattice, reversed)? };
    let norm = aklt.norm_sqr();
    let scale = povm_weight(lattice.arity()).powi(n as i32) / norm;
    let mut probs = vec![0.0; 3usize.pow(n as u32)];
    for_each_compressed(&aklt, lattice, |index, state| probs[index] = state.norm_sqr() * scale);
    Ok(ExactDistribution { num_sites: n, probs, norm })
}

/// Calls `f(config index, compressed state)` for all `3^N` configurations.
///
/// Sites are contracted one at a time so shared prefixes are computed once.
pub fn for_each_compressed(aklt: &DenseState, lattice: &Lattice, mut f: impl FnMut(usize, &DenseState)) {
    let rows: Vec<_> = Outcome::ALL.iter().map(|&a| compression_rows(a, lattice.arity())).collect();
    let total = 3usize.pow(lattice.num_sites() as u32);
    descend(aklt, lattice.arity(), 0, 0, 1, total, &rows, &mut f);
}

#[allow(clippy::too_many_arguments)]
fn descend(
    state: &DenseState,
    arity: usize,
    site: usize,
    index: usize,
    place: usize,
    total: usize,
    rows: &[Vec<Vec<C64>>],
    f: &mut impl FnMut(usize, &DenseState),
) {
    if place == total {
        f(index, state);
        return;
    }
    for (a, r) in rows.iter().enumerate() {
        let next = state.contract_front(arity, r, &[QubitLabel::Logical { site }]);
        descend(&next, arity, site + 1, index + a * place, place * 3, total, rows, f);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Boundary;

    #[test]
    fn completeness_holds_and_fails_when_scaled() {
        assert!(verify_povm_completeness(Spin::One));
        assert!(verify_povm_completeness(Spin::ThreeHalves));
        assert!(completeness_residual(Spin::ThreeHalves, [1.0, 1.0, 2.0]) > 0.1);
    }

    #[test]
    fn ring_of_three() {
        let d = exact_distribution(&Lattice::chain(3, Boundary::Periodic)).unwrap();
        assert!((d.total() - 1.0).abs() < 1e-12);
        for (cfg, p) in d.iter() {
            let same = cfg.labels().iter().all(|&a| a == cfg.labels()[0]);
            let want = if same { 0.0 } else { 1.0 / 24.0 };
            assert!((p - want).abs() < 1e-12, "{cfg:?} {p}");
        }
    }
}

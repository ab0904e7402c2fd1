//! One-pass comparison of an exact distribution with the weight formula,
//! plus the encoded-cluster check on every positive-probability outcome.

use serde::Serialize;

use crate::domains::{label_domains, OutcomeConfig, Weight};
use crate::error::{Error, Result};
use crate::lattice::Lattice;

use super::dense::{build_aklt, povm_weight, qubit_count};
use super::distribution::{for_each_compressed, MAX_SITES};
use super::encoded::EncodedState;

/// Probabilities below this (relative to the largest) count as zero.
const ZERO: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigRow {
    /// Outcome labels, site 0 first.
    pub config: String,
    pub probability: f64,
    /// `2^(|V| - |ℰ|)` normalised over all configurations; 0 for odd cycles.
    pub predicted: f64,
    pub log2_weight: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceReport {
    pub instance: String,
    pub sites: usize,
    pub qubits: usize,
    /// `|Σ p - 1|`.
    pub normalization_residual: f64,
    /// Largest `|p - predicted| / predicted` over positive predictions, and
    /// largest `p` where the prediction is zero.
    pub formula_residual: f64,
    pub positive_configs: usize,
    pub encoded_checked: usize,
    /// Configurations whose encoded-cluster check failed.
    pub encoded_failures: Vec<String>,
    pub rows: Vec<ConfigRow>,
}

impl InstanceReport {
    pub fn encoded_passed(&self) -> bool {
        self.encoded_failures.is_empty()
    }
}

fn label_string(config: &OutcomeConfig) -> String {
    config.labels().iter().map(|a| a.to_string()).collect()
}

/// Enumerates all `3^N` outcomes of `lattice`. With `check_encoded`, every
/// positive-probability outcome is also run through the encoded-cluster
/// check, sharing one dense AKLT state.
pub fn instance_report(lattice: &Lattice, instance: &str, check_encoded: bool) -> Result<InstanceReport> {
    let n = lattice.num_sites();
    if n > MAX_SITES {
        return Err(Error::Param(format!("{n} sites is too many to enumerate (max {MAX_SITES})")));
    }
    let aklt = build_aklt(lattice)?;
    let norm = aklt.norm_sqr();
    let scale = povm_weight(lattice.arity()).powi(n as i32) / norm;
    let total = 3usize.pow(n as u32);
    let mut probs = vec![0.0; total];
    let mut encoded_checked = 0;
    let mut encoded_failures = Vec::new();
    let mut failure: Option<Error> = None;
    for_each_compressed(&aklt, lattice, |index, state| {
        let p = state.norm_sqr() * scale;
        probs[index] = p;
        if !check_encoded || failure.is_some() || p <= ZERO {
            return;
        }
        let config = OutcomeConfig::from_index(n, index as u64);
        match EncodedState::from_compressed(lattice, &config, state.clone(), norm) {
            Ok(enc) => {
                encoded_checked += 1;
                if !enc.check().passed() {
                    encoded_failures.push(label_string(&config));
                }
            }
            Err(Error::ZeroProbability) => {}
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }

    let mut weights = Vec::with_capacity(total);
    for index in 0..total {
        let config = OutcomeConfig::from_index(n, index as u64);
        weights.push(label_domains(lattice, &config)?.log2_weight());
    }
    let top = weights.iter().filter_map(|w| w.exponent()).max().unwrap_or(0);
    let rel = |w: &Weight| w.exponent().map_or(0.0, |k| 2f64.powi((k - top) as i32));
    let z: f64 = weights.iter().map(rel).sum();
    let mut formula_residual: f64 = 0.0;
    let mut rows = Vec::with_capacity(total);
    for (index, (&p, w)) in probs.iter().zip(&weights).enumerate() {
        let predicted = rel(w) / z;
        formula_residual = formula_residual.max(if predicted > 0.0 { (p - predicted).abs() / predicted } else { p });
        let config = OutcomeConfig::from_index(n, index as u64);
        rows.push(ConfigRow { config: label_string(&config), probability: p, predicted, log2_weight: w.exponent() });
    }
    Ok(InstanceReport {
        instance: instance.to_string(),
        sites: n,
        qubits: qubit_count(lattice),
        normalization_residual: (probs.iter().sum::<f64>() - 1.0).abs(),
        formula_residual,
        positive_configs: probs.iter().filter(|&&p| p > ZERO).count(),
        encoded_checked,
        encoded_failures,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Boundary;

    #[test]
    fn periodic_chain_of_four() {
        let r = instance_report(&Lattice::chain(4, Boundary::Periodic), "chain", true).unwrap();
        assert!(r.normalization_residual < 1e-10);
        assert!(r.formula_residual < 1e-9);
        assert_eq!(r.positive_configs, 81);
        assert_eq!(r.encoded_checked, 81);
        assert!(r.encoded_passed());
        let xxxx = r.rows.iter().find(|row| row.config == "xxxx").unwrap();
        assert!((xxxx.probability - 1.0 / 42.0).abs() < 1e-12);
    }
}

use aklt_core::metropolis::{run_chain, run_chain_with, ChainParams, DeltaMode, InitMode, Sampler};
use aklt_core::oracle::distribution::config_index;
use aklt_core::oracle::exact_distribution;
use aklt_core::rng::stream;
use aklt_core::{log2_weight, Boundary, Lattice, LatticeKind, OutcomeConfig};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Visit counts indexed like the exact distribution.
fn histogram(lattice: &Lattice, params: &ChainParams) -> (Vec<u64>, u64) {
    let mut counts = vec![0u64; 3usize.pow(lattice.num_sites() as u32)];
    let mut total = 0;
    run_chain_with(lattice, params, 0, |_, labels| {
        counts[config_index(&OutcomeConfig(labels.to_vec()))] += 1;
        total += 1;
    })
    .unwrap();
    (counts, total)
}

/// Pearson statistic over the cells with positive expected probability and
/// its upper-tail p-value; observations in zero-probability cells are
/// returned separately.
fn chi_square(counts: &[u64], probs: &[f64], total: u64) -> (f64, u64) {
    let mut stat = 0.0;
    let mut cells = 0;
    let mut forbidden = 0;
    for (&k, &p) in counts.iter().zip(probs) {
        if p < 1e-15 {
            forbidden += k;
            continue;
        }
        let e = p * total as f64;
        stat += (k as f64 - e).powi(2) / e;
        cells += 1;
    }
    let p_value = ChiSquared::new((cells - 1) as f64).unwrap().sf(stat);
    (p_value, forbidden)
}

#[test]
fn ring_of_three_visits_the_24_mixed_configurations_uniformly() {
    let ring = Lattice::chain(3, Boundary::Periodic);
    let exact = exact_distribution(&ring).unwrap();
    let params = ChainParams { seed: 1, warmup: 100, sweeps: 200_000, interval: 5, init: InitMode::Uniform };
    let (counts, total) = histogram(&ring, &params);
    assert_eq!(exact.probs.iter().filter(|&&p| (p - 1.0 / 24.0).abs() < 1e-12).count(), 24);
    let (p_value, forbidden) = chi_square(&counts, &exact.probs, total);
    assert_eq!(forbidden, 0, "an all-same configuration was visited");
    assert!(p_value > 1e-3, "chi-square p = {p_value}");
}

#[test]
fn ring_of_four_visits_uniform_configurations_twice_as_often() {
    let ring = Lattice::chain(4, Boundary::Periodic);
    let params = ChainParams { seed: 2, warmup: 100, sweeps: 300_000, interval: 3, init: InitMode::Uniform };
    let (counts, total) = histogram(&ring, &params);
    let uniform: Vec<usize> = (0..3).map(|a| config_index(&OutcomeConfig::uniform(4, aklt_core::Outcome::from_index(a)))).collect();
    let same = uniform.iter().map(|&i| counts[i]).sum::<u64>() as f64 / 3.0;
    let mixed = (total - uniform.iter().map(|&i| counts[i]).sum::<u64>()) as f64 / 78.0;
    // 1/42 against 1/84 per configuration
    let ratio = same / mixed;
    assert!((ratio - 2.0).abs() < 0.1, "ratio {ratio}");
}

#[test]
fn smallest_torus_matches_the_exact_distribution() {
    let torus = Lattice::build(LatticeKind::Honeycomb, 2, Boundary::Periodic).unwrap();
    let exact = exact_distribution(&torus).unwrap();
    let params = ChainParams { seed: 3, warmup: 100, sweeps: 200_000, interval: 4, init: InitMode::Uniform };
    let (counts, total) = histogram(&torus, &params);
    let n = total as f64;
    for (i, (&k, &p)) in counts.iter().zip(&exact.probs).enumerate() {
        let sigma = (p * (1.0 - p) / n).sqrt();
        assert!((k as f64 / n - p).abs() <= 3.0 * sigma, "config {i}: {} vs {p}", k as f64 / n);
    }
    let (p_value, forbidden) = chi_square(&counts, &exact.probs, total);
    assert_eq!(forbidden, 0);
    assert!(p_value > 1e-3, "chi-square p = {p_value}");
}

#[test]
fn odd_ring_never_enters_a_zero_weight_state() {
    let ring = Lattice::chain(5, Boundary::Periodic);
    let params = ChainParams { seed: 4, warmup: 0, sweeps: 20_000, interval: 1, init: InitMode::Uniform };
    run_chain_with(&ring, &params, 0, |_, labels| {
        assert!(log2_weight(&ring, &OutcomeConfig(labels.to_vec())).unwrap().exponent().is_some());
    })
    .unwrap();
}

#[test]
fn honeycomb_proposals_never_hit_zero_weight() {
    let lattice = Lattice::build(LatticeKind::Honeycomb, 6, Boundary::Periodic).unwrap();
    let mut rng = stream(5, &[0]);
    for _ in 0..2000 {
        let config = OutcomeConfig::random(lattice.num_sites(), &mut rng);
        assert!(log2_weight(&lattice, &config).unwrap().exponent().is_some());
    }
}

#[test]
fn identical_parameters_give_identical_streams() {
    let lattice = Lattice::build(LatticeKind::Honeycomb, 8, Boundary::Periodic).unwrap();
    let params = ChainParams { seed: 9, warmup: 20, sweeps: 50, interval: 5, init: InitMode::Uniform };
    let a = run_chain(&lattice, &params).unwrap();
    let b = run_chain(&lattice, &params).unwrap();
    assert_eq!(a, b);
    let c = run_chain(&lattice, &ChainParams { seed: 10, ..params }).unwrap();
    assert_ne!(a.samples, c.samples);
}

#[test]
fn local_and_full_relabel_deltas_give_the_same_trajectory() {
    for (lattice, seed) in [
        (Lattice::build(LatticeKind::Honeycomb, 6, Boundary::Periodic).unwrap(), 1),
        (Lattice::build(LatticeKind::Honeycomb, 5, Boundary::Open).unwrap(), 2),
        (Lattice::chain(7, Boundary::Periodic), 3),
    ] {
        let mut fast = Sampler::new(&lattice, &InitMode::Uniform, stream(seed, &[1])).unwrap();
        let mut slow = Sampler::new(&lattice, &InitMode::Uniform, stream(seed, &[1])).unwrap().with_mode(DeltaMode::FullRelabel);
        for _ in 0..30 {
            fast.sweep();
            slow.sweep();
            assert_eq!(fast.labels(), slow.labels());
            assert_eq!(fast.log2_weight(), slow.log2_weight());
        }
        let full = log2_weight(&lattice, &fast.config()).unwrap().exponent().unwrap();
        assert_eq!(fast.log2_weight(), full);
    }
}

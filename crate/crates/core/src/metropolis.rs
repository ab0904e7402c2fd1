//! Single-site Metropolis sampling of outcome configurations with weight
//! `2^(|V| - |ℰ|)`.
//!
//! A flip of site `s` from `a` to `b` changes the weight exponent only
//! through the bonds at `s`: the `m` bonds to `a`-neighbours become
//! inter-domain, the `n_b` bonds to `b`-neighbours become internal, the old
//! `a`-domain splits into `c` pieces and `d` distinct `b`-domains merge. So
//! `Δ = (c - d) - (m - n_b)`, with `c` and `d` found by short flood fills.

use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domains::{label_domains, Outcome, OutcomeConfig, Weight};
use crate::error::{Error, Result};
use crate::lattice::Lattice;
use crate::rng::{stream, tag, StreamRng};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitMode {
    /// Every site uniformly x, y or z.
    Uniform,
    Given(OutcomeConfig),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainParams {
    pub seed: u64,
    pub warmup: usize,
    pub sweeps: usize,
    pub interval: usize,
    pub init: InitMode,
}

impl Default for ChainParams {
    fn default() -> Self {
        ChainParams { seed: 0, warmup: 1000, sweeps: 10_000, interval: 10, init: InitMode::Uniform }
    }
}

impl ChainParams {
    pub fn validate(&self) -> Result<()> {
        if self.interval == 0 {
            return Err(Error::Param("measurement interval must be >= 1".into()));
        }
        Ok(())
    }
}

/// How the weight change of a proposal is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeltaMode {
    /// Flood fills around the flipped site.
    Local,
    /// Relabel the whole configuration before and after.
    FullRelabel,
}

/// `min(1, 2^Δ)`.
pub fn acceptance_probability(delta: i64) -> f64 {
    if delta >= 0 {
        1.0
    } else {
        (delta as f64).exp2()
    }
}

pub struct Sampler<'a> {
    lattice: &'a Lattice,
    labels: Vec<Outcome>,
    log2: i64,
    rng: StreamRng,
    mode: DeltaMode,
    stamp: Vec<u32>,
    epoch: u32,
    queue: VecDeque<usize>,
    pub proposed: u64,
    pub accepted: u64,
}

impl<'a> Sampler<'a> {
    /// Starts from `init`; a uniform start is redrawn until it has positive weight.
    pub fn new(lattice: &'a Lattice, init: &InitMode, mut rng: StreamRng) -> Result<Self> {
        let n = lattice.num_sites();
        let config = match init {
            InitMode::Given(c) => c.clone(),
            InitMode::Uniform => loop {
                let c = OutcomeConfig::random(n, &mut rng);
                if label_domains(lattice, &c)?.log2_weight() != Weight::Zero {
                    break c;
                }
            },
        };
        let log2 = label_domains(lattice, &config)?
            .log2_weight()
            .exponent()
            .ok_or_else(|| Error::Config("initial configuration has zero weight".into()))?;
        Ok(Sampler {
            lattice,
            labels: config.0,
            log2,
            rng,
            mode: DeltaMode::Local,
            stamp: vec![0; n],
            epoch: 0,
            queue: VecDeque::new(),
            proposed: 0,
            accepted: 0,
        })
    }

    pub fn with_mode(mut self, mode: DeltaMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn labels(&self) -> &[Outcome] {
        &self.labels
    }

    pub fn config(&self) -> OutcomeConfig {
        OutcomeConfig(self.labels.clone())
    }

    /// Current `|V| - |ℰ|`.
    pub fn log2_weight(&self) -> i64 {
        self.log2
    }

    /// Proposes one of the two other labels at `site`, each with probability
    /// 1/2, and accepts with `min(1, 2^Δ)`. Zero-weight targets are rejected.
    pub fn propose_and_accept(&mut self, site: usize) -> bool {
        let a = self.labels[site];
        let b = a.others()[self.rng.random_range(0..2)];
        let delta = match self.mode {
            DeltaMode::Local => self.local_delta(site, b),
            DeltaMode::FullRelabel => self.full_delta(site, b),
        };
        // Always draw, so both delta modes consume the stream identically.
        let u: f64 = self.rng.random();
        self.proposed += 1;
        let Some(delta) = delta else { return false };
        if u < acceptance_probability(delta) {
            self.labels[site] = b;
            self.log2 += delta;
            self.accepted += 1;
            true
        } else {
            false
        }
    }

    /// `N` proposals at uniformly random sites.
    pub fn sweep(&mut self) {
        let n = self.lattice.num_sites();
        for _ in 0..n {
            let s = self.rng.random_range(0..n);
            self.propose_and_accept(s);
        }
    }

    fn full_delta(&mut self, site: usize, b: Outcome) -> Option<i64> {
        let mut cfg = self.config();
        let before = label_domains(self.lattice, &cfg).ok()?.log2_weight().exponent()?;
        cfg.0[site] = b;
        let after = label_domains(self.lattice, &cfg).ok()?.log2_weight().exponent()?;
        Some(after - before)
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.epoch
    }

    /// Number of groups the distinct sites in `seeds` fall into when joined
    /// through sites labelled `label`, never passing through `skip`.
    fn count_groups(&mut self, seeds: &[usize], label: Outcome, skip: usize) -> i64 {
        match seeds.len() {
            0 => return 0,
            1 => return 1,
            _ => {}
        }
        let epoch = self.next_epoch();
        let mut groups = 0;
        let mut found = 0;
        for (i, &s0) in seeds.iter().enumerate() {
            if self.stamp[s0] == epoch {
                continue;
            }
            groups += 1;
            self.stamp[s0] = epoch;
            found += 1;
            if found == seeds.len() {
                break;
            }
            if i + 1 == seeds.len() {
                break;
            }
            self.queue.clear();
            self.queue.push_back(s0);
            'fill: while let Some(u) = self.queue.pop_front() {
                for &(v, _) in self.lattice.incident(u) {
                    if v == skip || self.stamp[v] == epoch || self.labels[v] != label {
                        continue;
                    }
                    self.stamp[v] = epoch;
                    if seeds.contains(&v) {
                        found += 1;
                        if found == seeds.len() {
                            break 'fill;
                        }
                    }
                    self.queue.push_back(v);
                }
            }
        }
        groups
    }

    fn local_delta(&mut self, site: usize, b: Outcome) -> Option<i64> {
        let a = self.labels[site];
        let (mut m, mut nb) = (0i64, 0i64);
        let mut a_nbrs: Vec<usize> = Vec::with_capacity(4);
        let mut b_nbrs: Vec<usize> = Vec::with_capacity(4);
        for &(v, _) in self.lattice.incident(site) {
            if self.labels[v] == a {
                m += 1;
                if !a_nbrs.contains(&v) {
                    a_nbrs.push(v);
                }
            } else if self.labels[v] == b {
                nb += 1;
                if !b_nbrs.contains(&v) {
                    b_nbrs.push(v);
                }
            }
        }
        let c = self.count_groups(&a_nbrs, a, site);
        let d = self.count_groups(&b_nbrs, b, site);
        if !self.lattice.is_bipartite() && self.creates_odd_cycle(site, b) {
            return None;
        }
        Some((c - d) - (m - nb))
    }

    /// Whether relabelling `site` to `b` closes an odd cycle inside its new domain.
    fn creates_odd_cycle(&mut self, site: usize, b: Outcome) -> bool {
        let old = self.labels[site];
        self.labels[site] = b;
        let epoch = self.next_epoch();
        let mut color = std::collections::HashMap::new();
        color.insert(site, false);
        self.stamp[site] = epoch;
        self.queue.clear();
        self.queue.push_back(site);
        let mut odd = false;
        'fill: while let Some(u) = self.queue.pop_front() {
            let cu = color[&u];
            for &(v, _) in self.lattice.incident(u) {
                if self.labels[v] != b {
                    continue;
                }
                match color.get(&v) {
                    Some(&cv) if cv == cu => {
                        odd = true;
                        break 'fill;
                    }
                    Some(_) => {}
                    None => {
                        color.insert(v, !cu);
                        self.stamp[v] = epoch;
                        self.queue.push_back(v);
                    }
                }
            }
        }
        self.labels[site] = old;
        odd
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub sweep: usize,
    pub config: OutcomeConfig,
}

/// Configurations recorded after warmup, every `interval` sweeps.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleStream {
    pub samples: Vec<Sample>,
    pub acceptance_rate: f64,
}

/// Runs one chain and hands every recorded configuration to `visit`.
pub fn run_chain_with(
    lattice: &Lattice,
    params: &ChainParams,
    chain: u64,
    mut visit: impl FnMut(usize, &[Outcome]),
) -> Result<f64> {
    params.validate()?;
    let rng = stream(params.seed, &[tag::SAMPLE, chain]);
    let mut sampler = Sampler::new(lattice, &params.init, rng)?;
    for _ in 0..params.warmup {
        sampler.sweep();
    }
    for sweep in 1..=params.sweeps {
        sampler.sweep();
        if sweep % params.interval == 0 {
            visit(sweep, sampler.labels());
        }
    }
    Ok(sampler.accepted as f64 / sampler.proposed.max(1) as f64)
}

pub fn run_chain(lattice: &Lattice, params: &ChainParams) -> Result<SampleStream> {
    let mut samples = Vec::new();
    let acceptance_rate =
        run_chain_with(lattice, params, 0, |sweep, labels| samples.push(Sample { sweep, config: OutcomeConfig(labels.to_vec()) }))?;
    Ok(SampleStream { samples, acceptance_rate })
}

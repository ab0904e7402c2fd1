//! The five subcommands. Each writes its tables into the output directory.

use std::fmt;

use aklt_core::metropolis::{run_chain_with, ChainParams, InitMode};
use aklt_core::oracle::{instance_report, verify_povm_completeness, InstanceReport, Spin};
use aklt_core::percolation::{critical_points, curve_from_critical, estimate_threshold};
use aklt_core::reduction::{run_pipeline, scale_for, Measurement, PipelineParams, PipelineReport};
use aklt_core::rng::{derive_seed, tag};
use aklt_core::stats::{aggregate, extrapolate, fit_largest_domain, stats_of_config, GraphStats, SpanningProbe};
use aklt_core::{build_graph, label_domains, Boundary, Lattice, LatticeKind, OutcomeConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{ConfigError, Instance, RunConfig};
use crate::output::Table;

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Runtime(String),
    /// An oracle verdict or grid certificate did not hold.
    Verification(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Runtime(_) => 1,
            Failure::Config(_) => 2,
            Failure::Verification(_) => 3,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Runtime(m) => write!(f, "error: {m}"),
            Failure::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<aklt_core::Error> for Failure {
    fn from(e: aklt_core::Error) -> Self {
        match e {
            aklt_core::Error::Param(m) => Failure::Config(m),
            aklt_core::Error::Lattice(m) => Failure::Config(format!("invalid lattice: {m}")),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(format!("i/o: {e}"))
    }
}

type Outcome = Result<(), Failure>;

fn lattice(cfg: &RunConfig, size: usize) -> Result<Lattice, Failure> {
    Ok(Lattice::build(cfg.lattice, size, cfg.boundary)?)
}

fn chain_params(cfg: &RunConfig) -> ChainParams {
    ChainParams { seed: cfg.seed, warmup: cfg.warmup, sweeps: cfg.sweeps, interval: cfg.interval, init: InitMode::Uniform }
}

fn table(cfg: &RunConfig, name: &str) -> Result<Table, Failure> {
    Ok(Table::create(&cfg.out, name, cfg.format)?)
}

/// Recorded configurations of one chain, with their sweep numbers.
fn chain_samples(lattice: &Lattice, cfg: &RunConfig, chain: usize) -> Result<Vec<(usize, OutcomeConfig)>, Failure> {
    let mut out = Vec::new();
    run_chain_with(lattice, &chain_params(cfg), chain as u64, |sweep, labels| out.push((sweep, OutcomeConfig(labels.to_vec()))))?;
    Ok(out)
}

/// Runs `f` on every chain in parallel and returns the results in chain order.
fn per_chain<T: Send>(cfg: &RunConfig, f: impl Fn(usize) -> Result<T, Failure> + Sync + Send) -> Result<Vec<T>, Failure> {
    (0..cfg.chains).into_par_iter().map(f).collect()
}

#[derive(Serialize)]
struct SampleRow {
    #[serde(rename = "L")]
    size: usize,
    chain: usize,
    sweep: usize,
    vertices: usize,
    edges: usize,
    bonds: usize,
    components: usize,
    betti: usize,
    mean_degree: f64,
    domain_size_mean: f64,
    domain_size_std: f64,
    largest_domain: usize,
    span_horizontal: bool,
    span_vertical: bool,
    /// `|V| - |ℰ|`; empty when the configuration has zero weight.
    log2_weight: Option<i64>,
}

impl SampleRow {
    fn new(size: usize, chain: usize, sweep: usize, s: GraphStats, log2_weight: Option<i64>) -> Self {
        SampleRow {
            size,
            chain,
            sweep,
            vertices: s.vertices,
            edges: s.edges,
            bonds: s.bonds,
            components: s.components,
            betti: s.betti,
            mean_degree: s.mean_degree,
            domain_size_mean: s.domain_size_mean,
            domain_size_std: s.domain_size_std,
            largest_domain: s.largest_domain,
            span_horizontal: s.span_horizontal,
            span_vertical: s.span_vertical,
            log2_weight,
        }
    }
}

#[derive(Serialize)]
struct ChainRow {
    #[serde(rename = "L")]
    size: usize,
    chain: usize,
    samples: usize,
    acceptance_rate: f64,
}

/// Per-sample observables, streamed as they are produced.
pub fn sample(cfg: &RunConfig) -> Outcome {
    let mut samples = table(cfg, "samples")?;
    let mut chains = table(cfg, "chains")?;
    for &size in &cfg.sizes {
        let lattice = lattice(cfg, size)?;
        let probe = SpanningProbe::new(&lattice);
        for chain in 0..cfg.chains {
            let mut count = 0;
            let mut failure: Option<Failure> = None;
            let rate = run_chain_with(&lattice, &chain_params(cfg), chain as u64, |sweep, labels| {
                if failure.is_some() {
                    return;
                }
                let config = OutcomeConfig(labels.to_vec());
                let row = stats_of_config(&probe, &lattice, &config).and_then(|s| {
                    let w = label_domains(&lattice, &config)?.log2_weight().exponent();
                    Ok(SampleRow::new(size, chain, sweep, s, w))
                });
                match row {
                    Ok(row) => {
                        if let Err(e) = samples.row(&row) {
                            failure = Some(e.into());
                        }
                        count += 1;
                    }
                    Err(e) => failure = Some(e.into()),
                }
            })?;
            if let Some(f) = failure {
                return Err(f);
            }
            chains.row(&ChainRow { size, chain, samples: count, acceptance_rate: rate })?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct AggregateRow<'a> {
    #[serde(rename = "L")]
    size: usize,
    samples: usize,
    observable: &'a str,
    mean: f64,
    err: f64,
    bootstrap_err: f64,
    tau: f64,
    block: usize,
}

#[derive(Serialize)]
struct ExtrapolationRow<'a> {
    observable: &'a str,
    /// Value at `1/L = 0`.
    intercept: f64,
    intercept_err: f64,
    slope: f64,
    slope_err: f64,
    chi2: f64,
}

#[derive(Serialize)]
struct LargestRow {
    #[serde(rename = "L")]
    size: usize,
    sites: usize,
    mean_largest: f64,
    max_largest: usize,
    max_fraction: f64,
}

#[derive(Serialize)]
struct LargestFitRow {
    /// `a` in `a ln N + b`, fitted to the mean largest domain.
    slope: f64,
    slope_err: f64,
    intercept: f64,
    max_fraction: f64,
}

const DENSITIES: [&str; 7] =
    ["vertex_density", "edge_density", "bond_density", "betti_density", "mean_degree", "domain_size_mean", "largest_domain"];

/// Aggregates per size, `1/L` extrapolations and the largest-domain fit.
pub fn stats(cfg: &RunConfig) -> Outcome {
    let mut aggregates_out = table(cfg, "aggregates")?;
    let mut largest_out = table(cfg, "largest_domain")?;
    let mut aggregates = Vec::new();
    let mut means = Vec::new();
    let mut max_fraction: f64 = 0.0;
    for &size in &cfg.sizes {
        let lattice = lattice(cfg, size)?;
        let probe = SpanningProbe::new(&lattice);
        let per: Vec<Vec<GraphStats>> = per_chain(cfg, |chain| {
            chain_samples(&lattice, cfg, chain)?
                .iter()
                .map(|(_, config)| Ok(stats_of_config(&probe, &lattice, config)?))
                .collect()
        })?;
        let series: Vec<GraphStats> = per.into_iter().flatten().collect();
        let agg = aggregate(&series, size, derive_seed(cfg.seed, &[tag::STATS]))?;
        for e in &agg.estimates {
            aggregates_out.row(&AggregateRow {
                size,
                samples: agg.samples,
                observable: &e.name,
                mean: e.mean,
                err: e.err,
                bootstrap_err: e.bootstrap_err,
                tau: e.tau,
                block: e.block,
            })?;
        }
        let sites = lattice.num_sites();
        let max = series.iter().map(|s| s.largest_domain).max().unwrap_or(0);
        let mean = series.iter().map(|s| s.largest_domain as f64).sum::<f64>() / series.len() as f64;
        let fraction = max as f64 / sites as f64;
        max_fraction = max_fraction.max(fraction);
        largest_out.row(&LargestRow { size, sites, mean_largest: mean, max_largest: max, max_fraction: fraction })?;
        means.push((sites, mean));
        aggregates.push(agg);
    }
    if aggregates.len() >= 2 {
        let mut out = table(cfg, "extrapolations")?;
        for name in DENSITIES {
            let fit = extrapolate(&aggregates, name)?;
            out.row(&ExtrapolationRow {
                observable: name,
                intercept: fit.intercept,
                intercept_err: fit.intercept_err,
                slope: fit.slope,
                slope_err: fit.slope_err,
                chi2: fit.chi2,
            })?;
        }
    }
    if means.len() >= 3 {
        let fit = fit_largest_domain(&means)?;
        table(cfg, "largest_domain_fit")?.row(&LargestFitRow {
            slope: fit.slope,
            slope_err: fit.slope_err,
            intercept: fit.intercept,
            max_fraction,
        })?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CurveRow {
    #[serde(rename = "L")]
    size: usize,
    mode: String,
    p_delete: f64,
    p_cluster: f64,
    err: f64,
}

#[derive(Serialize)]
struct ThresholdRow {
    #[serde(rename = "L")]
    size: usize,
    mode: String,
    samples: usize,
    /// Spanning fraction without dilution.
    spanning_undiluted: f64,
    /// Empty when the curve never crosses 1/2 on the grid.
    p_delete: Option<f64>,
    err: Option<f64>,
    p_c: Option<f64>,
}

/// Spanning curves over the deletion grid and the 1/2-crossing thresholds.
pub fn percolate(cfg: &RunConfig) -> Outcome {
    if cfg.lattice != LatticeKind::Honeycomb {
        return Err(Failure::Config("percolate needs a honeycomb lattice".into()));
    }
    let mut curves = table(cfg, "curve")?;
    let mut thresholds = table(cfg, "threshold")?;
    for &size in &cfg.sizes {
        let lattice = lattice(cfg, size)?;
        let configs: Vec<OutcomeConfig> =
            per_chain(cfg, |chain| chain_samples(&lattice, cfg, chain))?.into_iter().flatten().map(|(_, c)| c).collect();
        let seed = derive_seed(cfg.seed, &[tag::PERCOLATE, size as u64]);
        let critical = critical_points(&lattice, &configs, cfg.mode, cfg.replicates, seed)?;
        let curve = curve_from_critical(&critical, &cfg.p_grid, size, cfg.mode)?;
        for p in &curve.points {
            curves.row(&CurveRow { size, mode: cfg.mode.to_string(), p_delete: p.p_delete, p_cluster: p.p_cluster, err: p.err })?;
        }
        let threshold = estimate_threshold(&curve).ok();
        thresholds.row(&ThresholdRow {
            size,
            mode: cfg.mode.to_string(),
            samples: curve.samples,
            spanning_undiluted: critical.iter().filter(|&&c| c >= 0.0).count() as f64 / critical.len() as f64,
            p_delete: threshold.map(|t| t.p_delete),
            err: threshold.map(|t| t.err),
            p_c: threshold.map(|t| t.p_c),
        })?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ReportLine<'a> {
    #[serde(rename = "L")]
    size: usize,
    chain: usize,
    sweep: usize,
    #[serde(flatten)]
    report: &'a PipelineReport,
}

#[derive(Serialize)]
struct CertificateLine<'a> {
    #[serde(rename = "L")]
    size: usize,
    chain: usize,
    sweep: usize,
    grid_size: usize,
    /// Graph vertex at each grid position, row-major.
    vertices: &'a [usize],
    /// Measurements that turn the sampled graph into the grid, in order.
    measurements: &'a [Measurement],
}

#[derive(Serialize)]
struct ReduceSummary {
    #[serde(rename = "L")]
    size: usize,
    l: usize,
    runs: usize,
    successes: usize,
    success_rate: f64,
    grid_size: usize,
}

/// Pipeline reports (JSON lines), grid certificates and a success summary.
pub fn reduce(cfg: &RunConfig) -> Outcome {
    if cfg.lattice != LatticeKind::Honeycomb {
        return Err(Failure::Config("reduce needs a honeycomb lattice".into()));
    }
    let mut reports = Table::create(&cfg.out, "reports", crate::config::Format::Jsonl)?;
    let mut certificates = Table::create(&cfg.out, "certificates", crate::config::Format::Jsonl)?;
    let mut summary = table(cfg, "reduce_summary")?;
    let params = PipelineParams { scale_constant: cfg.l_const, scale: None };
    let mut unaccounted = 0;
    for &size in &cfg.sizes {
        let lattice = lattice(cfg, size)?;
        let runs = per_chain(cfg, |chain| {
            chain_samples(&lattice, cfg, chain)?
                .into_iter()
                .map(|(sweep, config)| {
                    let decomp = label_domains(&lattice, &config)?;
                    let graph = build_graph(&lattice, &decomp);
                    let (report, cert) = run_pipeline(&graph, &lattice, &params)?;
                    Ok((chain, sweep, report, cert))
                })
                .collect::<Result<Vec<_>, Failure>>()
        })?;
        let (mut total, mut ok, mut grid) = (0, 0, 0);
        for (chain, sweep, report, cert) in runs.iter().flatten() {
            total += 1;
            reports.row(&ReportLine { size, chain: *chain, sweep: *sweep, report })?;
            if let Some(cert) = cert {
                ok += 1;
                grid = grid.max(cert.size);
                if !report.accounted {
                    unaccounted += 1;
                }
                certificates.row(&CertificateLine {
                    size,
                    chain: *chain,
                    sweep: *sweep,
                    grid_size: cert.size,
                    vertices: &cert.vertices,
                    measurements: &cert.measurements,
                })?;
            }
        }
        summary.row(&ReduceSummary {
            size,
            l: scale_for(size, cfg.l_const),
            runs: total,
            successes: ok,
            success_rate: ok as f64 / total.max(1) as f64,
            grid_size: grid,
        })?;
    }
    if unaccounted > 0 {
        return Err(Failure::Verification(format!("{unaccounted} certificates do not account for every vertex")));
    }
    Ok(())
}

#[derive(Serialize)]
struct DistributionRow<'a> {
    instance: &'a str,
    config: &'a str,
    probability: f64,
    predicted: f64,
    log2_weight: Option<i64>,
}

#[derive(Serialize)]
struct VerdictRow<'a> {
    instance: &'a str,
    check: &'a str,
    value: f64,
    tolerance: f64,
    passed: bool,
}

const NORM_TOL: f64 = 1e-10;
const FORMULA_TOL: f64 = 1e-9;

fn oracle_instances(cfg: &RunConfig) -> Result<Vec<(String, Lattice)>, Failure> {
    let chain = |n: usize, b: Boundary| {
        let name = format!("chain-{n}-{}", if b == Boundary::Periodic { "periodic" } else { "open" });
        (name, Lattice::chain(n, b))
    };
    Ok(match cfg.instance {
        Instance::Chain => cfg.sizes.iter().map(|&n| chain(n, cfg.boundary)).collect(),
        Instance::Star => vec![("star".into(), Lattice::star())],
        Instance::Dimer => vec![("dimer".into(), Lattice::dimer())],
        Instance::Hexagon => vec![("hexagon".into(), Lattice::hexagon())],
        Instance::All => {
            let mut v: Vec<_> = (3..=8).map(|n| chain(n, Boundary::Periodic)).collect();
            v.push(("star".into(), Lattice::star()));
            v.push(("dimer".into(), Lattice::dimer()));
            v.push(("hexagon".into(), Lattice::hexagon()));
            v
        }
    })
}

/// Largest deviation of a periodic chain's distribution from the closed
/// form: `1/(3^n + 3)` per mixed outcome (twice that for uniform ones) for
/// even `n`, `1/(3^n - 3)` per mixed outcome (uniform ones impossible) for
/// odd `n`.
fn closed_form_deviation(report: &InstanceReport) -> f64 {
    let n = report.sites as i32;
    let even = n % 2 == 0;
    let p0 = if even { 1.0 / (3f64.powi(n) + 3.0) } else { 1.0 / (3f64.powi(n) - 3.0) };
    report
        .rows
        .iter()
        .map(|row| {
            let uniform = row.config.chars().all(|c| Some(c) == row.config.chars().next());
            let want = match (uniform, even) {
                (false, _) => p0,
                (true, true) => 2.0 * p0,
                (true, false) => 0.0,
            };
            (row.probability - want).abs()
        })
        .fold(0.0, f64::max)
}

/// Exact distributions and every oracle verdict; fails verification if any
/// verdict does not hold.
pub fn oracle(cfg: &RunConfig) -> Outcome {
    let mut dist = table(cfg, "distribution")?;
    let mut verdicts = table(cfg, "verdicts")?;
    let mut failed = Vec::new();
    let mut verdict = |instance: &str, check: &str, value: f64, tolerance: f64| -> std::io::Result<()> {
        let passed = value <= tolerance;
        if !passed {
            failed.push(format!("{instance}/{check}"));
        }
        verdicts.row(&VerdictRow { instance, check, value, tolerance, passed })
    };
    for (spin, name) in [(Spin::One, "povm_completeness_spin1"), (Spin::ThreeHalves, "povm_completeness_spin3/2")] {
        verdict("-", name, if verify_povm_completeness(spin) { 0.0 } else { 1.0 }, 0.0)?;
    }
    for (name, lattice) in oracle_instances(cfg)? {
        let report = instance_report(&lattice, &name, true)?;
        for row in &report.rows {
            dist.row(&DistributionRow {
                instance: &name,
                config: &row.config,
                probability: row.probability,
                predicted: row.predicted,
                log2_weight: row.log2_weight,
            })?;
        }
        verdict(&name, "normalization", report.normalization_residual, NORM_TOL)?;
        verdict(&name, "weight_formula", report.formula_residual, FORMULA_TOL)?;
        verdict(&name, "encoded_cluster_failures", report.encoded_failures.len() as f64, 0.0)?;
        if name.starts_with("chain") && name.ends_with("periodic") {
            verdict(&name, "closed_form", closed_form_deviation(&report), NORM_TOL)?;
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Verification(failed.join(", ")))
    }
}

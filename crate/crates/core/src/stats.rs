//! Per-sample observables of the logical graph and their aggregation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domains::{label_domains, DomainDecomposition, GraphState, OutcomeConfig};
use crate::error::{Error, Result};
use crate::lattice::{Direction, Lattice, Region};
use crate::rng::{stream, tag};
use crate::union_find::UnionFind;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    /// |V|: number of domains.
    pub vertices: usize,
    /// |E|: simple edges after the mod-2 reduction.
    pub edges: usize,
    /// |ℰ|: inter-domain bonds before the mod-2 reduction.
    pub bonds: usize,
    pub components: usize,
    pub betti: usize,
    pub mean_degree: f64,
    pub domain_size_mean: f64,
    /// Standard deviation of the domain sizes.
    pub domain_size_std: f64,
    pub largest_domain: usize,
    pub span_horizontal: bool,
    pub span_vertical: bool,
}

/// Cut-open copies of a lattice, reused across samples for the crossing tests.
pub struct SpanningProbe {
    horizontal: Lattice,
    vertical: Lattice,
}

impl SpanningProbe {
    pub fn new(lattice: &Lattice) -> Self {
        SpanningProbe { horizontal: lattice.cut_open(Direction::Horizontal), vertical: lattice.cut_open(Direction::Vertical) }
    }

    /// Logical graph of `config` on the lattice cut open across `direction`,
    /// with the vertices touching the two opposite sides marked.
    pub fn crossing_graph(&self, config: &OutcomeConfig, direction: Direction) -> Result<CrossingGraph> {
        let lattice = match direction {
            Direction::Horizontal => &self.horizontal,
            Direction::Vertical => &self.vertical,
        };
        let decomp = label_domains(lattice, config)?;
        let region = lattice.full_region();
        let n = decomp.num_domains();
        let mut g = CrossingGraph { num_vertices: n, edges: Vec::new(), entry: vec![false; n], exit: vec![false; n] };
        for s in 0..lattice.num_sites() {
            let d = decomp.domain_of(s);
            g.entry[d] |= region.on_entry(lattice.coord(s), direction);
            g.exit[d] |= region.on_exit(lattice.coord(s), direction);
        }
        g.edges = decomp.multiplicities().iter().filter(|(_, &m)| m % 2 == 1).map(|(&e, _)| e).collect();
        Ok(g)
    }

    pub fn spans(&self, config: &OutcomeConfig, direction: Direction) -> Result<bool> {
        Ok(self.crossing_graph(config, direction)?.spans())
    }
}

/// A graph with two marked vertex sets: the sides a crossing path must join.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CrossingGraph {
    pub num_vertices: usize,
    pub edges: Vec<(usize, usize)>,
    pub entry: Vec<bool>,
    pub exit: Vec<bool>,
}

impl CrossingGraph {
    /// Restriction of `graph` to the vertices whose domains meet `region`.
    /// Domain membership uses the member sites' coordinates.
    pub fn from_graph(graph: &GraphState, lattice: &Lattice, region: &Region, direction: Direction) -> Self {
        let n = graph.num_vertices();
        let mut keep = vec![false; n];
        let mut entry = vec![false; n];
        let mut exit = vec![false; n];
        for (v, vx) in graph.vertices().iter().enumerate() {
            for &s in &vx.members {
                let c = lattice.coord(s);
                keep[v] |= region.contains(c);
                entry[v] |= region.on_entry(c, direction);
                exit[v] |= region.on_exit(c, direction);
            }
        }
        let edges = graph.edges().into_iter().filter(|&(a, b)| keep[a] && keep[b]).collect();
        CrossingGraph { num_vertices: n, edges, entry, exit }
    }

    pub fn spans(&self) -> bool {
        let n = self.num_vertices;
        let mut uf = UnionFind::new(n);
        for &(a, b) in &self.edges {
            uf.union(a, b);
        }
        let mut reach = vec![false; n];
        for v in (0..n).filter(|&v| self.entry[v]) {
            reach[uf.find(v)] = true;
        }
        (0..n).any(|v| self.exit[v] && reach[uf.find(v)])
    }
}

/// Whether the graph induced on the vertices whose domains meet `region`
/// has a path from a vertex touching the entry side to one touching the
/// exit side.
pub fn spanning_exists(graph: &GraphState, lattice: &Lattice, region: &Region, direction: Direction) -> Result<bool> {
    if region.width < 2 && direction == Direction::Horizontal || region.height < 2 && direction == Direction::Vertical {
        return Err(Error::Region(format!("rectangle {}x{} has no interior crossing", region.width, region.height)));
    }
    Ok(CrossingGraph::from_graph(graph, lattice, region, direction).spans())
}

pub fn compute_stats(graph: &GraphState, decomp: &DomainDecomposition, lattice: &Lattice) -> Result<GraphStats> {
    compute_stats_with(&SpanningProbe::new(lattice), graph, decomp)
}

/// As [`compute_stats`] with a probe built once for the lattice.
pub fn compute_stats_with(probe: &SpanningProbe, graph: &GraphState, decomp: &DomainDecomposition) -> Result<GraphStats> {
    let config = decomp.config();
    let mut stats = summarize(decomp, graph.num_edges(), graph.num_components());
    stats.span_horizontal = probe.spans(&config, Direction::Horizontal)?;
    stats.span_vertical = probe.spans(&config, Direction::Vertical)?;
    Ok(stats)
}

/// Statistics straight from a decomposition, without building vertex payloads.
pub fn stats_of_config(probe: &SpanningProbe, lattice: &Lattice, config: &OutcomeConfig) -> Result<GraphStats> {
    let decomp = label_domains(lattice, config)?;
    let nd = decomp.num_domains();
    let mut uf = UnionFind::new(nd);
    let mut edges = 0;
    for (&(a, b), &m) in decomp.multiplicities() {
        if m % 2 == 1 {
            edges += 1;
            uf.union(a, b);
        }
    }
    let mut stats = summarize(&decomp, edges, uf.num_sets());
    stats.span_horizontal = probe.spans(config, Direction::Horizontal)?;
    stats.span_vertical = probe.spans(config, Direction::Vertical)?;
    Ok(stats)
}

fn summarize(decomp: &DomainDecomposition, edges: usize, components: usize) -> GraphStats {
    let nd = decomp.num_domains();
    let sizes: Vec<f64> = (0..nd).map(|d| decomp.size(d) as f64).collect();
    let (mean, std) = mean_std(&sizes);
    GraphStats {
        vertices: nd,
        edges,
        bonds: decomp.inter_domain_edges(),
        components,
        betti: edges + components - nd,
        mean_degree: if nd == 0 { 0.0 } else { 2.0 * edges as f64 / nd as f64 },
        domain_size_mean: mean,
        domain_size_std: std,
        largest_domain: (0..nd).map(|d| decomp.size(d)).max().unwrap_or(0),
        span_horizontal: false,
        span_vertical: false,
    }
}

/// Mean and population standard deviation.
fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Names of the aggregated observables, in output order.
pub const OBSERVABLES: [&str; 15] = [
    "vertices",
    "edges",
    "bonds",
    "betti",
    "components",
    "mean_degree",
    "domain_size_mean",
    "domain_size_std",
    "largest_domain",
    "span_horizontal",
    "span_vertical",
    "vertex_density",
    "edge_density",
    "bond_density",
    "betti_density",
];

fn observable(s: &GraphStats, k: usize, l2: f64) -> f64 {
    match k {
        0 => s.vertices as f64,
        1 => s.edges as f64,
        2 => s.bonds as f64,
        3 => s.betti as f64,
        4 => s.components as f64,
        5 => s.mean_degree,
        6 => s.domain_size_mean,
        7 => s.domain_size_std,
        8 => s.largest_domain as f64,
        9 => s.span_horizontal as u8 as f64,
        10 => s.span_vertical as u8 as f64,
        11 => s.vertices as f64 / l2,
        12 => s.edges as f64 / l2,
        13 => s.bonds as f64 / l2,
        14 => s.betti as f64 / l2,
        _ => unreachable!(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub name: String,
    pub mean: f64,
    /// Standard error from blocking.
    pub err: f64,
    /// Block bootstrap standard error, as a cross-check.
    pub bootstrap_err: f64,
    /// Integrated autocorrelation time in samples.
    pub tau: f64,
    pub block: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub size: usize,
    pub samples: usize,
    pub estimates: Vec<Estimate>,
}

impl Aggregate {
    pub fn get(&self, name: &str) -> Option<&Estimate> {
        self.estimates.iter().find(|e| e.name == name)
    }
}

/// Integrated autocorrelation time with Sokal's self-consistent window (c = 6).
pub fn integrated_autocorrelation(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 4 {
        return 0.5;
    }
    let (mean, std) = mean_std(xs);
    let var = std * std;
    if var == 0.0 {
        return 0.5;
    }
    let mut tau = 0.5;
    for t in 1..n / 2 {
        let c: f64 = (0..n - t).map(|i| (xs[i] - mean) * (xs[i + t] - mean)).sum::<f64>() / ((n - t) as f64 * var);
        tau += c;
        if t as f64 >= 6.0 * tau {
            break;
        }
    }
    tau.max(0.5)
}

fn block_means(xs: &[f64], block: usize) -> Vec<f64> {
    xs.chunks_exact(block).map(|c| c.iter().sum::<f64>() / block as f64).collect()
}

fn standard_error(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let (_, std) = mean_std(xs);
    std * (n as f64 / (n as f64 - 1.0)).sqrt() / (n as f64).sqrt()
}

const BOOTSTRAP_RESAMPLES: usize = 200;

/// Mean and errors of one time series. The block length is ten
/// autocorrelation times, capped so that at least four blocks remain.
pub fn estimate(name: &str, xs: &[f64], rng: &mut impl Rng) -> Estimate {
    let n = xs.len();
    let tau = integrated_autocorrelation(xs);
    let block = ((10.0 * tau).ceil() as usize).clamp(1, (n / 4).max(1));
    let blocks = block_means(xs, block);
    let mean = xs.iter().sum::<f64>() / n as f64;
    let err = standard_error(&blocks);
    let bootstrap_err = if blocks.len() < 2 {
        0.0
    } else {
        let boots: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
            .map(|_| (0..blocks.len()).map(|_| blocks[rng.random_range(0..blocks.len())]).sum::<f64>() / blocks.len() as f64)
            .collect();
        mean_std(&boots).1
    };
    Estimate { name: name.to_string(), mean, err, bootstrap_err, tau, block }
}

/// Means and errors of every observable over a time-ordered stream.
pub fn aggregate(stream: &[GraphStats], size: usize, seed: u64) -> Result<Aggregate> {
    if stream.len() < 2 {
        return Err(Error::InsufficientData(format!("{} samples, need at least 2", stream.len())));
    }
    let l2 = (size * size) as f64;
    let mut rng = stream_rng(seed, size);
    let estimates = OBSERVABLES
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let xs: Vec<f64> = stream.iter().map(|s| observable(s, k, l2)).collect();
            estimate(name, &xs, &mut rng)
        })
        .collect();
    Ok(Aggregate { size, samples: stream.len(), estimates })
}

fn stream_rng(seed: u64, size: usize) -> crate::rng::StreamRng {
    stream(seed, &[tag::STATS, size as u64])
}

/// Weighted least-squares line `y = a + b x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub intercept_err: f64,
    pub slope_err: f64,
    /// Weighted sum of squared residuals.
    pub chi2: f64,
}

/// Fits `y = a + b x`; `sigma` of zero entries count as unit weight.
pub fn fit_line(points: &[(f64, f64, f64)]) -> Result<LineFit> {
    if points.len() < 2 {
        return Err(Error::InsufficientData(format!("{} points, need at least 2", points.len())));
    }
    let unweighted = points.iter().any(|p| p.2 <= 0.0);
    let w = |p: &(f64, f64, f64)| if unweighted { 1.0 } else { 1.0 / (p.2 * p.2) };
    let (mut s, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in points {
        let wi = w(p);
        s += wi;
        sx += wi * p.0;
        sy += wi * p.1;
        sxx += wi * p.0 * p.0;
        sxy += wi * p.0 * p.1;
    }
    let det = s * sxx - sx * sx;
    if det.abs() < 1e-300 {
        return Err(Error::InsufficientData("fit abscissae are all equal".into()));
    }
    let slope = (s * sxy - sx * sy) / det;
    let intercept = (sxx * sy - sx * sxy) / det;
    let chi2: f64 = points.iter().map(|p| w(p) * (p.1 - intercept - slope * p.0).powi(2)).sum();
    // Without measurement errors, scale by the residual variance.
    let scale = if unweighted && points.len() > 2 { chi2 / (points.len() - 2) as f64 } else { 1.0 };
    Ok(LineFit {
        intercept,
        slope,
        intercept_err: (scale * sxx / det).sqrt(),
        slope_err: (scale * s / det).sqrt(),
        chi2,
    })
}

/// Linear extrapolation of an observable to `1/L → 0` across aggregates.
pub fn extrapolate(aggregates: &[Aggregate], name: &str) -> Result<LineFit> {
    let points: Vec<(f64, f64, f64)> = aggregates
        .iter()
        .map(|a| {
            let e = a.get(name).ok_or_else(|| Error::Param(format!("unknown observable {name}")))?;
            Ok((1.0 / a.size as f64, e.mean, e.err))
        })
        .collect::<Result<_>>()?;
    fit_line(&points)
}

/// Fit of the mean largest domain against `ln N`: `size = a ln N + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_err: f64,
    pub residuals: Vec<f64>,
}

/// Least-squares fit of `points = (N, mean largest domain)` to `a ln N + b`.
pub fn fit_largest_domain(points: &[(usize, f64)]) -> Result<LogFit> {
    let mut distinct: Vec<usize> = points.iter().map(|p| p.0).collect();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InsufficientData(format!("{} distinct sizes, need at least 3", distinct.len())));
    }
    let xy: Vec<(f64, f64, f64)> = points.iter().map(|&(n, y)| ((n as f64).ln(), y, 0.0)).collect();
    let fit = fit_line(&xy)?;
    let residuals = xy.iter().map(|p| p.1 - fit.intercept - fit.slope * p.0).collect();
    Ok(LogFit { slope: fit.slope, intercept: fit.intercept, slope_err: fit.slope_err, residuals })
}

/// Sublinear-growth check on the largest domain ever seen at each size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LargestDomainReport {
    pub fit: LogFit,
    /// Largest observed `max size / N` across all sizes.
    pub max_fraction: f64,
    /// Every per-size maximum lies below `fit + slack`.
    pub below_log_bound: bool,
}

/// `maxima = (N, largest domain over all samples at that N)`.
pub fn largest_domain_report(maxima: &[(usize, usize)], slack: f64) -> Result<LargestDomainReport> {
    let pts: Vec<(usize, f64)> = maxima.iter().map(|&(n, m)| (n, m as f64)).collect();
    let fit = fit_largest_domain(&pts)?;
    let below_log_bound = fit.residuals.iter().all(|&r| r <= slack);
    let max_fraction = maxima.iter().map(|&(n, m)| m as f64 / n as f64).fold(0.0, f64::max);
    Ok(LargestDomainReport { fit, max_fraction, below_log_bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domains::{build_graph, Outcome};
    use crate::lattice::{Boundary, LatticeKind};
    use crate::rng::StreamRng;
    use rand::SeedableRng;

    fn sample_stats(vertices: usize) -> GraphStats {
        GraphStats {
            vertices,
            edges: 1,
            bonds: 1,
            components: 1,
            betti: 0,
            mean_degree: 2.0,
            domain_size_mean: 1.0,
            domain_size_std: 0.0,
            largest_domain: 1,
            span_horizontal: true,
            span_vertical: false,
        }
    }

    #[test]
    fn singleton_torus() {
        let lat = Lattice::build(LatticeKind::Honeycomb, 4, Boundary::Periodic).unwrap();
        let cfg = OutcomeConfig(
            (0..16).map(|s| if (lat.coord(s).0 + lat.coord(s).1) % 2 == 0 { Outcome::X } else { Outcome::Y }).collect(),
        );
        let d = label_domains(&lat, &cfg).unwrap();
        let g = build_graph(&lat, &d);
        let s = compute_stats(&g, &d, &lat).unwrap();
        assert_eq!((s.vertices, s.edges, s.betti), (16, 24, 9));
        assert_eq!(s.mean_degree, 3.0);
        assert!(s.span_horizontal && s.span_vertical);
        assert_eq!(stats_of_config(&SpanningProbe::new(&lat), &lat, &cfg).unwrap(), s);
    }

    #[test]
    fn cycle_and_tree_betti() {
        let lat = Lattice::chain(6, Boundary::Periodic);
        let ring = OutcomeConfig((0..6).map(|i| Outcome::ALL[i % 2]).collect());
        let s = stats_of_config(&SpanningProbe::new(&lat), &lat, &ring).unwrap();
        assert_eq!(s.betti, 1);
        let open = Lattice::chain(6, Boundary::Open);
        let s = stats_of_config(&SpanningProbe::new(&open), &open, &ring).unwrap();
        assert_eq!(s.betti, 0);
    }

    #[test]
    fn isolated_vertices_do_not_span() {
        let lat = Lattice::build(LatticeKind::Honeycomb, 4, Boundary::Open).unwrap();
        let g = GraphState::from_edges(3, &[]);
        let g = GraphState::with_vertices(
            g.vertices().iter().enumerate().map(|(i, v)| crate::domains::DomainVertex { members: vec![i * 5], ..v.clone() }).collect(),
            &[],
        );
        assert!(!spanning_exists(&g, &lat, &lat.full_region(), Direction::Horizontal).unwrap());
    }

    #[test]
    fn constant_stream_has_zero_error() {
        let stream: Vec<_> = (0..50).map(|_| sample_stats(7)).collect();
        let agg = aggregate(&stream, 4, 1).unwrap();
        let v = agg.get("vertices").unwrap();
        assert_eq!(v.mean, 7.0);
        assert_eq!(v.err, 0.0);
        assert!(aggregate(&stream[..1], 4, 1).is_err());
    }

    #[test]
    fn white_noise_error_matches_naive() {
        let mut rng = StreamRng::seed_from_u64(5);
        let xs: Vec<f64> = (0..4000).map(|_| rng.random::<f64>()).collect();
        let e = estimate("u", &xs, &mut rng);
        let naive = (1.0 / 12.0f64).sqrt() / (4000f64).sqrt();
        assert!((e.err / naive - 1.0).abs() < 0.3, "{} vs {naive}", e.err);
        assert!((e.bootstrap_err / e.err - 1.0).abs() < 0.3);
    }

    #[test]
    fn log_fit_recovers_exact_line() {
        let pts: Vec<(usize, f64)> = [100usize, 400, 1600, 6400].iter().map(|&n| (n, 2.0 * (n as f64).ln() + 1.0)).collect();
        let fit = fit_largest_domain(&pts).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12 && (fit.intercept - 1.0).abs() < 1e-10);
        let flat: Vec<(usize, f64)> = [100usize, 400, 1600].iter().map(|&n| (n, 5.0)).collect();
        assert!(fit_largest_domain(&flat).unwrap().slope.abs() < 1e-12);
        assert!(fit_largest_domain(&pts[..2]).is_err());
    }
}

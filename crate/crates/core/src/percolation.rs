//! Site and bond dilution of logical graphs and the resulting spanning
//! probability.
//!
//! Dilution is coupled across deletion probabilities: every vertex (or
//! edge) draws one uniform `u` and is deleted at `p` iff `u < p`. Each
//! diluted sample therefore spans exactly for `p <= p*`, and `p*` is found
//! in one pass by adding elements in decreasing `u` until the two sides of
//! the lattice join.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domains::{GraphState, OutcomeConfig};
use crate::error::{Error, Result};
use crate::lattice::{Direction, Lattice};
use crate::rng::{stream, tag};
use crate::stats::{CrossingGraph, SpanningProbe};
use crate::union_find::UnionFind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DilutionMode {
    Site,
    Bond,
}

impl fmt::Display for DilutionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DilutionMode::Site => "site",
            DilutionMode::Bond => "bond",
        })
    }
}

impl FromStr for DilutionMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "site" => Ok(DilutionMode::Site),
            "bond" => Ok(DilutionMode::Bond),
            _ => Err(Error::Param(format!("unknown dilution mode {s:?} (site or bond)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DilutionSpec {
    pub mode: DilutionMode,
    pub p_delete: f64,
    /// Dilutions drawn per sampled configuration.
    pub replicates: usize,
    pub seed: u64,
}

pub const DEFAULT_REPLICATES: usize = 16;

impl DilutionSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p_delete) {
            return Err(Error::Param(format!("deletion probability {} outside [0, 1]", self.p_delete)));
        }
        if self.replicates == 0 {
            return Err(Error::Param("at least one replicate is needed".into()));
        }
        Ok(())
    }
}

/// Deletes each vertex (site mode) or edge (bond mode) independently with
/// probability `spec.p_delete`. Deleted vertices are removed together with
/// their edges; survivors keep their payloads.
pub fn dilute(graph: &GraphState, spec: &DilutionSpec, rng: &mut impl Rng) -> Result<GraphState> {
    spec.validate()?;
    let p = spec.p_delete;
    Ok(match spec.mode {
        DilutionMode::Site => {
            let keep: Vec<bool> = (0..graph.num_vertices()).map(|_| rng.random::<f64>() >= p).collect();
            graph.induced(&keep)
        }
        DilutionMode::Bond => graph.filter_edges(|_, _| rng.random::<f64>() >= p),
    })
}

/// Largest deletion probability at which the diluted graph still crosses,
/// given one uniform per vertex (site mode) or per edge (bond mode).
/// `None` if it does not cross even undiluted.
pub fn critical_delete_probability(g: &CrossingGraph, mode: DilutionMode, uniforms: &[f64]) -> Option<f64> {
    let n = g.num_vertices;
    let (source, sink) = (n, n + 1);
    let mut uf = UnionFind::new(n + 2);
    let mut order: Vec<usize> = (0..uniforms.len()).collect();
    order.sort_by(|&a, &b| uniforms[b].total_cmp(&uniforms[a]));
    let attach = |uf: &mut UnionFind, v: usize| {
        if g.entry[v] {
            uf.union(v, source);
        }
        if g.exit[v] {
            uf.union(v, sink);
        }
    };
    match mode {
        DilutionMode::Site => {
            assert_eq!(uniforms.len(), n);
            let mut adj = vec![Vec::new(); n];
            for &(a, b) in &g.edges {
                adj[a].push(b);
                adj[b].push(a);
            }
            let mut present = vec![false; n];
            for v in order {
                present[v] = true;
                attach(&mut uf, v);
                for &u in &adj[v] {
                    if present[u] {
                        uf.union(u, v);
                    }
                }
                if uf.same(source, sink) {
                    return Some(uniforms[v]);
                }
            }
        }
        DilutionMode::Bond => {
            assert_eq!(uniforms.len(), g.edges.len());
            for v in 0..n {
                attach(&mut uf, v);
            }
            if uf.same(source, sink) {
                return Some(1.0);
            }
            for k in order {
                let (a, b) = g.edges[k];
                uf.union(a, b);
                if uf.same(source, sink) {
                    return Some(uniforms[k]);
                }
            }
        }
    }
    None
}

/// Critical deletion probabilities of `replicates` dilutions of every
/// configuration, for horizontal crossings of the cut-open lattice.
/// Non-crossing samples are recorded as `-1`.
pub fn critical_points(
    lattice: &Lattice,
    configs: &[OutcomeConfig],
    mode: DilutionMode,
    replicates: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let probe = SpanningProbe::new(lattice);
    let mut out = Vec::with_capacity(configs.len() * replicates);
    for (i, config) in configs.iter().enumerate() {
        let g = probe.crossing_graph(config, Direction::Horizontal)?;
        let count = match mode {
            DilutionMode::Site => g.num_vertices,
            DilutionMode::Bond => g.edges.len(),
        };
        for r in 0..replicates {
            let mut rng = stream(seed, &[tag::DILUTE, i as u64, r as u64]);
            let uniforms: Vec<f64> = (0..count).map(|_| rng.random()).collect();
            out.push(critical_delete_probability(&g, mode, &uniforms).unwrap_or(-1.0));
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub p_delete: f64,
    pub p_cluster: f64,
    /// Binomial standard error.
    pub err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PercolationCurve {
    pub size: usize,
    pub mode: DilutionMode,
    pub samples: usize,
    pub points: Vec<CurvePoint>,
}

impl PercolationCurve {
    /// CSV rows `p_delete,p_cluster,err,L,mode`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W, header: bool) -> std::io::Result<()> {
        if header {
            writeln!(out, "p_delete,p_cluster,err,L,mode")?;
        }
        for p in &self.points {
            writeln!(out, "{},{},{},{},{}", p.p_delete, p.p_cluster, p.err, self.size, self.mode)?;
        }
        Ok(())
    }
}

/// Spanning fraction at each grid point from per-sample critical values.
pub fn curve_from_critical(critical: &[f64], grid: &[f64], size: usize, mode: DilutionMode) -> Result<PercolationCurve> {
    if grid.is_empty() {
        return Err(Error::Param("empty p grid".into()));
    }
    if critical.is_empty() {
        return Err(Error::InsufficientData("no dilution samples".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) || grid.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::Param("p grid must be strictly increasing inside [0, 1]".into()));
    }
    let n = critical.len() as f64;
    let points = grid
        .iter()
        .map(|&p| {
            let q = critical.iter().filter(|&&c| c >= p).count() as f64 / n;
            CurvePoint { p_delete: p, p_cluster: q, err: (q * (1.0 - q) / n).sqrt() }
        })
        .collect();
    Ok(PercolationCurve { size, mode, samples: critical.len(), points })
}

pub fn spanning_curve(
    lattice: &Lattice,
    configs: &[OutcomeConfig],
    mode: DilutionMode,
    grid: &[f64],
    replicates: usize,
    seed: u64,
) -> Result<PercolationCurve> {
    if configs.is_empty() {
        return Err(Error::InsufficientData("no configurations".into()));
    }
    let critical = critical_points(lattice, configs, mode, replicates, seed)?;
    curve_from_critical(&critical, grid, lattice.size(), mode)
}

/// Evenly spaced grid `0, step, 2 step, ..., 1`.
pub fn uniform_grid(steps: usize) -> Vec<f64> {
    (0..=steps).map(|i| i as f64 / steps as f64).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    /// Deletion probability at which the spanning fraction crosses 1/2.
    pub p_delete: f64,
    pub err: f64,
    /// Occupation threshold `1 - p_delete`.
    pub p_c: f64,
}

/// Linear interpolation between the first pair of grid points bracketing 1/2.
pub fn estimate_threshold(curve: &PercolationCurve) -> Result<Threshold> {
    let pts = &curve.points;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.p_cluster >= 0.5 && b.p_cluster <= 0.5 && a.p_cluster > b.p_cluster {
            let dy = a.p_cluster - b.p_cluster;
            let dp = b.p_delete - a.p_delete;
            let t = (a.p_cluster - 0.5) / dy;
            let p = a.p_delete + t * dp;
            // ∂p/∂y_a = dp (0.5 - y_b) / dy², ∂p/∂y_b = dp (y_a - 0.5) / dy²
            let ga = dp * (0.5 - b.p_cluster) / (dy * dy);
            let gb = dp * (a.p_cluster - 0.5) / (dy * dy);
            let err = ((ga * a.err).powi(2) + (gb * b.err).powi(2)).sqrt();
            return Ok(Threshold { p_delete: p, err, p_c: 1.0 - p });
        }
    }
    Err(Error::NoCrossing)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamRng;
    use rand::SeedableRng;

    fn ladder(len: usize) -> CrossingGraph {
        // path 0 - 1 - ... - len-1 from entry to exit
        let edges = (0..len - 1).map(|i| (i, i + 1)).collect();
        let mut entry = vec![false; len];
        let mut exit = vec![false; len];
        entry[0] = true;
        exit[len - 1] = true;
        CrossingGraph { num_vertices: len, edges, entry, exit }
    }

    #[test]
    fn path_critical_value_is_smallest_uniform() {
        let g = ladder(4);
        let u = [0.9, 0.2, 0.7, 0.5];
        assert_eq!(critical_delete_probability(&g, DilutionMode::Site, &u), Some(0.2));
        assert_eq!(critical_delete_probability(&g, DilutionMode::Bond, &u[..3]), Some(0.2));
    }

    #[test]
    fn coupled_critical_matches_explicit_dilution() {
        let mut rng = StreamRng::seed_from_u64(11);
        for _ in 0..200 {
            let n = 8;
            let edges: Vec<(usize, usize)> =
                (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|_| rng.random::<f64>() < 0.3).collect();
            let entry = (0..n).map(|v| v < 2).collect();
            let exit = (0..n).map(|v| v >= n - 2).collect();
            let g = CrossingGraph { num_vertices: n, edges, entry, exit };
            for mode in [DilutionMode::Site, DilutionMode::Bond] {
                let count = if mode == DilutionMode::Site { n } else { g.edges.len() };
                let u: Vec<f64> = (0..count).map(|_| rng.random()).collect();
                let pc = critical_delete_probability(&g, mode, &u);
                for p in [0.0, 0.1, 0.3, 0.5, 0.7, 0.9] {
                    let mut h = g.clone();
                    match mode {
                        DilutionMode::Site => {
                            for v in 0..n {
                                if u[v] < p {
                                    h.entry[v] = false;
                                    h.exit[v] = false;
                                }
                            }
                            h.edges.retain(|&(a, b)| u[a] >= p && u[b] >= p);
                        }
                        DilutionMode::Bond => {
                            h.edges = g.edges.iter().zip(&u).filter(|(_, &x)| x >= p).map(|(e, _)| *e).collect();
                        }
                    }
                    assert_eq!(h.spans(), pc.is_some_and(|c| p <= c));
                }
            }
        }
    }

    #[test]
    fn dilution_extremes() {
        let g = GraphState::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        let mut rng = StreamRng::seed_from_u64(1);
        let spec = |mode, p| DilutionSpec { mode, p_delete: p, replicates: 1, seed: 0 };
        assert_eq!(dilute(&g, &spec(DilutionMode::Site, 0.0), &mut rng).unwrap(), g);
        assert_eq!(dilute(&g, &spec(DilutionMode::Bond, 0.0), &mut rng).unwrap(), g);
        assert_eq!(dilute(&g, &spec(DilutionMode::Site, 1.0), &mut rng).unwrap().num_vertices(), 0);
        assert_eq!(dilute(&g, &spec(DilutionMode::Bond, 1.0), &mut rng).unwrap().num_edges(), 0);
        assert!(dilute(&g, &spec(DilutionMode::Bond, 1.5), &mut rng).is_err());
    }

    #[test]
    fn step_curve_threshold() {
        let critical = vec![0.4; 10];
        let grid = uniform_grid(10);
        let curve = curve_from_critical(&critical, &grid, 4, DilutionMode::Site).unwrap();
        assert_eq!(curve.points[4].p_cluster, 1.0);
        assert_eq!(curve.points[5].p_cluster, 0.0);
        let t = estimate_threshold(&curve).unwrap();
        assert!((t.p_delete - 0.45).abs() < 1e-12);
        let pt = |p, q| CurvePoint { p_delete: p, p_cluster: q, err: 0.0 };
        let step = PercolationCurve {
            size: 4,
            mode: DilutionMode::Bond,
            samples: 1,
            points: vec![pt(0.2, 1.0), pt(0.3, 1.0), pt(0.5, 0.0), pt(0.6, 0.0)],
        };
        assert!((estimate_threshold(&step).unwrap().p_delete - 0.4).abs() < 1e-12);
        assert!(curve_from_critical(&critical, &[], 4, DilutionMode::Site).is_err());
        let flat = curve_from_critical(&[1.0; 4], &grid, 4, DilutionMode::Site).unwrap();
        assert!(estimate_threshold(&flat).is_err());
    }
}

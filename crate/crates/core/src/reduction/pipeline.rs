//! End-to-end distillation: carve, clean, contract, certify.

use serde::{Deserialize, Serialize};

use super::carve::{carve_net, CarveFailure, Carved};
use super::clean::clean_wires_and_junctions;
use super::contract::{contract_to_grid, GridCertificate};
use super::rules::RewritableGraph;
use crate::domains::GraphState;
use crate::error::{Error, Result};
use crate::lattice::{Boundary, Lattice};

/// Default `c` in `l = ceil(c ln Λ)`.
pub const DEFAULT_SCALE_CONSTANT: f64 = 2.5;

/// `ceil(c ln Λ)`, at least 1.
pub fn scale_for(lambda: usize, c: f64) -> usize {
    ((c * (lambda as f64).ln()).ceil() as usize).max(1)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub scale_constant: f64,
    /// Overrides the scale computed from `scale_constant`.
    pub scale: Option<usize>,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams { scale_constant: DEFAULT_SCALE_CONSTANT, scale: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCount {
    pub stage: String,
    pub vertices: usize,
    pub edges: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum PipelineFailure {
    Carve(CarveFailure),
    Clean { reason: String },
    Contract { reason: String },
}

/// One line of the pipeline report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub graph_hash: String,
    pub lattice_size: usize,
    pub scale: usize,
    pub scale_constant: f64,
    pub stages: Vec<StageCount>,
    pub failure: Option<PipelineFailure>,
    pub grid_size: Option<usize>,
    pub log_length: usize,
    /// Longest edge of the input graph, in lattice rows/columns (Chebyshev).
    pub max_edge_length: usize,
    /// Whether `l > 2 |e|max`, the sufficient condition for junctions to
    /// be separated.
    pub separated: bool,
    /// Every input vertex is either in the grid or measured exactly once.
    pub accounted: bool,
}

impl PipelineReport {
    pub fn success(&self) -> bool {
        self.failure.is_none() && self.grid_size.is_some()
    }
}

/// Largest Chebyshev distance between the embedding coordinates of the
/// ends of an edge, with minimum-image distances on periodic lattices.
pub fn max_edge_length(graph: &GraphState, lattice: &Lattice) -> usize {
    let periodic = lattice.boundary() == Boundary::Periodic;
    let d = |a: usize, b: usize, n: usize| {
        let x = a.abs_diff(b);
        if periodic {
            x.min(n - x)
        } else {
            x
        }
    };
    graph
        .edges()
        .into_iter()
        .map(|(a, b)| {
            let (p, q) = (graph.vertex(a).coord, graph.vertex(b).coord);
            d(p.0, q.0, lattice.rows()).max(d(p.1, q.1, lattice.cols()))
        })
        .max()
        .unwrap_or(0)
}

fn count(stage: &str, g: &RewritableGraph) -> StageCount {
    StageCount { stage: stage.into(), vertices: g.num_present(), edges: g.num_edges() }
}

/// Whether the measurement log and the grid partition the vertex ids.
pub fn accounts_for_all(g: &RewritableGraph, cert: &GridCertificate) -> bool {
    let mut seen = vec![0u8; g.capacity()];
    for m in g.log() {
        seen[m.vertex] += 1;
    }
    for &v in &cert.vertices {
        seen[v] += 1;
    }
    seen.iter().all(|&s| s == 1)
}

/// Runs the whole reduction on one graph embedded in `lattice`.
pub fn run_pipeline(
    graph: &GraphState,
    lattice: &Lattice,
    params: &PipelineParams,
) -> Result<(PipelineReport, Option<GridCertificate>)> {
    let lambda = lattice.rows().min(lattice.cols());
    let scale = params.scale.unwrap_or_else(|| scale_for(lambda, params.scale_constant));
    let max_edge = max_edge_length(graph, lattice);
    let mut report = PipelineReport {
        graph_hash: format!("{:016x}", graph.hash()),
        lattice_size: lattice.size(),
        scale,
        scale_constant: params.scale_constant,
        stages: vec![StageCount { stage: "input".into(), vertices: graph.num_vertices(), edges: graph.num_edges() }],
        failure: None,
        grid_size: None,
        log_length: 0,
        max_edge_length: max_edge,
        separated: scale > 2 * max_edge,
        accounted: false,
    };
    let (mut g, Carved { mut net, .. }) = match carve_net(graph, lattice.rows(), lattice.cols(), scale)? {
        Ok(c) => c,
        Err(f) => {
            report.failure = Some(PipelineFailure::Carve(f));
            return Ok((report, None));
        }
    };
    report.stages.push(count("carve", &g));
    let stage_error = |e: Error| match e {
        Error::Precondition(reason) | Error::Param(reason) => Ok(reason),
        Error::MissingVertex(v) => Ok(format!("vertex {v} vanished")),
        other => Err(other),
    };
    if let Err(e) = clean_wires_and_junctions(&mut g, &mut net) {
        report.failure = Some(PipelineFailure::Clean { reason: stage_error(e)? });
        report.log_length = g.log().len();
        return Ok((report, None));
    }
    report.stages.push(count("clean", &g));
    match contract_to_grid(&mut g, &net) {
        Ok(cert) => {
            report.stages.push(count("contract", &g));
            report.grid_size = Some(cert.size);
            report.log_length = g.log().len();
            report.accounted = accounts_for_all(&g, &cert);
            Ok((report, Some(cert)))
        }
        Err(e) => {
            report.failure = Some(PipelineFailure::Contract { reason: stage_error(e)? });
            report.log_length = g.log().len();
            Ok((report, None))
        }
    }
}

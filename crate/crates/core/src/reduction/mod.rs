//! Measurement rewrites of graph states and the distillation of a square
//! grid cluster state from a supercritical random graph.

pub mod carve;
pub mod clean;
pub mod contract;
pub mod net;
pub mod pipeline;
pub mod rules;

pub use carve::{carve_net, CarveFailure, NetGeometry};
pub use clean::{clean_junction, clean_wire, clean_wires_and_junctions, Junction};
pub use contract::{contract_to_grid, grid_edges, GridCertificate};
pub use net::{Net, Rect, Wire};
pub use pipeline::{run_pipeline, scale_for, PipelineFailure, PipelineParams, PipelineReport, DEFAULT_SCALE_CONSTANT};
pub use rules::{Measurement, RewritableGraph};

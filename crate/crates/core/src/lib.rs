//! Sampling, analysis and exact verification of POVM-reduced AKLT states on
//! honeycomb lattices and chains.

pub mod domains;
pub mod error;
pub mod lattice;
pub mod union_find;

pub use domains::{build_graph, label_domains, log2_weight, DomainDecomposition, GraphState, Outcome, OutcomeConfig, Weight};
pub use error::{Error, Result};
pub use lattice::{Boundary, Direction, Lattice, LatticeKind, Sublattice};
pub mod metropolis;
pub mod oracle;
pub mod percolation;
pub mod reduction;
pub mod rng;
pub mod stats;

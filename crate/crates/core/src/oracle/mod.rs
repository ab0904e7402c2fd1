//! Brute-force ground truth for small instances.

pub mod dense;
pub mod distribution;
pub mod encoded;
pub mod lc;
pub mod loops;
pub mod report;
pub mod rewrite;
pub mod tableau;

pub use dense::{build_aklt, DenseState, QubitLabel};
pub use distribution::{exact_distribution, verify_povm_completeness, ExactDistribution, Spin};
pub use encoded::{verify_domain_decoding, verify_encoded_cluster, EncodedState};
pub use lc::lc_equivalent;
pub use loops::{count_loop_sets, count_even_subgraphs, DomainSubgraph};
pub use report::{instance_report, ConfigRow, InstanceReport};
pub use rewrite::{rewrite_is_sound, RewriteRule};
pub use tableau::{Pauli, Tableau};

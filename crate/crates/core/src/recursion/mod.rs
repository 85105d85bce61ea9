//! Recursive specifications, linearization, clusters and CFAR.

mod cluster;
mod linear;
mod spec;

pub use cluster::{apply_cfar, find_clusters, CfarResult, Cluster, CFAR_DEPTH};
pub use linear::{bounded_spec_equal, linearize, spec_equal, SpecVerdict};
pub use spec::{unfold_rdp, validate_spec, validate_spec_in, Classification, Direction, RecError, RecSpec, Setting};

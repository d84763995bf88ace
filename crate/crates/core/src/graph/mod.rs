//! From a raw area × variable table to a sparse similarity graph.

mod distance;
mod features;
mod similarity;

pub use distance::{pairwise_distances, DistanceMatrix};
pub use features::{standardize, FeatureMatrix, Standardized};
pub use similarity::{build_similarity_graph, SimilarityGraph, SimilarityOptions};

/// Default number of strongest links kept per node.
pub const DEFAULT_K_NEIGHBORS: usize = 10;

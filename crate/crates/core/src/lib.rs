//! Diffusion-map embeddings of area-level census tables.
//!
//! The pipeline standardizes an area × variable table, links each area to its
//! nearest neighbours by reciprocal Euclidean distance, builds the
//! column-normalized graph Laplacian and keeps the eigenvectors belonging to
//! the smallest nonzero eigenvalues. Those eigenvectors can be averaged onto a
//! coarser geography and scored against an external deprivation index.
//!
//! Modules:
//!  - [`graph`]: standardization, distances and the top-k similarity graph.
//!  - [`spectral`]: Laplacian, eigensolvers and the embedding itself.
//!  - [`geo`]: OA → LSOA aggregation.
//!  - [`evaluation`]: correlation, threshold classification and diagnostics.
//!  - [`io`]: file formats, configuration, synthetic data and the pipeline.

pub mod error;
pub mod evaluation;
pub mod geo;
pub mod graph;
pub mod io;
pub mod spectral;

mod area;

pub use area::AreaVector;
pub use error::{Error, Result};
pub use evaluation::{
    classify_deprived, combine_domains, confusion, correlation_matrix, fn_domain_diagnostics,
    fn_oa_drilldown, pearson, Confusion, CorrelationMatrix, DeprivationTable, Domain,
};
pub use geo::{aggregate_features, aggregate_vector, AreaHierarchy};
pub use graph::{
    build_similarity_graph, pairwise_distances, standardize, DistanceMatrix, FeatureMatrix,
    SimilarityGraph, SimilarityOptions,
};
pub use spectral::{
    build_laplacian, compute_embedding, count_components, select_eigenvector, EmbeddingOptions,
    LaplacianMatrix, SolverChoice, SpectralEmbedding,
};

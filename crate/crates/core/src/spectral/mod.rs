//! Normalized Laplacian, eigensolvers and the diffusion-map embedding.

mod components;
mod embedding;
mod laplacian;
pub mod solver;

pub use components::count_components;
pub use embedding::{
    apply_sign_convention, compute_embedding, select_eigenvector, EmbeddingOptions, SolverChoice,
    SpectralEmbedding, ZeroTolerance,
};
pub use laplacian::{build_laplacian, LaplacianMatrix};

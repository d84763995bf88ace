use std::time::Instant;

use diffmap::io::{generate_synthetic, SyntheticKind};
use diffmap::{
    build_laplacian, build_similarity_graph, compute_embedding, pairwise_distances, standardize,
    EmbeddingOptions, SolverChoice,
};

#[test]
fn iterative_solver_handles_a_few_thousand_areas() {
    let data = generate_synthetic(SyntheticKind::Circle, 3000, 0.05, 5).unwrap();
    let z = standardize(&data.features).unwrap().matrix;
    let g = build_similarity_graph(&pairwise_distances(&z).unwrap(), 10, Default::default()).unwrap();
    let lap = build_laplacian(&g).unwrap();
    let start = Instant::now();
    let emb = compute_embedding(
        &lap,
        &EmbeddingOptions {
            solver: SolverChoice::Iterative,
            ..Default::default()
        },
    )
    .unwrap();
    eprintln!("M = 3000 iterative embedding in {:.2?}", start.elapsed());
    assert_eq!(emb.n_components(), 1);
    assert_eq!(emb.n_nonzero(), 2);
    assert!(emb.nonzero_eigenvalues()[0] > 0.0);
}

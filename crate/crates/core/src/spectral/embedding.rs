use log::warn;

use super::solver::{lowest_dense, lowest_iterative, EigenPairs, IterativeOptions};
use super::LaplacianMatrix;
use crate::area::AreaVector;
use crate::error::{Error, Result};

/// How near-zero eigenvalues are recognised.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZeroTolerance {
    /// Multiple of the largest eigenvalue in the computed window.
    Relative(f64),
    Absolute(f64),
}

impl Default for ZeroTolerance {
    fn default() -> Self {
        ZeroTolerance::Relative(1e-9)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverChoice {
    /// Dense below the cutoff, iterative at or above it.
    #[default]
    Auto,
    Dense,
    Iterative,
}

#[derive(Debug, Clone, Copy)]
pub struct EmbeddingOptions {
    /// Number of nonzero eigenpairs to keep.
    pub n_eigenvectors: usize,
    pub zero_tolerance: ZeroTolerance,
    pub solver: SolverChoice,
    pub dense_cutoff: usize,
    pub iterative: IterativeOptions,
}

impl Default for EmbeddingOptions {
    fn default() -> Self {
        Self {
            n_eigenvectors: 2,
            zero_tolerance: ZeroTolerance::default(),
            solver: SolverChoice::Auto,
            dense_cutoff: 500,
            iterative: IterativeOptions::default(),
        }
    }
}

/// Zero modes followed by the smallest nonzero eigenpairs of the Laplacian.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEmbedding {
    area_ids: Vec<String>,
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<Vec<f64>>,
    zero_tolerance: f64,
    n_components: usize,
}

impl SpectralEmbedding {
    pub fn area_ids(&self) -> &[String] {
        &self.area_ids
    }

    /// All returned eigenvalues, ascending, zero modes first.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Eigenvectors in the same order as [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &[Vec<f64>] {
        &self.eigenvectors
    }

    pub fn zero_tolerance(&self) -> f64 {
        self.zero_tolerance
    }

    /// Number of near-zero eigenvalues.
    pub fn n_components(&self) -> usize {
        self.n_components
    }

    pub fn n_nonzero(&self) -> usize {
        self.eigenvalues.len() - self.n_components
    }

    pub fn nonzero_eigenvalues(&self) -> &[f64] {
        &self.eigenvalues[self.n_components..]
    }

    /// Nonzero eigenvectors, "Eigenvector 1" first.
    pub fn nonzero_eigenvectors(&self) -> &[Vec<f64>] {
        &self.eigenvectors[self.n_components..]
    }
}

/// Makes the largest-magnitude component positive. Components within a
/// relative 1e-9 of the maximum count as tied; the smallest index wins.
pub fn apply_sign_convention(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|x| x.abs() >= max * (1.0 - 1e-9))
        .expect("maximum exists");
    if v[pivot] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn solve(lap: &LaplacianMatrix, count: usize, options: &EmbeddingOptions) -> Result<EigenPairs> {
    let sym = lap.symmetric_form();
    let dense = match options.solver {
        SolverChoice::Dense => true,
        SolverChoice::Iterative => false,
        SolverChoice::Auto => lap.size() < options.dense_cutoff,
    };
    if dense {
        Ok(lowest_dense(&sym.to_dense(), count))
    } else {
        lowest_iterative(&sym, count, options.iterative)
    }
}

/// Smallest eigenpairs of the column-normalized Laplacian: every near-zero
/// mode plus `n_eigenvectors` nonzero ones.
///
/// Eigenvectors are computed on the symmetric similar matrix and mapped back
/// by `u -> S^1/2 u`, then normalized and sign-fixed.
pub fn compute_embedding(lap: &LaplacianMatrix, options: &EmbeddingOptions) -> Result<SpectralEmbedding> {
    let m = lap.size();
    let n_ev = options.n_eigenvectors;
    if n_ev == 0 {
        return Err(Error::Config("n_eigenvectors must be at least 1".into()));
    }
    let floor = m as f64 * f64::EPSILON;

    let mut request = lap.structural_components() + n_ev;
    let (pairs, tolerance, n_zero) = loop {
        if request > m {
            return Err(Error::SpectrumExhausted {
                requested: n_ev,
                available: m.saturating_sub(request - n_ev),
            });
        }
        let pairs = solve(lap, request, options)?;
        let largest = pairs.values.last().copied().unwrap_or(0.0).abs();
        let tolerance = match options.zero_tolerance {
            ZeroTolerance::Relative(r) => (r * largest).max(floor),
            ZeroTolerance::Absolute(t) => t,
        };
        let n_zero = pairs.values.iter().take_while(|&&v| v.abs() <= tolerance).count();
        if request - n_zero >= n_ev {
            break (pairs, tolerance, n_zero);
        }
        request = n_zero + n_ev;
    };
    if n_zero > 1 {
        warn!("similarity graph has {n_zero} components; nonzero eigenvectors start after them");
    }

    let sqrt_d: Vec<f64> = lap.degree_vector().iter().map(|d| d.sqrt()).collect();
    let keep = n_zero + n_ev;
    let mut eigenvectors = Vec::with_capacity(keep);
    let mut residual = vec![0.0; m];
    for (u, &lambda) in pairs.vectors.iter().zip(&pairs.values).take(keep) {
        let mut v: Vec<f64> = u.iter().zip(&sqrt_d).map(|(x, s)| x * s).collect();
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= len);
        apply_sign_convention(&mut v);

        lap.apply(&v, &mut residual);
        let worst = residual
            .iter()
            .zip(&v)
            .fold(0.0f64, |acc, (lv, x)| acc.max((lv - lambda * x).abs()));
        let scale = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if worst >= 1e-8 * scale {
            return Err(Error::ConvergenceFailure(format!(
                "eigenpair λ = {lambda:e} has residual {worst:e} against L"
            )));
        }
        eigenvectors.push(v);
    }

    Ok(SpectralEmbedding {
        area_ids: lap.area_ids().to_vec(),
        eigenvalues: pairs.values[..keep].to_vec(),
        eigenvectors,
        zero_tolerance: tolerance,
        n_components: n_zero,
    })
}

/// Nonzero eigenvector `index` (1-based; 1 is the smallest nonzero
/// eigenvalue) paired with the area ids.
pub fn select_eigenvector(embedding: &SpectralEmbedding, index: usize) -> Result<AreaVector> {
    let max = embedding.n_nonzero();
    if index == 0 || index > max {
        return Err(Error::IndexOutOfRange { index, max });
    }
    AreaVector::new(
        embedding.area_ids.clone(),
        embedding.nonzero_eigenvectors()[index - 1].clone(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SimilarityGraph;
    use crate::spectral::build_laplacian;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    fn embed(edges: &[(usize, usize, f64)], m: usize, n_ev: usize, solver: SolverChoice) -> Result<SpectralEmbedding> {
        let g = SimilarityGraph::from_edges(ids(m), 1, edges.iter().copied()).unwrap();
        let lap = build_laplacian(&g).unwrap();
        compute_embedding(
            &lap,
            &EmbeddingOptions {
                n_eigenvectors: n_ev,
                solver,
                ..Default::default()
            },
        )
    }

    #[test]
    fn two_node_closed_form() {
        for solver in [SolverChoice::Dense, SolverChoice::Iterative] {
            let e = embed(&[(0, 1, 3.0)], 2, 1, solver).unwrap();
            assert_eq!(e.n_components(), 1);
            assert!(e.eigenvalues()[0].abs() < 1e-14);
            assert!((e.eigenvalues()[1] - 2.0).abs() < 1e-14);
            let v = select_eigenvector(&e, 1).unwrap().values;
            let h = std::f64::consts::FRAC_1_SQRT_2;
            assert!((v[0] - h).abs() < 1e-12 && (v[1] + h).abs() < 1e-12, "{v:?}");
        }
    }

    #[test]
    fn complete_graph_k4() {
        // dense oracle: I - (J - I)/3 has spectrum {0, 4/3, 4/3, 4/3}
        let edges: Vec<_> = (0..4).flat_map(|i| (i + 1..4).map(move |j| (i, j, 1.0))).collect();
        for solver in [SolverChoice::Dense, SolverChoice::Iterative] {
            let e = embed(&edges, 4, 3, solver).unwrap();
            assert_eq!(e.n_components(), 1);
            for v in e.nonzero_eigenvalues() {
                assert!((v - 4.0 / 3.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn two_components_two_zero_modes() {
        for solver in [SolverChoice::Dense, SolverChoice::Iterative] {
            let e = embed(&[(0, 1, 1.0), (2, 3, 5.0)], 4, 1, solver).unwrap();
            assert_eq!(e.n_components(), 2);
            assert_eq!(e.nonzero_eigenvalues().len(), 1);
            assert!((e.nonzero_eigenvalues()[0] - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn index_bounds() {
        let e = embed(&[(0, 1, 1.0)], 2, 1, SolverChoice::Dense).unwrap();
        assert!(matches!(select_eigenvector(&e, 0), Err(Error::IndexOutOfRange { index: 0, .. })));
        assert!(matches!(select_eigenvector(&e, 2), Err(Error::IndexOutOfRange { index: 2, max: 1 })));
    }

    #[test]
    fn too_many_requested() {
        let r = embed(&[(0, 1, 1.0)], 2, 2, SolverChoice::Dense);
        assert!(matches!(r, Err(Error::SpectrumExhausted { .. })));
    }

    #[test]
    fn sign_convention_ties_go_to_first_index() {
        let mut v = vec![-0.5, 0.5, 0.1];
        apply_sign_convention(&mut v);
        assert_eq!(v, vec![0.5, -0.5, -0.1]);
        let mut v = vec![0.1, -0.9];
        apply_sign_convention(&mut v);
        assert_eq!(v, vec![-0.1, 0.9]);
    }
}

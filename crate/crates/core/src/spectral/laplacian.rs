use nalgebra::DMatrix;

use super::components::component_count;
use crate::error::{Error, Result};
use crate::graph::SimilarityGraph;

/// Column-normalized Laplacian `L = I - C·diag(colsum C)⁻¹`, stored in
/// compressed sparse rows.
///
/// `L` is not symmetric, but for symmetric `C` it is similar to
/// `N = I - S^-1/2 C S^-1/2` (S the diagonal of column sums) through
/// `L = S^1/2 N S^-1/2`. The solvers work on `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    area_ids: Vec<String>,
    degree: Vec<f64>,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Builds `L` with unit diagonal and `L_ij = -C_ij / Σ_k C_kj` off it.
pub fn build_laplacian(graph: &SimilarityGraph) -> Result<LaplacianMatrix> {
    let m = graph.size();
    // column sums equal row sums since C is symmetric
    let degree: Vec<f64> = (0..m)
        .map(|j| graph.neighbors(j).iter().map(|&(_, w)| w).sum())
        .collect();
    if let Some(j) = degree.iter().position(|&d| d <= 0.0) {
        return Err(Error::IsolatedNode(graph.area_ids()[j].clone()));
    }

    let mut row_ptr = Vec::with_capacity(m + 1);
    let mut col_idx = Vec::with_capacity(m + 2 * graph.edge_count());
    let mut values = Vec::with_capacity(col_idx.capacity());
    row_ptr.push(0);
    for i in 0..m {
        let mut diag_written = false;
        for &(j, w) in graph.neighbors(i) {
            if !diag_written && j > i {
                col_idx.push(i);
                values.push(1.0);
                diag_written = true;
            }
            col_idx.push(j);
            values.push(-w / degree[j]);
        }
        if !diag_written {
            col_idx.push(i);
            values.push(1.0);
        }
        row_ptr.push(col_idx.len());
    }
    Ok(LaplacianMatrix {
        area_ids: graph.area_ids().to_vec(),
        degree,
        row_ptr,
        col_idx,
        values,
    })
}

impl LaplacianMatrix {
    pub fn size(&self) -> usize {
        self.area_ids.len()
    }

    pub fn area_ids(&self) -> &[String] {
        &self.area_ids
    }

    /// Column sums of the similarity matrix used for normalization.
    pub fn degree_vector(&self) -> &[f64] {
        &self.degree
    }

    /// Stored entries of row `i` as (column, value).
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `y = L x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.size()];
        for i in 0..self.size() {
            for (j, v) in self.row(i) {
                sums[j] += v;
            }
        }
        sums
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let m = self.size();
        let mut out = DMatrix::zeros(m, m);
        for i in 0..m {
            for (j, v) in self.row(i) {
                out[(i, j)] = v;
            }
        }
        out
    }

    /// The symmetric similar matrix `N = S^-1/2 · L · S^1/2`, entrywise
    /// `N_ij = L_ij · sqrt(d_j / d_i)`.
    pub fn symmetric_form(&self) -> SymmetricLaplacian {
        let sqrt_d: Vec<f64> = self.degree.iter().map(|d| d.sqrt()).collect();
        let values = (0..self.size())
            .flat_map(|i| {
                let sqrt_d = &sqrt_d;
                self.row(i).map(move |(j, v)| if i == j { 1.0 } else { v * sqrt_d[j] / sqrt_d[i] })
            })
            .collect();
        SymmetricLaplacian {
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values,
        }
    }

    /// Connected components of the sparsity pattern.
    pub fn structural_components(&self) -> usize {
        component_count(self.size(), |i| {
            self.row(i).map(|(j, _)| j).filter(move |&j| j != i)
        })
    }
}

/// Sparse symmetric `I - S^-1/2 C S^-1/2`.
#[derive(Debug, Clone)]
pub struct SymmetricLaplacian {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SymmetricLaplacian {
    pub fn to_dense(&self) -> DMatrix<f64> {
        let m = self.row_ptr.len() - 1;
        let mut out = DMatrix::zeros(m, m);
        for i in 0..m {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                out[(i, self.col_idx[p])] = self.values[p];
            }
        }
        // average the two triangles so the dense copy is exactly symmetric
        let t = out.transpose();
        (out + t) * 0.5
    }
}

impl super::solver::SymmetricOperator for SymmetricLaplacian {
    fn dim(&self) -> usize {
        self.row_ptr.len() - 1
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let span = self.row_ptr[i]..self.row_ptr[i + 1];
            *yi = self.col_idx[span.clone()]
                .iter()
                .zip(&self.values[span])
                .map(|(&j, v)| v * x[j])
                .sum();
        }
    }

    fn spectrum_upper_bound(&self) -> f64 {
        // similar to the random-walk Laplacian, whose spectrum lies in [0, 2]
        2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn two_nodes_independent_of_weight() {
        for c in [0.1, 1.0, 37.5] {
            let g = SimilarityGraph::from_edges(ids(2), 1, [(0, 1, c)]).unwrap();
            let l = build_laplacian(&g).unwrap().to_dense();
            assert_eq!(l, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
        }
    }

    #[test]
    fn path_matches_dense_oracle() {
        let g = SimilarityGraph::from_edges(ids(3), 1, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let lap = build_laplacian(&g).unwrap();
        // oracle: I - C · diag(colsum)^-1 with dense C
        let c = DMatrix::from_row_slice(3, 3, &g.to_dense());
        let colsum: Vec<f64> = (0..3).map(|j| c.column(j).sum()).collect();
        assert_eq!(colsum, vec![1.0, 2.0, 1.0]);
        let oracle = DMatrix::identity(3, 3) - &c * DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(3, colsum.iter().map(|s| 1.0 / s)));
        let expected = DMatrix::from_row_slice(3, 3, &[1.0, -0.5, 0.0, -1.0, 1.0, -1.0, 0.0, -0.5, 1.0]);
        assert!((lap.to_dense() - &expected).abs().max() < 1e-15);
        assert!((oracle - expected).abs().max() < 1e-15);
        for s in lap.column_sums() {
            assert!(s.abs() < 1e-15);
        }
    }

    #[test]
    fn isolated_node_rejected() {
        let g = SimilarityGraph::from_edges(ids(3), 1, [(0, 1, 1.0)]).unwrap();
        assert!(matches!(build_laplacian(&g), Err(Error::IsolatedNode(id)) if id == "2"));
    }

    #[test]
    fn symmetric_form_is_similar() {
        let g = SimilarityGraph::from_edges(ids(4), 1, [(0, 1, 1.0), (1, 2, 3.0), (2, 3, 0.5), (0, 3, 2.0)]).unwrap();
        let lap = build_laplacian(&g).unwrap();
        let n = lap.symmetric_form().to_dense();
        assert!((&n - n.transpose()).abs().max() < 1e-15);
        let s_half = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(4, lap.degree_vector().iter().map(|d| d.sqrt())));
        let s_inv_half = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(4, lap.degree_vector().iter().map(|d| 1.0 / d.sqrt())));
        let back = &s_half * n * s_inv_half;
        assert!((back - lap.to_dense()).abs().max() < 1e-14);
    }
}

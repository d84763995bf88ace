use std::cmp::Ordering;
use std::collections::BTreeMap;

use rayon::prelude::*;

use super::DistanceMatrix;
use crate::error::{Error, Result};

/// Sparse symmetric graph of reciprocal-distance similarities.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityGraph {
    area_ids: Vec<String>,
    k_neighbors: usize,
    // neighbours of each node, sorted by index
    adjacency: Vec<Vec<(usize, f64)>>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SimilarityOptions {
    /// Replace zero off-diagonal distances by a tiny positive distance
    /// instead of failing.
    pub clamp_coincident: bool,
}

/// Scale applied to the smallest positive distance when clamping.
pub const COINCIDENT_CLAMP_FACTOR: f64 = 1e-6;

impl SimilarityGraph {
    /// Builds a graph from an explicit undirected edge list. Each edge is
    /// given once; weights must be finite and positive.
    pub fn from_edges(
        area_ids: Vec<String>,
        k_neighbors: usize,
        edges: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let m = area_ids.len();
        let mut adjacency = vec![BTreeMap::new(); m];
        for (i, j, w) in edges {
            if i >= m || j >= m {
                return Err(Error::Shape(format!("edge ({i}, {j}) outside {m} nodes")));
            }
            if i == j {
                return Err(Error::Shape(format!("self-loop at node {i}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Shape(format!("edge ({i}, {j}) has weight {w}")));
            }
            adjacency[i].insert(j, w);
            adjacency[j].insert(i, w);
        }
        Ok(Self {
            area_ids,
            k_neighbors,
            adjacency: adjacency.into_iter().map(|a| a.into_iter().collect()).collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.area_ids.len()
    }

    pub fn area_ids(&self) -> &[String] {
        &self.area_ids
    }

    pub fn k_neighbors(&self) -> usize {
        self.k_neighbors
    }

    /// Neighbours of `i` with their weights, sorted by neighbour index.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    /// Weight of edge (i, j), 0 when absent.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.adjacency[i]
            .binary_search_by_key(&j, |&(n, _)| n)
            .map(|p| self.adjacency[i][p].1)
            .unwrap_or(0.0)
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Undirected edges (i < j) in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .filter(move |&&(j, _)| j > i)
                .map(move |&(j, w)| (i, j, w))
        })
    }

    /// Dense row-major copy of the similarity matrix.
    pub fn to_dense(&self) -> Vec<f64> {
        let m = self.size();
        let mut out = vec![0.0; m * m];
        for (i, row) in self.adjacency.iter().enumerate() {
            for &(j, w) in row {
                out[i * m + j] = w;
            }
        }
        out
    }
}

/// Reciprocal-distance similarities thresholded by the union-of-top-k rule:
/// edge (i, j) survives when it is among the `k_neighbors` strongest
/// similarities of i or of j. Ties go to the smaller partner index.
pub fn build_similarity_graph(
    distances: &DistanceMatrix,
    k_neighbors: usize,
    options: SimilarityOptions,
) -> Result<SimilarityGraph> {
    if k_neighbors == 0 {
        return Err(Error::InvalidNeighborCount);
    }
    let m = distances.size();
    let ids = distances.area_ids();

    let mut coincident = Vec::new();
    let mut min_positive = f64::INFINITY;
    for i in 0..m {
        for j in i + 1..m {
            let d = distances.get(i, j);
            if d == 0.0 {
                coincident.push((ids[i].clone(), ids[j].clone()));
            } else {
                min_positive = min_positive.min(d);
            }
        }
    }
    let floor = if coincident.is_empty() {
        0.0
    } else if options.clamp_coincident && min_positive.is_finite() {
        log::warn!(
            "clamping {} coincident pair(s) to distance {:e}",
            coincident.len(),
            min_positive * COINCIDENT_CLAMP_FACTOR
        );
        min_positive * COINCIDENT_CLAMP_FACTOR
    } else {
        return Err(Error::CoincidentRows { pairs: coincident });
    };
    let similarity = |i: usize, j: usize| {
        let d = distances.get(i, j);
        1.0 / if d == 0.0 { floor } else { d }
    };

    let keep = k_neighbors.min(m.saturating_sub(1));
    let top: Vec<Vec<usize>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut others: Vec<(usize, f64)> =
                (0..m).filter(|&j| j != i).map(|j| (j, similarity(i, j))).collect();
            let by_strength = |a: &(usize, f64), b: &(usize, f64)| {
                b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0))
            };
            if keep < others.len() {
                others.select_nth_unstable_by(keep, by_strength);
                others.truncate(keep);
            }
            others.into_iter().map(|(j, _)| j).collect()
        })
        .collect();

    let mut edges = BTreeMap::new();
    for (i, partners) in top.iter().enumerate() {
        for &j in partners {
            let key = (i.min(j), i.max(j));
            edges.entry(key).or_insert_with(|| similarity(key.0, key.1));
        }
    }
    SimilarityGraph::from_edges(
        ids.to_vec(),
        k_neighbors,
        edges.into_iter().map(|((i, j), w)| (i, j, w)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(positions: &[f64]) -> DistanceMatrix {
        let m = positions.len();
        let ids = (0..m).map(|i| format!("N{i}")).collect();
        let data = (0..m * m)
            .map(|p| (positions[p / m] - positions[p % m]).abs())
            .collect();
        DistanceMatrix::from_dense(ids, data).unwrap()
    }

    #[test]
    fn reciprocal_weight() {
        let g = build_similarity_graph(&line(&[0.0, 2.0]), 1, Default::default()).unwrap();
        assert_eq!(g.weight(0, 1), 0.5);
    }

    #[test]
    fn union_of_top_one_on_three_points() {
        // oracle: by hand, top-1 partners are 0->1, 1->0, 2->1
        let g = build_similarity_graph(&line(&[0.0, 1.0, 10.0]), 1, Default::default()).unwrap();
        let edges: Vec<_> = g.edges().collect();
        assert_eq!(edges, vec![(0, 1, 1.0), (1, 2, 1.0 / 9.0)]);
        assert_eq!(g.weight(0, 2), 0.0);
    }

    #[test]
    fn large_k_gives_complete_graph() {
        let g = build_similarity_graph(&line(&[0.0, 1.0, 3.0]), 10, Default::default()).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.weight(0, 2), 1.0 / 3.0);
    }

    #[test]
    fn ties_prefer_smaller_index() {
        // node 1 is equidistant from 0 and 2
        let g = build_similarity_graph(&line(&[0.0, 1.0, 2.0, 10.0]), 1, Default::default()).unwrap();
        // 0->1, 1->0 (tie with 2), 2->1, 3->2
        let edges: Vec<_> = g.edges().map(|(i, j, _)| (i, j)).collect();
        assert_eq!(edges, vec![(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn coincident_rows_error_or_clamp() {
        let d = line(&[0.0, 0.0, 4.0]);
        match build_similarity_graph(&d, 1, Default::default()) {
            Err(Error::CoincidentRows { pairs }) => {
                assert_eq!(pairs, vec![("N0".to_string(), "N1".to_string())])
            }
            other => panic!("unexpected {other:?}"),
        }
        let g = build_similarity_graph(&d, 1, SimilarityOptions { clamp_coincident: true }).unwrap();
        assert_eq!(g.weight(0, 1), 1.0 / (4.0 * COINCIDENT_CLAMP_FACTOR));
    }

    #[test]
    fn zero_k_rejected() {
        assert!(matches!(
            build_similarity_graph(&line(&[0.0, 1.0]), 0, Default::default()),
            Err(Error::InvalidNeighborCount)
        ));
    }
}

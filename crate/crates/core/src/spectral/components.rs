use crate::graph::SimilarityGraph;

/// Number of connected components, by breadth-first traversal.
pub fn count_components(graph: &SimilarityGraph) -> usize {
    let m = graph.size();
    let neighbors = |i: usize| graph.neighbors(i).iter().map(|&(j, _)| j);
    component_count(m, neighbors)
}

pub(crate) fn component_count<F, I>(m: usize, neighbors: F) -> usize
where
    F: Fn(usize) -> I,
    I: Iterator<Item = usize>,
{
    let mut seen = vec![false; m];
    let mut queue = std::collections::VecDeque::new();
    let mut count = 0;
    for start in 0..m {
        if seen[start] {
            continue;
        }
        count += 1;
        seen[start] = true;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            for j in neighbors(i) {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn path_is_connected() {
        let g = SimilarityGraph::from_edges(ids(4), 1, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(count_components(&g), 1);
    }

    #[test]
    fn disjoint_edges() {
        let g = SimilarityGraph::from_edges(ids(4), 1, [(0, 1, 1.0), (2, 3, 2.0)]).unwrap();
        assert_eq!(count_components(&g), 2);
    }
}

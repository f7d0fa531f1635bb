//! Small graphs and generators shared by tests, benches, and docs.

use rand::Rng;

use crate::graph::{Graph, Labels};

/// The ten-node two-level demo tree used across the test suite:
/// a center `v1` with three children `v2..v4`, each of which has two leaves.
pub fn demo_tree() -> (Graph, Labels) {
    let text = "v1 v2\nv1 v3\nv1 v4\nv2 v5\nv2 v6\nv3 v7\nv3 v8\nv4 v9\nv4 v10\n";
    let (g, labels, _) = crate::graph::read_edge_list(text).expect("static edge list");
    (g, labels)
}

/// Uniform random labeled tree on `n` nodes (Prüfer decode).
pub fn random_labeled_tree<R: Rng>(n: usize, rng: &mut R) -> Graph {
    assert!(n >= 1);
    if n == 1 {
        return Graph::from_edges(1, &[]).unwrap();
    }
    if n == 2 {
        return Graph::from_edges(2, &[(0, 1)]).unwrap();
    }
    let seq: Vec<u32> = (0..n - 2).map(|_| rng.gen_range(0..n as u32)).collect();
    let mut degree = vec![1u32; n];
    for &s in &seq {
        degree[s as usize] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    let mut leaf_heap: std::collections::BinaryHeap<std::cmp::Reverse<u32>> = (0..n as u32)
        .filter(|&u| degree[u as usize] == 1)
        .map(std::cmp::Reverse)
        .collect();
    for &s in &seq {
        let std::cmp::Reverse(leaf) = leaf_heap.pop().expect("invariant: leaves remain");
        edges.push((leaf.min(s), leaf.max(s)));
        degree[s as usize] -= 1;
        if degree[s as usize] == 1 {
            leaf_heap.push(std::cmp::Reverse(s));
        }
    }
    let std::cmp::Reverse(a) = leaf_heap.pop().unwrap();
    let std::cmp::Reverse(b) = leaf_heap.pop().unwrap();
    edges.push((a.min(b), a.max(b)));
    Graph::from_edges(n, &edges).unwrap()
}

/// Path graph `0 - 1 - ... - n-1`.
pub fn path_graph(n: usize) -> Graph {
    let edges: Vec<(u32, u32)> = (0..n.saturating_sub(1)).map(|i| (i as u32, i as u32 + 1)).collect();
    Graph::from_edges(n, &edges).unwrap()
}

/// Star with `leaves` leaves around node 0.
pub fn star_graph(leaves: usize) -> Graph {
    let edges: Vec<(u32, u32)> = (1..=leaves).map(|i| (0, i as u32)).collect();
    Graph::from_edges(leaves + 1, &edges).unwrap()
}

/// Cycle on `n` nodes.
pub fn cycle_graph(n: usize) -> Graph {
    assert!(n >= 3);
    let mut edges: Vec<(u32, u32)> = (0..n - 1).map(|i| (i as u32, i as u32 + 1)).collect();
    edges.push((0, n as u32 - 1));
    Graph::from_edges(n, &edges).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn random_tree_is_a_tree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [1usize, 2, 3, 8, 25] {
            let g = random_labeled_tree(n, &mut rng);
            assert!(g.is_tree(), "n = {n}");
        }
    }

    #[test]
    fn demo_tree_shape() {
        let (g, labels) = demo_tree();
        assert_eq!(g.node_count(), 10);
        assert!(g.is_tree());
        assert_eq!(g.degree(labels.id_of("v1").unwrap()), 3);
    }
}

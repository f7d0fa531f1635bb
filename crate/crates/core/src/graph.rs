//! Undirected simple graphs with the distance and subtree primitives the
//! estimators are built on.
//!
//! Node ids are dense (`0..node_count`), with an optional label table for
//! graphs read from edge-list files. All structures are immutable after
//! construction and safe to share across worker threads.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Sentinel distance for unreachable nodes.
pub const INFINITE_DISTANCE: u32 = u32::MAX;

/// Undirected simple graph over dense node ids.
#[derive(Debug, Clone)]
pub struct Graph {
    adj: Vec<Vec<u32>>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph from an edge list. Self-loops are rejected, duplicate
    /// edges are collapsed, and adjacency lists are kept sorted so traversal
    /// order is deterministic.
    pub fn from_edges(node_count: usize, edges: &[(u32, u32)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); node_count];
        for &(a, b) in edges {
            if a as usize >= node_count {
                return Err(Error::InvalidNode(a, node_count));
            }
            if b as usize >= node_count {
                return Err(Error::InvalidNode(b, node_count));
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        let mut edge_count = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            edge_count += list.len();
        }
        Ok(Graph {
            adj,
            edge_count: edge_count / 2,
        })
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, u: u32) -> &[u32] {
        &self.adj[u as usize]
    }

    pub fn degree(&self, u: u32) -> usize {
        self.adj[u as usize].len()
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        self.adj[u as usize].binary_search(&v).is_ok()
    }

    pub fn check_node(&self, u: u32) -> Result<()> {
        if (u as usize) < self.node_count() {
            Ok(())
        } else {
            Err(Error::InvalidNode(u, self.node_count()))
        }
    }

    /// Iterates each undirected edge once, as `(min, max)` pairs in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.adj.iter().enumerate().flat_map(|(u, list)| {
            let u = u as u32;
            list.iter().copied().filter_map(move |v| if u < v { Some((u, v)) } else { None })
        })
    }

    /// Node set of the connected component containing `v`, ascending.
    pub fn component_of(&self, v: u32) -> Vec<u32> {
        let dist = bfs_distances(self, v);
        (0..self.node_count() as u32).filter(|&u| dist.is_reachable(u)).collect()
    }

    pub fn is_connected(&self) -> bool {
        if self.node_count() == 0 {
            return true;
        }
        self.component_of(0).len() == self.node_count()
    }

    /// Connected and acyclic.
    pub fn is_tree(&self) -> bool {
        self.node_count() > 0
            && self.edge_count == self.node_count() - 1
            && self.is_connected()
    }
}

/// Hop distances from a single source.
#[derive(Debug, Clone)]
pub struct DistanceMap {
    source: u32,
    dist: Vec<u32>,
}

impl DistanceMap {
    pub fn source(&self) -> u32 {
        self.source
    }

    /// Raw distance; `INFINITE_DISTANCE` if unreachable.
    pub fn raw(&self, u: u32) -> u32 {
        self.dist[u as usize]
    }

    pub fn distance(&self, u: u32) -> Option<u32> {
        let d = self.dist[u as usize];
        if d == INFINITE_DISTANCE {
            None
        } else {
            Some(d)
        }
    }

    pub fn is_reachable(&self, u: u32) -> bool {
        self.dist[u as usize] != INFINITE_DISTANCE
    }
}

/// BFS hop distances from `v`. Neighbors are expanded in ascending id order,
/// so derived shortest-path trees are deterministic across runs and platforms.
pub fn bfs_distances(g: &Graph, v: u32) -> DistanceMap {
    let (dist, _) = bfs_with_parents(g, v);
    dist
}

/// BFS distances plus the deterministic shortest-path-tree parent of every
/// reachable node (lowest-id predecessor on a shortest path).
pub fn bfs_with_parents(g: &Graph, v: u32) -> (DistanceMap, Vec<Option<u32>>) {
    let n = g.node_count();
    let mut dist = vec![INFINITE_DISTANCE; n];
    let mut parent = vec![None; n];
    let mut queue = VecDeque::new();
    dist[v as usize] = 0;
    queue.push_back(v);
    while let Some(u) = queue.pop_front() {
        let du = dist[u as usize];
        for &w in g.neighbors(u) {
            if dist[w as usize] == INFINITE_DISTANCE {
                dist[w as usize] = du + 1;
                parent[w as usize] = Some(u);
                queue.push_back(w);
            }
        }
    }
    (DistanceMap { source: v, dist }, parent)
}

/// Observed explicit nodes `V_e` at the observation time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationSet {
    nodes: Vec<u32>,
}

impl ObservationSet {
    pub fn new(mut nodes: Vec<u32>) -> Result<Self> {
        nodes.sort_unstable();
        nodes.dedup();
        if nodes.is_empty() {
            return Err(Error::EmptyObservation);
        }
        Ok(ObservationSet { nodes })
    }

    /// Ascending node ids.
    pub fn nodes(&self) -> &[u32] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, u: u32) -> bool {
        self.nodes.binary_search(&u).is_ok()
    }

    pub fn validate_against(&self, g: &Graph) -> Result<()> {
        for &u in &self.nodes {
            g.check_node(u)?;
        }
        Ok(())
    }
}

/// Infection range of `v`: the largest hop distance from `v` to any explicit node.
pub fn infection_range(g: &Graph, v: u32, ve: &ObservationSet) -> Result<u32> {
    g.check_node(v)?;
    ve.validate_against(g)?;
    let dist = bfs_distances(g, v);
    let mut range = 0;
    for &u in ve.nodes() {
        match dist.distance(u) {
            Some(d) => range = range.max(d),
            None => return Err(Error::Unreachable { node: u, from: v }),
        }
    }
    Ok(range)
}

/// The minimal connected subtree of a tree spanning a marked node set.
///
/// Keeps full-size index maps so member node ids stay those of the parent graph.
#[derive(Debug, Clone)]
pub struct SpanSubtree {
    nodes: Vec<u32>,
    member: Vec<bool>,
    adj: Vec<Vec<u32>>,
}

impl SpanSubtree {
    pub fn nodes(&self) -> &[u32] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, u: u32) -> bool {
        self.member[u as usize]
    }

    pub fn neighbors(&self, u: u32) -> &[u32] {
        &self.adj[u as usize]
    }

    pub fn degree(&self, u: u32) -> usize {
        self.adj[u as usize].len()
    }

    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for &u in &self.nodes {
            for &v in self.neighbors(u) {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Computes the unique minimal connected subtree of tree `g` containing `marked`.
///
/// Equals the union of pairwise paths between marked nodes.
pub fn minimal_spanning_subtree(g: &Graph, marked: &[u32]) -> Result<SpanSubtree> {
    if marked.is_empty() {
        return Err(Error::InvalidArgument("marked node set is empty".into()));
    }
    if !g.is_tree() {
        return Err(Error::NotATree);
    }
    for &u in marked {
        g.check_node(u)?;
    }
    let n = g.node_count();
    let anchor = marked[0];
    let (_, parent) = bfs_with_parents(g, anchor);
    let mut member = vec![false; n];
    member[anchor as usize] = true;
    for &s in marked {
        let mut cur = s;
        while !member[cur as usize] {
            member[cur as usize] = true;
            cur = parent[cur as usize].expect("tree is connected");
        }
    }
    let mut adj = vec![Vec::new(); n];
    let mut nodes = Vec::new();
    for u in 0..n as u32 {
        if member[u as usize] {
            nodes.push(u);
            adj[u as usize] =
                g.neighbors(u).iter().copied().filter(|&w| member[w as usize]).collect();
        }
    }
    Ok(SpanSubtree { nodes, member, adj })
}

/// A tree rooted at a chosen node, over a (possibly strict) subset of graph nodes.
#[derive(Debug, Clone)]
pub struct RootedTree {
    root: u32,
    parent: Vec<Option<u32>>,
    children: Vec<Vec<u32>>,
    nodes: Vec<u32>,
}

impl RootedTree {
    /// Roots a whole tree graph at `root`.
    pub fn from_graph(g: &Graph, root: u32) -> Result<Self> {
        if !g.is_tree() {
            return Err(Error::NotATree);
        }
        g.check_node(root)?;
        let neighbors = |u: u32| g.neighbors(u).to_vec();
        Ok(Self::from_neighbor_fn(
            g.node_count(),
            root,
            (0..g.node_count() as u32).collect(),
            neighbors,
        ))
    }

    /// Roots a spanning subtree at `root`, which must be a member.
    pub fn from_subtree(h: &SpanSubtree, root: u32) -> Result<Self> {
        if !h.contains(root) {
            return Err(Error::InvalidArgument(format!(
                "root {root} is not in the subtree"
            )));
        }
        let neighbors = |u: u32| h.neighbors(u).to_vec();
        Ok(Self::from_neighbor_fn(
            h.adj.len(),
            root,
            h.nodes.clone(),
            neighbors,
        ))
    }

    fn from_neighbor_fn<F: Fn(u32) -> Vec<u32>>(
        index_size: usize,
        root: u32,
        nodes: Vec<u32>,
        neighbors: F,
    ) -> Self {
        let mut parent = vec![None; index_size];
        let mut children = vec![Vec::new(); index_size];
        let mut seen = vec![false; index_size];
        seen[root as usize] = true;
        let mut queue = VecDeque::new();
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            for w in neighbors(u) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    parent[w as usize] = Some(u);
                    children[u as usize].push(w);
                    queue.push_back(w);
                }
            }
        }
        RootedTree {
            root,
            parent,
            children,
            nodes,
        }
    }

    pub fn root(&self) -> u32 {
        self.root
    }

    pub fn parent(&self, u: u32) -> Option<u32> {
        self.parent[u as usize]
    }

    pub fn children(&self, u: u32) -> &[u32] {
        &self.children[u as usize]
    }

    /// Member node ids, ascending.
    pub fn nodes(&self) -> &[u32] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Members in BFS order from the root (parents before children).
    pub fn bfs_order(&self) -> Vec<u32> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut queue = VecDeque::new();
        queue.push_back(self.root);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &c in self.children(u) {
                queue.push_back(c);
            }
        }
        order
    }

    /// Per-node depth (hops from the root), full-size index map.
    pub fn depths(&self) -> Vec<u32> {
        let mut depth = vec![0u32; self.parent.len()];
        for &u in &self.bfs_order() {
            if let Some(p) = self.parent(u) {
                depth[u as usize] = depth[p as usize] + 1;
            }
        }
        depth
    }
}

/// Per-node subtree heights: `D[leaf] = 0`, `D[u] = 1 + max(D over children)`.
pub fn subtree_heights(t: &RootedTree) -> Vec<u32> {
    let mut height = vec![0u32; t.parent.len()];
    for &u in t.bfs_order().iter().rev() {
        let mut h = 0;
        for &c in t.children(u) {
            h = h.max(height[c as usize] + 1);
        }
        height[u as usize] = h;
    }
    height
}

/// Node set of the component containing `u` after removing the first edge on
/// the `u -> v` path of a tree.
pub fn subtree_without_link(g: &Graph, u: u32, v: u32) -> Result<Vec<u32>> {
    if u == v {
        return Err(Error::InvalidArgument("u and v must differ".into()));
    }
    if !g.is_tree() {
        return Err(Error::NotATree);
    }
    g.check_node(u)?;
    g.check_node(v)?;
    let (_, parent) = bfs_with_parents(g, v);
    let next_hop = parent[u as usize].ok_or(Error::Unreachable { node: u, from: v })?;
    // Flood from u while skipping the single removed edge.
    let mut seen = vec![false; g.node_count()];
    seen[u as usize] = true;
    let mut queue = VecDeque::new();
    queue.push_back(u);
    let mut out = Vec::new();
    while let Some(x) = queue.pop_front() {
        out.push(x);
        for &w in g.neighbors(x) {
            if x == u && w == next_hop {
                continue;
            }
            if !seen[w as usize] {
                seen[w as usize] = true;
                queue.push_back(w);
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// String labels for graphs loaded from files; ids are assigned densely in
/// first-appearance order.
#[derive(Debug, Clone, Default)]
pub struct Labels {
    names: Vec<String>,
}

impl Labels {
    /// Identity labels `"0".."n-1"` for programmatically built graphs.
    pub fn numeric(n: usize) -> Self {
        Labels {
            names: (0..n).map(|i| i.to_string()).collect(),
        }
    }

    pub fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn id_of(&self, name: &str) -> Option<u32> {
        self.names.iter().position(|s| s == name).map(|i| i as u32)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Counters for tolerated irregularities in an edge-list file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EdgeListWarnings {
    pub self_loops_skipped: usize,
    pub duplicate_edges: usize,
}

/// Parses an edge-list text: one edge per line, two whitespace-separated
/// labels; `#` starts a comment line. Self-loops are skipped (counted) and
/// duplicates collapsed (counted).
pub fn read_edge_list(text: &str) -> Result<(Graph, Labels, EdgeListWarnings)> {
    let mut names: Vec<String> = Vec::new();
    let mut index: std::collections::HashMap<String, u32> = std::collections::HashMap::new();
    let mut intern = |tok: &str, names: &mut Vec<String>| -> u32 {
        if let Some(&id) = index.get(tok) {
            return id;
        }
        let id = names.len() as u32;
        names.push(tok.to_string());
        index.insert(tok.to_string(), id);
        id
    };
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut warnings = EdgeListWarnings::default();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut toks = line.split_whitespace();
        let (a, b) = match (toks.next(), toks.next(), toks.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("expected two whitespace-separated labels, got {line:?}"),
                })
            }
        };
        let ia = intern(a, &mut names);
        let ib = intern(b, &mut names);
        if ia == ib {
            warnings.self_loops_skipped += 1;
            continue;
        }
        edges.push((ia.min(ib), ia.max(ib)));
    }
    edges.sort_unstable();
    let before = edges.len();
    edges.dedup();
    warnings.duplicate_edges = before - edges.len();
    let graph = Graph::from_edges(names.len(), &edges)?;
    Ok((graph, Labels { names }, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{demo_tree, random_labeled_tree};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bfs_on_demo_tree() {
        let (g, labels) = demo_tree();
        let v1 = labels.id_of("v1").unwrap();
        let dist = bfs_distances(&g, v1);
        assert_eq!(dist.distance(labels.id_of("v2").unwrap()), Some(1));
        assert_eq!(dist.distance(labels.id_of("v7").unwrap()), Some(2));
        assert_eq!(dist.distance(v1), Some(0));
    }

    #[test]
    fn bfs_invalid_source_is_rejected_by_check() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        assert!(g.check_node(7).is_err());
    }

    #[test]
    fn bfs_matches_floyd_warshall_on_random_tree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = random_labeled_tree(10, &mut rng);
        let n = g.node_count();
        // Floyd–Warshall oracle.
        let inf = u32::MAX / 4;
        let mut fw = vec![vec![inf; n]; n];
        for i in 0..n {
            fw[i][i] = 0;
        }
        for (a, b) in g.edges() {
            fw[a as usize][b as usize] = 1;
            fw[b as usize][a as usize] = 1;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    fw[i][j] = fw[i][j].min(fw[i][k].saturating_add(fw[k][j]));
                }
            }
        }
        for v in 0..n as u32 {
            let dist = bfs_distances(&g, v);
            for u in 0..n as u32 {
                assert_eq!(dist.raw(u), fw[v as usize][u as usize]);
            }
        }
    }

    #[test]
    fn tree_levels_differ_by_one_across_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let g = random_labeled_tree(14, &mut rng);
            let dist = bfs_distances(&g, 0);
            for (a, b) in g.edges() {
                let da = dist.raw(a) as i64;
                let db = dist.raw(b) as i64;
                assert_eq!((da - db).abs(), 1);
            }
        }
    }

    #[test]
    fn infection_range_on_demo_tree() {
        let (g, labels) = demo_tree();
        let v1 = labels.id_of("v1").unwrap();
        let ve = ObservationSet::new(vec![
            labels.id_of("v2").unwrap(),
            labels.id_of("v3").unwrap(),
        ])
        .unwrap();
        assert_eq!(infection_range(&g, v1, &ve).unwrap(), 1);
    }

    #[test]
    fn infection_range_trivial_and_path() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]).unwrap();
        let singleton = ObservationSet::new(vec![2]).unwrap();
        assert_eq!(infection_range(&g, 2, &singleton).unwrap(), 0);
        let ve = ObservationSet::new(vec![2, 4]).unwrap();
        assert_eq!(infection_range(&g, 0, &ve).unwrap(), 4);
    }

    #[test]
    fn infection_range_errors() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(matches!(
            ObservationSet::new(vec![]),
            Err(Error::EmptyObservation)
        ));
        let ve = ObservationSet::new(vec![3]).unwrap();
        assert!(matches!(
            infection_range(&g, 0, &ve),
            Err(Error::Unreachable { node: 3, from: 0 })
        ));
    }

    #[test]
    fn spanning_subtree_on_demo_tree() {
        let (g, labels) = demo_tree();
        let v1 = labels.id_of("v1").unwrap();
        let v2 = labels.id_of("v2").unwrap();
        let v3 = labels.id_of("v3").unwrap();
        let h = minimal_spanning_subtree(&g, &[v2, v3]).unwrap();
        assert_eq!(h.nodes(), &[v1, v2, v3]);
        assert_eq!(h.edges(), vec![(v1, v2), (v1, v3)]);
    }

    #[test]
    fn spanning_subtree_single_node() {
        let (g, _) = demo_tree();
        let h = minimal_spanning_subtree(&g, &[5]).unwrap();
        assert_eq!(h.nodes(), &[5]);
        assert!(h.edges().is_empty());
    }

    #[test]
    fn spanning_subtree_rejects_non_tree() {
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(matches!(
            minimal_spanning_subtree(&g, &[0]),
            Err(Error::NotATree)
        ));
    }

    /// Oracle: smallest connected vertex subset containing the marks, found by
    /// enumerating all subsets of a small tree.
    fn steiner_oracle(g: &Graph, marked: &[u32]) -> Vec<u32> {
        let n = g.node_count();
        let mark_mask: u64 = marked.iter().map(|&m| 1u64 << m).sum();
        let mut best: Option<u64> = None;
        for mask in 1u64..(1 << n) {
            if mask & mark_mask != mark_mask {
                continue;
            }
            // connectivity check of the induced subgraph
            let first = mask.trailing_zeros();
            let mut seen = 1u64 << first;
            let mut stack = vec![first];
            while let Some(u) = stack.pop() {
                for &w in g.neighbors(u) {
                    let bit = 1u64 << w;
                    if mask & bit != 0 && seen & bit == 0 {
                        seen |= bit;
                        stack.push(w as u32);
                    }
                }
            }
            if seen == mask && best.map_or(true, |b: u64| mask.count_ones() < b.count_ones()) {
                best = Some(mask);
            }
        }
        let best = best.unwrap();
        (0..n as u32).filter(|&u| best & (1 << u) != 0).collect()
    }

    #[test]
    fn spanning_subtree_matches_subset_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..12 {
            let g = random_labeled_tree(12, &mut rng);
            let marks = vec![0, 3, 7, 11];
            let h = minimal_spanning_subtree(&g, &marks).unwrap();
            assert_eq!(h.nodes(), steiner_oracle(&g, &marks).as_slice());
            // every leaf of H is marked
            for &u in h.nodes() {
                if h.degree(u) <= 1 && h.len() > 1 {
                    assert!(marks.contains(&u) || h.degree(u) == 2);
                }
            }
        }
    }

    #[test]
    fn subtree_heights_on_demo_tree() {
        let (g, labels) = demo_tree();
        let t = RootedTree::from_graph(&g, labels.id_of("v1").unwrap()).unwrap();
        let heights = subtree_heights(&t);
        assert_eq!(heights[labels.id_of("v2").unwrap() as usize], 1);
        assert_eq!(heights[labels.id_of("v5").unwrap() as usize], 0);
        assert_eq!(heights[labels.id_of("v1").unwrap() as usize], 2);
    }

    #[test]
    fn subtree_heights_single_node() {
        let g = Graph::from_edges(1, &[]).unwrap();
        let t = RootedTree::from_graph(&g, 0).unwrap();
        assert_eq!(subtree_heights(&t)[0], 0);
    }

    #[test]
    fn subtree_heights_match_descendant_eccentricity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..25 {
            let g = random_labeled_tree(12, &mut rng);
            let t = RootedTree::from_graph(&g, 0).unwrap();
            let heights = subtree_heights(&t);
            let depths = t.depths();
            for u in 0..g.node_count() as u32 {
                // descendants of u: nodes whose path to root passes u
                let mut far = 0;
                for w in 0..g.node_count() as u32 {
                    let mut cur = w;
                    let descendant = loop {
                        if cur == u {
                            break true;
                        }
                        match t.parent(cur) {
                            Some(p) => cur = p,
                            None => break false,
                        }
                    };
                    if descendant {
                        far = far.max(depths[w as usize] - depths[u as usize]);
                    }
                }
                assert_eq!(heights[u as usize], far);
            }
        }
    }

    #[test]
    fn subtree_without_link_on_demo_tree() {
        let (g, labels) = demo_tree();
        let v1 = labels.id_of("v1").unwrap();
        let v4 = labels.id_of("v4").unwrap();
        let got = subtree_without_link(&g, v4, v1).unwrap();
        let expect: Vec<u32> = ["v4", "v9", "v10"]
            .iter()
            .map(|s| labels.id_of(s).unwrap())
            .collect();
        let mut expect = expect;
        expect.sort_unstable();
        assert_eq!(got, expect);
    }

    #[test]
    fn subtree_without_link_leaf_case() {
        let (g, labels) = demo_tree();
        let v5 = labels.id_of("v5").unwrap();
        let v2 = labels.id_of("v2").unwrap();
        assert_eq!(subtree_without_link(&g, v5, v2).unwrap(), vec![v5]);
    }

    #[test]
    fn subtree_without_link_partitions_tree_across_each_edge() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let g = random_labeled_tree(11, &mut rng);
            for (u, w) in g.edges() {
                let a = subtree_without_link(&g, u, w).unwrap();
                let b = subtree_without_link(&g, w, u).unwrap();
                assert_eq!(a.len() + b.len(), g.node_count());
                let mut all: Vec<u32> = a.iter().chain(b.iter()).copied().collect();
                all.sort_unstable();
                assert_eq!(all, (0..g.node_count() as u32).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn edge_list_reader_round_trip() {
        let text = "# demo\nv1 v2\nv1 v3\nv2 v2\nv1 v2\n\nv3 v4\n";
        let (g, labels, warn) = read_edge_list(text).unwrap();
        assert_eq!(g.node_count(), 4);
        assert_eq!(g.edge_count(), 3);
        assert_eq!(labels.id_of("v1"), Some(0));
        assert_eq!(warn.self_loops_skipped, 1);
        assert_eq!(warn.duplicate_edges, 1);
    }

    #[test]
    fn edge_list_reader_reports_line_numbers() {
        let err = read_edge_list("v1 v2\nv3 v4 v5\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }
}

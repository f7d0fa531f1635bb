//! Approximate source estimation on general graphs.
//!
//! For each candidate source `v` the estimator builds a candidate subgraph
//! `H_v` (shortest-path tree to the observed nodes plus all incident edges),
//! searches its spanning trees for the one minimizing the telescoped height
//! sum `F = sum(D(parent) - D(child))`, and scores the minimizer with the
//! infection-tree log-likelihood. Reverse greedy is the fast heuristic
//! search; an exact enumerating oracle covers small instances.

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimate::{Method, SourceEstimate};
use crate::graph::{bfs_with_parents, Graph, ObservationSet};
use crate::si::SiParams;

/// Node guard for the exact spanning-tree oracle.
const ORACLE_MAX_SUBGRAPH_NODES: usize = 16;
/// Spanning-tree count guard for the exact oracle.
const ORACLE_MAX_SPANNING_TREES: u64 = 100_000;

/// Candidate subgraph `H_v` for source `v`: every node and edge that can
/// participate in an infection tree rooted at `v` reaching the observed set.
#[derive(Debug, Clone)]
pub struct CandidateSubgraph {
    center: u32,
    nodes: Vec<u32>,
    member: Vec<bool>,
    adj: Vec<Vec<u32>>,
    dist_from_center: Vec<u32>,
}

impl CandidateSubgraph {
    pub fn center(&self) -> u32 {
        self.center
    }

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

    /// Hop distance from the center in the host graph.
    pub fn tier(&self, u: u32) -> u32 {
        self.dist_from_center[u as usize]
    }

    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for &u in &self.nodes {
            for &w in self.neighbors(u) {
                if u < w {
                    out.push((u, w));
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Builds `H_v`: the deterministic shortest-path tree from `v` to every
/// observed node, plus every host-graph edge incident to those path nodes.
pub fn build_candidate_subgraph(
    g: &Graph,
    v: u32,
    ve: &ObservationSet,
) -> Result<CandidateSubgraph> {
    g.check_node(v)?;
    ve.validate_against(g)?;
    let (dist, parent) = bfs_with_parents(g, v);
    for &u in ve.nodes() {
        if !dist.is_reachable(u) {
            return Err(Error::Unreachable { node: u, from: v });
        }
    }
    let n = g.node_count();
    let mut on_path = vec![false; n];
    on_path[v as usize] = true;
    for &e in ve.nodes() {
        let mut cur = e;
        while !on_path[cur as usize] {
            on_path[cur as usize] = true;
            cur = parent[cur as usize].expect("reachable");
        }
    }
    let mut member = vec![false; n];
    for u in 0..n as u32 {
        if on_path[u as usize] {
            member[u as usize] = true;
            for &w in g.neighbors(u) {
                member[w as usize] = true;
            }
        }
    }
    let mut adj = vec![Vec::new(); n];
    let mut nodes = Vec::new();
    for u in 0..n as u32 {
        if !member[u as usize] {
            continue;
        }
        nodes.push(u);
        adj[u as usize] = g
            .neighbors(u)
            .iter()
            .copied()
            .filter(|&w| on_path[u as usize] || on_path[w as usize])
            .collect();
    }
    let dist_from_center = (0..n as u32).map(|u| dist.raw(u)).collect();
    Ok(CandidateSubgraph {
        center: v,
        nodes,
        member,
        adj,
        dist_from_center,
    })
}

/// A rooted tree traced by an infection, with its depth map `U` and subtree
/// height map `D` kept exact at all times.
#[derive(Debug, Clone)]
pub struct InfectionTree {
    root: u32,
    parent: Vec<Option<u32>>,
    children: Vec<Vec<u32>>,
    nodes: Vec<u32>,
    member: Vec<bool>,
    depth: Vec<u32>,
    height: Vec<u32>,
}

impl InfectionTree {
    /// Builds the tree from parent pointers; `parent[u]` must be `None`
    /// exactly for the root, and only member entries are read.
    fn from_parents(index_size: usize, root: u32, nodes: Vec<u32>, parent: Vec<Option<u32>>) -> Self {
        let mut children = vec![Vec::new(); index_size];
        let mut member = vec![false; index_size];
        for &u in &nodes {
            member[u as usize] = true;
        }
        for &u in &nodes {
            if let Some(p) = parent[u as usize] {
                children[p as usize].push(u);
            }
        }
        for list in &mut children {
            list.sort_unstable();
        }
        let mut tree = InfectionTree {
            root,
            parent,
            children,
            nodes,
            member,
            depth: vec![0; index_size],
            height: vec![0; index_size],
        };
        let (depth, height) = tree.recompute_maps();
        tree.depth = depth;
        tree.height = height;
        tree
    }

    pub fn root(&self) -> u32 {
        self.root
    }

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

    pub fn parent(&self, u: u32) -> Option<u32> {
        self.parent[u as usize]
    }

    pub fn children(&self, u: u32) -> &[u32] {
        &self.children[u as usize]
    }

    /// Depth `U(u)`: hops from the root within the tree.
    pub fn depth(&self, u: u32) -> u32 {
        self.depth[u as usize]
    }

    /// Height `D(u)`: length of the longest path from `u` into its subtree.
    pub fn height(&self, u: u32) -> u32 {
        self.height[u as usize]
    }

    pub fn degree_in_tree(&self, u: u32) -> usize {
        self.children[u as usize].len() + usize::from(self.parent[u as usize].is_some())
    }

    /// Members in BFS order from the root.
    pub fn bfs_order(&self) -> Vec<u32> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(self.root);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for &c in self.children(u) {
                queue.push_back(c);
            }
        }
        order
    }

    /// Fresh depth/height maps computed from the structure alone.
    pub fn recompute_maps(&self) -> (Vec<u32>, Vec<u32>) {
        let mut depth = vec![0u32; self.parent.len()];
        let mut height = vec![0u32; self.parent.len()];
        let order = self.bfs_order();
        for &u in &order {
            if let Some(p) = self.parent(u) {
                depth[u as usize] = depth[p as usize] + 1;
            }
        }
        for &u in order.iter().rev() {
            let mut h = 0;
            for &c in self.children(u) {
                h = h.max(height[c as usize] + 1);
            }
            height[u as usize] = h;
        }
        (depth, height)
    }

    /// Telescoped height sum `F = sum over non-root u of D(parent(u)) - D(u)`.
    pub fn objective(&self) -> u64 {
        self.nodes
            .iter()
            .filter(|&&u| u != self.root)
            .map(|&u| {
                let p = self.parent(u).expect("non-root");
                u64::from(self.height(p) - self.height(u))
            })
            .sum()
    }

    /// Degree form of the same objective:
    /// `sum (deg_T(u) - 2) * D(u) + 2 * D(root)`.
    pub fn objective_degree_form(&self) -> i64 {
        let mut total = 2 * i64::from(self.height(self.root));
        for &u in &self.nodes {
            total += (self.degree_in_tree(u) as i64 - 2) * i64::from(self.height(u));
        }
        total
    }
}

/// Objective of an infection tree (the telescoped height sum).
pub fn objective_f(tree: &InfectionTree) -> u64 {
    tree.objective()
}

/// Log-likelihood of an infection tree: the probability of the most likely
/// infection path that traces out exactly this tree.
///
/// `p^(|T|-1) * (1-p)^(F-|T|+1) * prod q over observed * prod (1-q) over the rest`.
pub fn tree_log_likelihood(
    tree: &InfectionTree,
    ve: &ObservationSet,
    params: &SiParams,
) -> Result<f64> {
    for &u in ve.nodes() {
        if !tree.contains(u) {
            return Err(Error::InvalidArgument(format!(
                "explicit node {u} is not part of the infection tree"
            )));
        }
    }
    let size = tree.len() as f64;
    let f = tree.objective() as f64;
    let p = params.p();
    let mut log = (size - 1.0) * p.ln() + (f - size + 1.0) * (1.0 - p).ln();
    for &u in ve.nodes() {
        log += params.q(u).ln();
    }
    for &u in tree.nodes() {
        if !ve.contains(u) {
            log += (1.0 - params.q(u)).ln();
        }
    }
    Ok(log)
}

/// Deterministic BFS spanning tree of the candidate subgraph, rooted at its
/// center. This is reverse greedy's starting point.
pub fn bfs_spanning_tree(h: &CandidateSubgraph) -> InfectionTree {
    let n = h.adj.len();
    let mut parent = vec![None; n];
    let mut seen = vec![false; n];
    seen[h.center as usize] = true;
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(h.center);
    while let Some(u) = queue.pop_front() {
        for &w in h.neighbors(u) {
            if !seen[w as usize] {
                seen[w as usize] = true;
                parent[w as usize] = Some(u);
                queue.push_back(w);
            }
        }
    }
    InfectionTree::from_parents(n, h.center, h.nodes.clone(), parent)
}

impl InfectionTree {
    fn subtree_nodes(&self, x: u32) -> Vec<u32> {
        let mut out = vec![x];
        let mut head = 0;
        while head < out.len() {
            let u = out[head];
            head += 1;
            out.extend_from_slice(self.children(u));
        }
        out
    }

    fn in_subtree(&self, node: u32, top: u32) -> bool {
        let mut cur = node;
        loop {
            if cur == top {
                return true;
            }
            match self.parent(cur) {
                Some(p) => cur = p,
                None => return false,
            }
        }
    }

    /// Recomputes heights from `start` toward the root until a node's height
    /// is unchanged. Handles both growth and shrinkage after an edge swap.
    fn refresh_heights_upward(&mut self, start: u32) {
        let mut cur = Some(start);
        while let Some(u) = cur {
            let fresh = self
                .children(u)
                .iter()
                .map(|&c| self.height[c as usize] + 1)
                .max()
                .unwrap_or(0);
            if fresh == self.height[u as usize] {
                break;
            }
            self.height[u as usize] = fresh;
            cur = self.parent(u);
        }
    }

    /// Detaches `x` from its parent and reattaches it under `y`, keeping the
    /// depth and height maps exact.
    fn reattach(&mut self, x: u32, y: u32) {
        let old = self.parent(x).expect("only non-root nodes move");
        if old == y {
            return;
        }
        let pos = self.children[old as usize]
            .iter()
            .position(|&c| c == x)
            .expect("child list consistent");
        self.children[old as usize].remove(pos);
        self.refresh_heights_upward(old);

        self.parent[x as usize] = Some(y);
        let insert_at = self.children[y as usize]
            .binary_search(&x)
            .expect_err("x not yet a child of y");
        self.children[y as usize].insert(insert_at, x);

        let delta = i64::from(self.depth[y as usize]) + 1 - i64::from(self.depth[x as usize]);
        if delta != 0 {
            for u in self.subtree_nodes(x) {
                self.depth[u as usize] =
                    (i64::from(self.depth[u as usize]) + delta) as u32;
            }
        }
        self.refresh_heights_upward(y);
    }
}

/// Reverse greedy: walks the BFS tree from the deepest tier up, reattaching
/// each node to the deepest feasible neighbor so that low-height nodes shed
/// degree. Returns the adjusted spanning tree of `H_v`.
pub fn reverse_greedy(h: &CandidateSubgraph) -> InfectionTree {
    reverse_greedy_audited(h, |_| {})
}

/// Reverse greedy with an audit callback invoked after each processed node;
/// tests use it to compare the incremental maps against a fresh recompute.
pub fn reverse_greedy_audited<F: FnMut(&InfectionTree)>(
    h: &CandidateSubgraph,
    mut audit: F,
) -> InfectionTree {
    let mut tree = bfs_spanning_tree(h);
    let horizon = tree.height(tree.root());
    if horizon == 0 {
        return tree;
    }
    for tier in (1..=horizon).rev() {
        let bucket: Vec<u32> = tree
            .nodes()
            .iter()
            .copied()
            .filter(|&u| tree.depth(u) == tier)
            .collect();
        let mut processed = vec![false; bucket.len()];
        for _ in 0..bucket.len() {
            // next unprocessed node with the smallest current height
            let (slot, &x) = bucket
                .iter()
                .enumerate()
                .filter(|(i, _)| !processed[*i])
                .min_by_key(|(_, &u)| (tree.height(u), u))
                .expect("bucket not exhausted");
            processed[slot] = true;

            let budget = horizon - tree.height(x) - 1;
            let mut best: Option<(u32, u32, u32)> = None; // (depth, shed height, id)
            for &y in h.neighbors(x) {
                if tree.depth(y) > budget || tree.in_subtree(y, x) {
                    continue;
                }
                let shed = if Some(y) == tree.parent(x) {
                    // height of y's subtree with x's branch removed
                    tree.children(y)
                        .iter()
                        .filter(|&&c| c != x)
                        .map(|&c| tree.height(c) + 1)
                        .max()
                        .unwrap_or(0)
                } else {
                    tree.height(y)
                };
                let candidate = (tree.depth(y), shed, y);
                let better = match best {
                    None => true,
                    Some((bd, bs, bid)) => {
                        candidate.0 > bd
                            || (candidate.0 == bd && candidate.1 > bs)
                            || (candidate.0 == bd && candidate.1 == bs && y < bid)
                    }
                };
                if better {
                    best = Some(candidate);
                }
            }
            let (_, _, y) =
                best.expect("the current parent always satisfies the depth budget");
            tree.reattach(x, y);
            debug_assert_eq!(tree.height(tree.root()), horizon);
            audit(&tree);
        }
    }
    tree
}

/// Number of spanning trees of the candidate subgraph (matrix-tree theorem,
/// exact integer arithmetic).
pub fn spanning_tree_count(h: &CandidateSubgraph) -> BigInt {
    let nodes = h.nodes();
    let n = nodes.len();
    if n <= 1 {
        return BigInt::from(1);
    }
    let index_of = |u: u32| nodes.binary_search(&u).expect("member");
    // reduced Laplacian (drop the last row/column)
    let m = n - 1;
    let mut a = vec![vec![BigInt::zero(); m]; m];
    for (i, &u) in nodes.iter().enumerate().take(m) {
        a[i][i] = BigInt::from(h.neighbors(u).len());
        for &w in h.neighbors(u) {
            let j = index_of(w);
            if j < m {
                a[i][j] = BigInt::from(-1);
            }
        }
    }
    // fraction-free Bareiss elimination
    let mut sign = BigInt::from(1);
    let mut prev = BigInt::from(1);
    for k in 0..m {
        if a[k][k].is_zero() {
            let swap = (k + 1..m).find(|&r| !a[r][k].is_zero());
            match swap {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..m {
            for j in k + 1..m {
                let num = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    let det = a[m - 1][m - 1].clone() * sign;
    det.abs()
}

/// Exact minimizer of the height-sum objective over all spanning trees of
/// `H_v`, found by guarded enumeration. When `prune` is set, non-observed
/// leaf branches are removed from the minimizer before it is returned.
pub fn spanning_tree_oracle(
    h: &CandidateSubgraph,
    ve: &ObservationSet,
    prune: bool,
) -> Result<InfectionTree> {
    if h.len() > ORACLE_MAX_SUBGRAPH_NODES {
        return Err(Error::ScaleRefused {
            what: "spanning-tree oracle subgraph size",
            limit: ORACLE_MAX_SUBGRAPH_NODES as u64,
            actual: h.len() as u64,
        });
    }
    let count = spanning_tree_count(h);
    if count > BigInt::from(ORACLE_MAX_SPANNING_TREES) {
        return Err(Error::ScaleRefused {
            what: "spanning tree count",
            limit: ORACLE_MAX_SPANNING_TREES,
            actual: count.to_u64().unwrap_or(u64::MAX),
        });
    }

    let index_size = h.adj.len();
    let edges = h.edges();
    let n = h.len();
    let mut best: Option<(u64, InfectionTree)> = None;
    let mut chosen: Vec<(u32, u32)> = Vec::with_capacity(n - 1);
    enumerate_spanning_trees(h, &edges, 0, &mut chosen, &mut |tree_edges| {
        let tree = tree_from_edges(index_size, h.center, h.nodes.clone(), tree_edges);
        let f = tree.objective();
        if best.as_ref().map_or(true, |(bf, _)| f < *bf) {
            best = Some((f, tree));
        }
    });
    let (_, tree) = best.expect("a connected subgraph has a spanning tree");
    Ok(if prune {
        prune_non_explicit_leaves(&tree, ve)
    } else {
        tree
    })
}

fn tree_from_edges(
    index_size: usize,
    root: u32,
    nodes: Vec<u32>,
    tree_edges: &[(u32, u32)],
) -> InfectionTree {
    let mut adj: std::collections::HashMap<u32, Vec<u32>> = std::collections::HashMap::new();
    for &(a, b) in tree_edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut parent = vec![None; index_size];
    let mut seen = vec![false; index_size];
    seen[root as usize] = true;
    let mut queue = std::collections::VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        if let Some(list) = adj.get(&u) {
            for &w in list {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    parent[w as usize] = Some(u);
                    queue.push_back(w);
                }
            }
        }
    }
    InfectionTree::from_parents(index_size, root, nodes, parent)
}

/// Recursive spanning-tree enumeration with connectivity pruning: at every
/// branch the undecided edges can still complete a spanning tree, so the
/// recursion tree size stays proportional to the number of spanning trees.
fn enumerate_spanning_trees<F: FnMut(&[(u32, u32)])>(
    h: &CandidateSubgraph,
    edges: &[(u32, u32)],
    idx: usize,
    chosen: &mut Vec<(u32, u32)>,
    emit: &mut F,
) {
    if chosen.len() == h.len() - 1 {
        emit(chosen);
        return;
    }
    if idx == edges.len() {
        return;
    }
    let nodes = h.nodes();
    let index_of = |u: u32| nodes.binary_search(&u).expect("member");

    // include edges[idx] if it joins two components of the chosen forest
    {
        let mut dsu = Dsu::new(h.len());
        for &(a, b) in chosen.iter() {
            dsu.union(index_of(a), index_of(b));
        }
        let (a, b) = edges[idx];
        if dsu.union(index_of(a), index_of(b)) {
            chosen.push(edges[idx]);
            enumerate_spanning_trees(h, edges, idx + 1, chosen, emit);
            chosen.pop();
        }
    }

    // exclude edges[idx] if the remaining edges still connect everything
    {
        let mut dsu = Dsu::new(h.len());
        let mut components = h.len();
        for &(a, b) in chosen.iter().chain(&edges[idx + 1..]) {
            if dsu.union(index_of(a), index_of(b)) {
                components -= 1;
            }
        }
        if components == 1 {
            enumerate_spanning_trees(h, edges, idx + 1, chosen, emit);
        }
    }
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    /// Returns true when the union merged two distinct components.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            false
        } else {
            self.parent[ra] = rb;
            true
        }
    }
}

/// Iteratively removes leaves that are neither observed nor the root. The
/// most likely infection tree never ends in an unobserved branch.
pub fn prune_non_explicit_leaves(tree: &InfectionTree, ve: &ObservationSet) -> InfectionTree {
    let index_size = tree.parent.len();
    let mut keep: Vec<bool> = vec![false; index_size];
    for &u in tree.nodes() {
        keep[u as usize] = true;
    }
    let mut child_count = vec![0usize; index_size];
    for &u in tree.nodes() {
        if let Some(p) = tree.parent(u) {
            child_count[p as usize] += 1;
        }
    }
    let mut stack: Vec<u32> = tree
        .nodes()
        .iter()
        .copied()
        .filter(|&u| child_count[u as usize] == 0 && u != tree.root() && !ve.contains(u))
        .collect();
    while let Some(u) = stack.pop() {
        keep[u as usize] = false;
        let p = tree.parent(u).expect("non-root leaf");
        child_count[p as usize] -= 1;
        if child_count[p as usize] == 0 && p != tree.root() && !ve.contains(p) {
            stack.push(p);
        }
    }
    let nodes: Vec<u32> = tree.nodes().iter().copied().filter(|&u| keep[u as usize]).collect();
    let mut parent = vec![None; index_size];
    for &u in &nodes {
        parent[u as usize] = tree.parent(u);
    }
    InfectionTree::from_parents(index_size, tree.root(), nodes, parent)
}

/// Options for the general-network estimator.
#[derive(Debug, Clone)]
pub struct GeneralOptions {
    pub method: Method,
    /// Remove unobserved leaf branches before scoring (on by default).
    pub prune: bool,
    /// When set, restrict candidate sources to a hop ball of this radius
    /// around the minimum-range node instead of the whole component.
    pub candidate_radius: Option<u32>,
}

impl GeneralOptions {
    pub fn rg() -> Self {
        GeneralOptions {
            method: Method::Rg,
            prune: true,
            candidate_radius: None,
        }
    }

    pub fn oracle() -> Self {
        GeneralOptions {
            method: Method::Oracle,
            prune: true,
            candidate_radius: None,
        }
    }
}

/// General-network estimate plus boundary bookkeeping.
#[derive(Debug, Clone)]
pub struct GeneralEstimate {
    pub estimate: SourceEstimate,
    /// Candidate sources of host-graph degree one; finite-graph boundary
    /// effects concentrate there.
    pub degree_one_candidates: usize,
}

/// Scores each candidate source by the likelihood of its best infection tree
/// and returns the argmax set.
pub fn estimate_source_general(
    g: &Graph,
    ve: &ObservationSet,
    params: &SiParams,
    opts: &GeneralOptions,
) -> Result<GeneralEstimate> {
    ve.validate_against(g)?;
    params.check_observable(ve)?;
    let anchor = ve.nodes()[0];
    let component = g.component_of(anchor);
    for &u in ve.nodes() {
        if component.binary_search(&u).is_err() {
            return Err(Error::Unreachable { node: u, from: anchor });
        }
    }

    let candidates: Vec<u32> = match opts.candidate_radius {
        None => component,
        Some(radius) => {
            let mut center = anchor;
            let mut best_range = u32::MAX;
            let mut range = vec![0u32; g.node_count()];
            for &u in ve.nodes() {
                let dist = crate::graph::bfs_distances(g, u);
                for &x in &component {
                    range[x as usize] = range[x as usize].max(dist.raw(x));
                }
            }
            for &x in &component {
                if range[x as usize] < best_range {
                    best_range = range[x as usize];
                    center = x;
                }
            }
            let dist = crate::graph::bfs_distances(g, center);
            component
                .into_iter()
                .filter(|&u| dist.raw(u) <= radius)
                .collect()
        }
    };

    let method = opts.method;
    let scored: Vec<(u32, Result<f64>)> = candidates
        .par_iter()
        .map(|&v| {
            let score = (|| {
                let h = build_candidate_subgraph(g, v, ve)?;
                let tree = match method {
                    Method::Rg => reverse_greedy(&h),
                    Method::Oracle => spanning_tree_oracle(&h, ve, false)?,
                    other => {
                        return Err(Error::InvalidArgument(format!(
                            "method {other} is not a general-network tree search"
                        )))
                    }
                };
                let tree = if opts.prune {
                    prune_non_explicit_leaves(&tree, ve)
                } else {
                    tree
                };
                tree_log_likelihood(&tree, ve, params)
            })();
            (v, score)
        })
        .collect();

    let mut best = f64::NEG_INFINITY;
    let mut estimators = Vec::new();
    for (v, score) in scored {
        let score = score?;
        if score > best {
            best = score;
            estimators = vec![v];
        } else if score == best {
            estimators.push(v);
        }
    }
    let degree_one_candidates = candidates.iter().filter(|&&u| g.degree(u) == 1).count();
    Ok(GeneralEstimate {
        estimate: SourceEstimate::new(method, estimators, best),
        degree_one_candidates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{cycle_graph, demo_tree, path_graph, random_labeled_tree};
    use crate::jordan::jordan_centers_exhaustive;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn candidate_subgraph_swallows_whole_cycle() {
        let g = cycle_graph(4);
        let ve = ObservationSet::new(vec![2]).unwrap();
        let h = build_candidate_subgraph(&g, 0, &ve).unwrap();
        assert_eq!(h.nodes(), &[0, 1, 2, 3]);
        assert_eq!(h.edges().len(), 4);
    }

    #[test]
    fn candidate_subgraph_on_tree_contains_spanning_subtree() {
        let (g, labels) = demo_tree();
        let v1 = labels.id_of("v1").unwrap();
        let ve = ObservationSet::new(vec![
            labels.id_of("v2").unwrap(),
            labels.id_of("v3").unwrap(),
        ])
        .unwrap();
        let h = build_candidate_subgraph(&g, v1, &ve).unwrap();
        for name in ["v1", "v2", "v3", "v4"] {
            assert!(h.contains(labels.id_of(name).unwrap()), "{name} missing");
        }
        // v4 joins through the incident edge only; its own leaves do not
        assert!(!h.contains(labels.id_of("v9").unwrap()));
    }

    #[test]
    fn objective_forms_agree_on_simple_shapes() {
        // star: every leaf contributes 1
        let g = crate::fixtures::star_graph(5);
        let ve = ObservationSet::new(vec![1, 2, 3, 4, 5]).unwrap();
        let h = build_candidate_subgraph(&g, 0, &ve).unwrap();
        let tree = bfs_spanning_tree(&h);
        assert_eq!(tree.objective(), 5);
        assert_eq!(tree.objective_degree_form(), 5);

        // path rooted at its end telescopes to its length
        let g = path_graph(6);
        let ve = ObservationSet::new(vec![5]).unwrap();
        let h = build_candidate_subgraph(&g, 0, &ve).unwrap();
        let tree = bfs_spanning_tree(&h);
        assert_eq!(tree.objective(), 5);
        assert_eq!(tree.objective_degree_form(), 5);
    }

    #[test]
    fn objective_forms_agree_on_random_trees() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let n = rng.gen_range(2..=10);
            let g = random_labeled_tree(n, &mut rng);
            let ve = ObservationSet::new(vec![(n - 1) as u32]).unwrap();
            let root = rng.gen_range(0..n as u32);
            let h = build_candidate_subgraph(&g, root, &ve).unwrap();
            let tree = bfs_spanning_tree(&h);
            assert_eq!(tree.objective() as i64, tree.objective_degree_form());
        }
    }

    #[test]
    fn tree_likelihood_of_single_edge() {
        let g = path_graph(2);
        let params = SiParams::new(0.3, vec![0.2, 0.7]).unwrap();
        let ve = ObservationSet::new(vec![1]).unwrap();
        let h = build_candidate_subgraph(&g, 0, &ve).unwrap();
        let tree = bfs_spanning_tree(&h);
        let got = tree_log_likelihood(&tree, &ve, &params).unwrap();
        let want = (0.3f64).ln() + (0.7f64).ln() + (1.0 - 0.2f64).ln();
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn tree_likelihood_requires_observed_nodes() {
        let g = path_graph(3);
        let params = SiParams::uniform(0.3, 0.5, 3).unwrap();
        let ve_far = ObservationSet::new(vec![2]).unwrap();
        let ve_near = ObservationSet::new(vec![1]).unwrap();
        let h = build_candidate_subgraph(&g, 0, &ve_near).unwrap();
        let tree = prune_non_explicit_leaves(&bfs_spanning_tree(&h), &ve_near);
        assert!(tree_log_likelihood(&tree, &ve_far, &params).is_err());
    }

    #[test]
    fn reverse_greedy_keeps_paths_and_trees_unchanged() {
        // path from the center: every node's only feasible candidate is its parent
        let g = path_graph(5);
        let ve = ObservationSet::new(vec![4]).unwrap();
        let h = build_candidate_subgraph(&g, 0, &ve).unwrap();
        let start = bfs_spanning_tree(&h);
        let out = reverse_greedy(&h);
        for &u in out.nodes() {
            assert_eq!(out.parent(u), start.parent(u));
        }

        // pure tree: output must equal the unique spanning tree
        let (g, labels) = demo_tree();
        let ve = ObservationSet::new(vec![
            labels.id_of("v5").unwrap(),
            labels.id_of("v7").unwrap(),
        ])
        .unwrap();
        let h = build_candidate_subgraph(&g, labels.id_of("v1").unwrap(), &ve).unwrap();
        let start = bfs_spanning_tree(&h);
        let out = reverse_greedy(&h);
        for &u in out.nodes() {
            assert_eq!(out.parent(u), start.parent(u));
        }
        let oracle = spanning_tree_oracle(&h, &ve, false).unwrap();
        assert_eq!(out.objective(), oracle.objective());
    }

    #[test]
    fn reverse_greedy_incremental_maps_stay_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..30 {
            let n = rng.gen_range(5..=12);
            let mut g = random_labeled_tree(n, &mut rng);
            // sprinkle extra edges to create reattachment opportunities
            for _ in 0..3 {
                let a = rng.gen_range(0..n as u32);
                let b = rng.gen_range(0..n as u32);
                if a != b && !g.has_edge(a, b) {
                    let mut edges: Vec<(u32, u32)> = g.edges().collect();
                    edges.push((a.min(b), a.max(b)));
                    g = Graph::from_edges(n, &edges).unwrap();
                }
            }
            let ve_nodes: Vec<u32> = (0..n as u32).filter(|_| rng.gen_bool(0.4)).collect();
            let ve = match ObservationSet::new(ve_nodes) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let center = rng.gen_range(0..n as u32);
            let h = build_candidate_subgraph(&g, center, &ve).unwrap();
            let mut audits = 0;
            reverse_greedy_audited(&h, |tree| {
                audits += 1;
                let (depth, height) = tree.recompute_maps();
                for &u in tree.nodes() {
                    assert_eq!(depth[u as usize], tree.depth(u), "depth drift at {u}");
                    assert_eq!(height[u as usize], tree.height(u), "height drift at {u}");
                }
            });
            assert!(audits > 0);
        }
    }

    #[test]
    fn reverse_greedy_never_beats_oracle_and_depth_stays_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(91);
        let mut tree_equal = 0;
        for round in 0..40 {
            let n = rng.gen_range(4..=7);
            let mut edges: Vec<(u32, u32)> = random_labeled_tree(n, &mut rng).edges().collect();
            if round % 2 == 0 {
                let a = rng.gen_range(0..n as u32);
                let b = rng.gen_range(0..n as u32);
                if a != b && !edges.contains(&(a.min(b), a.max(b))) {
                    edges.push((a.min(b), a.max(b)));
                }
            }
            let g = Graph::from_edges(n, &edges).unwrap();
            let ve_nodes: Vec<u32> = (0..n as u32).filter(|_| rng.gen_bool(0.5)).collect();
            let ve = match ObservationSet::new(ve_nodes) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let center = rng.gen_range(0..n as u32);
            let h = build_candidate_subgraph(&g, center, &ve).unwrap();
            let rg = reverse_greedy(&h);
            let oracle = spanning_tree_oracle(&h, &ve, false).unwrap();
            assert!(
                rg.objective() >= oracle.objective(),
                "rg {} < oracle {}",
                rg.objective(),
                oracle.objective()
            );
            if g.is_tree() {
                assert_eq!(rg.objective(), oracle.objective());
                tree_equal += 1;
            }
            let horizon = bfs_spanning_tree(&h).height(center);
            for &u in rg.nodes() {
                assert!(rg.depth(u) <= horizon);
            }
        }
        assert!(tree_equal > 0);
    }

    #[test]
    fn spanning_tree_oracle_on_cycle() {
        let g = cycle_graph(4);
        let ve = ObservationSet::new(vec![2]).unwrap();
        let h = build_candidate_subgraph(&g, 0, &ve).unwrap();
        assert_eq!(spanning_tree_count(&h).to_u64().unwrap(), 4);
        let tree = spanning_tree_oracle(&h, &ve, false).unwrap();
        // best spanning tree of a 4-cycle from the opposite corner is a path: F = 3
        assert_eq!(tree.objective(), 3);
    }

    #[test]
    fn spanning_tree_oracle_scale_refusal_reports_count() {
        // complete graph with every node observed: the candidate subgraph is
        // the whole clique and the spanning-tree count explodes
        let n = 12u32;
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                edges.push((a, b));
            }
        }
        let g = Graph::from_edges(n as usize, &edges).unwrap();
        let ve = ObservationSet::new((0..n).collect()).unwrap();
        let h = build_candidate_subgraph(&g, 0, &ve).unwrap();
        // matrix-tree count of K12 is 12^10
        assert_eq!(
            spanning_tree_count(&h),
            BigInt::from(12u64).pow(10)
        );
        match spanning_tree_oracle(&h, &ve, false) {
            Err(Error::ScaleRefused { actual, .. }) => assert!(actual > 100_000),
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn pruning_reduces_single_observation_to_singleton() {
        let g = cycle_graph(5);
        let ve = ObservationSet::new(vec![2]).unwrap();
        let h = build_candidate_subgraph(&g, 2, &ve).unwrap();
        let tree = prune_non_explicit_leaves(&bfs_spanning_tree(&h), &ve);
        assert_eq!(tree.nodes(), &[2]);
        assert_eq!(tree.objective(), 0);
    }

    #[test]
    fn general_estimator_small_p_prefers_observed_node() {
        let g = cycle_graph(6);
        let ve = ObservationSet::new(vec![3]).unwrap();
        let params = SiParams::uniform(0.05, 0.6, g.node_count()).unwrap();
        let est = estimate_source_general(&g, &ve, &params, &GeneralOptions::rg()).unwrap();
        assert_eq!(est.estimate.estimators, vec![3]);
    }

    #[test]
    fn general_estimator_on_trees_stays_inside_observed_subtree() {
        // On a tree the candidate's best infection tree is the subtree
        // spanning the observations plus the chain to the candidate; each
        // chain hop costs log p + log(1-q), so every optimal candidate lies
        // inside the subtree spanning the observed set. The Jordan center is
        // always in that subtree too, keeping the two estimators close; exact
        // coincidence can fail because the tree likelihood omits the
        // exposure of neighbors outside the tree.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut tested = 0;
        let mut nearest_total = 0u32;
        while tested < 20 {
            let n = rng.gen_range(6..=14);
            let g = random_labeled_tree(n, &mut rng);
            let ve_nodes: Vec<u32> = (0..n as u32).filter(|_| rng.gen_bool(0.4)).collect();
            let ve = match ObservationSet::new(ve_nodes) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let p = rng.gen_range(0.2..0.8);
            let lo = crate::si::q_lower_bound(p);
            let q: Vec<f64> = (0..n).map(|_| rng.gen_range(lo + 1e-9..0.99)).collect();
            let params = SiParams::new(p, q).unwrap();
            let est =
                estimate_source_general(&g, &ve, &params, &GeneralOptions::rg()).unwrap();
            let span = crate::graph::minimal_spanning_subtree(&g, ve.nodes()).unwrap();
            for &s in &est.estimate.estimators {
                assert!(span.contains(s), "estimator {s} outside the observed subtree");
            }
            let centers = jordan_centers_exhaustive(&g, &ve).unwrap();
            let nearest = est
                .estimate
                .estimators
                .iter()
                .map(|&s| {
                    let dm = crate::graph::bfs_distances(&g, s);
                    centers.estimators.iter().map(|&c| dm.raw(c)).min().unwrap()
                })
                .min()
                .unwrap();
            nearest_total += nearest;
            tested += 1;
        }
        let mean = f64::from(nearest_total) / tested as f64;
        assert!(mean <= 1.5, "mean distance to the Jordan set {mean} too large");
    }

    #[test]
    fn general_estimator_contains_jordan_center_on_worked_example() {
        let (g, labels) = demo_tree();
        let v1 = labels.id_of("v1").unwrap();
        let ve = ObservationSet::new(vec![
            labels.id_of("v2").unwrap(),
            labels.id_of("v3").unwrap(),
        ])
        .unwrap();
        let params = SiParams::uniform(0.5, 0.5, g.node_count()).unwrap();
        let est = estimate_source_general(&g, &ve, &params, &GeneralOptions::rg()).unwrap();
        assert!(est.estimate.estimators.contains(&v1));
    }

    #[test]
    fn oracle_method_matches_double_loop_on_unicyclic_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut tested = 0;
        while tested < 6 {
            let n = 8usize;
            let mut edges: Vec<(u32, u32)> = random_labeled_tree(n, &mut rng).edges().collect();
            let a = rng.gen_range(0..n as u32);
            let b = rng.gen_range(0..n as u32);
            if a == b || edges.contains(&(a.min(b), a.max(b))) {
                continue;
            }
            edges.push((a.min(b), a.max(b)));
            let g = Graph::from_edges(n, &edges).unwrap();
            let ve_nodes: Vec<u32> = (0..n as u32).filter(|_| rng.gen_bool(0.4)).collect();
            let ve = match ObservationSet::new(ve_nodes) {
                Ok(v) => v,
                Err(_) => continue,
            };
            let params = SiParams::uniform(0.4, 0.5, n).unwrap();
            let est =
                estimate_source_general(&g, &ve, &params, &GeneralOptions::oracle()).unwrap();

            // direct double loop: every candidate, every spanning tree
            let mut best = f64::NEG_INFINITY;
            let mut arg = Vec::new();
            for v in 0..n as u32 {
                let h = build_candidate_subgraph(&g, v, &ve).unwrap();
                let edges = h.edges();
                let mut best_tree: Option<InfectionTree> = None;
                let mut chosen = Vec::new();
                enumerate_spanning_trees(&h, &edges, 0, &mut chosen, &mut |te| {
                    let t = tree_from_edges(g.node_count(), v, h.nodes().to_vec(), te);
                    if best_tree.as_ref().map_or(true, |b| t.objective() < b.objective()) {
                        best_tree = Some(t);
                    }
                });
                let tree = prune_non_explicit_leaves(&best_tree.unwrap(), &ve);
                let score = tree_log_likelihood(&tree, &ve, &params).unwrap();
                if score > best {
                    best = score;
                    arg = vec![v];
                } else if score == best {
                    arg.push(v);
                }
            }
            assert_eq!(est.estimate.estimators, arg);
            tested += 1;
        }
    }
}

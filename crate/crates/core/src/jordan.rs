//! Source estimation on trees.
//!
//! The estimator of choice is the Jordan center of the observed set: the node
//! minimizing the infection range. `jce` finds it with one upward and one
//! partial downward message pass over the subtree spanning the observations,
//! so the work is linear in that subtree. An exhaustive scan and a
//! most-likely-path brute force are provided as validation oracles.

use crate::error::{Error, Result};
use crate::estimate::{Method, SourceEstimate};
use crate::graph::{
    bfs_distances, minimal_spanning_subtree, Graph, ObservationSet, RootedTree,
    SpanSubtree,
};
use crate::oracle::{brute_force_ml_path, ln_rational, RationalParams};
use crate::si::SiParams;

/// Counters from one JCE run; the message total is the linearity witness.
#[derive(Debug, Clone, Copy)]
pub struct JceStats {
    pub messages: usize,
    pub subtree_size: usize,
}

/// Jordan-center estimation on a tree graph: builds the minimal subtree
/// spanning the observations and runs the message-passing search on it.
pub fn jce(g: &Graph, ve: &ObservationSet) -> Result<SourceEstimate> {
    Ok(jce_with_stats(g, ve)?.0)
}

pub fn jce_with_stats(g: &Graph, ve: &ObservationSet) -> Result<(SourceEstimate, JceStats)> {
    if !g.is_tree() {
        return Err(Error::TreeMethodOnGeneralGraph);
    }
    ve.validate_against(g)?;
    let h = minimal_spanning_subtree(g, ve.nodes())?;
    jce_on_subtree(&h, ve)
}

/// Runs JCE on a prebuilt spanning subtree, rooting at the lowest-id
/// non-leaf node. Correctness does not depend on the root choice; the fixed
/// pick keeps output deterministic.
pub fn jce_on_subtree(h: &SpanSubtree, ve: &ObservationSet) -> Result<(SourceEstimate, JceStats)> {
    if h.len() <= 2 {
        let estimators = h.nodes().to_vec();
        let score = if h.len() == 1 { 0.0 } else { 1.0 };
        return Ok((
            SourceEstimate::new(Method::Jce, estimators, score),
            JceStats {
                messages: 0,
                subtree_size: h.len(),
            },
        ));
    }
    let root = h
        .nodes()
        .iter()
        .copied()
        .find(|&u| h.degree(u) >= 2)
        .expect("a subtree with more than two nodes has an interior node");
    jce_with_root(h, ve, root)
}

/// JCE with an explicit root choice; the root must be a non-leaf of `h`.
pub fn jce_with_root(
    h: &SpanSubtree,
    ve: &ObservationSet,
    root: u32,
) -> Result<(SourceEstimate, JceStats)> {
    if !h.contains(root) || h.degree(root) < 2 {
        return Err(Error::InvalidArgument(format!(
            "root {root} is not an interior node of the spanning subtree"
        )));
    }
    for &u in ve.nodes() {
        if !h.contains(u) {
            return Err(Error::InvalidArgument(format!(
                "subtree does not span explicit node {u}"
            )));
        }
    }
    let tree = RootedTree::from_subtree(h, root)?;
    let n = tree.nodes().iter().copied().max().unwrap() as usize + 1;
    let mut longest = vec![0u32; n]; // l1: longest path length into the subtree below
    let mut second = vec![0u32; n]; // l2: second longest, disjoint first edge
    let mut best_child = vec![u32::MAX; n];
    let mut upward = vec![0u32; n]; // f_v(parent)
    let mut messages = 0usize;

    let order = tree.bfs_order();
    for &u in order.iter().rev() {
        if h.degree(u) == 1 {
            upward[u as usize] = 1;
        } else {
            let mut l1 = 0u32;
            let mut l2 = 0u32;
            let mut v1 = u32::MAX;
            for &c in tree.children(u) {
                let f = upward[c as usize];
                if f > l1 {
                    l2 = l1;
                    l1 = f;
                    v1 = c;
                } else if f > l2 {
                    l2 = f;
                }
            }
            longest[u as usize] = l1;
            second[u as usize] = l2;
            best_child[u as usize] = v1;
            upward[u as usize] = l1 + 1;
        }
        if u != root {
            messages += 1; // one message to the parent
        }
    }

    // downward pass along the best-child chain
    let mut cur = root;
    let mut incoming: Option<u32> = None;
    let estimator = loop {
        if let Some(g_in) = incoming {
            second[cur as usize] = second[cur as usize].max(g_in);
        }
        if longest[cur as usize] <= second[cur as usize] + 1 {
            break cur;
        }
        let g_out = second[cur as usize] + 1;
        messages += 1;
        incoming = Some(g_out);
        cur = best_child[cur as usize];
    };

    let score = range_within_subtree(h, estimator, ve);
    Ok((
        SourceEstimate::new(Method::Jce, vec![estimator], f64::from(score)),
        JceStats {
            messages,
            subtree_size: h.len(),
        },
    ))
}

/// Infection range of `v` over `ve`, measured inside the subtree (distances
/// in a subtree of a tree agree with distances in the full graph).
fn range_within_subtree(h: &SpanSubtree, v: u32, ve: &ObservationSet) -> u32 {
    let size = h.nodes().iter().copied().max().unwrap() as usize + 1;
    let mut dist = vec![u32::MAX; size];
    let mut queue = std::collections::VecDeque::new();
    dist[v as usize] = 0;
    queue.push_back(v);
    while let Some(u) = queue.pop_front() {
        for &w in h.neighbors(u) {
            if dist[w as usize] == u32::MAX {
                dist[w as usize] = dist[u as usize] + 1;
                queue.push_back(w);
            }
        }
    }
    ve.nodes().iter().map(|&u| dist[u as usize]).max().unwrap()
}

/// Full argmin set of the infection range over all nodes, by direct scan.
/// On a tree the set has one or two members, and two members are adjacent.
pub fn jordan_centers_exhaustive(g: &Graph, ve: &ObservationSet) -> Result<SourceEstimate> {
    if !g.is_tree() {
        return Err(Error::NotATree);
    }
    ve.validate_against(g)?;
    let n = g.node_count();
    let mut range = vec![0u32; n];
    for &u in ve.nodes() {
        let dist = bfs_distances(g, u);
        for x in 0..n {
            range[x] = range[x].max(dist.raw(x as u32));
        }
    }
    let best = *range.iter().min().unwrap();
    let estimators: Vec<u32> =
        (0..n as u32).filter(|&x| range[x as usize] == best).collect();
    debug_assert!(estimators.len() <= 2);
    if estimators.len() == 2 {
        debug_assert!(g.has_edge(estimators[0], estimators[1]));
    }
    Ok(SourceEstimate::new(
        Method::Jce,
        estimators,
        f64::from(best),
    ))
}

/// Exhaustive most-likely-path source: enumerates every consistent path for
/// every `(v, t <= t_max)` with exact arithmetic and returns the argmax set.
/// Refuses instances beyond the enumeration guards.
pub fn brute_force_ml_path_source(
    g: &Graph,
    ve: &ObservationSet,
    params: &SiParams,
    t_max: u32,
) -> Result<SourceEstimate> {
    if !g.is_tree() {
        return Err(Error::NotATree);
    }
    params.check_observable(ve)?;
    let rational = RationalParams::from_params(params);
    let out = brute_force_ml_path(g, ve, &rational, t_max)?;
    Ok(SourceEstimate::new(
        Method::MlPath,
        out.argmax_sources,
        ln_rational(&out.best_probability),
    ))
}

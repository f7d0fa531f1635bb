//! Export of the spanning-tree height-sum minimization as a mixed-integer
//! quadratically-constrained program, plus a bounded enumeration checker.
//!
//! Variables: one binary `E_ij` per directed edge of the candidate subgraph
//! (`E_ij = 1` means `i` is the tree parent of `j`) and one integer height
//! `D_i >= 0` per node. The objective `sum E_ij * D_i - sum_{i != center} D_i`
//! telescopes to the height-sum objective when the heights are pinned.
//! Instances are exported, not solved here; the checker exists to validate
//! exports on small cases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::general::CandidateSubgraph;

/// Linear objective term `coef * D_node`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearTerm {
    pub node: u32,
    pub coef: i64,
}

/// Objective: `sum over bilinear (i,j) of E_ij * D_i` plus the linear terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Objective {
    pub bilinear: Vec<(u32, u32)>,
    pub linear: Vec<LinearTerm>,
}

/// Incoming-edge count constraint: `sum over j of E_ji = rhs`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncomingConstraint {
    pub node: u32,
    pub rhs: u32,
}

/// Height upper bound `D_node <= sum over listed j of (D_j + 1) * E_node_j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeightUpperBound {
    pub node: u32,
    pub terms: Vec<[u32; 1]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraints {
    pub incoming: Vec<IncomingConstraint>,
    pub total_edges: u32,
    /// Pairs `(i, j)`: `D_i >= (D_j + 1) * E_ij`.
    pub height_lb: Vec<(u32, u32)>,
    pub height_ub: Vec<HeightUpperBound>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    #[serde(rename = "D_max")]
    pub d_max: u32,
}

/// A fully assembled program instance. Field order matches the file schema;
/// all arrays are sorted by node id for byte-stable output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiqcqpInstance {
    pub center: u32,
    pub nodes: Vec<u32>,
    pub directed_edges: Vec<(u32, u32)>,
    pub objective: Objective,
    pub constraints: Constraints,
    pub bounds: Bounds,
}

/// Builds the program for a candidate subgraph.
pub fn export_miqcqp(h: &CandidateSubgraph) -> MiqcqpInstance {
    let nodes: Vec<u32> = h.nodes().to_vec();
    let mut directed_edges = Vec::new();
    for &u in &nodes {
        for &w in h.neighbors(u) {
            directed_edges.push((u, w));
        }
    }
    directed_edges.sort_unstable();

    let linear: Vec<LinearTerm> = nodes
        .iter()
        .filter(|&&u| u != h.center())
        .map(|&u| LinearTerm { node: u, coef: -1 })
        .collect();
    let incoming: Vec<IncomingConstraint> = nodes
        .iter()
        .map(|&u| IncomingConstraint {
            node: u,
            rhs: u32::from(u != h.center()),
        })
        .collect();
    let height_ub: Vec<HeightUpperBound> = nodes
        .iter()
        .map(|&u| HeightUpperBound {
            node: u,
            terms: h.neighbors(u).iter().map(|&w| [w]).collect(),
        })
        .collect();

    MiqcqpInstance {
        center: h.center(),
        nodes: nodes.clone(),
        directed_edges: directed_edges.clone(),
        objective: Objective {
            bilinear: directed_edges.clone(),
            linear,
        },
        constraints: Constraints {
            incoming,
            total_edges: nodes.len() as u32 - 1,
            height_lb: directed_edges,
            height_ub,
        },
        bounds: Bounds {
            d_max: nodes.len() as u32,
        },
    }
}

impl MiqcqpInstance {
    /// Serialization with the fixed field order of the schema. Parsing this
    /// string and re-serializing reproduces it byte for byte.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: format!("bad program instance: {e}"),
        })
    }
}

/// What the bounded enumeration found for one instance.
#[derive(Debug, Clone)]
pub struct EnumerationReport {
    pub feasible_points: usize,
    pub min_objective: i64,
    /// Selected directed edges at the argmin.
    pub argmin_edges: Vec<(u32, u32)>,
    /// `(node, D)` pairs at the argmin.
    pub argmin_d: Vec<(u32, u32)>,
    /// The argmin edge set decodes to a spanning tree rooted at the center.
    pub argmin_is_spanning_tree: bool,
    /// The argmin heights equal the true subtree heights of that tree.
    pub d_pinned_to_heights: bool,
    /// Height-sum objective of the decoded tree.
    pub height_sum: u64,
    /// Program objective at the argmin equals the height sum.
    pub objective_matches_height_sum: bool,
}

const CHECKER_MAX_NODES: usize = 10;
const CHECKER_MAX_POINTS: usize = 5_000_000;

/// Enumerates every feasible `(E, D)` assignment of a small instance and
/// reports the minimizer. Edge assignments with directed cycles admit no
/// feasible heights (each selected edge forces parent height above child
/// height) and are skipped.
pub fn enumerate_instance(inst: &MiqcqpInstance) -> Result<EnumerationReport> {
    let k = inst.nodes.len();
    if k > CHECKER_MAX_NODES {
        return Err(Error::ScaleRefused {
            what: "program checker node count",
            limit: CHECKER_MAX_NODES as u64,
            actual: k as u64,
        });
    }
    let idx = |u: u32| -> usize {
        inst.nodes.binary_search(&u).expect("node referenced by instance")
    };
    let center = idx(inst.center);
    let mut in_neighbors: Vec<Vec<usize>> = vec![Vec::new(); k];
    for &(i, j) in &inst.directed_edges {
        in_neighbors[idx(j)].push(idx(i));
    }

    let non_center: Vec<usize> = (0..k).filter(|&i| i != center).collect();
    let mut parent_choice = vec![usize::MAX; k];
    let mut state = CheckerState {
        inst,
        center,
        feasible_points: 0,
        best: None,
    };
    enumerate_parents(
        &non_center,
        0,
        &in_neighbors,
        &mut parent_choice,
        &mut state,
    )?;

    let (min_objective, parents, d) = state
        .best
        .ok_or_else(|| Error::InvalidArgument("instance has no feasible point".into()))?;

    // decode the argmin
    let mut argmin_edges: Vec<(u32, u32)> = non_center
        .iter()
        .map(|&j| (inst.nodes[parents[j]], inst.nodes[j]))
        .collect();
    argmin_edges.sort_unstable();
    let argmin_d: Vec<(u32, u32)> =
        (0..k).map(|i| (inst.nodes[i], d[i])).collect();

    let spanning = is_arborescence(center, &parents, k);
    let heights = true_heights(center, &parents, k);
    let d_pinned = spanning && (0..k).all(|i| d[i] == heights[i]);
    let height_sum: u64 = non_center
        .iter()
        .map(|&j| u64::from(heights[parents[j]] - heights[j]))
        .sum();
    Ok(EnumerationReport {
        feasible_points: state.feasible_points,
        min_objective,
        argmin_edges,
        argmin_d,
        argmin_is_spanning_tree: spanning,
        d_pinned_to_heights: d_pinned,
        height_sum,
        objective_matches_height_sum: min_objective >= 0
            && min_objective as u64 == height_sum,
    })
}

struct CheckerState<'a> {
    inst: &'a MiqcqpInstance,
    center: usize,
    feasible_points: usize,
    best: Option<(i64, Vec<usize>, Vec<u32>)>,
}

fn enumerate_parents(
    non_center: &[usize],
    pos: usize,
    in_neighbors: &[Vec<usize>],
    parent_choice: &mut Vec<usize>,
    state: &mut CheckerState,
) -> Result<()> {
    if pos == non_center.len() {
        return enumerate_heights(parent_choice, state);
    }
    let j = non_center[pos];
    for &i in &in_neighbors[j] {
        parent_choice[j] = i;
        enumerate_parents(non_center, pos + 1, in_neighbors, parent_choice, state)?;
    }
    parent_choice[j] = usize::MAX;
    Ok(())
}

fn is_arborescence(center: usize, parents: &[usize], k: usize) -> bool {
    for start in 0..k {
        if start == center {
            continue;
        }
        let mut cur = start;
        let mut steps = 0;
        while cur != center {
            cur = parents[cur];
            steps += 1;
            if steps > k {
                return false;
            }
        }
    }
    true
}

fn true_heights(center: usize, parents: &[usize], k: usize) -> Vec<u32> {
    let mut order: Vec<usize> = Vec::with_capacity(k);
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); k];
    for j in 0..k {
        if j != center {
            children[parents[j]].push(j);
        }
    }
    let mut queue = std::collections::VecDeque::from([center]);
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &c in &children[u] {
            queue.push_back(c);
        }
    }
    let mut heights = vec![0u32; k];
    for &u in order.iter().rev() {
        for &c in &children[u] {
            heights[u] = heights[u].max(heights[c] + 1);
        }
    }
    heights
}

fn enumerate_heights(parent_choice: &[usize], state: &mut CheckerState) -> Result<()> {
    let k = state.inst.nodes.len();
    let center = state.center;
    if !is_arborescence(center, parent_choice, k) {
        return Ok(()); // a directed cycle admits no feasible heights
    }
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); k];
    for j in 0..k {
        if j != center {
            children[parent_choice[j]].push(j);
        }
    }
    // children-first order
    let mut order = Vec::with_capacity(k);
    let mut queue = std::collections::VecDeque::from([center]);
    while let Some(u) = queue.pop_front() {
        order.push(u);
        for &c in &children[u] {
            queue.push_back(c);
        }
    }
    order.reverse();

    let d_max = state.inst.bounds.d_max;
    let mut d = vec![0u32; k];
    recurse_heights(&order, 0, &children, d_max, &mut d, parent_choice, state)
}

fn recurse_heights(
    order: &[usize],
    pos: usize,
    children: &[Vec<usize>],
    d_max: u32,
    d: &mut Vec<u32>,
    parent_choice: &[usize],
    state: &mut CheckerState,
) -> Result<()> {
    let k = order.len();
    if pos == k {
        state.feasible_points += 1;
        if state.feasible_points > CHECKER_MAX_POINTS {
            return Err(Error::ScaleRefused {
                what: "program checker feasible points",
                limit: CHECKER_MAX_POINTS as u64,
                actual: state.feasible_points as u64,
            });
        }
        // objective: sum over selected edges (i, j) of D_i, minus D_i for i != center
        let mut obj = 0i64;
        for j in 0..k {
            if j != state.center {
                obj += i64::from(d[parent_choice[j]]);
                obj -= i64::from(d[j]);
            }
        }
        let better = match &state.best {
            None => true,
            Some((b, _, _)) => obj < *b,
        };
        if better {
            state.best = Some((obj, parent_choice.to_vec(), d.clone()));
        }
        return Ok(());
    }
    let u = order[pos];
    let lo = children[u].iter().map(|&c| d[c] + 1).max().unwrap_or(0);
    let hi = children[u]
        .iter()
        .map(|&c| d[c] + 1)
        .sum::<u32>()
        .min(d_max);
    let mut value = lo;
    while value <= hi {
        d[u] = value;
        recurse_heights(order, pos + 1, children, d_max, d, parent_choice, state)?;
        value += 1;
    }
    Ok(())
}

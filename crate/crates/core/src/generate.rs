//! Synthetic network generators for the benchmark protocol: breadth-grown
//! trees with controlled interior degrees, and rewired ring lattices.

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// How per-node target degrees are drawn for random trees.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RandomTreeMode {
    /// Uniform over 3, 4, 5, 6.
    UniformThreeToSix,
    /// Either 3 or 6, equally likely.
    ThreeOrSix,
}

/// Tree grown breadth-first until the node budget is met; one target degree
/// in `[3, 6]` is drawn for the whole tree and every interior node gets it.
pub fn gen_regular_tree<R: Rng>(rng: &mut R, budget: usize) -> Graph {
    let degree = rng.gen_range(3..=6u32);
    grow_tree(rng, budget, |_| degree)
}

/// Tree grown breadth-first with a fresh target degree drawn per node.
pub fn gen_random_tree<R: Rng>(rng: &mut R, mode: RandomTreeMode, budget: usize) -> Graph {
    grow_tree(rng, budget, |rng| match mode {
        RandomTreeMode::UniformThreeToSix => rng.gen_range(3..=6u32),
        RandomTreeMode::ThreeOrSix => {
            if rng.gen_bool(0.5) {
                3
            } else {
                6
            }
        }
    })
}

/// FIFO expansion: each dequeued node receives its full fanout, so interior
/// degrees are exact and the overshoot past the budget is below one fanout.
fn grow_tree<R: Rng, F: Fn(&mut R) -> u32>(rng: &mut R, budget: usize, draw: F) -> Graph {
    assert!(budget >= 7, "budget must cover one full fanout (max degree 6 + 1)");
    let mut edges: Vec<(u32, u32)> = Vec::with_capacity(budget);
    let mut next_id = 1u32;
    let mut queue = std::collections::VecDeque::from([0u32]);
    while let Some(u) = queue.pop_front() {
        if next_id as usize >= budget {
            break;
        }
        let target = draw(rng);
        let fanout = if u == 0 { target } else { target - 1 };
        for _ in 0..fanout {
            let child = next_id;
            next_id += 1;
            edges.push((u, child));
            queue.push_back(child);
        }
    }
    Graph::from_edges(next_id as usize, &edges).expect("generated tree is simple")
}

/// Watts-Strogatz small world: ring lattice of degree `k`, each edge rewired
/// with probability `beta`. Disconnected draws are regenerated and counted.
pub fn gen_small_world<R: Rng>(
    rng: &mut R,
    n: usize,
    k: usize,
    beta: f64,
) -> Result<(Graph, usize)> {
    if k % 2 != 0 || k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "ring degree k = {k} must be even, positive, and below n = {n}"
        )));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidArgument(format!(
            "rewiring probability beta = {beta} must lie in [0, 1]"
        )));
    }
    let mut regenerations = 0usize;
    loop {
        let g = small_world_once(rng, n, k, beta);
        if g.is_connected() {
            return Ok((g, regenerations));
        }
        regenerations += 1;
    }
}

fn small_world_once<R: Rng>(rng: &mut R, n: usize, k: usize, beta: f64) -> Graph {
    let mut adjacency: Vec<std::collections::BTreeSet<u32>> =
        vec![std::collections::BTreeSet::new(); n];
    let connect = |adj: &mut Vec<std::collections::BTreeSet<u32>>, a: u32, b: u32| {
        adj[a as usize].insert(b);
        adj[b as usize].insert(a);
    };
    for i in 0..n as u32 {
        for j in 1..=(k / 2) as u32 {
            let b = (i + j) % n as u32;
            connect(&mut adjacency, i, b);
        }
    }
    // rewire the clockwise edges in lattice order
    for j in 1..=(k / 2) as u32 {
        for i in 0..n as u32 {
            let old = (i + j) % n as u32;
            if !adjacency[i as usize].contains(&old) {
                continue; // already rewired away by an earlier step
            }
            if !rng.gen_bool(beta) {
                continue;
            }
            // uniform new endpoint avoiding self-loops and duplicates
            let mut tries = 0;
            let new = loop {
                let cand = rng.gen_range(0..n as u32);
                if cand != i && !adjacency[i as usize].contains(&cand) {
                    break Some(cand);
                }
                tries += 1;
                if tries > 4 * n {
                    break None; // node saturated; keep the lattice edge
                }
            };
            if let Some(new) = new {
                adjacency[i as usize].remove(&old);
                adjacency[old as usize].remove(&i);
                connect(&mut adjacency, i, new);
            }
        }
    }
    let mut edges = Vec::new();
    for (a, set) in adjacency.iter().enumerate() {
        for &b in set {
            if (a as u32) < b {
                edges.push((a as u32, b));
            }
        }
    }
    Graph::from_edges(n, &edges).expect("rewiring preserves simplicity")
}

/// Mean shortest-path length over all reachable ordered pairs.
pub fn average_path_length(g: &Graph) -> f64 {
    let n = g.node_count();
    let mut total = 0u64;
    let mut pairs = 0u64;
    for v in 0..n as u32 {
        let dist = crate::graph::bfs_distances(g, v);
        for u in 0..n as u32 {
            if u != v {
                if let Some(d) = dist.distance(u) {
                    total += u64::from(d);
                    pairs += 1;
                }
            }
        }
    }
    total as f64 / pairs as f64
}

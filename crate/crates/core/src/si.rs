//! Discrete-time susceptible-infected spreading with partial observations.
//!
//! Time is slotted. A susceptible node (uninfected, with at least one infected
//! neighbor) becomes infected with probability `p` at the next slot boundary,
//! independently of everything else. At the moment of infection the node is
//! explicit with probability `q_u`, and both the infected and the explicit
//! state are absorbing. The observer sees only the explicit set.

use std::collections::BTreeSet;
use std::ops::RangeFrom;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{
    minimal_spanning_subtree, subtree_heights, Graph, ObservationSet, RootedTree,
};

/// Safety cap on simulated slots when running to an infected-count threshold.
const MAX_SIMULATED_SLOTS: u32 = 1_000_000;

/// Infection probability `p` and per-node explicitness probabilities `q_u`.
///
/// Every `q_u` must lie in the band `[max(0, 2 - 1/p), 1]`.
#[derive(Debug, Clone)]
pub struct SiParams {
    p: f64,
    q: Vec<f64>,
}

/// Lower end of the admissible explicitness band for a given `p`.
pub fn q_lower_bound(p: f64) -> f64 {
    (2.0 - 1.0 / p).max(0.0)
}

impl SiParams {
    pub fn new(p: f64, q: Vec<f64>) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParams(format!(
                "infection probability p = {p} must lie in (0, 1)"
            )));
        }
        let lo = q_lower_bound(p);
        for (u, &qu) in q.iter().enumerate() {
            if !(qu >= lo && qu <= 1.0) {
                return Err(Error::InvalidParams(format!(
                    "q[{u}] = {qu} outside the admissible band [{lo}, 1] for p = {p}"
                )));
            }
        }
        Ok(SiParams { p, q })
    }

    /// Same explicitness probability for every node.
    pub fn uniform(p: f64, q: f64, node_count: usize) -> Result<Self> {
        SiParams::new(p, vec![q; node_count])
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self, u: u32) -> f64 {
        self.q[u as usize]
    }

    pub fn q_slice(&self) -> &[f64] {
        &self.q
    }

    pub fn node_count(&self) -> usize {
        self.q.len()
    }

    /// Consistent-path evaluation needs every observed node to be observable
    /// at all; flags the degenerate `q_u = 0` case.
    pub fn check_observable(&self, ve: &ObservationSet) -> Result<()> {
        for &u in ve.nodes() {
            if self.q(u) == 0.0 {
                return Err(Error::InvalidParams(format!(
                    "explicit node {u} has q = 0 and can never be observed"
                )));
            }
        }
        Ok(())
    }
}

/// Derived per-slot node state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeState {
    /// Uninfected with at least one infected neighbor.
    Susceptible,
    /// Infected, not visible to the observer.
    Infected,
    /// Infected and visible.
    Explicit,
    /// Uninfected with no infected neighbor.
    NonSusceptible,
}

/// A full realization of the spreading process over slots `0..=horizon`.
///
/// Stored compactly as first-infection slots plus explicitness flags; the
/// susceptible / non-susceptible distinction is derived on demand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfectionPath {
    source: u32,
    horizon: u32,
    infected_at: Vec<Option<u32>>,
    explicit: Vec<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PathEvent {
    node: u32,
    slot: u32,
    explicit: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PathJson {
    source: u32,
    t: u32,
    events: Vec<PathEvent>,
}

impl InfectionPath {
    pub fn new(
        source: u32,
        horizon: u32,
        infected_at: Vec<Option<u32>>,
        explicit: Vec<bool>,
    ) -> Self {
        assert_eq!(infected_at.len(), explicit.len());
        InfectionPath {
            source,
            horizon,
            infected_at,
            explicit,
        }
    }

    pub fn source(&self) -> u32 {
        self.source
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn node_count(&self) -> usize {
        self.infected_at.len()
    }

    /// First infection slot of `u`, if ever infected.
    pub fn infected_at(&self, u: u32) -> Option<u32> {
        self.infected_at[u as usize]
    }

    pub fn is_infected(&self, u: u32) -> bool {
        self.infected_at[u as usize].is_some()
    }

    pub fn is_explicit(&self, u: u32) -> bool {
        self.is_infected(u) && self.explicit[u as usize]
    }

    pub fn infected_nodes(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.node_count() as u32).filter(move |&u| self.is_infected(u))
    }

    pub fn explicit_nodes(&self) -> Vec<u32> {
        (0..self.node_count() as u32).filter(|&u| self.is_explicit(u)).collect()
    }

    pub fn infected_count(&self) -> usize {
        self.infected_at.iter().filter(|t| t.is_some()).count()
    }

    /// First slot at which `u` has an infected neighbor.
    fn first_susceptible_slot(&self, g: &Graph, u: u32) -> Option<u32> {
        g.neighbors(u).iter().filter_map(|&w| self.infected_at(w)).min()
    }

    /// Derived state of `u` at `slot`.
    pub fn state(&self, g: &Graph, u: u32, slot: u32) -> NodeState {
        match self.infected_at(u) {
            Some(t) if t <= slot => {
                if self.explicit[u as usize] {
                    NodeState::Explicit
                } else {
                    NodeState::Infected
                }
            }
            _ => match self.first_susceptible_slot(g, u) {
                Some(s) if s <= slot => NodeState::Susceptible,
                _ => NodeState::NonSusceptible,
            },
        }
    }

    /// Checks the structural invariants, reporting the first violation.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        if self.node_count() != g.node_count() {
            return Err(Error::InvalidPath(format!(
                "path covers {} nodes but the graph has {}",
                self.node_count(),
                g.node_count()
            )));
        }
        if self.infected_at(self.source) != Some(0) {
            return Err(Error::InvalidPath(format!(
                "source {} is not infected at slot 0",
                self.source
            )));
        }
        for u in 0..self.node_count() as u32 {
            if let Some(t) = self.infected_at(u) {
                if t == 0 && u != self.source {
                    return Err(Error::InvalidPath(format!(
                        "node {u} is infected at slot 0 but is not the source"
                    )));
                }
                if t > self.horizon {
                    return Err(Error::InvalidPath(format!(
                        "node {u} infected at slot {t} beyond horizon {}",
                        self.horizon
                    )));
                }
                if t > 0 {
                    let s = self.first_susceptible_slot(g, u);
                    if s.map_or(true, |s| s >= t) {
                        return Err(Error::InvalidPath(format!(
                            "node {u} infected at slot {t} without a previously infected neighbor"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Serializes to `{source, t, events: [{node, slot, explicit}]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut events: Vec<PathEvent> = (0..self.node_count() as u32)
            .filter_map(|u| {
                self.infected_at(u).map(|slot| PathEvent {
                    node: u,
                    slot,
                    explicit: self.explicit[u as usize],
                })
            })
            .collect();
        events.sort_by_key(|e| (e.slot, e.node));
        serde_json::to_value(PathJson {
            source: self.source,
            t: self.horizon,
            events,
        })
        .expect("plain data serializes")
    }

    pub fn from_json(value: &serde_json::Value, node_count: usize) -> Result<Self> {
        let parsed: PathJson = serde_json::from_value(value.clone())
            .map_err(|e| Error::InvalidPath(format!("bad path JSON: {e}")))?;
        let mut infected_at = vec![None; node_count];
        let mut explicit = vec![false; node_count];
        for ev in &parsed.events {
            if ev.node as usize >= node_count {
                return Err(Error::InvalidNode(ev.node, node_count));
            }
            infected_at[ev.node as usize] = Some(ev.slot);
            explicit[ev.node as usize] = ev.explicit;
        }
        Ok(InfectionPath::new(
            parsed.source,
            parsed.t,
            infected_at,
            explicit,
        ))
    }
}

/// When a simulation stops.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRule {
    /// Run exactly this many slots.
    Horizon(u32),
    /// Run until the infected count exceeds this threshold.
    InfectedCount(usize),
}

/// A simulation run plus termination bookkeeping.
#[derive(Debug, Clone)]
pub struct SimOutcome {
    pub path: InfectionPath,
    /// True when an infected-count threshold could not be reached because the
    /// component (or the slot cap) was exhausted; the path is then partial.
    pub exhausted: bool,
}

/// Simulates one spreading realization from `source`.
///
/// Susceptible nodes are visited in ascending id order each slot, so a fixed
/// RNG stream reproduces the run bit-exactly.
pub fn simulate<R: Rng>(
    g: &Graph,
    source: u32,
    params: &SiParams,
    stop: StopRule,
    rng: &mut R,
) -> Result<SimOutcome> {
    g.check_node(source)?;
    if params.node_count() != g.node_count() {
        return Err(Error::InvalidParams(format!(
            "params cover {} nodes but the graph has {}",
            params.node_count(),
            g.node_count()
        )));
    }
    let n = g.node_count();
    let mut infected_at: Vec<Option<u32>> = vec![None; n];
    let mut explicit = vec![false; n];
    infected_at[source as usize] = Some(0);
    explicit[source as usize] = rng.gen_bool(params.q(source));
    let mut infected_count = 1usize;

    let mut susceptible: BTreeSet<u32> = g.neighbors(source).iter().copied().collect();

    let mut slot = 0u32;
    let mut exhausted = false;
    loop {
        match stop {
            StopRule::Horizon(t) => {
                if slot >= t {
                    break;
                }
            }
            StopRule::InfectedCount(threshold) => {
                if infected_count > threshold {
                    break;
                }
                if susceptible.is_empty() || slot >= MAX_SIMULATED_SLOTS {
                    exhausted = true;
                    break;
                }
            }
        }
        slot += 1;
        let mut newly: Vec<u32> = Vec::new();
        for &u in susceptible.iter() {
            if rng.gen_bool(params.p()) {
                newly.push(u);
            }
        }
        for &u in &newly {
            susceptible.remove(&u);
            infected_at[u as usize] = Some(slot);
            explicit[u as usize] = rng.gen_bool(params.q(u));
            infected_count += 1;
        }
        for &u in &newly {
            for &w in g.neighbors(u) {
                if infected_at[w as usize].is_none() {
                    susceptible.insert(w);
                }
            }
        }
    }

    Ok(SimOutcome {
        path: InfectionPath::new(source, slot, infected_at, explicit),
        exhausted,
    })
}

/// Log-probability of a full infection path, including the source's own
/// explicitness factor at slot 0. Returns `-inf` for any zero-probability
/// explicitness draw; infection probabilities are interior so only the `q`
/// terms can vanish.
pub fn path_log_probability(g: &Graph, path: &InfectionPath, params: &SiParams) -> Result<f64> {
    path.validate(g)?;
    if params.node_count() != g.node_count() {
        return Err(Error::InvalidParams(format!(
            "params cover {} nodes but the graph has {}",
            params.node_count(),
            g.node_count()
        )));
    }
    let p = params.p();
    let ln_p = p.ln();
    let ln_1p = (1.0 - p).ln();
    let ln_explicitness = |u: u32| -> f64 {
        if path.is_explicit(u) {
            params.q(u).ln()
        } else {
            (1.0 - params.q(u)).ln()
        }
    };

    let mut log_prob = ln_explicitness(path.source());
    for u in 0..path.node_count() as u32 {
        if u == path.source() {
            continue;
        }
        let first_contact = path.first_susceptible_slot(g, u);
        match path.infected_at(u) {
            Some(t) => {
                let s = first_contact.expect("validated: infected node had contact");
                log_prob += f64::from(t - s - 1) * ln_1p + ln_p + ln_explicitness(u);
            }
            None => {
                if let Some(s) = first_contact {
                    log_prob += f64::from(path.horizon().saturating_sub(s)) * ln_1p;
                }
            }
        }
    }
    Ok(log_prob)
}

/// True when the slot-`t` explicit set equals `ve` exactly: every observed
/// node is explicit, and nothing else ever was.
pub fn is_consistent(path: &InfectionPath, ve: &ObservationSet) -> bool {
    for &u in ve.nodes() {
        if !path.is_explicit(u) {
            return false;
        }
    }
    for u in 0..path.node_count() as u32 {
        if path.is_explicit(u) && !ve.contains(u) {
            return false;
        }
    }
    true
}

/// Feasible elapsed times for source `v`: everything from the infection range up.
pub fn feasible_times(g: &Graph, v: u32, ve: &ObservationSet) -> Result<RangeFrom<u32>> {
    let min = crate::graph::infection_range(g, v, ve)?;
    Ok(min..)
}

/// The latest infection path for `(v, t)` on a tree: only the minimal subtree
/// spanning `ve` and `v` is ever infected, and each of its nodes is infected
/// at the latest slot that still lets the infection reach every observed node.
pub fn latest_infection_path(
    g: &Graph,
    v: u32,
    t: u32,
    ve: &ObservationSet,
) -> Result<InfectionPath> {
    if !g.is_tree() {
        return Err(Error::NotATree);
    }
    g.check_node(v)?;
    ve.validate_against(g)?;
    let mut marked: Vec<u32> = ve.nodes().to_vec();
    marked.push(v);
    let h = minimal_spanning_subtree(g, &marked)?;
    let tree = RootedTree::from_subtree(&h, v)?;
    let heights = subtree_heights(&tree);
    let range = heights[v as usize];
    if t < range {
        return Err(Error::InfeasibleTime { t, min: range });
    }
    let mut infected_at = vec![None; g.node_count()];
    let mut explicit = vec![false; g.node_count()];
    for &u in h.nodes() {
        infected_at[u as usize] = Some(if u == v { 0 } else { t - heights[u as usize] });
        explicit[u as usize] = ve.contains(u);
    }
    Ok(InfectionPath::new(v, t, infected_at, explicit))
}

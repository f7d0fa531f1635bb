//! Distance, closeness, and betweenness centrality benchmarks.
//!
//! All three score every node of the component containing the observed set,
//! restricted to the observed nodes as evidence: distance centrality sums
//! hop counts to them, closeness sums reciprocal hop counts, betweenness
//! counts shortest paths between observed pairs passing through the node.

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::estimate::{Method, SourceEstimate};
use crate::graph::{bfs_distances, Graph, ObservationSet};

/// Arithmetic used by the betweenness accumulation; instantiated with `f64`
/// in production and exact rationals in the validation tests.
pub trait Weight: Clone {
    fn zero() -> Self;
    fn from_count(c: u64) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn halve(&self) -> Self;
}

impl Weight for f64 {
    fn zero() -> Self {
        0.0
    }

    fn from_count(c: u64) -> Self {
        c as f64
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn div(&self, other: &Self) -> Self {
        self / other
    }

    fn halve(&self) -> Self {
        self / 2.0
    }
}

impl Weight for BigRational {
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }

    fn from_count(c: u64) -> Self {
        BigRational::from_integer(BigInt::from(c))
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn div(&self, other: &Self) -> Self {
        self / other
    }

    fn halve(&self) -> Self {
        self / BigRational::from_integer(BigInt::from(2))
    }
}

fn component_candidates(g: &Graph, ve: &ObservationSet) -> Result<Vec<u32>> {
    ve.validate_against(g)?;
    let anchor = ve.nodes()[0];
    let component = g.component_of(anchor);
    for &u in ve.nodes() {
        if component.binary_search(&u).is_err() {
            return Err(Error::Unreachable { node: u, from: anchor });
        }
    }
    Ok(component)
}

/// Distance center: argmin of the summed hop count to the observed nodes.
pub fn distance_center(g: &Graph, ve: &ObservationSet) -> Result<SourceEstimate> {
    let candidates = component_candidates(g, ve)?;
    let mut total = vec![0u64; g.node_count()];
    for &u in ve.nodes() {
        let dist = bfs_distances(g, u);
        for &x in &candidates {
            total[x as usize] += u64::from(dist.raw(x));
        }
    }
    let best = candidates.iter().map(|&x| total[x as usize]).min().unwrap();
    let estimators: Vec<u32> = candidates
        .iter()
        .copied()
        .filter(|&x| total[x as usize] == best)
        .collect();
    Ok(SourceEstimate::new(Method::Dc, estimators, best as f64))
}

/// Closeness center: argmax of the summed reciprocal hop count to the
/// observed nodes, skipping the self term.
pub fn closeness_center(g: &Graph, ve: &ObservationSet) -> Result<SourceEstimate> {
    let candidates = component_candidates(g, ve)?;
    let mut total = vec![0f64; g.node_count()];
    for &u in ve.nodes() {
        let dist = bfs_distances(g, u);
        for &x in &candidates {
            let d = dist.raw(x);
            if d > 0 {
                total[x as usize] += 1.0 / f64::from(d);
            }
        }
    }
    let best = candidates
        .iter()
        .map(|&x| total[x as usize])
        .fold(f64::NEG_INFINITY, f64::max);
    let estimators: Vec<u32> = candidates
        .iter()
        .copied()
        .filter(|&x| total[x as usize] == best)
        .collect();
    Ok(SourceEstimate::new(Method::Cc, estimators, best))
}

/// Betweenness restricted to observed endpoint pairs, by two-phase dependency
/// accumulation from each observed source. Each unordered pair is visited
/// from both ends, so the total is halved at the end.
pub fn betweenness_scores<W: Weight>(g: &Graph, ve: &ObservationSet) -> Vec<W> {
    let n = g.node_count();
    let mut scores: Vec<W> = vec![W::zero(); n];
    let mut sigma = vec![0u64; n];
    let mut dist = vec![-1i64; n];
    let mut order: Vec<u32> = Vec::with_capacity(n);
    for &s in ve.nodes() {
        sigma.iter_mut().for_each(|x| *x = 0);
        dist.iter_mut().for_each(|x| *x = -1);
        order.clear();
        sigma[s as usize] = 1;
        dist[s as usize] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in g.neighbors(v) {
                if dist[w as usize] < 0 {
                    dist[w as usize] = dist[v as usize] + 1;
                    queue.push_back(w);
                }
                if dist[w as usize] == dist[v as usize] + 1 {
                    sigma[w as usize] += sigma[v as usize];
                }
            }
        }
        // dependency accumulation, targets restricted to the observed set
        let mut delta: Vec<W> = vec![W::zero(); n];
        for &w in order.iter().rev() {
            let credit = if w != s && ve.contains(w) {
                delta[w as usize].add(&W::from_count(1))
            } else {
                delta[w as usize].clone()
            };
            let share = credit.div(&W::from_count(sigma[w as usize]));
            for &v in g.neighbors(w) {
                if dist[v as usize] + 1 == dist[w as usize] {
                    let inc = W::from_count(sigma[v as usize]).mul(&share);
                    delta[v as usize] = delta[v as usize].add(&inc);
                }
            }
            if w != s {
                scores[w as usize] = scores[w as usize].add(&delta[w as usize]);
            }
        }
    }
    scores.iter().map(Weight::halve).collect()
}

/// Betweenness center: argmax of the restricted betweenness. Needs at least
/// two observed nodes, otherwise no pair exists.
pub fn betweenness_center(g: &Graph, ve: &ObservationSet) -> Result<SourceEstimate> {
    if ve.len() < 2 {
        return Err(Error::InvalidArgument(
            "betweenness needs at least two explicit nodes".into(),
        ));
    }
    let candidates = component_candidates(g, ve)?;
    let scores = betweenness_scores::<f64>(g, ve);
    let best = candidates
        .iter()
        .map(|&x| scores[x as usize])
        .fold(f64::NEG_INFINITY, f64::max);
    let estimators: Vec<u32> = candidates
        .iter()
        .copied()
        .filter(|&x| scores[x as usize] == best)
        .collect();
    Ok(SourceEstimate::new(Method::Bc, estimators, best))
}

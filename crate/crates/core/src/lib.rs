//! Estimation of the source of an infection spreading on a network when only
//! a subset of the infected nodes reveals itself.
//!
//! The crate provides:
//!
//! - a compact undirected graph with the distance/subtree primitives the
//!   estimators need ([`graph`]);
//! - a discrete-time susceptible-infected simulator with per-node
//!   explicitness, exact path likelihoods, and the latest-infection-path
//!   construction on trees ([`si`]);
//! - the Jordan-center estimator for trees with a linear message-passing
//!   search ([`jordan`]);
//! - approximate estimators for general graphs: reverse-greedy infection-tree
//!   search, an exact spanning-tree oracle for small instances, and export of
//!   the equivalent mixed-integer program ([`general`], [`miqcqp`]);
//! - distance / closeness / betweenness centrality baselines ([`baselines`]);
//! - synthetic network generators and the reproducible benchmark harness
//!   ([`generate`], [`experiment`]);
//! - exhaustive enumeration oracles with exact rational arithmetic for
//!   validating all of the above ([`oracle`]).

pub mod baselines;
pub mod error;
pub mod estimate;
pub mod experiment;
pub mod fixtures;
pub mod general;
pub mod generate;
pub mod graph;
pub mod jordan;
pub mod miqcqp;
pub mod oracle;
pub mod si;

pub use error::{Error, Result};
pub use estimate::{Method, SourceEstimate};
pub use graph::{Graph, Labels, ObservationSet};
pub use si::{InfectionPath, SiParams, StopRule};

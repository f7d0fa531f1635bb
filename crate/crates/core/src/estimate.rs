//! Shared source-estimate types returned by every estimator.

use serde::{Deserialize, Serialize};

/// Estimation method tag carried in results and configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Jordan-center message passing on trees.
    Jce,
    /// Reverse-greedy infection-tree search on general graphs.
    Rg,
    /// Exact spanning-tree minimization (small instances only).
    Oracle,
    /// Distance centrality baseline.
    Dc,
    /// Closeness centrality baseline.
    Cc,
    /// Betweenness centrality baseline.
    Bc,
    /// Exhaustive most-likely-path search (oracle scale only).
    MlPath,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Jce => "jce",
            Method::Rg => "rg",
            Method::Oracle => "oracle",
            Method::Dc => "dc",
            Method::Cc => "cc",
            Method::Bc => "bc",
            Method::MlPath => "ml-path",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jce" => Ok(Method::Jce),
            "rg" => Ok(Method::Rg),
            "oracle" => Ok(Method::Oracle),
            "dc" => Ok(Method::Dc),
            "cc" => Ok(Method::Cc),
            "bc" => Ok(Method::Bc),
            "ml-path" => Ok(Method::MlPath),
            other => Err(format!("unknown method {other:?}")),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of a source estimation: every listed node attains the reported
/// optimal score (infection range for JCE, log-likelihood for the
/// likelihood-based methods, centrality value for the baselines).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceEstimate {
    pub method: Method,
    /// Tied optimal nodes, ascending by id.
    pub estimators: Vec<u32>,
    pub score: f64,
}

impl SourceEstimate {
    pub fn new(method: Method, mut estimators: Vec<u32>, score: f64) -> Self {
        estimators.sort_unstable();
        estimators.dedup();
        assert!(!estimators.is_empty(), "estimate must name at least one node");
        SourceEstimate {
            method,
            estimators,
            score,
        }
    }

    /// Deterministic scalar pick: the lowest node id among tied optima.
    pub fn pick(&self) -> u32 {
        self.estimators[0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_round_trips_via_str() {
        for m in [
            Method::Jce,
            Method::Rg,
            Method::Oracle,
            Method::Dc,
            Method::Cc,
            Method::Bc,
            Method::MlPath,
        ] {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
    }

    #[test]
    fn estimators_are_sorted_and_pick_is_lowest() {
        let e = SourceEstimate::new(Method::Jce, vec![5, 2, 9], 1.0);
        assert_eq!(e.estimators, vec![2, 5, 9]);
        assert_eq!(e.pick(), 2);
    }
}

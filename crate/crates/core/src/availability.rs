//! Closed-form availability of a serial chain of k-redundant clusters.
//!
//! A system is down when any cluster has lost more nodes than it tolerates
//! (breakdown) or while a cluster is failing over to a standby node. The two
//! contributions are added; see [`system_availability`].
//!
//! All aggregate computations iterate clusters in name order, so results are
//! bit-identical under any permutation of the declared cluster order.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minutes in a (365-day) year.
pub const MINUTES_PER_YEAR: f64 = 525_600.0;

/// Largest cluster size accepted; binomial coefficients stay exact below it.
pub const MAX_CLUSTER_NODES: u32 = 64;

/// Redundancy shape and failure statistics of one cluster.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterConfig {
    pub name: String,
    /// Nodes in the cluster, active and standby.
    pub total_nodes: u32,
    /// Concurrent node failures the HA layer absorbs.
    pub tolerated_failures: u32,
    /// Probability that a given node is down.
    pub node_down_probability: f64,
    /// Average failures per node per year.
    pub annual_failures_per_node: f64,
    /// Detection + standby start-up + takeover time, in minutes.
    pub failover_minutes: f64,
}

impl ClusterConfig {
    pub fn new(
        name: impl Into<String>,
        total_nodes: u32,
        tolerated_failures: u32,
        node_down_probability: f64,
        annual_failures_per_node: f64,
        failover_minutes: f64,
    ) -> Result<Self> {
        let cluster = ClusterConfig {
            name: name.into(),
            total_nodes,
            tolerated_failures,
            node_down_probability,
            annual_failures_per_node,
            failover_minutes,
        };
        cluster.validate()?;
        Ok(cluster)
    }

    pub fn validate(&self) -> Result<()> {
        let subject = || format!("cluster `{}`", self.name);
        if self.total_nodes < 1 {
            return Err(Error::invalid(subject(), "total_nodes", "must be at least 1"));
        }
        if self.total_nodes > MAX_CLUSTER_NODES {
            return Err(Error::invalid(
                subject(),
                "total_nodes",
                format!(
                    "{} exceeds the supported maximum of {MAX_CLUSTER_NODES}",
                    self.total_nodes
                ),
            ));
        }
        if self.tolerated_failures >= self.total_nodes {
            return Err(Error::invalid(
                subject(),
                "tolerated_failures",
                format!(
                    "{} must be below total_nodes ({}) so at least one node is active",
                    self.tolerated_failures, self.total_nodes
                ),
            ));
        }
        let p = self.node_down_probability;
        if !(p.is_finite() && (0.0..1.0).contains(&p)) {
            return Err(Error::invalid(
                subject(),
                "node_down_probability",
                format!("{p} is outside [0, 1)"),
            ));
        }
        let f = self.annual_failures_per_node;
        if !(f.is_finite() && f >= 0.0) {
            return Err(Error::invalid(
                subject(),
                "annual_failures_per_node",
                format!("{f} must be finite and >= 0"),
            ));
        }
        let t = self.failover_minutes;
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::invalid(
                subject(),
                "failover_minutes",
                format!("{t} must be finite and >= 0"),
            ));
        }
        Ok(())
    }

    /// Nodes that must be up for the cluster to serve: `K - K̂`.
    pub fn active_nodes(&self) -> u32 {
        self.total_nodes - self.tolerated_failures
    }

    /// Probability that every currently active node is up.
    pub fn all_active_up_probability(&self) -> f64 {
        (1.0 - self.node_down_probability).powi(self.active_nodes() as i32)
    }

    /// Per-year failover exposure `f * t * (K - K̂) / δ`, before weighting by
    /// the other clusters' state.
    pub fn failover_exposure(&self) -> f64 {
        self.annual_failures_per_node * self.failover_minutes * f64::from(self.active_nodes()) / MINUTES_PER_YEAR
    }
}

/// Ordered serial composition of clusters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ClusterConfig>", into = "Vec<ClusterConfig>")]
pub struct SystemConfig {
    clusters: Vec<ClusterConfig>,
}

impl SystemConfig {
    pub fn new(clusters: Vec<ClusterConfig>) -> Result<Self> {
        if clusters.is_empty() {
            return Err(Error::invalid("system", "clusters", "at least one cluster is required"));
        }
        let mut seen = HashSet::new();
        for cluster in &clusters {
            cluster.validate()?;
            if !seen.insert(cluster.name.as_str()) {
                return Err(Error::Duplicate {
                    what: "cluster name",
                    key: cluster.name.clone(),
                });
            }
        }
        Ok(SystemConfig { clusters })
    }

    pub fn clusters(&self) -> &[ClusterConfig] {
        &self.clusters
    }

    pub fn total_nodes(&self) -> usize {
        self.clusters.iter().map(|c| c.total_nodes as usize).sum()
    }

    /// Clusters sorted by name, the canonical evaluation order.
    pub(crate) fn canonical(&self) -> Vec<&ClusterConfig> {
        let mut sorted: Vec<&ClusterConfig> = self.clusters.iter().collect();
        sorted.sort_by(|a, b| a.name.cmp(&b.name));
        sorted
    }
}

impl TryFrom<Vec<ClusterConfig>> for SystemConfig {
    type Error = Error;
    fn try_from(clusters: Vec<ClusterConfig>) -> Result<Self> {
        SystemConfig::new(clusters)
    }
}

impl From<SystemConfig> for Vec<ClusterConfig> {
    fn from(system: SystemConfig) -> Self {
        system.clusters
    }
}

/// Decomposition of system downtime.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AvailabilityBreakdown {
    /// Probability that at least one cluster has broken down.
    pub breakdown_prob: f64,
    /// Probability that the system is down for a failover.
    pub failover_prob: f64,
    pub downtime_prob: f64,
    pub uptime_prob: f64,
    /// Failover term of each cluster, keyed by cluster name.
    pub per_cluster_failover: BTreeMap<String, f64>,
    /// Set when breakdown + failover exceeds 1; the value is left unclamped.
    pub saturated: bool,
}

/// Exact `C(n, k)`, valid for `n <= 64`.
pub(crate) fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) is always an integer at each step.
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc
}

/// Probability that at least `K - K̂` of the cluster's `K` independent nodes are up.
pub fn cluster_uptime_probability(cluster: &ClusterConfig) -> Result<f64> {
    cluster.validate()?;
    let k = cluster.total_nodes;
    let up = 1.0 - cluster.node_down_probability;
    let down = cluster.node_down_probability;
    let sum = (cluster.active_nodes()..=k)
        .map(|j| binomial(k, j) as f64 * up.powi(j as i32) * down.powi((k - j) as i32))
        .sum();
    Ok(sum)
}

/// `1 - Π cluster_uptime_probability(C_i)`.
pub fn breakdown_probability(system: &SystemConfig) -> Result<f64> {
    let mut all_up = 1.0;
    for cluster in system.canonical() {
        all_up *= cluster_uptime_probability(cluster)?;
    }
    Ok(1.0 - all_up)
}

/// Downtime probability from failovers.
///
/// Each cluster contributes `f t (K - K̂) / δ` weighted by the probability that
/// every active node of every other cluster is up (empty product is 1).
/// Returns the total and the per-cluster terms.
pub fn failover_downtime(system: &SystemConfig) -> Result<(f64, BTreeMap<String, f64>)> {
    let clusters = system.canonical();
    for cluster in &clusters {
        cluster.validate()?;
    }
    let active_up: Vec<f64> = clusters.iter().map(|c| c.all_active_up_probability()).collect();

    let mut terms = BTreeMap::new();
    for (i, cluster) in clusters.iter().enumerate() {
        let others_quiet: f64 = active_up
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &a)| a)
            .product();
        terms.insert(cluster.name.clone(), cluster.failover_exposure() * others_quiet);
    }
    let total = terms.values().sum();
    Ok((total, terms))
}

/// Full breakdown: `D = B + F`, `U = 1 - D`.
pub fn system_availability(system: &SystemConfig) -> Result<AvailabilityBreakdown> {
    let breakdown_prob = breakdown_probability(system)?;
    let (failover_prob, per_cluster_failover) = failover_downtime(system)?;
    let downtime_prob = breakdown_prob + failover_prob;
    Ok(AvailabilityBreakdown {
        breakdown_prob,
        failover_prob,
        downtime_prob,
        uptime_prob: 1.0 - downtime_prob,
        per_cluster_failover,
        saturated: downtime_prob > 1.0,
    })
}

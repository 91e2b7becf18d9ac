use crate::availability::SystemConfig;
use crate::error::{Error, Result};

/// Largest total node count accepted by [`exact_breakdown_probability`].
pub const MAX_EXACT_NODES: usize = 24;

/// Breakdown probability by explicit enumeration of every node up/down state.
///
/// Each cluster's `2^K` states are enumerated and their Bernoulli joint
/// probabilities multiplied node by node; clusters are combined by
/// independence. No binomial coefficients are involved.
pub fn exact_breakdown_probability(system: &SystemConfig) -> Result<f64> {
    let total_nodes = system.total_nodes();
    if total_nodes > MAX_EXACT_NODES {
        return Err(Error::EnumerationBound {
            total_nodes,
            bound: MAX_EXACT_NODES,
        });
    }
    let mut all_up = 1.0;
    for cluster in system.clusters() {
        cluster.validate()?;
        let k = cluster.total_nodes;
        let p = cluster.node_down_probability;
        let mut cluster_up = 0.0;
        for mask in 0u32..(1u32 << k) {
            let mut up_nodes = 0;
            let mut prob = 1.0;
            for node in 0..k {
                if mask & (1 << node) != 0 {
                    up_nodes += 1;
                    prob *= 1.0 - p;
                } else {
                    prob *= p;
                }
            }
            if up_nodes >= cluster.active_nodes() {
                cluster_up += prob;
            }
        }
        all_up *= cluster_up;
    }
    Ok(1.0 - all_up)
}

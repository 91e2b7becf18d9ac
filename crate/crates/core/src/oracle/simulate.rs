//! Monte-Carlo failure-timeline simulation of a serial clustered system.
//!
//! Every node alternates between up and down. While up it fails as a Poisson
//! process at `f` per year; a failed node stays down for an exponential repair
//! time with mean `P / ((1 - P) f)` years, which makes its long-run down
//! fraction equal to `P`. All nodes start up.
//!
//! Within a cluster, `K - K̂` up nodes are active and the rest are standby.
//! When an active node fails and a standby is up, the standby takes over and
//! the cluster is unavailable for `t` minutes. When no standby is left the
//! cluster breaks down until repairs restore `K - K̂` up nodes (or longer, per
//! [`BreakdownRecovery`]). The system is down whenever any cluster is broken
//! down or failing over; time covered by both is attributed to breakdown.
//!
//! Randomness comes from ChaCha8 with one stream per (trial, cluster, node),
//! so results do not depend on how trials are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::availability::{ClusterConfig, SystemConfig, MINUTES_PER_YEAR};
use crate::error::{Error, Result};

const MAX_TRIALS: u64 = u32::MAX as u64;
const MAX_CLUSTERS: usize = u16::MAX as usize;
const CHUNK: usize = 4096;

/// How long a broken-down cluster stays down.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "policy", content = "minutes")]
pub enum BreakdownRecovery {
    /// Back up as soon as repairs restore enough nodes.
    #[default]
    NodeRepair,
    /// Down for at least this many minutes after the breakdown starts.
    HoldMinutes(f64),
    /// Down for the rest of the horizon.
    EndOfHorizon,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    pub system: SystemConfig,
    pub horizon_years: f64,
    pub trials: u64,
    pub seed: u64,
    #[serde(default)]
    pub recovery: BreakdownRecovery,
}

impl SimulationSpec {
    pub fn new(system: SystemConfig, horizon_years: f64, trials: u64, seed: u64) -> Result<Self> {
        let spec = SimulationSpec {
            system,
            horizon_years,
            trials,
            seed,
            recovery: BreakdownRecovery::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon_years.is_finite() && self.horizon_years > 0.0) {
            return Err(Error::invalid(
                "simulation",
                "horizon_years",
                format!("{} must be > 0", self.horizon_years),
            ));
        }
        if self.trials < 1 || self.trials > MAX_TRIALS {
            return Err(Error::invalid(
                "simulation",
                "trials",
                format!("{} is outside 1..={MAX_TRIALS}", self.trials),
            ));
        }
        if self.system.clusters().len() > MAX_CLUSTERS {
            return Err(Error::invalid(
                "simulation",
                "system",
                format!("more than {MAX_CLUSTERS} clusters"),
            ));
        }
        if let BreakdownRecovery::HoldMinutes(m) = self.recovery {
            if !(m.is_finite() && m >= 0.0) {
                return Err(Error::invalid(
                    "simulation",
                    "recovery",
                    format!("hold of {m} minutes must be >= 0"),
                ));
            }
        }
        for cluster in self.system.clusters() {
            cluster.validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub estimated_uptime: f64,
    pub estimated_breakdown_fraction: f64,
    pub estimated_failover_fraction: f64,
    /// Standard error of `estimated_uptime` across trials (0 for one trial).
    pub standard_error: f64,
    pub trials: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum EventKind {
    Fail,
    Repair,
}

#[derive(Clone, Copy, Debug)]
struct NodeEvent {
    at: f64,
    node: u32,
    seq: u32,
    kind: EventKind,
}

fn stream_rng(seed: u64, trial: u64, cluster: usize, node: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((trial << 32) | ((cluster as u64) << 16) | u64::from(node));
    rng
}

fn node_events(cluster: &ClusterConfig, node: u32, horizon: f64, mut rng: ChaCha8Rng, out: &mut Vec<NodeEvent>) {
    let f = cluster.annual_failures_per_node;
    if f == 0.0 {
        return;
    }
    let p = cluster.node_down_probability;
    let up_time = Exp::new(f / MINUTES_PER_YEAR).expect("positive failure rate");
    let repair_time = (p > 0.0).then(|| {
        let mean_minutes = p / ((1.0 - p) * f) * MINUTES_PER_YEAR;
        Exp::new(1.0 / mean_minutes).expect("positive repair rate")
    });
    let mut now = 0.0;
    let mut seq = 0;
    loop {
        now += up_time.sample(&mut rng);
        if now >= horizon {
            return;
        }
        out.push(NodeEvent {
            at: now,
            node,
            seq,
            kind: EventKind::Fail,
        });
        seq += 1;
        if let Some(repair) = &repair_time {
            now += repair.sample(&mut rng);
        }
        if now >= horizon {
            return;
        }
        out.push(NodeEvent {
            at: now,
            node,
            seq,
            kind: EventKind::Repair,
        });
        seq += 1;
    }
}

type Interval = (f64, f64);

/// Breakdown and failover intervals of one cluster over one trial.
fn cluster_timeline(
    cluster: &ClusterConfig,
    cluster_index: usize,
    spec: &SimulationSpec,
    trial: u64,
    horizon: f64,
) -> (Vec<Interval>, Vec<Interval>) {
    let k = cluster.total_nodes;
    let need = cluster.active_nodes();
    let mut events = Vec::new();
    for node in 0..k {
        node_events(
            cluster,
            node,
            horizon,
            stream_rng(spec.seed, trial, cluster_index, node),
            &mut events,
        );
    }
    events.sort_by(|a, b| a.at.total_cmp(&b.at).then(a.node.cmp(&b.node)).then(a.seq.cmp(&b.seq)));

    let hold = match spec.recovery {
        BreakdownRecovery::NodeRepair => 0.0,
        BreakdownRecovery::HoldMinutes(m) => m,
        BreakdownRecovery::EndOfHorizon => f64::INFINITY,
    };

    let mut up = vec![true; k as usize];
    let mut active: Vec<bool> = (0..k).map(|n| n < need).collect();
    let mut up_count = k;
    let mut broken_since: Option<f64> = None;
    let mut breakdowns = Vec::new();
    let mut failovers = Vec::new();

    for ev in events {
        let n = ev.node as usize;
        match ev.kind {
            EventKind::Fail => {
                up[n] = false;
                up_count -= 1;
                let was_active = std::mem::replace(&mut active[n], false);
                if broken_since.is_some() || !was_active {
                    continue;
                }
                if up_count >= need {
                    let standby = (0..k as usize).find(|&i| up[i] && !active[i]).expect("a standby is up");
                    active[standby] = true;
                    if cluster.failover_minutes > 0.0 {
                        failovers.push((ev.at, ev.at + cluster.failover_minutes));
                    }
                } else {
                    broken_since = Some(ev.at);
                }
            }
            EventKind::Repair => {
                up[n] = true;
                up_count += 1;
                if let Some(start) = broken_since {
                    if up_count >= need {
                        breakdowns.push((start, ev.at.max(start + hold)));
                        broken_since = None;
                        let mut promoted = 0;
                        for i in 0..k as usize {
                            active[i] = up[i] && promoted < need;
                            if active[i] {
                                promoted += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    if let Some(start) = broken_since {
        breakdowns.push((start, horizon));
    }
    (breakdowns, failovers)
}

/// Total length of the union of `intervals` clipped to `[0, horizon]`.
fn union_measure(mut intervals: Vec<Interval>, horizon: f64) -> f64 {
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut current: Option<Interval> = None;
    for (start, end) in intervals {
        let (start, end) = (start.max(0.0), end.min(horizon));
        if end <= start {
            continue;
        }
        match current {
            Some((cs, ce)) if start <= ce => current = Some((cs, ce.max(end))),
            Some((cs, ce)) => {
                total += ce - cs;
                current = Some((start, end));
            }
            None => current = Some((start, end)),
        }
    }
    if let Some((cs, ce)) = current {
        total += ce - cs;
    }
    total
}

/// Breakdown and failover fractions of the horizon for one trial.
fn run_trial(spec: &SimulationSpec, clusters: &[&ClusterConfig], trial: u64) -> (f64, f64) {
    let horizon = spec.horizon_years * MINUTES_PER_YEAR;
    let mut breakdowns = Vec::new();
    let mut failovers = Vec::new();
    for (index, cluster) in clusters.iter().enumerate() {
        let (b, f) = cluster_timeline(cluster, index, spec, trial, horizon);
        breakdowns.extend(b);
        failovers.extend(f);
    }
    let broken = union_measure(breakdowns.clone(), horizon);
    failovers.extend(breakdowns);
    let down = union_measure(failovers, horizon);
    (broken / horizon, (down - broken) / horizon)
}

/// Runs `spec.trials` independent timelines and averages their uptime.
pub fn simulate_timeline(spec: &SimulationSpec) -> Result<SimulationResult> {
    spec.validate()?;
    let clusters = spec.system.canonical();

    // Welford accumulation in trial order keeps the result independent of threading.
    let mut count = 0.0;
    let mut mean_down = 0.0;
    let mut m2 = 0.0;
    let mut sum_breakdown = 0.0;
    let mut sum_failover = 0.0;
    let mut start = 0u64;
    while start < spec.trials {
        let end = (start + CHUNK as u64).min(spec.trials);
        let chunk: Vec<(f64, f64)> = (start..end)
            .into_par_iter()
            .map(|trial| run_trial(spec, &clusters, trial))
            .collect();
        for (b, f) in chunk {
            let down = b + f;
            count += 1.0;
            let delta = down - mean_down;
            mean_down += delta / count;
            m2 += delta * (down - mean_down);
            sum_breakdown += b;
            sum_failover += f;
        }
        start = end;
    }
    let n = spec.trials as f64;
    let standard_error = if spec.trials > 1 {
        (m2 / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    let estimated_breakdown_fraction = sum_breakdown / n;
    let estimated_failover_fraction = sum_failover / n;
    Ok(SimulationResult {
        estimated_uptime: 1.0 - estimated_breakdown_fraction - estimated_failover_fraction,
        estimated_breakdown_fraction,
        estimated_failover_fraction,
        standard_error,
        trials: spec.trials,
    })
}

//! Uptime-aware HA recommendation for cloud systems built from serial clusters.
//!
//! - [`availability`]: closed-form breakdown/failover downtime of the system.
//! - [`optimizer`]: enumerates HA variants and picks the minimum monthly TCO
//!   under an uptime SLA with a slippage penalty.
//! - [`broker`]: reliability statistics and rate cards kept by the broker.
//! - [`oracle`]: exact enumeration and Monte-Carlo checks of the model.
//! - [`topology`] and [`report`]: file formats used by the CLI.

pub mod availability;
pub mod broker;
mod error;
mod money;
pub mod optimizer;
pub mod oracle;
pub mod report;
pub mod topology;

pub use availability::{
    breakdown_probability, cluster_uptime_probability, failover_downtime, system_availability, AvailabilityBreakdown,
    ClusterConfig, SystemConfig, MINUTES_PER_YEAR,
};
pub use error::{Error, Result};
pub use money::Money;

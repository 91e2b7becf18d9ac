//! Topology files: the base architecture, its per-slot HA options, and
//! optionally the SLA terms and the as-is deployment.
//!
//! Each option either inlines its failure statistics or names a broker
//! `reliability` record, and either inlines its costs or names a `rate_card`.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "sla": { "uptime_percent": 98.0, "penalty_per_hour": 100.0 },
//!   "slots": [
//!     { "name": "storage", "role": "storage", "baseline": "single",
//!       "options": [
//!         { "id": "single", "total_nodes": 1, "tolerated_failures": 0,
//!           "node_down_probability": 0.03, "annual_failures_per_node": 1.0,
//!           "failover_minutes": 1.0 },
//!         { "id": "raid1", "label": "RAID-1", "total_nodes": 2, "tolerated_failures": 1,
//!           "reliability": { "kind": "storage", "provider": "softlayer" },
//!           "rate_card": { "provider": "softlayer", "option_label": "raid1" } }
//!       ] }
//!   ],
//!   "as_is": { "storage": "raid1" }
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::availability::ClusterConfig;
use crate::broker::{BrokerCatalog, ComponentKind};
use crate::error::{Error, Result};
use crate::money::Money;
use crate::optimizer::{ChoiceMap, HaOption, OptionCatalog, Slot};

pub const TOPOLOGY_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlaTerms {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uptime_percent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty_per_hour: Option<Money>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReliabilityRef {
    pub kind: ComponentKind,
    pub provider: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateCardRef {
    pub provider: String,
    pub option_label: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub total_nodes: u32,
    pub tolerated_failures: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_down_probability: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annual_failures_per_node: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failover_minutes: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reliability: Option<ReliabilityRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monthly_infra_cost: Option<Money>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monthly_labor_cost: Option<Money>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_card: Option<RateCardRef>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlotSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role: Option<ComponentKind>,
    /// Baseline option id; the first option when omitted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<String>,
    pub options: Vec<OptionSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sla: Option<SlaTerms>,
    pub slots: Vec<SlotSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub as_is: Option<ChoiceMap>,
}

/// A topology resolved into an option catalog.
#[derive(Clone, Debug, PartialEq)]
pub struct Topology {
    pub name: Option<String>,
    pub catalog: OptionCatalog,
    pub sla: SlaTerms,
    pub as_is: Option<ChoiceMap>,
}

impl TopologyFile {
    pub fn from_slice(bytes: &[u8], source_name: &str) -> Result<Self> {
        let file: TopologyFile = serde_json::from_slice(bytes).map_err(|e| Error::from_json(source_name, e))?;
        if file.schema_version != TOPOLOGY_SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                source_name: source_name.to_string(),
                found: file.schema_version,
                expected: TOPOLOGY_SCHEMA_VERSION,
            });
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        TopologyFile::from_slice(&bytes, &path.display().to_string())
    }

    /// Builds the option catalog, looking up referenced records in `broker`.
    pub fn resolve(&self, broker: Option<&BrokerCatalog>) -> Result<Topology> {
        let slots = self
            .slots
            .iter()
            .map(|slot| {
                let options = slot
                    .options
                    .iter()
                    .map(|o| resolve_option(&slot.name, o, broker))
                    .collect::<Result<Vec<_>>>()?;
                Slot::new(slot.name.clone(), options, slot.baseline.as_deref())
            })
            .collect::<Result<Vec<_>>>()?;
        let catalog = OptionCatalog::new(slots)?;
        if let Some(as_is) = &self.as_is {
            catalog.resolve(as_is)?;
        }
        Ok(Topology {
            name: self.name.clone(),
            catalog,
            sla: self.sla.clone().unwrap_or_default(),
            as_is: self.as_is.clone(),
        })
    }
}

fn resolve_option(slot: &str, spec: &OptionSpec, broker: Option<&BrokerCatalog>) -> Result<HaOption> {
    let subject = || format!("slot `{slot}` option `{}`", spec.id);
    let inline_stats = [
        spec.node_down_probability,
        spec.annual_failures_per_node,
        spec.failover_minutes,
    ];
    let cluster = match &spec.reliability {
        Some(reference) => {
            if inline_stats.iter().any(Option::is_some) {
                return Err(Error::invalid(
                    subject(),
                    "reliability",
                    "cannot be combined with inline failure statistics",
                ));
            }
            let broker = broker.ok_or_else(|| {
                Error::invalid(
                    subject(),
                    "reliability",
                    "references a broker record but no catalog was supplied",
                )
            })?;
            broker
                .reliability_for(&reference.kind, &reference.provider)
                .ok_or_else(|| Error::Unknown {
                    what: "reliability record",
                    name: format!("{}/{}", reference.kind, reference.provider),
                    context: format!(" referenced by {}", subject()),
                })?
                .cluster(slot, spec.total_nodes, spec.tolerated_failures)?
        }
        None => {
            let field = |value: Option<f64>, name: &'static str| {
                value.ok_or_else(|| {
                    Error::invalid(
                        subject(),
                        name,
                        "missing (give it inline or reference a reliability record)",
                    )
                })
            };
            ClusterConfig {
                name: slot.to_string(),
                total_nodes: spec.total_nodes,
                tolerated_failures: spec.tolerated_failures,
                node_down_probability: field(spec.node_down_probability, "node_down_probability")?,
                annual_failures_per_node: field(spec.annual_failures_per_node, "annual_failures_per_node")?,
                failover_minutes: field(spec.failover_minutes, "failover_minutes")?,
            }
        }
    };
    cluster.validate().map_err(|e| match e {
        Error::Invalid { field, reason, .. } => Error::invalid(subject(), field, reason),
        other => other,
    })?;

    let (monthly_infra_cost, monthly_labor_cost) = match &spec.rate_card {
        Some(reference) => {
            if spec.monthly_infra_cost.is_some() || spec.monthly_labor_cost.is_some() {
                return Err(Error::invalid(
                    subject(),
                    "rate_card",
                    "cannot be combined with inline costs",
                ));
            }
            let broker = broker.ok_or_else(|| {
                Error::invalid(
                    subject(),
                    "rate_card",
                    "references a rate card but no catalog was supplied",
                )
            })?;
            let entry = broker
                .rate_card(&reference.provider, &reference.option_label)
                .ok_or_else(|| Error::Unknown {
                    what: "rate card",
                    name: format!("{}/{}", reference.provider, reference.option_label),
                    context: format!(" referenced by {}", subject()),
                })?;
            (entry.monthly_infra_cost, entry.labor_cost())
        }
        None => (
            spec.monthly_infra_cost.unwrap_or(Money::ZERO),
            spec.monthly_labor_cost.unwrap_or(Money::ZERO),
        ),
    };

    Ok(HaOption {
        option_id: spec.id.clone(),
        label: spec.label.clone().unwrap_or_else(|| spec.id.clone()),
        cluster,
        monthly_infra_cost,
        monthly_labor_cost,
    })
}

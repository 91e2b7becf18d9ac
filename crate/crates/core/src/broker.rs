//! The broker's knowledge base: observed component reliability and rate cards.
//!
//! Persisted as a single JSON document:
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "reliability": [
//!     { "component_kind": "storage", "provider": "softlayer",
//!       "node_down_probability": 0.01, "annual_failures_per_node": 2.0,
//!       "failover_minutes": 10.0, "observed_samples": 40 }
//!   ],
//!   "rate_cards": [
//!     { "option_label": "raid1", "provider": "softlayer",
//!       "monthly_infra_cost": 120.0, "labor_hours_monthly": 4.0, "labor_rate": 30.0 }
//!   ]
//! }
//! ```
//!
//! `component_kind` is `compute`, `storage`, `network`, or any other label.
//! Unknown fields are rejected.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::availability::ClusterConfig;
use crate::error::{Error, Result};
use crate::money::Money;

pub const CATALOG_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum ComponentKind {
    Compute,
    Storage,
    Network,
    Other(String),
}

impl From<String> for ComponentKind {
    fn from(s: String) -> Self {
        match s.as_str() {
            "compute" => ComponentKind::Compute,
            "storage" => ComponentKind::Storage,
            "network" => ComponentKind::Network,
            _ => ComponentKind::Other(s),
        }
    }
}

impl From<&str> for ComponentKind {
    fn from(s: &str) -> Self {
        ComponentKind::from(s.to_string())
    }
}

impl From<ComponentKind> for String {
    fn from(kind: ComponentKind) -> String {
        kind.to_string()
    }
}

impl fmt::Display for ComponentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ComponentKind::Compute => "compute",
            ComponentKind::Storage => "storage",
            ComponentKind::Network => "network",
            ComponentKind::Other(label) => label,
        })
    }
}

/// Per-node failure statistics for one kind of component on one provider.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReliabilityRecord {
    pub component_kind: ComponentKind,
    pub provider: String,
    pub node_down_probability: f64,
    pub annual_failures_per_node: f64,
    pub failover_minutes: f64,
    /// Number of observations folded into this record.
    pub observed_samples: u64,
}

impl ReliabilityRecord {
    pub fn key(&self) -> String {
        format!("{}/{}", self.component_kind, self.provider)
    }

    pub fn validate(&self) -> Result<()> {
        let subject = || format!("reliability record `{}`", self.key());
        if self.provider.is_empty() {
            return Err(Error::invalid(subject(), "provider", "must not be empty"));
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
        if self.observed_samples < 1 {
            return Err(Error::invalid(subject(), "observed_samples", "must be at least 1"));
        }
        Ok(())
    }

    /// Cluster of `total_nodes` with `tolerated_failures` spares using these statistics.
    pub fn cluster(&self, name: impl Into<String>, total_nodes: u32, tolerated_failures: u32) -> Result<ClusterConfig> {
        ClusterConfig::new(
            name,
            total_nodes,
            tolerated_failures,
            self.node_down_probability,
            self.annual_failures_per_node,
            self.failover_minutes,
        )
    }
}

/// Rate-carded price of deploying and running one HA option for a month.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateCardEntry {
    pub option_label: String,
    pub provider: String,
    pub monthly_infra_cost: Money,
    pub labor_hours_monthly: f64,
    /// Currency per labor hour.
    pub labor_rate: Money,
}

impl RateCardEntry {
    pub fn key(&self) -> String {
        format!("{}/{}", self.provider, self.option_label)
    }

    pub fn validate(&self) -> Result<()> {
        let subject = || format!("rate card `{}`", self.key());
        if self.option_label.is_empty() {
            return Err(Error::invalid(subject(), "option_label", "must not be empty"));
        }
        if self.monthly_infra_cost.is_negative() {
            return Err(Error::invalid(subject(), "monthly_infra_cost", "must be >= 0"));
        }
        let h = self.labor_hours_monthly;
        if !(h.is_finite() && h >= 0.0) {
            return Err(Error::invalid(
                subject(),
                "labor_hours_monthly",
                format!("{h} must be finite and >= 0"),
            ));
        }
        if self.labor_rate.is_negative() {
            return Err(Error::invalid(subject(), "labor_rate", "must be >= 0"));
        }
        Ok(())
    }

    pub fn labor_cost(&self) -> Money {
        Money::from_cents((self.labor_hours_monthly * self.labor_rate.cents() as f64).round() as i64)
    }
}

/// Infrastructure plus labor, per month.
pub fn rate_card_monthly_cost(entry: &RateCardEntry) -> Result<Money> {
    entry.validate()?;
    Ok(entry.monthly_infra_cost + entry.labor_cost())
}

/// Folds a new observation into an existing record: sample-weighted means,
/// summed sample counts. Neither input is modified.
pub fn merge_observation(existing: &ReliabilityRecord, incoming: &ReliabilityRecord) -> Result<ReliabilityRecord> {
    existing.validate()?;
    incoming.validate()?;
    if existing.component_kind != incoming.component_kind || existing.provider != incoming.provider {
        return Err(Error::KeyMismatch {
            left: existing.key(),
            right: incoming.key(),
        });
    }
    let (wa, wb) = (existing.observed_samples as f64, incoming.observed_samples as f64);
    let total = wa + wb;
    let mean = |a: f64, b: f64| (wa * a + wb * b) / total;
    Ok(ReliabilityRecord {
        component_kind: existing.component_kind.clone(),
        provider: existing.provider.clone(),
        node_down_probability: mean(existing.node_down_probability, incoming.node_down_probability),
        annual_failures_per_node: mean(existing.annual_failures_per_node, incoming.annual_failures_per_node),
        failover_minutes: mean(existing.failover_minutes, incoming.failover_minutes),
        observed_samples: existing.observed_samples + incoming.observed_samples,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogFile {
    schema_version: u32,
    reliability: Vec<ReliabilityRecord>,
    rate_cards: Vec<RateCardEntry>,
}

/// Validated contents of a catalog file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BrokerCatalog {
    pub reliability: Vec<ReliabilityRecord>,
    pub rate_cards: Vec<RateCardEntry>,
}

impl BrokerCatalog {
    pub fn new(reliability: Vec<ReliabilityRecord>, rate_cards: Vec<RateCardEntry>) -> Result<Self> {
        let catalog = BrokerCatalog {
            reliability,
            rate_cards,
        };
        catalog.validate()?;
        Ok(catalog)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for record in &self.reliability {
            record.validate()?;
            if !seen.insert((record.component_kind.clone(), record.provider.clone())) {
                return Err(Error::Duplicate {
                    what: "reliability record",
                    key: record.key(),
                });
            }
        }
        let mut seen = HashSet::new();
        for entry in &self.rate_cards {
            entry.validate()?;
            if !seen.insert((entry.provider.clone(), entry.option_label.clone())) {
                return Err(Error::Duplicate {
                    what: "rate card",
                    key: entry.key(),
                });
            }
        }
        Ok(())
    }

    pub fn from_slice(bytes: &[u8], source_name: &str) -> Result<Self> {
        let file: CatalogFile = serde_json::from_slice(bytes).map_err(|e| Error::from_json(source_name, e))?;
        if file.schema_version != CATALOG_SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                source_name: source_name.to_string(),
                found: file.schema_version,
                expected: CATALOG_SCHEMA_VERSION,
            });
        }
        BrokerCatalog::new(file.reliability, file.rate_cards)
    }

    pub fn to_json(&self) -> String {
        let file = CatalogFile {
            schema_version: CATALOG_SCHEMA_VERSION,
            reliability: self.reliability.clone(),
            rate_cards: self.rate_cards.clone(),
        };
        serde_json::to_string_pretty(&file).expect("catalog serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn reliability_for(&self, kind: &ComponentKind, provider: &str) -> Option<&ReliabilityRecord> {
        self.reliability
            .iter()
            .find(|r| &r.component_kind == kind && r.provider == provider)
    }

    pub fn rate_card(&self, provider: &str, option_label: &str) -> Option<&RateCardEntry> {
        self.rate_cards
            .iter()
            .find(|r| r.provider == provider && r.option_label == option_label)
    }

    /// Inserts `record`, merging it into an existing record with the same key.
    pub fn observe(&mut self, record: ReliabilityRecord) -> Result<()> {
        match self
            .reliability
            .iter()
            .position(|r| r.component_kind == record.component_kind && r.provider == record.provider)
        {
            Some(i) => self.reliability[i] = merge_observation(&self.reliability[i], &record)?,
            None => {
                record.validate()?;
                self.reliability.push(record);
            }
        }
        Ok(())
    }
}

/// Reads and validates a catalog file.
pub fn load_catalog(path: &Path) -> Result<BrokerCatalog> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    BrokerCatalog::from_slice(&bytes, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(kind: &str, provider: &str, p: f64, f: f64, t: f64, n: u64) -> ReliabilityRecord {
        ReliabilityRecord {
            component_kind: kind.into(),
            provider: provider.into(),
            node_down_probability: p,
            annual_failures_per_node: f,
            failover_minutes: t,
            observed_samples: n,
        }
    }

    const THREE: &str = r#"{
      "schema_version": 1,
      "reliability": [
        {"component_kind": "compute", "provider": "sl", "node_down_probability": 0.02,
         "annual_failures_per_node": 3, "failover_minutes": 5, "observed_samples": 10},
        {"component_kind": "storage", "provider": "sl", "node_down_probability": 0.01,
         "annual_failures_per_node": 1, "failover_minutes": 2, "observed_samples": 4},
        {"component_kind": "load-balancer", "provider": "sl", "node_down_probability": 0.005,
         "annual_failures_per_node": 0.5, "failover_minutes": 1, "observed_samples": 1}
      ],
      "rate_cards": []
    }"#;

    #[test]
    fn loads_well_formed_file() {
        let catalog = BrokerCatalog::from_slice(THREE.as_bytes(), "test").unwrap();
        assert_eq!(catalog.reliability.len(), 3);
        assert_eq!(
            catalog.reliability[2].component_kind,
            ComponentKind::Other("load-balancer".into())
        );
        assert!(catalog.reliability_for(&ComponentKind::Storage, "sl").is_some());
    }

    #[test]
    fn bound_violation_names_field() {
        let bad = THREE.replace("0.02", "1.2");
        let err = BrokerCatalog::from_slice(bad.as_bytes(), "test").unwrap_err();
        assert!(
            matches!(err, Error::Invalid { field: "node_down_probability", ref subject, .. } if subject.contains("compute/sl")),
            "{err}"
        );
    }

    #[test]
    fn duplicate_key_rejected() {
        let dup = THREE.replace("\"storage\"", "\"compute\"");
        let err = BrokerCatalog::from_slice(dup.as_bytes(), "test").unwrap_err();
        assert!(matches!(err, Error::Duplicate { .. }), "{err}");
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = BrokerCatalog::from_slice(b"{\n  \"schema_version\": 1,\n  oops", "cat.json").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let unknown = THREE.replace("\"rate_cards\"", "\"extra\": 1, \"rate_cards\"");
        assert!(matches!(
            BrokerCatalog::from_slice(unknown.as_bytes(), "t").unwrap_err(),
            Error::Parse { .. }
        ));
        let v2 = THREE.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert!(matches!(
            BrokerCatalog::from_slice(v2.as_bytes(), "t").unwrap_err(),
            Error::SchemaVersion { found: 2, .. }
        ));
    }

    #[test]
    fn merge_examples() {
        let a = record("compute", "sl", 0.1, 2.0, 5.0, 1);
        let m = merge_observation(&a, &a).unwrap();
        assert!((m.node_down_probability - 0.1).abs() < 1e-12);
        assert_eq!(m.observed_samples, 2);

        let m = merge_observation(
            &record("compute", "sl", 0.1, 1.0, 1.0, 3),
            &record("compute", "sl", 0.2, 1.0, 1.0, 1),
        )
        .unwrap();
        assert!((m.node_down_probability - 0.125).abs() < 1e-12);
        assert_eq!(m.observed_samples, 4);

        let m = merge_observation(
            &record("compute", "sl", 0.1, 2.0, 1.0, 2),
            &record("compute", "sl", 0.1, 4.0, 1.0, 2),
        )
        .unwrap();
        assert!((m.annual_failures_per_node - 3.0).abs() < 1e-12);
        assert_eq!(m.observed_samples, 4);

        let err = merge_observation(&a, &record("storage", "sl", 0.1, 2.0, 5.0, 1)).unwrap_err();
        assert!(matches!(err, Error::KeyMismatch { .. }));
    }

    #[test]
    fn observe_merges_or_inserts() {
        let mut catalog = BrokerCatalog::default();
        catalog.observe(record("compute", "sl", 0.1, 1.0, 1.0, 1)).unwrap();
        catalog.observe(record("compute", "sl", 0.3, 1.0, 1.0, 1)).unwrap();
        catalog.observe(record("network", "sl", 0.3, 1.0, 1.0, 1)).unwrap();
        assert_eq!(catalog.reliability.len(), 2);
        assert!((catalog.reliability[0].node_down_probability - 0.2).abs() < 1e-12);
    }

    #[test]
    fn rate_card_examples() {
        let entry = |infra: i64, hours: f64, rate: i64| RateCardEntry {
            option_label: "x".into(),
            provider: "p".into(),
            monthly_infra_cost: Money::from_cents(infra),
            labor_hours_monthly: hours,
            labor_rate: Money::from_cents(rate),
        };
        assert_eq!(
            rate_card_monthly_cost(&entry(50_000, 10.0, 3_000)).unwrap(),
            Money::from_cents(80_000)
        );
        assert_eq!(rate_card_monthly_cost(&entry(0, 0.0, 3_000)).unwrap(), Money::ZERO);
        assert_eq!(
            rate_card_monthly_cost(&entry(25_000, 0.0, 9_999)).unwrap(),
            Money::from_cents(25_000)
        );
        assert!(rate_card_monthly_cost(&entry(-1, 0.0, 0)).is_err());
        assert!(rate_card_monthly_cost(&entry(0, -1.0, 0)).is_err());
    }

    #[test]
    fn records_yield_valid_clusters() {
        let catalog = BrokerCatalog::from_slice(THREE.as_bytes(), "test").unwrap();
        for r in &catalog.reliability {
            for k in 1..6 {
                for kh in 0..k {
                    r.cluster("c", k, kh).unwrap().validate().unwrap();
                }
            }
        }
    }
}

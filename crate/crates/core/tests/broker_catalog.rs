use proptest::prelude::*;
use uptime_core::broker::{
    load_catalog, merge_observation, BrokerCatalog, ComponentKind, RateCardEntry, ReliabilityRecord,
};
use uptime_core::Money;

fn record(p: f64, f: f64, t: f64, n: u64) -> ReliabilityRecord {
    ReliabilityRecord {
        component_kind: ComponentKind::Storage,
        provider: "sl".into(),
        node_down_probability: p,
        annual_failures_per_node: f,
        failover_minutes: t,
        observed_samples: n,
    }
}

fn observation() -> impl Strategy<Value = ReliabilityRecord> {
    (0.0f64..0.9, 0.0f64..20.0, 0.0f64..120.0, 1u64..1000).prop_map(|(p, f, t, n)| record(p, f, t, n))
}

fn kind() -> impl Strategy<Value = ComponentKind> {
    prop_oneof![
        Just(ComponentKind::Compute),
        Just(ComponentKind::Storage),
        Just(ComponentKind::Network),
        "[a-z]{1,8}-x".prop_map(ComponentKind::Other),
    ]
}

fn catalog() -> impl Strategy<Value = BrokerCatalog> {
    let records = prop::collection::vec((kind(), "[a-z]{1,6}", observation()), 0..6).prop_map(|rs| {
        let mut out: Vec<ReliabilityRecord> = Vec::new();
        for (kind, provider, mut r) in rs {
            r.component_kind = kind;
            r.provider = provider;
            if !out
                .iter()
                .any(|o| o.component_kind == r.component_kind && o.provider == r.provider)
            {
                out.push(r);
            }
        }
        out
    });
    let cards = prop::collection::vec(
        (
            "[a-z]{1,6}",
            "[a-z]{1,6}",
            0i64..10_000_000,
            0.0f64..200.0,
            0i64..20_000,
        ),
        0..6,
    )
    .prop_map(|cs| {
        let mut out: Vec<RateCardEntry> = Vec::new();
        for (label, provider, infra, hours, rate) in cs {
            if !out.iter().any(|o| o.option_label == label && o.provider == provider) {
                out.push(RateCardEntry {
                    option_label: label,
                    provider,
                    monthly_infra_cost: Money::from_cents(infra),
                    labor_hours_monthly: hours,
                    labor_rate: Money::from_cents(rate),
                });
            }
        }
        out
    });
    (records, cards).prop_map(|(r, c)| BrokerCatalog::new(r, c).unwrap())
}

proptest! {
    #[test]
    fn merge_is_order_free(a in observation(), b in observation(), c in observation()) {
        let ab = merge_observation(&a, &b).unwrap();
        let ba = merge_observation(&b, &a).unwrap();
        prop_assert!((ab.node_down_probability - ba.node_down_probability).abs() < 1e-12);
        prop_assert!((ab.annual_failures_per_node - ba.annual_failures_per_node).abs() < 1e-12);
        prop_assert!((ab.failover_minutes - ba.failover_minutes).abs() < 1e-12);
        prop_assert_eq!(ab.observed_samples, ba.observed_samples);

        let abc = merge_observation(&ab, &c).unwrap();
        let n = (a.observed_samples + b.observed_samples + c.observed_samples) as f64;
        let mean = |x: fn(&ReliabilityRecord) -> f64| {
            (x(&a) * a.observed_samples as f64 + x(&b) * b.observed_samples as f64 + x(&c) * c.observed_samples as f64) / n
        };
        prop_assert!((abc.node_down_probability - mean(|r| r.node_down_probability)).abs() < 1e-12);
        prop_assert!((abc.annual_failures_per_node - mean(|r| r.annual_failures_per_node)).abs() < 1e-12);
        prop_assert!((abc.failover_minutes - mean(|r| r.failover_minutes)).abs() < 1e-12);
        prop_assert_eq!(abc.observed_samples, n as u64);
        prop_assert!(abc.validate().is_ok());
    }

    #[test]
    fn save_and_reload_is_identity(catalog in catalog()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("catalog.json");
        catalog.save(&path).unwrap();
        prop_assert_eq!(load_catalog(&path).unwrap(), catalog);
    }
}

#[test]
fn missing_file_is_an_input_error() {
    let err = load_catalog(std::path::Path::new("/nonexistent/catalog.json")).unwrap_err();
    assert!(err.is_input_error());
}

#[test]
fn every_record_builds_valid_clusters() {
    let text = std::fs::read(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../fixtures/broker_catalog.json"
    ))
    .unwrap();
    let catalog = BrokerCatalog::from_slice(&text, "fixture").unwrap();
    assert!(!catalog.reliability.is_empty());
    for r in &catalog.reliability {
        for k in 1..=8 {
            for spares in 0..k {
                r.cluster("c", k, spares).unwrap().validate().unwrap();
            }
        }
    }
}

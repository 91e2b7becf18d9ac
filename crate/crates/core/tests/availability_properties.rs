use proptest::prelude::*;
use uptime_core::{
    breakdown_probability, cluster_uptime_probability, failover_downtime, system_availability, ClusterConfig,
    SystemConfig,
};

fn cluster_strategy(name: String) -> impl Strategy<Value = ClusterConfig> {
    (1u32..=8, any::<u32>(), 0.0f64..0.6, 0.0f64..12.0, 0.0f64..120.0)
        .prop_map(move |(k, s, p, f, t)| ClusterConfig::new(name.clone(), k, s % k, p, f, t).unwrap())
}

fn system_strategy() -> impl Strategy<Value = SystemConfig> {
    (1usize..=6)
        .prop_flat_map(|n| (0..n).map(|i| cluster_strategy(format!("c{i}"))).collect::<Vec<_>>())
        .prop_map(|clusters| SystemConfig::new(clusters).unwrap())
}

proptest! {
    #[test]
    fn breakdown_identities_hold_exactly(system in system_strategy()) {
        let av = system_availability(&system).unwrap();
        prop_assert_eq!(av.downtime_prob, av.breakdown_prob + av.failover_prob);
        prop_assert_eq!(av.uptime_prob, 1.0 - av.downtime_prob);
        prop_assert_eq!(av.failover_prob, av.per_cluster_failover.values().sum::<f64>());
        prop_assert!((0.0..=1.0).contains(&av.breakdown_prob));
        prop_assert!(av.failover_prob >= 0.0);
    }

    #[test]
    fn permuting_clusters_changes_nothing(system in system_strategy(), rotate in 0usize..6, reverse in any::<bool>()) {
        let mut clusters = system.clusters().to_vec();
        let n = clusters.len();
        clusters.rotate_left(rotate % n);
        if reverse {
            clusters.reverse();
        }
        let permuted = SystemConfig::new(clusters).unwrap();
        prop_assert_eq!(system_availability(&system).unwrap(), system_availability(&permuted).unwrap());
    }

    #[test]
    fn single_cluster_failover_uses_empty_product(c in cluster_strategy("solo".into())) {
        let system = SystemConfig::new(vec![c.clone()]).unwrap();
        let (total, _) = failover_downtime(&system).unwrap();
        prop_assert_eq!(total, c.failover_exposure());
    }

    #[test]
    fn breakdown_is_one_minus_product(system in system_strategy()) {
        let mut product = 1.0;
        let mut sorted = system.clusters().to_vec();
        sorted.sort_by(|a, b| a.name.cmp(&b.name));
        for c in &sorted {
            product *= cluster_uptime_probability(c).unwrap();
        }
        prop_assert_eq!(breakdown_probability(&system).unwrap(), 1.0 - product);
    }
}

#[test]
fn uptime_is_non_increasing_in_p() {
    for k in 1..=8u32 {
        for kh in 0..k {
            let mut last = f64::INFINITY;
            for step in 0..20 {
                let p = step as f64 * 0.05;
                let u = cluster_uptime_probability(&ClusterConfig::new("c", k, kh, p, 0.0, 0.0).unwrap()).unwrap();
                assert!(u <= last + 1e-15, "K={k} K^={kh} P={p}: {u} > {last}");
                last = u;
            }
        }
    }
}

#[test]
fn uptime_is_non_decreasing_in_tolerance() {
    for step in 0..20 {
        let p = step as f64 * 0.05;
        for k in 1..=10u32 {
            let mut last = f64::NEG_INFINITY;
            for kh in 0..k {
                let u = cluster_uptime_probability(&ClusterConfig::new("c", k, kh, p, 0.0, 0.0).unwrap()).unwrap();
                assert!(u >= last - 1e-15, "K={k} K^={kh} P={p}: {u} < {last}");
                last = u;
            }
        }
    }
}

#[test]
fn large_clusters_stay_in_range() {
    for k in [20u32, 40, 64] {
        for p in [1e-6, 0.01, 0.3, 0.9] {
            let u = cluster_uptime_probability(&ClusterConfig::new("big", k, k / 2, p, 0.0, 0.0).unwrap()).unwrap();
            assert!((-1e-12..=1.0 + 1e-12).contains(&u), "K={k} P={p}: {u}");
        }
    }
}

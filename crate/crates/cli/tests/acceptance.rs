//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.
//!
//! Run with `cargo test -p uptime-cli --test acceptance`.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use uptime_core::optimizer::{
    check_monotone, optimize, tco, HaOption, OptimizeOptions, OptionCatalog, SearchMode, SlaContract, Slot,
};
use uptime_core::oracle::{exact_breakdown_probability, simulate_timeline, SimulationSpec};
use uptime_core::report::Report;
use uptime_core::{
    breakdown_probability, cluster_uptime_probability, failover_downtime, system_availability, ClusterConfig, Money,
    SystemConfig, MINUTES_PER_YEAR,
};

const EQUIVALENCE_SYSTEMS: usize = 150;
const EQUIVALENCE_TOLERANCE: f64 = 1e-12;
const EQUIVALENCE_BUDGET: Duration = Duration::from_secs(10);

const CLUSTER_UPTIME_TOLERANCE: f64 = 1e-12;
const FAILOVER_TOLERANCE: f64 = 1e-15;

const SAVINGS_TOLERANCE_PERCENT: f64 = 0.01;

const PRUNING_CATALOGS: usize = 250;
const PRUNING_BUDGET: Duration = Duration::from_secs(30);

const SIM_TRIALS: u64 = 10_000;
const SIM_SEEDS: u64 = 20;
const SIM_MIN_WITHIN: usize = 19;
const SIM_BUDGET: Duration = Duration::from_secs(60);

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 closed form matches exact enumeration", closed_form_equivalence),
        ("2 worked examples", worked_examples),
        ("3 case-study candidates and savings", case_study),
        ("4 pruning soundness", pruning_soundness),
        ("5 simulator consistency", simulator_consistency),
        ("6 determinism and order invariance", determinism),
        ("7 monotonicity and permutation invariance", monotonicity),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  criterion {name}: {detail} ({secs:.2}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  criterion {name}: {detail} ({secs:.2}s)");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn cluster(name: &str, k: u32, kh: u32, p: f64, f: f64, t: f64) -> ClusterConfig {
    ClusterConfig::new(name, k, kh, p, f, t).expect("valid cluster")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn uptime(args: &[&str]) -> Result<Output, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_uptime"))
        .args(args)
        .output()
        .map_err(|e| format!("running uptime: {e}"))?;
    if !out.status.success() {
        return Err(format!(
            "uptime {args:?} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(out)
}

fn report_of(out: &Output) -> Result<Report, String> {
    let text = std::str::from_utf8(&out.stdout).map_err(|e| e.to_string())?;
    Report::from_json(text).map_err(|e| e.to_string())
}

fn closed_form_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA11CE);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in 0..EQUIVALENCE_SYSTEMS {
        let mut budget = 12u32;
        let mut clusters = Vec::new();
        while budget > 0 && (clusters.is_empty() || rng.random_bool(0.7)) {
            let k = rng.random_range(1..=budget.min(5));
            budget -= k;
            let p = match rng.random_range(0..10) {
                0 => 0.0,
                1 => 0.5,
                _ => rng.random_range(0.0..=0.5),
            };
            let kh = rng.random_range(0..k);
            clusters.push(cluster(&format!("c{}", clusters.len()), k, kh, p, 1.0, 5.0));
        }
        let system = SystemConfig::new(clusters).map_err(|e| e.to_string())?;
        let closed = breakdown_probability(&system).map_err(|e| e.to_string())?;
        let exact = exact_breakdown_probability(&system).map_err(|e| e.to_string())?;
        let diff = (closed - exact).abs();
        worst = worst.max(diff);
        ensure(diff <= EQUIVALENCE_TOLERANCE, || {
            format!("system #{n}: closed {closed} vs exact {exact}")
        })?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < EQUIVALENCE_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{EQUIVALENCE_SYSTEMS} systems, max |diff| {worst:.1e} <= {EQUIVALENCE_TOLERANCE:e}"
    ))
}

fn worked_examples() -> Outcome {
    let u = cluster_uptime_probability(&cluster("a", 4, 1, 0.1, 0.0, 0.0)).map_err(|e| e.to_string())?;
    ensure((u - 0.9477).abs() <= CLUSTER_UPTIME_TOLERANCE, || {
        format!("cluster uptime {u}")
    })?;

    let single = SystemConfig::new(vec![cluster("a", 2, 1, 0.3, 2.0, 30.0)]).map_err(|e| e.to_string())?;
    let (fs, _) = failover_downtime(&single).map_err(|e| e.to_string())?;
    let reference = 60.0 / MINUTES_PER_YEAR;
    ensure((fs - reference).abs() <= FAILOVER_TOLERANCE, || {
        format!("F_s {fs} vs {reference}")
    })?;

    let contract = SlaContract::new(98.0, Money::from_cents(10_000)).map_err(|e| e.to_string())?;
    let cha = Money::from_cents(100_000);
    let missed = SystemConfig::new(vec![cluster("a", 1, 0, 0.03, 0.0, 0.0)]).map_err(|e| e.to_string())?;
    let eval = tco(&missed, cha, &contract).map_err(|e| e.to_string())?;
    ensure(eval.tco_monthly == Money::from_cents(173_000), || {
        format!("TCO {} instead of 1730", eval.tco_monthly)
    })?;

    let met = SystemConfig::new(vec![cluster("a", 1, 0, 0.01, 0.0, 0.0)]).map_err(|e| e.to_string())?;
    let eval = tco(&met, cha, &contract).map_err(|e| e.to_string())?;
    ensure(eval.meets_sla && eval.tco_monthly == cha, || {
        format!("SLA-met TCO {}", eval.tco_monthly)
    })?;

    Ok(format!("uptime {u:.12}, F_s {fs:.6e}, TCO 1730.00, SLA-met TCO {cha}"))
}

/// Per-option figures read straight from the fixture JSON.
struct HandOption {
    id: String,
    k: i32,
    kh: i32,
    p: f64,
    f: f64,
    t: f64,
    cost: f64,
}

fn hand_options(slot: &Value) -> Vec<HandOption> {
    let num = |o: &Value, key: &str| o.get(key).and_then(Value::as_f64).unwrap_or(0.0);
    slot["options"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| HandOption {
            id: o["id"].as_str().unwrap().to_string(),
            k: num(o, "total_nodes") as i32,
            kh: num(o, "tolerated_failures") as i32,
            p: num(o, "node_down_probability"),
            f: num(o, "annual_failures_per_node"),
            t: num(o, "failover_minutes"),
            cost: num(o, "monthly_infra_cost") + num(o, "monthly_labor_cost"),
        })
        .collect()
}

fn binomial(n: i32, r: i32) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Monthly TCO of one combination, computed directly from the formulas.
fn hand_tco(picked: &[&HandOption], sla: f64, penalty: f64) -> f64 {
    let up: Vec<f64> = picked
        .iter()
        .map(|o| {
            (o.k - o.kh..=o.k)
                .map(|j| binomial(o.k, j) * (1.0 - o.p).powi(j) * o.p.powi(o.k - j))
                .sum()
        })
        .collect();
    let breakdown = 1.0 - up.iter().product::<f64>();
    let failover: f64 = (0..picked.len())
        .map(|i| {
            let o = picked[i];
            let others: f64 = (0..picked.len())
                .filter(|&j| j != i)
                .map(|j| (1.0 - picked[j].p).powi(picked[j].k - picked[j].kh))
                .product();
            o.f * o.t * (o.k - o.kh) as f64 / 525_600.0 * others
        })
        .sum();
    let uptime = 1.0 - breakdown - failover;
    let cost: f64 = picked.iter().map(|o| o.cost).sum();
    let slip = (sla / 100.0 - uptime).max(0.0) * 730.0;
    cost + slip * penalty
}

fn case_study() -> Outcome {
    let topo = fixture("three_tier.json");
    let report = report_of(&uptime(&["recommend", "--topology", topo.to_str().unwrap()])?)?;
    ensure(report.candidates.len() == 8, || {
        format!("{} candidates", report.candidates.len())
    })?;
    let rec = report.recommendation.ok_or("no recommendation block")?;
    let reported = rec.savings_percent.ok_or("no savings reported")?;

    let doc: Value =
        serde_json::from_slice(&std::fs::read(&topo).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let sla = doc["sla"]["uptime_percent"].as_f64().unwrap();
    let penalty = doc["sla"]["penalty_per_hour"].as_f64().unwrap();
    let slots: Vec<(String, Vec<HandOption>)> = doc["slots"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| (s["name"].as_str().unwrap().to_string(), hand_options(s)))
        .collect();
    let mut best = f64::INFINITY;
    let mut as_is = None;
    let mut count = 0;
    for mask in 0..8usize {
        let picked: Vec<&HandOption> = slots
            .iter()
            .enumerate()
            .map(|(i, (_, opts))| &opts[(mask >> i) & 1])
            .collect();
        let total = hand_tco(&picked, sla, penalty);
        count += 1;
        best = best.min(total);
        let is_as_is = slots
            .iter()
            .zip(&picked)
            .all(|((name, _), o)| doc["as_is"][name].as_str() == Some(o.id.as_str()));
        if is_as_is {
            as_is = Some(total);
        }
    }
    let as_is = as_is.ok_or("as_is combination not found")?;
    let expected = (as_is - best) / as_is * 100.0;
    ensure((reported - expected).abs() <= SAVINGS_TOLERANCE_PERCENT, || {
        format!("reported {reported:.4}% vs hand {expected:.4}%")
    })?;
    Ok(format!(
        "{count} candidates, savings {reported:.2}% (hand {expected:.2}%)"
    ))
}

fn random_monotone_catalog(rng: &mut ChaCha8Rng) -> OptionCatalog {
    let n = rng.random_range(1..=5);
    let slots = (0..n)
        .map(|i| {
            let name = format!("s{i}");
            let active = rng.random_range(1..=3);
            let p = rng.random_range(1e-4..0.05);
            let f = rng.random_range(0.0..6.0);
            let t = rng.random_range(0.0..30.0);
            let base = rng.random_range(0..50_000);
            let k = rng.random_range(1..=3);
            let mut options = vec![HaOption {
                option_id: "base".into(),
                label: "no HA".into(),
                cluster: cluster(&name, active, 0, p, f, t),
                monthly_infra_cost: Money::from_cents(base),
                monthly_labor_cost: Money::ZERO,
            }];
            for j in 1..k {
                let spares = rng.random_range(1..=3);
                let extra = rng.random_range(1..100_000);
                options.push(HaOption {
                    option_id: format!("ha{j}"),
                    label: format!("+{spares} standby"),
                    cluster: cluster(&name, active + spares, spares, p, f, t),
                    monthly_infra_cost: Money::from_cents(base + extra),
                    monthly_labor_cost: Money::from_cents(extra / 4),
                });
            }
            Slot::new(name, options, None).expect("valid slot")
        })
        .collect();
    OptionCatalog::new(slots).expect("valid catalog")
}

fn pruning_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xBEEF);
    let start = Instant::now();
    let mut pruned_total = 0;
    for n in 0..PRUNING_CATALOGS {
        let catalog = random_monotone_catalog(&mut rng);
        check_monotone(&catalog).map_err(|e| format!("catalog #{n} not monotone: {e}"))?;
        let sla = rng.random_range(90.0..99.999);
        let contract =
            SlaContract::new(sla, Money::from_cents(rng.random_range(0..100_000))).map_err(|e| e.to_string())?;
        let run = |mode| {
            optimize(
                &catalog,
                &contract,
                &OptimizeOptions {
                    mode,
                    ..Default::default()
                },
            )
            .map_err(|e| e.to_string())
        };
        let full = run(SearchMode::Exhaustive)?;
        let pruned = run(SearchMode::Pruned)?;
        ensure(
            full.min_tco_choice.tco_monthly == pruned.min_tco_choice.tco_monthly,
            || {
                format!(
                    "catalog #{n}: exhaustive {} vs pruned {}",
                    full.min_tco_choice.tco_monthly, pruned.min_tco_choice.tco_monthly
                )
            },
        )?;
        let product: usize = catalog.slots().iter().map(|s| s.options.len()).product();
        ensure(pruned.all_candidates.len() + pruned.pruned_count == product, || {
            format!(
                "catalog #{n}: {} + {} != {product}",
                pruned.all_candidates.len(),
                pruned.pruned_count
            )
        })?;
        pruned_total += pruned.pruned_count;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < PRUNING_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{PRUNING_CATALOGS} catalogs agree, {pruned_total} candidates pruned in total"
    ))
}

fn simulator_consistency() -> Outcome {
    let system = SystemConfig::new(vec![cluster("app", 2, 1, 0.001, 2.0, 30.0)]).map_err(|e| e.to_string())?;
    let closed = system_availability(&system).map_err(|e| e.to_string())?.uptime_prob;
    let start = Instant::now();
    let mut within = 0;
    let mut worst = 0.0f64;
    for seed in 0..SIM_SEEDS {
        let spec = SimulationSpec::new(system.clone(), 1.0, SIM_TRIALS, seed).map_err(|e| e.to_string())?;
        let r = simulate_timeline(&spec).map_err(|e| e.to_string())?;
        let z = (r.estimated_uptime - closed).abs() / r.standard_error;
        worst = worst.max(z);
        if z <= 3.0 {
            within += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < SIM_BUDGET, || format!("took {elapsed:?}"))?;
    ensure(within >= SIM_MIN_WITHIN, || {
        format!("only {within}/{SIM_SEEDS} seeds within 3 SE")
    })?;
    Ok(format!(
        "{within}/{SIM_SEEDS} seeds within 3 SE of {closed:.8} (worst {worst:.2} SE)"
    ))
}

fn determinism() -> Outcome {
    let topo = fixture("three_tier.json");
    let topo = topo.to_str().unwrap();
    for args in [
        vec!["recommend", "--topology", topo],
        vec!["recommend", "--topology", topo, "--mode", "pruned"],
        vec!["simulate", "--topology", topo, "--trials", "2000", "--seed", "7"],
    ] {
        let a = uptime(&args)?;
        let b = uptime(&args)?;
        ensure(a.stdout == b.stdout, || format!("{args:?} differs between runs"))?;
    }

    let mut doc: Value =
        serde_json::from_slice(&std::fs::read(topo).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let slots = doc["slots"].as_array_mut().unwrap();
    slots.reverse();
    for slot in slots.iter_mut() {
        slot["options"].as_array_mut().unwrap().reverse();
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let shuffled = dir.path().join("shuffled.json");
    std::fs::write(&shuffled, doc.to_string()).map_err(|e| e.to_string())?;

    let original = report_of(&uptime(&["recommend", "--topology", topo])?)?;
    let reordered = report_of(&uptime(&["recommend", "--topology", shuffled.to_str().unwrap()])?)?;
    ensure(original.candidates == reordered.candidates, || {
        "candidate rows depend on declaration order".into()
    })?;
    ensure(original.recommendation == reordered.recommendation, || {
        "recommendation depends on declaration order".into()
    })?;
    Ok("3 commands byte-identical across runs; reordered slots and options give identical rows".into())
}

fn monotonicity() -> Outcome {
    let grid: Vec<f64> = (0..20).map(|i| i as f64 / 20.0).collect();
    let mut checks = 0;
    for k in 1..=8u32 {
        for kh in 0..k {
            let mut last = f64::INFINITY;
            for &p in &grid {
                let u = cluster_uptime_probability(&cluster("c", k, kh, p, 0.0, 0.0)).map_err(|e| e.to_string())?;
                ensure(u <= last, || format!("K={k} K^={kh}: uptime rises at P={p}"))?;
                last = u;
                checks += 1;
            }
        }
        for &p in &grid {
            let mut last = f64::NEG_INFINITY;
            for kh in 0..k {
                let u = cluster_uptime_probability(&cluster("c", k, kh, p, 0.0, 0.0)).map_err(|e| e.to_string())?;
                ensure(u >= last, || format!("K={k} P={p}: uptime falls at K^={kh}"))?;
                last = u;
                checks += 1;
            }
        }
    }

    let base = vec![
        cluster("web", 3, 1, 0.01, 4.0, 5.0),
        cluster("db", 2, 1, 0.02, 1.0, 30.0),
        cluster("lb", 1, 0, 0.005, 2.0, 1.0),
        cluster("cache", 4, 2, 0.05, 6.0, 2.0),
    ];
    let reference =
        system_availability(&SystemConfig::new(base.clone()).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let mut perms = 0;
    for order in permutations(base.len()) {
        let clusters = order.iter().map(|&i| base[i].clone()).collect();
        let av =
            system_availability(&SystemConfig::new(clusters).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        ensure(av == reference, || format!("order {order:?} changes the result"))?;
        perms += 1;
    }
    Ok(format!("{checks} grid checks, {perms} cluster orders bit-identical"))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out
}

//! Exhaustive and pruned search for the minimum-TCO HA variant.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::catalog::{ChoiceMap, IndexOdometer, OptionCatalog};
use super::tco::{tco, CandidateEvaluation, SlaContract};
use crate::availability::cluster_uptime_probability;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchMode {
    #[default]
    Exhaustive,
    /// Skip strict supersets of any candidate already meeting the SLA.
    Pruned,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    #[default]
    MinTco,
    MinPenalty,
}

impl FromStr for SearchMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exhaustive" => Ok(SearchMode::Exhaustive),
            "pruned" => Ok(SearchMode::Pruned),
            other => Err(format!("unknown mode `{other}` (expected exhaustive|pruned)")),
        }
    }
}

impl fmt::Display for SearchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SearchMode::Exhaustive => "exhaustive",
            SearchMode::Pruned => "pruned",
        })
    }
}

impl FromStr for Objective {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "min-tco" => Ok(Objective::MinTco),
            "min-penalty" => Ok(Objective::MinPenalty),
            other => Err(format!("unknown objective `{other}` (expected min-tco|min-penalty)")),
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Objective::MinTco => "min-tco",
            Objective::MinPenalty => "min-penalty",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OptimizeOptions {
    pub mode: SearchMode,
    pub objective: Objective,
    /// As-is deployment to measure savings against.
    pub as_is: Option<ChoiceMap>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub mode: SearchMode,
    pub objective: Objective,
    /// Evaluated candidates ordered by [`rank_by_tco`].
    pub all_candidates: Vec<CandidateEvaluation>,
    pub min_tco_choice: CandidateEvaluation,
    pub min_penalty_choice: CandidateEvaluation,
    /// The candidate selected by `objective`.
    pub recommended: ChoiceMap,
    pub as_is: Option<CandidateEvaluation>,
    /// `(TCO_as_is - TCO_min) / TCO_as_is * 100`; absent without an as-is
    /// deployment or when its TCO is zero.
    pub savings_percent: Option<f64>,
    pub pruned_count: usize,
}

/// Lower TCO first, then higher uptime, then the smaller choice sequence.
pub fn rank_by_tco(a: &CandidateEvaluation, b: &CandidateEvaluation) -> Ordering {
    a.tco_monthly
        .cmp(&b.tco_monthly)
        .then_with(|| b.availability.uptime_prob.total_cmp(&a.availability.uptime_prob))
        .then_with(|| a.choices.cmp(&b.choices))
}

/// Lower penalty first, ties resolved by [`rank_by_tco`].
pub fn rank_by_penalty(a: &CandidateEvaluation, b: &CandidateEvaluation) -> Ordering {
    a.penalty_monthly
        .cmp(&b.penalty_monthly)
        .then_with(|| rank_by_tco(a, b))
}

fn evaluate(catalog: &OptionCatalog, indices: &[usize], contract: &SlaContract) -> Result<CandidateEvaluation> {
    let (system, cha) = catalog.assemble(indices)?;
    let mut eval = tco(&system, cha, contract)?;
    eval.choices = catalog.choice_map(indices);
    Ok(eval)
}

/// Checks that pruning strict supersets is exact for this catalog.
///
/// Per slot, every non-baseline option must cost strictly more than the
/// baseline and must not lower system uptime whatever the other slots choose.
/// The uptime condition is verified against worst-case bounds taken over the
/// other slots' options, since a more reliable cluster also raises the weight
/// of the other clusters' failover terms.
pub fn check_monotone(catalog: &OptionCatalog) -> Result<()> {
    struct Stats {
        uptime: f64,
        exposure: f64,
        active_up: f64,
    }
    let stats: Vec<Vec<Stats>> = catalog
        .slots()
        .iter()
        .map(|slot| {
            slot.options
                .iter()
                .map(|o| {
                    Ok(Stats {
                        uptime: cluster_uptime_probability(&o.cluster)?,
                        exposure: o.cluster.failover_exposure(),
                        active_up: o.cluster.all_active_up_probability(),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let bounds = |slot: usize, pick: fn(&Stats) -> f64| -> (f64, f64) {
        stats[slot]
            .iter()
            .map(pick)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };

    for (i, slot) in catalog.slots().iter().enumerate() {
        let others: Vec<usize> = (0..stats.len()).filter(|&j| j != i).collect();
        let uptime_b: Vec<(f64, f64)> = others.iter().map(|&j| bounds(j, |s| s.uptime)).collect();
        let active_b: Vec<(f64, f64)> = others.iter().map(|&j| bounds(j, |s| s.active_up)).collect();
        let exposure_b: Vec<(f64, f64)> = others.iter().map(|&j| bounds(j, |s| s.exposure)).collect();

        let prod_uptime_min: f64 = uptime_b.iter().map(|b| b.0).product();
        let prod_uptime_max: f64 = uptime_b.iter().map(|b| b.1).product();
        let prod_active_min: f64 = active_b.iter().map(|b| b.0).product();
        let prod_active_max: f64 = active_b.iter().map(|b| b.1).product();
        // Σ_j g_j Π_{l≠j} a_l over the other slots, at the low and high ends.
        let weight = |lo: bool| -> f64 {
            (0..others.len())
                .map(|j| {
                    let g = if lo { exposure_b[j].0 } else { exposure_b[j].1 };
                    let rest: f64 = (0..others.len())
                        .filter(|&l| l != j)
                        .map(|l| if lo { active_b[l].0 } else { active_b[l].1 })
                        .product();
                    g * rest
                })
                .sum()
        };
        let (weight_min, weight_max) = (weight(true), weight(false));

        let base = &stats[i][slot.baseline];
        let base_cost = slot.baseline_option().monthly_cost();
        for (o, option) in slot.options.iter().enumerate() {
            if o == slot.baseline {
                continue;
            }
            let non_monotone = |reason: String| Error::NonMonotone {
                slot: slot.name.clone(),
                option: option.option_id.clone(),
                reason,
            };
            if option.monthly_cost() <= base_cost {
                return Err(non_monotone(format!(
                    "monthly cost {} does not exceed baseline cost {}",
                    option.monthly_cost(),
                    base_cost
                )));
            }
            let s = &stats[i][o];
            let d_uptime = s.uptime - base.uptime;
            let d_exposure = s.exposure - base.exposure;
            let d_active = s.active_up - base.active_up;
            // Worst-case increase of system downtime caused by the swap.
            let breakdown_delta = -d_uptime
                * if d_uptime >= 0.0 {
                    prod_uptime_min
                } else {
                    prod_uptime_max
                };
            let own_delta = d_exposure
                * if d_exposure > 0.0 {
                    prod_active_max
                } else {
                    prod_active_min
                };
            let others_delta = d_active * if d_active > 0.0 { weight_max } else { weight_min };
            let worst = breakdown_delta + own_delta + others_delta;
            if worst > 0.0 {
                return Err(non_monotone(format!(
                    "may lower system uptime by up to {worst:.3e} relative to baseline `{}`",
                    slot.baseline_option().option_id
                )));
            }
        }
    }
    Ok(())
}

/// Evaluates HA variants and picks the optimum.
///
/// Exhaustive mode evaluates the full cross product. Pruned mode visits
/// candidates level by level (number of non-baseline slots) and skips every
/// strict superset of a candidate that already meets the SLA; it refuses
/// catalogs that fail [`check_monotone`].
pub fn optimize(catalog: &OptionCatalog, contract: &SlaContract, options: &OptimizeOptions) -> Result<Recommendation> {
    contract.validate()?;
    let as_is_indices = options.as_is.as_ref().map(|c| catalog.resolve(c)).transpose()?;

    let (mut evaluated, pruned_count) = match options.mode {
        SearchMode::Exhaustive => {
            let all: Vec<Vec<usize>> = IndexOdometer::new(catalog).collect();
            let evaluated = all
                .par_iter()
                .map(|indices| evaluate(catalog, indices, contract))
                .collect::<Result<Vec<_>>>()?;
            (evaluated, 0)
        }
        SearchMode::Pruned => {
            check_monotone(catalog)?;
            pruned_search(catalog, contract)?
        }
    };
    evaluated.sort_by(rank_by_tco);

    let min_tco_choice = evaluated.first().cloned().expect("catalog has at least one candidate");
    let min_penalty_choice = evaluated
        .iter()
        .min_by(|a, b| rank_by_penalty(a, b))
        .cloned()
        .expect("catalog has at least one candidate");
    let recommended = match options.objective {
        Objective::MinTco => min_tco_choice.choices.clone(),
        Objective::MinPenalty => min_penalty_choice.choices.clone(),
    };

    let as_is = as_is_indices.map(|idx| evaluate(catalog, &idx, contract)).transpose()?;
    let savings_percent = as_is.as_ref().and_then(|base| {
        let base_tco = base.tco_monthly.cents();
        (base_tco != 0).then(|| (base_tco - min_tco_choice.tco_monthly.cents()) as f64 / base_tco as f64 * 100.0)
    });

    Ok(Recommendation {
        mode: options.mode,
        objective: options.objective,
        all_candidates: evaluated,
        min_tco_choice,
        min_penalty_choice,
        recommended,
        as_is,
        savings_percent,
        pruned_count,
    })
}

fn pruned_search(catalog: &OptionCatalog, contract: &SlaContract) -> Result<(Vec<CandidateEvaluation>, usize)> {
    let baseline = catalog.baseline_indices();
    let level = |indices: &[usize]| indices.iter().zip(&baseline).filter(|(i, b)| i != b).count();

    let mut by_level: Vec<Vec<Vec<usize>>> = vec![Vec::new(); baseline.len() + 1];
    for indices in IndexOdometer::new(catalog) {
        by_level[level(&indices)].push(indices);
    }

    // A strict superset agrees with `met` on all of met's clustered slots.
    let extends = |candidate: &[usize], met: &[usize]| {
        met.iter()
            .zip(&baseline)
            .zip(candidate)
            .all(|((m, b), c)| m == b || m == c)
    };

    let mut met_sla: Vec<Vec<usize>> = Vec::new();
    let mut evaluated = Vec::new();
    let mut pruned = 0;
    for frontier in by_level {
        let (keep, skip): (Vec<_>, Vec<_>) = frontier
            .into_iter()
            .partition(|c| !met_sla.iter().any(|m| extends(c, m)));
        pruned += skip.len();
        let results = keep
            .par_iter()
            .map(|indices| evaluate(catalog, indices, contract))
            .collect::<Result<Vec<_>>>()?;
        for (indices, eval) in keep.into_iter().zip(results) {
            if eval.meets_sla {
                met_sla.push(indices);
            }
            evaluated.push(eval);
        }
    }
    Ok((evaluated, pruned))
}

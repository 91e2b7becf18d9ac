//! Versioned JSON reports and their text-table rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::availability::AvailabilityBreakdown;
use crate::error::{Error, Result};
use crate::money::Money;
use crate::optimizer::{CandidateEvaluation, ChoiceMap, Objective, Recommendation, SearchMode};
use crate::oracle::{BreakdownRecovery, SimulationResult};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportKind {
    Evaluate,
    Recommend,
    Simulate,
}

/// Echo of the effective inputs of a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportInputs {
    pub topology: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uptime_sla_percent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penalty_per_hour: Option<Money>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<SearchMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<Objective>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choices: Option<ChoiceMap>,
}

/// One evaluated candidate, as printed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateRow {
    pub choices: ChoiceMap,
    pub uptime: f64,
    pub breakdown: f64,
    pub failover: f64,
    pub saturated: bool,
    pub cha_monthly: Money,
    pub slippage_hours_monthly: f64,
    pub penalty_monthly: Money,
    pub tco_monthly: Money,
    pub meets_sla: bool,
}

impl From<&CandidateEvaluation> for CandidateRow {
    fn from(c: &CandidateEvaluation) -> Self {
        CandidateRow {
            choices: c.choices.clone(),
            uptime: c.availability.uptime_prob,
            breakdown: c.availability.breakdown_prob,
            failover: c.availability.failover_prob,
            saturated: c.availability.saturated,
            cha_monthly: c.cha_monthly,
            slippage_hours_monthly: c.slippage_hours_monthly,
            penalty_monthly: c.penalty_monthly,
            tco_monthly: c.tco_monthly,
            meets_sla: c.meets_sla,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecommendationBlock {
    pub mode: SearchMode,
    pub objective: Objective,
    pub recommended: ChoiceMap,
    pub min_tco: ChoiceMap,
    pub min_tco_monthly: Money,
    pub min_penalty: ChoiceMap,
    pub min_penalty_monthly: Money,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub as_is: Option<CandidateRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub savings_percent: Option<f64>,
    pub evaluated_count: usize,
    pub pruned_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationBlock {
    pub choices: ChoiceMap,
    pub trials: u64,
    pub horizon_years: f64,
    pub seed: u64,
    pub recovery: BreakdownRecovery,
    pub closed_form_uptime: f64,
    pub closed_form_breakdown: f64,
    pub closed_form_failover: f64,
    pub estimated_uptime: f64,
    pub estimated_breakdown_fraction: f64,
    pub estimated_failover_fraction: f64,
    pub standard_error: f64,
    /// `(estimate - closed form) / standard_error`; absent when the error is zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deviation_in_standard_errors: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub schema_version: u32,
    pub command: ReportKind,
    pub inputs: ReportInputs,
    /// Ordered by TCO ascending with the optimizer's tie-breaking.
    #[serde(default)]
    pub candidates: Vec<CandidateRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub recommendation: Option<RecommendationBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationBlock>,
}

impl Report {
    pub fn evaluate(inputs: ReportInputs, candidate: &CandidateEvaluation) -> Self {
        Report {
            schema_version: REPORT_SCHEMA_VERSION,
            command: ReportKind::Evaluate,
            inputs,
            candidates: vec![candidate.into()],
            recommendation: None,
            simulation: None,
        }
    }

    pub fn recommend(inputs: ReportInputs, rec: &Recommendation) -> Self {
        let block = RecommendationBlock {
            mode: rec.mode,
            objective: rec.objective,
            recommended: rec.recommended.clone(),
            min_tco: rec.min_tco_choice.choices.clone(),
            min_tco_monthly: rec.min_tco_choice.tco_monthly,
            min_penalty: rec.min_penalty_choice.choices.clone(),
            min_penalty_monthly: rec.min_penalty_choice.penalty_monthly,
            as_is: rec.as_is.as_ref().map(CandidateRow::from),
            savings_percent: rec.savings_percent,
            evaluated_count: rec.all_candidates.len(),
            pruned_count: rec.pruned_count,
        };
        Report {
            schema_version: REPORT_SCHEMA_VERSION,
            command: ReportKind::Recommend,
            inputs,
            candidates: rec.all_candidates.iter().map(CandidateRow::from).collect(),
            recommendation: Some(block),
            simulation: None,
        }
    }

    pub fn simulate(
        inputs: ReportInputs,
        choices: ChoiceMap,
        closed_form: &AvailabilityBreakdown,
        spec: (u64, f64, u64, BreakdownRecovery),
        result: &SimulationResult,
    ) -> Self {
        let (trials, horizon_years, seed, recovery) = spec;
        let deviation = (result.standard_error > 0.0)
            .then(|| (result.estimated_uptime - closed_form.uptime_prob) / result.standard_error);
        Report {
            schema_version: REPORT_SCHEMA_VERSION,
            command: ReportKind::Simulate,
            inputs,
            candidates: Vec::new(),
            recommendation: None,
            simulation: Some(SimulationBlock {
                choices,
                trials,
                horizon_years,
                seed,
                recovery,
                closed_form_uptime: closed_form.uptime_prob,
                closed_form_breakdown: closed_form.breakdown_prob,
                closed_form_failover: closed_form.failover_prob,
                estimated_uptime: result.estimated_uptime,
                estimated_breakdown_fraction: result.estimated_breakdown_fraction,
                estimated_failover_fraction: result.estimated_failover_fraction,
                standard_error: result.standard_error,
                deviation_in_standard_errors: deviation,
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: Report = serde_json::from_str(text).map_err(|e| Error::from_json("report", e))?;
        if report.schema_version != REPORT_SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                source_name: "report".into(),
                found: report.schema_version,
                expected: REPORT_SCHEMA_VERSION,
            });
        }
        Ok(report)
    }

    /// Plain-text rendering: inputs, candidate table, and summary block.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let i = &self.inputs;
        let _ = writeln!(out, "topology: {}", i.topology);
        if let Some(c) = &i.catalog {
            let _ = writeln!(out, "catalog:  {c}");
        }
        if let (Some(sla), Some(sp)) = (i.uptime_sla_percent, i.penalty_per_hour) {
            let _ = writeln!(out, "sla:      {sla}% uptime, penalty {sp}/hour");
        }

        if !self.candidates.is_empty() {
            let headers = [
                "#",
                "choices",
                "uptime",
                "B_s",
                "F_s",
                "C_HA",
                "slip h/mo",
                "penalty",
                "TCO",
                "meets",
            ];
            let rows: Vec<[String; 10]> = self
                .candidates
                .iter()
                .enumerate()
                .map(|(n, r)| {
                    [
                        (n + 1).to_string(),
                        r.choices.to_string(),
                        format!("{:.6}", r.uptime),
                        format!("{:.3e}", r.breakdown),
                        format!("{:.3e}", r.failover),
                        r.cha_monthly.to_string(),
                        format!("{:.2}", r.slippage_hours_monthly),
                        r.penalty_monthly.to_string(),
                        r.tco_monthly.to_string(),
                        if r.meets_sla { "yes" } else { "no" }.to_string(),
                    ]
                })
                .collect();
            let widths: Vec<usize> = (0..headers.len())
                .map(|c| {
                    rows.iter()
                        .map(|r| r[c].len())
                        .chain([headers[c].len()])
                        .max()
                        .unwrap_or(0)
                })
                .collect();
            let line = |cells: &[&str]| {
                cells
                    .iter()
                    .zip(&widths)
                    .enumerate()
                    .map(|(c, (cell, w))| {
                        if c == 1 {
                            format!("{cell:<w$}")
                        } else {
                            format!("{cell:>w$}")
                        }
                    })
                    .collect::<Vec<_>>()
                    .join("  ")
            };
            let _ = writeln!(out);
            let _ = writeln!(out, "{}", line(&headers));
            let _ = writeln!(
                out,
                "{}",
                widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("  ")
            );
            for row in &rows {
                let cells: Vec<&str> = row.iter().map(String::as_str).collect();
                let _ = writeln!(out, "{}", line(&cells));
            }
        }

        if let Some(r) = &self.recommendation {
            let _ = writeln!(out);
            let _ = writeln!(
                out,
                "mode:         {} ({} evaluated, {} pruned)",
                r.mode, r.evaluated_count, r.pruned_count
            );
            let _ = writeln!(out, "recommended:  {} [{}]", r.recommended, r.objective);
            let _ = writeln!(out, "min TCO:      {} at {}/month", r.min_tco, r.min_tco_monthly);
            let _ = writeln!(
                out,
                "min penalty:  {} at {}/month",
                r.min_penalty, r.min_penalty_monthly
            );
            if let Some(a) = &r.as_is {
                let _ = writeln!(out, "as-is:        {} at {}/month", a.choices, a.tco_monthly);
            }
            if let Some(s) = r.savings_percent {
                let _ = writeln!(out, "savings:      {s:.2}%");
            }
        }

        if let Some(s) = &self.simulation {
            let _ = writeln!(out);
            let _ = writeln!(out, "choices:      {}", s.choices);
            let _ = writeln!(
                out,
                "trials:       {} x {} yr (seed {})",
                s.trials, s.horizon_years, s.seed
            );
            let _ = writeln!(out, "              {:>14}  {:>14}", "closed form", "simulated");
            let _ = writeln!(
                out,
                "uptime        {:>14.8}  {:>14.8}",
                s.closed_form_uptime, s.estimated_uptime
            );
            let _ = writeln!(
                out,
                "breakdown     {:>14.4e}  {:>14.4e}",
                s.closed_form_breakdown, s.estimated_breakdown_fraction
            );
            let _ = writeln!(
                out,
                "failover      {:>14.4e}  {:>14.4e}",
                s.closed_form_failover, s.estimated_failover_fraction
            );
            let _ = writeln!(out, "std error     {:>14}  {:>14.4e}", "", s.standard_error);
            if let Some(z) = s.deviation_in_standard_errors {
                let _ = writeln!(out, "deviation     {z:+.2} standard errors");
            }
        }
        out
    }
}

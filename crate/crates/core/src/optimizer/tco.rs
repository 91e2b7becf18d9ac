use serde::{Deserialize, Serialize};

use super::catalog::ChoiceMap;
use crate::availability::{system_availability, AvailabilityBreakdown, SystemConfig, MINUTES_PER_YEAR};
use crate::error::{Error, Result};
use crate::money::Money;

/// Hours in a month on the model's basis: `δ / (12 * 60)` = 730.
pub const HOURS_PER_MONTH: f64 = MINUTES_PER_YEAR / (12.0 * 60.0);

/// Uptime commitment and the penalty owed per hour of shortfall.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlaContract {
    /// Required uptime, percent in (0, 100].
    pub uptime_sla_percent: f64,
    pub penalty_per_hour: Money,
}

impl SlaContract {
    pub fn new(uptime_sla_percent: f64, penalty_per_hour: Money) -> Result<Self> {
        let contract = SlaContract {
            uptime_sla_percent,
            penalty_per_hour,
        };
        contract.validate()?;
        Ok(contract)
    }

    pub fn validate(&self) -> Result<()> {
        let u = self.uptime_sla_percent;
        if !(u.is_finite() && u > 0.0 && u <= 100.0) {
            return Err(Error::invalid(
                "SLA contract",
                "uptime_sla_percent",
                format!("{u} is outside (0, 100]"),
            ));
        }
        if self.penalty_per_hour.is_negative() {
            return Err(Error::invalid(
                "SLA contract",
                "penalty_per_hour",
                format!("{} must be >= 0", self.penalty_per_hour),
            ));
        }
        Ok(())
    }

    pub fn target_uptime(&self) -> f64 {
        self.uptime_sla_percent / 100.0
    }

    pub fn is_met_by(&self, uptime_prob: f64) -> bool {
        uptime_prob >= self.target_uptime()
    }
}

/// Expected hours per month by which uptime falls short of the SLA.
/// Over-achievement earns no credit.
pub fn expected_slippage_hours(availability: &AvailabilityBreakdown, contract: &SlaContract) -> Result<f64> {
    contract.validate()?;
    Ok(slippage_hours(availability.uptime_prob, contract))
}

fn slippage_hours(uptime_prob: f64, contract: &SlaContract) -> f64 {
    let gap = contract.target_uptime() - uptime_prob;
    if gap > 0.0 {
        gap * HOURS_PER_MONTH
    } else {
        0.0
    }
}

/// Penalty for `hours` of slippage, rounded to the cent. Any positive
/// slippage under a positive rate is charged at least one cent.
pub fn slippage_penalty(hours: f64, rate: Money) -> Money {
    if hours <= 0.0 || rate.cents() == 0 {
        return Money::ZERO;
    }
    let cents = (hours * rate.cents() as f64).round();
    Money::from_cents((cents as i64).max(1))
}

/// One evaluated HA variant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateEvaluation {
    pub choices: ChoiceMap,
    pub system: SystemConfig,
    pub availability: AvailabilityBreakdown,
    pub cha_monthly: Money,
    pub slippage_hours_monthly: f64,
    pub penalty_monthly: Money,
    pub tco_monthly: Money,
    pub meets_sla: bool,
}

/// Monthly TCO of a candidate system: HA cost plus expected slippage penalty.
pub fn tco(system: &SystemConfig, cha_monthly: Money, contract: &SlaContract) -> Result<CandidateEvaluation> {
    contract.validate()?;
    if cha_monthly.is_negative() {
        return Err(Error::invalid(
            "candidate",
            "cha_monthly",
            format!("{cha_monthly} must be >= 0"),
        ));
    }
    let availability = system_availability(system)?;
    let slippage_hours_monthly = slippage_hours(availability.uptime_prob, contract);
    let penalty_monthly = slippage_penalty(slippage_hours_monthly, contract.penalty_per_hour);
    Ok(CandidateEvaluation {
        choices: ChoiceMap::default(),
        system: system.clone(),
        meets_sla: contract.is_met_by(availability.uptime_prob),
        availability,
        cha_monthly,
        slippage_hours_monthly,
        penalty_monthly,
        tco_monthly: cha_monthly + penalty_monthly,
    })
}

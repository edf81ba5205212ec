//! Mode choice: generalized cost of a trip, the binary logit probability it
//! implies, distance-based service classes, and decision rules that turn a
//! probability into a chosen mode.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::MILES_PER_KM;
use crate::models::{Mode, ModeEvaluation};

/// Upper edge of the short-haul service class, exclusive, in miles (150 km).
pub const UAM_MAX_MI: f64 = 150.0 * MILES_PER_KM;

/// Upper edge of the regional service class, inclusive, in miles (800 km).
pub const RAM_MAX_MI: f64 = 800.0 * MILES_PER_KM;

/// Generalized cost of one trip by one mode, with the pieces it was built
/// from. The cost is a disutility, so `gct_usd` is never positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GctResult {
    pub gct_usd: f64,
    pub monetary_usd: f64,
    pub opportunity_usd: f64,
    pub risk_usd: f64,
    pub wage_usd_per_h: f64,
}

/// Generalized cost: monetary outlay, time valued at the traveler's wage,
/// and monetized risk, negated into a utility.
pub fn gct(monetary_usd: f64, wage_usd_per_h: f64, time_h: f64, risk_usd: f64) -> Result<GctResult> {
    for (name, v) in [
        ("monetary cost", monetary_usd),
        ("wage", wage_usd_per_h),
        ("time", time_h),
        ("risk", risk_usd),
    ] {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidInput(format!(
                "{name} must be finite and non-negative, got {v}"
            )));
        }
    }
    let opportunity_usd = wage_usd_per_h * time_h;
    Ok(GctResult {
        gct_usd: -(monetary_usd + opportunity_usd + risk_usd),
        monetary_usd,
        opportunity_usd,
        risk_usd,
        wage_usd_per_h,
    })
}

/// Generalized cost of a full mode evaluation at the given wage.
pub fn gct_of(evaluation: &ModeEvaluation, wage_usd_per_h: f64) -> Result<GctResult> {
    gct(
        evaluation.monetary_usd,
        wage_usd_per_h,
        evaluation.time_h,
        evaluation.risk_usd,
    )
}

/// A trip's wage rate: the mean of the origin and destination tract wages.
pub fn trip_wage(origin_wage: f64, dest_wage: f64) -> f64 {
    (origin_wage + dest_wage) / 2.0
}

/// Probability the air mode is chosen, from the two generalized costs under
/// a binary logit with the given scale.
///
/// Evaluated as a numerically stable sigmoid of `scale * (gct_aam - gct_ground)`
/// so equal costs give exactly 0.5 and extreme gaps saturate cleanly.
pub fn p_aam(gct_ground: &GctResult, gct_aam: &GctResult, scale: f64) -> Result<f64> {
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::Config(format!("logit scale must be positive, got {scale}")));
    }
    let x = scale * (gct_aam.gct_usd - gct_ground.gct_usd);
    Ok(sigmoid(x))
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        let e = (-x).exp();
        1.0 / (1.0 + e)
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Distance-based service class of the flown segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RangeClass {
    /// Urban: under 150 km flown.
    #[serde(rename = "UAM")]
    Uam,
    /// Regional: 150 km to 800 km flown, inclusive at the top.
    #[serde(rename = "RAM")]
    Ram,
    /// Beyond 800 km: outside the modeled service envelope.
    #[serde(rename = "OUT_OF_RANGE")]
    OutOfRange,
    /// No air segment exists (both ends share a hub).
    #[serde(rename = "AAM_INFEASIBLE")]
    AamInfeasible,
}

impl RangeClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            RangeClass::Uam => "UAM",
            RangeClass::Ram => "RAM",
            RangeClass::OutOfRange => "OUT_OF_RANGE",
            RangeClass::AamInfeasible => "AAM_INFEASIBLE",
        }
    }
}

impl fmt::Display for RangeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RangeClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "UAM" => Ok(RangeClass::Uam),
            "RAM" => Ok(RangeClass::Ram),
            "OUT_OF_RANGE" => Ok(RangeClass::OutOfRange),
            "AAM_INFEASIBLE" => Ok(RangeClass::AamInfeasible),
            other => Err(format!("unknown range class {other:?}")),
        }
    }
}

/// Classifies a flown distance. Zero distance means no usable air segment.
pub fn classify_range(air_distance_mi: f64) -> RangeClass {
    if air_distance_mi <= 0.0 {
        RangeClass::AamInfeasible
    } else if air_distance_mi < UAM_MAX_MI {
        RangeClass::Uam
    } else if air_distance_mi <= RAM_MAX_MI {
        RangeClass::Ram
    } else {
        RangeClass::OutOfRange
    }
}

/// How a probability becomes a chosen mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecisionRule {
    /// Choose air when the probability strictly exceeds `tau`.
    Threshold { tau: f64 },
    /// Draw a uniform variate from a trip-specific seed; choose air when it
    /// falls below the probability.
    Sample { seed: u64 },
}

/// Applies the rule. Ties under the threshold rule keep the ground mode.
pub fn decide(p_aam: f64, rule: DecisionRule) -> Result<Mode> {
    if !(0.0..=1.0).contains(&p_aam) {
        return Err(Error::InvalidInput(format!(
            "choice probability must lie in [0, 1], got {p_aam}"
        )));
    }
    match rule {
        DecisionRule::Threshold { tau } => {
            if !(0.0..=1.0).contains(&tau) {
                return Err(Error::Config(format!(
                    "decision threshold must lie in [0, 1], got {tau}"
                )));
            }
            Ok(if p_aam > tau { Mode::Aam } else { Mode::Ground })
        }
        DecisionRule::Sample { seed } => {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let u: f64 = rng.random();
            Ok(if u < p_aam { Mode::Aam } else { Mode::Ground })
        }
    }
}

/// One draw of the random-utility view of the same choice: each mode's
/// utility is its generalized cost plus standard Gumbel noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilitySample {
    pub u_ground: f64,
    pub u_aam: f64,
    pub epsilon_ground: f64,
    pub epsilon_aam: f64,
}

impl UtilitySample {
    pub fn chosen(&self) -> Mode {
        if self.u_aam > self.u_ground {
            Mode::Aam
        } else {
            Mode::Ground
        }
    }
}

/// Draws the Gumbel-noise utilities for one trip. The scale stretches the
/// systematic part, matching how it enters the closed-form probability.
pub fn sample_utilities(
    gct_ground: &GctResult,
    gct_aam: &GctResult,
    scale: f64,
    seed: u64,
) -> Result<UtilitySample> {
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::Config(format!("logit scale must be positive, got {scale}")));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let gumbel = rand_distr::Gumbel::new(0.0, 1.0)
        .map_err(|e| Error::Config(format!("bad Gumbel parameters: {e}")))?;
    let epsilon_ground = gumbel.sample(&mut rng);
    let epsilon_aam = gumbel.sample(&mut rng);
    Ok(UtilitySample {
        u_ground: scale * gct_ground.gct_usd + epsilon_ground,
        u_aam: scale * gct_aam.gct_usd + epsilon_aam,
        epsilon_ground,
        epsilon_aam,
    })
}

/// Share of an air trip's generalized cost attributable to the airborne
/// segment. `None` when the total cost is zero (nothing to attribute).
pub fn air_share(air_segment: &GctResult, total: &GctResult) -> Option<f64> {
    if total.gct_usd == 0.0 {
        return None;
    }
    Some(air_segment.gct_usd / total.gct_usd)
}

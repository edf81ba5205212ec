//! Per-mode trip evaluation: out-of-pocket cost, door-to-door time, and
//! monetized crash risk for driving the whole way versus driving to a hub,
//! flying, and driving on from the far hub.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::calibrate::{predict_block, predict_fare, BlockTimeModel, FareModel};
use crate::error::{Error, Result};
use crate::geo::HubAirport;
use crate::ingest::EconomicParams;
use crate::router::GroundLeg;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "GROUND")]
    Ground,
    #[serde(rename = "AAM")]
    Aam,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Ground => "GROUND",
            Mode::Aam => "AAM",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "GROUND" => Ok(Mode::Ground),
            "AAM" => Ok(Mode::Aam),
            other => Err(format!("unknown mode {other:?} (expected GROUND or AAM)")),
        }
    }
}

/// The three raw ingredients of a mode's generalized cost, before the
/// traveler's wage turns time into dollars.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeEvaluation {
    pub mode: Mode,
    pub monetary_usd: f64,
    pub time_h: f64,
    pub risk_usd: f64,
    /// True when any model prediction fell outside its calibration domain.
    pub extrapolated: bool,
}

/// The air option for one trip: drive to the origin hub, fly, drive on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AamItinerary {
    pub origin_leg: GroundLeg,
    pub air_distance_mi: f64,
    pub dest_leg: GroundLeg,
}

impl AamItinerary {
    pub fn new(origin_leg: GroundLeg, air_distance_mi: f64, dest_leg: GroundLeg) -> Result<Self> {
        if !air_distance_mi.is_finite() || air_distance_mi < 0.0 {
            return Err(Error::InvalidInput(format!(
                "air distance must be finite and non-negative, got {air_distance_mi}"
            )));
        }
        Ok(Self { origin_leg, air_distance_mi, dest_leg })
    }

    pub fn ground_distance_mi(&self) -> f64 {
        self.origin_leg.distance_mi() + self.dest_leg.distance_mi()
    }

    pub fn ground_time_h(&self) -> f64 {
        self.origin_leg.time_h() + self.dest_leg.time_h()
    }
}

/// Driving cost: the per-mile operating rate over the driven distance.
pub fn ground_cost(leg: &GroundLeg, params: &EconomicParams) -> f64 {
    params.mileage_rate_usd_per_mi * leg.distance_mi()
}

/// Driving time is just the routed time.
pub fn ground_time(leg: &GroundLeg) -> f64 {
    leg.time_h()
}

/// Air-trip cost: driving cost of both access legs plus the predicted fare
/// for the flown distance. Zero air distance means there is nothing to fly
/// and the itinerary is infeasible.
pub fn aam_cost(
    itinerary: &AamItinerary,
    fare: &FareModel,
    params: &EconomicParams,
) -> Result<(f64, bool)> {
    if itinerary.air_distance_mi <= 0.0 {
        return Err(Error::Infeasible(
            "air itinerary has zero flight distance (origin and destination share a hub)".into(),
        ));
    }
    let fare = predict_fare(fare, itinerary.air_distance_mi)?;
    let drive = ground_cost(&itinerary.origin_leg, params)
        + ground_cost(&itinerary.dest_leg, params);
    Ok((drive + fare.value, fare.extrapolated))
}

/// Air-trip door-to-door time: drive to the hub, departure processing,
/// block time, arrival processing, drive on.
pub fn aam_time(
    itinerary: &AamItinerary,
    blocktime: &BlockTimeModel,
    origin_hub: &HubAirport,
    dest_hub: &HubAirport,
) -> Result<(f64, bool)> {
    if itinerary.air_distance_mi <= 0.0 {
        return Err(Error::Infeasible(
            "air itinerary has zero flight distance (origin and destination share a hub)".into(),
        ));
    }
    let block = predict_block(blocktime, itinerary.air_distance_mi)?;
    let total = itinerary.origin_leg.time_h()
        + origin_hub.depart_processing_h
        + block.value
        + dest_hub.arrive_processing_h
        + itinerary.dest_leg.time_h();
    Ok((total, block.extrapolated))
}

/// Monetized crash risk of covering `distance_mi` by the given mode:
/// value of statistical life times expected fatalities.
pub fn trip_risk(mode: Mode, distance_mi: f64, params: &EconomicParams) -> f64 {
    let rate = match mode {
        Mode::Ground => params.ground_fatalities_per_mi,
        Mode::Aam => params.air_fatalities_per_mi,
    };
    params.vsl_usd * rate * distance_mi
}

/// Risk of a full air itinerary: ground rate on the access legs, air rate on
/// the flown segment.
pub fn aam_trip_risk(itinerary: &AamItinerary, params: &EconomicParams) -> f64 {
    trip_risk(Mode::Ground, itinerary.ground_distance_mi(), params)
        + trip_risk(Mode::Aam, itinerary.air_distance_mi, params)
}

/// Evaluates the drive-only option.
pub fn evaluate_ground(leg: &GroundLeg, params: &EconomicParams) -> ModeEvaluation {
    ModeEvaluation {
        mode: Mode::Ground,
        monetary_usd: ground_cost(leg, params),
        time_h: ground_time(leg),
        risk_usd: trip_risk(Mode::Ground, leg.distance_mi(), params),
        extrapolated: false,
    }
}

/// Evaluates the air option end to end.
pub fn evaluate_aam(
    itinerary: &AamItinerary,
    fare: &FareModel,
    blocktime: &BlockTimeModel,
    origin_hub: &HubAirport,
    dest_hub: &HubAirport,
    params: &EconomicParams,
) -> Result<ModeEvaluation> {
    let (monetary_usd, fare_extrapolated) = aam_cost(itinerary, fare, params)?;
    let (time_h, block_extrapolated) = aam_time(itinerary, blocktime, origin_hub, dest_hub)?;
    Ok(ModeEvaluation {
        mode: Mode::Aam,
        monetary_usd,
        time_h,
        risk_usd: aam_trip_risk(itinerary, params),
        extrapolated: fare_extrapolated || block_extrapolated,
    })
}

//! Distance sweeps: evaluates a canonical trip at each grid distance to show
//! how the two generalized costs, the choice probability, and the airborne
//! cost share move with trip length, and where the probability first crosses
//! one half on the way up.
//!
//! The canonical trip covers the same door-to-door great-circle distance by
//! both modes: drive it all, or drive a fixed access leg to a hub on each
//! end and fly the full grid distance between hubs. Legs always use the
//! synthetic road model so the sweep is a pure function of the models and
//! configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calibrate::{predict_block, predict_fare, ModelSet};
use crate::choice::{air_share, p_aam};
use crate::error::{Error, Result};
use crate::ingest::EconomicParams;
use crate::models::{aam_trip_risk, evaluate_ground, AamItinerary};
use crate::pipeline::config::RunConfig;
use crate::pipeline::segment_gcts;
use crate::router::{GroundLeg, LegSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveStatus {
    Ok,
    Infeasible,
}

/// One grid point of the sweep. Value columns are empty at infeasible
/// distances (nothing to fly).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub distance_mi: f64,
    pub gct_ground_usd: Option<f64>,
    pub gct_aam_usd: Option<f64>,
    pub p_aam: Option<f64>,
    pub p_diff: Option<f64>,
    pub air_share: Option<f64>,
    pub extrapolated: bool,
    pub status: CurveStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveBundle {
    pub rows: Vec<CurveRow>,
    /// Grid distance at which the probability first rises through one half,
    /// if it does.
    pub crossing_distance_mi: Option<f64>,
}

impl CurveBundle {
    /// Number of upward half-crossings between consecutive feasible grid
    /// points. A well-behaved sweep has exactly one.
    pub fn upward_crossings(&self) -> usize {
        let mut count = 0;
        let mut prev: Option<f64> = None;
        for row in &self.rows {
            let Some(p) = row.p_aam else { continue };
            if let Some(q) = prev {
                if q <= 0.5 && p > 0.5 {
                    count += 1;
                }
            }
            prev = Some(p);
        }
        count
    }
}

/// Parses a `start:end:step` grid of distances in miles.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, end, step] = parts.as_slice() else {
        return Err(Error::InvalidInput(format!(
            "grid must look like start:end:step, got {spec:?}"
        )));
    };
    let parse = |label: &str, text: &str| -> Result<f64> {
        text.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| {
                Error::InvalidInput(format!("bad grid {label} {text:?} in {spec:?}"))
            })
    };
    let start = parse("start", start)?;
    let end = parse("end", end)?;
    let step = parse("step", step)?;
    if start < 0.0 {
        return Err(Error::InvalidInput(format!("grid start must be >= 0, got {start}")));
    }
    if step <= 0.0 {
        return Err(Error::InvalidInput(format!("grid step must be positive, got {step}")));
    }
    if end < start {
        return Err(Error::InvalidInput(format!(
            "grid end {end} lies before start {start}"
        )));
    }
    let mut grid = Vec::new();
    let mut i = 0u64;
    loop {
        // Multiply instead of accumulating so long grids don't drift.
        let d = start + step * i as f64;
        if d > end + 1e-9 {
            break;
        }
        grid.push(d);
        i += 1;
    }
    Ok(grid)
}

fn synthetic_leg(gc_mi: f64, config: &RunConfig) -> Result<GroundLeg> {
    let distance_mi = config.synthetic_circuity_factor * gc_mi;
    GroundLeg::new(
        distance_mi,
        distance_mi / config.synthetic_avg_speed_mph,
        LegSource::Synthetic,
    )
}

/// Sweeps the canonical trip across the grid.
pub fn emit_curves(
    models: &ModelSet,
    params: &EconomicParams,
    config: &RunConfig,
    grid: &[f64],
) -> Result<CurveBundle> {
    config.validate()?;
    let wage = config.curve_wage_usd_per_h;
    let mut rows = Vec::with_capacity(grid.len());
    let mut crossing = None;
    let mut prev_p: Option<f64> = None;

    for &distance_mi in grid {
        if !distance_mi.is_finite() || distance_mi < 0.0 {
            return Err(Error::InvalidInput(format!(
                "grid distances must be finite and non-negative, got {distance_mi}"
            )));
        }
        if distance_mi <= 0.0 {
            rows.push(CurveRow {
                distance_mi,
                gct_ground_usd: None,
                gct_aam_usd: None,
                p_aam: None,
                p_diff: None,
                air_share: None,
                extrapolated: false,
                status: CurveStatus::Infeasible,
            });
            continue;
        }

        // Drive-it-all alternative over the same door-to-door distance.
        let ground_leg = synthetic_leg(distance_mi, config)?;
        let ground_eval = evaluate_ground(&ground_leg, params);
        let gct_ground = crate::choice::gct_of(&ground_eval, wage)?;

        // Fly it: fixed access legs, full grid distance airborne.
        let access = synthetic_leg(config.curve_access_leg_mi, config)?;
        let itinerary = AamItinerary::new(access, distance_mi, access)?;
        let fare = predict_fare(&models.fare, distance_mi)?;
        let block = predict_block(&models.blocktime, distance_mi)?;
        let (gct_air_segment, _ground_segment) = segment_gcts(
            &itinerary,
            fare.value,
            block.value,
            config.dwell_depart_h,
            config.dwell_arrive_h,
            wage,
            params,
        )?;
        let gct_aam = crate::choice::gct(
            fare.value + params.mileage_rate_usd_per_mi * itinerary.ground_distance_mi(),
            wage,
            itinerary.ground_time_h()
                + config.dwell_depart_h
                + block.value
                + config.dwell_arrive_h,
            aam_trip_risk(&itinerary, params),
        )?;
        let p = p_aam(&gct_ground, &gct_aam, config.logit_scale)?;
        if let Some(q) = prev_p {
            if q <= 0.5 && p > 0.5 && crossing.is_none() {
                crossing = Some(distance_mi);
            }
        }
        prev_p = Some(p);
        rows.push(CurveRow {
            distance_mi,
            gct_ground_usd: Some(gct_ground.gct_usd),
            gct_aam_usd: Some(gct_aam.gct_usd),
            p_aam: Some(p),
            p_diff: Some(p - 0.5),
            air_share: air_share(&gct_air_segment, &gct_aam),
            extrapolated: fare.extrapolated || block.extrapolated,
            status: CurveStatus::Ok,
        });
    }
    Ok(CurveBundle { rows, crossing_distance_mi: crossing })
}

pub fn write_curves(path: &Path, bundle: &CurveBundle) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    for row in &bundle.rows {
        writer
            .serialize(row)
            .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    }
    writer
        .flush()
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    Ok(())
}

pub fn read_curves(path: &Path) -> Result<Vec<CurveRow>> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    let mut rows = Vec::new();
    for (i, row) in reader.deserialize::<CurveRow>().enumerate() {
        rows.push(row.map_err(|e| Error::malformed(path, i + 1, e.to_string()))?);
    }
    Ok(rows)
}

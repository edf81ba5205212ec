//! Aggregations over the per-trip table: count-weighted means of the key
//! metrics split by chosen mode, and demographic composition shares.

use std::path::Path;

use crate::error::{Error, Result};
use crate::ingest::{AgeBand, EarningBand, Industry};
use crate::models::Mode;
use crate::pipeline::EvalRow;

/// Count-weighted means of one variable for trips that stayed on the ground
/// versus trips that chose the air mode. `None` marks an empty partition
/// (or one where the variable never applied).
#[derive(Debug, Clone, PartialEq)]
pub struct MeanRow {
    pub variable: &'static str,
    pub non_aam: Option<f64>,
    pub aam: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanTable {
    pub rows: Vec<MeanRow>,
}

/// The variables of the means table, in output order. Air-derived variables
/// skip trips with no air option; the od variables cover every trip.
const MEAN_VARIABLES: [(&str, fn(&EvalRow) -> Option<f64>); 8] = [
    ("gct_air_segment_usd", |r| r.gct_air_segment_usd),
    ("gct_ground_segment_usd", |r| r.gct_ground_segment_usd),
    ("ground_time_h", |r| r.access_time_h),
    ("ground_distance_mi", |r| r.access_distance_mi),
    ("air_distance_mi", |r| r.air_distance_mi),
    ("air_time_h", |r| r.air_block_h),
    ("od_distance_mi", |r| Some(r.od_great_circle_mi)),
    ("od_ground_time_h", |r| Some(r.od_ground_time_h)),
];

fn weighted_mean(rows: &[EvalRow], chosen: Mode, select: fn(&EvalRow) -> Option<f64>) -> Option<f64> {
    let mut weight = 0.0;
    let mut sum = 0.0;
    for row in rows.iter().filter(|r| r.chosen == chosen) {
        if let Some(v) = select(row) {
            let w = row.count as f64;
            weight += w;
            sum += w * v;
        }
    }
    (weight > 0.0).then(|| sum / weight)
}

/// Builds the means table from evaluated rows.
pub fn aggregate_means(rows: &[EvalRow]) -> MeanTable {
    let table = MEAN_VARIABLES
        .iter()
        .map(|&(variable, select)| MeanRow {
            variable,
            non_aam: weighted_mean(rows, Mode::Ground, select),
            aam: weighted_mean(rows, Mode::Aam, select),
        })
        .collect();
    MeanTable { rows: table }
}

pub fn write_means(path: &Path, table: &MeanTable) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    let emit = |writer: &mut csv::Writer<std::fs::File>, record: [String; 3]| {
        writer
            .write_record(record)
            .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))
    };
    emit(&mut writer, ["variable".into(), "non_aam".into(), "aam".into()])?;
    for row in &table.rows {
        emit(
            &mut writer,
            [
                row.variable.to_string(),
                row.non_aam.map(|v| v.to_string()).unwrap_or_default(),
                row.aam.map(|v| v.to_string()).unwrap_or_default(),
            ],
        )?;
    }
    writer
        .flush()
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    Ok(())
}

/// Percentage of trip volume in one demographic band, over all trips and
/// over air-choosing trips.
#[derive(Debug, Clone, PartialEq)]
pub struct ShareRow {
    pub feature: &'static str,
    pub band: &'static str,
    pub all_trips_pct: f64,
    pub aam_trips_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShareTable {
    pub rows: Vec<ShareRow>,
}

fn shares_for(
    rows: &[EvalRow],
    feature: &'static str,
    bands: &[&'static str],
    band_of: fn(&EvalRow) -> &'static str,
) -> Vec<ShareRow> {
    let mut all = vec![0.0f64; bands.len()];
    let mut aam = vec![0.0f64; bands.len()];
    let mut all_total = 0.0;
    let mut aam_total = 0.0;
    for row in rows {
        let w = row.count as f64;
        let i = bands
            .iter()
            .position(|b| *b == band_of(row))
            .expect("band lists cover every variant");
        all[i] += w;
        all_total += w;
        if row.chosen == Mode::Aam {
            aam[i] += w;
            aam_total += w;
        }
    }
    bands
        .iter()
        .enumerate()
        .map(|(i, &band)| ShareRow {
            feature,
            band,
            all_trips_pct: if all_total > 0.0 { 100.0 * all[i] / all_total } else { 0.0 },
            aam_trips_pct: if aam_total > 0.0 { 100.0 * aam[i] / aam_total } else { 0.0 },
        })
        .collect()
}

/// Demographic composition of all trips versus air-choosing trips, as
/// percentages of trip volume. Bands appear in declaration order under
/// features `age`, `earning`, and `industry`.
pub fn demographic_shares(rows: &[EvalRow]) -> ShareTable {
    let age_bands: Vec<&'static str> = AgeBand::ALL.iter().map(|b| b.as_str()).collect();
    let earning_bands: Vec<&'static str> = EarningBand::ALL.iter().map(|b| b.as_str()).collect();
    let industry_bands: Vec<&'static str> = Industry::ALL.iter().map(|b| b.as_str()).collect();
    let mut out = Vec::new();
    out.extend(shares_for(rows, "age", &age_bands, |r| r.age.as_str()));
    out.extend(shares_for(rows, "earning", &earning_bands, |r| r.earning.as_str()));
    out.extend(shares_for(rows, "industry", &industry_bands, |r| r.industry.as_str()));
    ShareTable { rows: out }
}

pub fn write_shares(path: &Path, table: &ShareTable) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    writer
        .write_record(["feature", "band", "all_trips_pct", "aam_trips_pct"])
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    for row in &table.rows {
        writer
            .write_record([
                row.feature.to_string(),
                row.band.to_string(),
                row.all_trips_pct.to_string(),
                row.aam_trips_pct.to_string(),
            ])
            .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    }
    writer
        .flush()
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    Ok(())
}

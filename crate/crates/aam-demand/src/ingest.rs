//! Input data loading: tract/hub/trip tables, fare and block-time samples,
//! and the economic-parameters file.
//!
//! All tabular inputs are UTF-8 CSV with exact headers; the parameters file
//! is a flat `key=value` document. Errors name the file and the 1-based data
//! row (or line) that caused them. Loaders preserve input order, and every
//! loader has a matching writer so tables round-trip losslessly.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{CensusTract, GeoPoint, HubAirport};

/// Commuter age bands as encoded in origin-destination employment data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AgeBand {
    #[serde(rename = "LE29")]
    Le29,
    #[serde(rename = "A30_54")]
    A30To54,
    #[serde(rename = "GE55")]
    Ge55,
    #[serde(rename = "UNKNOWN")]
    Unknown,
}

/// Monthly-earnings bands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EarningBand {
    #[serde(rename = "LE1250")]
    Le1250,
    #[serde(rename = "E1251_3333")]
    E1251To3333,
    #[serde(rename = "GT3333")]
    Gt3333,
    #[serde(rename = "UNKNOWN")]
    Unknown,
}

/// Coarse industry sectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Industry {
    #[serde(rename = "GOODS")]
    Goods,
    #[serde(rename = "TRADE_TRANSPORT_UTIL")]
    TradeTransportUtil,
    #[serde(rename = "OTHER_SERVICES")]
    OtherServices,
    #[serde(rename = "UNKNOWN")]
    Unknown,
}

macro_rules! band_strings {
    ($ty:ident { $($variant:ident => $token:literal),+ $(,)? }) => {
        impl $ty {
            /// All bands in declaration order, used when enumerating shares.
            pub const ALL: &'static [$ty] = &[$($ty::$variant),+];

            pub fn as_str(&self) -> &'static str {
                match self {
                    $($ty::$variant => $token),+
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> std::result::Result<Self, String> {
                match s {
                    $($token => Ok($ty::$variant),)+
                    other => Err(format!(
                        concat!("unknown ", stringify!($ty), " token {:?}"),
                        other
                    )),
                }
            }
        }
    };
}

band_strings!(AgeBand {
    Le29 => "LE29",
    A30To54 => "A30_54",
    Ge55 => "GE55",
    Unknown => "UNKNOWN",
});

band_strings!(EarningBand {
    Le1250 => "LE1250",
    E1251To3333 => "E1251_3333",
    Gt3333 => "GT3333",
    Unknown => "UNKNOWN",
});

band_strings!(Industry {
    Goods => "GOODS",
    TradeTransportUtil => "TRADE_TRANSPORT_UTIL",
    OtherServices => "OTHER_SERVICES",
    Unknown => "UNKNOWN",
});

/// One origin-destination demand row: how many commuters travel between two
/// tracts, with optional demographic attribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripDemand {
    pub origin_tract_id: String,
    pub dest_tract_id: String,
    pub trip_count: u64,
    pub age_band: AgeBand,
    pub earning_band: EarningBand,
    pub industry: Industry,
}

/// An observed fare: total fare in USD for one passenger over a flight of
/// the given length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FareSample {
    pub distance_mi: f64,
    pub fare_usd: f64,
}

/// An observed block time (brakes-release to brakes-set) for a flight of the
/// given length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockTimeSample {
    pub distance_mi: f64,
    pub block_h: f64,
}

/// Economy-wide constants used to monetize trips. Fatality rates are stored
/// already normalized to per-mile; converting published per-100-million-mile
/// figures is the data preparer's job.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EconomicParams {
    pub mileage_rate_usd_per_mi: f64,
    pub vsl_usd: f64,
    pub ground_fatalities_per_mi: f64,
    pub air_fatalities_per_mi: f64,
}

impl EconomicParams {
    pub fn new(
        mileage_rate_usd_per_mi: f64,
        vsl_usd: f64,
        ground_fatalities_per_mi: f64,
        air_fatalities_per_mi: f64,
    ) -> Result<Self> {
        if !mileage_rate_usd_per_mi.is_finite() || mileage_rate_usd_per_mi < 0.0 {
            return Err(Error::InvalidInput(format!(
                "mileage_rate_usd_per_mi must be >= 0, got {mileage_rate_usd_per_mi}"
            )));
        }
        if !vsl_usd.is_finite() || vsl_usd <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "vsl_usd must be > 0, got {vsl_usd}"
            )));
        }
        for (key, v) in [
            ("ground_fatalities_per_mi", ground_fatalities_per_mi),
            ("air_fatalities_per_mi", air_fatalities_per_mi),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidInput(format!("{key} must be >= 0, got {v}")));
            }
        }
        Ok(EconomicParams {
            mileage_rate_usd_per_mi,
            vsl_usd,
            ground_fatalities_per_mi,
            air_fatalities_per_mi,
        })
    }
}

/// A `key=value` line from a parameters or configuration file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KvPair {
    pub key: String,
    pub value: String,
    /// 1-based line number in the source file.
    pub line: usize,
}

/// Contents of a parameters file: the four economic constants plus any
/// run-configuration overrides (dotted keys such as `router.mode`), which the
/// pipeline validates and applies on top of the configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamsFile {
    pub economic: EconomicParams,
    pub overrides: Vec<KvPair>,
}

const TRACT_HEADER: &[&str] = &["tract_id", "lat", "lon", "median_hourly_wage"];
const HUB_HEADER_SHORT: &[&str] = &["code", "lat", "lon"];
const HUB_HEADER_FULL: &[&str] = &["code", "lat", "lon", "depart_h", "arrive_h"];
const TRIP_HEADER_SHORT: &[&str] = &["origin", "dest", "count"];
const TRIP_HEADER_FULL: &[&str] = &["origin", "dest", "count", "age", "earning", "industry"];
const FARE_HEADER: &[&str] = &["distance_mi", "fare_usd"];
const BLOCKTIME_HEADER: &[&str] = &["distance_mi", "block_h"];

const PARAM_KEYS: &[&str] = &[
    "mileage_rate_usd_per_mi",
    "vsl_usd",
    "ground_fatalities_per_mi",
    "air_fatalities_per_mi",
];

struct CsvTable {
    path: PathBuf,
    header: Vec<String>,
    /// (1-based data row index, fields)
    rows: Vec<(usize, Vec<String>)>,
}

impl CsvTable {
    fn read(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_path(path)
            .map_err(|e| match e.kind() {
                csv::ErrorKind::Io(_) => {
                    Error::io(path, std::io::Error::new(std::io::ErrorKind::Other, e))
                }
                _ => Error::malformed(path, 0, e.to_string()),
            })?;
        let header = reader
            .headers()
            .map_err(|e| Error::malformed(path, 0, e.to_string()))?
            .iter()
            .map(str::to_owned)
            .collect();
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::malformed(path, i + 1, e.to_string()))?;
            rows.push((i + 1, record.iter().map(str::to_owned).collect()));
        }
        Ok(CsvTable {
            path: path.to_owned(),
            header,
            rows,
        })
    }

    fn expect_header(&self, allowed: &[&[&str]]) -> Result<usize> {
        for (i, candidate) in allowed.iter().enumerate() {
            if self.header.iter().map(String::as_str).eq(candidate.iter().copied()) {
                return Ok(i);
            }
        }
        let expected = allowed
            .iter()
            .map(|h| h.join(","))
            .collect::<Vec<_>>()
            .join("` or `");
        Err(Error::malformed(
            &self.path,
            0,
            format!("header `{}` does not match `{expected}`", self.header.join(",")),
        ))
    }

    fn expect_width(&self, row: usize, fields: &[String], width: usize) -> Result<()> {
        if fields.len() != width {
            return Err(Error::malformed(
                &self.path,
                row,
                format!("expected {width} columns, found {}", fields.len()),
            ));
        }
        Ok(())
    }
}

fn parse_num<T: FromStr>(path: &Path, row: usize, name: &str, raw: &str) -> Result<T> {
    raw.trim()
        .parse::<T>()
        .map_err(|_| Error::malformed(path, row, format!("{name}: cannot parse {raw:?}")))
}

fn row_context(path: &Path, row: usize, err: Error) -> Error {
    match err {
        Error::InvalidInput(msg) => Error::malformed(path, row, msg),
        other => other,
    }
}

/// Loads the census-tract table. Header: `tract_id,lat,lon,median_hourly_wage`.
/// Tract ids must be unique.
pub fn load_tracts(path: &Path) -> Result<Vec<CensusTract>> {
    let table = CsvTable::read(path)?;
    table.expect_header(&[TRACT_HEADER])?;
    let mut seen = HashSet::new();
    let mut tracts = Vec::with_capacity(table.rows.len());
    for (row, fields) in &table.rows {
        table.expect_width(*row, fields, 4)?;
        let id = fields[0].trim();
        if !seen.insert(id.to_owned()) {
            return Err(Error::malformed(path, *row, format!("duplicate tract id {id:?}")));
        }
        let lat = parse_num::<f64>(path, *row, "lat", &fields[1])?;
        let lon = parse_num::<f64>(path, *row, "lon", &fields[2])?;
        let wage = parse_num::<f64>(path, *row, "median_hourly_wage", &fields[3])?;
        let centroid = GeoPoint::new(lat, lon).map_err(|e| row_context(path, *row, e))?;
        let tract =
            CensusTract::new(id, centroid, wage).map_err(|e| row_context(path, *row, e))?;
        tracts.push(tract);
    }
    Ok(tracts)
}

/// Writes a tract table in the exact schema `load_tracts` reads.
pub fn write_tracts(path: &Path, tracts: &[CensusTract]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record(TRACT_HEADER).map_err(|e| csv_io(path, e))?;
    for t in tracts {
        w.write_record(&[
            t.tract_id.clone(),
            t.centroid.lat_deg().to_string(),
            t.centroid.lon_deg().to_string(),
            t.median_hourly_wage_usd.to_string(),
        ])
        .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Loads the hub-airport table. Header: `code,lat,lon` or
/// `code,lat,lon,depart_h,arrive_h`; missing or empty processing-time cells
/// take the supplied defaults. Hub codes must be unique.
pub fn load_hubs(path: &Path, default_depart_h: f64, default_arrive_h: f64) -> Result<Vec<HubAirport>> {
    let table = CsvTable::read(path)?;
    let full = table.expect_header(&[HUB_HEADER_SHORT, HUB_HEADER_FULL])? == 1;
    let mut seen = HashSet::new();
    let mut hubs = Vec::with_capacity(table.rows.len());
    for (row, fields) in &table.rows {
        table.expect_width(*row, fields, if full { 5 } else { 3 })?;
        let code = fields[0].trim();
        if !seen.insert(code.to_owned()) {
            return Err(Error::malformed(path, *row, format!("duplicate hub code {code:?}")));
        }
        let lat = parse_num::<f64>(path, *row, "lat", &fields[1])?;
        let lon = parse_num::<f64>(path, *row, "lon", &fields[2])?;
        let depart = match fields.get(3).map(|s| s.trim()) {
            Some(s) if !s.is_empty() => parse_num::<f64>(path, *row, "depart_h", s)?,
            _ => default_depart_h,
        };
        let arrive = match fields.get(4).map(|s| s.trim()) {
            Some(s) if !s.is_empty() => parse_num::<f64>(path, *row, "arrive_h", s)?,
            _ => default_arrive_h,
        };
        let location = GeoPoint::new(lat, lon).map_err(|e| row_context(path, *row, e))?;
        let hub = HubAirport::new(code, location, depart, arrive)
            .map_err(|e| row_context(path, *row, e))?;
        hubs.push(hub);
    }
    Ok(hubs)
}

/// Writes a hub table with explicit processing times (the 5-column schema).
pub fn write_hubs(path: &Path, hubs: &[HubAirport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record(HUB_HEADER_FULL).map_err(|e| csv_io(path, e))?;
    for h in hubs {
        w.write_record(&[
            h.code.clone(),
            h.location.lat_deg().to_string(),
            h.location.lon_deg().to_string(),
            h.depart_processing_h.to_string(),
            h.arrive_processing_h.to_string(),
        ])
        .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Loads the trip-demand table and validates every tract reference against
/// the given tract table. Header: `origin,dest,count` or
/// `origin,dest,count,age,earning,industry`. Empty or absent demographic
/// cells become `UNKNOWN`. Counts must be at least 1.
pub fn load_trips(path: &Path, tracts: &[CensusTract]) -> Result<Vec<TripDemand>> {
    let known: HashSet<&str> = tracts.iter().map(|t| t.tract_id.as_str()).collect();
    let table = CsvTable::read(path)?;
    let full = table.expect_header(&[TRIP_HEADER_SHORT, TRIP_HEADER_FULL])? == 1;
    let mut trips = Vec::with_capacity(table.rows.len());
    for (row, fields) in &table.rows {
        table.expect_width(*row, fields, if full { 6 } else { 3 })?;
        let origin = fields[0].trim();
        let dest = fields[1].trim();
        for id in [origin, dest] {
            if !known.contains(id) {
                return Err(Error::malformed(
                    path,
                    *row,
                    format!("tract id {id:?} not present in the tract table"),
                ));
            }
        }
        let count = parse_num::<u64>(path, *row, "count", &fields[2])?;
        if count == 0 {
            return Err(Error::malformed(path, *row, "count must be at least 1"));
        }
        let band_or_unknown = |idx: usize| -> &str {
            match fields.get(idx).map(|s| s.trim()) {
                Some(s) if !s.is_empty() => s,
                _ => "UNKNOWN",
            }
        };
        let age: AgeBand = band_or_unknown(3)
            .parse()
            .map_err(|e| Error::malformed(path, *row, e))?;
        let earning: EarningBand = band_or_unknown(4)
            .parse()
            .map_err(|e| Error::malformed(path, *row, e))?;
        let industry: Industry = band_or_unknown(5)
            .parse()
            .map_err(|e| Error::malformed(path, *row, e))?;
        trips.push(TripDemand {
            origin_tract_id: origin.to_owned(),
            dest_tract_id: dest.to_owned(),
            trip_count: count,
            age_band: age,
            earning_band: earning,
            industry,
        });
    }
    Ok(trips)
}

/// Writes a trip table in the full 6-column schema with explicit `UNKNOWN`
/// demographic cells.
pub fn write_trips(path: &Path, trips: &[TripDemand]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record(TRIP_HEADER_FULL).map_err(|e| csv_io(path, e))?;
    for t in trips {
        w.write_record(&[
            t.origin_tract_id.clone(),
            t.dest_tract_id.clone(),
            t.trip_count.to_string(),
            t.age_band.to_string(),
            t.earning_band.to_string(),
            t.industry.to_string(),
        ])
        .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Loads fare observations. Header: `distance_mi,fare_usd`; both values must
/// be strictly positive.
pub fn load_fare_samples(path: &Path) -> Result<Vec<FareSample>> {
    let table = CsvTable::read(path)?;
    table.expect_header(&[FARE_HEADER])?;
    let mut samples = Vec::with_capacity(table.rows.len());
    for (row, fields) in &table.rows {
        table.expect_width(*row, fields, 2)?;
        let distance_mi = parse_num::<f64>(path, *row, "distance_mi", &fields[0])?;
        let fare_usd = parse_num::<f64>(path, *row, "fare_usd", &fields[1])?;
        for (name, v) in [("distance_mi", distance_mi), ("fare_usd", fare_usd)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::malformed(path, *row, format!("{name} must be > 0, got {v}")));
            }
        }
        samples.push(FareSample { distance_mi, fare_usd });
    }
    Ok(samples)
}

pub fn write_fare_samples(path: &Path, samples: &[FareSample]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record(FARE_HEADER).map_err(|e| csv_io(path, e))?;
    for s in samples {
        w.write_record(&[s.distance_mi.to_string(), s.fare_usd.to_string()])
            .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Loads block-time observations. Header: `distance_mi,block_h`; both values
/// must be strictly positive.
pub fn load_blocktime_samples(path: &Path) -> Result<Vec<BlockTimeSample>> {
    let table = CsvTable::read(path)?;
    table.expect_header(&[BLOCKTIME_HEADER])?;
    let mut samples = Vec::with_capacity(table.rows.len());
    for (row, fields) in &table.rows {
        table.expect_width(*row, fields, 2)?;
        let distance_mi = parse_num::<f64>(path, *row, "distance_mi", &fields[0])?;
        let block_h = parse_num::<f64>(path, *row, "block_h", &fields[1])?;
        for (name, v) in [("distance_mi", distance_mi), ("block_h", block_h)] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::malformed(path, *row, format!("{name} must be > 0, got {v}")));
            }
        }
        samples.push(BlockTimeSample { distance_mi, block_h });
    }
    Ok(samples)
}

pub fn write_blocktime_samples(path: &Path, samples: &[BlockTimeSample]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record(BLOCKTIME_HEADER).map_err(|e| csv_io(path, e))?;
    for s in samples {
        w.write_record(&[s.distance_mi.to_string(), s.block_h.to_string()])
            .map_err(|e| csv_io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Parses a `key=value` file. `#` comment lines and blank lines are skipped;
/// duplicate keys are rejected. Returns pairs in file order.
pub fn parse_kv_file(path: &Path) -> Result<Vec<KvPair>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut pairs: Vec<KvPair> = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw_line) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw_line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(Error::malformed(
                path,
                line,
                format!("expected key=value, got {trimmed:?}"),
            ));
        };
        let key = key.trim().to_owned();
        let value = value.trim().to_owned();
        if key.is_empty() {
            return Err(Error::malformed(path, line, "empty key"));
        }
        if !seen.insert(key.clone()) {
            return Err(Error::malformed(path, line, format!("duplicate key {key:?}")));
        }
        pairs.push(KvPair { key, value, line });
    }
    Ok(pairs)
}

/// Loads the economic-parameters file. The four parameter keys are required;
/// any other key is kept as a run-configuration override for the pipeline to
/// validate and apply.
pub fn load_params(path: &Path) -> Result<ParamsFile> {
    let pairs = parse_kv_file(path)?;
    let mut values = [None; 4];
    let mut overrides = Vec::new();
    for pair in pairs {
        match PARAM_KEYS.iter().position(|k| *k == pair.key) {
            Some(idx) => {
                let v: f64 = pair.value.parse().map_err(|_| {
                    Error::malformed(
                        path,
                        pair.line,
                        format!("{}: cannot parse {:?} as a number", pair.key, pair.value),
                    )
                })?;
                values[idx] = Some(v);
            }
            None => overrides.push(pair),
        }
    }
    for (idx, key) in PARAM_KEYS.iter().enumerate() {
        if values[idx].is_none() {
            return Err(Error::Config(format!(
                "{}: missing required key {key:?}",
                path.display()
            )));
        }
    }
    let economic = EconomicParams::new(
        values[0].unwrap(),
        values[1].unwrap(),
        values[2].unwrap(),
        values[3].unwrap(),
    )
    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    Ok(ParamsFile { economic, overrides })
}

/// Writes a parameters file that `load_params` reads back identically
/// (overrides are preserved in order after the four parameter keys).
pub fn write_params(path: &Path, params: &ParamsFile) -> Result<()> {
    use std::fmt::Write as _;
    let econ = &params.economic;
    let mut text = String::new();
    for (key, v) in [
        ("mileage_rate_usd_per_mi", econ.mileage_rate_usd_per_mi),
        ("vsl_usd", econ.vsl_usd),
        ("ground_fatalities_per_mi", econ.ground_fatalities_per_mi),
        ("air_fatalities_per_mi", econ.air_fatalities_per_mi),
    ] {
        let _ = writeln!(text, "{key}={v}");
    }
    for pair in &params.overrides {
        let _ = writeln!(text, "{}={}", pair.key, pair.value);
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::new(std::io::ErrorKind::Other, e))
}

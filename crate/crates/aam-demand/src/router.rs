//! Ground routing: road distance and drive time between two points, either
//! from a remote OSRM-compatible HTTP service or from a synthetic model that
//! scales great-circle distance by a circuity factor.
//!
//! The router memoizes results keyed by coordinates rounded to 1e-5 degrees
//! (about a meter), caps concurrent remote requests, and can persist its
//! cache to a CSV file between runs.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{haversine_distance, EarthModel, GeoPoint};

/// Meters per statute mile, used to convert remote responses.
pub const METERS_PER_MILE: f64 = 1609.34;

/// Where a ground leg's numbers came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LegSource {
    Remote,
    Synthetic,
}

/// One routed ground movement. Invariant: the leg is degenerate (zero time)
/// exactly when it covers zero distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundLeg {
    distance_mi: f64,
    time_h: f64,
    source: LegSource,
}

impl GroundLeg {
    pub fn new(distance_mi: f64, time_h: f64, source: LegSource) -> Result<Self> {
        if !distance_mi.is_finite() || !time_h.is_finite() || distance_mi < 0.0 || time_h < 0.0 {
            return Err(Error::InvalidInput(format!(
                "ground leg values must be finite and non-negative, got {distance_mi} mi / {time_h} h"
            )));
        }
        if (distance_mi == 0.0) != (time_h == 0.0) {
            return Err(Error::InvalidInput(format!(
                "ground leg must have zero time exactly when it has zero distance, got {distance_mi} mi / {time_h} h"
            )));
        }
        Ok(Self { distance_mi, time_h, source })
    }

    pub fn zero() -> Self {
        Self { distance_mi: 0.0, time_h: 0.0, source: LegSource::Synthetic }
    }

    pub fn distance_mi(&self) -> f64 {
        self.distance_mi
    }

    pub fn time_h(&self) -> f64 {
        self.time_h
    }

    pub fn source(&self) -> LegSource {
        self.source
    }
}

/// Road network stand-in: road distance as a fixed multiple of great-circle
/// distance, driven at a fixed average speed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticRoadModel {
    pub circuity_factor: f64,
    pub avg_speed_mph: f64,
}

impl SyntheticRoadModel {
    pub fn new(circuity_factor: f64, avg_speed_mph: f64) -> Result<Self> {
        if !circuity_factor.is_finite() || circuity_factor < 1.0 {
            return Err(Error::Config(format!(
                "circuity factor must be >= 1, got {circuity_factor}"
            )));
        }
        if !avg_speed_mph.is_finite() || avg_speed_mph <= 0.0 {
            return Err(Error::Config(format!(
                "average road speed must be positive, got {avg_speed_mph}"
            )));
        }
        Ok(Self { circuity_factor, avg_speed_mph })
    }
}

impl Default for SyntheticRoadModel {
    fn default() -> Self {
        Self { circuity_factor: 1.2, avg_speed_mph: 45.0 }
    }
}

/// Routes `a` to `b` through the synthetic road model.
pub fn synthetic_route(
    a: &GeoPoint,
    b: &GeoPoint,
    model: &SyntheticRoadModel,
    earth: &EarthModel,
) -> GroundLeg {
    let distance_mi = model.circuity_factor * haversine_distance(a, b, earth);
    let time_h = distance_mi / model.avg_speed_mph;
    GroundLeg { distance_mi, time_h, source: LegSource::Synthetic }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouterMode {
    Synthetic,
    Remote,
    RemoteWithFallback,
}

impl FromStr for RouterMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "synthetic" => Ok(Self::Synthetic),
            "remote" => Ok(Self::Remote),
            "remote_with_fallback" => Ok(Self::RemoteWithFallback),
            other => Err(format!(
                "unknown router mode {other:?} (expected synthetic, remote, or remote_with_fallback)"
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RouterConfig {
    pub mode: RouterMode,
    pub base_url: Option<String>,
    pub timeout_s: f64,
    pub retries: u32,
    pub max_in_flight: usize,
    pub synthetic: SyntheticRoadModel,
    pub cache_path: Option<PathBuf>,
}

impl Default for RouterConfig {
    fn default() -> Self {
        Self {
            mode: RouterMode::Synthetic,
            base_url: None,
            timeout_s: 10.0,
            retries: 2,
            max_in_flight: 4,
            synthetic: SyntheticRoadModel::default(),
            cache_path: None,
        }
    }
}

/// Counting gate bounding how many remote requests run at once.
struct Gate {
    slots: Mutex<usize>,
    freed: Condvar,
}

impl Gate {
    fn new(capacity: usize) -> Self {
        Self { slots: Mutex::new(capacity), freed: Condvar::new() }
    }

    fn acquire(&self) -> GateGuard<'_> {
        let mut slots = self.slots.lock().unwrap();
        while *slots == 0 {
            slots = self.freed.wait(slots).unwrap();
        }
        *slots -= 1;
        GateGuard { gate: self }
    }
}

struct GateGuard<'a> {
    gate: &'a Gate,
}

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        *self.gate.slots.lock().unwrap() += 1;
        self.gate.freed.notify_one();
    }
}

type CacheKey = (i64, i64, i64, i64);

fn quantize(deg: f64) -> i64 {
    (deg * 1e5).round() as i64
}

fn cache_key(a: &GeoPoint, b: &GeoPoint) -> CacheKey {
    (
        quantize(a.lat_deg()),
        quantize(a.lon_deg()),
        quantize(b.lat_deg()),
        quantize(b.lon_deg()),
    )
}

#[derive(Deserialize)]
struct RouteResponse {
    code: String,
    #[serde(default)]
    routes: Vec<RouteEntry>,
}

#[derive(Deserialize)]
struct RouteEntry {
    distance: f64,
    duration: f64,
}

/// Thread-safe ground router. Clones of the evaluation pipeline share one
/// instance behind a reference.
pub struct Router {
    config: RouterConfig,
    earth: EarthModel,
    agent: Option<ureq::Agent>,
    cache: Mutex<HashMap<CacheKey, (f64, f64)>>,
    gate: Gate,
}

impl Router {
    pub fn new(config: RouterConfig, earth: EarthModel) -> Result<Self> {
        if !config.timeout_s.is_finite() || config.timeout_s <= 0.0 {
            return Err(Error::Config(format!(
                "router timeout must be positive, got {}",
                config.timeout_s
            )));
        }
        if config.max_in_flight == 0 {
            return Err(Error::Config("router max_in_flight must be at least 1".into()));
        }
        let needs_remote = config.mode != RouterMode::Synthetic;
        if needs_remote && config.base_url.is_none() {
            return Err(Error::Config(
                "remote routing requires a base URL (router.base_url or ROUTER_BASE_URL)".into(),
            ));
        }
        let agent = if needs_remote {
            let cfg = ureq::Agent::config_builder()
                .timeout_global(Some(Duration::from_secs_f64(config.timeout_s)))
                .proxy(None)
                .build();
            Some(ureq::Agent::new_with_config(cfg))
        } else {
            None
        };

        let mut cache = HashMap::new();
        if let Some(path) = &config.cache_path {
            if path.exists() {
                cache = load_cache(path)?;
            }
        }
        let gate = Gate::new(config.max_in_flight);
        Ok(Self { config, earth, agent, cache: Mutex::new(cache), gate })
    }

    /// Convenience constructor for a purely synthetic router.
    pub fn synthetic(model: SyntheticRoadModel, earth: EarthModel) -> Self {
        let config = RouterConfig { synthetic: model, ..RouterConfig::default() };
        Self::new(config, earth).expect("synthetic router config is always valid")
    }

    pub fn config(&self) -> &RouterConfig {
        &self.config
    }

    /// Road distance and time from `a` to `b` under the configured mode.
    pub fn ground_route(&self, a: &GeoPoint, b: &GeoPoint) -> Result<GroundLeg> {
        let key = cache_key(a, b);
        // Same quantized endpoints: nothing to route.
        if (key.0, key.1) == (key.2, key.3) {
            return Ok(GroundLeg::zero());
        }
        match self.config.mode {
            RouterMode::Synthetic => {
                Ok(synthetic_route(a, b, &self.config.synthetic, &self.earth))
            }
            RouterMode::Remote => self.remote_route_cached(a, b, key),
            RouterMode::RemoteWithFallback => match self.remote_route_cached(a, b, key) {
                Ok(leg) => Ok(leg),
                Err(_) => Ok(synthetic_route(a, b, &self.config.synthetic, &self.earth)),
            },
        }
    }

    fn remote_route_cached(&self, a: &GeoPoint, b: &GeoPoint, key: CacheKey) -> Result<GroundLeg> {
        if let Some(&(distance_mi, time_h)) = self.cache.lock().unwrap().get(&key) {
            return GroundLeg::new(distance_mi, time_h, LegSource::Remote);
        }
        let leg = {
            let _slot = self.gate.acquire();
            self.remote_route(a, b)?
        };
        self.cache
            .lock()
            .unwrap()
            .insert(key, (leg.distance_mi, leg.time_h));
        Ok(leg)
    }

    fn remote_route(&self, a: &GeoPoint, b: &GeoPoint) -> Result<GroundLeg> {
        let base = self.config.base_url.as_deref().expect("checked at construction");
        let url = format!(
            "{}/route/v1/driving/{},{};{},{}?overview=false",
            base.trim_end_matches('/'),
            a.lon_deg(),
            a.lat_deg(),
            b.lon_deg(),
            b.lat_deg()
        );
        let agent = self.agent.as_ref().expect("checked at construction");

        let mut last_err = String::new();
        for attempt in 0..=self.config.retries {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(200 << (attempt - 1)));
            }
            match agent.get(&url).call() {
                Ok(mut response) => {
                    let parsed: RouteResponse =
                        response.body_mut().read_json().map_err(|e| {
                            Error::Routing(format!("bad response from {url}: {e}"))
                        })?;
                    return self.leg_from_response(&url, parsed);
                }
                Err(e) => last_err = e.to_string(),
            }
        }
        Err(Error::Routing(format!(
            "route request failed after {} attempts: {url}: {last_err}",
            self.config.retries + 1
        )))
    }

    fn leg_from_response(&self, url: &str, parsed: RouteResponse) -> Result<GroundLeg> {
        if parsed.code != "Ok" {
            return Err(Error::Routing(format!(
                "router returned code {:?} for {url}",
                parsed.code
            )));
        }
        let Some(route) = parsed.routes.first() else {
            return Err(Error::Routing(format!("router returned no routes for {url}")));
        };
        let distance_mi = route.distance / METERS_PER_MILE;
        let time_h = route.duration / 3600.0;
        GroundLeg::new(distance_mi, time_h, LegSource::Remote)
            .map_err(|e| Error::Routing(format!("router returned an invalid leg for {url}: {e}")))
    }

    /// Writes the cache to the configured cache file (no-op when none is
    /// configured). Rows are sorted so reruns produce identical bytes.
    pub fn persist_cache(&self) -> Result<()> {
        let Some(path) = &self.config.cache_path else {
            return Ok(());
        };
        let cache = self.cache.lock().unwrap();
        let mut rows: Vec<(CacheKey, (f64, f64))> =
            cache.iter().map(|(k, v)| (*k, *v)).collect();
        drop(cache);
        rows.sort_by_key(|(k, _)| *k);

        let mut writer = csv::Writer::from_path(path).map_err(|e| {
            Error::io(path, std::io::Error::other(e.to_string()))
        })?;
        writer
            .write_record(["lat1", "lon1", "lat2", "lon2", "distance_mi", "time_h"])
            .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
        for ((lat1, lon1, lat2, lon2), (distance_mi, time_h)) in rows {
            writer
                .write_record([
                    format_quantized(lat1),
                    format_quantized(lon1),
                    format_quantized(lat2),
                    format_quantized(lon2),
                    distance_mi.to_string(),
                    time_h.to_string(),
                ])
                .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
        }
        writer
            .flush()
            .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
        Ok(())
    }

    #[cfg(test)]
    fn cached_len(&self) -> usize {
        self.cache.lock().unwrap().len()
    }
}

fn format_quantized(q: i64) -> String {
    format!("{:.5}", q as f64 / 1e5)
}

fn load_cache(path: &Path) -> Result<HashMap<CacheKey, (f64, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?;
    let mut cache = HashMap::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record =
            record.map_err(|e| Error::malformed(path, row, e.to_string()))?;
        if record.len() != 6 {
            return Err(Error::malformed(
                path,
                row,
                format!("expected 6 fields, got {}", record.len()),
            ));
        }
        let mut nums = [0.0f64; 6];
        for (j, field) in record.iter().enumerate() {
            nums[j] = field.trim().parse().map_err(|_| {
                Error::malformed(path, row, format!("bad number {:?}", field))
            })?;
        }
        if nums.iter().any(|v| !v.is_finite()) || nums[4] < 0.0 || nums[5] < 0.0 {
            return Err(Error::malformed(path, row, "invalid cached route"));
        }
        cache.insert(
            (
                quantize(nums[0]),
                quantize(nums[1]),
                quantize(nums[2]),
                quantize(nums[3]),
            ),
            (nums[4], nums[5]),
        );
    }
    Ok(cache)
}

//! Geodesic primitives: points, tracts, hubs, great-circle distance, and
//! nearest-hub assignment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean Earth radius in statute miles, used by all great-circle math unless
/// a caller supplies its own [`EarthModel`].
pub const EARTH_RADIUS_MILES: f64 = 3958.8;

/// Statute miles per kilometer.
pub const MILES_PER_KM: f64 = 0.621371;

const DEG_TO_RAD: f64 = std::f64::consts::PI / 180.0;

/// A validated geographic coordinate. Construction rejects non-finite values
/// and out-of-range latitudes/longitudes, so every `GeoPoint` in the system
/// is usable in spherical math without further checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoPoint {
    lat_deg: f64,
    lon_deg: f64,
}

impl GeoPoint {
    /// Builds a point from degrees. Latitude must lie in [-90, 90] and
    /// longitude in [-180, 180]; both must be finite.
    pub fn new(lat_deg: f64, lon_deg: f64) -> Result<Self> {
        if !lat_deg.is_finite() || !lon_deg.is_finite() {
            return Err(Error::InvalidInput(format!(
                "coordinate must be finite, got ({lat_deg}, {lon_deg})"
            )));
        }
        if !(-90.0..=90.0).contains(&lat_deg) {
            return Err(Error::InvalidInput(format!(
                "latitude {lat_deg} out of range [-90, 90]"
            )));
        }
        if !(-180.0..=180.0).contains(&lon_deg) {
            return Err(Error::InvalidInput(format!(
                "longitude {lon_deg} out of range [-180, 180]"
            )));
        }
        Ok(GeoPoint { lat_deg, lon_deg })
    }

    pub fn lat_deg(&self) -> f64 {
        self.lat_deg
    }

    pub fn lon_deg(&self) -> f64 {
        self.lon_deg
    }
}

/// Spherical Earth with a configurable radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EarthModel {
    radius_mi: f64,
}

impl EarthModel {
    pub fn new(radius_mi: f64) -> Result<Self> {
        if !radius_mi.is_finite() || radius_mi <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "earth radius must be a positive finite number of miles, got {radius_mi}"
            )));
        }
        Ok(EarthModel { radius_mi })
    }

    pub fn radius_mi(&self) -> f64 {
        self.radius_mi
    }
}

impl Default for EarthModel {
    fn default() -> Self {
        EarthModel {
            radius_mi: EARTH_RADIUS_MILES,
        }
    }
}

/// A census tract reduced to what the demand model needs: an identifier,
/// a centroid, and the median hourly wage of its residents.
#[derive(Debug, Clone, PartialEq)]
pub struct CensusTract {
    pub tract_id: String,
    pub centroid: GeoPoint,
    pub median_hourly_wage_usd: f64,
}

impl CensusTract {
    pub fn new(tract_id: impl Into<String>, centroid: GeoPoint, wage_usd: f64) -> Result<Self> {
        let tract_id = tract_id.into();
        if tract_id.is_empty() {
            return Err(Error::InvalidInput("tract id must be non-empty".into()));
        }
        if !wage_usd.is_finite() || wage_usd < 0.0 {
            return Err(Error::InvalidInput(format!(
                "tract {tract_id}: median hourly wage must be >= 0, got {wage_usd}"
            )));
        }
        Ok(CensusTract {
            tract_id,
            centroid,
            median_hourly_wage_usd: wage_usd,
        })
    }
}

/// An airport that can serve as an AAM hub. Processing times are the fixed
/// dwell hours spent at the hub on departure and on arrival.
#[derive(Debug, Clone, PartialEq)]
pub struct HubAirport {
    pub code: String,
    pub location: GeoPoint,
    pub depart_processing_h: f64,
    pub arrive_processing_h: f64,
}

impl HubAirport {
    pub fn new(
        code: impl Into<String>,
        location: GeoPoint,
        depart_processing_h: f64,
        arrive_processing_h: f64,
    ) -> Result<Self> {
        let code = code.into();
        if code.is_empty() {
            return Err(Error::InvalidInput("hub code must be non-empty".into()));
        }
        for (label, v) in [
            ("depart processing", depart_processing_h),
            ("arrive processing", arrive_processing_h),
        ] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "hub {code}: {label} hours must be >= 0, got {v}"
                )));
            }
        }
        Ok(HubAirport {
            code,
            location,
            depart_processing_h,
            arrive_processing_h,
        })
    }
}

/// Great-circle distance between two points in miles, via the haversine
/// formula. Symmetric, zero for identical points, and never larger than
/// half the Earth's circumference.
pub fn haversine_distance(a: &GeoPoint, b: &GeoPoint, earth: &EarthModel) -> f64 {
    let lat_a = a.lat_deg * DEG_TO_RAD;
    let lat_b = b.lat_deg * DEG_TO_RAD;
    let d_lat = (b.lat_deg - a.lat_deg) * DEG_TO_RAD;
    let d_lon = (b.lon_deg - a.lon_deg) * DEG_TO_RAD;

    let h = (d_lat / 2.0).sin().powi(2)
        + lat_a.cos() * lat_b.cos() * (d_lon / 2.0).sin().powi(2);
    // Rounding can push h a few ulp above 1 near antipodes; clamp so asin
    // stays defined.
    2.0 * earth.radius_mi * h.sqrt().min(1.0).asin()
}

/// The hub nearest to a tract's centroid by great-circle distance. Distance
/// ties are broken by the lexicographically smallest hub code so assignment
/// is deterministic regardless of input order.
pub fn nearest_hub<'a>(
    tract: &CensusTract,
    hubs: &'a [HubAirport],
    earth: &EarthModel,
) -> Result<&'a HubAirport> {
    let mut best: Option<(f64, &HubAirport)> = None;
    for hub in hubs {
        let d = haversine_distance(&tract.centroid, &hub.location, earth);
        let better = match best {
            None => true,
            Some((bd, bh)) => d < bd || (d == bd && hub.code < bh.code),
        };
        if better {
            best = Some((d, hub));
        }
    }
    best.map(|(_, h)| h).ok_or_else(|| {
        Error::InvalidInput(format!(
            "no hubs available to assign to tract {}",
            tract.tract_id
        ))
    })
}

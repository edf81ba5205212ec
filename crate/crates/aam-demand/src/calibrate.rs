//! Model calibration: ordinary least squares over sampled fares and block
//! times, plus prediction with domain-aware extrapolation flagging.
//!
//! Polynomial fits are solved by singular-value decomposition on a design
//! matrix built over inputs rescaled to [-1, 1], then expanded back to plain
//! power-basis coefficients. That keeps the solve well conditioned without
//! changing the published coefficient convention (constant term first).

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{BlockTimeSample, FareSample};

/// Floor applied to every block-time prediction, in hours.
pub const DEFAULT_MIN_BLOCK_H: f64 = 0.25;

/// Polynomial degree used for block-time calibration unless configured.
pub const DEFAULT_BLOCKTIME_DEGREE: usize = 2;

/// A fitted polynomial in the power basis, with the distance domain the
/// training samples covered. `coefficients[i]` multiplies `x^i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialModel {
    pub coefficients: Vec<f64>,
    pub domain_min_mi: f64,
    pub domain_max_mi: f64,
}

impl PolynomialModel {
    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    /// Horner evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn is_extrapolation(&self, x: f64) -> bool {
        x < self.domain_min_mi || x > self.domain_max_mi
    }

    fn validate(&self) -> Result<()> {
        if self.coefficients.is_empty() {
            return Err(Error::Calibration("polynomial has no coefficients".into()));
        }
        if self.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::Calibration("polynomial coefficient is not finite".into()));
        }
        if !self.domain_min_mi.is_finite()
            || !self.domain_max_mi.is_finite()
            || self.domain_min_mi > self.domain_max_mi
        {
            return Err(Error::Calibration(format!(
                "bad polynomial domain [{}, {}]",
                self.domain_min_mi, self.domain_max_mi
            )));
        }
        Ok(())
    }
}

/// Power-law fare model: fare per mile is `a * d^b`, stored in log space as
/// `ln(fare/d) = log_intercept + log_slope * ln(d)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FareModel {
    pub log_intercept: f64,
    pub log_slope: f64,
    pub domain_min_mi: f64,
    pub domain_max_mi: f64,
}

impl FareModel {
    /// The multiplier `a` in fare-per-mile = `a * d^b`.
    pub fn scale_usd_per_mi(&self) -> f64 {
        self.log_intercept.exp()
    }

    pub fn is_extrapolation(&self, d: f64) -> bool {
        d < self.domain_min_mi || d > self.domain_max_mi
    }

    fn validate(&self) -> Result<()> {
        if !self.log_intercept.is_finite() || !self.log_slope.is_finite() {
            return Err(Error::Calibration("fare model coefficients are not finite".into()));
        }
        if !self.domain_min_mi.is_finite()
            || !self.domain_max_mi.is_finite()
            || self.domain_min_mi > self.domain_max_mi
        {
            return Err(Error::Calibration(format!(
                "bad fare domain [{}, {}]",
                self.domain_min_mi, self.domain_max_mi
            )));
        }
        Ok(())
    }
}

/// Block-time model: a fitted polynomial clamped below at `min_block_h`,
/// since even the shortest hop spends time on taxi, climb, and descent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockTimeModel {
    pub poly: PolynomialModel,
    pub min_block_h: f64,
}

impl BlockTimeModel {
    fn validate(&self) -> Result<()> {
        self.poly.validate()?;
        if !self.min_block_h.is_finite() || self.min_block_h < 0.0 {
            return Err(Error::Calibration(format!(
                "min_block_h must be >= 0, got {}",
                self.min_block_h
            )));
        }
        Ok(())
    }
}

/// The calibrated models the evaluation pipeline consumes, as serialized to
/// the model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSet {
    pub fare: FareModel,
    pub blocktime: BlockTimeModel,
}

impl ModelSet {
    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Calibration(format!("cannot serialize models: {e}")))?;
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let set: ModelSet = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        set.fare.validate()?;
        set.blocktime.validate()?;
        Ok(set)
    }
}

/// A model prediction plus whether the input fell outside the calibration
/// domain (the value is still computed; callers surface the flag).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub value: f64,
    pub extrapolated: bool,
}

/// Least-squares polynomial fit of the given degree. Requires at least
/// `degree + 1` distinct x values; inputs must be finite.
pub fn fit_polynomial(xs: &[f64], ys: &[f64], degree: usize) -> Result<PolynomialModel> {
    if xs.len() != ys.len() {
        return Err(Error::Calibration(format!(
            "x and y lengths differ ({} vs {})",
            xs.len(),
            ys.len()
        )));
    }
    if xs.is_empty() {
        return Err(Error::Calibration("cannot fit a polynomial to no samples".into()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::Calibration("samples must be finite".into()));
    }
    let mut distinct: Vec<f64> = xs.to_vec();
    distinct.sort_by(|a, b| a.total_cmp(b));
    distinct.dedup();
    if distinct.len() < degree + 1 {
        return Err(Error::Calibration(format!(
            "degree-{degree} fit needs at least {} distinct x values, got {}",
            degree + 1,
            distinct.len()
        )));
    }

    let x_min = *distinct.first().unwrap();
    let x_max = *distinct.last().unwrap();
    let center = (x_min + x_max) / 2.0;
    let half = (x_max - x_min) / 2.0;

    // Design matrix over u = (x - center) / half, which spans [-1, 1].
    let n = xs.len();
    let cols = degree + 1;
    let u: Vec<f64> = xs
        .iter()
        .map(|&x| if half > 0.0 { (x - center) / half } else { 0.0 })
        .collect();
    let design = DMatrix::from_fn(n, cols, |i, j| u[i].powi(j as i32));
    let rhs = DVector::from_column_slice(ys);
    let svd = design.svd(true, true);
    let cutoff = svd.singular_values.max() * n.max(cols) as f64 * f64::EPSILON;
    let scaled = svd
        .solve(&rhs, cutoff)
        .map_err(|e| Error::Calibration(format!("SVD solve failed: {e}")))?;

    // Expand p(u(x)) back to power-basis coefficients in x via Horner in
    // coefficient space: repeatedly multiply by (alpha*x + beta) and add.
    let coefficients = if half > 0.0 {
        let alpha = 1.0 / half;
        let beta = -center / half;
        let mut acc: Vec<f64> = Vec::with_capacity(cols);
        for j in (0..cols).rev() {
            let mut next = vec![0.0; acc.len() + 1];
            for (i, &c) in acc.iter().enumerate() {
                next[i] += c * beta;
                next[i + 1] += c * alpha;
            }
            if next.is_empty() {
                next.push(0.0);
            }
            next[0] += scaled[j];
            acc = next;
        }
        acc.truncate(cols);
        acc
    } else {
        // All x identical: only a constant is identifiable.
        let mut c = vec![0.0; cols];
        c[0] = scaled[0];
        c
    };

    let model = PolynomialModel {
        coefficients,
        domain_min_mi: x_min,
        domain_max_mi: x_max,
    };
    model.validate()?;
    Ok(model)
}

/// Fits the power-law fare model by a degree-1 polynomial fit in log-log
/// space. Requires at least two distinct sample distances.
pub fn fit_fare_model(samples: &[FareSample]) -> Result<FareModel> {
    if samples.len() < 2 {
        return Err(Error::Calibration(format!(
            "fare calibration needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.distance_mi.ln()).collect();
    let ys: Vec<f64> = samples
        .iter()
        .map(|s| (s.fare_usd / s.distance_mi).ln())
        .collect();
    let line = fit_polynomial(&xs, &ys, 1).map_err(|e| match e {
        Error::Calibration(msg) => Error::Calibration(format!("fare model: {msg}")),
        other => other,
    })?;
    let (mut d_min, mut d_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in samples {
        d_min = d_min.min(s.distance_mi);
        d_max = d_max.max(s.distance_mi);
    }
    let model = FareModel {
        log_intercept: line.coefficients[0],
        log_slope: line.coefficients[1],
        domain_min_mi: d_min,
        domain_max_mi: d_max,
    };
    model.validate()?;
    Ok(model)
}

/// Fits the block-time polynomial (degree 2 by default) with the given
/// prediction floor.
pub fn fit_blocktime_model(
    samples: &[BlockTimeSample],
    degree: usize,
    min_block_h: f64,
) -> Result<BlockTimeModel> {
    if !min_block_h.is_finite() || min_block_h < 0.0 {
        return Err(Error::Calibration(format!(
            "min_block_h must be >= 0, got {min_block_h}"
        )));
    }
    let xs: Vec<f64> = samples.iter().map(|s| s.distance_mi).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.block_h).collect();
    let poly = fit_polynomial(&xs, &ys, degree).map_err(|e| match e {
        Error::Calibration(msg) => Error::Calibration(format!("block-time model: {msg}")),
        other => other,
    })?;
    let model = BlockTimeModel { poly, min_block_h };
    model.validate()?;
    Ok(model)
}

/// Arithmetic mean, used to collapse published parameter ranges (for example
/// a low/high value-of-statistical-life pair) into a single working value.
pub fn average_values(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidInput("cannot average zero values".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("values to average must be finite".into()));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Total fare in USD for one passenger over `distance_mi`:
/// `a * d^b * d`. Distances must be strictly positive.
pub fn predict_fare(model: &FareModel, distance_mi: f64) -> Result<Prediction> {
    if !distance_mi.is_finite() || distance_mi <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "fare prediction needs a positive distance, got {distance_mi}"
        )));
    }
    let per_mile = (model.log_intercept + model.log_slope * distance_mi.ln()).exp();
    Ok(Prediction {
        value: per_mile * distance_mi,
        extrapolated: model.is_extrapolation(distance_mi),
    })
}

/// Block hours for a flight of `distance_mi`, clamped below at the model's
/// floor. Distances must be strictly positive.
pub fn predict_block(model: &BlockTimeModel, distance_mi: f64) -> Result<Prediction> {
    if !distance_mi.is_finite() || distance_mi <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "block-time prediction needs a positive distance, got {distance_mi}"
        )));
    }
    let raw = model.poly.eval(distance_mi);
    Ok(Prediction {
        value: raw.max(model.min_block_h),
        extrapolated: model.poly.is_extrapolation(distance_mi),
    })
}

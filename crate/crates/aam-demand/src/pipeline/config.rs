//! Run configuration: a flat key=value namespace with built-in defaults,
//! overridden first by an optional config file, then by extra keys in the
//! economic parameter file. `ROUTER_BASE_URL` fills the router base URL only
//! when no file set one.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geo::EarthModel;
use crate::ingest::KvPair;
use crate::router::{RouterConfig, RouterMode, SyntheticRoadModel};

/// Which decision rule the run applies after computing each probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionRuleKind {
    Threshold,
    Sample,
}

impl FromStr for DecisionRuleKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "threshold" => Ok(Self::Threshold),
            "sample" => Ok(Self::Sample),
            other => Err(format!(
                "unknown decision rule {other:?} (expected threshold or sample)"
            )),
        }
    }
}

impl DecisionRuleKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Threshold => "threshold",
            Self::Sample => "sample",
        }
    }
}

/// Every tunable of a run. Field names mirror the config keys.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub earth_radius_mi: f64,
    pub dwell_depart_h: f64,
    pub dwell_arrive_h: f64,
    pub router_mode: RouterMode,
    pub router_base_url: Option<String>,
    pub router_timeout_s: f64,
    pub router_retries: u32,
    pub router_max_in_flight: usize,
    pub router_cache_path: Option<PathBuf>,
    pub synthetic_circuity_factor: f64,
    pub synthetic_avg_speed_mph: f64,
    pub blocktime_degree: usize,
    pub blocktime_min_block_h: f64,
    pub logit_scale: f64,
    pub decision_rule: DecisionRuleKind,
    pub decision_threshold: f64,
    pub decision_seed: u64,
    pub range_filter_enabled: bool,
    pub workers: usize,
    pub curve_access_leg_mi: f64,
    pub curve_wage_usd_per_h: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            earth_radius_mi: 3958.8,
            dwell_depart_h: 0.5,
            dwell_arrive_h: 0.25,
            router_mode: RouterMode::Synthetic,
            router_base_url: None,
            router_timeout_s: 10.0,
            router_retries: 2,
            router_max_in_flight: 4,
            router_cache_path: None,
            synthetic_circuity_factor: 1.2,
            synthetic_avg_speed_mph: 45.0,
            blocktime_degree: 2,
            blocktime_min_block_h: 0.25,
            logit_scale: 1.0,
            decision_rule: DecisionRuleKind::Threshold,
            decision_threshold: 0.5,
            decision_seed: 42,
            range_filter_enabled: true,
            workers: 0,
            curve_access_leg_mi: 10.0,
            curve_wage_usd_per_h: 25.0,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("bad value for {key}: {value:?}")))
}

impl RunConfig {
    /// Applies one key=value pair. Unknown keys are configuration errors so
    /// typos never silently fall back to a default.
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "earth.radius_mi" => self.earth_radius_mi = parse_value(key, value)?,
            "dwell.depart_h" => self.dwell_depart_h = parse_value(key, value)?,
            "dwell.arrive_h" => self.dwell_arrive_h = parse_value(key, value)?,
            "router.mode" => {
                self.router_mode = value
                    .parse()
                    .map_err(|e: String| Error::Config(format!("{key}: {e}")))?;
            }
            "router.base_url" => {
                if value.is_empty() {
                    return Err(Error::Config("router.base_url must not be empty".into()));
                }
                self.router_base_url = Some(value.to_string());
            }
            "router.timeout_s" => self.router_timeout_s = parse_value(key, value)?,
            "router.retries" => self.router_retries = parse_value(key, value)?,
            "router.max_in_flight" => self.router_max_in_flight = parse_value(key, value)?,
            "router.cache_path" => {
                if value.is_empty() {
                    return Err(Error::Config("router.cache_path must not be empty".into()));
                }
                self.router_cache_path = Some(PathBuf::from(value));
            }
            "synthetic.circuity_factor" => {
                self.synthetic_circuity_factor = parse_value(key, value)?
            }
            "synthetic.avg_speed_mph" => self.synthetic_avg_speed_mph = parse_value(key, value)?,
            "blocktime.degree" => self.blocktime_degree = parse_value(key, value)?,
            "blocktime.min_block_h" => self.blocktime_min_block_h = parse_value(key, value)?,
            "logit.scale" => self.logit_scale = parse_value(key, value)?,
            "decision.rule" => {
                self.decision_rule = value
                    .parse()
                    .map_err(|e: String| Error::Config(format!("{key}: {e}")))?;
            }
            "decision.threshold" => self.decision_threshold = parse_value(key, value)?,
            "decision.seed" => self.decision_seed = parse_value(key, value)?,
            "range_filter.enabled" => self.range_filter_enabled = parse_value(key, value)?,
            "workers" => self.workers = parse_value(key, value)?,
            "curve.access_leg_mi" => self.curve_access_leg_mi = parse_value(key, value)?,
            "curve.wage_usd_per_h" => self.curve_wage_usd_per_h = parse_value(key, value)?,
            other => {
                return Err(Error::Config(format!("unknown configuration key {other:?}")));
            }
        }
        Ok(())
    }

    /// Applies the pairs of a parsed kv file in order, annotating errors
    /// with the line they came from.
    pub fn apply_pairs(&mut self, pairs: &[KvPair]) -> Result<()> {
        for pair in pairs {
            self.apply_kv(&pair.key, &pair.value).map_err(|e| match e {
                Error::Config(msg) => Error::Config(format!("line {}: {msg}", pair.line)),
                other => other,
            })?;
        }
        Ok(())
    }

    /// Fills the router base URL from `ROUTER_BASE_URL` when no file set it.
    pub fn resolve_env(&mut self) {
        if self.router_base_url.is_none() {
            if let Ok(v) = std::env::var("ROUTER_BASE_URL") {
                if !v.is_empty() {
                    self.router_base_url = Some(v);
                }
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("earth.radius_mi", self.earth_radius_mi),
            ("router.timeout_s", self.router_timeout_s),
            ("synthetic.avg_speed_mph", self.synthetic_avg_speed_mph),
            ("logit.scale", self.logit_scale),
        ];
        for (key, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Config(format!("{key} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("dwell.depart_h", self.dwell_depart_h),
            ("dwell.arrive_h", self.dwell_arrive_h),
            ("blocktime.min_block_h", self.blocktime_min_block_h),
            ("curve.access_leg_mi", self.curve_access_leg_mi),
            ("curve.wage_usd_per_h", self.curve_wage_usd_per_h),
        ];
        for (key, v) in non_negative {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Config(format!("{key} must be >= 0, got {v}")));
            }
        }
        if !self.synthetic_circuity_factor.is_finite() || self.synthetic_circuity_factor < 1.0 {
            return Err(Error::Config(format!(
                "synthetic.circuity_factor must be >= 1, got {}",
                self.synthetic_circuity_factor
            )));
        }
        if self.router_max_in_flight == 0 {
            return Err(Error::Config("router.max_in_flight must be at least 1".into()));
        }
        if self.blocktime_degree > 6 {
            return Err(Error::Config(format!(
                "blocktime.degree must be at most 6, got {}",
                self.blocktime_degree
            )));
        }
        if !(0.0..=1.0).contains(&self.decision_threshold) {
            return Err(Error::Config(format!(
                "decision.threshold must lie in [0, 1], got {}",
                self.decision_threshold
            )));
        }
        if self.router_mode != RouterMode::Synthetic && self.router_base_url.is_none() {
            return Err(Error::Config(
                "remote routing requires a base URL (router.base_url or ROUTER_BASE_URL)".into(),
            ));
        }
        Ok(())
    }

    pub fn earth(&self) -> Result<EarthModel> {
        EarthModel::new(self.earth_radius_mi)
    }

    pub fn synthetic_model(&self) -> Result<SyntheticRoadModel> {
        SyntheticRoadModel::new(self.synthetic_circuity_factor, self.synthetic_avg_speed_mph)
    }

    pub fn router_config(&self) -> Result<RouterConfig> {
        Ok(RouterConfig {
            mode: self.router_mode,
            base_url: self.router_base_url.clone(),
            timeout_s: self.router_timeout_s,
            retries: self.router_retries,
            max_in_flight: self.router_max_in_flight,
            synthetic: self.synthetic_model()?,
            cache_path: self.router_cache_path.clone(),
        })
    }

    /// The full effective configuration as sorted text pairs, echoed into
    /// run metadata so outputs are explainable after the fact.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mode = match self.router_mode {
            RouterMode::Synthetic => "synthetic",
            RouterMode::Remote => "remote",
            RouterMode::RemoteWithFallback => "remote_with_fallback",
        };
        let mut map = BTreeMap::new();
        map.insert("earth.radius_mi".into(), self.earth_radius_mi.to_string());
        map.insert("dwell.depart_h".into(), self.dwell_depart_h.to_string());
        map.insert("dwell.arrive_h".into(), self.dwell_arrive_h.to_string());
        map.insert("router.mode".into(), mode.to_string());
        map.insert(
            "router.base_url".into(),
            self.router_base_url.clone().unwrap_or_default(),
        );
        map.insert("router.timeout_s".into(), self.router_timeout_s.to_string());
        map.insert("router.retries".into(), self.router_retries.to_string());
        map.insert(
            "router.max_in_flight".into(),
            self.router_max_in_flight.to_string(),
        );
        map.insert(
            "router.cache_path".into(),
            self.router_cache_path
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
        );
        map.insert(
            "synthetic.circuity_factor".into(),
            self.synthetic_circuity_factor.to_string(),
        );
        map.insert(
            "synthetic.avg_speed_mph".into(),
            self.synthetic_avg_speed_mph.to_string(),
        );
        map.insert("blocktime.degree".into(), self.blocktime_degree.to_string());
        map.insert(
            "blocktime.min_block_h".into(),
            self.blocktime_min_block_h.to_string(),
        );
        map.insert("logit.scale".into(), self.logit_scale.to_string());
        map.insert("decision.rule".into(), self.decision_rule.as_str().to_string());
        map.insert(
            "decision.threshold".into(),
            self.decision_threshold.to_string(),
        );
        map.insert("decision.seed".into(), self.decision_seed.to_string());
        map.insert(
            "range_filter.enabled".into(),
            self.range_filter_enabled.to_string(),
        );
        map.insert("workers".into(), self.workers.to_string());
        map.insert(
            "curve.access_leg_mi".into(),
            self.curve_access_leg_mi.to_string(),
        );
        map.insert(
            "curve.wage_usd_per_h".into(),
            self.curve_wage_usd_per_h.to_string(),
        );
        map
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected_by_name() {
        let mut config = RunConfig::default();
        let err = config.apply_kv("router.modee", "synthetic").unwrap_err();
        assert!(err.to_string().contains("router.modee"), "got {err}");
    }

    #[test]
    fn bad_values_name_the_key() {
        let mut config = RunConfig::default();
        let err = config.apply_kv("logit.scale", "fast").unwrap_err();
        assert!(err.to_string().contains("logit.scale"), "got {err}");
        let err = config.apply_kv("decision.rule", "coin").unwrap_err();
        assert!(err.to_string().contains("decision.rule"), "got {err}");
    }

    #[test]
    fn later_pairs_override_earlier_ones() {
        let mut config = RunConfig::default();
        let pairs = vec![
            KvPair { key: "logit.scale".into(), value: "0.5".into(), line: 1 },
            KvPair { key: "logit.scale".into(), value: "2.0".into(), line: 2 },
        ];
        config.apply_pairs(&pairs).unwrap();
        assert_eq!(config.logit_scale, 2.0);
    }

    #[test]
    fn pair_errors_carry_the_line() {
        let mut config = RunConfig::default();
        let pairs = vec![KvPair { key: "nope".into(), value: "1".into(), line: 7 }];
        let err = config.apply_pairs(&pairs).unwrap_err();
        assert!(err.to_string().contains("line 7"), "got {err}");
    }

    #[test]
    fn validation_catches_out_of_range_values() {
        let mut config = RunConfig::default();
        config.decision_threshold = 1.5;
        assert!(config.validate().is_err());

        let mut config = RunConfig::default();
        config.synthetic_circuity_factor = 0.8;
        assert!(config.validate().is_err());

        let mut config = RunConfig::default();
        config.router_mode = RouterMode::Remote;
        assert!(config.validate().is_err(), "remote mode without a base URL");
        config.router_base_url = Some("http://router.example".into());
        config.validate().unwrap();
    }

    #[test]
    fn echo_lists_every_key() {
        let echo = RunConfig::default().echo();
        assert_eq!(echo.len(), 21);
        assert_eq!(echo["decision.rule"], "threshold");
        assert_eq!(echo["router.base_url"], "");
        // Sorted keys: BTreeMap guarantees deterministic iteration.
        let keys: Vec<&String> = echo.keys().collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
    }
}

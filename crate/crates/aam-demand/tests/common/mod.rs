//! Shared fixture plumbing for the integration suites. Each test target
//! compiles this module separately and uses a different subset of it.
#![allow(dead_code)]

use std::path::PathBuf;

use aam_demand::calibrate::{fit_blocktime_model, fit_fare_model, ModelSet};
use aam_demand::ingest::{
    load_blocktime_samples, load_fare_samples, load_hubs, load_params, load_tracts, load_trips,
    EconomicParams, TripDemand,
};
use aam_demand::pipeline::config::RunConfig;
use aam_demand::pipeline::EvalContext;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

/// Fits the bundled calibration samples with default settings.
pub fn fixture_models() -> ModelSet {
    let dir = fixtures_dir().join("calibration");
    let fares = load_fare_samples(&dir.join("fare_samples.csv")).unwrap();
    let blocktimes = load_blocktime_samples(&dir.join("blocktime_samples.csv")).unwrap();
    ModelSet {
        fare: fit_fare_model(&fares).unwrap(),
        blocktime: fit_blocktime_model(&blocktimes, 2, 0.25).unwrap(),
    }
}

/// Economic parameters of the bundled scenario.
pub fn scenario_params() -> EconomicParams {
    load_params(&fixtures_dir().join("scenario/params.kv"))
        .unwrap()
        .economic
}

/// Run configuration of the bundled scenario: defaults, the scenario config
/// file, then any extra keys in the parameter file.
pub fn scenario_config() -> RunConfig {
    let dir = fixtures_dir().join("scenario");
    let mut config = RunConfig::default();
    let pairs = aam_demand::ingest::parse_kv_file(&dir.join("run.kv")).unwrap();
    config.apply_pairs(&pairs).unwrap();
    let params = load_params(&dir.join("params.kv")).unwrap();
    config.apply_pairs(&params.overrides).unwrap();
    config.validate().unwrap();
    config
}

/// The bundled 1,000-trip scenario, ready to evaluate.
pub fn scenario_context() -> (EvalContext, Vec<TripDemand>) {
    let dir = fixtures_dir().join("scenario");
    let config = scenario_config();
    let tracts = load_tracts(&dir.join("tracts.csv")).unwrap();
    let hubs = load_hubs(
        &dir.join("hubs.csv"),
        config.dwell_depart_h,
        config.dwell_arrive_h,
    )
    .unwrap();
    let trips = load_trips(&dir.join("trips.csv"), &tracts).unwrap();
    let ctx = EvalContext::new(tracts, hubs, fixture_models(), scenario_params(), config).unwrap();
    (ctx, trips)
}

//! Command-line interface: calibrate models, evaluate a demand table,
//! recompute aggregates from a saved run, and sweep the choice curve.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::calibrate::{fit_blocktime_model, fit_fare_model, ModelSet};
use crate::error::Result;
use crate::ingest::{
    load_blocktime_samples, load_fare_samples, load_hubs, load_params, load_tracts, load_trips,
    parse_kv_file,
};
use crate::models::Mode;
use crate::pipeline::aggregate::{aggregate_means, demographic_shares, write_means, write_shares};
use crate::pipeline::config::RunConfig;
use crate::pipeline::curves::{emit_curves, parse_grid, write_curves};
use crate::pipeline::{
    read_evals, run_meta, sha256_hex, write_evals, write_json, EvalContext, EvalRow,
};

#[derive(Debug, Parser)]
#[command(name = "aam-demand", version, about = "Trip-level mode choice engine for advanced air mobility demand studies")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the fare and block-time models from sampled service data.
    Calibrate {
        /// CSV of distance_mi,fare_usd samples.
        #[arg(long)]
        fares: PathBuf,
        /// CSV of distance_mi,block_h samples.
        #[arg(long)]
        blocktimes: PathBuf,
        /// Optional key=value run configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output path for the fitted model file (JSON).
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate a demand table: per-trip costs, probabilities, choices, and
    /// the aggregate tables.
    Evaluate {
        /// CSV of trips (origin,dest,count plus optional demographics).
        #[arg(long)]
        trips: PathBuf,
        /// CSV of census tracts (tract_id,lat,lon,median_hourly_wage).
        #[arg(long)]
        tracts: PathBuf,
        /// CSV of hub airports (code,lat,lon with optional processing hours).
        #[arg(long)]
        hubs: PathBuf,
        /// Fitted model file from the calibrate step.
        #[arg(long)]
        models: PathBuf,
        /// Economic parameter file (key=value).
        #[arg(long)]
        params: PathBuf,
        /// Optional key=value run configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute the aggregate tables from a saved per-trip table.
    Report {
        /// Per-trip table written by evaluate.
        #[arg(long)]
        evals: PathBuf,
        /// Output directory.
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Sweep a canonical trip over a distance grid and report the curves.
    Curves {
        /// Fitted model file from the calibrate step.
        #[arg(long)]
        models: PathBuf,
        /// Economic parameter file (key=value).
        #[arg(long)]
        params: PathBuf,
        /// Optional key=value run configuration file.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Distance grid as start:end:step, in miles.
        #[arg(long, default_value = "10:800:10")]
        grid: String,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Calibrate { fares, blocktimes, config, out } => {
            run_calibrate(&fares, &blocktimes, config.as_deref(), &out)
        }
        Command::Evaluate { trips, tracts, hubs, models, params, config, out } => {
            run_evaluate(&trips, &tracts, &hubs, &models, &params, config.as_deref(), &out)
        }
        Command::Report { evals, out_dir } => run_report(&evals, &out_dir),
        Command::Curves { models, params, config, grid, out } => {
            run_curves(&models, &params, config.as_deref(), &grid, &out)
        }
    }
}

/// Defaults, then the optional config file, then any extra keys from the
/// params file, then the environment fallback for the router URL.
fn build_config(
    config_path: Option<&Path>,
    params_path: Option<&Path>,
) -> Result<(RunConfig, Option<crate::ingest::ParamsFile>)> {
    let mut config = RunConfig::default();
    if let Some(path) = config_path {
        let pairs = parse_kv_file(path)?;
        config.apply_pairs(&pairs)?;
    }
    let params = match params_path {
        Some(path) => {
            let file = load_params(path)?;
            config.apply_pairs(&file.overrides)?;
            Some(file)
        }
        None => None,
    };
    config.resolve_env();
    config.validate()?;
    Ok((config, params))
}

fn run_calibrate(
    fares: &Path,
    blocktimes: &Path,
    config_path: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let (config, _) = build_config(config_path, None)?;
    let fare_samples = load_fare_samples(fares)?;
    let blocktime_samples = load_blocktime_samples(blocktimes)?;
    let fare = fit_fare_model(&fare_samples)?;
    let blocktime = fit_blocktime_model(
        &blocktime_samples,
        config.blocktime_degree,
        config.blocktime_min_block_h,
    )?;
    let set = ModelSet { fare, blocktime };
    set.save(out)?;
    println!(
        "calibrated fare (per-mile scale {:.4}, exponent {:.4}) over [{:.0}, {:.0}] mi from {} samples",
        set.fare.scale_usd_per_mi(),
        set.fare.log_slope,
        set.fare.domain_min_mi,
        set.fare.domain_max_mi,
        fare_samples.len()
    );
    println!(
        "calibrated block time (degree {}, floor {} h) from {} samples",
        set.blocktime.poly.degree(),
        set.blocktime.min_block_h,
        blocktime_samples.len()
    );
    println!("models written to {}", out.display());
    Ok(())
}

fn write_aggregates(out_dir: &Path, rows: &[EvalRow]) -> Result<()> {
    write_means(&out_dir.join("means.csv"), &aggregate_means(rows))?;
    write_shares(&out_dir.join("shares.csv"), &demographic_shares(rows))?;
    Ok(())
}

fn run_evaluate(
    trips_path: &Path,
    tracts_path: &Path,
    hubs_path: &Path,
    models_path: &Path,
    params_path: &Path,
    config_path: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let (config, params_file) = build_config(config_path, Some(params_path))?;
    let params = params_file.expect("params path was provided").economic;
    let tracts = load_tracts(tracts_path)?;
    let hubs = load_hubs(hubs_path, config.dwell_depart_h, config.dwell_arrive_h)?;
    let trips = load_trips(trips_path, &tracts)?;
    let models = ModelSet::load(models_path)?;
    let models_digest = sha256_hex(models_path)?;

    let ctx = EvalContext::new(tracts, hubs, models, params, config)?;
    let evaluations = crate::pipeline::evaluate_all(&trips, &ctx)?;
    ctx.router.persist_cache()?;

    std::fs::create_dir_all(out).map_err(|e| crate::error::Error::io(out, e))?;
    write_evals(&out.join("evals.csv"), &evaluations)?;
    let rows: Vec<EvalRow> = evaluations.iter().map(|e| e.to_row()).collect();
    write_aggregates(out, &rows)?;
    write_json(&out.join("run_meta.json"), &run_meta(&ctx, &evaluations, &models_digest))?;

    let chosen_aam = evaluations.iter().filter(|e| e.chosen == Mode::Aam).count();
    println!(
        "evaluated {} trips ({} chose the air mode); outputs in {}",
        evaluations.len(),
        chosen_aam,
        out.display()
    );
    Ok(())
}

fn run_report(evals: &Path, out_dir: &Path) -> Result<()> {
    let rows = read_evals(evals)?;
    std::fs::create_dir_all(out_dir).map_err(|e| crate::error::Error::io(out_dir, e))?;
    write_aggregates(out_dir, &rows)?;
    println!(
        "aggregated {} rows into {} and {}",
        rows.len(),
        out_dir.join("means.csv").display(),
        out_dir.join("shares.csv").display()
    );
    Ok(())
}

fn run_curves(
    models_path: &Path,
    params_path: &Path,
    config_path: Option<&Path>,
    grid_spec: &str,
    out: &Path,
) -> Result<()> {
    let (config, params_file) = build_config(config_path, Some(params_path))?;
    let params = params_file.expect("params path was provided").economic;
    let models = ModelSet::load(models_path)?;
    let models_digest = sha256_hex(models_path)?;
    let grid = parse_grid(grid_spec)?;
    let bundle = emit_curves(&models, &params, &config, &grid)?;

    std::fs::create_dir_all(out).map_err(|e| crate::error::Error::io(out, e))?;
    write_curves(&out.join("curves.csv"), &bundle)?;
    let meta = json!({
        "config": config.echo(),
        "crossing_distance_mi": bundle.crossing_distance_mi,
        "grid": grid_spec,
        "models_sha256": models_digest,
        "rows": bundle.rows.len(),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "upward_crossings": bundle.upward_crossings(),
    });
    write_json(&out.join("curves_meta.json"), &meta)?;

    match bundle.crossing_distance_mi {
        Some(d) => println!(
            "swept {} distances; the air mode first wins at {d} mi; outputs in {}",
            bundle.rows.len(),
            out.display()
        ),
        None => println!(
            "swept {} distances; the air mode never crosses one half; outputs in {}",
            bundle.rows.len(),
            out.display()
        ),
    }
    Ok(())
}

//! Acceptance suite: one test per release criterion. Each test prints a
//! single `ACCEPTANCE <n> PASS/FAIL: ...` line (visible under
//! `cargo test --test acceptance -- --nocapture`) before asserting, so a run
//! always yields a per-criterion verdict table. Tolerances and time budgets
//! are pinned here on purpose; loosening one is a release decision, not a
//! test tweak.
//!
//! Criterion 7 (risk negligibility) currently fails, and that failure is
//! real, not a bug: with the pinned parameters the ground risk term is a
//! fixed 22.9% of the ground monetary term for every trip, two orders of
//! magnitude above the 1% bar. The test reports the measured ratios and
//! fails honestly rather than bending the bar. See README.md.

mod common;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use aam_demand::calibrate::fit_polynomial;
use aam_demand::choice::{gct, p_aam, sample_utilities, GctResult, RangeClass, RAM_MAX_MI};
use aam_demand::geo::{haversine_distance, EarthModel, GeoPoint, EARTH_RADIUS_MILES};
use aam_demand::ingest::{
    load_blocktime_samples, load_fare_samples, load_hubs, load_tracts, load_trips,
    write_blocktime_samples, write_fare_samples, write_hubs, write_tracts, write_trips, AgeBand,
    BlockTimeSample, EarningBand, FareSample, Industry, TripDemand,
};
use aam_demand::models::Mode;
use aam_demand::pipeline::aggregate::{aggregate_means, demographic_shares, write_means, write_shares};
use aam_demand::pipeline::config::{DecisionRuleKind, RunConfig};
use aam_demand::pipeline::curves::{emit_curves, parse_grid};
use aam_demand::pipeline::{evaluate_all, sub_seed, write_evals, EvalContext, EvalRow};
use aam_demand::router::RouterMode;

fn report(n: u32, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {n} {verdict}: {detail}");
    assert!(ok, "acceptance criterion {n} failed: {detail}");
}

/// Spherical law of cosines, the reference formula the engine does not use.
fn law_of_cosines_mi(a: &GeoPoint, b: &GeoPoint, radius_mi: f64) -> f64 {
    let (p1, p2) = (a.lat_deg().to_radians(), b.lat_deg().to_radians());
    let dl = (b.lon_deg() - a.lon_deg()).to_radians();
    let arg = p1.sin() * p2.sin() + p1.cos() * p2.cos() * dl.cos();
    radius_mi * arg.clamp(-1.0, 1.0).acos()
}

#[test]
fn criterion_1_great_circle_formula_exactness() {
    const REL_TOL: f64 = 1e-6;
    let earth = EarthModel::default();
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    let start = Instant::now();

    let mut checked = 0usize;
    let mut worst_rel = 0.0f64;
    while checked < 1000 {
        let a = GeoPoint::new(rng.random_range(-89.0..=89.0), rng.random_range(-180.0..=180.0))
            .unwrap();
        let b = GeoPoint::new(rng.random_range(-89.0..=89.0), rng.random_range(-180.0..=180.0))
            .unwrap();
        let reference = law_of_cosines_mi(&a, &b, earth.radius_mi());
        // The reference formula is ill-conditioned near coincident and
        // antipodal points, so the comparison set excludes both.
        if reference < 1.0 || reference > earth.radius_mi() * (std::f64::consts::PI - 0.015) {
            continue;
        }
        let got = haversine_distance(&a, &b, &earth);
        worst_rel = worst_rel.max(((got - reference) / reference).abs());
        checked += 1;
    }

    let half_circumference = std::f64::consts::PI * EARTH_RADIUS_MILES;
    let mut worst_antipodal = 0.0f64;
    for (lat, lon) in [(0.0, 0.0), (0.0, 90.0), (45.0, 45.0), (37.5, -100.0), (-12.25, 17.0)] {
        let a = GeoPoint::new(lat, lon).unwrap();
        let b = GeoPoint::new(-lat, if lon > 0.0 { lon - 180.0 } else { lon + 180.0 }).unwrap();
        let got = haversine_distance(&a, &b, &earth);
        worst_antipodal = worst_antipodal.max((got - half_circumference).abs());
    }

    let elapsed = start.elapsed();
    let ok = worst_rel <= REL_TOL && worst_antipodal <= 1e-9 && elapsed.as_secs_f64() < 1.0;
    report(
        1,
        ok,
        &format!(
            "haversine vs law-of-cosines on 1000 pairs: worst rel err {worst_rel:.3e} \
             (tol 1e-6); antipodal worst abs err {worst_antipodal:.3e} mi (tol 1e-9); \
             {elapsed:.2?} (budget 1 s)"
        ),
    );
}

#[test]
fn criterion_2_least_squares_recovers_polynomials() {
    const PREDICT_TOL: f64 = 1e-7;
    const ORTHO_TOL: f64 = 1e-8;
    let start = Instant::now();
    let xs: Vec<f64> = (0..=20).map(f64::from).collect();
    let generators: [&[f64]; 4] = [
        &[2.5],
        &[1.0, -0.75],
        &[0.5, 1.25, -0.04],
        &[12.0, -3.0, 0.25, 0.01],
    ];

    // |A_j . r| <= tol * ||A_j|| * ||y|| for every raw power column A_j.
    let orthogonality_ok = |xs: &[f64], ys: &[f64], model: &aam_demand::calibrate::PolynomialModel| {
        let residuals: Vec<f64> = xs
            .iter()
            .zip(ys)
            .map(|(&x, &y)| y - model.eval(x))
            .collect();
        let y_norm = ys.iter().map(|y| y * y).sum::<f64>().sqrt();
        (0..=model.degree()).all(|j| {
            let col: Vec<f64> = xs.iter().map(|&x| x.powi(j as i32)).collect();
            let dot: f64 = col.iter().zip(&residuals).map(|(a, r)| a * r).sum();
            let col_norm = col.iter().map(|a| a * a).sum::<f64>().sqrt();
            dot.abs() <= ORTHO_TOL * col_norm * y_norm
        })
    };

    let mut worst_pred = 0.0f64;
    let mut all_orthogonal = true;
    for coeffs in generators {
        let truth = |x: f64| coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c);
        let ys: Vec<f64> = xs.iter().map(|&x| truth(x)).collect();
        let model = fit_polynomial(&xs, &ys, coeffs.len() - 1).unwrap();
        for &x in &xs {
            worst_pred = worst_pred.max((model.eval(x) - truth(x)).abs());
        }
        all_orthogonal &= orthogonality_ok(&xs, &ys, &model);
    }

    // Orthogonality must also hold with a residual that is genuinely nonzero.
    let mut rng = ChaCha12Rng::seed_from_u64(22);
    let noisy: Vec<f64> = xs
        .iter()
        .map(|&x| 0.5 + 1.25 * x - 0.04 * x * x + rng.random_range(-0.5..0.5))
        .collect();
    let noisy_model = fit_polynomial(&xs, &noisy, 2).unwrap();
    all_orthogonal &= orthogonality_ok(&xs, &noisy, &noisy_model);

    let elapsed = start.elapsed();
    let ok = worst_pred <= PREDICT_TOL && all_orthogonal && elapsed.as_secs_f64() < 1.0;
    report(
        2,
        ok,
        &format!(
            "noiseless degrees 0-3 recovered: worst prediction err {worst_pred:.3e} \
             (tol 1e-7); residual orthogonality within 1e-8 relative incl. noisy fit: \
             {all_orthogonal}; {elapsed:.2?} (budget 1 s)"
        ),
    );
}

fn gct_from_outlay(outlay_usd: f64) -> GctResult {
    gct(outlay_usd, 1.0, 0.0, 0.0).unwrap()
}

#[test]
fn criterion_3_logit_identities_and_gumbel_equivalence() {
    let start = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(33);

    let mut equal_inputs_exact = true;
    for _ in 0..100 {
        let x = gct_from_outlay(rng.random_range(0.0..1e6));
        equal_inputs_exact &= p_aam(&x, &x, 1.0).unwrap() == 0.5;
    }

    let quarter = p_aam(&gct_from_outlay(0.0), &gct_from_outlay(3f64.ln()), 1.0).unwrap();
    let quarter_ok = (quarter - 0.25).abs() <= 1e-12;

    // Dyadic inputs keep every shifted sum exact, so translation invariance
    // is tested as a property of the formula, not of float rounding.
    let mut translation_ok = true;
    for _ in 0..100 {
        let dyadic = |r: &mut ChaCha12Rng| (r.random_range(0..1u64 << 30) as f64) / 1024.0;
        let (g, a, shift) = (dyadic(&mut rng), dyadic(&mut rng), dyadic(&mut rng));
        for scale in [1.0, 0.5] {
            let base = p_aam(&gct_from_outlay(g), &gct_from_outlay(a), scale).unwrap();
            let shifted =
                p_aam(&gct_from_outlay(g + shift), &gct_from_outlay(a + shift), scale).unwrap();
            translation_ok &= (base - shifted).abs() <= 1e-12;
        }
    }

    // Random-utility view: Gumbel-noise win rate vs the closed form, 3 sigma.
    let n = 100_000u64;
    let ground = gct_from_outlay(300.0);
    let aam = gct_from_outlay(301.2);
    let p_closed = p_aam(&ground, &aam, 1.0).unwrap();
    let wins = (0..n)
        .filter(|&k| {
            sample_utilities(&ground, &aam, 1.0, sub_seed(4242, k))
                .unwrap()
                .chosen()
                == Mode::Aam
        })
        .count();
    let rate = wins as f64 / n as f64;
    let sigma = (p_closed * (1.0 - p_closed) / n as f64).sqrt();
    let mc_ok = (rate - p_closed).abs() <= 3.0 * sigma;

    let elapsed = start.elapsed();
    let ok = equal_inputs_exact && quarter_ok && translation_ok && mc_ok
        && elapsed.as_secs_f64() < 5.0;
    report(
        3,
        ok,
        &format!(
            "p(x,x)=0.5 exactly x100: {equal_inputs_exact}; ln3 gap -> {quarter:.15} \
             (0.25 within 1e-12); translation invariance 1e-12: {translation_ok}; \
             Gumbel MC rate {rate:.5} vs closed form {p_closed:.5} within 3 sigma \
             ({:.5}): {mc_ok}; {elapsed:.2?} (budget 5 s)",
            3.0 * sigma
        ),
    );
}

#[test]
fn criterion_4_single_stable_mode_crossing() {
    let start = Instant::now();
    let models = common::fixture_models();
    let params = common::scenario_params();
    let config = common::scenario_config();
    let grid = parse_grid("10:800:10").unwrap();
    let step = grid[1] - grid[0];

    let first = emit_curves(&models, &params, &config, &grid).unwrap();
    let crossing = first.crossing_distance_mi;
    let single = first.upward_crossings() == 1;

    let mut stable = crossing.is_some();
    for _ in 0..4 {
        let rerun = emit_curves(&models, &params, &config, &grid).unwrap();
        stable &= rerun.upward_crossings() == 1;
        stable &= match (crossing, rerun.crossing_distance_mi) {
            (Some(a), Some(b)) => (a - b).abs() <= step,
            _ => false,
        };
    }

    let elapsed = start.elapsed();
    let ok = single && stable && crossing == Some(250.0) && elapsed.as_secs_f64() < 10.0;
    report(
        4,
        ok,
        &format!(
            "probability sweep has exactly one upward 0.5-crossing: {single}; at \
             {crossing:?} mi (expected 250.0), stable to within one {step} mi grid \
             step over 5 runs: {stable}; {elapsed:.2?} (budget 10 s)"
        ),
    );
}

fn scenario_rows() -> Vec<EvalRow> {
    let (ctx, trips) = common::scenario_context();
    evaluate_all(&trips, &ctx)
        .unwrap()
        .iter()
        .map(|e| e.to_row())
        .collect()
}

#[test]
fn criterion_5_air_segment_dominates_beyond_crossing() {
    let rows = scenario_rows();
    let bundle = emit_curves(
        &common::fixture_models(),
        &common::scenario_params(),
        &common::scenario_config(),
        &parse_grid("10:800:10").unwrap(),
    )
    .unwrap();
    let crossing = bundle.crossing_distance_mi.unwrap();

    let shares: Vec<f64> = rows
        .iter()
        .filter(|r| r.chosen == Mode::Aam && r.air_distance_mi.is_some_and(|d| d > crossing))
        .map(|r| r.air_share_of_gct.unwrap())
        .collect();
    let min_share = shares.iter().copied().fold(f64::INFINITY, f64::min);

    let ok = shares.len() == 145 && shares.iter().all(|&s| s > 0.70);
    report(
        5,
        ok,
        &format!(
            "{} air-chosen trips fly farther than the {crossing} mi crossing; every \
             air share of total generalized cost > 0.70 (min {min_share:.4})",
            shares.len()
        ),
    );
}

#[test]
fn criterion_6_mode_means_directionality() {
    let rows = scenario_rows();
    let chosen_air = rows.iter().filter(|r| r.chosen == Mode::Aam).count();
    let by_class =
        |c: RangeClass| rows.iter().filter(|r| r.range_class == c).count();

    let means = aggregate_means(&rows);
    let get = |name: &str| {
        let row = means.rows.iter().find(|r| r.variable == name).unwrap();
        (row.non_aam.unwrap(), row.aam.unwrap())
    };
    let (od_ground, od_aam) = get("od_distance_mi");
    let (air_time_ground, air_time_aam) = get("air_time_h");

    let directional = od_aam > od_ground && air_time_aam > air_time_ground;
    // Pin the deterministic fixture aggregates so a silent pipeline change
    // cannot pass on direction alone.
    let rel = |a: f64, e: f64| ((a - e) / e).abs() <= 1e-9;
    let pinned = chosen_air == 146
        && by_class(RangeClass::Uam) == 49
        && by_class(RangeClass::Ram) == 405
        && by_class(RangeClass::OutOfRange) == 9
        && by_class(RangeClass::AamInfeasible) == 537
        && rel(od_aam, 348.1086994754384)
        && rel(od_ground, 61.251573834416234)
        && rel(air_time_aam, 1.6867534702626463)
        && rel(air_time_ground, 0.9822533840627528);

    report(
        6,
        directional && pinned,
        &format!(
            "mean od distance air-chosen {od_aam:.2} mi > ground-chosen {od_ground:.2} mi; \
             mean air time air-chosen {air_time_aam:.3} h > ground-chosen \
             {air_time_ground:.3} h; fixture aggregates pinned: {pinned}"
        ),
    );
}

#[test]
fn criterion_7_risk_below_one_percent_of_monetary() {
    let rows = scenario_rows();
    let mut worst_ground = 0.0f64;
    let mut worst_air = 0.0f64;
    for r in rows.iter().filter(|r| r.od_great_circle_mi <= RAM_MAX_MI) {
        worst_ground = worst_ground.max(r.ground_risk_usd / r.ground_monetary_usd);
        if let (Some(risk), Some(monetary)) = (r.aam_risk_usd, r.aam_monetary_usd) {
            worst_air = worst_air.max(risk / monetary);
        }
    }

    let ok = worst_ground < 0.01 && worst_air < 0.01;
    report(
        7,
        ok,
        &format!(
            "risk must stay under 1% of monetary cost for both modes on every trip \
             within {RAM_MAX_MI:.1} mi; measured worst ground {:.2}% (a structural \
             vsl*fatality_rate/mileage_rate = 0.15/0.655 per-mile ratio, so this \
             holds for every trip), worst air {:.2}%",
            100.0 * worst_ground,
            100.0 * worst_air
        ),
    );
}

fn synthetic_trips(tract_ids: &[String], n: usize, seed: u64) -> Vec<TripDemand> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let origin = rng.random_range(0..tract_ids.len());
            let dest = loop {
                let d = rng.random_range(0..tract_ids.len());
                if d != origin {
                    break d;
                }
            };
            TripDemand {
                origin_tract_id: tract_ids[origin].clone(),
                dest_tract_id: tract_ids[dest].clone(),
                trip_count: rng.random_range(1..=5),
                age_band: AgeBand::ALL[rng.random_range(0..AgeBand::ALL.len())],
                earning_band: EarningBand::ALL[rng.random_range(0..EarningBand::ALL.len())],
                industry: Industry::ALL[rng.random_range(0..Industry::ALL.len())],
            }
        })
        .collect()
}

#[test]
fn criterion_8_hundred_thousand_trips_fast_and_deterministic() {
    let scenario = common::fixtures_dir().join("scenario");
    let load = || load_tracts(&scenario.join("tracts.csv")).unwrap();
    let tract_ids: Vec<String> = load().iter().map(|t| t.tract_id.clone()).collect();
    let trips = synthetic_trips(&tract_ids, 100_000, 99);

    let outputs = |workers: usize, dir: &std::path::Path| {
        let config = RunConfig {
            decision_rule: DecisionRuleKind::Sample,
            decision_seed: 777,
            workers,
            router_mode: RouterMode::Synthetic,
            ..common::scenario_config()
        };
        let tracts = load();
        let hubs = load_hubs(&scenario.join("hubs.csv"), config.dwell_depart_h, config.dwell_arrive_h)
            .unwrap();
        let ctx = EvalContext::new(tracts, hubs, common::fixture_models(), common::scenario_params(), config)
            .unwrap();
        let evals = evaluate_all(&trips, &ctx).unwrap();
        let rows: Vec<EvalRow> = evals.iter().map(|e| e.to_row()).collect();
        write_evals(&dir.join("evals.csv"), &evals).unwrap();
        write_means(&dir.join("means.csv"), &aggregate_means(&rows)).unwrap();
        write_shares(&dir.join("shares.csv"), &demographic_shares(&rows)).unwrap();
        ["evals.csv", "means.csv", "shares.csv"].map(|f| std::fs::read(dir.join(f)).unwrap())
    };

    let tmp = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let first = outputs(0, &tmp.path().join_and_create("run1"));
    let elapsed = start.elapsed();

    let second = outputs(0, &tmp.path().join_and_create("run2"));
    let serial = outputs(1, &tmp.path().join_and_create("serial"));
    let eight = outputs(8, &tmp.path().join_and_create("eight"));

    let reruns_identical = first == second;
    let workers_identical = serial == eight && serial == first;
    let ok = elapsed.as_secs_f64() < 10.0 && reruns_identical && workers_identical;
    report(
        8,
        ok,
        &format!(
            "100,000 trips evaluated and written in {elapsed:.2?} (budget 10 s); reruns \
             byte-identical: {reruns_identical}; workers 1 vs 8 vs auto byte-identical: \
             {workers_identical}"
        ),
    );
}

trait JoinAndCreate {
    fn join_and_create(&self, name: &str) -> std::path::PathBuf;
}

impl JoinAndCreate for std::path::Path {
    fn join_and_create(&self, name: &str) -> std::path::PathBuf {
        let dir = self.join(name);
        std::fs::create_dir_all(&dir).unwrap();
        dir
    }
}

#[test]
fn criterion_9_csv_round_trips_on_fuzzed_rows() {
    const N: usize = 1000;
    let mut rng = ChaCha12Rng::seed_from_u64(55);
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    let tracts: Vec<_> = (0..N)
        .map(|i| {
            aam_demand::geo::CensusTract::new(
                format!("T{i:04}"),
                GeoPoint::new(rng.random_range(-89.0..=89.0), rng.random_range(-180.0..=180.0))
                    .unwrap(),
                rng.random_range(8.0..200.0),
            )
            .unwrap()
        })
        .collect();
    write_tracts(&dir.join("tracts.csv"), &tracts).unwrap();
    let tracts_back = load_tracts(&dir.join("tracts.csv")).unwrap();
    let tracts_ok = tracts == tracts_back;

    let hubs: Vec<_> = (0..N)
        .map(|i| {
            aam_demand::geo::HubAirport::new(
                format!("H{i:04}"),
                GeoPoint::new(rng.random_range(-89.0..=89.0), rng.random_range(-180.0..=180.0))
                    .unwrap(),
                rng.random_range(0.0..2.0),
                rng.random_range(0.0..2.0),
            )
            .unwrap()
        })
        .collect();
    write_hubs(&dir.join("hubs.csv"), &hubs).unwrap();
    let hubs_back = load_hubs(&dir.join("hubs.csv"), 9.9, 9.9).unwrap();
    let hubs_ok = hubs == hubs_back;

    let ids: Vec<String> = tracts.iter().map(|t| t.tract_id.clone()).collect();
    let trips = synthetic_trips(&ids, N, 56);
    write_trips(&dir.join("trips.csv"), &trips).unwrap();
    let trips_back = load_trips(&dir.join("trips.csv"), &tracts_back).unwrap();
    let trips_ok = trips == trips_back;

    let fares: Vec<_> = (0..N)
        .map(|_| FareSample {
            distance_mi: rng.random_range(1.0..5000.0),
            fare_usd: rng.random_range(10.0..5000.0),
        })
        .collect();
    write_fare_samples(&dir.join("fares.csv"), &fares).unwrap();
    let fares_ok = fares == load_fare_samples(&dir.join("fares.csv")).unwrap();

    let blocks: Vec<_> = (0..N)
        .map(|_| BlockTimeSample {
            distance_mi: rng.random_range(1.0..5000.0),
            block_h: rng.random_range(0.1..20.0),
        })
        .collect();
    write_blocktime_samples(&dir.join("blocks.csv"), &blocks).unwrap();
    let blocks_ok = blocks == load_blocktime_samples(&dir.join("blocks.csv")).unwrap();

    let ok = tracts_ok && hubs_ok && trips_ok && fares_ok && blocks_ok;
    report(
        9,
        ok,
        &format!(
            "load-write-load equality on 1000 fuzzed rows per schema: tracts \
             {tracts_ok}, hubs {hubs_ok}, trips {trips_ok}, fare samples {fares_ok}, \
             block time samples {blocks_ok}"
        ),
    );
}

//! Monte Carlo experiment drivers.
//!
//! Each authentication trial simulates three consecutive slots on the road:
//! the two older slots provide the tracker's feature vector (ToAs, their
//! differences, and the extracted position), the tracker predicts the
//! legitimate vehicle's position for the newest slot, and both the
//! legitimate vehicle and the attacker then transmit in that slot and are
//! scored against the prediction.

use super::config::{ExperimentConfig, ModelKind};
use super::table::{fmt_coord, fmt_metric, Provenance, ResultTable};
use crate::authenticator::{aoa_estimate, aoa_test_statistic, test_statistic};
use crate::channel::{measure_range, LinkQuality};
use crate::localizer::{build_system, solve_ls};
use crate::rng::{substream, tag};
use crate::scenario::{build_road_scenario, select_rsus, Scenario, ScenarioConfig};
use crate::tracker::{
    evaluate, fit_decision_tree, fit_svr, generate_dataset, split_dataset, Dataset, GenConfig,
    RegressionMetrics, Regressor, FEATURE_DIM,
};
use crate::{Error, Result, Vec2};
use rand::Rng;
use rayon::prelude::*;

/// Scores of one sweep point: position and AoA test statistics under both
/// hypotheses, ordered by trial index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScoreSet {
    pub pos_h0: Vec<f64>,
    pub pos_h1: Vec<f64>,
    pub aoa_h0: Vec<f64>,
    pub aoa_h1: Vec<f64>,
    pub skipped: usize,
    pub trials: usize,
}

/// One row of the error sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub lq_db: f64,
    pub threshold: f64,
    pub speed: f64,
    pub pfa: f64,
    pub pmd: f64,
    pub pfa_baseline: f64,
    pub pmd_baseline: f64,
}

/// One row of an ROC table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocRow {
    pub lq_db: f64,
    pub speed: f64,
    pub threshold: f64,
    pub pfa: f64,
    pub pd: f64,
}

/// One row of the regressor benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub model: &'static str,
    pub metrics: RegressionMetrics,
}

struct TrialScores {
    pos_h0: f64,
    pos_h1: f64,
    aoa_h0: f64,
    aoa_h1: f64,
}

/// Localize a transmitter at `tx` in the given scenario, returning the
/// extracted position, the ToAs, and the selected anchors.
fn localize_once<R: Rng>(
    scn: &Scenario,
    cfg: &ExperimentConfig,
    lq: LinkQuality,
    tx: Vec2,
    rng: &mut R,
) -> Result<(Vec2, [f64; 3], Vec<crate::scenario::Rsu>)> {
    let anchors = select_rsus(scn, tx, 3)?;
    let mut toas = [0.0; 3];
    let mut ranges = Vec::with_capacity(3);
    for (slot, rsu) in anchors.iter().enumerate() {
        let d = rsu.position.distance(tx);
        let (obs, range) = measure_range(rng, &cfg.channel, lq, rsu.id, d)?;
        toas[slot] = obs.toa;
        ranges.push(range);
    }
    let est = solve_ls(&build_system(&anchors, &ranges)?)?;
    Ok((est.position, toas, anchors))
}

/// One authentication trial at a random point along the road.
fn auth_trial<R: Rng>(
    scn: &Scenario,
    cfg: &ExperimentConfig,
    model: &Regressor,
    lq: LinkQuality,
    speed: f64,
    rng: &mut R,
) -> Result<TrialScores> {
    let dt = cfg.slot_dt;
    let y = scn.legit.position.y;
    let x0: f64 = rng.gen_range(0.0..scn.road_length);
    // wrap at the road end (the road-end reset policy)
    let at = |x: f64| Vec2::new(x.rem_euclid(scn.road_length), y);
    let p_prev = at(x0);
    let p_feat = at(x0 + speed * dt);
    let p_now = at(x0 + 2.0 * speed * dt);

    // Feature slot: localize at p_feat, then re-measure the same anchors
    // from the previous slot's position for the ToA differences.
    let anchors = select_rsus(scn, p_feat, 3)?;
    let mut toas = [0.0; 3];
    let mut ranges = Vec::with_capacity(3);
    for (slot, rsu) in anchors.iter().enumerate() {
        let d = rsu.position.distance(p_feat);
        let (obs, range) = measure_range(rng, &cfg.channel, lq, rsu.id, d)?;
        toas[slot] = obs.toa;
        ranges.push(range);
    }
    let est_feat = solve_ls(&build_system(&anchors, &ranges)?)?;
    let mut toa_diffs = [0.0; 3];
    for (slot, rsu) in anchors.iter().enumerate() {
        let d = rsu.position.distance(p_prev);
        let (obs, _) = measure_range(rng, &cfg.channel, lq, rsu.id, d)?;
        toa_diffs[slot] = toas[slot] - obs.toa;
    }
    let features: [f64; FEATURE_DIM] = [
        lq.lq_db,
        toas[0],
        toas[1],
        toas[2],
        toa_diffs[0],
        toa_diffs[1],
        toa_diffs[2],
        est_feat.position.x,
        est_feat.position.y,
    ];
    let p_ground = model.predict(&features);

    // Newest slot: the legitimate vehicle transmits, then the attacker
    // transmits in the idle slot at its fixed offset.
    let (p_hat_legit, _, anchors_l) = localize_once(scn, cfg, lq, p_now, rng)?;
    let pos_h0 = test_statistic(p_hat_legit, p_ground);

    let p_attacker = p_now + scn.attacker_offset;
    let (p_hat_att, _, anchors_a) = localize_once(scn, cfg, lq, p_attacker, rng)?;
    let pos_h1 = test_statistic(p_hat_att, p_ground);

    // AoA baseline: measured bearings of the actual transmitter against
    // perfect ground-truth bearings of the legitimate vehicle.
    let mut measured = [0.0; 3];
    let mut ground = [0.0; 3];
    for (slot, rsu) in anchors_l.iter().enumerate() {
        measured[slot] = aoa_estimate(p_now, rsu, lq, rng)?;
        let d = p_now - rsu.position;
        ground[slot] = d.y.atan2(d.x);
    }
    let aoa_h0 = aoa_test_statistic(&measured, &ground);
    for (slot, rsu) in anchors_a.iter().enumerate() {
        measured[slot] = aoa_estimate(p_attacker, rsu, lq, rng)?;
        let d = p_now - rsu.position;
        ground[slot] = d.y.atan2(d.x);
    }
    let aoa_h1 = aoa_test_statistic(&measured, &ground);

    Ok(TrialScores {
        pos_h0,
        pos_h1,
        aoa_h0,
        aoa_h1,
    })
}

fn sweep_scenario(cfg: &ExperimentConfig, speed: f64) -> Result<Scenario> {
    build_road_scenario(&ScenarioConfig {
        speed,
        ..cfg.scenario.clone()
    })
}

/// Run `trials` independent authentication trials at one (LQ, speed) point.
/// Trials failing on coverage are skipped; a skip rate above 10% aborts.
pub fn collect_scores(
    cfg: &ExperimentConfig,
    model: &Regressor,
    lq_db: f64,
    speed: f64,
    trials: usize,
    stream_tag: u64,
    point_index: u64,
) -> Result<ScoreSet> {
    let scn = sweep_scenario(cfg, speed)?;
    let lq = LinkQuality::from_db(lq_db);
    let outcomes: Vec<Option<TrialScores>> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = substream(cfg.master_seed, &[stream_tag, point_index, t]);
            auth_trial(&scn, cfg, model, lq, speed, &mut rng).ok()
        })
        .collect();

    let mut set = ScoreSet {
        trials,
        ..Default::default()
    };
    for outcome in outcomes {
        match outcome {
            Some(s) => {
                set.pos_h0.push(s.pos_h0);
                set.pos_h1.push(s.pos_h1);
                set.aoa_h0.push(s.aoa_h0);
                set.aoa_h1.push(s.aoa_h1);
            }
            None => set.skipped += 1,
        }
    }
    if set.skipped * 10 > trials {
        return Err(Error::InvalidConfig(format!(
            "coverage failure rate {:.1}% at LQ {lq_db} dB, speed {speed} m/s exceeds 10%",
            100.0 * set.skipped as f64 / trials as f64
        )));
    }
    if set.pos_h0.is_empty() {
        return Err(Error::InvalidConfig("all trials failed".into()));
    }
    Ok(set)
}

fn frac_ge(scores: &[f64], thr: f64) -> f64 {
    scores.iter().filter(|&&s| s >= thr).count() as f64 / scores.len() as f64
}

/// Load the configured model file, or train one on a freshly generated
/// dataset (`model.train_slots_per_lq` rows per LQ block).
pub fn train_model(cfg: &ExperimentConfig) -> Result<Regressor> {
    if let Some(path) = &cfg.model.path {
        return Regressor::load(path);
    }
    // Train the tracker on trajectories sampled at the authentication slot
    // rate, not the offline benchmark's sampling interval.
    let gen = GenConfig {
        slots_per_lq: cfg.model.train_slots_per_lq,
        slot_dt: cfg.slot_dt,
        channel: cfg.channel,
        ..cfg.dataset.clone()
    };
    let ds = generate_dataset(&gen, cfg.master_seed)?;
    let mut split_rng = substream(cfg.master_seed, &[tag::TRAIN]);
    let (train, _) = split_dataset(&ds, cfg.model.split_ratio, &mut split_rng)?;
    match cfg.model.kind {
        ModelKind::Svr => fit_svr(&train, &cfg.model.svr),
        ModelKind::DecisionTree => fit_decision_tree(&train, &cfg.model.tree),
    }
}

/// Error-probability sweep over (LQ, threshold, speed). Rows are ordered
/// LQ-major, then threshold, then speed; thresholds share the Monte Carlo
/// scores of their (LQ, speed) point.
pub fn run_error_sweep(cfg: &ExperimentConfig, model: &Regressor) -> Result<Vec<SweepRow>> {
    let n_speeds = cfg.sweep.speeds.len();
    let mut scores = Vec::with_capacity(cfg.sweep.lq_db.len() * n_speeds);
    for (li, &lq) in cfg.sweep.lq_db.iter().enumerate() {
        for (si, &speed) in cfg.sweep.speeds.iter().enumerate() {
            let point = (li * n_speeds + si) as u64;
            scores.push(collect_scores(
                cfg,
                model,
                lq,
                speed,
                cfg.sweep.trials,
                tag::SWEEP_POINT,
                point,
            )?);
        }
    }
    let mut rows = Vec::new();
    for (li, &lq) in cfg.sweep.lq_db.iter().enumerate() {
        for &threshold in &cfg.sweep.thresholds {
            for (si, &speed) in cfg.sweep.speeds.iter().enumerate() {
                let s = &scores[li * n_speeds + si];
                rows.push(SweepRow {
                    lq_db: lq,
                    threshold,
                    speed,
                    pfa: frac_ge(&s.pos_h0, threshold),
                    pmd: 1.0 - frac_ge(&s.pos_h1, threshold),
                    pfa_baseline: frac_ge(&s.aoa_h0, cfg.sweep.aoa_threshold),
                    pmd_baseline: 1.0 - frac_ge(&s.aoa_h1, cfg.sweep.aoa_threshold),
                });
            }
        }
    }
    Ok(rows)
}

/// ROC collection: one curve per (LQ, speed), thresholds spanning
/// [0, max TS + 1] so every curve runs from (1,1) to (0,0).
pub fn run_roc(cfg: &ExperimentConfig, model: &Regressor) -> Result<Vec<RocRow>> {
    let mut rows = Vec::new();
    let n_speeds = cfg.roc.speeds.len();
    for (li, &lq) in cfg.roc.lq_db.iter().enumerate() {
        for (si, &speed) in cfg.roc.speeds.iter().enumerate() {
            let point = (li * n_speeds + si) as u64;
            let s = collect_scores(cfg, model, lq, speed, cfg.roc.trials, tag::ROC_POINT, point)?;
            let max_ts = s
                .pos_h0
                .iter()
                .chain(s.pos_h1.iter())
                .fold(0.0f64, |a, &b| a.max(b));
            let n = cfg.roc.threshold_points;
            let thresholds: Vec<f64> = (0..n)
                .map(|i| i as f64 * (max_ts + 1.0) / (n - 1) as f64)
                .collect();
            for p in crate::authenticator::roc_sweep(&s.pos_h0, &s.pos_h1, &thresholds)? {
                rows.push(RocRow {
                    lq_db: lq,
                    speed,
                    threshold: p.threshold,
                    pfa: p.p_fa,
                    pd: p.p_d,
                });
            }
        }
    }
    Ok(rows)
}

/// DT-vs-SVR benchmark: generate (or load) the dataset, split 0.7/0.3,
/// train both regressors, evaluate on the held-out split.
pub fn run_ml_benchmark(cfg: &ExperimentConfig) -> Result<Vec<BenchRow>> {
    let ds = match &cfg.dataset_file {
        Some(path) => Dataset::load(path)?,
        None => generate_dataset(&cfg.dataset, cfg.master_seed)?,
    };
    let mut split_rng = substream(cfg.master_seed, &[tag::DATASET_SPLIT]);
    let (train, test) = split_dataset(&ds, cfg.model.split_ratio, &mut split_rng)?;
    let dt = fit_decision_tree(&train, &cfg.model.tree)?;
    let svr = fit_svr(&train, &cfg.model.svr)?;
    Ok(vec![
        BenchRow {
            model: "dt",
            metrics: evaluate(&dt, &test)?,
        },
        BenchRow {
            model: "svr",
            metrics: evaluate(&svr, &test)?,
        },
    ])
}

/// CSV header of the sweep table.
pub const SWEEP_HEADER: &str = "lq_db,threshold,speed,pfa,pmd,pfa_baseline,pmd_baseline";
/// CSV header of the ROC table.
pub const ROC_HEADER: &str = "lq_db,speed,threshold,pfa,pd";
/// CSV header of the benchmark table.
pub const BENCH_HEADER: &str = "model,rmse,mse,mae,r2";

pub fn sweep_table(cfg: &ExperimentConfig, rows: &[SweepRow]) -> ResultTable {
    let lines = rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{},{}",
                fmt_coord(r.lq_db),
                fmt_coord(r.threshold),
                fmt_coord(r.speed),
                fmt_metric(r.pfa),
                fmt_metric(r.pmd),
                fmt_metric(r.pfa_baseline),
                fmt_metric(r.pmd_baseline)
            )
        })
        .collect();
    ResultTable::new(
        "sweep",
        SWEEP_HEADER,
        lines,
        Provenance::new(cfg.hash(), cfg.master_seed),
    )
}

/// Figure-analogue projection of the sweep: one error-rate pair per row.
pub fn sweep_projection(
    cfg: &ExperimentConfig,
    rows: &[SweepRow],
    kind: &'static str,
) -> ResultTable {
    let (header, pick): (&'static str, fn(&SweepRow) -> (f64, f64)) = match kind {
        "pfa_vs_lq" => ("lq_db,threshold,speed,pfa,pfa_baseline", |r| {
            (r.pfa, r.pfa_baseline)
        }),
        _ => ("lq_db,threshold,speed,pmd,pmd_baseline", |r| {
            (r.pmd, r.pmd_baseline)
        }),
    };
    let lines = rows
        .iter()
        .map(|r| {
            let (a, b) = pick(r);
            format!(
                "{},{},{},{},{}",
                fmt_coord(r.lq_db),
                fmt_coord(r.threshold),
                fmt_coord(r.speed),
                fmt_metric(a),
                fmt_metric(b)
            )
        })
        .collect();
    ResultTable::new(
        kind,
        header,
        lines,
        Provenance::new(cfg.hash(), cfg.master_seed),
    )
}

pub fn roc_table(cfg: &ExperimentConfig, rows: &[RocRow]) -> ResultTable {
    let lines = rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{}",
                fmt_coord(r.lq_db),
                fmt_coord(r.speed),
                fmt_metric(r.threshold),
                fmt_metric(r.pfa),
                fmt_metric(r.pd)
            )
        })
        .collect();
    ResultTable::new(
        "roc",
        ROC_HEADER,
        lines,
        Provenance::new(cfg.hash(), cfg.master_seed),
    )
}

pub fn bench_table(cfg: &ExperimentConfig, rows: &[BenchRow]) -> ResultTable {
    let lines = rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{}",
                r.model,
                fmt_metric(r.metrics.rmse),
                fmt_metric(r.metrics.mse),
                fmt_metric(r.metrics.mae),
                fmt_metric(r.metrics.r2)
            )
        })
        .collect();
    ResultTable::new(
        "bench",
        BENCH_HEADER,
        lines,
        Provenance::new(cfg.hash(), cfg.master_seed),
    )
}

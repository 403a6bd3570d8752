//! Mobility dataset generation: a random RSU field, a quasi-ballistic
//! vehicle walk, and per-slot noisy localization producing the 9-feature
//! training rows.

use super::{Dataset, FeatureRow};
use crate::channel::{estimate_range, measure_range, ChannelParams, LinkQuality};
use crate::localizer::{build_system, solve_ls};
use crate::rng::{substream, tag};
use crate::scenario::{deploy_random_rsus, select_rsus_from, Rsu};
use crate::{Error, Result, Vec2};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

/// Dataset-generation parameters. Defaults follow the large-region protocol:
/// 100 RSUs in a 5 km × 5 km field, link quality swept 0–20 dB in 1 dB
/// steps, speed redrawn uniformly from [0, 33] m/s every slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub region_size: f64,
    pub rsu_count: usize,
    pub lq_db_values: Vec<f64>,
    /// Recorded rows per link-quality block.
    pub slots_per_lq: usize,
    pub slot_dt: f64,
    pub rsu_range_limit: f64,
    /// RSUs per localization fix.
    pub rsus_per_fix: usize,
    pub speed_max: f64,
    /// Std-dev of the per-slot heading change, radians.
    pub heading_turn_std: f64,
    pub channel: ChannelParams,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            region_size: 5000.0,
            rsu_count: 100,
            lq_db_values: (0..=20).map(|v| v as f64).collect(),
            slots_per_lq: 15_000,
            slot_dt: 0.25,
            rsu_range_limit: 400.0,
            rsus_per_fix: 3,
            speed_max: 33.0,
            heading_turn_std: 0.3,
            channel: ChannelParams::default(),
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.region_size > 0.0) {
            return Err(Error::InvalidConfig("region_size must be > 0".into()));
        }
        if self.rsu_count < self.rsus_per_fix {
            return Err(Error::InvalidConfig(format!(
                "rsu_count {} below rsus_per_fix {}",
                self.rsu_count, self.rsus_per_fix
            )));
        }
        if self.rsus_per_fix != 3 {
            // the feature layout stores exactly three ToAs
            return Err(Error::InvalidConfig("rsus_per_fix must be 3".into()));
        }
        if self.lq_db_values.is_empty() {
            return Err(Error::InvalidConfig(
                "lq_db_values must be non-empty".into(),
            ));
        }
        if self.slots_per_lq == 0 {
            return Err(Error::InvalidConfig("slots_per_lq must be >= 1".into()));
        }
        if !(self.slot_dt > 0.0) {
            return Err(Error::InvalidConfig("slot_dt must be > 0".into()));
        }
        if !(self.rsu_range_limit > 0.0) {
            return Err(Error::InvalidConfig("rsu_range_limit must be > 0".into()));
        }
        if !(self.speed_max >= 0.0) || !(self.heading_turn_std >= 0.0) {
            return Err(Error::InvalidConfig(
                "speed_max and heading_turn_std must be >= 0".into(),
            ));
        }
        self.channel.validate()
    }
}

/// Generation side counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GenStats {
    /// Slots skipped for insufficient coverage or degenerate geometry; each
    /// skip restarts the walk at a fresh covered position.
    pub skipped_slots: u64,
}

/// Rejection-sample a start position with enough in-range RSUs.
fn sample_covered_start<R: Rng>(rsus: &[Rsu], cfg: &GenConfig, rng: &mut R) -> Result<Vec2> {
    for _ in 0..100_000 {
        let p = Vec2::new(
            rng.gen_range(0.0..cfg.region_size),
            rng.gen_range(0.0..cfg.region_size),
        );
        if select_rsus_from(rsus, cfg.rsu_range_limit, p, cfg.rsus_per_fix).is_ok() {
            return Ok(p);
        }
    }
    Err(Error::InsufficientCoverage {
        needed: cfg.rsus_per_fix,
        in_range: 0,
    })
}

/// Reflect a position into the region, mirroring the heading angle at the
/// crossed boundary.
fn reflect(mut p: Vec2, mut angle: f64, size: f64) -> (Vec2, f64) {
    if p.x < 0.0 {
        p.x = -p.x;
        angle = PI - angle;
    } else if p.x > size {
        p.x = 2.0 * size - p.x;
        angle = PI - angle;
    }
    if p.y < 0.0 {
        p.y = -p.y;
        angle = -angle;
    } else if p.y > size {
        p.y = 2.0 * size - p.y;
        angle = -angle;
    }
    (p, angle)
}

/// One link-quality block: walk until `slots_per_lq` rows are recorded.
fn generate_block(
    rsus: &[Rsu],
    cfg: &GenConfig,
    lq_db: f64,
    rng: &mut impl Rng,
) -> Result<(Vec<FeatureRow>, GenStats)> {
    let lq = LinkQuality::from_db(lq_db);
    let turn = Normal::new(0.0, cfg.heading_turn_std.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut stats = GenStats::default();
    let mut rows = Vec::with_capacity(cfg.slots_per_lq);

    let mut position = sample_covered_start(rsus, cfg, rng)?;
    let mut angle = rng.gen_range(0.0..TAU);
    // Row under construction, waiting for the next slot's extraction as its
    // label; cleared whenever the measurement chain breaks.
    let mut pending: Option<FeatureRow> = None;
    let mut prev_toas: Option<[f64; 3]> = None;

    let skip_budget = 200 * cfg.slots_per_lq as u64 + 1_000;
    while rows.len() < cfg.slots_per_lq {
        let fix = select_rsus_from(rsus, cfg.rsu_range_limit, position, cfg.rsus_per_fix).and_then(
            |anchors| {
                let mut toas = [0.0; 3];
                let mut ranges = Vec::with_capacity(anchors.len());
                for (slot, rsu) in anchors.iter().enumerate() {
                    let d = rsu.position.distance(position);
                    let (obs, _) = measure_range(rng, &cfg.channel, lq, rsu.id, d)?;
                    toas[slot] = obs.toa;
                    ranges.push(estimate_range(&obs, &cfg.channel));
                }
                let est = solve_ls(&build_system(&anchors, &ranges)?)?;
                Ok((toas, est.position))
            },
        );

        match fix {
            Ok((toas, extracted)) => {
                if let Some(mut row) = pending.take() {
                    row.label_next_position = extracted;
                    rows.push(row);
                    if rows.len() == cfg.slots_per_lq {
                        break;
                    }
                }
                let toa_diffs = match prev_toas {
                    Some(prev) => [toas[0] - prev[0], toas[1] - prev[1], toas[2] - prev[2]],
                    None => [0.0; 3],
                };
                pending = Some(FeatureRow {
                    lq_db,
                    toas,
                    toa_diffs,
                    current_position: extracted,
                    label_next_position: Vec2::ZERO,
                });
                prev_toas = Some(toas);
            }
            Err(_) => {
                // Coverage gap or degenerate fix: drop the chain and restart
                // the walk at a fresh covered position.
                stats.skipped_slots += 1;
                if stats.skipped_slots > skip_budget {
                    return Err(Error::InsufficientCoverage {
                        needed: cfg.rsus_per_fix,
                        in_range: 0,
                    });
                }
                pending = None;
                prev_toas = None;
                position = sample_covered_start(rsus, cfg, rng)?;
                angle = rng.gen_range(0.0..TAU);
                continue;
            }
        }

        let speed = rng.gen_range(0.0..=cfg.speed_max);
        angle += turn.sample(rng);
        let stepped = position + Vec2::from_angle(angle) * (speed * cfg.slot_dt);
        let (p, a) = reflect(stepped, angle, cfg.region_size);
        position = p;
        angle = a;
    }
    Ok((rows, stats))
}

/// Generate the full dataset: one block per link-quality value, each on an
/// independent substream, run in parallel. Row order is by LQ block, then
/// slot.
pub fn generate_dataset_with_stats(
    cfg: &GenConfig,
    master_seed: u64,
) -> Result<(Dataset, GenStats)> {
    cfg.validate()?;
    let mut rsu_rng = substream(master_seed, &[tag::DATASET_RSUS]);
    let rsus = deploy_random_rsus(&mut rsu_rng, cfg.rsu_count, cfg.region_size);

    let blocks: Vec<Result<(Vec<FeatureRow>, GenStats)>> = cfg
        .lq_db_values
        .par_iter()
        .enumerate()
        .map(|(idx, &lq_db)| {
            let mut rng = substream(master_seed, &[tag::DATASET_BLOCK, idx as u64]);
            generate_block(&rsus, cfg, lq_db, &mut rng)
        })
        .collect();

    let mut rows = Vec::with_capacity(cfg.lq_db_values.len() * cfg.slots_per_lq);
    let mut stats = GenStats::default();
    for block in blocks {
        let (block_rows, block_stats) = block?;
        rows.extend(block_rows);
        stats.skipped_slots += block_stats.skipped_slots;
    }
    Ok((Dataset::new(rows), stats))
}

/// [`generate_dataset_with_stats`] without the counters.
pub fn generate_dataset(cfg: &GenConfig, master_seed: u64) -> Result<Dataset> {
    generate_dataset_with_stats(cfg, master_seed).map(|(ds, _)| ds)
}

//! Experiment configuration: a TOML file whose defaults reproduce the
//! reference parameter table, so the sweeps run faithfully with an empty
//! config.

use crate::channel::ChannelParams;
use crate::scenario::ScenarioConfig;
use crate::tracker::{GenConfig, SvrParams, TreeParams};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Which regressor provides the authentication ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Svr,
    DecisionTree,
}

/// Tracker-model settings: either a pre-trained model file or in-place
/// training on a freshly generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Pre-trained model file; when absent, `train_model` generates a
    /// dataset with `train_slots_per_lq` rows per LQ block and fits fresh.
    pub path: Option<PathBuf>,
    pub split_ratio: f64,
    pub train_slots_per_lq: usize,
    pub tree: TreeParams,
    pub svr: SvrParams,
}

impl Default for ModelSpec {
    fn default() -> Self {
        ModelSpec {
            kind: ModelKind::Svr,
            path: None,
            split_ratio: 0.7,
            train_slots_per_lq: 500,
            tree: TreeParams::default(),
            svr: SvrParams::default(),
        }
    }
}

/// Error-probability sweep grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepSpec {
    pub lq_db: Vec<f64>,
    /// Position-test thresholds ε_th, meters.
    pub thresholds: Vec<f64>,
    pub speeds: Vec<f64>,
    pub trials: usize,
    /// Fixed decision threshold for the AoA baseline, radians.
    pub aoa_threshold: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            lq_db: (0..=20).map(|v| v as f64).collect(),
            thresholds: vec![0.5],
            speeds: vec![1.0],
            trials: 10_000,
            aoa_threshold: 1.0,
        }
    }
}

/// ROC collection grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RocSpec {
    pub lq_db: Vec<f64>,
    pub speeds: Vec<f64>,
    pub trials: usize,
    /// Number of points on the threshold grid, spanning [0, max TS + 1].
    pub threshold_points: usize,
}

impl Default for RocSpec {
    fn default() -> Self {
        RocSpec {
            lq_db: vec![0.0, 20.0],
            speeds: vec![1.0],
            trials: 10_000,
            threshold_points: 200,
        }
    }
}

/// Full experiment configuration. Every field has a default, so an empty
/// file is a valid config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub output_dir: PathBuf,
    /// Slot duration used by authentication trials, seconds.
    pub slot_dt: f64,
    /// Pre-generated dataset CSV consumed by `bench` instead of generating.
    pub dataset_file: Option<PathBuf>,
    pub scenario: ScenarioConfig,
    pub channel: ChannelParams,
    pub sweep: SweepSpec,
    pub roc: RocSpec,
    pub dataset: GenConfig,
    pub model: ModelSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            master_seed: 0,
            output_dir: PathBuf::from("out"),
            slot_dt: 0.005,
            dataset_file: None,
            scenario: ScenarioConfig::default(),
            channel: ChannelParams::default(),
            sweep: SweepSpec::default(),
            roc: RocSpec::default(),
            dataset: GenConfig::default(),
            model: ModelSpec::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Format {
            path: origin.to_string(),
            reason: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path<P: AsRef<Path>>(path: P) -> Result<ExperimentConfig> {
        let display = path.as_ref().display().to_string();
        let text = std::fs::read_to_string(&path)?;
        Self::from_toml_str(&text, &display)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.slot_dt > 0.0) {
            return Err(Error::InvalidConfig("slot_dt must be > 0".into()));
        }
        if self.sweep.trials == 0 || self.roc.trials == 0 {
            return Err(Error::InvalidConfig("trials must be >= 1".into()));
        }
        for (name, list) in [
            ("sweep.lq_db", &self.sweep.lq_db),
            ("sweep.thresholds", &self.sweep.thresholds),
            ("sweep.speeds", &self.sweep.speeds),
            ("roc.lq_db", &self.roc.lq_db),
            ("roc.speeds", &self.roc.speeds),
        ] {
            if list.is_empty() {
                return Err(Error::InvalidConfig(format!("{name} must be non-empty")));
            }
        }
        if self.sweep.thresholds.iter().any(|t| !(*t >= 0.0)) {
            return Err(Error::InvalidConfig("sweep thresholds must be >= 0".into()));
        }
        if !(self.sweep.aoa_threshold >= 0.0) {
            return Err(Error::InvalidConfig("aoa_threshold must be >= 0".into()));
        }
        if self.roc.threshold_points < 2 {
            return Err(Error::InvalidConfig(
                "roc.threshold_points must be >= 2".into(),
            ));
        }
        if !(self.model.split_ratio > 0.0 && self.model.split_ratio < 1.0) {
            return Err(Error::InvalidConfig(
                "model.split_ratio must be in (0,1)".into(),
            ));
        }
        if self.model.train_slots_per_lq < 2 {
            return Err(Error::InvalidConfig(
                "model.train_slots_per_lq must be >= 2".into(),
            ));
        }
        self.channel.validate()?;
        self.dataset.validate()?;
        self.model.svr.validate()?;
        Ok(())
    }

    /// Canonical serialization with all defaults materialized.
    pub fn canonical_toml(&self) -> String {
        toml::to_string(self).expect("config serialization cannot fail")
    }

    /// FNV-1a hash of the canonical serialization, for provenance lines.
    pub fn hash(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.canonical_toml().as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }
}

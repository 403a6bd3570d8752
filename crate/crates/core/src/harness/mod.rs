//! Experiment orchestration: configuration parsing, Monte Carlo sweeps,
//! ROC collection, the DT-vs-SVR benchmark, and deterministic CSV emission.

pub mod config;
pub mod experiments;
pub mod table;

pub use config::{ExperimentConfig, ModelKind, ModelSpec, RocSpec, SweepSpec};
pub use experiments::{
    bench_table, collect_scores, roc_table, run_error_sweep, run_ml_benchmark, run_roc,
    sweep_projection, sweep_table, train_model, BenchRow, RocRow, ScoreSet, SweepRow,
};
pub use table::{Provenance, ResultTable};

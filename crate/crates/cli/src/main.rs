//! `roadauth` — command-line driver for the vehicle authentication
//! simulator.
//!
//! Every subcommand takes `--config <path>` (TOML, all fields optional),
//! `--seed <u64>` (overrides the config's master seed), and `--out <dir>`
//! (overrides the output directory; the `ROADAUTH_OUT` environment variable
//! supplies the default when neither is given). All outputs are a pure
//! function of (config, seed): rerunning a subcommand with the same inputs
//! produces byte-identical files.

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use roadauth_core::harness::{
    bench_table, roc_table, run_error_sweep, run_ml_benchmark, run_roc, sweep_projection,
    sweep_table, train_model, ExperimentConfig,
};
use roadauth_core::tracker::generate_dataset;
use std::path::PathBuf;

/// Environment variable supplying the default output directory.
const OUT_ENV: &str = "ROADAUTH_OUT";

#[derive(Parser)]
#[command(
    name = "roadauth",
    version,
    about = "Position-based vehicle authentication simulator"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate the tracker training dataset and write `dataset.csv`.
    Dataset(Common),
    /// Train the configured tracker model and write `model.json`.
    Train(Common),
    /// Error-probability sweep: writes `sweep.csv`, `pfa_vs_lq.csv`, `pmd_vs_lq.csv`.
    Sweep(Common),
    /// ROC collection: writes `roc.csv`.
    Roc(Common),
    /// Regressor benchmark (decision tree vs. SVR): writes `bench.csv`.
    Bench(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment configuration file (TOML; every field has a default).
    #[arg(long, value_name = "path")]
    config: Option<PathBuf>,
    /// Master seed; overrides the config's `master_seed`.
    #[arg(long, value_name = "u64")]
    seed: Option<u64>,
    /// Output directory; overrides the config's `output_dir` and ROADAUTH_OUT.
    #[arg(long, value_name = "dir")]
    out: Option<PathBuf>,
}

impl Common {
    /// Materialize the effective configuration: file (or defaults), then the
    /// seed override, then the output-dir override (`--out` beats the
    /// ROADAUTH_OUT environment variable, which beats the config value).
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_path(path)
                .with_context(|| format!("--config {}", path.display()))?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.master_seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        } else if let Ok(env_out) = std::env::var(OUT_ENV) {
            if !env_out.is_empty() {
                cfg.output_dir = PathBuf::from(env_out);
            }
        }
        std::fs::create_dir_all(&cfg.output_dir)
            .with_context(|| format!("creating output dir {}", cfg.output_dir.display()))?;
        Ok(cfg)
    }
}

fn out_path(cfg: &ExperimentConfig, name: &str) -> PathBuf {
    cfg.output_dir.join(name)
}

fn run(cmd: &Cmd) -> Result<String> {
    match cmd {
        Cmd::Dataset(c) => {
            let cfg = c.load()?;
            let ds = generate_dataset(&cfg.dataset, cfg.master_seed)?;
            let path = out_path(&cfg, "dataset.csv");
            ds.save(&path)?;
            Ok(format!(
                "dataset: wrote {} rows to {}",
                ds.len(),
                path.display()
            ))
        }
        Cmd::Train(c) => {
            let cfg = c.load()?;
            let model = train_model(&cfg)?;
            let path = out_path(&cfg, "model.json");
            model.save(&path)?;
            Ok(format!(
                "train: wrote {} model to {}",
                model.kind(),
                path.display()
            ))
        }
        Cmd::Sweep(c) => {
            let cfg = c.load()?;
            let model = train_model(&cfg)?;
            let rows = run_error_sweep(&cfg, &model)?;
            let main = out_path(&cfg, "sweep.csv");
            sweep_table(&cfg, &rows).write_to(&main)?;
            sweep_projection(&cfg, &rows, "pfa_vs_lq").write_to(out_path(&cfg, "pfa_vs_lq.csv"))?;
            sweep_projection(&cfg, &rows, "pmd_vs_lq").write_to(out_path(&cfg, "pmd_vs_lq.csv"))?;
            Ok(format!(
                "sweep: wrote {} rows to {} (+ pfa_vs_lq.csv, pmd_vs_lq.csv)",
                rows.len(),
                main.display()
            ))
        }
        Cmd::Roc(c) => {
            let cfg = c.load()?;
            let model = train_model(&cfg)?;
            let rows = run_roc(&cfg, &model)?;
            let path = out_path(&cfg, "roc.csv");
            roc_table(&cfg, &rows).write_to(&path)?;
            Ok(format!(
                "roc: wrote {} rows to {}",
                rows.len(),
                path.display()
            ))
        }
        Cmd::Bench(c) => {
            let cfg = c.load()?;
            let rows = run_ml_benchmark(&cfg)?;
            let path = out_path(&cfg, "bench.csv");
            bench_table(&cfg, &rows).write_to(&path)?;
            Ok(format!(
                "bench: wrote {} rows to {}",
                rows.len(),
                path.display()
            ))
        }
    }
}

fn main() {
    let cli = Cli::parse();
    match run(&cli.cmd) {
        Ok(summary) => println!("{summary}"),
        Err(err) => {
            // One machine-readable line: `error: <cause chain, "; "-joined>`.
            let chain: Vec<String> = err.chain().map(|e| e.to_string()).collect();
            eprintln!("error: {}", chain.join("; ").replace('\n', " "));
            std::process::exit(1);
        }
    }
}

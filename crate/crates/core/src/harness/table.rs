//! Deterministic CSV result tables with provenance comment lines.

use crate::Result;
use std::io::Write;
use std::path::Path;

/// Identifies the exact (config, seed, code) that produced a table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    pub config_hash: u64,
    pub seed: u64,
    pub version: &'static str,
}

impl Provenance {
    pub fn new(config_hash: u64, seed: u64) -> Self {
        Provenance {
            config_hash,
            seed,
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}

/// A finished result table: pre-formatted CSV lines plus provenance. Byte
/// output is a pure function of the rows and provenance, so equal
/// (config, seed) runs produce identical files.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub kind: &'static str,
    pub header: &'static str,
    pub lines: Vec<String>,
    pub provenance: Provenance,
}

impl ResultTable {
    pub fn new(
        kind: &'static str,
        header: &'static str,
        lines: Vec<String>,
        provenance: Provenance,
    ) -> Self {
        ResultTable {
            kind,
            header,
            lines,
            provenance,
        }
    }

    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let p = &self.provenance;
        // comment line so plot scripts can skip it while keeping provenance
        let _ = writeln!(
            out,
            "# kind={} config_hash={:016x} seed={} version={}",
            self.kind, p.config_hash, p.seed, p.version
        );
        let _ = writeln!(out, "{}", self.header);
        for line in &self.lines {
            let _ = writeln!(out, "{line}");
        }
        out
    }

    pub fn write_to<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        std::fs::write(path, self.to_csv_bytes())?;
        Ok(())
    }

    /// Data rows (excluding provenance and header).
    pub fn row_count(&self) -> usize {
        self.lines.len()
    }
}

/// Format a sweep coordinate (LQ, speed, threshold) compactly but
/// losslessly enough for a plot axis.
pub fn fmt_coord(v: f64) -> String {
    format!("{v}")
}

/// Format a probability or metric with fixed precision.
pub fn fmt_metric(v: f64) -> String {
    format!("{v:.6}")
}

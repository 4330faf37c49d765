//! Result files. Everything except `timing.json` is a deterministic function of
//! the configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use anyhow::Context;
use nepcontour::{ConvergenceRecord, Contour, EigenpairSet};
use serde::Serialize;

use crate::config::ExperimentConfig;

fn header(config: &ExperimentConfig, out: &mut String) {
    for (k, v) in config.describe() {
        let _ = writeln!(out, "# {k} = {v}");
    }
}

fn write(dir: &Path, name: &str, text: &str) -> anyhow::Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// `eigenvalues.dat`: one row per returned pair, `re im residual inside`.
pub fn write_eigenvalues(
    dir: &Path,
    config: &ExperimentConfig,
    pairs: &EigenpairSet,
    contour: &Contour,
) -> anyhow::Result<()> {
    let mut out = String::new();
    header(config, &mut out);
    out.push_str("# re im residual inside\n");
    for (lambda, res) in pairs.values().iter().zip(pairs.residuals()) {
        let _ = writeln!(
            out,
            "{:.16e} {:.16e} {:.6e} {}",
            lambda.re,
            lambda.im,
            res,
            u8::from(contour.contains(*lambda))
        );
    }
    write(dir, "eigenvalues.dat", &out)
}

/// `convergence.dat`: max interior residual and interior count per pass.
pub fn write_convergence(dir: &Path, config: &ExperimentConfig, record: &ConvergenceRecord) -> anyhow::Result<()> {
    let mut out = String::new();
    header(config, &mut out);
    out.push_str("# iter max_residual interior\n");
    for (i, (r, n)) in record.max_residuals.iter().zip(&record.interior_counts).enumerate() {
        let _ = writeln!(out, "{} {:.6e} {}", i + 1, r, n);
    }
    write(dir, "convergence.dat", &out)
}

/// Outcome of one node count in a sweep.
pub enum SweepCell {
    Done(ConvergenceRecord),
    Failed(String),
}

/// `residual_history.dat`: rows are passes (row 1 is the Beyn pass), columns
/// node counts. Passes after convergence are `nan`, failed runs `fail`.
pub fn write_history(dir: &Path, config: &ExperimentConfig, cells: &[SweepCell]) -> anyhow::Result<()> {
    let mut out = String::new();
    header(config, &mut out);
    for (n, cell) in config.nodes.iter().zip(cells) {
        if let SweepCell::Failed(msg) = cell {
            let _ = writeln!(out, "# N = {n} failed: {msg}");
        }
    }
    out.push_str("iter");
    for n in &config.nodes {
        let _ = write!(out, " N{n}");
    }
    out.push('\n');
    let rows = config.opts.max_iterations + 1;
    for row in 0..rows {
        let _ = write!(out, "{}", row + 1);
        for cell in cells {
            match cell {
                SweepCell::Done(rec) => match rec.max_residuals.get(row) {
                    Some(r) => {
                        let _ = write!(out, " {r:.6e}");
                    }
                    None => out.push_str(" nan"),
                },
                SweepCell::Failed(_) => out.push_str(" fail"),
            }
        }
        out.push('\n');
    }
    write(dir, "residual_history.dat", &out)
}

#[derive(Debug, Serialize)]
pub struct RunSummary {
    pub nodes: usize,
    pub converged: bool,
    pub passes: usize,
    pub returned_pass: usize,
    pub eigenvalue_count: usize,
    pub interior_count: usize,
    pub max_interior_residual: Option<f64>,
    pub factorizations: usize,
    pub expected_factorizations: usize,
    pub block_solves: usize,
    pub error: Option<String>,
}

impl RunSummary {
    pub fn from_record(config: &ExperimentConfig, nodes: usize, pairs: Option<&EigenpairSet>, record: &ConvergenceRecord) -> Self {
        let expected = if config.opts.cache_factorizations {
            nodes
        } else {
            nodes * record.passes()
        };
        let returned = record.returned_pass;
        let max = record.max_residuals[returned];
        RunSummary {
            nodes,
            converged: record.converged,
            passes: record.passes(),
            returned_pass: returned + 1,
            eigenvalue_count: pairs.map_or(0, |p| p.len()),
            interior_count: record.interior_counts[returned],
            max_interior_residual: max.is_finite().then_some(max),
            factorizations: record.factorizations,
            expected_factorizations: expected,
            block_solves: record.block_solves,
            error: None,
        }
    }

    pub fn failed(nodes: usize, msg: String) -> Self {
        RunSummary {
            nodes,
            converged: false,
            passes: 0,
            returned_pass: 0,
            eigenvalue_count: 0,
            interior_count: 0,
            max_interior_residual: None,
            factorizations: 0,
            expected_factorizations: 0,
            block_solves: 0,
            error: Some(msg),
        }
    }
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    config: Vec<(String, String)>,
    runs: &'a [RunSummary],
}

pub fn write_summary(dir: &Path, config: &ExperimentConfig, runs: &[RunSummary]) -> anyhow::Result<()> {
    let summary = Summary {
        config: config.describe(),
        runs,
    };
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    write(dir, "summary.json", &text)
}

#[derive(Debug, Serialize)]
struct Timing {
    wall_seconds: f64,
    threads: usize,
    finished_unix_seconds: u64,
}

pub fn write_timing(dir: &Path, elapsed: Duration) -> anyhow::Result<()> {
    let timing = Timing {
        wall_seconds: elapsed.as_secs_f64(),
        threads: nepcontour::par::num_threads(),
        finished_unix_seconds: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
    };
    let mut text = serde_json::to_string_pretty(&timing)?;
    text.push('\n');
    write(dir, "timing.json", &text)
}

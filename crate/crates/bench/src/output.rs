//! CSV emission.
//!
//! Every file has a header row. Floating-point columns use scientific
//! notation with 17 significant digits, which round-trips `f64` exactly.
//! `NaN` marks a value that does not exist (for example the unsolved-gap
//! mean of a group where every instance was solved) and empty cells mark
//! columns that do not apply to the row.
//!
//! Files written into the output directory:
//!
//! * `records_<class>_<strategy>.csv`: one row per instance;
//! * `summary.csv`: one row per `(class, strategy)`;
//! * `traj_<class>_<size>_<seed>_<solver>_<strategy>.csv`: one row per step
//!   taken, with the primal value and FW gap measured before the step;
//! * `secant_hist_<class>.csv`: how many steps of the secant runs of a class
//!   needed each inner-iteration count. A line search whose warm-started seed
//!   already meets the tolerance counts as zero inner iterations.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use secant_fw::problems::ProblemClass;
use secant_fw::stepsizes::StrategyKind;

use crate::harness::{BenchResult, RunRecord, SummaryRow};

pub const RECORD_HEADER: [&str; 15] = [
    "class",
    "size",
    "seed",
    "solver",
    "strategy",
    "primal",
    "fw_gap",
    "solved",
    "iterations",
    "elapsed_s",
    "steps",
    "inner_total",
    "mean_inner",
    "termination",
    "error",
];

pub const SUMMARY_HEADER: [&str; 8] = [
    "class",
    "strategy",
    "geomean_time_s",
    "geomean_unsolved_gap",
    "mean_iters_solved",
    "mean_secant_inner",
    "solved_count",
    "total",
];

pub const TRAJECTORY_HEADER: [&str; 7] = ["iteration", "primal", "gap", "gamma", "inner_iters", "elapsed", "step_kind"];

pub const HISTOGRAM_HEADER: [&str; 2] = ["inner_iters", "count"];

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<PathBuf> {
    w.flush().with_context(|| format!("writing {}", path.display()))?;
    Ok(path.to_path_buf())
}

fn record_row(r: &RunRecord) -> Vec<String> {
    vec![
        r.class.to_string(),
        r.size.to_string(),
        r.seed.to_string(),
        r.solver.to_string(),
        r.strategy.to_string(),
        fmt_f64(r.primal),
        fmt_f64(r.fw_gap),
        r.solved.to_string(),
        r.iterations.to_string(),
        fmt_f64(r.elapsed_s),
        r.steps.to_string(),
        r.inner_total.to_string(),
        r.mean_inner().map(fmt_f64).unwrap_or_default(),
        r.termination.clone(),
        r.error.clone().unwrap_or_default(),
    ]
}

fn summary_row(s: &SummaryRow) -> Vec<String> {
    vec![
        s.class.to_string(),
        s.strategy.to_string(),
        fmt_f64(s.geomean_time_s),
        fmt_f64(s.geomean_unsolved_gap),
        fmt_f64(s.mean_iters_solved),
        s.mean_secant_inner.map(fmt_f64).unwrap_or_default(),
        s.solved_count.to_string(),
        s.total.to_string(),
    ]
}

pub fn records_file_name(class: ProblemClass, strategy: StrategyKind) -> String {
    format!("records_{class}_{strategy}.csv")
}

/// Writes the per-(class, strategy) record files, `summary.csv` and the plot
/// data. Returns every path written.
pub fn write_results(result: &BenchResult, out: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut written = Vec::new();
    let mut groups: Vec<(ProblemClass, StrategyKind)> = Vec::new();
    for r in &result.records {
        if !groups.contains(&(r.class, r.strategy)) {
            groups.push((r.class, r.strategy));
        }
    }
    for (class, strategy) in groups {
        let path = out.join(records_file_name(class, strategy));
        let mut w = writer(&path)?;
        w.write_record(RECORD_HEADER)?;
        for r in result.records.iter().filter(|r| r.class == class && r.strategy == strategy) {
            w.write_record(record_row(r))?;
        }
        written.push(finish(w, &path)?);
    }
    let path = out.join("summary.csv");
    let mut w = writer(&path)?;
    w.write_record(SUMMARY_HEADER)?;
    for s in &result.summary {
        w.write_record(summary_row(s))?;
    }
    written.push(finish(w, &path)?);
    written.extend(emit_plot_data(&result.records, out)?);
    Ok(written)
}

/// Trajectory files for every run with at least one step, and one secant
/// inner-iteration histogram per class that has secant runs.
pub fn emit_plot_data(records: &[RunRecord], out: &Path) -> Result<Vec<PathBuf>> {
    if records.is_empty() {
        bail!("no records to emit plot data for");
    }
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut written = Vec::new();
    for r in records {
        let steps: Vec<_> = r.trajectory.iter().filter(|t| t.step_kind.is_step()).collect();
        if steps.is_empty() {
            continue;
        }
        let name = format!("traj_{}_{}_{}_{}_{}.csv", r.class, r.size, r.seed, r.solver, r.strategy);
        let path = out.join(name);
        let mut w = writer(&path)?;
        w.write_record(TRAJECTORY_HEADER)?;
        for t in steps {
            w.write_record([
                t.t.to_string(),
                fmt_f64(t.primal),
                fmt_f64(t.fw_gap),
                fmt_f64(t.gamma),
                t.inner_iters.to_string(),
                fmt_f64(t.elapsed_s),
                t.step_kind.to_string(),
            ])?;
        }
        written.push(finish(w, &path)?);
    }
    let mut classes: Vec<ProblemClass> = Vec::new();
    for r in records {
        if !classes.contains(&r.class) {
            classes.push(r.class);
        }
    }
    for class in classes {
        let secant: Vec<&RunRecord> =
            records.iter().filter(|r| r.class == class && r.strategy == StrategyKind::Secant).collect();
        if secant.is_empty() {
            log::warn!("no secant runs for {class}; skipping its inner-iteration histogram");
            continue;
        }
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for t in secant.iter().flat_map(|r| &r.trajectory).filter(|t| t.step_kind.is_step()) {
            *counts.entry(t.inner_iters).or_default() += 1;
        }
        let path = out.join(format!("secant_hist_{class}.csv"));
        let mut w = writer(&path)?;
        w.write_record(HISTOGRAM_HEADER)?;
        for (inner, count) in counts {
            w.write_record([inner.to_string(), count.to_string()])?;
        }
        written.push(finish(w, &path)?);
    }
    Ok(written)
}

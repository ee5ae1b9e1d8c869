//! Grid runner and the summary aggregation.
//!
//! Aggregation rules for a `(class, strategy)` group:
//!
//! * `geomean_time_s` is the geometric mean of the wall time over every
//!   instance, with times floored at [`TIME_FLOOR_S`];
//! * `geomean_unsolved_gap` is the geometric mean of the final FW gap over
//!   the unsolved instances only (`NaN` when all were solved or when no
//!   unsolved instance has a finite positive gap);
//! * `mean_iters_solved` averages the iteration count over solved instances;
//! * `mean_secant_inner` is the pooled mean of inner iterations per step
//!   over every secant run of the group.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::Result;

use secant_fw::fw::SolveConfig;
use secant_fw::problems::{generate_instance, ProblemClass, Solver};
use secant_fw::stepsizes::{StepRule, StrategyKind};
use secant_fw::TrajectoryRecord;

use crate::config::{BenchConfig, InstanceKey};

/// Wall times below this count as this value in the geometric mean.
pub const TIME_FLOOR_S: f64 = 1e-6;

/// Outcome of one solve of the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub class: ProblemClass,
    pub size: usize,
    pub seed: u64,
    pub solver: Solver,
    pub strategy: StrategyKind,
    pub primal: f64,
    pub fw_gap: f64,
    pub solved: bool,
    pub iterations: usize,
    pub elapsed_s: f64,
    /// Step records in the trajectory.
    pub steps: usize,
    /// Inner iterations summed over the step records.
    pub inner_total: usize,
    pub termination: String,
    /// Set when generation or the solve failed; such runs count as unsolved.
    pub error: Option<String>,
    pub trajectory: Vec<TrajectoryRecord>,
}

impl RunRecord {
    pub fn mean_inner(&self) -> Option<f64> {
        (self.steps > 0).then(|| self.inner_total as f64 / self.steps as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub class: ProblemClass,
    pub strategy: StrategyKind,
    pub geomean_time_s: f64,
    pub geomean_unsolved_gap: f64,
    pub mean_iters_solved: f64,
    /// Secant strategy only.
    pub mean_secant_inner: Option<f64>,
    pub solved_count: usize,
    pub total: usize,
}

#[derive(Debug, Clone)]
pub struct BenchResult {
    pub records: Vec<RunRecord>,
    pub summary: Vec<SummaryRow>,
}

/// Geometric mean; `NaN` for an empty input.
pub fn geomean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    (values.iter().map(|v| v.ln()).sum::<f64>() / values.len() as f64).exp()
}

/// Runs every strategy on every instance of the grid.
///
/// Instances are distributed over `cfg.workers` threads. Each worker
/// generates its instance and runs all strategies on it; records come back
/// in grid order regardless of scheduling.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchResult> {
    let grid = cfg.grid()?;
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Vec<RunRecord>>>> = Mutex::new(vec![None; grid.instances.len()]);
    let workers = cfg.workers.min(grid.instances.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let job = next.fetch_add(1, Ordering::Relaxed);
                let Some(&key) = grid.instances.get(job) else { break };
                let runs = run_instance(key, grid.solver, &grid.strategies, cfg);
                slots.lock().expect("no worker panicked")[job] = Some(runs);
            });
        }
    });
    let records: Vec<RunRecord> = slots
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .flat_map(|runs| runs.expect("every job ran"))
        .collect();
    let summary = summarize(&records);
    Ok(BenchResult { records, summary })
}

fn run_instance(key: InstanceKey, solver: Solver, strategies: &[StrategyKind], cfg: &BenchConfig) -> Vec<RunRecord> {
    let started = Instant::now();
    let instance = generate_instance(key.class, key.size, key.seed);
    let generation_s = started.elapsed().as_secs_f64();
    strategies
        .iter()
        .map(|&strategy| {
            let failed = |error: String, elapsed_s: f64| {
                log::warn!("{} size {} seed {} {strategy}: {error}", key.class, key.size, key.seed);
                RunRecord {
                    class: key.class,
                    size: key.size,
                    seed: key.seed,
                    solver,
                    strategy,
                    primal: f64::NAN,
                    fw_gap: f64::NAN,
                    solved: false,
                    iterations: 0,
                    elapsed_s,
                    steps: 0,
                    inner_total: 0,
                    termination: "error".into(),
                    error: Some(error),
                    trajectory: Vec::new(),
                }
            };
            let inst = match &instance {
                Ok(inst) => inst,
                Err(e) => return failed(e.to_string(), generation_s),
            };
            let solve_cfg = SolveConfig {
                max_iters: cfg.max_iters,
                gap_tol: cfg.gap_tol,
                time_limit_s: cfg.time_limit_s,
                strategy: StepRule::new(strategy),
                seed: key.seed,
                ..SolveConfig::default()
            };
            let t0 = Instant::now();
            match inst.solve(solver, &solve_cfg) {
                Ok(report) => {
                    let steps = report.trajectory.iter().filter(|r| r.step_kind.is_step()).count();
                    let inner_total = report
                        .trajectory
                        .iter()
                        .filter(|r| r.step_kind.is_step())
                        .map(|r| r.inner_iters)
                        .sum();
                    RunRecord {
                        class: key.class,
                        size: key.size,
                        seed: key.seed,
                        solver,
                        strategy,
                        primal: report.primal,
                        fw_gap: report.fw_gap,
                        solved: report.solved(),
                        iterations: report.iterations,
                        elapsed_s: report.elapsed_s,
                        steps,
                        inner_total,
                        termination: report.termination.as_str().into(),
                        error: None,
                        trajectory: report.trajectory,
                    }
                }
                Err(e) => failed(e.to_string(), t0.elapsed().as_secs_f64()),
            }
        })
        .collect()
}

/// One summary row per `(class, strategy)` pair, in order of first
/// appearance in `records`.
pub fn summarize(records: &[RunRecord]) -> Vec<SummaryRow> {
    let mut groups: Vec<(ProblemClass, StrategyKind)> = Vec::new();
    for r in records {
        if !groups.contains(&(r.class, r.strategy)) {
            groups.push((r.class, r.strategy));
        }
    }
    groups
        .into_iter()
        .map(|(class, strategy)| {
            let rows: Vec<&RunRecord> = records.iter().filter(|r| r.class == class && r.strategy == strategy).collect();
            let times: Vec<f64> = rows.iter().map(|r| r.elapsed_s.max(TIME_FLOOR_S)).collect();
            let unsolved_gaps: Vec<f64> = rows
                .iter()
                .filter(|r| !r.solved && r.fw_gap.is_finite() && r.fw_gap > 0.0)
                .map(|r| r.fw_gap)
                .collect();
            let solved: Vec<&&RunRecord> = rows.iter().filter(|r| r.solved).collect();
            let mean_iters_solved = if solved.is_empty() {
                f64::NAN
            } else {
                solved.iter().map(|r| r.iterations as f64).sum::<f64>() / solved.len() as f64
            };
            let mean_secant_inner = (strategy == StrategyKind::Secant).then(|| {
                let steps: usize = rows.iter().map(|r| r.steps).sum();
                let inner: usize = rows.iter().map(|r| r.inner_total).sum();
                if steps == 0 {
                    f64::NAN
                } else {
                    inner as f64 / steps as f64
                }
            });
            SummaryRow {
                class,
                strategy,
                geomean_time_s: geomean(&times),
                geomean_unsolved_gap: geomean(&unsolved_gaps),
                mean_iters_solved,
                mean_secant_inner,
                solved_count: solved.len(),
                total: rows.len(),
            }
        })
        .collect()
}

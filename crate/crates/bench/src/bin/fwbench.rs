use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use fw_bench::config::BenchConfig;
use fw_bench::harness::{run_benchmark, RunRecord};
use fw_bench::output::{emit_plot_data, fmt_f64, write_results};
use fw_bench::rootbench::{rootbench, rootbench_csv_rows, ROOTBENCH_HEADER};
use fw_bench::selftest;
use secant_fw::fw::SolveConfig;
use secant_fw::problems::{generate_instance, ProblemClass, Solver};
use secant_fw::stepsizes::{StepRule, StrategyKind};

#[derive(Parser)]
#[command(name = "fwbench", version, about = "Frank-Wolfe step-size benchmarks with the secant line search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and print its outcome.
    Solve(SolveArgs),
    /// Run a grid of instances and strategies and write CSV results.
    Bench(BenchArgs),
    /// Compare the secant method with Newton's method on scalar problems.
    Rootbench(RootbenchArgs),
    /// Run the acceptance criteria and print one PASS/FAIL line each.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, default_value = "QuadProb")]
    problem: ProblemClass,
    /// Dimension or matrix side length; defaults to the class's desk size.
    #[arg(long)]
    size: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "bpcg")]
    solver: Solver,
    #[arg(long, default_value = "secant")]
    stepsize: StrategyKind,
    #[arg(long, default_value_t = 1e-7)]
    gap_tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 60.0)]
    time_limit_s: f64,
    /// Directory for the trajectory file; nothing is written without it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// JSON config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated problem classes.
    #[arg(long, value_delimiter = ',')]
    problem: Option<Vec<String>>,
    /// Comma-separated sizes applied to every class.
    #[arg(long, value_delimiter = ',')]
    size: Option<Vec<usize>>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    seed: Option<Vec<u64>>,
    #[arg(long)]
    solver: Option<String>,
    /// Comma-separated step-size strategies.
    #[arg(long, value_delimiter = ',')]
    stepsize: Option<Vec<String>>,
    #[arg(long)]
    gap_tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    time_limit_s: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RootbenchArgs {
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    repeats: usize,
    /// Directory for `rootbench.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {
    /// Run only this criterion (1-9).
    #[arg(long)]
    criterion: Option<u8>,
}

fn solve(args: SolveArgs) -> Result<()> {
    let size = args.size.unwrap_or_else(|| fw_bench::desk_size(args.problem));
    let inst = generate_instance(args.problem, size, args.seed)?;
    let cfg = SolveConfig {
        max_iters: args.max_iters,
        gap_tol: args.gap_tol,
        time_limit_s: args.time_limit_s,
        strategy: StepRule::new(args.stepsize),
        seed: args.seed,
        ..SolveConfig::default()
    };
    let report = inst.solve(args.solver, &cfg)?;
    println!("problem      {} size {} seed {}", args.problem, size, args.seed);
    println!("solver       {} / {}", args.solver, args.stepsize);
    println!("termination  {}", report.termination.as_str());
    println!("iterations   {}", report.iterations);
    println!("primal       {}", fmt_f64(report.primal));
    println!("fw_gap       {}", fmt_f64(report.fw_gap));
    if let Some(opt) = inst.known_opt {
        println!("f - f*       {:.3e}", report.primal - opt);
    }
    if let Some(mean) = report.mean_inner() {
        println!("mean inner   {mean:.3}");
    }
    println!("elapsed_s    {:.3}", report.elapsed_s);
    if let Some(out) = args.out {
        let steps = report.trajectory.iter().filter(|r| r.step_kind.is_step());
        let record = RunRecord {
            class: args.problem,
            size,
            seed: args.seed,
            solver: args.solver,
            strategy: args.stepsize,
            primal: report.primal,
            fw_gap: report.fw_gap,
            solved: report.solved(),
            iterations: report.iterations,
            elapsed_s: report.elapsed_s,
            steps: steps.clone().count(),
            inner_total: steps.map(|r| r.inner_iters).sum(),
            termination: report.termination.as_str().into(),
            error: None,
            trajectory: report.trajectory,
        };
        for path in emit_plot_data(&[record], &out)? {
            println!("wrote        {}", path.display());
        }
    }
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => BenchConfig::load(path)?,
        None => BenchConfig::default(),
    };
    if let Some(v) = args.problem {
        cfg.problems = v;
    }
    if let Some(v) = args.size {
        cfg.sizes = v;
    }
    if let Some(v) = args.seed {
        cfg.seeds = v;
    }
    if let Some(v) = args.solver {
        cfg.solver = v;
    }
    if let Some(v) = args.stepsize {
        cfg.strategies = v;
    }
    if let Some(v) = args.gap_tol {
        cfg.gap_tol = v;
    }
    if let Some(v) = args.max_iters {
        cfg.max_iters = v;
    }
    if let Some(v) = args.time_limit_s {
        cfg.time_limit_s = v;
    }
    if let Some(v) = args.workers {
        cfg.workers = v;
    }
    if let Some(v) = args.out {
        cfg.out = v;
    }
    let result = run_benchmark(&cfg)?;
    println!(
        "{:<10} {:<13} {:>8} {:>12} {:>12} {:>10} {:>8}",
        "class", "strategy", "solved", "time_s", "unsolved_gap", "iters", "inner"
    );
    for row in &result.summary {
        println!(
            "{:<10} {:<13} {:>8} {:>12.3e} {:>12.3e} {:>10.1} {:>8}",
            row.class.as_str(),
            row.strategy.as_str(),
            format!("{}/{}", row.solved_count, row.total),
            row.geomean_time_s,
            row.geomean_unsolved_gap,
            row.mean_iters_solved,
            row.mean_secant_inner.map_or_else(|| "-".to_string(), |m| format!("{m:.2}")),
        );
    }
    let written = write_results(&result, &cfg.out)?;
    std::fs::write(cfg.out.join("config.json"), cfg.to_json())
        .with_context(|| format!("writing {}", cfg.out.join("config.json").display()))?;
    println!("wrote {} files to {}", written.len() + 1, cfg.out.display());
    Ok(())
}

fn run_rootbench(args: RootbenchArgs) -> Result<()> {
    let rows = rootbench(args.tol, args.repeats)?;
    println!(
        "{:<26} {:>8} {:>11} {:>5} {:>8} {:>11} {:>5} {:>8}",
        "function", "sec_it", "sec_time_s", "conv", "fallback", "newt_time_s", "conv", "ratio"
    );
    for r in &rows {
        println!(
            "{:<26} {:>8.2} {:>11.3e} {:>5} {:>8} {:>11.3e} {:>5} {:>8.2}",
            r.name,
            r.secant.iters_mean,
            r.secant.time_s,
            r.secant.converged,
            r.secant.fallbacks,
            r.newton.time_s,
            r.newton.converged,
            r.time_ratio()
        );
    }
    if let Some(out) = args.out {
        std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        let path = out.join("rootbench.csv");
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("creating {}", path.display()))?;
        w.write_record(ROOTBENCH_HEADER)?;
        for row in rootbench_csv_rows(&rows, args.tol) {
            w.write_record(row)?;
        }
        w.flush().with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run_selftest(args: SelftestArgs) -> Result<bool> {
    let outcomes = match args.criterion {
        Some(id) => vec![selftest::run_criterion(id).with_context(|| format!("no criterion {id}"))?],
        None => selftest::run_all(),
    };
    for o in &outcomes {
        println!("{o}");
    }
    Ok(outcomes.iter().all(|o| o.passed))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a).map(|_| true),
        Command::Bench(a) => bench(a).map(|_| true),
        Command::Rootbench(a) => run_rootbench(a).map(|_| true),
        Command::Selftest(a) => run_selftest(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

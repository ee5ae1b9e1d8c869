//! Acceptance self-test: nine executable criteria, each reported as one
//! PASS/FAIL line.
//!
//! Reference values are computed here independently of the library code
//! under test: brute-force assignment enumeration, Jacobi eigenvalue and
//! singular value sweeps, closed-form parabola minimizers and central
//! finite differences.

use std::fmt;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use secant_fw::fw::{SolveConfig, SolveReport, ToleranceSchedule};
use secant_fw::linalg::DenseMatrix;
use secant_fw::linesearch::exact_quadratic_step;
use secant_fw::lmo::{lmo_birkhoff, lmo_nuclear, lmo_spectraplex};
use secant_fw::problems::{generate_instance, DenseQuadratic, ProblemClass, ProblemInstance, Solver};
use secant_fw::rootfind::estimate_order;
use secant_fw::stepsizes::StrategyKind;
use secant_fw::{finite_difference_gradient, sls, solve_secant, Objective, SlsState};

use crate::rootbench::rootbench;

#[derive(Debug, Clone)]
pub struct CriterionOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed_s: f64,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] {} ({:.2} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed_s,
            self.detail
        )
    }
}

pub const CRITERIA: [(u8, &str); 9] = [
    (1, "quadratic one-shot line search"),
    (2, "secant order and double-root rate"),
    (3, "monotone secant contraction"),
    (4, "inexact line-search budget"),
    (5, "desk-scale BPCG + secant solves"),
    (6, "inner-iteration economy"),
    (7, "LMO oracle equivalence"),
    (8, "secant versus Newton harness"),
    (9, "gradient correctness"),
];

/// Result of one check: pass flag and a one-line summary.
type Check = (bool, String);

fn within(check: Check, elapsed_s: f64, limit_s: f64) -> Check {
    if elapsed_s <= limit_s {
        check
    } else {
        (false, format!("{} [over the {limit_s} s limit]", check.1))
    }
}

fn timed<F: FnOnce() -> Check>(id: u8, limit_s: Option<f64>, run: F) -> CriterionOutcome {
    let start = Instant::now();
    let check = run();
    let elapsed_s = start.elapsed().as_secs_f64();
    let (passed, detail) = match limit_s {
        Some(limit) => within(check, elapsed_s, limit),
        None => check,
    };
    let name = CRITERIA.iter().find(|(i, _)| *i == id).map(|(_, n)| *n).unwrap_or("unknown");
    CriterionOutcome { id, name, passed, detail, elapsed_s }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn random_simplex_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| -rng.random_range(1e-3..1.0f64).ln()).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

// ---------------------------------------------------------------- 1

pub fn quadratic_one_shot() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut unclipped = 0;
    let mut worst = 0.0f64;
    for case in 0..100 {
        let n = rng.random_range(2..30);
        let m: Vec<f64> = (0..n * n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut q = DenseMatrix::zeros(n, n);
        let mu = rng.random_range(0.01..1.0);
        for i in 0..n {
            for j in 0..n {
                q[(i, j)] = (0..n).map(|k| m[k * n + i] * m[k * n + j]).sum::<f64>() / n as f64;
            }
            q[(i, i)] += mu;
        }
        let b = random_simplex_point(&mut rng, n);
        let obj = DenseQuadratic { q, b, l: f64::NAN };
        let mut x = random_simplex_point(&mut rng, n);
        let mut v = random_simplex_point(&mut rng, n);
        let mut d: Vec<f64> = x.iter().zip(&v).map(|(a, b)| a - b).collect();
        if dot(&obj.gradient(&x), &d) < 0.0 {
            std::mem::swap(&mut x, &mut v);
            d.iter_mut().for_each(|di| *di = -*di);
        }
        let gdd = dot(&obj.gradient(&x), &d);
        let mut qd = vec![0.0; n];
        obj.q.matvec(&d, &mut qd);
        let curvature = dot(&d, &qd);
        let res = sls(&obj, &x, &d, 1.0, &mut SlsState::default());
        if res.inner_iters > 1 || res.used_fallback {
            return (false, format!("case {case}: {} inner iterations, fallback {}", res.inner_iters, res.used_fallback));
        }
        let Ok(exact) = exact_quadratic_step(gdd, curvature, 1.0) else {
            return (false, format!("case {case}: closed form rejected curvature {curvature:e}"));
        };
        let by_hand = (gdd / curvature).clamp(0.0, 1.0);
        if (exact - by_hand).abs() > 1e-15 * by_hand.max(1.0) {
            return (false, format!("case {case}: closed form {exact} disagrees with {by_hand}"));
        }
        if res.clipped {
            if res.gamma != by_hand {
                return (false, format!("case {case}: clipped at {} but the minimizer is {by_hand}", res.gamma));
            }
        } else {
            unclipped += 1;
            worst = worst.max((res.gamma - exact).abs());
        }
    }
    let ok = worst <= 1e-10 && unclipped > 0;
    (ok, format!("100 quadratics, {unclipped} unclipped, max |γ − γ_exact| = {worst:.1e}"))
}

// ---------------------------------------------------------------- 2

pub fn secant_order() -> Check {
    let cubic = match solve_secant(|x| x * x * x - 2.0, 1.0, 1.1, 1e-15, 100) {
        Ok(r) => r,
        Err(e) => return (false, format!("cubic: {e}")),
    };
    let order = estimate_order(&cubic.history, 2f64.cbrt()).unwrap_or(f64::NAN);
    let double = match solve_secant(|x| (x - 1.0) * (x - 1.0), 2.0, 1.5, 1e-24, 200) {
        Ok(r) => r,
        Err(e) => return (false, format!("double root: {e}")),
    };
    let errors: Vec<f64> = double.history.iter().map(|x| (x - 1.0).abs()).collect();
    let n = errors.len();
    let ratio = errors[n - 1] / errors[n - 2];
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    let ok = cubic.converged && (1.4..=1.8).contains(&order) && double.converged && (ratio - golden).abs() <= 0.05;
    (ok, format!("order {order:.3} on x³ − 2, terminal ratio {ratio:.4} on (x − 1)²"))
}

// ---------------------------------------------------------------- 3

pub fn monotone_contraction() -> Check {
    let r = match solve_secant(f64::exp_m1, 2.0, 1.5, 1e-12, 100) {
        Ok(r) => r,
        Err(e) => return (false, e.to_string()),
    };
    let ratios: Vec<f64> = r.history.windows(2).map(|w| w[1] / w[0]).collect();
    let ok = r.converged && ratios.iter().all(|q| *q > 0.0 && *q < 1.0);
    let max = ratios.iter().cloned().fold(f64::NAN, f64::max);
    (ok, format!("{} iterates, max ratio {max:.4}, residual {:.1e}", r.history.len(), r.residual))
}

// ---------------------------------------------------------------- 4

pub fn inexact_budget() -> Check {
    let eps = 1e-4;
    let max_iters = 2000;
    let inst = match generate_instance(ProblemClass::QuadProb, 50, 0) {
        Ok(i) => i,
        Err(e) => return (false, e.to_string()),
    };
    let (Some(l), Some(opt)) = (inst.known_l, inst.known_opt) else {
        return (false, "instance lacks L or f*".into());
    };
    let d2 = 2.0;
    let cfg = SolveConfig {
        max_iters,
        gap_tol: f64::MIN_POSITIVE,
        tolerance_schedule: ToleranceSchedule::Scheduled(eps),
        ..SolveConfig::with_strategy(StrategyKind::Secant)
    };
    let report = match inst.solve(Solver::Fw, &cfg) {
        Ok(r) => r,
        Err(e) => return (false, e.to_string()),
    };
    let mut slack = f64::INFINITY;
    for r in report.trajectory.iter().filter(|r| r.t >= 1) {
        let bound = 2.0 * l * d2 / (r.t as f64 + 2.0) + eps / 2.0;
        let h = r.primal - opt;
        if h > bound {
            return (false, format!("t = {}: f − f* = {h:e} exceeds {bound:e}", r.t));
        }
        slack = slack.min(bound - h);
    }
    (true, format!("{} iterates checked, min slack {slack:.2e}", report.trajectory.len() - 1))
}

// ---------------------------------------------------------------- 5 and 6

/// Desk-scale BPCG + secant solves shared by criteria 5 and 6.
pub struct DeskRun {
    pub class: ProblemClass,
    pub size: usize,
    pub seed: u64,
    pub known_opt: Option<f64>,
    pub report: Result<SolveReport, String>,
    pub elapsed_s: f64,
}

pub const DESK_SEEDS: [u64; 3] = [0, 1, 2];

pub fn desk_instances() -> Vec<(ProblemClass, usize)> {
    vec![
        (ProblemClass::QuadProb, 100),
        (ProblemClass::Ill, 100),
        (ProblemClass::Birkhoff, 10),
        (ProblemClass::Spec, 20),
        (ProblemClass::Port, 50),
        (ProblemClass::OD, 50),
    ]
}

pub fn desk_runs() -> Vec<DeskRun> {
    let mut runs = Vec::new();
    for (class, size) in desk_instances() {
        for seed in DESK_SEEDS {
            let start = Instant::now();
            let (known_opt, report) = match generate_instance(class, size, seed) {
                Ok(inst) => {
                    let cfg = SolveConfig { max_iters: 100_000, time_limit_s: 60.0, ..SolveConfig::default() };
                    (inst.known_opt, inst.solve(Solver::Bpcg, &cfg).map_err(|e| e.to_string()))
                }
                Err(e) => (None, Err(e.to_string())),
            };
            runs.push(DeskRun { class, size, seed, known_opt, report, elapsed_s: start.elapsed().as_secs_f64() });
        }
    }
    runs
}

pub fn desk_solves(runs: &[DeskRun]) -> Check {
    let mut failures = Vec::new();
    let mut worst_opt = 0.0f64;
    let mut slowest = 0.0f64;
    for run in runs.iter().filter(|r| r.class != ProblemClass::OD) {
        let tag = format!("{} {} seed {}", run.class, run.size, run.seed);
        slowest = slowest.max(run.elapsed_s);
        match &run.report {
            Err(e) => failures.push(format!("{tag}: {e}")),
            Ok(rep) => {
                if !(rep.solved() && rep.fw_gap <= 1e-7) {
                    failures.push(format!("{tag}: gap {:.1e} ({})", rep.fw_gap, rep.termination.as_str()));
                }
                if run.elapsed_s > 60.0 {
                    failures.push(format!("{tag}: {:.1} s", run.elapsed_s));
                }
                if let Some(opt) = run.known_opt {
                    let err = (rep.primal - opt).abs();
                    worst_opt = worst_opt.max(err);
                    if err > 1e-8 {
                        failures.push(format!("{tag}: |f − f*| = {err:.1e}"));
                    }
                }
            }
        }
    }
    if failures.is_empty() {
        (true, format!("all solved to 1e-7, max |f − f*| = {worst_opt:.1e}, slowest {slowest:.2} s"))
    } else {
        (false, failures.join("; "))
    }
}

pub fn inner_economy(runs: &[DeskRun]) -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for (class, _) in desk_instances() {
        let limit = match class {
            ProblemClass::Port | ProblemClass::OD => 4.0,
            _ => 1.5,
        };
        let (mut inner, mut calls) = (0usize, 0usize);
        for run in runs.iter().filter(|r| r.class == class) {
            match &run.report {
                Ok(rep) => {
                    inner += rep.total_inner;
                    calls += rep.line_searches;
                }
                Err(_) => ok = false,
            }
        }
        let mean = inner as f64 / calls as f64;
        ok &= mean <= limit;
        parts.push(format!("{class} {mean:.2}"));
    }
    (ok, format!("mean inner iterations: {}", parts.join(", ")))
}

// ---------------------------------------------------------------- 7

/// Minimum assignment cost by enumerating all permutations (Heap's
/// algorithm).
fn brute_force_assignment(g: &DenseMatrix) -> f64 {
    let n = g.rows();
    let mut perm: Vec<usize> = (0..n).collect();
    let cost = |p: &[usize]| (0..n).map(|i| g[(i, p[i])]).sum::<f64>();
    let mut best = cost(&perm);
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(cost(&perm));
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

/// Eigenvalues of a symmetric matrix by cyclic two-sided Jacobi sweeps.
pub fn jacobi_eigenvalues(a: &DenseMatrix) -> Vec<f64> {
    let n = a.rows();
    let mut m: Vec<Vec<f64>> = (0..n).map(|i| a.row(i).to_vec()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum();
        let diag: f64 = (0..n).map(|i| m[i][i] * m[i][i]).sum();
        if off <= 1e-30 * diag.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q] == 0.0 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (x, y) = (m[k][p], m[k][q]);
                    m[k][p] = c * x - s * y;
                    m[k][q] = s * x + c * y;
                }
                for k in 0..n {
                    let (x, y) = (m[p][k], m[q][k]);
                    m[p][k] = c * x - s * y;
                    m[q][k] = s * x + c * y;
                }
            }
        }
    }
    let mut values: Vec<f64> = (0..n).map(|i| m[i][i]).collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Singular values by one-sided Jacobi orthogonalization of the columns,
/// in decreasing order.
pub fn jacobi_singular_values(a: &DenseMatrix) -> Vec<f64> {
    let (rows, cols) = (a.rows(), a.cols());
    let mut c: Vec<Vec<f64>> = (0..cols).map(|j| (0..rows).map(|i| a[(i, j)]).collect()).collect();
    for _ in 0..100 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = c[p].iter().map(|v| v * v).sum();
                let beta: f64 = c[q].iter().map(|v| v * v).sum();
                let gamma: f64 = c[p].iter().zip(&c[q]).map(|(u, v)| u * v).sum();
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta == 0.0 { 1.0 } else { zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt()) };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for k in 0..rows {
                    let (u, v) = (c[p][k], c[q][k]);
                    c[p][k] = cs * u - sn * v;
                    c[q][k] = sn * u + cs * v;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut values: Vec<f64> = c.iter().map(|col| col.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    let data = (0..rows * cols).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
    DenseMatrix::from_row_major(rows, cols, data).expect("shape matches")
}

fn frobenius(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    dot(a.as_slice(), b.as_slice())
}

pub fn lmo_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 1..=6 {
        for k in 0..50 {
            let g = gaussian_matrix(&mut rng, n, n);
            let p = match lmo_birkhoff(&g) {
                Ok(p) => p,
                Err(e) => return (false, format!("birkhoff n={n}: {e}")),
            };
            let mut perm = Vec::with_capacity(n);
            for i in 0..n {
                let ones: Vec<usize> = (0..n).filter(|&j| p[(i, j)] == 1.0).collect();
                let zeros = (0..n).filter(|&j| p[(i, j)] == 0.0).count();
                if ones.len() != 1 || zeros != n - 1 {
                    return (false, format!("birkhoff n={n} gradient {k}: row {i} is not a permutation row"));
                }
                perm.push(ones[0]);
            }
            let cost: f64 = (0..n).map(|i| g[(i, perm[i])]).sum();
            let best = brute_force_assignment(&g);
            if cost != best {
                return (false, format!("birkhoff n={n} gradient {k}: cost {cost} vs brute force {best}"));
            }
        }
    }
    let n = 20;
    let mut worst_spec = 0.0f64;
    let mut worst_nuc = 0.0f64;
    for k in 0..20 {
        let a = gaussian_matrix(&mut rng, n, n);
        let g = a.symmetrized();
        let v = match lmo_spectraplex(&g) {
            Ok(v) => v,
            Err(e) => return (false, format!("spectraplex matrix {k}: {e}")),
        };
        let reference = jacobi_eigenvalues(&g)[0];
        let err = (frobenius(&g, &v) - reference).abs() / reference.abs().max(1.0);
        worst_spec = worst_spec.max(err);

        let radius = 1.0 + k as f64;
        let v = match lmo_nuclear(&a, radius) {
            Ok(v) => v,
            Err(e) => return (false, format!("nuclear matrix {k}: {e}")),
        };
        let reference = -radius * jacobi_singular_values(&a)[0];
        let err = (frobenius(&a, &v) - reference).abs() / reference.abs().max(1.0);
        worst_nuc = worst_nuc.max(err);
    }
    let ok = worst_spec <= 1e-8 && worst_nuc <= 1e-8;
    (
        ok,
        format!(
            "birkhoff n ≤ 6 × 50 exact, spectraplex rel. err {worst_spec:.1e}, nuclear rel. err {worst_nuc:.1e}"
        ),
    )
}

// ---------------------------------------------------------------- 8

pub fn harness_check() -> Check {
    let rows = match rootbench(1e-8, 1) {
        Ok(rows) => rows,
        Err(e) => return (false, e.to_string()),
    };
    let mut problems = Vec::new();
    for row in &rows {
        if !row.secant.converged || row.secant.residual_max >= 1e-8 {
            problems.push(format!("{}: secant did not converge", row.name));
        }
        let one_shot = row.name.starts_with("affine") || row.name.contains("quadratic");
        if one_shot && row.secant.iters_max > 1 {
            problems.push(format!("{}: {} secant iterations", row.name, row.secant.iters_max));
        }
    }
    let fallbacks: usize = rows.iter().map(|r| r.secant.fallbacks).sum();
    let newton_failures = rows.iter().filter(|r| !r.newton.converged).count();
    if problems.is_empty() {
        (
            true,
            format!(
                "{} rows converged, {fallbacks} secant fallback(s), {newton_failures} Newton failure(s)",
                rows.len()
            ),
        )
    } else {
        (false, problems.join("; "))
    }
}

// ---------------------------------------------------------------- 9

fn fd_size(class: ProblemClass) -> usize {
    match class {
        ProblemClass::QuadProb | ProblemClass::Ill | ProblemClass::OD | ProblemClass::OA => 30,
        ProblemClass::Port => 20,
        ProblemClass::Birkhoff | ProblemClass::Nuclear | ProblemClass::Spec => 8,
    }
}

/// A strictly interior feasible point: a mixture of many LMO vertices
/// pulled towards the instance's start point.
fn interior_point(inst: &ProblemInstance, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = inst.dim();
    let k = if inst.class.is_matrix() { 12 } else { 3 * n };
    let mut x: Vec<f64> = inst.x0.iter().map(|v| 0.2 * v).collect();
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    for wi in w {
        let g: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let Ok(v) = inst.lmo.minimize(&g) else { continue };
        for (a, b) in x.iter_mut().zip(v) {
            *a += 0.8 * wi / total * b;
        }
    }
    x
}

pub fn gradient_check() -> Check {
    let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut worst = 0.0f64;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for class in ProblemClass::ALL {
        let inst = match generate_instance(class, fd_size(class), 3) {
            Ok(i) => i,
            Err(e) => return (false, format!("{class}: {e}")),
        };
        let oracle = inst.oracle.as_ref();
        for point in 0..20 {
            let x = interior_point(&inst, &mut rng);
            let g = oracle.gradient(&x);
            let h = 1e-6 * inf(&x).max(1.0);
            let fd = match finite_difference_gradient(oracle, &x, h) {
                Ok(fd) => fd,
                Err(e) => return (false, format!("{class} point {point}: {e}")),
            };
            let diff: Vec<f64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
            let rel = inf(&diff) / inf(&g).max(1e-12);
            if !(rel <= 1e-5) {
                return (false, format!("{class} point {point}: relative error {rel:.1e}"));
            }
            worst = worst.max(rel);
        }
    }
    (true, format!("8 classes × 20 points, max relative error {worst:.1e}"))
}

// ----------------------------------------------------------------

/// Runs one criterion by number.
pub fn run_criterion(id: u8) -> Option<CriterionOutcome> {
    Some(match id {
        1 => timed(1, Some(1.0), quadratic_one_shot),
        2 => timed(2, Some(1.0), secant_order),
        3 => timed(3, Some(1.0), monotone_contraction),
        4 => timed(4, Some(5.0), inexact_budget),
        5 => {
            let runs = desk_runs();
            timed(5, None, || desk_solves(&runs))
        }
        6 => {
            let runs = desk_runs();
            timed(6, None, || inner_economy(&runs))
        }
        7 => timed(7, Some(5.0), lmo_equivalence),
        8 => timed(8, None, harness_check),
        9 => timed(9, Some(10.0), gradient_check),
        _ => return None,
    })
}

/// Runs all nine criteria, sharing the desk solves between 5 and 6.
pub fn run_all() -> Vec<CriterionOutcome> {
    let mut out = Vec::with_capacity(9);
    for id in 1..=4 {
        out.extend(run_criterion(id));
    }
    let start = Instant::now();
    let runs = desk_runs();
    let solve_s = start.elapsed().as_secs_f64();
    let mut fifth = timed(5, None, || desk_solves(&runs));
    fifth.elapsed_s += solve_s;
    out.push(fifth);
    out.push(timed(6, None, || inner_economy(&runs)));
    for id in 7..=9 {
        out.extend(run_criterion(id));
    }
    out
}

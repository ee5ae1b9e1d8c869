//! Secant versus Newton on scalar root-finding problems.
//!
//! Both methods start from `γ₀ = 0`; the secant method takes `γ₁ = ρ` as
//! its second seed and Newton's method starts at `γ₁`. The problems are
//! eight classical scalar test functions, an affine function, and two
//! families of line-search problems `φ(γ) = ⟨∇f(x − γd), d⟩` drawn from
//! the quadratic and portfolio generators.
//!
//! When the secant iteration stops without converging (a degenerate
//! denominator or a non-finite value), the secant column falls back to
//! bisection on the tightest sign-change bracket among its iterates. The
//! fallback count is reported next to the timings.

use std::time::Instant;

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use secant_fw::linalg::{dot_unchecked, norm};
use secant_fw::problems::{generate_instance, ProblemClass};
use secant_fw::{solve_newton, solve_secant, Objective, RootResult};

/// Offset between the two secant seeds.
pub const SEED_OFFSET: f64 = 1e-5;
/// Iteration cap for both methods.
pub const MAX_ITER: usize = 1_000;
/// Line-search problems per family.
pub const FAMILY_SIZE: usize = 100;
/// Dimension of the line-search problems.
pub const FAMILY_DIM: usize = 50;

/// Step of the central difference used for Newton's derivative on the
/// portfolio family.
const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct MethodStats {
    /// Mean iterations (secant: after the seeds).
    pub iters_mean: f64,
    pub iters_max: usize,
    /// Mean wall time of one solve.
    pub time_s: f64,
    /// All problems of the row converged.
    pub converged: bool,
    pub residual_max: f64,
    /// Problems that needed the bisection fallback.
    pub fallbacks: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootBenchRow {
    pub name: String,
    pub problems: usize,
    pub secant: MethodStats,
    pub newton: MethodStats,
}

impl RootBenchRow {
    /// Newton time over secant time.
    pub fn time_ratio(&self) -> f64 {
        self.newton.time_s / self.secant.time_s
    }
}

pub struct ScalarProblem {
    pub name: &'static str,
    pub f: fn(f64) -> f64,
    pub df: fn(f64) -> f64,
}

pub fn test_functions() -> Vec<ScalarProblem> {
    vec![
        ScalarProblem { name: "x^2 - 2", f: |x| x * x - 2.0, df: |x| 2.0 * x },
        ScalarProblem { name: "x^2 - 5", f: |x| x * x - 5.0, df: |x| 2.0 * x },
        ScalarProblem { name: "x^2 - 10", f: |x| x * x - 10.0, df: |x| 2.0 * x },
        ScalarProblem { name: "x^2 - x - 2", f: |x| x * x - x - 2.0, df: |x| 2.0 * x - 1.0 },
        ScalarProblem { name: "x^2 + 2x - 7", f: |x| x * x + 2.0 * x - 7.0, df: |x| 2.0 * x + 2.0 },
        ScalarProblem { name: "x^3 - 2", f: |x| x * x * x - 2.0, df: |x| 3.0 * x * x },
        ScalarProblem { name: "x e^x - 7", f: |x| x * x.exp() - 7.0, df: |x| (1.0 + x) * x.exp() },
        ScalarProblem { name: "x - cos(x)", f: |x| x - x.cos(), df: |x| 1.0 + x.sin() },
    ]
}

/// `φ(x) = 3x − 2`, solved exactly by one secant update.
pub fn affine_problem() -> ScalarProblem {
    ScalarProblem { name: "affine 3x - 2", f: |x| 3.0 * x - 2.0, df: |_| 3.0 }
}

/// A line-search problem along `x − γd`.
pub struct LineProblem {
    pub objective: Box<dyn Objective>,
    pub x: Vec<f64>,
    pub d: Vec<f64>,
}

impl LineProblem {
    pub fn phi(&self, gamma: f64) -> f64 {
        let p: Vec<f64> = self.x.iter().zip(&self.d).map(|(a, b)| a - gamma * b).collect();
        dot_unchecked(&self.objective.gradient(&p), &self.d)
    }

    /// `φ′(γ) = −dᵀ∇²f d` from a gradient difference, exact for quadratics.
    fn phi_prime_quadratic(&self, gamma: f64) -> f64 {
        let p: Vec<f64> = self.x.iter().zip(&self.d).map(|(a, b)| a - gamma * b).collect();
        let q: Vec<f64> = p.iter().zip(&self.d).map(|(a, b)| a + b).collect();
        let g0 = self.objective.gradient(&p);
        let g1 = self.objective.gradient(&q);
        -g1.iter().zip(&g0).zip(&self.d).map(|((a, b), d)| (a - b) * d).sum::<f64>()
    }

    fn phi_prime_central(&self, gamma: f64) -> f64 {
        let h = FD_STEP * gamma.abs().max(1.0);
        (self.phi(gamma + h) - self.phi(gamma - h)) / (2.0 * h)
    }
}

fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect();
    let s = norm(&v);
    v.iter().map(|a| a / s).collect()
}

/// Quadratic objectives from the `QuadProb` generator with `x` and `d`
/// drawn uniformly from the unit sphere.
pub fn quadratic_family(count: usize) -> Result<Vec<LineProblem>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x51ab);
    (0..count as u64)
        .map(|seed| {
            let inst = generate_instance(ProblemClass::QuadProb, FAMILY_DIM, seed)?;
            let x = unit_vector(&mut rng, FAMILY_DIM);
            let d = unit_vector(&mut rng, FAMILY_DIM);
            Ok(LineProblem { objective: inst.oracle, x, d })
        })
        .collect()
}

/// Portfolio objectives at a random interior point of the simplex, along
/// the segment towards the best vertex, keeping problems whose minimizer
/// lies strictly inside the segment.
pub fn portfolio_family(count: usize) -> Result<Vec<LineProblem>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9047);
    let mut out = Vec::with_capacity(count);
    let mut seed = 0;
    while out.len() < count {
        if seed > 100 * count as u64 {
            bail!("could not draw {count} portfolio line searches with an interior minimizer");
        }
        let inst = generate_instance(ProblemClass::Port, FAMILY_DIM, seed)?;
        seed += 1;
        let w: Vec<f64> = (0..FAMILY_DIM).map(|_| -rng.random_range(1e-3..1.0f64).ln()).collect();
        let total: f64 = w.iter().sum();
        let x: Vec<f64> = w.iter().map(|v| v / total).collect();
        let g = inst.oracle.gradient(&x);
        let best = (0..FAMILY_DIM).min_by(|&a, &b| g[a].total_cmp(&g[b])).expect("nonempty");
        let mut d = x.clone();
        d[best] -= 1.0;
        let problem = LineProblem { objective: inst.oracle, x, d };
        if problem.phi(0.0) > 0.0 && problem.phi(1.0) < 0.0 {
            out.push(problem);
        }
    }
    Ok(out)
}

/// Runs `solve` `repeats` times and returns the last result with the mean
/// time per run.
fn timed<F: FnMut() -> Result<RootResult>>(repeats: usize, mut solve: F) -> Result<(RootResult, f64)> {
    let start = Instant::now();
    let mut last = solve()?;
    for _ in 1..repeats {
        last = solve()?;
    }
    Ok((last, start.elapsed().as_secs_f64() / repeats as f64))
}

/// Secant iteration with the bisection fallback. The returned iteration
/// count includes the bisection steps and the flag reports the fallback.
pub fn secant_with_fallback<F: FnMut(f64) -> f64>(
    mut phi: F,
    x0: f64,
    x1: f64,
    tol: f64,
    max_iter: usize,
) -> Result<(RootResult, bool)> {
    let secant = solve_secant(&mut phi, x0, x1, tol, max_iter)?;
    if secant.converged {
        return Ok((secant, false));
    }
    let points: Vec<(f64, f64)> =
        secant.history.iter().map(|&x| (x, phi(x))).filter(|(x, v)| x.is_finite() && v.is_finite()).collect();
    let mut bracket: Option<(f64, f64, f64)> = None;
    for (i, &(a, fa)) in points.iter().enumerate() {
        for &(b, fb) in &points[i + 1..] {
            if fa.signum() != fb.signum() && bracket.is_none_or(|(lo, hi, _)| (b - a).abs() < (hi - lo).abs()) {
                bracket = Some((a, b, fa));
            }
        }
    }
    let Some((mut lo, mut hi, mut f_lo)) = bracket else {
        return Ok((secant, true));
    };
    let mut history = secant.history;
    let mut iterations = secant.iterations;
    let (mut x, mut fx) = (secant.root, secant.residual);
    while iterations < max_iter {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let f_mid = phi(mid);
        iterations += 1;
        history.push(mid);
        (x, fx) = (mid, f_mid.abs());
        if fx < tol {
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            (lo, f_lo) = (mid, f_mid);
        } else {
            hi = mid;
        }
    }
    Ok((RootResult { root: x, iterations, residual: fx, converged: fx < tol, history }, true))
}

fn stats(results: &[(RootResult, f64)], fallbacks: usize) -> MethodStats {
    let n = results.len() as f64;
    MethodStats {
        iters_mean: results.iter().map(|(r, _)| r.iterations as f64).sum::<f64>() / n,
        iters_max: results.iter().map(|(r, _)| r.iterations).max().unwrap_or(0),
        time_s: results.iter().map(|(_, t)| t).sum::<f64>() / n,
        converged: results.iter().all(|(r, _)| r.converged),
        residual_max: results.iter().map(|(r, _)| r.residual).fold(0.0, f64::max),
        fallbacks,
    }
}

fn timed_secant<F: FnMut(f64) -> f64 + Copy>(repeats: usize, phi: F, tol: f64) -> Result<((RootResult, f64), bool)> {
    let mut fell_back = false;
    let out = timed(repeats, || {
        let (r, fb) = secant_with_fallback(phi, 0.0, SEED_OFFSET, tol, MAX_ITER)?;
        fell_back = fb;
        Ok(r)
    })?;
    Ok((out, fell_back))
}

fn scalar_row(p: &ScalarProblem, tol: f64, repeats: usize) -> Result<RootBenchRow> {
    let (secant, fell_back) = timed_secant(repeats, p.f, tol)?;
    let newton = timed(repeats, || Ok(solve_newton(p.f, p.df, SEED_OFFSET, tol, MAX_ITER)?))?;
    Ok(RootBenchRow {
        name: p.name.to_string(),
        problems: 1,
        secant: stats(&[secant], usize::from(fell_back)),
        newton: stats(&[newton], 0),
    })
}

fn family_row(name: &str, problems: &[LineProblem], quadratic: bool, tol: f64, repeats: usize) -> Result<RootBenchRow> {
    let mut secant = Vec::new();
    let mut newton = Vec::new();
    let mut fallbacks = 0;
    for p in problems {
        let (run, fell_back) = timed_secant(repeats, |g| p.phi(g), tol)?;
        fallbacks += usize::from(fell_back);
        secant.push(run);
        newton.push(timed(repeats, || {
            let r = if quadratic {
                solve_newton(|g| p.phi(g), |g| p.phi_prime_quadratic(g), SEED_OFFSET, tol, MAX_ITER)
            } else {
                solve_newton(|g| p.phi(g), |g| p.phi_prime_central(g), SEED_OFFSET, tol, MAX_ITER)
            };
            Ok(r?)
        })?);
    }
    Ok(RootBenchRow {
        name: name.to_string(),
        problems: problems.len(),
        secant: stats(&secant, fallbacks),
        newton: stats(&newton, 0),
    })
}

/// The full comparison table: eight test functions, the affine function,
/// then the quadratic and portfolio line-search families.
pub fn rootbench(tol: f64, repeats: usize) -> Result<Vec<RootBenchRow>> {
    if !(tol > 0.0) {
        bail!("tol must be positive, got {tol}");
    }
    if repeats == 0 {
        bail!("repeats must be at least 1");
    }
    let mut rows = Vec::new();
    for p in test_functions().iter().chain([affine_problem()].iter()) {
        rows.push(scalar_row(p, tol, repeats)?);
    }
    rows.push(family_row("line search (quadratic)", &quadratic_family(FAMILY_SIZE)?, true, tol, repeats)?);
    rows.push(family_row("line search (portfolio)", &portfolio_family(FAMILY_SIZE)?, false, tol, repeats)?);
    for row in &rows {
        if !row.secant.converged || !row.newton.converged {
            log::warn!(
                "{}: secant converged {}, newton converged {}",
                row.name,
                row.secant.converged,
                row.newton.converged
            );
        }
    }
    Ok(rows)
}

pub const ROOTBENCH_HEADER: [&str; 15] = [
    "function",
    "problems",
    "secant_iters_mean",
    "secant_iters_max",
    "secant_time_s",
    "secant_converged",
    "secant_residual_max",
    "secant_fallbacks",
    "newton_iters_mean",
    "newton_iters_max",
    "newton_time_s",
    "newton_converged",
    "newton_residual_max",
    "newton_over_secant_time",
    "tol",
];

pub fn rootbench_csv_rows(rows: &[RootBenchRow], tol: f64) -> Vec<Vec<String>> {
    use crate::output::fmt_f64;
    rows.iter()
        .map(|r| {
            vec![
                r.name.clone(),
                r.problems.to_string(),
                fmt_f64(r.secant.iters_mean),
                r.secant.iters_max.to_string(),
                fmt_f64(r.secant.time_s),
                r.secant.converged.to_string(),
                fmt_f64(r.secant.residual_max),
                r.secant.fallbacks.to_string(),
                fmt_f64(r.newton.iters_mean),
                r.newton.iters_max.to_string(),
                fmt_f64(r.newton.time_s),
                r.newton.converged.to_string(),
                fmt_f64(r.newton.residual_max),
                fmt_f64(r.time_ratio()),
                fmt_f64(tol),
            ]
        })
        .collect()
}

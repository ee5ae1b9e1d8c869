//! Step-size rules for Frank-Wolfe type updates `x ← x − γ·d`.
//!
//! The free functions implement individual rules. [`StepRule`] bundles a
//! rule with its per-solve state so solvers can treat all of them alike.

use std::fmt;
use std::str::FromStr;

use crate::error::StepError;
use crate::linalg::{norm_sq, step_point};
use crate::linesearch::{golden_section, sls_with_slope, LineSearchResult, SlsState};
use crate::oracle::Objective;

/// Everything a step rule may look at for one update.
pub struct StepContext<'a> {
    pub t: usize,
    pub x: &'a [f64],
    pub d: &'a [f64],
    pub grad: &'a [f64],
    /// `⟨grad, d⟩`
    pub grad_dot_d: f64,
    pub gamma_max: f64,
    pub oracle: &'a dyn Objective,
    /// `f(x)`, already known to the solver.
    pub f_x: f64,
    /// Required primal accuracy of an inexact line search, if any.
    pub primal_tol: Option<f64>,
}

/// Result of one step-rule invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub gamma: f64,
    /// Inner iterations spent; zero for closed-form rules.
    pub inner_iters: usize,
    /// Details of the line search, for line-search based rules.
    pub line_search: Option<LineSearchResult>,
}

impl StepOutcome {
    fn closed_form(gamma: f64) -> Self {
        Self { gamma, inner_iters: 0, line_search: None }
    }
}

/// Open-loop step `2/(t+2)`.
pub fn agnostic_step(t: usize) -> f64 {
    2.0 / (t as f64 + 2.0)
}

/// `clip(⟨∇f, d⟩ / (L‖d‖²), 0, γ_max)`.
pub fn short_step(grad_dot_d: f64, d_norm_sq: f64, l: f64, gamma_max: f64) -> f64 {
    let raw = grad_dot_d / (l * d_norm_sq);
    if raw.is_nan() {
        return 0.0;
    }
    raw.clamp(0.0, gamma_max)
}

/// Which sufficiency test the adaptive rule applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdaptiveMode {
    /// Quadratic upper model on function values.
    ZeroOrder,
    /// Lower bound on the directional slope at the candidate.
    FirstOrder,
}

/// Smoothness estimate carried across calls of [`adaptive_step`].
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveState {
    /// Current estimate; `None` until initialised from a gradient probe.
    pub l_est: Option<f64>,
    pub tau: f64,
    pub eta: f64,
    pub max_doublings: usize,
}

impl Default for AdaptiveState {
    fn default() -> Self {
        Self { l_est: None, tau: 2.0, eta: 0.9, max_doublings: 64 }
    }
}

impl AdaptiveState {
    pub fn with_estimate(l_est: f64) -> Self {
        Self { l_est: Some(l_est), ..Self::default() }
    }
}

/// Outcome of [`adaptive_step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOutcome {
    pub gamma: f64,
    /// Estimate `M` at which the sufficiency test passed.
    pub accepted_l: f64,
    pub doublings: usize,
}

/// Adaptive smoothness-estimate step.
///
/// Tries `γ = min(⟨∇f, d⟩/(M‖d‖²), γ_max)` with `M` the current estimate and
/// multiplies `M` by `tau` until the sufficiency test holds:
///
/// * zero order: `f(x − γd) ≤ f(x) − γ⟨∇f, d⟩ + γ²M‖d‖²/2`,
/// * first order: `⟨∇f(x − γd), d⟩ ≥ ⟨∇f, d⟩ − γM‖d‖²`.
///
/// After acceptance the stored estimate becomes `eta·M`, so the next call
/// starts optimistically.
pub fn adaptive_step(state: &mut AdaptiveState, ctx: &StepContext<'_>, mode: AdaptiveMode) -> Result<AdaptiveOutcome, StepError> {
    let gdd = ctx.grad_dot_d;
    if !(gdd > 0.0) {
        return Ok(AdaptiveOutcome { gamma: 0.0, accepted_l: state.l_est.unwrap_or(0.0), doublings: 0 });
    }
    let dn2 = norm_sq(ctx.d);
    let mut m = match state.l_est {
        Some(l) if l > 0.0 => l,
        _ => probe_smoothness(ctx, dn2),
    };
    let mut point = vec![0.0; ctx.x.len()];
    let mut grad = vec![0.0; ctx.x.len()];
    for doublings in 0..=state.max_doublings {
        let gamma = (gdd / (m * dn2)).min(ctx.gamma_max);
        step_point(ctx.x, ctx.d, gamma, &mut point);
        let ok = match mode {
            AdaptiveMode::ZeroOrder => {
                let f_new = ctx.oracle.value(&point);
                let bound = ctx.f_x - gamma * gdd + 0.5 * gamma * gamma * m * dn2;
                f_new.is_finite() && f_new <= bound + 1e-14 * ctx.f_x.abs().max(1.0)
            }
            AdaptiveMode::FirstOrder => {
                ctx.oracle.gradient_into(&point, &mut grad);
                let slope: f64 = grad.iter().zip(ctx.d).map(|(g, d)| g * d).sum();
                let bound = gdd - gamma * m * dn2;
                slope.is_finite() && slope >= bound - 1e-12 * (gdd.abs() + gamma * m * dn2)
            }
        };
        if ok {
            state.l_est = Some(state.eta * m);
            return Ok(AdaptiveOutcome { gamma, accepted_l: m, doublings });
        }
        m *= state.tau;
    }
    Err(StepError::AdaptivityFailure(state.max_doublings))
}

/// Initial smoothness guess `‖∇f(x) − ∇f(x − hd)‖ / (h‖d‖)` from a short
/// probe along the segment, pulled back while the probe leaves the domain.
fn probe_smoothness(ctx: &StepContext<'_>, dn2: f64) -> f64 {
    let mut h = 1e-3 * ctx.gamma_max;
    let mut point = vec![0.0; ctx.x.len()];
    let mut grad = vec![0.0; ctx.x.len()];
    for _ in 0..60 {
        step_point(ctx.x, ctx.d, h, &mut point);
        ctx.oracle.gradient_into(&point, &mut grad);
        if grad.iter().all(|g| g.is_finite()) {
            let diff: f64 = grad.iter().zip(ctx.grad).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            let l = diff / (h * dn2.sqrt());
            if l.is_finite() && l > 0.0 {
                return l;
            }
            break;
        }
        h *= 0.5;
    }
    // flat along d: any positive estimate works, the test corrects it
    ctx.grad_dot_d / dn2
}

/// Halving counter of the monotonic step rule.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MonotonicState {
    pub halvings: usize,
}

const MONOTONIC_MAX_HALVINGS: usize = 64;

/// `γ = 2^{−j}·min(2/(t+2), γ_max)` for the smallest `j ≥ halvings` with
/// `f(x − γd) < f(x)`; `halvings` is raised to that `j`.
pub fn monotonic_step(state: &mut MonotonicState, ctx: &StepContext<'_>) -> Result<f64, StepError> {
    let base = agnostic_step(ctx.t).min(ctx.gamma_max);
    let mut point = vec![0.0; ctx.x.len()];
    for j in state.halvings..=MONOTONIC_MAX_HALVINGS {
        let gamma = base * 0.5f64.powi(j as i32);
        step_point(ctx.x, ctx.d, gamma, &mut point);
        let f_new = ctx.oracle.value(&point);
        if f_new.is_finite() && f_new < ctx.f_x {
            state.halvings = j;
            return Ok(gamma);
        }
    }
    Err(StepError::NoImprovement(MONOTONIC_MAX_HALVINGS))
}

/// Armijo backtracking parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Backtracking {
    pub c: f64,
    pub shrink: f64,
    pub max_halvings: usize,
}

impl Default for Backtracking {
    fn default() -> Self {
        Self { c: 1e-4, shrink: 0.5, max_halvings: 60 }
    }
}

/// Armijo backtracking from `γ_max`: shrink until
/// `f(x − γd) ≤ f(x) − c·γ·⟨∇f, d⟩`. Returns the step and the number of
/// function evaluations.
pub fn backtracking_step(params: &Backtracking, ctx: &StepContext<'_>) -> Result<(f64, usize), StepError> {
    if !(ctx.grad_dot_d > 0.0) {
        return Ok((0.0, 0));
    }
    let mut gamma = ctx.gamma_max;
    let mut point = vec![0.0; ctx.x.len()];
    for k in 0..=params.max_halvings {
        step_point(ctx.x, ctx.d, gamma, &mut point);
        let f_new = ctx.oracle.value(&point);
        if f_new.is_finite() && f_new <= ctx.f_x - params.c * gamma * ctx.grad_dot_d {
            return Ok((gamma, k + 1));
        }
        gamma *= params.shrink;
    }
    Err(StepError::NoImprovement(params.max_halvings))
}

/// Name of a step-size strategy, as used on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StrategyKind {
    Secant,
    Golden,
    Backtracking,
    Agnostic,
    ShortStep,
    Adaptive,
    AdaptiveZeroOrder,
    Monotonic,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 8] = [
        StrategyKind::Secant,
        StrategyKind::Golden,
        StrategyKind::Backtracking,
        StrategyKind::Agnostic,
        StrategyKind::ShortStep,
        StrategyKind::Adaptive,
        StrategyKind::AdaptiveZeroOrder,
        StrategyKind::Monotonic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyKind::Secant => "secant",
            StrategyKind::Golden => "golden",
            StrategyKind::Backtracking => "backtracking",
            StrategyKind::Agnostic => "agnostic",
            StrategyKind::ShortStep => "shortstep",
            StrategyKind::Adaptive => "adaptive",
            StrategyKind::AdaptiveZeroOrder => "adaptive0",
            StrategyKind::Monotonic => "monotonic",
        }
    }

    /// Whether the rule guarantees a non-increasing primal sequence.
    pub fn is_monotone(self) -> bool {
        !matches!(self, StrategyKind::Agnostic | StrategyKind::ShortStep)
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let kind = match lower.as_str() {
            "secant" | "sls" => StrategyKind::Secant,
            "golden" | "goldenratio" | "golden-section" => StrategyKind::Golden,
            "backtracking" | "armijo" => StrategyKind::Backtracking,
            "agnostic" | "openloop" => StrategyKind::Agnostic,
            "shortstep" | "short-step" => StrategyKind::ShortStep,
            "adaptive" | "adaptive1" => StrategyKind::Adaptive,
            "adaptive0" | "adaptive-zero" => StrategyKind::AdaptiveZeroOrder,
            "monotonic" => StrategyKind::Monotonic,
            _ => return Err(format!("unknown step-size strategy `{s}`")),
        };
        Ok(kind)
    }
}

/// A step-size rule together with its per-solve state.
#[derive(Debug, Clone, PartialEq)]
pub enum StepRule {
    Secant(SlsState),
    Golden { rel_tol: f64 },
    Backtracking(Backtracking),
    Agnostic,
    /// Uses the given constant, or the objective's own when `None`.
    ShortStep { l: Option<f64> },
    Adaptive { state: AdaptiveState, mode: AdaptiveMode },
    Monotonic(MonotonicState),
}

impl StepRule {
    pub fn new(kind: StrategyKind) -> Self {
        match kind {
            StrategyKind::Secant => StepRule::Secant(SlsState::default()),
            StrategyKind::Golden => StepRule::Golden { rel_tol: 1e-10 },
            StrategyKind::Backtracking => StepRule::Backtracking(Backtracking::default()),
            StrategyKind::Agnostic => StepRule::Agnostic,
            StrategyKind::ShortStep => StepRule::ShortStep { l: None },
            StrategyKind::Adaptive => StepRule::Adaptive { state: AdaptiveState::default(), mode: AdaptiveMode::FirstOrder },
            StrategyKind::AdaptiveZeroOrder => {
                StepRule::Adaptive { state: AdaptiveState::default(), mode: AdaptiveMode::ZeroOrder }
            }
            StrategyKind::Monotonic => StepRule::Monotonic(MonotonicState::default()),
        }
    }

    pub fn kind(&self) -> StrategyKind {
        match self {
            StepRule::Secant(_) => StrategyKind::Secant,
            StepRule::Golden { .. } => StrategyKind::Golden,
            StepRule::Backtracking(_) => StrategyKind::Backtracking,
            StepRule::Agnostic => StrategyKind::Agnostic,
            StepRule::ShortStep { .. } => StrategyKind::ShortStep,
            StepRule::Adaptive { mode: AdaptiveMode::FirstOrder, .. } => StrategyKind::Adaptive,
            StepRule::Adaptive { mode: AdaptiveMode::ZeroOrder, .. } => StrategyKind::AdaptiveZeroOrder,
            StepRule::Monotonic(_) => StrategyKind::Monotonic,
        }
    }

    /// Computes the step for `ctx`. The returned `gamma` always lies in
    /// `[0, ctx.gamma_max]`.
    pub fn step(&mut self, ctx: &StepContext<'_>) -> Result<StepOutcome, StepError> {
        let out = match self {
            StepRule::Secant(state) => {
                state.primal_tol = ctx.primal_tol;
                let res = sls_with_slope(ctx.oracle, ctx.x, ctx.d, ctx.gamma_max, ctx.grad_dot_d, state);
                StepOutcome { gamma: res.gamma, inner_iters: res.inner_iters, line_search: Some(res) }
            }
            StepRule::Golden { rel_tol } => {
                let mut res = golden_section(ctx.oracle, ctx.x, ctx.d, ctx.gamma_max, *rel_tol * ctx.gamma_max);
                let mut point = vec![0.0; ctx.x.len()];
                step_point(ctx.x, ctx.d, res.gamma, &mut point);
                let f_new = ctx.oracle.value(&point);
                res.inner_iters += 1;
                if !(f_new <= ctx.f_x) {
                    // the bracket midpoint can overshoot a minimum at 0
                    res.gamma = 0.0;
                }
                StepOutcome { gamma: res.gamma, inner_iters: res.inner_iters, line_search: Some(res) }
            }
            StepRule::Backtracking(params) => {
                let (gamma, evals) = backtracking_step(params, ctx)?;
                StepOutcome { gamma, inner_iters: evals, line_search: None }
            }
            StepRule::Agnostic => StepOutcome::closed_form(agnostic_step(ctx.t).min(ctx.gamma_max)),
            StepRule::ShortStep { l } => {
                let l = l.or_else(|| ctx.oracle.smoothness()).ok_or(StepError::MissingSmoothness)?;
                StepOutcome::closed_form(short_step(ctx.grad_dot_d, norm_sq(ctx.d), l, ctx.gamma_max))
            }
            StepRule::Adaptive { state, mode } => {
                let out = adaptive_step(state, ctx, *mode)?;
                StepOutcome { gamma: out.gamma, inner_iters: out.doublings + 1, line_search: None }
            }
            StepRule::Monotonic(state) => StepOutcome::closed_form(monotonic_step(state, ctx)?),
        };
        debug_assert!((0.0..=ctx.gamma_max).contains(&out.gamma), "step {} outside [0, {}]", out.gamma, ctx.gamma_max);
        Ok(out)
    }
}

//! Line searches along a Frank-Wolfe direction.
//!
//! Every search here works on the segment `γ ↦ x − γ·d`, `γ ∈ [0, γ_max]`,
//! through the directional slope `φ(γ) = ⟨∇f(x − γd), d⟩`. Note the sign:
//! `φ(γ) = −(d/dγ) f(x − γd)`, so `d` is a descent direction iff `φ(0) > 0`
//! and the exact line-search step is the root of `φ`.
//!
//! [`sls`] is the secant line search. [`golden_section`] is its
//! derivative-free fallback and a comparison strategy of its own.
//! [`exact_quadratic_step`] is the closed-form step for quadratics.

use crate::error::StepError;
use crate::linalg::{dot_unchecked, norm, step_point};
use crate::oracle::Objective;
use crate::rootfind::secant_step;

/// Reusable evaluator of `φ(γ)` and `f(x − γd)` on one segment.
///
/// Each call to [`DirectionalSlope::slope`] costs exactly one gradient
/// evaluation. Outside the objective's domain the slope is non-finite.
pub struct DirectionalSlope<'a> {
    oracle: &'a dyn Objective,
    x: &'a [f64],
    d: &'a [f64],
    point: Vec<f64>,
    grad: Vec<f64>,
    gradient_evals: usize,
    value_evals: usize,
}

impl<'a> DirectionalSlope<'a> {
    pub fn new(oracle: &'a dyn Objective, x: &'a [f64], d: &'a [f64]) -> Self {
        debug_assert_eq!(x.len(), d.len());
        Self {
            oracle,
            x,
            d,
            point: vec![0.0; x.len()],
            grad: vec![0.0; x.len()],
            gradient_evals: 0,
            value_evals: 0,
        }
    }

    pub fn slope(&mut self, gamma: f64) -> f64 {
        step_point(self.x, self.d, gamma, &mut self.point);
        self.oracle.gradient_into(&self.point, &mut self.grad);
        self.gradient_evals += 1;
        let s = dot_unchecked(&self.grad, self.d);
        if s.is_nan() {
            f64::INFINITY
        } else {
            s
        }
    }

    /// `f(x − γd)`, with `NaN` mapped to `+∞`.
    pub fn value(&mut self, gamma: f64) -> f64 {
        step_point(self.x, self.d, gamma, &mut self.point);
        self.value_evals += 1;
        let v = self.oracle.value(&self.point);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    pub fn gradient_evals(&self) -> usize {
        self.gradient_evals
    }

    pub fn value_evals(&self) -> usize {
        self.value_evals
    }
}

/// `φ(γ) = ⟨∇f(x − γd), d⟩` as a closure.
pub fn directional_slope<'a>(oracle: &'a dyn Objective, x: &'a [f64], d: &'a [f64]) -> impl FnMut(f64) -> f64 + 'a {
    let mut eval = DirectionalSlope::new(oracle, x, d);
    move |gamma| eval.slope(gamma)
}

/// Outcome of one line search.
#[derive(Debug, Clone, PartialEq)]
pub struct LineSearchResult {
    pub gamma: f64,
    /// Secant updates after the two seeds (or function evaluations for
    /// golden-section search). A warm seed that already satisfies the
    /// tolerance counts as zero.
    pub inner_iters: usize,
    /// `|φ(gamma)|`.
    pub residual: f64,
    /// The step sits on `0` or `γ_max` because the root lies outside.
    pub clipped: bool,
    /// The secant iteration gave up and golden-section search was used.
    pub used_fallback: bool,
    /// The secant correction fell below floating-point resolution of the
    /// segment before `|φ|` dropped under the tolerance.
    pub stalled: bool,
    /// Slope tolerance `ε` the search ran with.
    pub tolerance: f64,
    /// Secant iterates, seeds included.
    pub iterates: Vec<f64>,
}

impl LineSearchResult {
    fn immediate(gamma: f64, residual: f64, tolerance: f64, clipped: bool) -> Self {
        Self {
            gamma,
            inner_iters: 0,
            residual,
            clipped,
            used_fallback: false,
            stalled: false,
            tolerance,
            iterates: vec![gamma],
        }
    }
}

/// Parameters and warm-start memory of the secant line search.
#[derive(Debug, Clone, PartialEq)]
pub struct SlsState {
    /// Step returned by the previous call; seeds the next one.
    pub last_gamma: f64,
    /// Offset between the two seeds.
    pub rho: f64,
    /// Relative slope tolerance: `ε = eps_rel·|φ(0)|`, floored at `1e-12`.
    pub eps_rel: f64,
    pub max_inner: usize,
    /// How many times a candidate outside the domain is pulled back
    /// before giving up on the secant iteration.
    pub domain_halvings: usize,
    /// Optional bound on the primal suboptimality along the segment. When
    /// set, the slope tolerance is tightened to `primal_tol / γ_max`, which
    /// by convexity makes the result a `primal_tol`-minimizer.
    pub primal_tol: Option<f64>,
}

impl Default for SlsState {
    fn default() -> Self {
        Self {
            last_gamma: 0.0,
            rho: 1e-5,
            eps_rel: 1e-8,
            max_inner: 40,
            domain_halvings: 20,
            primal_tol: None,
        }
    }
}

impl SlsState {
    pub fn reset(&mut self) {
        self.last_gamma = 0.0;
    }

    fn tolerance(&self, phi0: f64, gamma_max: f64) -> f64 {
        let eps = (self.eps_rel * phi0.abs()).max(1e-12);
        match self.primal_tol {
            Some(delta) => eps.min(delta / gamma_max),
            None => eps,
        }
    }
}

/// Relative resolution below which a secant correction no longer moves the
/// point `x − γd`.
const STALL_RESOLUTION: f64 = 1e-13;

/// Secant line search. Computes `φ(0)` itself; see [`sls_with_slope`].
pub fn sls(oracle: &dyn Objective, x: &[f64], d: &[f64], gamma_max: f64, state: &mut SlsState) -> LineSearchResult {
    let mut slope = DirectionalSlope::new(oracle, x, d);
    let phi0 = slope.slope(0.0);
    sls_inner(&mut slope, x, d, gamma_max, phi0, state)
}

/// Secant line search with a known `φ(0) = ⟨∇f(x), d⟩`.
///
/// Runs the secant recursion on `φ` from the seeds `γ₀ = last_gamma`
/// (clamped to `[0, γ_max − ρ]`) and `γ₁ = γ₀ + ρ`, clipping every iterate
/// to `[0, γ_max]`. Stops when `|φ| < ε`, when two consecutive iterates clip
/// to the same endpoint and the slope sign there confirms it is optimal, or
/// when the secant correction stalls at floating-point resolution.
/// Degenerate denominators, exhausted iteration budgets and candidates that
/// stay outside the domain fall back to [`golden_section`].
pub fn sls_with_slope(
    oracle: &dyn Objective,
    x: &[f64],
    d: &[f64],
    gamma_max: f64,
    phi0: f64,
    state: &mut SlsState,
) -> LineSearchResult {
    let mut slope = DirectionalSlope::new(oracle, x, d);
    sls_inner(&mut slope, x, d, gamma_max, phi0, state)
}

fn sls_inner(
    slope: &mut DirectionalSlope<'_>,
    x: &[f64],
    d: &[f64],
    gamma_max: f64,
    phi0: f64,
    state: &mut SlsState,
) -> LineSearchResult {
    debug_assert!(gamma_max > 0.0);
    let eps = state.tolerance(phi0, gamma_max);
    if !(phi0 > 0.0) {
        // not a descent direction: γ = 0 is optimal on the segment
        state.last_gamma = 0.0;
        return LineSearchResult::immediate(0.0, phi0.abs(), eps, true);
    }
    if phi0 < eps {
        state.last_gamma = 0.0;
        return LineSearchResult::immediate(0.0, phi0, eps, false);
    }
    let result = secant_search(slope, x, d, gamma_max, phi0, eps, state);
    state.last_gamma = result.gamma;
    result
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Bound {
    Lower,
    Upper,
}

fn secant_search(
    slope: &mut DirectionalSlope<'_>,
    x: &[f64],
    d: &[f64],
    gamma_max: f64,
    phi0: f64,
    eps: f64,
    state: &SlsState,
) -> LineSearchResult {
    let stall = STALL_RESOLUTION * norm(x).max(f64::MIN_POSITIVE) / norm(d).max(f64::MIN_POSITIVE);
    let rho = state.rho.min(0.5 * gamma_max);
    let fallback = |slope: &mut DirectionalSlope<'_>, iterates: Vec<f64>, secant_iters: usize| {
        let mut res = golden_section_inner(slope, gamma_max, 1e-10 * gamma_max);
        res.inner_iters += secant_iters;
        res.used_fallback = true;
        res.tolerance = eps;
        res.iterates = iterates;
        res
    };

    // first seed: the warm start, falling back to 0 when it left the domain
    let warm = state.last_gamma.clamp(0.0, gamma_max - rho);
    let (mut g_prev, mut f_prev) = if warm > 0.0 {
        let f = slope.slope(warm);
        if f.is_finite() {
            (warm, f)
        } else {
            (0.0, phi0)
        }
    } else {
        (0.0, phi0)
    };
    if g_prev > 0.0 && f_prev.abs() < eps {
        return LineSearchResult {
            gamma: g_prev,
            inner_iters: 0,
            residual: f_prev.abs(),
            clipped: false,
            used_fallback: false,
            stalled: false,
            tolerance: eps,
            iterates: vec![g_prev],
        };
    }

    // second seed, pulled back towards the first while outside the domain
    let mut g_cur = g_prev + rho;
    let mut f_cur = slope.slope(g_cur);
    let mut halvings = 0;
    while !f_cur.is_finite() {
        if halvings == state.domain_halvings {
            return fallback(slope, vec![g_prev], 0);
        }
        g_cur = 0.5 * (g_prev + g_cur);
        f_cur = slope.slope(g_cur);
        halvings += 1;
    }
    let mut iterates = vec![g_prev, g_cur];
    if f_cur.abs() < eps {
        return LineSearchResult {
            gamma: g_cur,
            inner_iters: 0,
            residual: f_cur.abs(),
            clipped: false,
            used_fallback: false,
            stalled: false,
            tolerance: eps,
            iterates,
        };
    }

    let mut iters = 0;
    let mut cur_bound = (g_cur >= gamma_max).then_some(Bound::Upper);
    while iters < state.max_inner {
        // a vanishing secant slope extrapolates to the endpoint that φ points to
        let raw = secant_step(g_prev, g_cur, f_prev, f_cur).unwrap_or(f_cur.signum() * f64::INFINITY);
        let (mut cand, bound) = if raw <= 0.0 {
            (0.0, Some(Bound::Lower))
        } else if raw >= gamma_max {
            (gamma_max, Some(Bound::Upper))
        } else {
            (raw, None)
        };

        if bound.is_some() && bound == cur_bound {
            // second consecutive clip to the same endpoint
            let optimal = match bound {
                Some(Bound::Lower) => f_cur <= 0.0,
                _ => f_cur >= 0.0,
            };
            if optimal {
                return LineSearchResult {
                    gamma: g_cur,
                    inner_iters: iters,
                    residual: f_cur.abs(),
                    clipped: true,
                    used_fallback: false,
                    stalled: false,
                    tolerance: eps,
                    iterates,
                };
            }
            return fallback(slope, iterates, iters);
        }
        if bound.is_none() && (cand - g_cur).abs() <= stall {
            return LineSearchResult {
                gamma: g_cur,
                inner_iters: iters,
                residual: f_cur.abs(),
                clipped: false,
                used_fallback: false,
                stalled: true,
                tolerance: eps,
                iterates,
            };
        }

        iters += 1;
        let mut f_cand = if cand == 0.0 { phi0 } else { slope.slope(cand) };
        let mut halvings = 0;
        let mut cand_bound = bound;
        while !f_cand.is_finite() {
            if halvings == state.domain_halvings {
                iterates.push(cand);
                return fallback(slope, iterates, iters);
            }
            cand = 0.5 * (cand + g_cur);
            cand_bound = None;
            f_cand = slope.slope(cand);
            halvings += 1;
        }
        iterates.push(cand);
        (g_prev, f_prev) = (g_cur, f_cur);
        (g_cur, f_cur) = (cand, f_cand);
        cur_bound = cand_bound;
        if f_cur.abs() < eps {
            return LineSearchResult {
                gamma: g_cur,
                inner_iters: iters,
                residual: f_cur.abs(),
                clipped: false,
                used_fallback: false,
                stalled: false,
                tolerance: eps,
                iterates,
            };
        }
    }
    fallback(slope, iterates, iters)
}

/// Golden-section minimization of `γ ↦ f(x − γd)` on `[0, γ_max]`.
///
/// Terminates once the bracket is narrower than `tol` and returns its
/// midpoint. `inner_iters` counts function evaluations. A probe where `f`
/// is not finite shrinks the bracket towards `0`, which is assumed to lie in
/// the domain.
pub fn golden_section(oracle: &dyn Objective, x: &[f64], d: &[f64], gamma_max: f64, tol: f64) -> LineSearchResult {
    let mut slope = DirectionalSlope::new(oracle, x, d);
    golden_section_inner(&mut slope, gamma_max, tol)
}

fn golden_section_inner(seg: &mut DirectionalSlope<'_>, gamma_max: f64, tol: f64) -> LineSearchResult {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let tol = tol.max(f64::EPSILON * gamma_max);
    let start_evals = seg.value_evals();
    let (mut a, mut b) = (0.0, gamma_max);
    let mut c = b - INV_PHI * (b - a);
    let mut e = a + INV_PHI * (b - a);
    let mut fc = seg.value(c);
    let mut fe = seg.value(e);
    while b - a >= tol {
        if !fc.is_finite() {
            b = c;
            c = b - INV_PHI * (b - a);
            e = a + INV_PHI * (b - a);
            fc = seg.value(c);
            fe = seg.value(e);
        } else if !fe.is_finite() || fc <= fe {
            b = e;
            e = c;
            fe = fc;
            c = b - INV_PHI * (b - a);
            fc = seg.value(c);
        } else {
            a = c;
            c = e;
            fc = fe;
            e = a + INV_PHI * (b - a);
            fe = seg.value(e);
        }
    }
    let gamma = 0.5 * (a + b);
    let evals = seg.value_evals() - start_evals;
    let residual = seg.slope(gamma).abs();
    LineSearchResult {
        gamma,
        inner_iters: evals,
        residual,
        clipped: false,
        used_fallback: false,
        stalled: false,
        tolerance: tol,
        iterates: vec![gamma],
    }
}

/// Closed-form minimizer of a quadratic along the segment:
/// `clip(⟨∇f(x), d⟩ / dᵀ∇²f d, 0, γ_max)`.
pub fn exact_quadratic_step(grad_dot_d: f64, d_curvature: f64, gamma_max: f64) -> Result<f64, StepError> {
    if !(d_curvature > 0.0) {
        return Err(StepError::Curvature(d_curvature));
    }
    Ok((grad_dot_d / d_curvature).clamp(0.0, gamma_max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// `½‖x − c‖²`
    struct Shifted(Vec<f64>);

    impl Objective for Shifted {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn value(&self, x: &[f64]) -> f64 {
            0.5 * x.iter().zip(&self.0).map(|(a, c)| (a - c) * (a - c)).sum::<f64>()
        }
        fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
            for ((o, a), c) in out.iter_mut().zip(x).zip(&self.0) {
                *o = a - c;
            }
        }
    }

    /// `−log(x₁)`
    struct NegLog;

    impl Objective for NegLog {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, x: &[f64]) -> f64 {
            if x[0] > 0.0 {
                -x[0].ln()
            } else {
                f64::INFINITY
            }
        }
        fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
            out[0] = if x[0] > 0.0 { -1.0 / x[0] } else { f64::NAN };
        }
    }

    /// `−log(x₁) − log(2 − x₁)`: minimum at 1, domain (0, 2)
    struct Barrier;

    impl Objective for Barrier {
        fn dim(&self) -> usize {
            1
        }
        fn value(&self, x: &[f64]) -> f64 {
            if x[0] > 0.0 && x[0] < 2.0 {
                -x[0].ln() - (2.0 - x[0]).ln()
            } else {
                f64::INFINITY
            }
        }
        fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
            out[0] = if x[0] > 0.0 && x[0] < 2.0 {
                -1.0 / x[0] + 1.0 / (2.0 - x[0])
            } else {
                f64::NAN
            };
        }
    }

    #[test]
    fn slope_of_half_norm() {
        let f = Shifted(vec![0.0, 0.0]);
        let (x, d) = ([1.0, 1.0], [1.0, 1.0]);
        let mut phi = directional_slope(&f, &x, &d);
        assert_eq!(phi(0.0), 2.0);
        assert_eq!(phi(1.0), 0.0);
        assert_eq!(phi(0.25), 1.5);
    }

    #[test]
    fn slope_at_zero_is_grad_dot_d() {
        let f = Shifted(vec![0.3, -2.0, 1.0]);
        let (x, d) = ([1.0, 0.5, -0.25], [0.2, -1.0, 3.0]);
        let g = f.gradient(&x);
        let mut phi = directional_slope(&f, &x, &d);
        assert_eq!(phi(0.0), dot_unchecked(&g, &d));
    }

    #[test]
    fn slope_leaves_domain() {
        let (x, d) = ([1.0], [1.0]);
        let mut phi = directional_slope(&NegLog, &x, &d);
        assert_abs_diff_eq!(phi(0.5), -2.0, epsilon = 1e-15);
        assert!(!phi(1.0).is_finite());
    }

    #[test]
    fn sls_simplex_quadratic_single_iteration() {
        let f = Shifted(vec![0.0, 0.0]);
        let (x, d) = ([1.0, 0.0], [1.0, -1.0]);
        let mut state = SlsState::default();
        let r = sls(&f, &x, &d, 1.0, &mut state);
        assert_abs_diff_eq!(r.gamma, 0.5, epsilon = 1e-10);
        assert_eq!(r.inner_iters, 1);
        assert!(!r.clipped && !r.used_fallback);
        assert_eq!(state.last_gamma, r.gamma);
    }

    #[test]
    fn sls_clips_to_upper_bound() {
        let f = Shifted(vec![-1.0]);
        let mut state = SlsState::default();
        let r = sls(&f, &[1.0], &[1.0], 1.0, &mut state);
        assert_eq!(r.gamma, 1.0);
        assert!(r.clipped);
        assert!(!r.used_fallback);
    }

    #[test]
    fn sls_clips_to_lower_bound() {
        let f = Shifted(vec![2.0, 0.0]);
        let mut state = SlsState::default();
        let r = sls(&f, &[1.0, 0.0], &[1.0, 0.0], 1.0, &mut state);
        assert_eq!(r.gamma, 0.0);
        assert!(r.clipped);
        assert_eq!(r.inner_iters, 0);
    }

    #[test]
    fn sls_handles_domain_boundary() {
        // x = 0.5, d = −1.5: segment x − γd = 0.5 + 1.5γ reaches 2 at γ = 1
        let mut state = SlsState::default();
        let r = sls(&Barrier, &[0.5], &[-1.5], 1.0, &mut state);
        assert_abs_diff_eq!(r.gamma, 1.0 / 3.0, epsilon = 1e-9);
        assert!(r.residual < r.tolerance || r.stalled);
    }

    #[test]
    fn sls_warm_start_reuses_previous_step() {
        let f = Shifted(vec![0.2, 0.8]);
        let (x, d) = ([1.0, 0.0], [1.0, -1.0]);
        let mut state = SlsState::default();
        let first = sls(&f, &x, &d, 1.0, &mut state);
        let second = sls(&f, &x, &d, 1.0, &mut state);
        assert_abs_diff_eq!(first.gamma, second.gamma, epsilon = 1e-12);
        assert!(second.inner_iters <= first.inner_iters);
        assert_eq!(second.inner_iters, 0);
    }

    #[test]
    fn sls_primal_tolerance_tightens_slope_tolerance() {
        let f = Shifted(vec![0.2, 0.8]);
        let mut state = SlsState { primal_tol: Some(1e-14), ..SlsState::default() };
        let r = sls(&f, &[1.0, 0.0], &[1.0, -1.0], 0.5, &mut state);
        assert_eq!(r.tolerance, 2e-14);
    }

    #[test]
    fn golden_section_interior_minimum() {
        // f(x − γd) = ½(γ − 0.3)² with x = −0.3, d = −1, target 0
        let f = Shifted(vec![0.0]);
        let r = golden_section(&f, &[-0.3], &[-1.0], 1.0, 1e-6);
        assert!((r.gamma - 0.3).abs() <= 1e-6);
    }

    #[test]
    fn golden_section_boundaries() {
        let f = Shifted(vec![5.0]);
        let down = golden_section(&f, &[0.0], &[-1.0], 1.0, 1e-6);
        assert!((down.gamma - 1.0).abs() <= 1e-6);
        let up = golden_section(&f, &[0.0], &[1.0], 1.0, 1e-6);
        assert!(up.gamma.abs() <= 1e-6);
    }

    #[test]
    fn golden_section_shrinks_out_of_domain() {
        // segment 0.5 + 1.5γ leaves (0, 2) at γ = 1
        let r = golden_section(&Barrier, &[0.5], &[-1.5], 1.0, 1e-8);
        assert!((r.gamma - 1.0 / 3.0).abs() <= 1e-8);
    }

    #[test]
    fn exact_step_examples() {
        assert_eq!(exact_quadratic_step(1.0, 2.0, 1.0).unwrap(), 0.5);
        assert_eq!(exact_quadratic_step(3.0, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(exact_quadratic_step(-1.0, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(exact_quadratic_step(1.0, 0.0, 1.0), Err(StepError::Curvature(0.0)));
    }
}

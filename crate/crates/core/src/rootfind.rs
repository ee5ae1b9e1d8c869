//! Scalar root finding: the secant method, Newton's method and an empirical
//! convergence-order estimator.
//!
//! The solvers here carry no bracketing safeguards. Safeguarding is the job
//! of the caller (see [`crate::linesearch`]), which knows the feasible
//! interval.

use crate::error::RootError;

/// Denominators below this magnitude are treated as a degenerate secant.
pub const DEGENERATE_DENOMINATOR: f64 = 1e-300;

/// Outcome of a scalar root solve.
#[derive(Debug, Clone, PartialEq)]
pub struct RootResult {
    pub root: f64,
    pub iterations: usize,
    /// `|φ(root)|`.
    pub residual: f64,
    pub converged: bool,
    /// Every iterate, seeds included. For the secant method this holds
    /// `iterations + 2` entries, for Newton's method `iterations + 1`.
    pub history: Vec<f64>,
}

/// One secant update from the pairs `(x_prev, φ_prev)` and `(x_cur, φ_cur)`.
///
/// The update is anchored on the pair with the smaller residual, which makes
/// the result bitwise symmetric in its two arguments.
pub fn secant_step(x_prev: f64, x_cur: f64, phi_prev: f64, phi_cur: f64) -> Result<f64, RootError> {
    let denom = phi_cur - phi_prev;
    if !(denom.abs() >= DEGENERATE_DENOMINATOR) {
        return Err(RootError::DegenerateSecant { value: phi_cur });
    }
    let prev_first = phi_prev
        .abs()
        .total_cmp(&phi_cur.abs())
        .then(x_prev.total_cmp(&x_cur))
        .is_lt();
    let (xa, fa, xb, fb) = if prev_first {
        (x_prev, phi_prev, x_cur, phi_cur)
    } else {
        (x_cur, phi_cur, x_prev, phi_prev)
    };
    Ok(xa - fa * ((xa - xb) / (fa - fb)))
}

fn validate(tol: f64, max_iter: usize) -> Result<(), RootError> {
    if !(tol > 0.0) {
        return Err(RootError::InvalidInput("tolerance must be positive"));
    }
    if max_iter < 1 {
        return Err(RootError::InvalidInput("max_iter must be at least 1"));
    }
    Ok(())
}

/// Secant iteration from seeds `x0`, `x1` until `|φ| < tol` or `max_iter`
/// updates have been taken.
///
/// A degenerate denominator or a non-finite `φ` stops the iteration with
/// `converged = false` and the last iterate where `φ` was finite.
pub fn solve_secant<F>(mut phi: F, x0: f64, x1: f64, tol: f64, max_iter: usize) -> Result<RootResult, RootError>
where
    F: FnMut(f64) -> f64,
{
    validate(tol, max_iter)?;
    if x0 == x1 {
        return Err(RootError::InvalidInput("secant seeds must differ"));
    }
    let mut history = vec![x0, x1];
    let (mut x_prev, mut f_prev) = (x0, phi(x0));
    let (mut x_cur, mut f_cur) = (x1, phi(x1));
    if !f_prev.is_finite() || !f_cur.is_finite() {
        let (root, residual) = if f_cur.is_finite() { (x1, f_cur.abs()) } else { (x0, f_prev.abs()) };
        return Ok(RootResult { root, iterations: 0, residual, converged: false, history });
    }
    if f_cur.abs() < tol || f_prev.abs() < tol {
        let (root, residual) = if f_cur.abs() <= f_prev.abs() { (x1, f_cur.abs()) } else { (x0, f_prev.abs()) };
        return Ok(RootResult { root, iterations: 0, residual, converged: true, history });
    }
    let mut iterations = 0;
    while iterations < max_iter {
        let Ok(x_next) = secant_step(x_prev, x_cur, f_prev, f_cur) else {
            break;
        };
        iterations += 1;
        history.push(x_next);
        let f_next = phi(x_next);
        if !f_next.is_finite() || !x_next.is_finite() {
            break;
        }
        (x_prev, f_prev) = (x_cur, f_cur);
        (x_cur, f_cur) = (x_next, f_next);
        if f_cur.abs() < tol {
            return Ok(RootResult {
                root: x_cur,
                iterations,
                residual: f_cur.abs(),
                converged: true,
                history,
            });
        }
    }
    Ok(RootResult {
        root: x_cur,
        iterations,
        residual: f_cur.abs(),
        converged: false,
        history,
    })
}

/// Newton iteration `x ← x − φ(x)/φ′(x)` from `x0`.
pub fn solve_newton<F, D>(mut phi: F, mut dphi: D, x0: f64, tol: f64, max_iter: usize) -> Result<RootResult, RootError>
where
    F: FnMut(f64) -> f64,
    D: FnMut(f64) -> f64,
{
    validate(tol, max_iter)?;
    let mut history = vec![x0];
    let mut x = x0;
    let mut fx = phi(x);
    let mut iterations = 0;
    if !fx.is_finite() {
        return Ok(RootResult { root: x, iterations, residual: fx.abs(), converged: false, history });
    }
    while fx.abs() >= tol && iterations < max_iter {
        let slope = dphi(x);
        if slope == 0.0 {
            return Err(RootError::DegenerateDerivative { x });
        }
        let x_next = x - fx / slope;
        iterations += 1;
        history.push(x_next);
        let f_next = phi(x_next);
        if !f_next.is_finite() || !x_next.is_finite() {
            return Ok(RootResult { root: x, iterations, residual: fx.abs(), converged: false, history });
        }
        x = x_next;
        fx = f_next;
    }
    Ok(RootResult {
        root: x,
        iterations,
        residual: fx.abs(),
        converged: fx.abs() < tol,
        history,
    })
}

/// Empirical order of convergence of a sequence approaching `root`.
///
/// Uses the three-point estimate `log(e₊/e) / log(e/e₋)` on consecutive
/// errors `eₙ = |xₙ − root|` and returns the median. Errors at or below
/// `100·ε·max(1, |root|)` are rounding noise and end the usable window.
pub fn estimate_order(history: &[f64], root: f64) -> Result<f64, RootError> {
    const NEEDED: usize = 4;
    let floor = 1e2 * f64::EPSILON * root.abs().max(1.0);
    let errors: Vec<f64> = history
        .iter()
        .map(|x| (x - root).abs())
        .take_while(|e| *e > floor && e.is_finite())
        .collect();
    if errors.len() < NEEDED {
        return Err(RootError::InsufficientHistory { usable: errors.len(), needed: NEEDED });
    }
    let mut ratios: Vec<f64> = errors
        .windows(3)
        .filter_map(|w| {
            let (older, mid, newer) = (w[0], w[1], w[2]);
            if older == mid {
                return None;
            }
            let r = (newer / mid).ln() / (mid / older).ln();
            r.is_finite().then_some(r)
        })
        .collect();
    if ratios.is_empty() {
        return Err(RootError::InsufficientHistory { usable: 0, needed: NEEDED });
    }
    ratios.sort_by(f64::total_cmp);
    let mid = ratios.len() / 2;
    Ok(if ratios.len() % 2 == 1 {
        ratios[mid]
    } else {
        0.5 * (ratios[mid - 1] + ratios[mid])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn secant_step_on_sqrt2() {
        let next = secant_step(1.0, 2.0, -1.0, 2.0).unwrap();
        assert_abs_diff_eq!(next, 4.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn secant_step_is_exact_on_affine() {
        let phi = |x: f64| 3.0 * x - 6.0;
        for (a, b) in [(0.0, 1.0), (-4.0, 10.0), (2.5, 2.75)] {
            assert_eq!(secant_step(a, b, phi(a), phi(b)).unwrap(), 2.0);
        }
    }

    #[test]
    fn secant_step_degenerate() {
        assert_eq!(
            secant_step(0.0, 1.0, 3.0, 3.0),
            Err(RootError::DegenerateSecant { value: 3.0 })
        );
    }

    proptest! {
        #[test]
        fn secant_step_symmetric(x in -1e3..1e3f64, y in -1e3..1e3f64, fx in -1e3..1e3f64, fy in -1e3..1e3f64) {
            prop_assume!((fx - fy).abs() > 1e-9);
            let a = secant_step(x, y, fx, fy).unwrap();
            let b = secant_step(y, x, fy, fx).unwrap();
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }

        #[test]
        fn affine_converges_in_one_update(slope in prop_oneof![-50.0..-0.1f64, 0.1..50.0f64], root in -10.0..10.0f64,
                                          x0 in -20.0..20.0f64, gap in 0.01..5.0f64) {
            let phi = |x: f64| slope * (x - root);
            let r = solve_secant(phi, x0, x0 + gap, 1e-9, 10).unwrap();
            prop_assert!(r.converged);
            prop_assert!(r.iterations <= 1);
            prop_assert_eq!(r.history.len(), r.iterations + 2);
        }
    }

    #[test]
    fn secant_sqrt2() {
        let r = solve_secant(|x| x * x - 2.0, 1.0, 2.0, 1e-12, 50).unwrap();
        assert!(r.converged);
        assert_abs_diff_eq!(r.root, std::f64::consts::SQRT_2, epsilon = 1e-12);
        // running the recursion by hand: 4/3, 1.4, 1.41463.., 1.414211.., 1.41421356237.., then |φ| < 1e-12
        assert_eq!(r.iterations, 6);
        assert!(r.iterations <= 10);
        assert_eq!(r.history.len(), r.iterations + 2);
    }

    #[test]
    fn secant_affine_one_iteration() {
        let r = solve_secant(|x| x - 1.0, 0.0, 2.0, 1e-12, 10).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.root, 1.0);
    }

    #[test]
    fn secant_x_exp_x() {
        let r = solve_secant(|x: f64| x * x.exp() - 7.0, 1.0, 2.0, 1e-8, 100).unwrap();
        assert!(r.converged);
        assert!(r.residual < 1e-8);
    }

    #[test]
    fn secant_reports_degenerate_as_unconverged() {
        // x³ − 2 seeded at a stationary point: φ(0) and φ(1e-5) agree to ~1e-15
        let r = solve_secant(|x: f64| x.powi(3) - 2.0, 0.0, 1e-5, 1e-8, 100).unwrap();
        assert!(!r.converged);
        assert!(r.root.is_finite());
    }

    #[test]
    fn secant_stops_on_non_finite() {
        let phi = |x: f64| if x > 3.0 { f64::NAN } else { x - 10.0 + 0.1 * x * x };
        let r = solve_secant(phi, 0.0, 1.0, 1e-10, 20).unwrap();
        assert!(!r.converged);
        assert!(r.root <= 3.0);
        assert_eq!(r.history.len(), r.iterations + 2);
    }

    #[test]
    fn secant_rejects_bad_input() {
        assert!(solve_secant(|x| x, 1.0, 1.0, 1e-8, 10).is_err());
        assert!(solve_secant(|x| x, 0.0, 1.0, 0.0, 10).is_err());
        assert!(solve_secant(|x| x, 0.0, 1.0, 1e-8, 0).is_err());
    }

    #[test]
    fn newton_first_update() {
        let r = solve_newton(|x| x * x - 2.0, |x| 2.0 * x, 2.0, 1e-12, 1).unwrap();
        assert_eq!(r.history[1], 1.5);
        let r = solve_newton(|x| x * x - 2.0, |x| 2.0 * x, 2.0, 1e-12, 50).unwrap();
        assert!(r.converged);
        assert_abs_diff_eq!(r.root, std::f64::consts::SQRT_2, epsilon = 1e-12);
        assert_eq!(r.history.len(), r.iterations + 1);
    }

    #[test]
    fn newton_affine_one_step() {
        let r = solve_newton(|x| 4.0 * x + 2.0, |_| 4.0, 7.0, 1e-12, 10).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 1);
        assert_eq!(r.root, -0.5);
    }

    #[test]
    fn newton_x_minus_cos() {
        let r = solve_newton(|x: f64| x - x.cos(), |x: f64| 1.0 + x.sin(), 1.0, 1e-8, 50).unwrap();
        assert!(r.converged);
        assert!(r.residual < 1e-8);
    }

    #[test]
    fn newton_zero_derivative() {
        let err = solve_newton(|x| x * x + 1.0, |x| 2.0 * x, 0.0, 1e-8, 10).unwrap_err();
        assert_eq!(err, RootError::DegenerateDerivative { x: 0.0 });
    }

    #[test]
    fn order_of_secant_on_cubic() {
        let root = 2f64.cbrt();
        let r = solve_secant(|x: f64| x.powi(3) - 2.0, 1.0, 1.1, 1e-15, 50).unwrap();
        let order = estimate_order(&r.history, root).unwrap();
        assert!((1.4..=1.8).contains(&order), "order {order}");
    }

    #[test]
    fn order_of_synthetic_sequences() {
        let quad: Vec<f64> = std::iter::successors(Some(0.5f64), |e| Some(e * e)).take(6).collect();
        assert_abs_diff_eq!(estimate_order(&quad, 0.0).unwrap(), 2.0, epsilon = 1e-12);
        let geo: Vec<f64> = std::iter::successors(Some(1.0f64), |e| Some(0.5 * e)).take(30).collect();
        assert_abs_diff_eq!(estimate_order(&geo, 0.0).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn order_needs_history() {
        assert!(matches!(
            estimate_order(&[1.0, 0.5, 1e-20], 0.0),
            Err(RootError::InsufficientHistory { usable: 2, .. })
        ));
    }
}

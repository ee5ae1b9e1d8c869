//! First-order objective oracles.

use crate::error::{DimensionError, OracleError};

/// A differentiable objective `f: ℝⁿ → ℝ ∪ {+∞}`.
///
/// Implementations are immutable after construction and may be shared across
/// threads. Outside the objective's domain `value` returns `+∞` and
/// `gradient_into` fills the output with `NaN`, so line searches can probe
/// near a domain boundary without special error plumbing.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient_into(&self, x: &[f64], out: &mut [f64]);

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.gradient_into(x, &mut g);
        g
    }

    /// Global smoothness constant `L`, when the generator knows it.
    fn smoothness(&self) -> Option<f64> {
        None
    }

    /// `dᵀ ∇²f(x) d` in closed form, only provided by quadratic objectives.
    fn directional_curvature(&self, _x: &[f64], _d: &[f64]) -> Option<f64> {
        None
    }

    fn is_finite_at(&self, x: &[f64]) -> bool {
        self.value(x).is_finite()
    }
}

/// Central-difference approximation of `∇f(x)` with step `h`.
pub fn finite_difference_gradient(
    oracle: &dyn Objective,
    x: &[f64],
    h: f64,
) -> Result<Vec<f64>, OracleError> {
    if !(h > 0.0) {
        return Err(OracleError::InvalidStep(h));
    }
    if x.len() != oracle.dim() {
        return Err(DimensionError::new(oracle.dim(), x.len()).into());
    }
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = oracle.value(&probe);
        probe[i] = x[i] - h;
        let down = oracle.value(&probe);
        probe[i] = x[i];
        if !up.is_finite() || !down.is_finite() {
            return Err(OracleError::Domain { coordinate: i });
        }
        grad.push((up - down) / (2.0 * h));
    }
    Ok(grad)
}

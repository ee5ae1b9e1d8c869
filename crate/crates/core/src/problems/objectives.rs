//! Hand-coded objectives of the benchmark classes.

use crate::linalg::{cholesky, dot_unchecked, DenseMatrix};
use crate::oracle::Objective;

/// `½ Σ wᵢ (xᵢ − bᵢ)²` with nonnegative weights.
///
/// Unit weights give the squared distance to `b`; 0/1 weights give a
/// masked least-squares fit as used in matrix completion.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDistance {
    pub target: Vec<f64>,
    pub weights: Vec<f64>,
}

impl WeightedDistance {
    pub fn unit(target: Vec<f64>) -> Self {
        let weights = vec![1.0; target.len()];
        Self { target, weights }
    }
}

impl Objective for WeightedDistance {
    fn dim(&self) -> usize {
        self.target.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for ((xi, bi), wi) in x.iter().zip(&self.target).zip(&self.weights) {
            let r = xi - bi;
            s += wi * r * r;
        }
        0.5 * s
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        for (((o, xi), bi), wi) in out.iter_mut().zip(x).zip(&self.target).zip(&self.weights) {
            *o = wi * (xi - bi);
        }
    }

    fn smoothness(&self) -> Option<f64> {
        Some(self.weights.iter().copied().fold(0.0, f64::max))
    }

    fn directional_curvature(&self, _x: &[f64], d: &[f64]) -> Option<f64> {
        Some(d.iter().zip(&self.weights).map(|(di, wi)| wi * di * di).sum())
    }
}

/// `½ (x − b)ᵀ Q (x − b)` with a dense symmetric positive definite `Q`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseQuadratic {
    pub q: DenseMatrix,
    pub b: Vec<f64>,
    /// Largest eigenvalue of `Q`.
    pub l: f64,
}

impl Objective for DenseQuadratic {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let r: Vec<f64> = x.iter().zip(&self.b).map(|(a, b)| a - b).collect();
        let mut qr = vec![0.0; r.len()];
        self.q.matvec(&r, &mut qr);
        0.5 * dot_unchecked(&r, &qr)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        let r: Vec<f64> = x.iter().zip(&self.b).map(|(a, b)| a - b).collect();
        self.q.matvec(&r, out);
    }

    fn smoothness(&self) -> Option<f64> {
        Some(self.l)
    }

    fn directional_curvature(&self, _x: &[f64], d: &[f64]) -> Option<f64> {
        let mut qd = vec![0.0; d.len()];
        self.q.matvec(d, &mut qd);
        Some(dot_unchecked(d, &qd))
    }
}

/// Negative log-revenue `−Σᵢ log(rᵢᵀx)` over return vectors `rᵢ` (rows).
#[derive(Debug, Clone, PartialEq)]
pub struct LogRevenue {
    pub returns: DenseMatrix,
}

impl LogRevenue {
    fn revenues(&self, x: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.returns.rows()];
        self.returns.matvec(x, &mut r);
        r
    }
}

impl Objective for LogRevenue {
    fn dim(&self) -> usize {
        self.returns.cols()
    }

    fn value(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for r in self.revenues(x) {
            if !(r > 0.0) {
                return f64::INFINITY;
            }
            s -= r.ln();
        }
        s
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        let rev = self.revenues(x);
        if rev.iter().any(|r| !(*r > 0.0)) {
            out.fill(f64::NAN);
            return;
        }
        let inv: Vec<f64> = rev.iter().map(|r| -1.0 / r).collect();
        self.returns.matvec_t(&inv, out);
    }
}

/// Optimal-design criterion on the information matrix `AᵀWA`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OedCriterion {
    /// `−log det(AᵀWA)`
    D,
    /// `tr((AᵀWA)⁻¹)`
    A,
}

/// Inverse of the information matrix `AᵀWA` through its Cholesky factor,
/// together with `log det`. `None` when the matrix is not positive definite.
fn information_inverse(w: &[f64], a: &DenseMatrix) -> Option<(DenseMatrix, f64)> {
    let (m, k) = (a.rows(), a.cols());
    let mut info = DenseMatrix::zeros(k, k);
    for i in 0..m {
        let row = a.row(i);
        let wi = w[i];
        if wi == 0.0 {
            continue;
        }
        for p in 0..k {
            let s = wi * row[p];
            for q in p..k {
                info[(p, q)] += s * row[q];
            }
        }
    }
    for p in 0..k {
        for q in 0..p {
            info[(p, q)] = info[(q, p)];
        }
    }
    let l = cholesky(&info)?;
    let log_det = 2.0 * (0..k).map(|i| l[(i, i)].ln()).sum::<f64>();
    let mut inv = DenseMatrix::zeros(k, k);
    let mut col = vec![0.0; k];
    for j in 0..k {
        col.fill(0.0);
        col[j] = 1.0;
        crate::linalg::cholesky_solve(&l, &mut col);
        for i in 0..k {
            inv[(i, j)] = col[i];
        }
    }
    Some((inv, log_det))
}

/// `f_D(w) = −log det(AᵀWA)` or `f_A(w) = tr((AᵀWA)⁻¹)`, `+∞` when the
/// information matrix is singular or indefinite.
pub fn oed_objective(w: &[f64], a: &DenseMatrix, criterion: OedCriterion) -> f64 {
    match information_inverse(w, a) {
        None => f64::INFINITY,
        Some((inv, log_det)) => match criterion {
            OedCriterion::D => -log_det,
            OedCriterion::A => inv.trace(),
        },
    }
}

/// Gradient twin of [`oed_objective`]: `−aᵢᵀM⁻¹aᵢ` (D) or `−‖M⁻¹aᵢ‖²` (A),
/// `NaN` outside the domain.
pub fn oed_gradient(w: &[f64], a: &DenseMatrix, criterion: OedCriterion, out: &mut [f64]) {
    let Some((inv, _)) = information_inverse(w, a) else {
        out.fill(f64::NAN);
        return;
    };
    let k = a.cols();
    let mut y = vec![0.0; k];
    for (i, o) in out.iter_mut().enumerate() {
        let row = a.row(i);
        inv.matvec(row, &mut y);
        *o = match criterion {
            OedCriterion::D => -dot_unchecked(row, &y),
            OedCriterion::A => -dot_unchecked(&y, &y),
        };
    }
}

/// Optimal experiment design over the probability simplex of `m` weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentDesign {
    pub a: DenseMatrix,
    pub criterion: OedCriterion,
}

impl Objective for ExperimentDesign {
    fn dim(&self) -> usize {
        self.a.rows()
    }

    fn value(&self, x: &[f64]) -> f64 {
        oed_objective(x, &self.a, self.criterion)
    }

    fn gradient_into(&self, x: &[f64], out: &mut [f64]) {
        oed_gradient(x, &self.a, self.criterion, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::finite_difference_gradient;
    use approx::assert_abs_diff_eq;

    #[test]
    fn oed_examples() {
        let a = DenseMatrix::identity(2);
        let w = [0.5, 0.5];
        assert_abs_diff_eq!(oed_objective(&w, &a, OedCriterion::D), 2.0 * 2f64.ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(oed_objective(&w, &a, OedCriterion::A), 4.0, epsilon = 1e-14);
        let mut g = [0.0; 2];
        oed_gradient(&w, &a, OedCriterion::D, &mut g);
        assert_abs_diff_eq!(g.as_slice(), [-2.0, -2.0].as_slice(), epsilon = 1e-14);
        let obj = ExperimentDesign { a, criterion: OedCriterion::D };
        let fd = finite_difference_gradient(&obj, &w, 1e-6).unwrap();
        assert_abs_diff_eq!(fd.as_slice(), g.as_slice(), epsilon = 1e-7);
    }

    #[test]
    fn oed_singular_is_infinite() {
        let a = DenseMatrix::identity(2);
        assert_eq!(oed_objective(&[1.0, 0.0], &a, OedCriterion::D), f64::INFINITY);
        assert_eq!(oed_objective(&[1.0, 0.0], &a, OedCriterion::A), f64::INFINITY);
        let mut g = [0.0; 2];
        oed_gradient(&[1.0, 0.0], &a, OedCriterion::A, &mut g);
        assert!(g.iter().all(|v| v.is_nan()));
    }

    #[test]
    fn log_revenue_domain() {
        let obj = LogRevenue { returns: DenseMatrix::from_rows(&[&[1.0, -1.0], &[0.5, 0.5]]).unwrap() };
        assert!(obj.value(&[0.5, 0.5]).is_infinite());
        assert_abs_diff_eq!(obj.value(&[1.0, 0.0]), -(0.5f64).ln(), epsilon = 1e-15);
        let g = obj.gradient(&[1.0, 0.0]);
        assert_abs_diff_eq!(g.as_slice(), [-2.0, 0.0].as_slice(), epsilon = 1e-15);
    }

    #[test]
    fn weighted_distance_masks() {
        let obj = WeightedDistance { target: vec![1.0, 2.0], weights: vec![1.0, 0.0] };
        assert_eq!(obj.value(&[0.0, 0.0]), 0.5);
        assert_eq!(obj.gradient(&[0.0, 0.0]), vec![-1.0, 0.0]);
        assert_eq!(obj.directional_curvature(&[0.0, 0.0], &[2.0, 3.0]), Some(4.0));
    }
}

//! Independent reference solvers for the optimal values of the quadratic
//! classes. None of them uses a linear minimization oracle or a line
//! search, so they can certify the Frank-Wolfe solvers.

use crate::linalg::{cholesky, cholesky_solve, dot_unchecked, DenseMatrix};

/// Euclidean projection onto the probability simplex (sort-and-threshold).
pub fn project_simplex(b: &[f64]) -> Vec<f64> {
    let mut sorted = b.to_vec();
    sorted.sort_by(|a, c| c.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cumsum += s;
        let candidate = (cumsum - 1.0) / (k as f64 + 1.0);
        if s - candidate > 0.0 {
            theta = candidate;
        }
    }
    b.iter().map(|&v| (v - theta).max(0.0)).collect()
}

/// Minimizer of `½(x − b)ᵀQ(x − b)` over the probability simplex.
///
/// Accelerated projected gradient with adaptive restart locates the
/// support; a primal active-set loop on the KKT system then solves the
/// problem to rounding accuracy.
pub fn simplex_qp(q: &DenseMatrix, b: &[f64], l: f64, max_iters: usize) -> Vec<f64> {
    let n = b.len();
    let grad = |x: &[f64], out: &mut [f64]| {
        let r: Vec<f64> = x.iter().zip(b).map(|(a, c)| a - c).collect();
        q.matvec(&r, out);
    };
    let mut x = vec![1.0 / n as f64; n];
    let mut y = x.clone();
    let mut theta = 1.0f64;
    let mut g = vec![0.0; n];
    for _ in 0..max_iters {
        grad(&y, &mut g);
        let step: Vec<f64> = y.iter().zip(&g).map(|(yi, gi)| yi - gi / l).collect();
        let x_new = project_simplex(&step);
        let theta_new = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        let momentum = (theta - 1.0) / theta_new;
        // restart when the momentum direction opposes the gradient step
        let restart: f64 = y.iter().zip(&x_new).zip(&x).map(|((yi, xn), xo)| (yi - xn) * (xn - xo)).sum();
        let moved: f64 = x_new.iter().zip(&x).map(|(a, c)| (a - c).abs()).sum();
        if restart > 0.0 {
            theta = 1.0;
            y.clone_from(&x_new);
        } else {
            theta = theta_new;
            for ((yi, xn), xo) in y.iter_mut().zip(&x_new).zip(&x) {
                *yi = xn + momentum * (xn - xo);
            }
        }
        x = x_new;
        if moved < 1e-15 {
            break;
        }
    }
    polish_simplex_qp(q, b, &x).unwrap_or(x)
}

/// Solves the KKT system of the simplex QP on a support, adding and
/// removing coordinates until primal and dual feasibility hold.
fn polish_simplex_qp(q: &DenseMatrix, b: &[f64], start: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut qb = vec![0.0; n];
    q.matvec(b, &mut qb);
    let mut support: Vec<usize> = (0..n).filter(|&i| start[i] > 1e-12).collect();
    if support.is_empty() {
        support.push(0);
    }
    for _ in 0..4 * n {
        let s = support.len();
        let mut q_ss = DenseMatrix::zeros(s, s);
        for (p, &i) in support.iter().enumerate() {
            for (r, &j) in support.iter().enumerate() {
                q_ss[(p, r)] = q[(i, j)];
            }
        }
        let chol = cholesky(&q_ss)?;
        let mut u = vec![1.0; s];
        cholesky_solve(&chol, &mut u);
        let mut w: Vec<f64> = support.iter().map(|&i| qb[i]).collect();
        cholesky_solve(&chol, &mut w);
        let tau = (1.0 - w.iter().sum::<f64>()) / u.iter().sum::<f64>();
        let xs: Vec<f64> = w.iter().zip(&u).map(|(wi, ui)| wi + tau * ui).collect();

        if let Some((p, _)) = xs.iter().enumerate().filter(|(_, v)| **v < 0.0).min_by(|a, c| a.1.total_cmp(c.1)) {
            support.remove(p);
            continue;
        }
        let mut x = vec![0.0; n];
        for (p, &i) in support.iter().enumerate() {
            x[i] = xs[p];
        }
        let r: Vec<f64> = x.iter().zip(b).map(|(a, c)| a - c).collect();
        let mut g = vec![0.0; n];
        q.matvec(&r, &mut g);
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        let violator = (0..n)
            .filter(|i| !support.contains(i))
            .map(|i| (i, g[i] - tau))
            .filter(|(_, slack)| *slack < -1e-13 * scale)
            .min_by(|a, c| a.1.total_cmp(&c.1));
        match violator {
            Some((i, _)) => {
                support.push(i);
                support.sort_unstable();
            }
            None => return Some(x),
        }
    }
    None
}

/// Euclidean projection onto the affine set of matrices with unit row and
/// column sums.
fn project_unit_margins(x: &mut [f64], n: usize) {
    let nf = n as f64;
    let row: Vec<f64> = (0..n).map(|i| x[i * n..(i + 1) * n].iter().sum::<f64>() - 1.0).collect();
    let col: Vec<f64> = (0..n).map(|j| (0..n).map(|i| x[i * n + j]).sum::<f64>() - 1.0).collect();
    let s: f64 = row.iter().sum();
    for i in 0..n {
        for j in 0..n {
            x[i * n + j] += -(row[i] + col[j]) / nf + s / (nf * nf);
        }
    }
}

/// Euclidean projection of a row-major `n × n` matrix onto the Birkhoff
/// polytope by Dykstra's alternating projections between the unit-margin
/// affine set and the nonnegative orthant.
pub fn project_birkhoff(m: &[f64], n: usize, tol: f64, max_iters: usize) -> Vec<f64> {
    let len = n * n;
    let mut x = m.to_vec();
    let mut p = vec![0.0; len];
    let mut q = vec![0.0; len];
    let mut y = vec![0.0; len];
    for _ in 0..max_iters {
        for k in 0..len {
            y[k] = x[k] + p[k];
        }
        project_unit_margins(&mut y, n);
        for k in 0..len {
            p[k] += x[k] - y[k];
        }
        let mut change: f64 = 0.0;
        for k in 0..len {
            let z = (y[k] + q[k]).max(0.0);
            q[k] += y[k] - z;
            change = change.max((z - x[k]).abs());
            x[k] = z;
        }
        if change < tol {
            break;
        }
    }
    x
}

/// `½‖x − b‖²`
pub fn half_dist_sq(x: &[f64], b: &[f64]) -> f64 {
    let r: Vec<f64> = x.iter().zip(b).map(|(a, c)| a - c).collect();
    0.5 * dot_unchecked(&r, &r)
}

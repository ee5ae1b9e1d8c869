//! Dense vectors and matrices in 64-bit floating point.
//!
//! Vectors are plain `Vec<f64>` / `&[f64]`. Matrices are stored row-major in a
//! flat buffer so that matrix-valued feasible sets can be driven by the same
//! solver loops as vector ones.

use crate::error::DimensionError;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, DimensionError> {
        if data.len() != rows * cols {
            return Err(DimensionError::new(rows * cols, data.len()));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self, DimensionError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(DimensionError::new(c, row.len()));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { rows: r, cols: c, data })
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `(A + Aᵀ) / 2` for a square matrix.
    pub fn symmetrized(&self) -> Self {
        debug_assert!(self.is_square());
        let n = self.rows;
        let mut s = Self::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                s[(i, j)] = 0.5 * (self[(i, j)] + self[(j, i)]);
            }
        }
        s
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(out.len(), self.rows);
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot_unchecked(self.row(i), x);
        }
    }

    /// `out = Aᵀ x`.
    pub fn matvec_t(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.rows);
        debug_assert_eq!(out.len(), self.cols);
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &xi) in x.iter().enumerate() {
            if xi != 0.0 {
                axpy(xi, self.row(i), out);
            }
        }
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix, DimensionError> {
        if self.cols != other.rows {
            return Err(DimensionError::new(self.cols, other.rows));
        }
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                axpy(a, other.row(k), dst);
            }
        }
        Ok(out)
    }

    /// Frobenius inner product `Σ Aᵢⱼ Bᵢⱼ`.
    pub fn frobenius_dot(&self, other: &DenseMatrix) -> Result<f64, DimensionError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(DimensionError::new(self.data.len(), other.data.len()));
        }
        Ok(dot_unchecked(&self.data, &other.data))
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Inner product `Σ aᵢ bᵢ`.
pub fn dot(a: &[f64], b: &[f64]) -> Result<f64, DimensionError> {
    if a.len() != b.len() {
        return Err(DimensionError::new(a.len(), b.len()));
    }
    Ok(dot_unchecked(a, b))
}

/// Inner product without the length check. Panics in debug builds on mismatch.
#[inline]
pub fn dot_unchecked(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // four accumulators let the compiler vectorize without reassociating a single sum
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot_unchecked(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

/// `y += alpha * x`.
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `out = x - gamma * d`.
#[inline]
pub fn step_point(x: &[f64], d: &[f64], gamma: f64, out: &mut [f64]) {
    debug_assert_eq!(x.len(), d.len());
    for ((o, xi), di) in out.iter_mut().zip(x).zip(d) {
        *o = xi - gamma * di;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|v| v.is_finite())
}

/// Lower-triangular Cholesky factor of a symmetric positive definite matrix.
///
/// Returns `None` when a non-positive (or non-finite) pivot appears.
pub fn cholesky(a: &DenseMatrix) -> Option<DenseMatrix> {
    let n = a.rows();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut diag = a[(j, j)];
        for k in 0..j {
            diag -= l[(j, k)] * l[(j, k)];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return None;
        }
        let ljj = diag.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Some(l)
}

/// Solves `L Lᵀ x = b` in place given the Cholesky factor `L`.
pub fn cholesky_solve(l: &DenseMatrix, b: &mut [f64]) {
    let n = l.rows();
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[(k, i)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
}

/// Orthonormalizes the columns of a square matrix with modified Gram-Schmidt
/// (the `Q` of a thin QR factorization).
pub fn orthonormal_columns(a: &DenseMatrix) -> DenseMatrix {
    let (m, n) = (a.rows(), a.cols());
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..m).map(|i| a[(i, j)]).collect()).collect();
    for j in 0..n {
        for k in 0..j {
            let (head, tail) = cols.split_at_mut(j);
            let r = dot_unchecked(&head[k], &tail[0]);
            axpy(-r, &head[k], &mut tail[0]);
        }
        let nrm = norm(&cols[j]);
        cols[j].iter_mut().for_each(|v| *v /= nrm);
    }
    let mut q = DenseMatrix::zeros(m, n);
    for (j, c) in cols.iter().enumerate() {
        for i in 0..m {
            q[(i, j)] = c[i];
        }
    }
    q
}

fn to_nalgebra(a: &DenseMatrix) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice())
}

/// Full eigendecomposition of the symmetric part of `a`.
///
/// Returns eigenvalues in ascending order and the matching unit eigenvectors
/// as the columns of the returned matrix.
pub fn symmetric_eigen(a: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let n = a.rows();
    let eig = nalgebra::SymmetricEigen::new(to_nalgebra(&a.symmetrized()));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DenseMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vecs[(k, dst)] = eig.eigenvectors[(k, src)];
        }
    }
    (values, vecs)
}

/// Singular values of `a` in descending order together with the leading
/// left and right singular vectors, from the eigendecomposition of `aᵀa`.
///
/// Singular values below about `√(nε)·σ₁` cannot be resolved through the
/// Gram matrix and are reported as zero. `None` when `a` is empty; a zero
/// matrix gets `e₁` for both vectors.
pub fn top_singular_dense(a: &DenseMatrix) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let (m, n) = (a.rows(), a.cols());
    if n == 0 || m == 0 {
        return None;
    }
    let gram = a.transpose().matmul(a).ok()?;
    let (vals, vecs) = symmetric_eigen(&gram);
    // eigenvalues of aᵀa below this are rounding noise of the Gram product
    let floor = 4.0 * n as f64 * f64::EPSILON * vals[n - 1].max(0.0);
    let values: Vec<f64> = vals
        .iter()
        .rev()
        .take(m.min(n))
        .map(|&v| if v > floor { v.sqrt() } else { 0.0 })
        .collect();
    let mut v: Vec<f64> = (0..n).map(|i| vecs[(i, n - 1)]).collect();
    let mut u = vec![0.0; m];
    a.matvec(&v, &mut u);
    let sigma = norm(&u);
    if sigma > 0.0 && sigma.is_finite() {
        u.iter_mut().for_each(|x| *x /= sigma);
    } else {
        u.fill(0.0);
        u[0] = 1.0;
        v.fill(0.0);
        v[0] = 1.0;
    }
    let mut values = values;
    // ‖a v‖ is the more accurate top value once v is known
    values[0] = sigma;
    Some((values, u, v))
}

//! Linear minimization oracles `v ∈ argmin_{v ∈ X} ⟨g, v⟩`.
//!
//! Matrix-valued feasible sets take and return row-major flattened
//! matrices, so solvers see every oracle as a map between flat vectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{DimensionError, LmoError};
use crate::linalg::{dot_unchecked, norm, symmetric_eigen, top_singular_dense, DenseMatrix};

/// An oracle over a compact convex set.
pub trait LinearMinimizationOracle: Send + Sync {
    fn dim(&self) -> usize;

    /// Writes an extreme point minimizing `⟨g, ·⟩` into `out`.
    fn minimize_into(&self, g: &[f64], out: &mut [f64]) -> Result<(), LmoError>;

    fn minimize(&self, g: &[f64]) -> Result<Vec<f64>, LmoError> {
        let mut v = vec![0.0; self.dim()];
        self.minimize_into(g, &mut v)?;
        Ok(v)
    }
}

fn check(g: &[f64], dim: usize) -> Result<(), LmoError> {
    if g.len() != dim {
        return Err(DimensionError::new(dim, g.len()).into());
    }
    if !g.iter().all(|v| v.is_finite()) {
        return Err(LmoError::NonFinite);
    }
    Ok(())
}

/// Index of the smallest entry, lowest index on ties.
fn argmin(g: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in g.iter().enumerate().skip(1) {
        if v < g[best] {
            best = i;
        }
    }
    best
}

/// Vertex `e_i` of the probability simplex with `i = argmin gᵢ`.
pub fn lmo_simplex(g: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; g.len()];
    if !g.is_empty() {
        v[argmin(g)] = 1.0;
    }
    v
}

/// Probability simplex `{x ≥ 0, Σ xᵢ = 1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplexLmo {
    pub n: usize,
}

impl LinearMinimizationOracle for SimplexLmo {
    fn dim(&self) -> usize {
        self.n
    }

    fn minimize_into(&self, g: &[f64], out: &mut [f64]) -> Result<(), LmoError> {
        check(g, self.n)?;
        out.fill(0.0);
        out[argmin(g)] = 1.0;
        Ok(())
    }
}

/// Minimum-cost perfect assignment on a square cost matrix.
///
/// Returns `assignment[row] = col` and the total cost. Shortest augmenting
/// paths with dual potentials, `O(n³)`.
pub fn hungarian(cost: &DenseMatrix) -> Result<(Vec<usize>, f64), LmoError> {
    if !cost.is_square() {
        return Err(DimensionError::new(cost.rows(), cost.cols()).into());
    }
    if !cost.as_slice().iter().all(|v| v.is_finite()) {
        return Err(LmoError::NonFinite);
    }
    let n = cost.rows();
    // 1-based arrays; index 0 is the virtual root column
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut col_owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        col_owner[0] = row;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost[(i0 - 1, j - 1)] - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_owner[j0] = col_owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        if col_owner[j] > 0 {
            assignment[col_owner[j] - 1] = j - 1;
        }
    }
    let total = assignment.iter().enumerate().map(|(i, &j)| cost[(i, j)]).sum();
    Ok((assignment, total))
}

/// Permutation matrix minimizing `⟨G, P⟩`.
pub fn lmo_birkhoff(g: &DenseMatrix) -> Result<DenseMatrix, LmoError> {
    let (assignment, _) = hungarian(g)?;
    let n = g.rows();
    let mut p = DenseMatrix::zeros(n, n);
    for (i, j) in assignment.into_iter().enumerate() {
        p[(i, j)] = 1.0;
    }
    Ok(p)
}

/// Birkhoff polytope of `n × n` doubly stochastic matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BirkhoffLmo {
    pub n: usize,
}

impl LinearMinimizationOracle for BirkhoffLmo {
    fn dim(&self) -> usize {
        self.n * self.n
    }

    fn minimize_into(&self, g: &[f64], out: &mut [f64]) -> Result<(), LmoError> {
        check(g, self.dim())?;
        let cost = DenseMatrix::from_row_major(self.n, self.n, g.to_vec())?;
        let (assignment, _) = hungarian(&cost)?;
        out.fill(0.0);
        for (i, j) in assignment.into_iter().enumerate() {
            out[i * self.n + j] = 1.0;
        }
        Ok(())
    }
}

/// Settings of the power iterations behind the spectral oracles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerIteration {
    /// Residual tolerance relative to the spectral scale of the matrix.
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    /// Retry with a dense eigensolver when the iteration cap is hit.
    pub dense_fallback: bool,
    /// Matrices with at most this many columns skip the iteration and go
    /// straight to the dense eigensolver. A residual test cannot tell the
    /// two ends of a tight eigenvalue cluster apart, and such clusters are
    /// the rule near low-rank optima.
    pub dense_below: usize,
}

impl Default for PowerIteration {
    fn default() -> Self {
        Self { tol: 1e-9, max_iters: 1000, seed: 0x5eed, dense_fallback: true, dense_below: 128 }
    }
}

impl PowerIteration {
    /// Pseudo-random unit vector seeded by `self.seed` and the matrix
    /// entries. Mixing in the matrix keeps the start vector from being
    /// systematically orthogonal to the eigenvectors a solver converges to.
    fn start_vector(&self, n: usize, matrix: &[f64]) -> Vec<f64> {
        let mut h = self.seed ^ 0xcbf2_9ce4_8422_2325;
        for v in matrix {
            h = (h ^ v.to_bits()).wrapping_mul(0x0100_0000_01b3);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(h);
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);
        v
    }
}

/// Unit eigenvector of the smallest eigenvalue of symmetric `a`, with the
/// eigenvalue.
///
/// Power iteration on `σI − a` where `σ` exceeds the Gershgorin upper bound.
pub fn smallest_eigenpair(a: &DenseMatrix, opts: &PowerIteration) -> Result<(f64, Vec<f64>), LmoError> {
    if !a.is_square() {
        return Err(DimensionError::new(a.rows(), a.cols()).into());
    }
    let n = a.rows();
    if n <= opts.dense_below {
        return Ok(dense_smallest(a));
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let radius: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)].abs()).sum();
        lo = lo.min(a[(i, i)] - radius);
        hi = hi.max(a[(i, i)] + radius);
    }
    let mut v = opts.start_vector(n, a.as_slice());
    let spread = hi - lo;
    if spread == 0.0 {
        // a = cI: every unit vector is an eigenvector
        return Ok((hi, v));
    }
    let sigma = hi + 0.01 * spread;
    let scale = hi.abs().max(lo.abs());
    let mut av = vec![0.0; n];
    for _ in 0..opts.max_iters {
        a.matvec(&v, &mut av);
        let lambda = dot_unchecked(&v, &av);
        let residual = av.iter().zip(&v).map(|(x, y)| (x - lambda * y).powi(2)).sum::<f64>().sqrt();
        if residual <= opts.tol * scale {
            return Ok((lambda, v));
        }
        for (w, x) in av.iter_mut().zip(&v) {
            *w = sigma * x - *w;
        }
        let nw = norm(&av);
        if !(nw > 0.0 && nw.is_finite()) {
            break;
        }
        for (x, w) in v.iter_mut().zip(&av) {
            *x = w / nw;
        }
    }
    if opts.dense_fallback {
        log::debug!("power iteration hit its cap on a {n}x{n} matrix; using the dense eigensolver");
        return Ok(dense_smallest(a));
    }
    Err(LmoError::NoConvergence(opts.max_iters))
}

fn dense_smallest(a: &DenseMatrix) -> (f64, Vec<f64>) {
    let (vals, vecs) = symmetric_eigen(a);
    let u = (0..a.rows()).map(|i| vecs[(i, 0)]).collect();
    (vals[0], u)
}

/// Top singular triple `(σ, u, v)` of `g` via power iteration on `gᵀg`.
pub fn top_singular_triple(g: &DenseMatrix, opts: &PowerIteration) -> Result<(f64, Vec<f64>, Vec<f64>), LmoError> {
    let (m, n) = (g.rows(), g.cols());
    let mut v = opts.start_vector(n, g.as_slice());
    let mut u = vec![0.0; m];
    let mut w = vec![0.0; n];
    let fro = norm(g.as_slice());
    if fro == 0.0 {
        let mut e_u = vec![0.0; m];
        let mut e_v = vec![0.0; n];
        e_u[0] = 1.0;
        e_v[0] = 1.0;
        return Ok((0.0, e_u, e_v));
    }
    if n <= opts.dense_below {
        if let Some(triple) = dense_top_singular(g) {
            return Ok(triple);
        }
    }
    for _ in 0..opts.max_iters {
        g.matvec(&v, &mut u);
        let sigma = norm(&u);
        if sigma == 0.0 {
            // start vector in the null space; perturb deterministically
            v.iter_mut().enumerate().for_each(|(i, x)| *x += 1.0 / (i + 1) as f64);
            let nv = norm(&v);
            v.iter_mut().for_each(|x| *x /= nv);
            continue;
        }
        u.iter_mut().for_each(|x| *x /= sigma);
        g.matvec_t(&u, &mut w);
        let residual = w.iter().zip(&v).map(|(a, b)| (a - sigma * b).powi(2)).sum::<f64>().sqrt();
        if residual <= opts.tol * fro {
            return Ok((sigma, u, v));
        }
        let nw = norm(&w);
        for (x, y) in v.iter_mut().zip(&w) {
            *x = y / nw;
        }
    }
    if opts.dense_fallback {
        log::debug!("singular power iteration hit its cap on a {m}x{n} matrix; using the dense eigensolver");
        if let Some(triple) = dense_top_singular(g) {
            return Ok(triple);
        }
    }
    Err(LmoError::NoConvergence(opts.max_iters))
}

fn dense_top_singular(g: &DenseMatrix) -> Option<(f64, Vec<f64>, Vec<f64>)> {
    let (vals, u, v) = top_singular_dense(g)?;
    Some((vals[0], u, v))
}

/// `u uᵀ` for a unit eigenvector `u` of the smallest eigenvalue of
/// `(G + Gᵀ)/2`.
pub fn lmo_spectraplex(g: &DenseMatrix) -> Result<DenseMatrix, LmoError> {
    if !g.is_square() {
        return Err(DimensionError::new(g.rows(), g.cols()).into());
    }
    let mut out = DenseMatrix::zeros(g.rows(), g.rows());
    SpectraplexLmo::new(g.rows()).minimize_into(g.as_slice(), out.as_mut_slice())?;
    Ok(out)
}

/// Spectraplex `{X ⪰ 0, tr X = trace}` of symmetric `n × n` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectraplexLmo {
    pub n: usize,
    pub trace: f64,
    pub power: PowerIteration,
}

impl SpectraplexLmo {
    pub fn new(n: usize) -> Self {
        Self { n, trace: 1.0, power: PowerIteration::default() }
    }

    pub fn with_trace(n: usize, trace: f64) -> Self {
        Self { trace, ..Self::new(n) }
    }
}

impl LinearMinimizationOracle for SpectraplexLmo {
    fn dim(&self) -> usize {
        self.n * self.n
    }

    fn minimize_into(&self, g: &[f64], out: &mut [f64]) -> Result<(), LmoError> {
        check(g, self.dim())?;
        let sym = DenseMatrix::from_row_major(self.n, self.n, g.to_vec())?.symmetrized();
        let (_, u) = smallest_eigenpair(&sym, &self.power)?;
        for i in 0..self.n {
            for j in 0..self.n {
                out[i * self.n + j] = self.trace * u[i] * u[j];
            }
        }
        Ok(())
    }
}

/// `−radius·u₁v₁ᵀ` for the top singular pair of `G`.
pub fn lmo_nuclear(g: &DenseMatrix, radius: f64) -> Result<DenseMatrix, LmoError> {
    let mut out = DenseMatrix::zeros(g.rows(), g.cols());
    NuclearLmo::new(g.rows(), g.cols(), radius).minimize_into(g.as_slice(), out.as_mut_slice())?;
    Ok(out)
}

/// Nuclear-norm ball `{X : ‖X‖_* ≤ radius}` of `rows × cols` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct NuclearLmo {
    pub rows: usize,
    pub cols: usize,
    pub radius: f64,
    pub power: PowerIteration,
}

impl NuclearLmo {
    pub fn new(rows: usize, cols: usize, radius: f64) -> Self {
        Self { rows, cols, radius, power: PowerIteration::default() }
    }
}

impl LinearMinimizationOracle for NuclearLmo {
    fn dim(&self) -> usize {
        self.rows * self.cols
    }

    fn minimize_into(&self, g: &[f64], out: &mut [f64]) -> Result<(), LmoError> {
        check(g, self.dim())?;
        let gm = DenseMatrix::from_row_major(self.rows, self.cols, g.to_vec())?;
        let (_, u, v) = top_singular_triple(&gm, &self.power)?;
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[i * self.cols + j] = -self.radius * u[i] * v[j];
            }
        }
        Ok(())
    }
}

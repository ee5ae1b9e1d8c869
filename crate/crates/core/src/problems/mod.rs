//! Seeded generators for the eight benchmark problem classes.
//!
//! | class      | feasible set              | objective                                   |
//! |------------|---------------------------|---------------------------------------------|
//! | `QuadProb` | simplex, `n`              | `½‖x − b‖²`, `b ~ U[0,2]ⁿ`                   |
//! | `Ill`      | simplex, `n`              | `½(x − b)ᵀQ(x − b)`, `κ(Q) = 10⁶`            |
//! | `Birkhoff` | Birkhoff polytope, `n×n`  | `½‖X − M‖²_F`                               |
//! | `Spec`     | spectraplex, `n×n`        | masked least squares, symmetric rank-3 data |
//! | `Nuclear`  | nuclear-norm ball, `n×n`  | masked least squares, rank-3 data           |
//! | `OD`       | simplex, `n`              | `−log det(AᵀWA)`                            |
//! | `OA`       | simplex, `n`              | `tr((AᵀWA)⁻¹)`                              |
//! | `Port`     | simplex, `n`              | `−Σᵢ log(rᵢᵀx)`, `2n` return vectors        |
//!
//! Every instance is a pure function of `(class, size, seed)`.

mod objectives;
pub mod reference;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{ProblemError, SolveError};
use crate::fw::{run_bpcg_from, run_fw, ActiveSet, SolveConfig, SolveReport};
use crate::linalg::{orthonormal_columns, top_singular_dense, DenseMatrix};
use crate::lmo::{
    top_singular_triple, BirkhoffLmo, LinearMinimizationOracle, NuclearLmo, PowerIteration, SimplexLmo, SpectraplexLmo,
};
use crate::oracle::Objective;

pub use objectives::{
    oed_gradient, oed_objective, DenseQuadratic, ExperimentDesign, LogRevenue, OedCriterion, WeightedDistance,
};

/// Condition number of the `Ill` Hessian.
pub const ILL_CONDITION: f64 = 1e6;
/// Fraction of observed entries in the matrix-completion classes.
pub const OBSERVED_FRACTION: f64 = 0.3;
/// Rank of the matrix-completion ground truth.
pub const COMPLETION_RANK: usize = 3;
/// Standard deviation of the noise added to the Birkhoff target.
pub const BIRKHOFF_NOISE: f64 = 0.1;
/// Trace of the `Spec` ground-truth matrix; the feasible set has trace 1.
pub const SPEC_TARGET_TRACE: f64 = 4.0;
/// Ratio between the strengths of consecutive factors of the `Spec`
/// ground truth. Equal strengths put a repeated eigenvalue at the optimum,
/// where Frank-Wolfe over the spectraplex slows to a sublinear crawl.
pub const SPEC_FACTOR_DECAY: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProblemClass {
    QuadProb,
    Ill,
    Birkhoff,
    Nuclear,
    Spec,
    OD,
    OA,
    Port,
}

impl ProblemClass {
    pub const ALL: [ProblemClass; 8] = [
        ProblemClass::QuadProb,
        ProblemClass::Ill,
        ProblemClass::Birkhoff,
        ProblemClass::Nuclear,
        ProblemClass::Spec,
        ProblemClass::OD,
        ProblemClass::OA,
        ProblemClass::Port,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ProblemClass::QuadProb => "QuadProb",
            ProblemClass::Ill => "Ill",
            ProblemClass::Birkhoff => "Birkhoff",
            ProblemClass::Nuclear => "Nuclear",
            ProblemClass::Spec => "Spec",
            ProblemClass::OD => "OD",
            ProblemClass::OA => "OA",
            ProblemClass::Port => "Port",
        }
    }

    /// Supported `size` range. Matrix classes use `size` as the side length.
    pub fn size_range(self) -> (usize, usize) {
        match self {
            ProblemClass::QuadProb | ProblemClass::Port => (1, 10_000),
            ProblemClass::Ill => (2, 2_000),
            ProblemClass::OD | ProblemClass::OA => (2, 5_000),
            ProblemClass::Birkhoff | ProblemClass::Spec | ProblemClass::Nuclear => (2, 100),
        }
    }

    pub fn is_matrix(self) -> bool {
        matches!(self, ProblemClass::Birkhoff | ProblemClass::Spec | ProblemClass::Nuclear)
    }

    fn salt(self) -> u64 {
        match self {
            ProblemClass::QuadProb => 0x51,
            ProblemClass::Ill => 0x52,
            ProblemClass::Birkhoff => 0x53,
            ProblemClass::Nuclear => 0x54,
            ProblemClass::Spec => 0x55,
            ProblemClass::OD => 0x56,
            ProblemClass::OA => 0x57,
            ProblemClass::Port => 0x58,
        }
    }
}

impl fmt::Display for ProblemClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ProblemClass {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProblemClass::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| ProblemError::UnknownClass(s.to_string()))
    }
}

/// Which solver loop to run on an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Solver {
    Fw,
    Bpcg,
}

impl Solver {
    pub fn as_str(self) -> &'static str {
        match self {
            Solver::Fw => "fw",
            Solver::Bpcg => "bpcg",
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Solver {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "fw" | "vanilla" => Ok(Solver::Fw),
            "bpcg" => Ok(Solver::Bpcg),
            other => Err(format!("unknown solver `{other}`")),
        }
    }
}

/// A generated instance with its oracles and reference data.
pub struct ProblemInstance {
    pub class: ProblemClass,
    pub size: usize,
    pub seed: u64,
    pub oracle: Box<dyn Objective>,
    pub lmo: Box<dyn LinearMinimizationOracle>,
    pub known_l: Option<f64>,
    /// Reference optimal value from an independent solver.
    pub known_opt: Option<f64>,
    /// Frank-Wolfe gap of the reference solution, bounding how far
    /// `known_opt` can be above the true optimum.
    pub known_opt_gap: Option<f64>,
    /// Starting point; the combination of `start_atoms`.
    pub x0: Vec<f64>,
    /// Atoms and weights of the starting active set.
    pub start_atoms: Vec<Vec<f64>>,
    pub start_weights: Vec<f64>,
    /// `(rows, cols)` for matrix classes, `(n, 1)` otherwise.
    pub shape: (usize, usize),
}

impl fmt::Debug for ProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemInstance")
            .field("class", &self.class)
            .field("size", &self.size)
            .field("seed", &self.seed)
            .field("shape", &self.shape)
            .field("known_l", &self.known_l)
            .field("known_opt", &self.known_opt)
            .finish_non_exhaustive()
    }
}

impl ProblemInstance {
    pub fn dim(&self) -> usize {
        self.oracle.dim()
    }

    pub fn initial_active_set(&self) -> ActiveSet {
        ActiveSet::from_weighted(self.start_atoms.clone(), self.start_weights.clone())
            .expect("generator produces a valid start set")
    }

    pub fn solve(&self, solver: Solver, cfg: &SolveConfig) -> Result<SolveReport, SolveError> {
        match solver {
            Solver::Fw => run_fw(self.oracle.as_ref(), self.lmo.as_ref(), &self.x0, cfg),
            Solver::Bpcg => run_bpcg_from(self.oracle.as_ref(), self.lmo.as_ref(), self.initial_active_set(), cfg),
        }
    }

    /// Self-describing text header; [`ProblemInstance::from_dump`]
    /// regenerates the instance from it.
    pub fn dump(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |x| format!("{x:.17e}"));
        format!(
            "class = {}\nsize = {}\nseed = {}\ndim = {}\nshape = {}x{}\nknown_l = {}\nknown_opt = {}\n",
            self.class,
            self.size,
            self.seed,
            self.dim(),
            self.shape.0,
            self.shape.1,
            opt(self.known_l),
            opt(self.known_opt)
        )
    }

    pub fn from_dump(text: &str) -> Result<Self, ProblemError> {
        let mut class = None;
        let mut size = None;
        let mut seed = None;
        for line in text.lines() {
            let Some((key, value)) = line.split_once('=') else { continue };
            let value = value.trim();
            match key.trim() {
                "class" => class = Some(value.parse::<ProblemClass>()?),
                "size" => size = value.parse::<usize>().ok(),
                "seed" => seed = value.parse::<u64>().ok(),
                _ => {}
            }
        }
        match (class, size, seed) {
            (Some(c), Some(n), Some(s)) => generate_instance(c, n, s),
            _ => Err(ProblemError::UnknownClass(format!("incomplete dump: {text:?}"))),
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    let data = (0..rows * cols).map(|_| gaussian(rng)).collect();
    DenseMatrix::from_row_major(rows, cols, data).expect("sizes agree")
}

/// Extreme point returned by the oracle for a seeded Gaussian gradient.
fn seeded_vertex(lmo: &dyn LinearMinimizationOracle, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let g: Vec<f64> = (0..lmo.dim()).map(|_| gaussian(rng)).collect();
    lmo.minimize(&g).expect("finite gradient")
}

fn simplex_vertex(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

/// Generates the instance of `class` with the given size and seed.
pub fn generate_instance(class: ProblemClass, size: usize, seed: u64) -> Result<ProblemInstance, ProblemError> {
    let (min, max) = class.size_range();
    if size < min || size > max {
        return Err(ProblemError::UnsupportedSize { class: class.as_str(), size, min, max });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ class.salt());
    let inst = match class {
        ProblemClass::QuadProb => quad_prob(size, &mut rng),
        ProblemClass::Ill => ill(size, &mut rng),
        ProblemClass::Birkhoff => birkhoff(size, &mut rng),
        ProblemClass::Spec => spec(size, &mut rng),
        ProblemClass::Nuclear => nuclear(size, &mut rng),
        ProblemClass::OD => design(size, OedCriterion::D, &mut rng),
        ProblemClass::OA => design(size, OedCriterion::A, &mut rng),
        ProblemClass::Port => portfolio(size, &mut rng),
    };
    Ok(ProblemInstance { class, size, seed, ..inst })
}

/// Instance skeleton filled in by the class generators.
fn instance(
    oracle: Box<dyn Objective>,
    lmo: Box<dyn LinearMinimizationOracle>,
    x0: Vec<f64>,
    shape: (usize, usize),
) -> ProblemInstance {
    let known_l = oracle.smoothness();
    ProblemInstance {
        class: ProblemClass::QuadProb,
        size: 0,
        seed: 0,
        oracle,
        lmo,
        known_l,
        known_opt: None,
        known_opt_gap: None,
        start_atoms: vec![x0.clone()],
        start_weights: vec![1.0],
        x0,
        shape,
    }
}

/// `(f(x_ref), FW gap at x_ref)` for a reference solution.
fn certify(oracle: &dyn Objective, lmo: &dyn LinearMinimizationOracle, x_ref: &[f64]) -> (f64, f64) {
    let g = oracle.gradient(x_ref);
    let v = lmo.minimize(&g).expect("finite gradient");
    (oracle.value(x_ref), crate::fw::fw_gap(&g, x_ref, &v))
}

fn quad_prob(n: usize, rng: &mut ChaCha8Rng) -> ProblemInstance {
    let b: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
    let x_ref = reference::project_simplex(&b);
    let oracle = WeightedDistance::unit(b);
    let lmo = SimplexLmo { n };
    let (opt, gap) = certify(&oracle, &lmo, &x_ref);
    ProblemInstance {
        known_opt: Some(opt),
        known_opt_gap: Some(gap),
        ..instance(Box::new(oracle), Box::new(lmo), simplex_vertex(n, 0), (n, 1))
    }
}

/// `Q = Uᵀ diag(λ) U`, `λ` log-spaced on `[1, κ]`, `U` orthogonal.
fn ill_conditioned_hessian(n: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let u = orthonormal_columns(&gaussian_matrix(rng, n, n));
    let lambdas: Vec<f64> = (0..n)
        .map(|i| ILL_CONDITION.powf(i as f64 / (n - 1) as f64))
        .collect();
    let mut q = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let s: f64 = (0..n).map(|k| u[(i, k)] * lambdas[k] * u[(j, k)]).sum();
            q[(i, j)] = s;
            q[(j, i)] = s;
        }
    }
    q
}

fn ill(n: usize, rng: &mut ChaCha8Rng) -> ProblemInstance {
    let q = ill_conditioned_hessian(n, rng);
    let b: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
    let x_ref = reference::simplex_qp(&q, &b, ILL_CONDITION, 200_000);
    let oracle = DenseQuadratic { q, b, l: ILL_CONDITION };
    let lmo = SimplexLmo { n };
    let (opt, gap) = certify(&oracle, &lmo, &x_ref);
    ProblemInstance {
        known_opt: Some(opt),
        known_opt_gap: Some(gap),
        ..instance(Box::new(oracle), Box::new(lmo), simplex_vertex(n, 0), (n, 1))
    }
}

fn birkhoff(n: usize, rng: &mut ChaCha8Rng) -> ProblemInstance {
    // doubly stochastic centre: average of n random permutations
    let mut m = vec![0.0; n * n];
    let mut perm: Vec<usize> = (0..n).collect();
    for _ in 0..n {
        for i in (1..n).rev() {
            perm.swap(i, rng.random_range(0..=i));
        }
        for (i, &j) in perm.iter().enumerate() {
            m[i * n + j] += 1.0 / n as f64;
        }
    }
    for v in m.iter_mut() {
        *v = (*v + BIRKHOFF_NOISE * gaussian(rng)).clamp(0.0, 1.0);
    }
    let x_ref = reference::project_birkhoff(&m, n, 1e-16, 2_000_000);
    let oracle = WeightedDistance::unit(m);
    let lmo = BirkhoffLmo { n };
    let x0 = seeded_vertex(&lmo, rng);
    let (opt, gap) = certify(&oracle, &lmo, &x_ref);
    ProblemInstance {
        known_opt: Some(opt),
        known_opt_gap: Some(gap),
        ..instance(Box::new(oracle), Box::new(lmo), x0, (n, n))
    }
}

/// 0/1 mask observing each entry (or each symmetric pair) with
/// probability [`OBSERVED_FRACTION`]; at least one entry is observed.
fn observation_mask(n: usize, symmetric: bool, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut mask = vec![0.0; n * n];
    for i in 0..n {
        let start = if symmetric { i } else { 0 };
        for j in start..n {
            if rng.random_bool(OBSERVED_FRACTION) {
                mask[i * n + j] = 1.0;
                if symmetric {
                    mask[j * n + i] = 1.0;
                }
            }
        }
    }
    if mask.iter().all(|&m| m == 0.0) {
        mask[0] = 1.0;
    }
    mask
}

fn spec(n: usize, rng: &mut ChaCha8Rng) -> ProblemInstance {
    let rank = COMPLETION_RANK.min(n);
    let mut f = gaussian_matrix(rng, n, rank);
    for i in 0..n {
        for k in 0..rank {
            f[(i, k)] *= SPEC_FACTOR_DECAY.powi(k as i32);
        }
    }
    let mut a = f.matmul(&f.transpose()).expect("sizes agree");
    let scale = SPEC_TARGET_TRACE / a.trace();
    a.as_mut_slice().iter_mut().for_each(|v| *v *= scale);
    let mask = observation_mask(n, true, rng);
    let oracle = WeightedDistance { target: a.into_vec(), weights: mask };
    let lmo = SpectraplexLmo::new(n);
    let x0 = seeded_vertex(&lmo, rng);
    instance(Box::new(oracle), Box::new(lmo), x0, (n, n))
}

fn nuclear(n: usize, rng: &mut ChaCha8Rng) -> ProblemInstance {
    let rank = COMPLETION_RANK.min(n);
    let left = gaussian_matrix(rng, n, rank);
    let right = gaussian_matrix(rng, rank, n);
    let a = left.matmul(&right).expect("sizes agree");
    let radius = 2.0 * nuclear_norm(&a);
    let mask = observation_mask(n, false, rng);
    let oracle = WeightedDistance { target: a.into_vec(), weights: mask };
    let lmo = NuclearLmo::new(n, n, radius);
    let x0 = seeded_vertex(&lmo, rng);
    instance(Box::new(oracle), Box::new(lmo), x0, (n, n))
}

/// `Σ σᵢ`
fn nuclear_norm(a: &DenseMatrix) -> f64 {
    match top_singular_dense(a) {
        Some((vals, _, _)) => vals.iter().sum(),
        // top singular value bounds the nuclear norm from below
        None => top_singular_triple(a, &PowerIteration::default()).map_or(1.0, |(s, _, _)| s),
    }
}

fn design(m: usize, criterion: OedCriterion, rng: &mut ChaCha8Rng) -> ProblemInstance {
    let k = m.div_ceil(4);
    let a = gaussian_matrix(rng, m, k);
    let oracle = ExperimentDesign { a, criterion };
    let lmo = SimplexLmo { n: m };
    let uniform = vec![1.0 / m as f64; m];
    ProblemInstance {
        start_atoms: (0..m).map(|i| simplex_vertex(m, i)).collect(),
        start_weights: uniform.clone(),
        ..instance(Box::new(oracle), Box::new(lmo), uniform, (m, 1))
    }
}

fn portfolio(n: usize, rng: &mut ChaCha8Rng) -> ProblemInstance {
    let m = 2 * n;
    let data = (0..m * n).map(|_| rng.random_range(0.5..1.5)).collect();
    let returns = DenseMatrix::from_row_major(m, n, data).expect("sizes agree");
    let oracle = LogRevenue { returns };
    let lmo = SimplexLmo { n };
    instance(Box::new(oracle), Box::new(lmo), simplex_vertex(n, 0), (n, 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_names_round_trip() {
        for c in ProblemClass::ALL {
            assert_eq!(c.as_str().parse::<ProblemClass>().unwrap(), c);
        }
        assert!(matches!("nope".parse::<ProblemClass>(), Err(ProblemError::UnknownClass(_))));
    }

    #[test]
    fn size_limits() {
        assert!(matches!(
            generate_instance(ProblemClass::Birkhoff, 1000, 0),
            Err(ProblemError::UnsupportedSize { .. })
        ));
    }

    #[test]
    fn dump_round_trip() {
        let inst = generate_instance(ProblemClass::Port, 5, 3).unwrap();
        let again = ProblemInstance::from_dump(&inst.dump()).unwrap();
        assert_eq!(again.dump(), inst.dump());
        assert_eq!(again.oracle.value(&inst.x0), inst.oracle.value(&inst.x0));
    }
}

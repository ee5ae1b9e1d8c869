use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use secant_fw::linalg::{cholesky, DenseMatrix};
use secant_fw::lmo::{
    hungarian, lmo_birkhoff, smallest_eigenpair, BirkhoffLmo, LinearMinimizationOracle, NuclearLmo, PowerIteration,
    SimplexLmo, SpectraplexLmo,
};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal)).collect()
}

fn unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let v = gaussian_vec(rng, n);
    let s = dot(&v, &v).sqrt();
    v.iter().map(|x| x / s).collect()
}

fn outer(a: &[f64], b: &[f64], scale: f64) -> Vec<f64> {
    a.iter().flat_map(|x| b.iter().map(move |y| scale * x * y)).collect()
}

fn permutation_matrix(p: &[usize]) -> Vec<f64> {
    let n = p.len();
    let mut m = vec![0.0; n * n];
    for (i, &j) in p.iter().enumerate() {
        m[i * n + j] = 1.0;
    }
    m
}

/// Random convex combination of extreme points produced by `vertex`.
fn random_feasible(rng: &mut ChaCha8Rng, dim: usize, mut vertex: impl FnMut(&mut ChaCha8Rng) -> Vec<f64>) -> Vec<f64> {
    let k = rng.random_range(1..6);
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.01..1.0)).collect();
    let total: f64 = w.iter().sum();
    let mut u = vec![0.0; dim];
    for wi in w {
        for (a, b) in u.iter_mut().zip(vertex(rng)) {
            *a += wi / total * b;
        }
    }
    u
}

/// Minimum assignment cost by enumerating every permutation (Heap's algorithm).
fn brute_force_assignment(cost: &[f64], n: usize) -> f64 {
    fn assignment_cost(cost: &[f64], n: usize, p: &[usize]) -> f64 {
        (0..n).map(|i| cost[i * n + p[i]]).sum()
    }
    let mut p: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    let mut best = assignment_cost(cost, n, &p);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            best = best.min(assignment_cost(cost, n, &p));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

fn shifted_is_pd(a: &DenseMatrix, shift: f64) -> bool {
    let mut m = a.clone();
    for i in 0..a.rows() {
        m[(i, i)] -= shift;
    }
    cholesky(&m).is_some()
}

#[test]
fn birkhoff_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 1..=6 {
        for _ in 0..50 {
            let g = gaussian_vec(&mut rng, n * n);
            let x = BirkhoffLmo { n }.minimize(&g).unwrap();
            assert!(x.iter().all(|&v| v == 0.0 || v == 1.0));
            for i in 0..n {
                assert_eq!(x[i * n..(i + 1) * n].iter().sum::<f64>(), 1.0);
                assert_eq!((0..n).map(|r| x[r * n + i]).sum::<f64>(), 1.0);
            }
            // same summation order as the enumeration
            let p: Vec<usize> = (0..n).map(|i| (0..n).find(|&j| x[i * n + j] == 1.0).unwrap()).collect();
            let lmo_cost: f64 = (0..n).map(|i| g[i * n + p[i]]).sum();
            assert_eq!(lmo_cost, brute_force_assignment(&g, n));
            let gm = DenseMatrix::from_row_major(n, n, g.clone()).unwrap();
            assert_eq!(lmo_birkhoff(&gm).unwrap().as_slice(), x.as_slice());
            let (assignment, total) = hungarian(&gm).unwrap();
            assert_eq!(assignment, p);
            assert!((total - lmo_cost).abs() <= 1e-12 * (1.0 + lmo_cost.abs()));
        }
    }
}

/// Eigenvalue certificate independent of any eigensolver: `λ` is the
/// smallest eigenvalue to within `δ` iff `A − (λ − δ)I` is positive definite
/// and `A − (λ + δ)I` is not.
#[test]
fn spectraplex_value_is_certified_minimum_eigenvalue() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 20;
    let lmo = SpectraplexLmo::new(n);
    for case in 0..40 {
        let mut g = gaussian_vec(&mut rng, n * n);
        if case % 4 == 0 {
            // plant a tight cluster at the bottom of the spectrum
            let gm = DenseMatrix::from_row_major(n, n, g).unwrap().symmetrized();
            let u1 = unit(&mut rng, n);
            g = gm.as_slice().iter().zip(outer(&u1, &u1, -30.0)).map(|(a, b)| a + b).collect();
            let u2 = unit(&mut rng, n);
            g = g.iter().zip(outer(&u2, &u2, -30.0)).map(|(a, b)| a + b).collect();
        }
        let x = lmo.minimize(&g).unwrap();
        let value = dot(&g, &x);
        let sym = DenseMatrix::from_row_major(n, n, g).unwrap().symmetrized();
        let delta = 1e-8 * sym.as_slice().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        assert!(shifted_is_pd(&sym, value - delta), "case {case}: something lies below {value}");
        assert!(!shifted_is_pd(&sym, value + delta), "case {case}: {value} is not attained");
    }
}

#[test]
fn nuclear_value_is_certified_top_singular_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (rows, cols) = (20, 20);
    for case in 0..40 {
        let radius = rng.random_range(0.5..5.0);
        let lmo = NuclearLmo::new(rows, cols, radius);
        let g = gaussian_vec(&mut rng, rows * cols);
        let x = lmo.minimize(&g).unwrap();
        let sigma = -dot(&g, &x) / radius;
        let gm = DenseMatrix::from_row_major(rows, cols, g).unwrap();
        let gtg = gm.transpose().matmul(&gm).unwrap();
        // σ² is the top eigenvalue of GᵀG ⇔ σ²(1+δ)I − GᵀG ≻ 0 and σ²(1−δ)I − GᵀG ⊁ 0
        let neg = |s: f64| {
            let mut m = DenseMatrix::zeros(cols, cols);
            for i in 0..cols {
                for j in 0..cols {
                    m[(i, j)] = -gtg[(i, j)];
                }
                m[(i, i)] += s;
            }
            cholesky(&m).is_some()
        };
        let s2 = sigma * sigma;
        assert!(neg(s2 * (1.0 + 1e-8)), "case {case}: a larger singular value exists");
        assert!(!neg(s2 * (1.0 - 1e-8)), "case {case}: {sigma} is not attained");
    }
}

#[test]
fn iterative_path_returns_eigenpairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let opts = PowerIteration { dense_below: 0, ..PowerIteration::default() };
    for _ in 0..20 {
        let n = 12;
        // well separated spectrum: −5, then eigenvalues in [0, 1]
        let mut vals: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        vals[0] = -5.0;
        let q: Vec<Vec<f64>> = (0..n).map(|_| unit(&mut rng, n)).collect();
        let mut basis = q.clone();
        for i in 0..n {
            for j in 0..i {
                let p = dot(&basis[i], &basis[j]);
                let bj = basis[j].clone();
                basis[i].iter_mut().zip(&bj).for_each(|(a, b)| *a -= p * b);
            }
            let s = dot(&basis[i], &basis[i]).sqrt();
            basis[i].iter_mut().for_each(|a| *a /= s);
        }
        let mut a = DenseMatrix::zeros(n, n);
        for (k, v) in vals.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    a[(i, j)] += v * basis[k][i] * basis[k][j];
                }
            }
        }
        let (lambda, u) = smallest_eigenpair(&a, &opts).unwrap();
        assert!((lambda + 5.0).abs() <= 1e-8, "lambda {lambda}");
        assert!((dot(&u, &basis[0]).abs() - 1.0).abs() <= 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sampled_optimality(seed in 0u64..10_000, n in 2usize..9) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let radius = rng.random_range(0.5..3.0);
        let oracles: Vec<(Box<dyn LinearMinimizationOracle>, Box<dyn Fn(&mut ChaCha8Rng) -> Vec<f64>>)> = vec![
            (Box::new(SimplexLmo { n }), Box::new(move |r: &mut ChaCha8Rng| {
                let mut e = vec![0.0; n];
                e[r.random_range(0..n)] = 1.0;
                e
            })),
            (Box::new(BirkhoffLmo { n }), Box::new(move |r: &mut ChaCha8Rng| {
                let mut p: Vec<usize> = (0..n).collect();
                p.shuffle(r);
                permutation_matrix(&p)
            })),
            (Box::new(SpectraplexLmo::new(n)), Box::new(move |r: &mut ChaCha8Rng| {
                let u = unit(r, n);
                outer(&u, &u, 1.0)
            })),
            (Box::new(NuclearLmo::new(n, n + 1, radius)), Box::new(move |r: &mut ChaCha8Rng| {
                let u = unit(r, n);
                let v = unit(r, n + 1);
                outer(&u, &v, radius)
            })),
        ];
        for (lmo, vertex) in &oracles {
            let g = gaussian_vec(&mut rng, lmo.dim());
            let best = dot(&g, &lmo.minimize(&g).unwrap());
            for _ in 0..100 {
                let u = random_feasible(&mut rng, lmo.dim(), vertex);
                prop_assert!(best <= dot(&g, &u) + 1e-9);
            }
        }
    }

    #[test]
    fn spectraplex_output_is_feasible(seed in 0u64..10_000, n in 1usize..25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = gaussian_vec(&mut rng, n * n);
        let x = SpectraplexLmo::new(n).minimize(&g).unwrap();
        let trace: f64 = (0..n).map(|i| x[i * n + i]).sum();
        prop_assert!((trace - 1.0).abs() <= 1e-10);
        for _ in 0..20 {
            let z = gaussian_vec(&mut rng, n);
            let mut xz = vec![0.0; n];
            DenseMatrix::from_row_major(n, n, x.clone()).unwrap().matvec(&z, &mut xz);
            prop_assert!(dot(&z, &xz) >= -1e-10);
        }
    }

    #[test]
    fn nuclear_output_is_rank_one_on_the_sphere(seed in 0u64..10_000, rows in 1usize..15, cols in 1usize..15) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let radius = rng.random_range(0.1..10.0);
        let g = gaussian_vec(&mut rng, rows * cols);
        let x = NuclearLmo::new(rows, cols, radius).minimize(&g).unwrap();
        // for a rank-one matrix the nuclear and Frobenius norms coincide
        let fro = dot(&x, &x).sqrt();
        prop_assert!((fro - radius).abs() <= 1e-8 * radius.max(1.0));
        for i in 0..rows {
            for j in 0..cols {
                for k in 0..rows {
                    let minor = x[i * cols + j] * x[k * cols] - x[i * cols] * x[k * cols + j];
                    prop_assert!(minor.abs() <= 1e-12 * radius * radius);
                }
            }
        }
    }
}

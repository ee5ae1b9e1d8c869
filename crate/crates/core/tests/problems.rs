use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use secant_fw::problems::{generate_instance, ProblemClass, ProblemInstance};
use secant_fw::{finite_difference_gradient, Objective};

fn desk_size(class: ProblemClass) -> usize {
    match class {
        ProblemClass::QuadProb | ProblemClass::Ill => 30,
        ProblemClass::OD | ProblemClass::OA => 24,
        ProblemClass::Port => 15,
        ProblemClass::Birkhoff | ProblemClass::Nuclear => 5,
        ProblemClass::Spec => 6,
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Strictly interior feasible point: a random mixture of many extreme
/// points, pulled towards the generator's start point.
fn interior_point(inst: &ProblemInstance, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = inst.dim();
    let k = if inst.class.is_matrix() { 12 } else { 3 * n };
    let mut x: Vec<f64> = inst.x0.iter().map(|v| 0.2 * v).collect();
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    for wi in w {
        let g: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let v = inst.lmo.minimize(&g).unwrap();
        for (a, b) in x.iter_mut().zip(v) {
            *a += 0.8 * wi / total * b;
        }
    }
    x
}

#[test]
fn gradients_match_finite_differences() {
    for class in ProblemClass::ALL {
        let inst = generate_instance(class, desk_size(class), 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for point in 0..20 {
            let x = interior_point(&inst, &mut rng);
            let oracle = inst.oracle.as_ref();
            assert!(oracle.value(&x).is_finite(), "{class}: point {point} outside the domain");
            let g = oracle.gradient(&x);
            let h = 1e-6 * inf_norm(&x).max(1.0);
            let fd = finite_difference_gradient(oracle, &x, h).unwrap();
            let err: Vec<f64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
            let rel = inf_norm(&err) / inf_norm(&g).max(1e-12);
            assert!(rel <= 1e-5, "{class}: point {point} relative error {rel:e}");
        }
    }
}

#[test]
fn oracles_are_pure_and_generators_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for class in ProblemClass::ALL {
        let a = generate_instance(class, desk_size(class), 17).unwrap();
        let b = generate_instance(class, desk_size(class), 17).unwrap();
        assert_eq!(a.dump(), b.dump());
        assert_eq!(a.x0, b.x0);
        assert_eq!(a.start_atoms, b.start_atoms);
        assert_eq!(a.start_weights, b.start_weights);
        assert_eq!(a.known_opt.map(f64::to_bits), b.known_opt.map(f64::to_bits));
        let x = interior_point(&a, &mut rng);
        let fa = a.oracle.value(&x);
        assert_eq!(fa.to_bits(), a.oracle.value(&x).to_bits());
        assert_eq!(fa.to_bits(), b.oracle.value(&x).to_bits());
        let ga = a.oracle.gradient(&x);
        assert_eq!(ga, a.oracle.gradient(&x));
        assert_eq!(ga, b.oracle.gradient(&x));
        let gen = |s: &[f64]| a.lmo.minimize(s).unwrap();
        assert_eq!(gen(&ga), b.lmo.minimize(&ga).unwrap());

        let other = generate_instance(class, desk_size(class), 18).unwrap();
        assert_ne!(other.oracle.gradient(&x), ga, "{class}: seed has no effect");

        let again = ProblemInstance::from_dump(&a.dump()).unwrap();
        assert_eq!(again.oracle.gradient(&x), ga);
    }
}

/// Largest Hessian eigenvalue by power iteration on gradient differences,
/// which are exact Hessian-vector products for quadratics.
fn hessian_top_eigenvalue(oracle: &dyn Objective, rng: &mut ChaCha8Rng) -> f64 {
    let n = oracle.dim();
    let base = vec![0.0; n];
    let g0 = oracle.gradient(&base);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut lambda = 0.0;
    for _ in 0..5000 {
        let s = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= s);
        let hv: Vec<f64> = oracle.gradient(&v).iter().zip(&g0).map(|(a, b)| a - b).collect();
        let next: f64 = hv.iter().zip(&v).map(|(a, b)| a * b).sum();
        v = hv;
        if (next - lambda).abs() <= 1e-12 * next.abs() {
            return next;
        }
        lambda = next;
    }
    lambda
}

#[test]
fn known_smoothness_is_the_top_hessian_eigenvalue() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for class in [ProblemClass::QuadProb, ProblemClass::Ill] {
        for seed in 0..3 {
            let inst = generate_instance(class, 40, seed).unwrap();
            let l = inst.known_l.expect("quadratic classes know L");
            assert_eq!(inst.oracle.smoothness(), Some(l));
            let top = hessian_top_eigenvalue(inst.oracle.as_ref(), &mut rng);
            assert!((top - l).abs() <= 1e-6 * l, "{class} seed {seed}: L {l} vs {top}");
        }
    }
}

#[test]
fn barrier_classes_are_infinite_exactly_off_domain() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for class in [ProblemClass::Port, ProblemClass::OD, ProblemClass::OA] {
        let inst = generate_instance(class, 12, 4).unwrap();
        let oracle = inst.oracle.as_ref();
        for _ in 0..20 {
            let x = interior_point(&inst, &mut rng);
            assert!(oracle.value(&x).is_finite());
        }
        let n = inst.dim();
        // the design classes need full-rank information, which one vertex lacks
        let mut vertex = vec![0.0; n];
        vertex[0] = 1.0;
        match class {
            ProblemClass::Port => {
                assert!(oracle.value(&vertex).is_finite());
                assert_eq!(oracle.value(&vec![0.0; n]), f64::INFINITY);
                let negative: Vec<f64> = vertex.iter().map(|v| -v).collect();
                assert_eq!(oracle.value(&negative), f64::INFINITY);
            }
            _ => {
                assert_eq!(oracle.value(&vertex), f64::INFINITY);
                assert!(oracle.gradient(&vertex).iter().all(|g| g.is_nan()));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn known_optimum_is_a_lower_bound(
        class in prop::sample::select(vec![ProblemClass::QuadProb, ProblemClass::Ill, ProblemClass::Birkhoff]),
        seed in 0u64..500,
    ) {
        let size = if class == ProblemClass::Birkhoff { 6 } else { 25 };
        let inst = generate_instance(class, size, seed).unwrap();
        let opt = inst.known_opt.unwrap();
        let slack = inst.known_opt_gap.unwrap().max(0.0) + 1e-12 * opt.abs().max(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..50 {
            let x = interior_point(&inst, &mut rng);
            prop_assert!(inst.oracle.value(&x) >= opt - slack);
        }
    }
}

use proptest::prelude::*;
use secant_fw::fw::{ActiveSet, SolveConfig, Termination, ToleranceSchedule};
use secant_fw::linalg::{cholesky, DenseMatrix};
use secant_fw::problems::{generate_instance, ProblemClass, ProblemInstance, Solver};
use secant_fw::stepsizes::StrategyKind;
use secant_fw::StepKind;

const TOL: f64 = 1e-8;

/// Sum of singular values by one-sided Jacobi rotations on the columns.
fn nuclear_norm(x: &[f64], rows: usize, cols: usize) -> f64 {
    let mut a: Vec<Vec<f64>> = (0..cols).map(|j| (0..rows).map(|i| x[i * cols + j]).collect()).collect();
    for _ in 0..60 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = a[p].iter().map(|v| v * v).sum();
                let beta: f64 = a[q].iter().map(|v| v * v).sum();
                let gamma: f64 = a[p].iter().zip(&a[q]).map(|(u, v)| u * v).sum();
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..rows {
                    let (u, v) = (a[p][k], a[q][k]);
                    a[p][k] = c * u - s * v;
                    a[q][k] = s * u + c * v;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    a.iter().map(|col| col.iter().map(|v| v * v).sum::<f64>().sqrt()).sum()
}

fn small_size(class: ProblemClass) -> usize {
    match class {
        ProblemClass::Birkhoff => 5,
        ProblemClass::Spec | ProblemClass::Nuclear => 8,
        _ => 20,
    }
}

/// Membership test for the feasible region of `inst` within [`TOL`].
fn assert_feasible(inst: &ProblemInstance, x: &[f64], ctx: &str) {
    let (rows, cols) = inst.shape;
    match inst.class {
        ProblemClass::Birkhoff => {
            assert!(x.iter().all(|v| *v >= -TOL), "{ctx}: negative entry");
            for i in 0..rows {
                let r: f64 = x[i * cols..(i + 1) * cols].iter().sum();
                let c: f64 = (0..rows).map(|k| x[k * cols + i]).sum();
                assert!((r - 1.0).abs() <= TOL && (c - 1.0).abs() <= TOL, "{ctx}: margins {r} {c}");
            }
        }
        ProblemClass::Spec => {
            let m = DenseMatrix::from_row_major(rows, cols, x.to_vec()).unwrap();
            let trace = m.trace();
            assert!((trace - 1.0).abs() <= TOL, "{ctx}: trace {trace}");
            let mut shifted = m.symmetrized();
            for i in 0..rows {
                shifted[(i, i)] += TOL;
            }
            assert!(cholesky(&shifted).is_some(), "{ctx}: not PSD");
        }
        ProblemClass::Nuclear => {
            // every extreme point has Frobenius norm equal to the radius
            let radius = inst.lmo.minimize(&vec![1.0; x.len()]).unwrap().iter().map(|v| v * v).sum::<f64>().sqrt();
            let nuclear = nuclear_norm(x, rows, cols);
            assert!(nuclear <= radius * (1.0 + TOL), "{ctx}: nuclear norm {nuclear} > {radius}");
        }
        _ => {
            assert!(x.iter().all(|v| *v >= -TOL), "{ctx}: negative entry");
            let s: f64 = x.iter().sum();
            assert!((s - 1.0).abs() <= TOL, "{ctx}: sum {s}");
        }
    }
}

#[test]
fn jacobi_nuclear_norm_oracle() {
    // diag(3, 1) rotated on both sides has nuclear norm 4
    let (c, s) = (0.6, 0.8);
    let x = [3.0 * c * c + s * s, 3.0 * c * s - c * s, 3.0 * s * c - s * c, 3.0 * s * s + c * c];
    assert!((nuclear_norm(&x, 2, 2) - 4.0).abs() <= 1e-14);
    assert!((nuclear_norm(&[1.0, 2.0, 2.0, 4.0, 3.0, 6.0], 3, 2) - 70f64.sqrt()).abs() <= 1e-13);
}

#[test]
fn iterates_stay_feasible() {
    let checkpoints = [0, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89];
    for class in ProblemClass::ALL {
        let inst = generate_instance(class, small_size(class), 1).unwrap();
        for solver in [Solver::Fw, Solver::Bpcg] {
            for kind in [StrategyKind::Secant, StrategyKind::Agnostic] {
                for &t in &checkpoints {
                    let cfg = SolveConfig { max_iters: t, gap_tol: 1e-12, ..SolveConfig::with_strategy(kind) };
                    let report = inst.solve(solver, &cfg).unwrap();
                    assert_feasible(&inst, &report.x, &format!("{class} {solver:?} {kind} t={t}"));
                }
            }
        }
    }
}

#[test]
fn primal_is_monotone_for_guarded_strategies() {
    let kinds = [
        StrategyKind::Secant,
        StrategyKind::Golden,
        StrategyKind::Adaptive,
        StrategyKind::AdaptiveZeroOrder,
        StrategyKind::Backtracking,
        StrategyKind::Monotonic,
    ];
    for class in ProblemClass::ALL {
        let inst = generate_instance(class, small_size(class), 2).unwrap();
        for solver in [Solver::Fw, Solver::Bpcg] {
            for kind in kinds {
                assert!(kind.is_monotone());
                let cfg = SolveConfig { max_iters: 300, ..SolveConfig::with_strategy(kind) };
                let report = inst.solve(solver, &cfg).unwrap();
                for w in report.trajectory.windows(2) {
                    let noise = 1e-10 * w[0].primal.abs().max(1.0);
                    assert!(
                        w[1].primal <= w[0].primal + noise,
                        "{class} {solver:?} {kind}: f rose from {} to {} at t={} ({})",
                        w[0].primal,
                        w[1].primal,
                        w[1].t,
                        w[0].step_kind
                    );
                }
            }
        }
    }
}

#[test]
fn trajectory_records_are_well_formed() {
    for class in ProblemClass::ALL {
        let inst = generate_instance(class, small_size(class), 3).unwrap();
        for solver in [Solver::Fw, Solver::Bpcg] {
            let report = inst.solve(solver, &SolveConfig { max_iters: 200, ..SolveConfig::default() }).unwrap();
            let traj = &report.trajectory;
            assert_eq!(traj.len(), report.iterations + 1);
            assert_eq!(traj.last().unwrap().step_kind, StepKind::Stop);
            for (i, r) in traj.iter().enumerate() {
                assert_eq!(r.t, i);
                assert!((0.0..=1.0).contains(&r.gamma));
                assert!(r.fw_gap >= -1e-9 * r.primal.abs().max(1.0), "{class}: gap {}", r.fw_gap);
                if solver == Solver::Fw {
                    assert!(matches!(r.step_kind, StepKind::Fw | StepKind::Stop));
                }
            }
            assert_eq!(report.primal, traj.last().unwrap().primal);
            assert_eq!(report.solved(), report.termination == Termination::GapReached);
        }
    }
}

#[test]
fn gap_certifies_suboptimality() {
    for class in [ProblemClass::QuadProb, ProblemClass::Ill, ProblemClass::Birkhoff] {
        let size = if class == ProblemClass::Birkhoff { 6 } else { 40 };
        for seed in 0..3 {
            let inst = generate_instance(class, size, seed).unwrap();
            let opt = inst.known_opt.unwrap();
            let slack = inst.known_opt_gap.unwrap().abs() + 1e-12 * opt.abs().max(1.0);
            for solver in [Solver::Fw, Solver::Bpcg] {
                let report = inst.solve(solver, &SolveConfig { max_iters: 500, ..SolveConfig::default() }).unwrap();
                for r in &report.trajectory {
                    assert!(r.primal - opt <= r.fw_gap + slack, "{class} seed {seed}: t={} h={} gap={}", r.t, r.primal - opt, r.fw_gap);
                }
            }
        }
    }
}

/// `f(x_T) − f* ≤ 2LD²/(T+2) + ε/2` under the scheduled line-search
/// tolerances, for every iterate produced by a step (`T ≥ 1`). The start
/// point is not covered: its gap depends on the gradient, not on `LD²`.
fn check_budget(inst: &ProblemInstance, eps: f64, max_iters: usize) -> Result<(), String> {
    let l = inst.known_l.unwrap();
    let d2 = 2.0; // squared diameter of the probability simplex
    let opt = inst.known_opt.unwrap();
    let cfg = SolveConfig {
        max_iters,
        gap_tol: f64::MIN_POSITIVE,
        tolerance_schedule: ToleranceSchedule::Scheduled(eps),
        ..SolveConfig::with_strategy(StrategyKind::Secant)
    };
    let report = inst.solve(Solver::Fw, &cfg).map_err(|e| e.to_string())?;
    for r in report.trajectory.iter().skip(1) {
        let bound = 2.0 * l * d2 / (r.t as f64 + 2.0) + eps / 2.0;
        if r.primal - opt > bound {
            return Err(format!("t={} h={:e} bound={:e}", r.t, r.primal - opt, bound));
        }
    }
    Ok(())
}

#[test]
fn scheduled_tolerances_respect_the_budget() {
    let inst = generate_instance(ProblemClass::QuadProb, 50, 0).unwrap();
    check_budget(&inst, 1e-4, 2000).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn budget_holds_across_seeds(
        class in prop::sample::select(vec![ProblemClass::QuadProb, ProblemClass::Ill]),
        seed in 0u64..1000,
        eps_exp in 2..8i32,
    ) {
        let inst = generate_instance(class, 30, seed).unwrap();
        prop_assert!(check_budget(&inst, 10f64.powi(-eps_exp), 400).is_ok());
    }

    #[test]
    fn active_sets_normalize_and_merge(
        raw in prop::collection::vec((0usize..6, -0.5..2.0f64), 1..20),
    ) {
        let n = 6;
        let atoms: Vec<Vec<f64>> = raw.iter().map(|(i, _)| {
            let mut e = vec![0.0; n];
            e[*i] = 1.0;
            e
        }).collect();
        let weights: Vec<f64> = raw.iter().map(|(_, w)| *w).collect();
        let built = ActiveSet::from_weighted(atoms, weights.clone());
        if weights.iter().all(|w| *w <= 0.0) {
            prop_assert!(built.is_err());
            return Ok(());
        }
        let set = built.unwrap();
        prop_assert!(set.weights().iter().all(|w| *w > 0.0));
        prop_assert!((set.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        for (i, a) in set.atoms().iter().enumerate() {
            prop_assert_eq!(set.find(a), Some(i));
        }
        let combo = set.combination();
        for (a, b) in combo.iter().zip(set.x()) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn solves_are_deterministic(
        class in prop::sample::select(ProblemClass::ALL.to_vec()),
        seed in 0u64..100,
        bpcg in any::<bool>(),
    ) {
        let inst = generate_instance(class, small_size(class), seed).unwrap();
        let solver = if bpcg { Solver::Bpcg } else { Solver::Fw };
        let cfg = SolveConfig { max_iters: 100, ..SolveConfig::default() };
        let a = inst.solve(solver, &cfg).unwrap();
        let b = inst.solve(solver, &cfg).unwrap();
        prop_assert_eq!(&a.x, &b.x);
        prop_assert_eq!(a.trajectory.len(), b.trajectory.len());
        for (p, q) in a.trajectory.iter().zip(&b.trajectory) {
            prop_assert_eq!(p.primal.to_bits(), q.primal.to_bits());
            prop_assert_eq!(p.fw_gap.to_bits(), q.fw_gap.to_bits());
            prop_assert_eq!(p.gamma.to_bits(), q.gamma.to_bits());
            prop_assert_eq!(p.inner_iters, q.inner_iters);
            prop_assert_eq!(p.step_kind, q.step_kind);
        }
    }
}

#[test]
fn bpcg_solves_the_simplex_quadratic_to_projection_accuracy() {
    let inst = generate_instance(ProblemClass::QuadProb, 100, 0).unwrap();
    let report = inst.solve(Solver::Bpcg, &SolveConfig::default()).unwrap();
    assert!(report.solved());
    assert!(report.active_set_size.unwrap() <= 100);
    assert!((report.primal - inst.known_opt.unwrap()).abs() <= 1e-9);
}

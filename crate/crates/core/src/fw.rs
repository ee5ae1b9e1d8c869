//! Frank-Wolfe solver loops.
//!
//! [`run_fw`] is the vanilla method: query the oracle for `v_t`, then step
//! along `d_t = x_t − v_t` with `γ_max = 1`. With
//! [`ToleranceSchedule::Scheduled`] the line search must return a
//! `δ_t`-minimizer with `δ_t` from [`tolerance_schedule`].
//!
//! [`run_bpcg`] is blended pairwise conditional gradients: it keeps the
//! iterate as a convex combination of atoms and alternates between pairwise
//! weight transfers inside the active set and ordinary Frank-Wolfe steps.

use std::time::Instant;

use crate::error::{DimensionError, SolveError};
use crate::linalg::{dot_unchecked, norm_sq};
use crate::lmo::LinearMinimizationOracle;
use crate::oracle::Objective;
use crate::stepsizes::{StepContext, StepRule, StrategyKind};
use crate::trajectory::{StepKind, TrajectoryRecord};

/// `⟨grad, x − v⟩`
pub fn fw_gap(grad: &[f64], x: &[f64], v: &[f64]) -> f64 {
    grad.iter().zip(x).zip(v).map(|((g, a), b)| g * (a - b)).sum()
}

/// `δ_i = ε·a_i/(2A_i)` with `a_i = 2i + 2` and `A_i = (i+1)(i+2)`, which
/// simplifies to `ε/(i+2)`.
pub fn tolerance_schedule(eps: f64, i: usize) -> f64 {
    eps / (i as f64 + 2.0)
}

/// Primal accuracy requested from the line search at each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum ToleranceSchedule {
    #[default]
    None,
    Constant(f64),
    /// `δ_t = tolerance_schedule(ε, t)`
    Scheduled(f64),
}

impl ToleranceSchedule {
    pub fn at(self, t: usize) -> Option<f64> {
        match self {
            ToleranceSchedule::None => None,
            ToleranceSchedule::Constant(delta) => Some(delta),
            ToleranceSchedule::Scheduled(eps) => Some(tolerance_schedule(eps, t)),
        }
    }
}

/// Solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub max_iters: usize,
    pub gap_tol: f64,
    pub time_limit_s: f64,
    /// Step-size rule with its initial state; cloned at the start of a solve.
    pub strategy: StepRule,
    pub tolerance_schedule: ToleranceSchedule,
    pub seed: u64,
    /// Keep the secant iterates of every line search in the report.
    pub keep_line_search_iterates: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            max_iters: 10_000,
            gap_tol: 1e-7,
            time_limit_s: f64::INFINITY,
            strategy: StepRule::new(StrategyKind::Secant),
            tolerance_schedule: ToleranceSchedule::None,
            seed: 0,
            keep_line_search_iterates: false,
        }
    }
}

impl SolveConfig {
    pub fn with_strategy(kind: StrategyKind) -> Self {
        Self { strategy: StepRule::new(kind), ..Self::default() }
    }

    fn validate(&self) -> Result<(), SolveError> {
        if !(self.gap_tol > 0.0) {
            return Err(SolveError::Config(format!("gap_tol must be positive, got {}", self.gap_tol)));
        }
        if !(self.time_limit_s > 0.0) {
            return Err(SolveError::Config(format!("time_limit_s must be positive, got {}", self.time_limit_s)));
        }
        Ok(())
    }
}

/// Why a solve stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GapReached,
    MaxIters,
    TimeLimit,
    NonFinitePrimal,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::GapReached => "gap_reached",
            Termination::MaxIters => "max_iters",
            Termination::TimeLimit => "time_limit",
            Termination::NonFinitePrimal => "non_finite_primal",
        }
    }
}

/// Everything a solve produces.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// One record per iteration plus a final [`StepKind::Stop`] record.
    pub trajectory: Vec<TrajectoryRecord>,
    pub x: Vec<f64>,
    pub termination: Termination,
    /// Steps taken.
    pub iterations: usize,
    pub primal: f64,
    pub fw_gap: f64,
    /// Line-search calls (secant and golden-section rules).
    pub line_searches: usize,
    /// Inner iterations summed over all step-rule calls.
    pub total_inner: usize,
    pub fallbacks: usize,
    /// Steps where the rule failed and `γ = 0` was used.
    pub null_steps: usize,
    pub elapsed_s: f64,
    /// Final active-set size (BPCG only).
    pub active_set_size: Option<usize>,
    pub line_search_iterates: Vec<Vec<f64>>,
}

impl SolveReport {
    pub fn solved(&self) -> bool {
        self.termination == Termination::GapReached
    }

    pub fn mean_inner(&self) -> Option<f64> {
        (self.line_searches > 0).then(|| self.total_inner as f64 / self.line_searches as f64)
    }
}

/// Shared bookkeeping of both solver loops.
struct Run<'a> {
    oracle: &'a dyn Objective,
    cfg: &'a SolveConfig,
    rule: StepRule,
    start: Instant,
    trajectory: Vec<TrajectoryRecord>,
    line_searches: usize,
    total_inner: usize,
    fallbacks: usize,
    null_steps: usize,
    iterates: Vec<Vec<f64>>,
}

impl<'a> Run<'a> {
    fn new(oracle: &'a dyn Objective, cfg: &'a SolveConfig) -> Result<Self, SolveError> {
        cfg.validate()?;
        Ok(Self {
            oracle,
            cfg,
            rule: cfg.strategy.clone(),
            start: Instant::now(),
            trajectory: Vec::new(),
            line_searches: 0,
            total_inner: 0,
            fallbacks: 0,
            null_steps: 0,
            iterates: Vec::new(),
        })
    }

    fn elapsed(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }

    /// Stop test at the top of iteration `t`.
    fn should_stop(&self, t: usize, gap: f64) -> Option<Termination> {
        if gap <= self.cfg.gap_tol {
            return Some(Termination::GapReached);
        }
        if t >= self.cfg.max_iters {
            return Some(Termination::MaxIters);
        }
        if self.elapsed() >= self.cfg.time_limit_s {
            return Some(Termination::TimeLimit);
        }
        None
    }

    /// Runs the step rule; failures become null steps.
    #[allow(clippy::too_many_arguments)]
    fn step(&mut self, t: usize, x: &[f64], d: &[f64], grad: &[f64], grad_dot_d: f64, gamma_max: f64, f_x: f64) -> (f64, usize) {
        let ctx = StepContext {
            t,
            x,
            d,
            grad,
            grad_dot_d,
            gamma_max,
            oracle: self.oracle,
            f_x,
            primal_tol: self.cfg.tolerance_schedule.at(t),
        };
        match self.rule.step(&ctx) {
            Ok(out) => {
                self.total_inner += out.inner_iters;
                if let Some(ls) = out.line_search {
                    self.line_searches += 1;
                    self.fallbacks += usize::from(ls.used_fallback);
                    if self.cfg.keep_line_search_iterates {
                        self.iterates.push(ls.iterates);
                    }
                }
                (out.gamma.clamp(0.0, gamma_max), out.inner_iters)
            }
            Err(err) => {
                log::warn!("step rule {} failed at iteration {t}: {err}; taking a null step", self.rule.kind());
                self.null_steps += 1;
                (0.0, 0)
            }
        }
    }

    fn record(&mut self, t: usize, primal: f64, fw_gap: f64, gamma: f64, inner_iters: usize, step_kind: StepKind) {
        self.trajectory.push(TrajectoryRecord {
            t,
            primal,
            fw_gap,
            gamma,
            inner_iters,
            elapsed_s: self.elapsed(),
            step_kind,
        });
    }

    /// Ends the solve at an iterate outside the objective's domain, which
    /// step rules without a domain guard can reach. The gap is unknown there.
    fn abort_non_finite(mut self, x: Vec<f64>, t: usize, primal: f64, active: Option<usize>) -> SolveReport {
        log::error!("primal value {primal} at iteration {t}; aborting solve");
        self.record(t, primal, f64::NAN, 0.0, 0, StepKind::Stop);
        self.finish(x, Termination::NonFinitePrimal, t, primal, f64::NAN, active)
    }

    fn finish(self, x: Vec<f64>, termination: Termination, t: usize, primal: f64, gap: f64, active: Option<usize>) -> SolveReport {
        let elapsed_s = self.elapsed();
        SolveReport {
            trajectory: self.trajectory,
            x,
            termination,
            iterations: t,
            primal,
            fw_gap: gap,
            line_searches: self.line_searches,
            total_inner: self.total_inner,
            fallbacks: self.fallbacks,
            null_steps: self.null_steps,
            elapsed_s,
            active_set_size: active,
            line_search_iterates: self.iterates,
        }
    }
}

fn check_start(oracle: &dyn Objective, lmo: &dyn LinearMinimizationOracle, x0: &[f64]) -> Result<(), SolveError> {
    if lmo.dim() != oracle.dim() {
        return Err(DimensionError::new(oracle.dim(), lmo.dim()).into());
    }
    if x0.len() != oracle.dim() {
        return Err(DimensionError::new(oracle.dim(), x0.len()).into());
    }
    if !oracle.value(x0).is_finite() {
        return Err(SolveError::InfeasibleStart);
    }
    Ok(())
}

/// Vanilla Frank-Wolfe from a feasible `x0`.
pub fn run_fw(
    oracle: &dyn Objective,
    lmo: &dyn LinearMinimizationOracle,
    x0: &[f64],
    cfg: &SolveConfig,
) -> Result<SolveReport, SolveError> {
    check_start(oracle, lmo, x0)?;
    let mut run = Run::new(oracle, cfg)?;
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut grad = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut t = 0;
    loop {
        let primal = oracle.value(&x);
        if !primal.is_finite() {
            return Ok(run.abort_non_finite(x, t, primal, None));
        }
        oracle.gradient_into(&x, &mut grad);
        lmo.minimize_into(&grad, &mut v).map_err(|source| SolveError::Lmo { t, source })?;
        let gap = fw_gap(&grad, &x, &v);
        if let Some(term) = run.should_stop(t, gap) {
            run.record(t, primal, gap, 0.0, 0, StepKind::Stop);
            return Ok(run.finish(x, term, t, primal, gap, None));
        }
        for ((di, xi), vi) in d.iter_mut().zip(&x).zip(&v) {
            *di = xi - vi;
        }
        let (gamma, inner) = run.step(t, &x, &d, &grad, gap, 1.0, primal);
        run.record(t, primal, gap, gamma, inner, StepKind::Fw);
        if gamma == 1.0 {
            x.copy_from_slice(&v);
        } else {
            for (xi, di) in x.iter_mut().zip(&d) {
                *xi -= gamma * di;
            }
        }
        t += 1;
    }
}

/// Extreme points with positive convex weights and their combination.
#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSet {
    atoms: Vec<Vec<f64>>,
    weights: Vec<f64>,
    x: Vec<f64>,
}

/// Drift of `Σλ` from one that triggers a warning on renormalization.
const WEIGHT_DRIFT_WARN: f64 = 1e-8;

impl ActiveSet {
    pub fn singleton(atom: Vec<f64>) -> Self {
        let x = atom.clone();
        Self { atoms: vec![atom], weights: vec![1.0], x }
    }

    /// Builds an active set from atoms and weights. Non-positive weights are
    /// dropped, duplicate atoms merged and the weights normalized.
    pub fn from_weighted(atoms: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self, SolveError> {
        if atoms.len() != weights.len() {
            return Err(DimensionError::new(atoms.len(), weights.len()).into());
        }
        let dim = atoms.first().map_or(0, Vec::len);
        let mut set = Self { atoms: Vec::new(), weights: Vec::new(), x: vec![0.0; dim] };
        for (atom, w) in atoms.into_iter().zip(weights) {
            if atom.len() != dim {
                return Err(DimensionError::new(dim, atom.len()).into());
            }
            if !(w > 0.0) {
                continue;
            }
            match set.find(&atom) {
                Some(i) => set.weights[i] += w,
                None => {
                    set.atoms.push(atom);
                    set.weights.push(w);
                }
            }
        }
        if set.atoms.is_empty() {
            return Err(SolveError::Config("active set needs at least one atom with positive weight".into()));
        }
        let total: f64 = set.weights.iter().sum();
        set.weights.iter_mut().for_each(|w| *w /= total);
        set.resync();
        Ok(set)
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Cached iterate `Σ λᵢ aᵢ`.
    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// `Σ λᵢ aᵢ` recomputed from scratch.
    pub fn combination(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.x.len()];
        for (a, &w) in self.atoms.iter().zip(&self.weights) {
            for (xi, ai) in x.iter_mut().zip(a) {
                *xi += w * ai;
            }
        }
        x
    }

    /// Bitwise atom lookup.
    pub fn find(&self, atom: &[f64]) -> Option<usize> {
        self.atoms
            .iter()
            .position(|a| a.iter().zip(atom).all(|(p, q)| p.to_bits() == q.to_bits()))
    }

    /// Renormalizes the weights and recomputes the cached iterate.
    pub fn resync(&mut self) {
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_DRIFT_WARN {
            log::warn!("active-set weights sum to {total}; renormalizing");
        }
        self.weights.iter_mut().for_each(|w| *w /= total);
        self.x = self.combination();
    }

    /// Moves `γ` weight from atom `away` to atom `local`; `γ = λ_away`
    /// drops `away`. Returns whether a drop happened.
    fn transfer(&mut self, away: usize, local: usize, gamma: f64) -> bool {
        let lambda = self.weights[away];
        let drop = gamma >= lambda;
        let gamma = gamma.min(lambda);
        for ((xi, si), ai) in self.x.iter_mut().zip(&self.atoms[local]).zip(&self.atoms[away]) {
            *xi += gamma * (si - ai);
        }
        self.weights[local] += gamma;
        if drop {
            self.atoms.swap_remove(away);
            self.weights.swap_remove(away);
        } else {
            self.weights[away] -= gamma;
        }
        drop
    }

    /// Frank-Wolfe update `x ← (1−γ)x + γv`.
    fn fw_update(&mut self, v: &[f64], gamma: f64) {
        if gamma >= 1.0 {
            self.atoms.clear();
            self.weights.clear();
            self.atoms.push(v.to_vec());
            self.weights.push(1.0);
            self.x.copy_from_slice(v);
            return;
        }
        if gamma <= 0.0 {
            return;
        }
        self.weights.iter_mut().for_each(|w| *w *= 1.0 - gamma);
        match self.find(v) {
            Some(i) => self.weights[i] += gamma,
            None => {
                self.atoms.push(v.to_vec());
                self.weights.push(gamma);
            }
        }
        for (xi, vi) in self.x.iter_mut().zip(v) {
            *xi = (1.0 - gamma) * *xi + gamma * vi;
        }
    }
}

/// Iterations between full recomputations of the cached iterate.
const RESYNC_EVERY: usize = 64;

/// Blended pairwise conditional gradients from a single extreme point.
pub fn run_bpcg(
    oracle: &dyn Objective,
    lmo: &dyn LinearMinimizationOracle,
    x0_atom: &[f64],
    cfg: &SolveConfig,
) -> Result<SolveReport, SolveError> {
    run_bpcg_from(oracle, lmo, ActiveSet::singleton(x0_atom.to_vec()), cfg)
}

/// Blended pairwise conditional gradients from an arbitrary active set.
///
/// Each iteration compares the local pairwise gap `⟨∇f, a − s⟩` of the
/// away atom `a` (largest `⟨∇f, ·⟩` in the active set) and the local atom
/// `s` (smallest) with the Frank-Wolfe gap. The larger one decides between
/// a pairwise step along `a − s` with `γ_max = λ_a` and a Frank-Wolfe step
/// along `x − v` with `γ_max = 1`.
pub fn run_bpcg_from(
    oracle: &dyn Objective,
    lmo: &dyn LinearMinimizationOracle,
    mut active: ActiveSet,
    cfg: &SolveConfig,
) -> Result<SolveReport, SolveError> {
    check_start(oracle, lmo, active.x())?;
    let mut run = Run::new(oracle, cfg)?;
    let n = oracle.dim();
    let mut grad = vec![0.0; n];
    let mut v = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut t = 0;
    loop {
        if t % RESYNC_EVERY == 0 && t > 0 {
            active.resync();
        }
        x.copy_from_slice(active.x());
        let primal = oracle.value(&x);
        if !primal.is_finite() {
            let size = active.len();
            return Ok(run.abort_non_finite(x, t, primal, Some(size)));
        }
        oracle.gradient_into(&x, &mut grad);
        lmo.minimize_into(&grad, &mut v).map_err(|source| SolveError::Lmo { t, source })?;
        let gap = fw_gap(&grad, &x, &v);
        if let Some(term) = run.should_stop(t, gap) {
            run.record(t, primal, gap, 0.0, 0, StepKind::Stop);
            let size = active.len();
            return Ok(run.finish(x, term, t, primal, gap, Some(size)));
        }

        let (mut away, mut local) = (0, 0);
        let (mut away_score, mut local_score) = (f64::NEG_INFINITY, f64::INFINITY);
        for (i, atom) in active.atoms().iter().enumerate() {
            let score = dot_unchecked(&grad, atom);
            if score > away_score {
                away_score = score;
                away = i;
            }
            if score < local_score {
                local_score = score;
                local = i;
            }
        }
        let local_gap = away_score - local_score;

        if local_gap >= gap && away != local {
            let lambda = active.weights()[away];
            for ((di, ai), si) in d.iter_mut().zip(&active.atoms()[away]).zip(&active.atoms()[local]) {
                *di = ai - si;
            }
            let (gamma, inner) = run.step(t, &x, &d, &grad, local_gap, lambda, primal);
            let dropped = gamma > 0.0 && active.transfer(away, local, gamma);
            let kind = if dropped { StepKind::Drop } else { StepKind::Pairwise };
            run.record(t, primal, gap, gamma, inner, kind);
        } else {
            for ((di, xi), vi) in d.iter_mut().zip(&x).zip(&v) {
                *di = xi - vi;
            }
            let (gamma, inner) = run.step(t, &x, &d, &grad, gap, 1.0, primal);
            active.fw_update(&v, gamma);
            run.record(t, primal, gap, gamma, inner, StepKind::Fw);
        }
        t += 1;
    }
}

/// Squared diameter bound `max ‖a − b‖²` over a list of atoms.
pub fn diameter_sq(atoms: &[Vec<f64>]) -> f64 {
    let mut best: f64 = 0.0;
    for (i, a) in atoms.iter().enumerate() {
        for b in &atoms[i + 1..] {
            let diff: Vec<f64> = a.iter().zip(b).map(|(p, q)| p - q).collect();
            best = best.max(norm_sq(&diff));
        }
    }
    best
}

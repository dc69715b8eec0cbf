//! Estimation of a non-negative DAG by an augmented Lagrangian.
//!
//! The program solved is
//!
//! ```text
//! minimize_{W >= 0, diag W = 0}   F(W) + lambda h(W) + (c/2) h(W)^2
//! F(W) = 1/2 tr((I-W)^T Sigma (I-W)) + alpha * sum_{i!=j} W_ij
//! ```
//!
//! where `Sigma` is a sample or population second moment and `h` is a smooth
//! acyclicity function from [`crate::acyclicity`]. A method-of-multipliers
//! outer loop alternates an inner minimization in `W` with the updates
//! `lambda += c h` and `c *= beta` (the latter only when the constraint
//! violation failed to shrink by the factor `gamma`). The inner minimization
//! is projected gradient descent, optionally with Nesterov momentum and
//! restart-on-increase, and a halving line search that also backs off
//! whenever a trial point leaves the domain of `h`.
//!
//! With the half-scaled score above, the critical multiplier value at which
//! the population problem pins the ground truth is `lambda = 1`; statements
//! about the unscaled population score (see [`crate::landscape`]) carry a
//! factor of two.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::acyclicity::{self, AcyclicityKind};
use crate::error::{Error, Result};
use crate::graphs::{self, WeightMatrix};
use crate::linalg::DenseMatrix;
use crate::sem::{sample_covariance, Covariance, Dataset};

/// Step-size floor below which the line search reports a stall.
const ETA_MIN: f64 = 1e-16;

/// Cap on step-size growth between accepted steps.
const ETA_MAX: f64 = 1e3;

/// In momentum mode the stationarity residual is refreshed at this period;
/// plain projected gradient checks it every iteration.
const RESIDUAL_PERIOD: usize = 5;

/// Consecutive accepted steps without a resolvable objective decrease
/// before the inner loop concludes it has hit the f64 floor and returns.
const FLAT_LIMIT: usize = 16;

/// Loosest stationarity target an inner round may stop at; early rounds
/// use it however large the violation still is.
const INNER_TOL_CEILING: f64 = 1e-3;

/// The opening round runs before any multiplier information exists and its
/// solution is displaced by the first multiplier update; cutting the
/// starting residual by this factor is all it is asked to do.
const FIRST_ROUND_DROP: f64 = 1e-2;

/// All solver knobs. `Default` gives the tuning used by the experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Weight of the entrywise penalty on off-diagonal entries.
    pub alpha: f64,
    /// Initial multiplier.
    pub lambda0: f64,
    /// Initial quadratic penalty coefficient.
    pub c0: f64,
    /// Penalty growth factor.
    pub beta: f64,
    /// Required shrinkage of the constraint violation per outer iteration;
    /// failing it triggers penalty growth.
    pub gamma: f64,
    /// Initial inner step size.
    pub eta0: f64,
    /// Inner stop: projected-gradient residual at or below this value. The
    /// outer loop additionally tightens the effective tolerance as the
    /// constraint violation shrinks (never above this ceiling), since a
    /// fixed inner accuracy would leave violations of the same order as the
    /// residual unresolved.
    pub inner_tol: f64,
    pub inner_max_iters: usize,
    pub outer_max_iters: usize,
    /// Outer stop: constraint violation at or below this value.
    pub h_tol: f64,
    pub acyclicity: AcyclicityKind,
    /// Nesterov momentum with restart-on-increase in the inner loop.
    pub use_fista: bool,
    /// Discretization threshold for the returned graph.
    pub threshold_tau: f64,
    /// When set, the covariance of a dataset input is divided by this known
    /// noise variance before solving.
    pub known_sigma2: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 0.0,
            lambda0: 0.0,
            c0: 1.0,
            beta: 5.0,
            gamma: 0.25,
            eta0: 1e-2,
            inner_tol: 1e-6,
            inner_max_iters: 20_000,
            outer_max_iters: 20,
            h_tol: 1e-8,
            acyclicity: AcyclicityKind::default(),
            use_fista: true,
            threshold_tau: 0.3,
            known_sigma2: None,
        }
    }
}

impl SolverConfig {
    /// Penalty weight scaling `0.05 * sqrt(log d / n)` used when a config
    /// does not pin `alpha` explicitly.
    pub fn default_alpha(d: usize, n: usize) -> f64 {
        if d < 2 || n == 0 {
            return 0.0;
        }
        0.05 * ((d as f64).ln() / n as f64).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(msg.to_string()))
            }
        };
        check(self.alpha >= 0.0, "alpha must be non-negative")?;
        check(self.lambda0 >= 0.0, "lambda0 must be non-negative")?;
        check(self.c0 > 0.0, "c0 must be positive")?;
        check(self.beta > 1.0, "beta must exceed one")?;
        check(
            self.gamma > 0.0 && self.gamma < 1.0,
            "gamma must lie in (0, 1)",
        )?;
        check(self.eta0 > 0.0, "eta0 must be positive")?;
        check(self.inner_tol > 0.0, "inner_tol must be positive")?;
        check(self.inner_max_iters > 0, "inner_max_iters must be positive")?;
        check(self.outer_max_iters > 0, "outer_max_iters must be positive")?;
        check(self.h_tol >= 0.0, "h_tol must be non-negative")?;
        check(self.threshold_tau >= 0.0, "threshold_tau must be non-negative")?;
        if let Some(s2) = self.known_sigma2 {
            check(s2 > 0.0, "known_sigma2 must be positive")?;
        }
        if let AcyclicityKind::LogDet { s } = self.acyclicity {
            check(s > 0.0, "log-det scale must be positive")?;
        }
        Ok(())
    }
}

/// Evolving state of the outer loop.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub w: WeightMatrix,
    pub lambda: f64,
    pub c: f64,
    /// Constraint violation after each outer iteration.
    pub h_history: Vec<f64>,
    /// Inner objective value after each outer iteration.
    pub objective_history: Vec<f64>,
    /// Inner iterations consumed by each outer iteration.
    pub inner_iters_used: Vec<usize>,
}

impl SolverState {
    pub fn new(w: WeightMatrix, cfg: &SolverConfig) -> Self {
        Self {
            w,
            lambda: cfg.lambda0,
            c: cfg.c0,
            h_history: Vec::new(),
            objective_history: Vec::new(),
            inner_iters_used: Vec::new(),
        }
    }
}

/// Solver output.
#[derive(Debug, Clone)]
pub struct SolveResult {
    /// Final continuous iterate.
    pub w_raw: WeightMatrix,
    /// Thresholded and, if necessary, cycle-repaired estimate; always a DAG.
    pub w_dag: WeightMatrix,
    /// Whether the constraint tolerance was met within the outer budget.
    pub converged: bool,
    pub final_h: f64,
    pub outer_iters: usize,
    /// Seconds spent in [`solve`].
    pub wall_time: f64,
}

/// What the solver consumes: raw data or a second moment directly.
#[derive(Debug, Clone, Copy)]
pub enum SolveInput<'a> {
    Dataset(&'a Dataset),
    Covariance(&'a Covariance),
}

/// Half-scaled least-squares score with entrywise penalty.
pub fn score(w: &DenseMatrix, cov: &Covariance, alpha: f64) -> Result<f64> {
    check_score_args(w, cov, alpha)?;
    let m = &DenseMatrix::identity(cov.d) - w;
    let quad = 0.5 * m.frob_inner(&cov.sigma.matmul(&m));
    let penalty: f64 = if alpha > 0.0 {
        let mut off_diag = 0.0;
        for i in 0..cov.d {
            for j in 0..cov.d {
                if i != j {
                    off_diag += w.get(i, j);
                }
            }
        }
        alpha * off_diag
    } else {
        0.0
    };
    Ok(quad + penalty)
}

/// Gradient of [`score`]: `Sigma (W - I) + alpha (J - I)` with `J` all ones.
pub fn score_gradient(w: &DenseMatrix, cov: &Covariance, alpha: f64) -> Result<DenseMatrix> {
    check_score_args(w, cov, alpha)?;
    let m = w - &DenseMatrix::identity(cov.d);
    let mut g = cov.sigma.matmul(&m);
    if alpha > 0.0 {
        for i in 0..cov.d {
            for j in 0..cov.d {
                if i != j {
                    g.set(i, j, g.get(i, j) + alpha);
                }
            }
        }
    }
    Ok(g)
}

/// Augmented Lagrangian `F(w) + lambda h(w) + (c/2) h(w)^2`.
///
/// Returns [`Error::OutOfDomain`] when `h` is undefined at `w`.
pub fn augmented_lagrangian(
    w: &DenseMatrix,
    cov: &Covariance,
    cfg: &SolverConfig,
    lambda: f64,
    c: f64,
) -> Result<f64> {
    let h = acyclicity::eval_value(cfg.acyclicity, w)?.ok_or(Error::OutOfDomain)?;
    Ok(score(w, cov, cfg.alpha)? + lambda * h + 0.5 * c * h * h)
}

/// Gradient of [`augmented_lagrangian`]:
/// `score_gradient + (lambda + c h) * grad h`.
pub fn augmented_lagrangian_gradient(
    w: &DenseMatrix,
    cov: &Covariance,
    cfg: &SolverConfig,
    lambda: f64,
    c: f64,
) -> Result<DenseMatrix> {
    let eval = acyclicity::eval(cfg.acyclicity, w)?.ok_or(Error::OutOfDomain)?;
    let mut g = score_gradient(w, cov, cfg.alpha)?;
    g.add_scaled_in_place(&eval.gradient, lambda + c * eval.value);
    Ok(g)
}

/// One inner minimization at the state's current multiplier and penalty.
pub fn inner_solve(
    state: &SolverState,
    cov: &Covariance,
    cfg: &SolverConfig,
) -> Result<WeightMatrix> {
    cfg.validate()?;
    let out = inner_solve_impl(
        state.w.matrix(),
        state.lambda,
        state.c,
        cov,
        cfg,
        cfg.inner_tol,
        None,
    )?;
    Ok(WeightMatrix::from_validated(out.w))
}

struct InnerOutcome {
    w: DenseMatrix,
    iterations: usize,
    objective: f64,
}

fn inner_solve_impl(
    w_init: &DenseMatrix,
    lambda: f64,
    c: f64,
    cov: &Covariance,
    cfg: &SolverConfig,
    tol: f64,
    start_rel: Option<f64>,
) -> Result<InnerOutcome> {
    let objective = |w: &DenseMatrix| -> Result<Option<f64>> {
        match acyclicity::eval_value(cfg.acyclicity, w) {
            Ok(None) => Ok(None),
            Ok(Some(h)) => Ok(Some(score(w, cov, cfg.alpha)? + lambda * h + 0.5 * c * h * h)),
            // Trace-exponential overflow on a wild trial point is a domain
            // exit for line-search purposes, not a hard failure.
            Err(Error::Overflow(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let gradient = |w: &DenseMatrix| -> Result<Option<(f64, f64, DenseMatrix)>> {
        match acyclicity::eval(cfg.acyclicity, w) {
            Ok(None) => Ok(None),
            Ok(Some(eval)) => {
                let l = score(w, cov, cfg.alpha)? + lambda * eval.value
                    + 0.5 * c * eval.value * eval.value;
                let mut g = score_gradient(w, cov, cfg.alpha)?;
                g.add_scaled_in_place(&eval.gradient, lambda + c * eval.value);
                Ok(Some((l, eval.value, g)))
            }
            Err(Error::Overflow(_)) => Ok(None),
            Err(e) => Err(e),
        }
    };

    // Near a minimizer the true decrease per step drops below what f64 can
    // resolve in the objective; a strict comparison would then reject every
    // candidate and stall the line search. Flat-at-resolution candidates
    // are therefore accepted.
    let acceptable = |l_cand: f64, l_current: f64| {
        l_cand <= l_current + 4.0 * f64::EPSILON * (1.0 + l_current.abs())
    };

    // Jacobi scaling. Entry (i, j) multiplies x_i in the reconstruction of
    // x_j, so its curvature in the quadratic term is sigma_ii; dividing the
    // gradient row by it equalizes step lengths across rows whose variances
    // differ by orders of magnitude. The projection stays coordinate-wise
    // under a diagonal metric and the residual is measured unscaled.
    let d = cov.d;
    let mut row_scale = vec![1.0; d];
    for (i, s) in row_scale.iter_mut().enumerate() {
        let v = cov.sigma.get(i, i);
        if v > 0.0 {
            *s = v;
        }
    }
    let step = |from: &DenseMatrix, g: &DenseMatrix, eta: f64| -> DenseMatrix {
        let mut cand = from.clone();
        for i in 0..d {
            let s = eta / row_scale[i];
            let row = &mut cand.data_mut()[i * d..(i + 1) * d];
            let g_row = &g.as_slice()[i * d..(i + 1) * d];
            for (ci, gi) in row.iter_mut().zip(g_row) {
                *ci -= s * gi;
            }
        }
        project(&mut cand);
        cand
    };

    let mut w = w_init.clone();
    project(&mut w);
    let (mut l_w, mut h_w, mut g_w) = gradient(&w)?.ok_or(Error::OutOfDomain)?;
    let mut w_prev = w.clone();
    let mut t: f64 = 1.0;
    let mut eta = cfg.eta0;
    let mut flat_steps = 0usize;
    let mut tol = tol;
    let check_period = if cfg.use_fista { RESIDUAL_PERIOD } else { 1 };

    for iter in 0..cfg.inner_max_iters {
        if iter % check_period == 0 {
            if iter > 0 {
                let (l, h, g) = gradient(&w)?.ok_or(Error::OutOfDomain)?;
                l_w = l;
                h_w = h;
                g_w = g;
            }
            let residual = projected_residual(&w, &g_w);
            if iter == 0 {
                if let Some(rel) = start_rel {
                    tol = tol.max(rel * residual);
                }
            }
            // A point that is already feasible to the outer target and
            // stationary to the configured ceiling is good enough; chasing
            // a tighter residual there only fights rounding noise.
            if residual <= tol || (residual <= cfg.inner_tol && h_w <= cfg.h_tol) {
                return Ok(InnerOutcome {
                    w,
                    iterations: iter,
                    objective: l_w,
                });
            }
        }

        // Momentum attempt: a single trial step from the extrapolated point,
        // falling back to a restart (t = 1) if it leaves the domain or
        // fails to decrease the objective.
        let mut accepted: Option<(DenseMatrix, f64)> = None;
        if cfg.use_fista && iter > 0 {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let momentum = (t - 1.0) / t_next;
            let mut y = w.clone();
            for (yi, (wi, pi)) in y
                .data_mut()
                .iter_mut()
                .zip(w.as_slice().iter().zip(w_prev.as_slice()))
            {
                *yi = wi + momentum * (wi - pi);
            }
            project(&mut y);
            if let Some((_, _, g_y)) = gradient(&y)? {
                let cand = step(&y, &g_y, eta);
                if let Some(l_cand) = objective(&cand)? {
                    if acceptable(l_cand, l_w) {
                        t = t_next;
                        accepted = Some((cand, l_cand));
                    }
                }
            }
            if accepted.is_none() {
                t = 1.0;
            }
        }

        // Plain projected-gradient step from w with a halving line search.
        if accepted.is_none() {
            if cfg.use_fista && iter % check_period != 0 {
                // g_w may be stale in momentum mode; refresh it.
                let (l, _, g) = gradient(&w)?.ok_or(Error::OutOfDomain)?;
                l_w = l;
                g_w = g;
            }
            loop {
                let cand = step(&w, &g_w, eta);
                match objective(&cand)? {
                    Some(l_cand) if acceptable(l_cand, l_w) => {
                        accepted = Some((cand, l_cand));
                        break;
                    }
                    _ => {
                        eta *= 0.5;
                        if eta < ETA_MIN {
                            return Err(Error::LineSearchStall);
                        }
                    }
                }
            }
        }

        let (cand, l_cand) = accepted.expect("a step was accepted");
        if l_cand < l_w - 4.0 * f64::EPSILON * (1.0 + l_w.abs()) {
            flat_steps = 0;
        } else {
            flat_steps += 1;
        }
        w_prev = w;
        w = cand;
        l_w = l_cand;
        eta = (eta * 1.5).min(ETA_MAX);
        // A sustained run of sub-resolution steps means the objective can
        // no longer be decreased in f64; a tighter residual target is not
        // attainable from here, so stop instead of wandering at the floor.
        if flat_steps >= FLAT_LIMIT {
            return Ok(InnerOutcome {
                w,
                iterations: iter + 1,
                objective: l_w,
            });
        }
    }

    Ok(InnerOutcome {
        w,
        iterations: cfg.inner_max_iters,
        objective: l_w,
    })
}

/// Full method-of-multipliers run from the zero matrix.
pub fn solve(input: SolveInput, cfg: &SolverConfig) -> Result<SolveResult> {
    Ok(solve_traced_from(input, cfg, None)?.0)
}

/// As [`solve`], from an explicit initial point.
pub fn solve_from(
    input: SolveInput,
    cfg: &SolverConfig,
    w_init: WeightMatrix,
) -> Result<SolveResult> {
    Ok(solve_traced_from(input, cfg, Some(w_init))?.0)
}

/// As [`solve`], additionally returning the outer-loop trace.
pub fn solve_traced(input: SolveInput, cfg: &SolverConfig) -> Result<(SolveResult, SolverState)> {
    solve_traced_from(input, cfg, None)
}

pub fn solve_traced_from(
    input: SolveInput,
    cfg: &SolverConfig,
    w_init: Option<WeightMatrix>,
) -> Result<(SolveResult, SolverState)> {
    cfg.validate()?;
    let start = Instant::now();
    let cov = prepare_covariance(input, cfg)?;
    let d = cov.d;

    let w_init = match w_init {
        Some(w) => {
            if w.d() != d {
                return Err(Error::dimension(
                    format!("{d}x{d} initial point"),
                    format!("{0}x{0}", w.d()),
                ));
            }
            w
        }
        None => WeightMatrix::zeros(d),
    };
    let mut h_prev = acyclicity::eval_value(cfg.acyclicity, w_init.matrix())?
        .ok_or(Error::OutOfDomain)?;

    let mut state = SolverState::new(w_init, cfg);
    let mut converged = false;
    for _ in 0..cfg.outer_max_iters {
        // Inexact-subproblem rule: while the violation is large the
        // subproblem is solved only tightly enough to support the next
        // multiplier update; the target shrinks with the violation until
        // the configured tolerance takes over. A zero violation only
        // occurs before the first round, where the multipliers carry no
        // information yet and a loose solve is all that is useful.
        let loose = INNER_TOL_CEILING.max(cfg.inner_tol);
        let (tol, start_rel) = if h_prev > 0.0 {
            ((0.3 * h_prev).clamp(cfg.inner_tol, loose), None)
        } else {
            (loose, Some(FIRST_ROUND_DROP))
        };
        let out =
            inner_solve_impl(state.w.matrix(), state.lambda, state.c, &cov, cfg, tol, start_rel)?;
        let mut h = acyclicity::eval_value(cfg.acyclicity, &out.w)?.ok_or(Error::OutOfDomain)?;
        state.w = WeightMatrix::from_validated(out.w);
        // Identification step: once the violation is near tolerance the
        // acyclic support is usually decided, and the exact face minimum
        // satisfies the constraint outright. Accepting it (only on strict
        // improvement) finishes the run without waiting for the penalty
        // to grind the remaining violation below the tolerance, which on
        // hard instances costs many more rounds of multiplier growth.
        if h > 0.0 && h <= 10.0 * cfg.h_tol {
            if let Some(p) = polish_attempt(&state, &cov, cfg, false)? {
                state.w = p;
                h = 0.0;
            }
        }
        state.h_history.push(h);
        state.objective_history.push(out.objective);
        state.inner_iters_used.push(out.iterations);

        state.lambda += state.c * h;
        if h > cfg.gamma * h_prev {
            state.c *= cfg.beta;
        }
        h_prev = h;
        if h <= cfg.h_tol {
            converged = true;
            break;
        }
    }

    if converged {
        // Terminal refinement; resolution slack so a face minimum that ties
        // the iterate is still preferred. Re-polishing an already polished
        // point reproduces it.
        if let Some(p) = polish_attempt(&state, &cov, cfg, true)? {
            state.w = p;
        }
    } else if let Some(p) = polish_attempt(&state, &cov, cfg, false)? {
        // The budget ran out short of tolerance, but the support the loop
        // settled on admits an exact face minimum no worse than the final
        // iterate; on that face the constraint holds exactly, so the run
        // did converge after all.
        state.w = p;
        converged = true;
    }
    let final_h =
        acyclicity::eval_value(cfg.acyclicity, state.w.matrix())?.ok_or(Error::OutOfDomain)?;
    let thresholded = state.w.threshold_support(cfg.threshold_tau);
    let w_dag = if thresholded.is_acyclic() {
        thresholded
    } else {
        graphs::make_acyclic_greedy(&thresholded)
    };
    debug_assert!(w_dag.is_acyclic());

    let result = SolveResult {
        w_raw: state.w.clone(),
        w_dag,
        converged,
        final_h,
        outer_iters: state.h_history.len(),
        wall_time: start.elapsed().as_secs_f64(),
    };
    Ok((result, state))
}

/// Proposes the exact face minimum for the iterate's identified support.
///
/// Entries at or below `h_tol` are leftover constraint debris at the exit
/// violation level, not identified support; they are dropped, any debris
/// cycle that remains is broken at its lightest edge, and the resulting
/// face is refined. The augmented-objective comparison at the current
/// multipliers rejects the proposal whenever these support decisions were
/// wrong; `slack` widens the acceptance by the f64 resolution of the
/// objective for use at points already at tolerance.
fn polish_attempt(
    state: &SolverState,
    cov: &Covariance,
    cfg: &SolverConfig,
    slack: bool,
) -> Result<Option<WeightMatrix>> {
    let mut floored = state.w.matrix().clone();
    for v in floored.data_mut() {
        if *v <= cfg.h_tol {
            *v = 0.0;
        }
    }
    let mut pattern = WeightMatrix::from_validated(floored);
    if !pattern.is_acyclic() {
        pattern = graphs::make_acyclic_greedy(&pattern);
    }
    let mut polished = pattern.matrix().clone();
    polish_on_support(&mut polished, cov, cfg.alpha);
    let before = augmented_lagrangian(state.w.matrix(), cov, cfg, state.lambda, state.c)?;
    let after = augmented_lagrangian(&polished, cov, cfg, state.lambda, state.c)?;
    let bound = if slack {
        before + 4.0 * f64::EPSILON * (1.0 + before.abs())
    } else {
        before
    };
    if after <= bound {
        Ok(Some(WeightMatrix::from_validated(polished)))
    } else {
        Ok(None)
    }
}

/// Active-set refinement for the returned point. On an acyclic support
/// every cycle term of the constraint vanishes identically, so the
/// augmented objective restricts to the quadratic score and the exact face
/// minimum is one small linear solve per column. Iterated entries sit at
/// this minimum only up to the line search's f64 resolution; the solve
/// removes that residual.
///
/// Entries whose exact face optimum is not strictly positive are released
/// to the cone boundary and the face is re-solved on the rest, so falsely
/// retained near-zero entries get cleaned up too. Columns whose systems
/// fail to solve keep their iterated values.
fn polish_on_support(w: &mut DenseMatrix, cov: &Covariance, alpha: f64) {
    let d = w.rows();
    for j in 0..d {
        let original: Vec<usize> = (0..d).filter(|&i| i != j && w.get(i, j) > 0.0).collect();
        if original.is_empty() {
            continue;
        }
        let mut active = original.clone();
        let mut solved: Option<Vec<f64>> = None;
        let mut solvable = true;
        while !active.is_empty() {
            let k = active.len();
            let sub = DenseMatrix::from_fn(k, k, |a, b| cov.sigma.get(active[a], active[b]));
            let rhs: Vec<f64> = active.iter().map(|&i| cov.sigma.get(i, j) - alpha).collect();
            match crate::linalg::solve_system(&sub, &rhs) {
                Ok(sol) if sol.iter().all(|&v| v > 0.0) => {
                    solved = Some(sol);
                    break;
                }
                Ok(sol) => {
                    active = active
                        .iter()
                        .zip(&sol)
                        .filter(|&(_, &v)| v > 0.0)
                        .map(|(&i, _)| i)
                        .collect();
                }
                Err(_) => {
                    solvable = false;
                    break;
                }
            }
        }
        if !solvable {
            continue;
        }
        for &i in &original {
            w.set(i, j, 0.0);
        }
        if let Some(sol) = solved {
            for (a, &i) in active.iter().enumerate() {
                w.set(i, j, sol[a]);
            }
        }
    }
}

fn prepare_covariance(input: SolveInput, cfg: &SolverConfig) -> Result<Covariance> {
    match input {
        SolveInput::Dataset(ds) => {
            let cov = sample_covariance(ds)?;
            match cfg.known_sigma2 {
                Some(s2) => cov.whitened(s2),
                None => Ok(cov),
            }
        }
        SolveInput::Covariance(cov) => Ok(cov.clone()),
    }
}

/// Projection onto `{W >= 0, diag W = 0}`, in place.
fn project(w: &mut DenseMatrix) {
    let d = w.rows();
    for (idx, v) in w.data_mut().iter_mut().enumerate() {
        if *v < 0.0 || idx % (d + 1) == 0 {
            *v = 0.0;
        }
    }
}

/// Unit-step projected-gradient gap `||w - P(w - g)||_F`.
fn projected_residual(w: &DenseMatrix, g: &DenseMatrix) -> f64 {
    let d = w.rows();
    let mut acc = 0.0;
    for (idx, (wi, gi)) in w.as_slice().iter().zip(g.as_slice()).enumerate() {
        let stepped = if idx % (d + 1) == 0 {
            0.0
        } else {
            (wi - gi).max(0.0)
        };
        let gap = wi - stepped;
        acc += gap * gap;
    }
    acc.sqrt()
}

fn check_score_args(w: &DenseMatrix, cov: &Covariance, alpha: f64) -> Result<()> {
    if !w.is_square() || w.rows() != cov.d {
        return Err(Error::dimension(
            format!("{0}x{0} weight matrix", cov.d),
            format!("{}x{}", w.rows(), w.cols()),
        ));
    }
    if alpha < 0.0 {
        return Err(Error::Config(format!(
            "penalty weight must be non-negative, got {alpha}"
        )));
    }
    Ok(())
}

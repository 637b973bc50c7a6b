//! Störmer-Verlet baselines and their Yoshida compositions.
//!
//! Separable problems use kick-drift-kick. Non-separable problems use the generalized
//! (semi-implicit) Störmer-Verlet map; its two implicit relations are solved by plain
//! fixed-point iteration so that iteration counts compare with the structural solver.

use std::fmt;

use thiserror::Error;

use crate::blocksolver::{default_decimation, Observer, Recorder, RunStats, Trajectory};
use crate::numerics::{BodySpace, Scalar};
use crate::problems::{Hamiltonian, ProblemError};

/// Implicit sub-step of the non-separable map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Substep {
    /// `P½ = P + h/2 dp(X, P½)`
    HalfKick,
    /// `X' = X + h/2 (dx(X, P½) + dx(X', P½))`
    Drift,
}

impl fmt::Display for Substep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Substep::HalfKick => "half-kick",
            Substep::Drift => "drift",
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SvError {
    #[error("unsupported composition order {0} (expected 2, 4, 6 or 8)")]
    Order(usize),
    #[error("{substep} fixed point did not converge at step {step}: residual {residual:.3e}")]
    NonConvergence { step: usize, substep: Substep, residual: f64 },
    #[error("divergence at step {step}: non-finite state")]
    Divergence { step: usize },
    #[error("problem evaluation failed at step {step}: {source}")]
    Problem { step: usize, source: ProblemError },
    #[error("invalid configuration: {0}")]
    Config(String),
}

/// Sub-step fractions of a composed scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionSchedule<S> {
    pub order: usize,
    pub gammas: Vec<S>,
}

/// Triple-jump schedule: order `2k+2` from order `2k` with
/// `g1 = g3 = 1/(2 - 2^(1/(2k+1)))`, `g2 = 1 - 2 g1`.
pub fn yoshida_schedule<S: Scalar>(order: usize) -> Result<CompositionSchedule<S>, SvError> {
    if !matches!(order, 2 | 4 | 6 | 8) {
        return Err(SvError::Order(order));
    }
    let mut gammas = vec![S::one()];
    for k in 1..order / 2 {
        let q = 2 * k + 1;
        let root = nth_root_of_two::<S>(q as i32);
        let g1 = S::one() / (S::from_f64(2.0) - root);
        let g2 = S::one() - S::from_f64(2.0) * g1;
        // the whole lower-order scheme is jumped as a unit
        gammas = [g1, g2, g1]
            .iter()
            .flat_map(|&c| gammas.iter().map(move |&g| c * g))
            .collect();
    }
    Ok(CompositionSchedule { order, gammas })
}

/// `2^(1/q)` by Newton's method from the double-precision guess.
fn nth_root_of_two<S: Scalar>(q: i32) -> S {
    let two = S::from_f64(2.0);
    let mut y = S::from_f64(2f64.powf(1.0 / q as f64));
    for _ in 0..3 {
        y -= (y.powi(q) - two) / (S::from_i(q as i64) * y.powi(q - 1));
    }
    y
}

/// Work done by one step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SvCounts {
    /// Fixed-point iterations over both implicit relations.
    pub iterations: usize,
    /// Evaluations of the first-derivative map.
    pub calls: usize,
}

impl SvCounts {
    fn add(&mut self, o: SvCounts) {
        self.iterations += o.iterations;
        self.calls += o.calls;
    }
}

fn rhs<S: Scalar, P: Hamiltonian<S> + ?Sized>(
    problem: &P,
    x: &BodySpace<S>,
    p: &BodySpace<S>,
) -> Result<(BodySpace<S>, BodySpace<S>), SvError> {
    let mut dx = BodySpace::zeros(x.dim(), x.bodies());
    let mut dp = dx.clone();
    problem
        .first_rhs(x, p, &mut dx, &mut dp)
        .map_err(|source| SvError::Problem { step: 0, source })?;
    Ok((dx, dp))
}

/// Kick-drift-kick. Valid only for `H = T(P) + V(X)`.
pub fn sv_step_separable<S: Scalar, P: Hamiltonian<S> + ?Sized>(
    problem: &P,
    x: &BodySpace<S>,
    p: &BodySpace<S>,
    dt: S,
) -> Result<(BodySpace<S>, BodySpace<S>), SvError> {
    let half = S::from_f64(0.5) * dt;
    let (_, dp) = rhs(problem, x, p)?;
    let mut ph = p.clone();
    ph.axpy(half, &dp);
    let (dx, _) = rhs(problem, x, &ph)?;
    let mut xn = x.clone();
    xn.axpy(dt, &dx);
    let (_, dp) = rhs(problem, &xn, &ph)?;
    let mut pn = ph;
    pn.axpy(half, &dp);
    Ok((xn, pn))
}

/// Generalized Störmer-Verlet step for arbitrary `H(X, P)`.
///
/// Each implicit relation iterates until the update is below `tol * max(1, |iterate|)`,
/// so large states are not held to an absolute threshold below their rounding level.
pub fn sv_step_nonseparable<S: Scalar, P: Hamiltonian<S> + ?Sized>(
    problem: &P,
    x: &BodySpace<S>,
    p: &BodySpace<S>,
    dt: S,
    tol: f64,
    max_iter: usize,
) -> Result<(BodySpace<S>, BodySpace<S>, SvCounts), SvError> {
    let half = S::from_f64(0.5) * dt;
    let mut counts = SvCounts::default();

    let (_, dp) = rhs(problem, x, p)?;
    counts.calls += 1;
    let mut ph = p.clone();
    ph.axpy(half, &dp);
    let mut converged = false;
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let (_, dp) = rhs(problem, x, &ph)?;
        counts.calls += 1;
        counts.iterations += 1;
        let mut next = p.clone();
        next.axpy(half, &dp);
        residual = next.max_diff(&ph).to_f64();
        let scale = next.max_norm().to_f64().max(1.0);
        ph = next;
        if !residual.is_finite() {
            return Err(SvError::Divergence { step: 0 });
        }
        if residual <= tol * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SvError::NonConvergence { step: 0, substep: Substep::HalfKick, residual });
    }

    let (dx0, _) = rhs(problem, x, &ph)?;
    counts.calls += 1;
    let mut xn = x.clone();
    xn.axpy(dt, &dx0);
    converged = false;
    for _ in 0..max_iter {
        let (dx1, _) = rhs(problem, &xn, &ph)?;
        counts.calls += 1;
        counts.iterations += 1;
        let mut next = x.clone();
        next.axpy(half, &dx0);
        next.axpy(half, &dx1);
        residual = next.max_diff(&xn).to_f64();
        let scale = next.max_norm().to_f64().max(1.0);
        xn = next;
        if !residual.is_finite() {
            return Err(SvError::Divergence { step: 0 });
        }
        if residual <= tol * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(SvError::NonConvergence { step: 0, substep: Substep::Drift, residual });
    }

    let (_, dp) = rhs(problem, &xn, &ph)?;
    counts.calls += 1;
    let mut pn = ph;
    pn.axpy(half, &dp);
    Ok((xn, pn, counts))
}

/// One composed step: the schedule's sub-steps applied in order.
pub fn sv_step<S: Scalar, P: Hamiltonian<S> + ?Sized>(
    problem: &P,
    schedule: &CompositionSchedule<S>,
    x: &BodySpace<S>,
    p: &BodySpace<S>,
    dt: S,
    tol: f64,
    max_iter: usize,
) -> Result<(BodySpace<S>, BodySpace<S>, SvCounts), SvError> {
    let mut counts = SvCounts::default();
    let (mut x, mut p) = (x.clone(), p.clone());
    for &g in &schedule.gammas {
        let h = g * dt;
        if problem.is_separable() {
            (x, p) = sv_step_separable(problem, &x, &p, h)?;
            counts.add(SvCounts { iterations: 0, calls: 3 });
        } else {
            let (xn, pn, c) = sv_step_nonseparable(problem, &x, &p, h, tol, max_iter)?;
            (x, p) = (xn, pn);
            counts.add(c);
        }
    }
    Ok((x, p, counts))
}

fn at_step(e: SvError, step: usize) -> SvError {
    match e {
        SvError::NonConvergence { substep, residual, .. } => SvError::NonConvergence { step, substep, residual },
        SvError::Divergence { .. } => SvError::Divergence { step },
        SvError::Problem { source, .. } => SvError::Problem { step, source },
        other => other,
    }
}

/// Integrates over `[0, T]` with `N` composed steps.
///
/// Stats use the structural solver's layout with one step per "block":
/// `total_iter` counts fixed-point iterations and `pe1_calls` right-hand-side evaluations.
#[allow(clippy::too_many_arguments)]
pub fn integrate_sv<S: Scalar, P: Hamiltonian<S> + ?Sized>(
    problem: &P,
    order: usize,
    n: usize,
    t_final: S,
    tol: f64,
    max_iter: usize,
    decimation: Option<usize>,
    observer: &mut dyn Observer<S>,
) -> Result<Trajectory<S>, SvError> {
    let schedule = yoshida_schedule::<S>(order)?;
    if n == 0 {
        return Err(SvError::Config("need N >= 1".into()));
    }
    if !(t_final.to_f64() > 0.0) || !(tol > 0.0) || max_iter == 0 {
        return Err(SvError::Config(format!(
            "need T > 0, tol > 0 and max_iter >= 1 (T={t_final}, tol={tol}, max_iter={max_iter})"
        )));
    }
    let dt = t_final / S::from_i(n as i64);
    let (mut x, mut p) = problem.initial_state();
    let mut rec = Recorder::new(decimation.unwrap_or_else(|| default_decimation(n)), n);
    let mut stats = RunStats::default();
    observer.on_node(0, S::zero(), &x, &p);
    rec.offer(0, S::zero(), &x, &p);
    for step in 1..=n {
        let (xn, pn, c) = sv_step(problem, &schedule, &x, &p, dt, tol, max_iter).map_err(|e| at_step(e, step))?;
        if !(xn.is_finite() && pn.is_finite()) {
            return Err(SvError::Divergence { step });
        }
        (x, p) = (xn, pn);
        stats.total_iter += c.iterations;
        stats.pe1_calls += c.calls;
        stats.blocks += 1;
        let t = S::from_i(step as i64) * dt;
        observer.on_node(step, t, &x, &p);
        rec.offer(step, t, &x, &p);
    }
    Ok(Trajectory { dt, n, nodes: rec.nodes, decimation: rec.stride, stats })
}

//! Block fixed-point solver for the ZD and ZDS schemes.
//!
//! One block advances `R` steps. The unknowns are the values `Z` and derivatives `D`
//! (and `S`) of both `x` and `p` at the `R` new nodes. A sweep first applies the
//! structural equations (new `Z` from the current `D`, `S`) and then the physical
//! equations (new `D`, `S` from the new `Z`), until the `Z` block stops moving.

use thiserror::Error;

use crate::numerics::{BodySpace, Scalar};
use crate::problems::{Hamiltonian, ProblemError};
use crate::secoeff::{self, CoeffError, CoeffTable, Formulation};

/// Growth factor of the block norm between sweeps treated as divergence.
const GROWTH_LIMIT: f64 = 1e6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("fixed point did not converge at step {step}: residual {residual:.3e} after {iterations} sweeps")]
    NonConvergence { step: usize, residual: f64, iterations: usize },
    #[error("divergence at step {step}: {reason}")]
    Divergence { step: usize, reason: String },
    #[error("problem evaluation failed at step {step}: {source}")]
    Problem { step: usize, source: ProblemError },
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl SolverError {
    /// Shifts block-relative step indices to global ones.
    fn offset(self, base: usize) -> Self {
        match self {
            Self::NonConvergence { step, residual, iterations } => {
                Self::NonConvergence { step: step + base, residual, iterations }
            }
            Self::Divergence { step, reason } => Self::Divergence { step: step + base, reason },
            Self::Problem { step, source } => Self::Problem { step: step + base, source },
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Absolute threshold on the max-norm change of the `Zx` and `Zp` blocks between sweeps.
    pub tol: f64,
    pub max_iter: usize,
    /// Keep the last iterate when `max_iter` is reached instead of failing.
    pub accept_unconverged: bool,
}

impl SolverConfig {
    pub fn for_backend<S: Scalar>() -> Self {
        Self { tol: S::PRECISION.default_tol(), max_iter: 200, accept_unconverged: false }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(SolverError::Config(format!(
                "tol must be positive and max_iter at least 1 (tol={}, max_iter={})",
                self.tol, self.max_iter
            )));
        }
        Ok(())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-14, max_iter: 200, accept_unconverged: false }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IterStats {
    /// Fixed-point sweeps, not counting initialization.
    pub iterations: usize,
    pub pe1_calls: usize,
    pub pe2_calls: usize,
    /// False when the block hit `max_iter` and was accepted anyway.
    pub converged: bool,
}

/// Values and derivatives of `x` and `p` at one node. `sx`, `sp` are unused under ZD.
#[derive(Clone, Debug, PartialEq)]
pub struct Node<S> {
    pub zx: BodySpace<S>,
    pub zp: BodySpace<S>,
    pub dx: BodySpace<S>,
    pub dp: BodySpace<S>,
    pub sx: BodySpace<S>,
    pub sp: BodySpace<S>,
}

impl<S: Scalar> Node<S> {
    pub fn zeros(dim: usize, bodies: usize) -> Self {
        let z = BodySpace::zeros(dim, bodies);
        Self { zx: z.clone(), zp: z.clone(), dx: z.clone(), dp: z.clone(), sx: z.clone(), sp: z }
    }

    /// Node at `(x, p)` with derivatives from the physical equations.
    pub fn at<P: Hamiltonian<S> + ?Sized>(
        problem: &P,
        formulation: Formulation,
        x: BodySpace<S>,
        p: BodySpace<S>,
    ) -> Result<Self, ProblemError> {
        let (dim, k) = x.shape();
        let mut n = Self::zeros(dim, k);
        n.zx = x;
        n.zp = p;
        n.refresh(problem, formulation)?;
        Ok(n)
    }

    /// Recomputes `D` (and `S`) from `Z`.
    fn refresh<P: Hamiltonian<S> + ?Sized>(
        &mut self,
        problem: &P,
        formulation: Formulation,
    ) -> Result<(), ProblemError> {
        problem.first_rhs(&self.zx, &self.zp, &mut self.dx, &mut self.dp)?;
        if formulation == Formulation::Zds {
            problem.second_rhs(&self.zx, &self.zp, &self.dx, &self.dp, &mut self.sx, &mut self.sp)?;
        }
        Ok(())
    }

    fn is_finite(&self) -> bool {
        self.zx.is_finite()
            && self.zp.is_finite()
            && self.dx.is_finite()
            && self.dp.is_finite()
            && self.sx.is_finite()
            && self.sp.is_finite()
    }
}

/// Anchor node `n` and the `R` block nodes `n+1..=n+R`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockState<S> {
    pub anchor: Node<S>,
    pub nodes: Vec<Node<S>>,
}

impl<S: Scalar> BlockState<S> {
    pub fn r(&self) -> usize {
        self.nodes.len()
    }

    fn z_norm(&self) -> S {
        self.nodes
            .iter()
            .fold(S::zero(), |m, n| m.max(n.zx.max_norm()).max(n.zp.max_norm()))
    }
}

/// Taylor predictor, node by node, with the physical equations evaluated at each new node.
pub fn init_block<S: Scalar, P: Hamiltonian<S> + ?Sized>(
    anchor: &Node<S>,
    problem: &P,
    table: &CoeffTable<S>,
) -> Result<(BlockState<S>, IterStats), SolverError> {
    let dt = table.dt;
    let half_dt2 = S::from_f64(0.5) * dt * dt;
    let zds = table.formulation == Formulation::Zds;
    let mut nodes: Vec<Node<S>> = Vec::with_capacity(table.r);
    for r in 1..=table.r {
        let prev = nodes.last().unwrap_or(anchor);
        let mut zx = prev.zx.clone();
        zx.axpy(dt, &prev.dx);
        let mut zp = prev.zp.clone();
        zp.axpy(dt, &prev.dp);
        if zds {
            zx.axpy(half_dt2, &prev.sx);
            zp.axpy(half_dt2, &prev.sp);
        }
        if !(zx.is_finite() && zp.is_finite()) {
            return Err(SolverError::Divergence { step: r, reason: "non-finite predictor".into() });
        }
        let node = Node::at(problem, table.formulation, zx, zp)
            .map_err(|source| SolverError::Problem { step: r, source })?;
        nodes.push(node);
    }
    let calls = table.r;
    let stats = IterStats { iterations: 0, pe1_calls: calls, pe2_calls: if zds { calls } else { 0 }, converged: false };
    Ok((BlockState { anchor: anchor.clone(), nodes }, stats))
}

/// New `Z` blocks for `x` and `p` from the structural equations:
/// `Z = -(b_z Z_n + b_d D_n + b_s S_n + B_d D + B_s S)`.
pub fn se_update<S: Scalar>(
    table: &CoeffTable<S>,
    state: &BlockState<S>,
) -> (Vec<BodySpace<S>>, Vec<BodySpace<S>>) {
    let mut work = state.clone();
    let mut scratch = BodySpace::zeros(state.anchor.zx.dim(), state.anchor.zx.bodies());
    se_update_in_place(table, &mut work, &mut scratch);
    work.nodes.into_iter().map(|n| (n.zx, n.zp)).unzip()
}

/// In-place variant of [`se_update`]; returns the max-norm change over both `Zx` and `Zp`.
///
/// Watching `Zx` alone can stop early: with the Taylor predictor a ZD R=1 block on a
/// linear problem repeats its `Zx` value on the second sweep while `Zp` still moves.
fn se_update_in_place<S: Scalar>(table: &CoeffTable<S>, state: &mut BlockState<S>, scratch: &mut BodySpace<S>) -> S {
    let zds = table.formulation == Formulation::Zds;
    let r_max = table.r;
    // new Z values depend only on D and S, which this pass does not touch
    let mut diff = S::zero();
    let mut new_zx = Vec::with_capacity(r_max);
    let mut new_zp = Vec::with_capacity(r_max);
    for m in 0..r_max {
        for is_x in [true, false] {
            scratch.fill(S::zero());
            for r in 0..r_max {
                let n = &state.nodes[r];
                let (d, s) = if is_x { (&n.dx, &n.sx) } else { (&n.dp, &n.sp) };
                scratch.axpy(table.bd(m, r), d);
                if zds {
                    scratch.axpy(table.bs(m, r), s);
                }
            }
            let a = &state.anchor;
            let (z0, d0, s0) = if is_x { (&a.zx, &a.dx, &a.sx) } else { (&a.zp, &a.dp, &a.sp) };
            scratch.axpy(table.b_d[m], d0);
            if zds {
                scratch.axpy(table.b_s[m], s0);
            }
            scratch.axpy(table.b_z[m], z0);
            scratch.scale(-S::one());
            if is_x {
                diff = diff.max(scratch.max_diff(&state.nodes[m].zx));
                new_zx.push(scratch.clone());
            } else {
                diff = diff.max(scratch.max_diff(&state.nodes[m].zp));
                new_zp.push(scratch.clone());
            }
        }
    }
    for (n, (zx, zp)) in state.nodes.iter_mut().zip(new_zx.into_iter().zip(new_zp)) {
        n.zx = zx;
        n.zp = zp;
    }
    diff
}

/// Refreshes every block node's derivatives from its `Z` values; returns the number of
/// node evaluations.
pub fn pe_update<S: Scalar, P: Hamiltonian<S> + ?Sized>(
    problem: &P,
    formulation: Formulation,
    state: &mut BlockState<S>,
) -> Result<usize, SolverError> {
    for (r, node) in state.nodes.iter_mut().enumerate() {
        node.refresh(problem, formulation)
            .map_err(|source| SolverError::Problem { step: r + 1, source })?;
    }
    Ok(state.nodes.len())
}

/// Solves one block to the fixed point.
pub fn solve_block<S: Scalar, P: Hamiltonian<S> + ?Sized>(
    anchor: &Node<S>,
    problem: &P,
    table: &CoeffTable<S>,
    config: &SolverConfig,
) -> Result<(BlockState<S>, IterStats), SolverError> {
    let zds = table.formulation == Formulation::Zds;
    let (mut state, mut stats) = init_block(anchor, problem, table)?;
    let (dim, k) = anchor.zx.shape();
    let mut scratch = BodySpace::zeros(dim, k);
    let floor = anchor.zx.max_norm().max(anchor.zp.max_norm()).to_f64().max(f64::MIN_POSITIVE);
    let mut prev_norm = state.z_norm().to_f64().max(floor);
    let mut residual = f64::INFINITY;
    for sweep in 1..=config.max_iter {
        let diff = se_update_in_place(table, &mut state, &mut scratch);
        residual = diff.to_f64();
        let norm = state.z_norm().to_f64();
        if !residual.is_finite() || !norm.is_finite() {
            return Err(SolverError::Divergence { step: table.r, reason: format!("non-finite block after sweep {sweep}") });
        }
        if norm > GROWTH_LIMIT * prev_norm {
            return Err(SolverError::Divergence {
                step: table.r,
                reason: format!("block norm grew from {prev_norm:.3e} to {norm:.3e} in sweep {sweep}"),
            });
        }
        prev_norm = norm.max(floor);
        pe_update(problem, table.formulation, &mut state)?;
        stats.iterations = sweep;
        stats.pe1_calls += table.r;
        if zds {
            stats.pe2_calls += table.r;
        }
        if state.nodes.iter().any(|n| !n.is_finite()) {
            return Err(SolverError::Divergence { step: table.r, reason: format!("non-finite derivatives after sweep {sweep}") });
        }
        if residual <= config.tol {
            stats.converged = true;
            return Ok((state, stats));
        }
    }
    if config.accept_unconverged {
        log::debug!("accepting unconverged block, residual {residual:.3e}");
        return Ok((state, stats));
    }
    Err(SolverError::NonConvergence { step: table.r, residual, iterations: config.max_iter })
}

/// Receives accepted nodes in increasing time order.
pub trait Observer<S> {
    fn on_node(&mut self, _step: usize, _t: S, _x: &BodySpace<S>, _p: &BodySpace<S>) {}
    fn on_block(&mut self, _stats: &IterStats) {}
}

/// Observer that ignores everything.
pub struct NoObserver;

impl<S> Observer<S> for NoObserver {}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryNode<S> {
    pub step: usize,
    pub t: S,
    pub x: BodySpace<S>,
    pub p: BodySpace<S>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunStats {
    pub total_iter: usize,
    pub pe1_calls: usize,
    pub pe2_calls: usize,
    pub blocks: usize,
    /// Blocks accepted without meeting the tolerance.
    pub unconverged: usize,
}

impl RunStats {
    pub fn absorb(&mut self, o: &IterStats) {
        self.total_iter += o.iterations;
        self.pe1_calls += o.pe1_calls;
        self.pe2_calls += o.pe2_calls;
        self.blocks += 1;
        self.unconverged += usize::from(!o.converged);
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory<S> {
    pub dt: S,
    pub n: usize,
    /// Stored nodes, every `decimation`-th step plus the last one.
    pub nodes: Vec<TrajectoryNode<S>>,
    pub decimation: usize,
    pub stats: RunStats,
}

/// Default storage stride: every node up to 10^5 steps, then thinned to about 10^5.
pub fn default_decimation(n: usize) -> usize {
    if n <= 100_000 {
        1
    } else {
        n.div_ceil(100_000)
    }
}

#[derive(Clone, Debug)]
pub struct IntegrateOptions {
    pub config: SolverConfig,
    /// `None` selects [`default_decimation`].
    pub decimation: Option<usize>,
    /// Apply the problem's manifold projection to each accepted node.
    pub project: bool,
}

impl IntegrateOptions {
    pub fn new(config: SolverConfig) -> Self {
        Self { config, decimation: None, project: false }
    }
}

pub(crate) struct Recorder<S> {
    pub nodes: Vec<TrajectoryNode<S>>,
    pub stride: usize,
    pub last: usize,
}

impl<S: Scalar> Recorder<S> {
    pub fn new(stride: usize, last: usize) -> Self {
        Self { nodes: Vec::new(), stride: stride.max(1), last }
    }

    pub fn offer(&mut self, step: usize, t: S, x: &BodySpace<S>, p: &BodySpace<S>) {
        if step % self.stride == 0 || step == self.last {
            self.nodes.push(TrajectoryNode { step, t, x: x.clone(), p: p.clone() });
        }
    }
}

/// Integrates over `[0, T]` with `N` steps of size `T/N`, `R` steps per block.
pub fn integrate<S: Scalar, P: Hamiltonian<S> + ?Sized>(
    problem: &P,
    formulation: Formulation,
    r: usize,
    n: usize,
    t_final: S,
    options: &IntegrateOptions,
    observer: &mut dyn Observer<S>,
) -> Result<Trajectory<S>, SolverError> {
    options.config.validate()?;
    if n == 0 || r == 0 {
        return Err(SolverError::Config(format!("need N >= 1 and R >= 1 (N={n}, R={r})")));
    }
    if n < r {
        return Err(SolverError::Config(format!("N={n} smaller than block size R={r}")));
    }
    if !(t_final.to_f64() > 0.0) {
        return Err(SolverError::Config(format!("final time must be positive, got {t_final}")));
    }
    let dt = t_final / S::from_i(n as i64);
    let table = secoeff::table(r, formulation, dt)?;
    let tail = n % r;
    let tail_table = if tail > 0 { Some(secoeff::table(tail, formulation, dt)?) } else { None };

    let (x0, p0) = problem.initial_state();
    let mut anchor = Node::at(problem, formulation, x0, p0)
        .map_err(|source| SolverError::Problem { step: 0, source })?;
    let mut stats = RunStats { pe1_calls: 1, pe2_calls: usize::from(formulation == Formulation::Zds), ..Default::default() };
    let mut rec = Recorder::new(options.decimation.unwrap_or_else(|| default_decimation(n)), n);
    observer.on_node(0, S::zero(), &anchor.zx, &anchor.zp);
    rec.offer(0, S::zero(), &anchor.zx, &anchor.zp);

    let mut base = 0;
    while base < n {
        let tbl = if n - base >= r { &table } else { tail_table.as_ref().expect("tail table") };
        let (mut block, bstats) =
            solve_block(&anchor, problem, tbl, &options.config).map_err(|e| e.offset(base))?;
        observer.on_block(&bstats);
        stats.absorb(&bstats);
        if options.project {
            for node in block.nodes.iter_mut() {
                problem.project(&mut node.zx, &mut node.zp);
            }
        }
        for (i, node) in block.nodes.iter().enumerate() {
            let step = base + i + 1;
            let t = S::from_i(step as i64) * dt;
            observer.on_node(step, t, &node.zx, &node.zp);
            rec.offer(step, t, &node.zx, &node.zp);
        }
        let mut last = block.nodes.pop().expect("non-empty block");
        if options.project {
            last.refresh(problem, formulation)
                .map_err(|source| SolverError::Problem { step: base + tbl.r, source })?;
            stats.pe1_calls += 1;
            if formulation == Formulation::Zds {
                stats.pe2_calls += 1;
            }
        }
        anchor = last;
        base += tbl.r;
    }
    Ok(Trajectory { dt, n, nodes: rec.nodes, decimation: rec.stride, stats })
}

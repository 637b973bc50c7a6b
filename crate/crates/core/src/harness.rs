//! Runs, error measurement, convergence orders and CSV output.
//!
//! Errors follow the usual benchmark conventions: the position error is the max-norm
//! distance to the exact trajectory over the sampled nodes (or to a tabulated endpoint
//! when only that is known), and each invariant error is the largest deviation from
//! its initial value. Everything is streamed, so decimation never changes a maximum.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{integrate_sv, SvError};
use crate::blocksolver::{integrate, IntegrateOptions, IterStats, Observer, RunStats, SolverConfig, SolverError};
use crate::numerics::{BodySpace, DoubleDouble, Precision, Scalar};
use crate::problems::{by_name, Hamiltonian, InvariantKind, ProblemError, CATALOG};
use crate::secoeff::{self, CoeffError, Formulation, MAX_R};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{config}: {source}")]
    Solver { config: String, source: SolverError },
    #[error("{config}: {source}")]
    Baseline { config: String, source: SvError },
    #[error("{config}: {source}")]
    Problem { config: String, source: ProblemError },
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// True for errors caused by the request rather than by the computation.
    pub fn is_config(&self) -> bool {
        match self {
            HarnessError::Config(_) | HarnessError::Coeff(_) => true,
            HarnessError::Solver { source, .. } => matches!(source, SolverError::Config(_) | SolverError::Coeff(_)),
            HarnessError::Baseline { source, .. } => matches!(source, SvError::Config(_) | SvError::Order(_)),
            HarnessError::Problem { source, .. } => {
                matches!(source, ProblemError::Config(_) | ProblemError::Unknown(_) | ProblemError::NoInvariant(_))
            }
            HarnessError::Io(_) | HarnessError::Csv(_) => false,
        }
    }
}

/// Integration scheme: a structural formulation or a composed Störmer-Verlet baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Scheme {
    Zd,
    Zds,
    /// Störmer-Verlet composed to the given even order.
    Sv(usize),
}

impl Scheme {
    pub fn formulation(self) -> Option<Formulation> {
        match self {
            Scheme::Zd => Some(Formulation::Zd),
            Scheme::Zds => Some(Formulation::Zds),
            Scheme::Sv(_) => None,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Zd => f.write_str("zd"),
            Scheme::Zds => f.write_str("zds"),
            Scheme::Sv(o) => write!(f, "sv{o}"),
        }
    }
}

impl FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "zd" => Ok(Scheme::Zd),
            "zds" => Ok(Scheme::Zds),
            "sv2" => Ok(Scheme::Sv(2)),
            "sv4" => Ok(Scheme::Sv(4)),
            "sv6" => Ok(Scheme::Sv(6)),
            "sv8" => Ok(Scheme::Sv(8)),
            other => Err(format!("unknown scheme `{other}` (expected zd, zds, sv2, sv4, sv6 or sv8)")),
        }
    }
}

impl TryFrom<String> for Scheme {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Scheme> for String {
    fn from(s: Scheme) -> String {
        s.to_string()
    }
}

/// Which accepted nodes enter the error maxima.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    #[default]
    AllNodes,
    /// Only nodes that close a block (`step` a multiple of `R`) and the final node.
    BlockEnds,
}

impl FromStr for Sampling {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "all" | "all_nodes" | "all-nodes" => Ok(Sampling::AllNodes),
            "ends" | "block_ends" | "block-ends" => Ok(Sampling::BlockEnds),
            other => Err(format!("unknown sampling `{other}` (expected all or block-ends)")),
        }
    }
}

/// Scale of the energy error.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyNorm {
    /// `|H - H0|`
    #[default]
    Absolute,
    /// `|H - H0| / |H0|`
    Relative,
}

impl FromStr for EnergyNorm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "abs" | "absolute" => Ok(EnergyNorm::Absolute),
            "rel" | "relative" => Ok(EnergyNorm::Relative),
            other => Err(format!("unknown energy norm `{other}` (expected absolute or relative)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub problem: String,
    pub scheme: Scheme,
    /// Block size; ignored by the baselines.
    #[serde(rename = "R")]
    pub r: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "T")]
    pub t: f64,
    /// `None` selects the backend default.
    pub tol: Option<f64>,
    pub max_iter: usize,
    pub precision: Precision,
    pub project_lrl: bool,
    /// Keep blocks that reach `max_iter` without meeting `tol` (structural schemes only).
    #[serde(default)]
    pub accept_unconverged: bool,
    pub decimation: Option<usize>,
    #[serde(default)]
    pub sampling: Sampling,
    #[serde(default)]
    pub energy_norm: EnergyNorm,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(problem: &str, scheme: Scheme, r: usize, n: usize, t: f64) -> Self {
        Self {
            problem: problem.to_string(),
            scheme,
            r,
            n,
            t,
            tol: None,
            max_iter: 200,
            precision: Precision::Double,
            project_lrl: false,
            accept_unconverged: false,
            decimation: None,
            sampling: Sampling::AllNodes,
            energy_norm: EnergyNorm::Absolute,
            out: None,
        }
    }

    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..self.clone() }
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or_else(|| self.precision.default_tol())
    }

    /// Steps per implicit solve: `R` for structural schemes, 1 for the baselines.
    pub fn block(&self) -> usize {
        match self.scheme {
            Scheme::Sv(_) => 1,
            _ => self.r,
        }
    }

    pub fn dt(&self) -> f64 {
        self.t / self.n as f64
    }

    pub fn label(&self) -> String {
        let r = match self.scheme {
            Scheme::Sv(_) => String::new(),
            _ => format!(" R={}", self.r),
        };
        format!("{} {}{} N={} T={} {}", self.problem, self.scheme, r, self.n, self.t, self.precision.as_str())
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if !CATALOG.contains(&self.problem.as_str()) {
            return bad(format!("unknown problem `{}` (known: {})", self.problem, CATALOG.join(", ")));
        }
        if self.n == 0 {
            return bad("N must be at least 1".into());
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return bad(format!("T must be positive and finite, got {}", self.t));
        }
        if let Some(tol) = self.tol {
            if !(tol > 0.0) {
                return bad(format!("tol must be positive, got {tol}"));
            }
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1".into());
        }
        if self.decimation == Some(0) {
            return bad("decimation must be at least 1".into());
        }
        match self.scheme {
            Scheme::Zd | Scheme::Zds => {
                if self.r == 0 || self.r > MAX_R {
                    return bad(format!("R must be in 1..={MAX_R}, got {}", self.r));
                }
                if self.n < self.r {
                    return bad(format!("N={} is smaller than R={}", self.n, self.r));
                }
            }
            Scheme::Sv(o) => {
                if !matches!(o, 2 | 4 | 6 | 8) {
                    return bad(format!("unsupported composition order {o}"));
                }
            }
        }
        if self.project_lrl && (self.problem != "kepler" || self.scheme.formulation().is_none()) {
            return bad("LRL projection is only available for kepler with zd or zds".into());
        }
        Ok(())
    }
}

/// How the position error was measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PositionMode {
    /// Max over sampled nodes against the exact trajectory.
    Trajectory,
    /// Final node against a tabulated reference value.
    Endpoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub config: RunConfig,
    pub dt: f64,
    pub position_mode: Option<PositionMode>,
    pub ex: Option<f64>,
    #[serde(rename = "eH")]
    pub e_h: Option<f64>,
    #[serde(rename = "eL")]
    pub e_l: Option<f64>,
    #[serde(rename = "eA")]
    pub e_a: Option<f64>,
    pub total_iter: usize,
    pub nb_iter_avg: f64,
    pub nb_call_avg: f64,
    /// Physical-equation evaluations actually performed (right-hand sides for the baselines).
    pub pe1_calls: usize,
    pub pe2_calls: usize,
    /// Blocks accepted at `max_iter` without meeting the tolerance.
    pub unconverged_blocks: usize,
    /// Final state, flattened body by body.
    pub x_final: Vec<f64>,
    pub p_final: Vec<f64>,
}

impl ErrorReport {
    pub fn error(&self, kind: Quantity) -> Option<f64> {
        match kind {
            Quantity::X => self.ex,
            Quantity::H => self.e_h,
            Quantity::L => self.e_l,
            Quantity::A => self.e_a,
        }
    }
}

/// Measured quantities, in CSV column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    X,
    H,
    L,
    A,
}

impl Quantity {
    pub const ALL: [Quantity; 4] = [Quantity::X, Quantity::H, Quantity::L, Quantity::A];
}

/// Streaming error accumulator attached to the integrator as an observer.
struct Tracker<'a, S: Scalar> {
    problem: &'a dyn Hamiltonian<S>,
    block: usize,
    n: usize,
    sampling: Sampling,
    energy_norm: EnergyNorm,
    kinds: Vec<InvariantKind>,
    initial: Vec<Vec<S>>,
    max_dev: Vec<f64>,
    has_exact: bool,
    ex: f64,
    series: Option<(usize, usize, Vec<(f64, f64)>)>,
    last: Option<(BodySpace<S>, BodySpace<S>)>,
    failure: Option<ProblemError>,
}

impl<'a, S: Scalar> Tracker<'a, S> {
    fn new(
        problem: &'a dyn Hamiltonian<S>,
        config: &RunConfig,
        series: Option<(InvariantKind, usize)>,
    ) -> Result<Self, ProblemError> {
        let kinds = problem.invariants();
        let (x0, p0) = problem.initial_state();
        let initial = kinds.iter().map(|&k| problem.invariant(k, &x0, &p0)).collect::<Result<Vec<_>, _>>()?;
        let series = match series {
            Some((kind, stride)) => {
                let idx = kinds.iter().position(|&k| k == kind).ok_or(ProblemError::NoInvariant(kind))?;
                Some((idx, stride.max(1), Vec::new()))
            }
            None => None,
        };
        Ok(Self {
            problem,
            block: config.block().max(1),
            n: config.n,
            sampling: config.sampling,
            energy_norm: config.energy_norm,
            max_dev: vec![0.0; kinds.len()],
            kinds,
            initial,
            has_exact: problem.exact_solution(S::zero()).is_some(),
            ex: 0.0,
            series,
            last: None,
            failure: None,
        })
    }

    fn sampled(&self, step: usize) -> bool {
        match self.sampling {
            Sampling::AllNodes => true,
            Sampling::BlockEnds => step % self.block == 0 || step == self.n,
        }
    }

    fn deviation(&self, idx: usize, x: &BodySpace<S>, p: &BodySpace<S>) -> Result<f64, ProblemError> {
        let kind = self.kinds[idx];
        let now = self.problem.invariant(kind, x, p)?;
        let init = &self.initial[idx];
        let mut dev = now.iter().zip(init).fold(S::zero(), |m, (&a, &b)| m.max((a - b).abs()));
        if kind == InvariantKind::H && self.energy_norm == EnergyNorm::Relative {
            let scale = init[0].abs();
            if scale > S::zero() {
                dev = dev / scale;
            }
        }
        Ok(dev.to_f64())
    }

    fn visit(&mut self, step: usize, t: S, x: &BodySpace<S>, p: &BodySpace<S>) -> Result<(), ProblemError> {
        if step == self.n {
            self.last = Some((x.clone(), p.clone()));
        }
        if !self.sampled(step) {
            return Ok(());
        }
        for idx in 0..self.kinds.len() {
            let dev = self.deviation(idx, x, p)?;
            // NaN must not hide behind max()
            self.max_dev[idx] = if dev.is_nan() { f64::NAN } else { self.max_dev[idx].max(dev) };
            if let Some((sidx, stride, series)) = self.series.as_mut() {
                if *sidx == idx && (step % *stride == 0 || step == self.n) {
                    series.push((t.to_f64(), dev));
                }
            }
        }
        if self.has_exact {
            if let Some((xe, _)) = self.problem.exact_solution(t) {
                let e = x.max_diff(&xe).to_f64();
                self.ex = if e.is_nan() { f64::NAN } else { self.ex.max(e) };
            }
        }
        Ok(())
    }
}

impl<S: Scalar> Observer<S> for Tracker<'_, S> {
    fn on_node(&mut self, step: usize, t: S, x: &BodySpace<S>, p: &BodySpace<S>) {
        if self.failure.is_some() {
            return;
        }
        if let Err(e) = self.visit(step, t, x, p) {
            self.failure = Some(e);
        }
    }

    fn on_block(&mut self, _stats: &IterStats) {}
}

fn run_inner<S: Scalar>(
    config: &RunConfig,
    problem: &dyn Hamiltonian<S>,
    series: Option<(InvariantKind, usize)>,
) -> Result<(ErrorReport, Vec<(f64, f64)>), HarnessError> {
    let label = || config.label();
    let mut tracker =
        Tracker::new(problem, config, series).map_err(|source| HarnessError::Problem { config: label(), source })?;
    let t_final = S::from_f64(config.t);
    let tol = config.tol();
    let stats: RunStats = match config.scheme.formulation() {
        Some(f) => {
            let options = IntegrateOptions {
                config: SolverConfig { tol, max_iter: config.max_iter, accept_unconverged: config.accept_unconverged },
                decimation: config.decimation,
                project: config.project_lrl,
            };
            integrate(problem, f, config.r, config.n, t_final, &options, &mut tracker)
                .map_err(|source| HarnessError::Solver { config: label(), source })?
                .stats
        }
        None => {
            let Scheme::Sv(order) = config.scheme else { unreachable!() };
            integrate_sv(problem, order, config.n, t_final, tol, config.max_iter, config.decimation, &mut tracker)
                .map_err(|source| HarnessError::Baseline { config: label(), source })?
                .stats
        }
    };
    if let Some(source) = tracker.failure.take() {
        return Err(HarnessError::Problem { config: label(), source });
    }
    let (xf, pf) = tracker.last.take().expect("final node observed");

    let mut position_mode = None;
    let mut ex = None;
    if tracker.has_exact {
        position_mode = Some(PositionMode::Trajectory);
        ex = Some(tracker.ex);
    } else if let Some(rv) = problem
        .reference_values()
        .into_iter()
        .find(|rv| rv.quantity == "x" && (rv.t - config.t).abs() <= 1e-12 * config.t.abs())
    {
        position_mode = Some(PositionMode::Endpoint);
        ex = Some(xf.as_slice().iter().fold(S::zero(), |m, &v| m.max((v - rv.value).abs())).to_f64());
    }

    let dev = |kind: InvariantKind| tracker.kinds.iter().position(|&k| k == kind).map(|i| tracker.max_dev[i]);
    let nb_iter_avg = stats.total_iter as f64 / config.n as f64;
    let report = ErrorReport {
        config: config.clone(),
        dt: config.dt(),
        position_mode,
        ex,
        e_h: dev(InvariantKind::H),
        e_l: dev(InvariantKind::L),
        e_a: dev(InvariantKind::Lrl),
        total_iter: stats.total_iter,
        nb_iter_avg,
        nb_call_avg: config.block() as f64 * nb_iter_avg,
        pe1_calls: stats.pe1_calls,
        pe2_calls: stats.pe2_calls,
        unconverged_blocks: stats.unconverged,
        x_final: xf.as_slice().iter().map(|v| v.to_f64()).collect(),
        p_final: pf.as_slice().iter().map(|v| v.to_f64()).collect(),
    };
    let series = tracker.series.map(|(_, _, s)| s).unwrap_or_default();
    Ok((report, series))
}

fn run_named<S: Scalar>(
    config: &RunConfig,
    series: Option<(InvariantKind, usize)>,
) -> Result<(ErrorReport, Vec<(f64, f64)>), HarnessError> {
    let problem = by_name::<S>(&config.problem).map_err(|source| HarnessError::Problem { config: config.label(), source })?;
    run_inner(config, problem.as_ref(), series)
}

fn dispatch(
    config: &RunConfig,
    series: Option<(InvariantKind, usize)>,
) -> Result<(ErrorReport, Vec<(f64, f64)>), HarnessError> {
    config.validate()?;
    match config.precision {
        Precision::Double => run_named::<f64>(config, series),
        Precision::DoubleDouble => run_named::<DoubleDouble>(config, series),
    }
}

/// Runs one configuration; writes a one-row CSV when `config.out` is set.
pub fn run(config: &RunConfig) -> Result<ErrorReport, HarnessError> {
    let (report, _) = dispatch(config, None)?;
    if let Some(path) = &config.out {
        let row = SweepRow { n: config.n, dt: config.dt(), outcome: Ok(report.clone()), orders: [None; 4] };
        write_sweep_csv(config, &[row], std::fs::File::create(path)?)?;
    }
    Ok(report)
}

/// Runs a configuration on a caller-supplied problem instance. `config.problem` is
/// used only as a label, and the precision is fixed by `S`.
pub fn run_problem<S: Scalar>(config: &RunConfig, problem: &dyn Hamiltonian<S>) -> Result<ErrorReport, HarnessError> {
    let mut check = config.clone();
    check.problem = CATALOG[0].to_string();
    check.project_lrl = false;
    check.validate()?;
    run_inner(config, problem, None).map(|(r, _)| r)
}

/// `log(e1/e2) / log(dt1/dt2)`; `None` when an error is zero, negative or not finite.
pub fn convergence_order(e1: f64, e2: f64, dt1: f64, dt2: f64) -> Option<f64> {
    let ok = |v: f64| v > 0.0 && v.is_finite();
    if !(ok(e1) && ok(e2) && ok(dt1) && ok(dt2)) || dt1 == dt2 {
        return None;
    }
    Some((e1 / e2).ln() / (dt1 / dt2).ln())
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub n: usize,
    pub dt: f64,
    /// Failed rows keep the error message.
    pub outcome: Result<ErrorReport, String>,
    /// Orders against the previous row, indexed like [`Quantity::ALL`].
    pub orders: [Option<f64>; 4],
}

impl SweepRow {
    pub fn order(&self, q: Quantity) -> Option<f64> {
        self.orders[q as usize]
    }
}

/// Runs `base` at each `N` (concurrently) and fills in successive convergence orders.
pub fn sweep(base: &RunConfig, ns: &[usize]) -> Result<Vec<SweepRow>, HarnessError> {
    if ns.is_empty() {
        return Err(HarnessError::Config("empty list of N".into()));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HarnessError::Config(format!("N values must be strictly ascending, got {ns:?}")));
    }
    base.with_n(ns[0]).validate()?;
    let outcomes: Vec<_> = ns
        .par_iter()
        .map(|&n| {
            let cfg = RunConfig { out: None, ..base.with_n(n) };
            run(&cfg).map_err(|e| e.to_string())
        })
        .collect();
    let mut rows: Vec<SweepRow> = ns
        .iter()
        .zip(outcomes)
        .map(|(&n, outcome)| SweepRow { n, dt: base.t / n as f64, outcome, orders: [None; 4] })
        .collect();
    for i in 1..rows.len() {
        let (prev, cur) = rows.split_at_mut(i);
        let (p, c) = (&prev[i - 1], &mut cur[0]);
        if let (Ok(pr), Ok(cr)) = (&p.outcome, &c.outcome) {
            for q in Quantity::ALL {
                c.orders[q as usize] = match (pr.error(q), cr.error(q)) {
                    (Some(e1), Some(e2)) => convergence_order(e1, e2, p.dt, c.dt),
                    _ => None,
                };
            }
        }
    }
    if let Some(path) = &base.out {
        write_sweep_csv(base, &rows, std::fs::File::create(path)?)?;
    }
    Ok(rows)
}

/// Deviation of one invariant from its initial value at `samples` evenly spaced
/// recorded nodes.
pub fn drift_series(config: &RunConfig, quantity: InvariantKind, samples: usize) -> Result<Vec<(f64, f64)>, HarnessError> {
    if samples == 0 {
        return Err(HarnessError::Config("samples must be at least 1".into()));
    }
    let stride = config.decimation.unwrap_or_else(|| crate::blocksolver::default_decimation(config.n));
    let (_, full) = dispatch(config, Some((quantity, stride)))?;
    Ok(pick_evenly(&full, samples))
}

fn pick_evenly<T: Copy>(v: &[T], samples: usize) -> Vec<T> {
    if samples >= v.len() {
        return v.to_vec();
    }
    if samples == 1 {
        return vec![v[v.len() - 1]];
    }
    let last = v.len() - 1;
    (0..samples).map(|i| v[(i * last + (samples - 1) / 2) / (samples - 1)]).collect()
}

/// Least-squares slope of `y` against `t`.
pub fn trend(series: &[(f64, f64)]) -> f64 {
    let n = series.len() as f64;
    if series.len() < 2 {
        return 0.0;
    }
    let (st, sy) = series.iter().fold((0.0, 0.0), |(a, b), &(t, y)| (a + t, b + y));
    let (mt, my) = (st / n, sy / n);
    let (num, den) = series
        .iter()
        .fold((0.0, 0.0), |(a, b), &(t, y)| (a + (t - mt) * (y - my), b + (t - mt) * (t - mt)));
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Scientific notation with six significant digits and a two-digit exponent.
pub fn sci(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.5e}");
    let (mant, exp) = s.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", exp.abs())
}

fn opt(v: Option<f64>) -> String {
    v.map(sci).unwrap_or_default()
}

pub const SWEEP_HEADER: [&str; 18] = [
    "problem", "scheme", "R", "precision", "N", "dt", "ex", "ordx", "eH", "ordH", "eL", "ordL", "eA", "ordA",
    "total_iter", "nb_iter_avg", "nb_call_avg", "status",
];

pub fn write_sweep_csv<W: Write>(base: &RunConfig, rows: &[SweepRow], w: W) -> Result<(), HarnessError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(SWEEP_HEADER)?;
    for row in rows {
        let mut rec = vec![
            base.problem.clone(),
            base.scheme.to_string(),
            base.block().to_string(),
            base.precision.as_str().to_string(),
            row.n.to_string(),
            sci(row.dt),
        ];
        match &row.outcome {
            Ok(rep) => {
                for q in Quantity::ALL {
                    rec.push(opt(rep.error(q)));
                    rec.push(opt(row.order(q)));
                }
                rec.push(rep.total_iter.to_string());
                rec.push(sci(rep.nb_iter_avg));
                rec.push(sci(rep.nb_call_avg));
                rec.push("ok".into());
            }
            Err(msg) => {
                rec.extend(std::iter::repeat(String::new()).take(11));
                rec.push(format!("error: {msg}"));
            }
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_drift_csv<W: Write>(series: &[(f64, f64)], w: W) -> Result<(), HarnessError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t", "deviation"])?;
    for &(t, d) in series {
        out.write_record([sci(t), sci(d)])?;
    }
    out.flush()?;
    Ok(())
}

/// Kernel-basis coefficients `a^m_{r,s}` on the unit grid, 32 significant digits.
pub fn write_coeffs_csv<W: Write>(entries: &[(Formulation, usize)], w: W) -> Result<(), HarnessError> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["formulation", "R", "m", "r", "s", "value"])?;
    for &(f, r_max) in entries {
        let basis = secoeff::cached_basis(r_max, f)?;
        let name = match f {
            Formulation::Zd => "zd",
            Formulation::Zds => "zds",
        };
        for m in 0..r_max {
            for s in 0..f.levels() {
                for r in 0..=r_max {
                    out.write_record([
                        name.to_string(),
                        r_max.to_string(),
                        (m + 1).to_string(),
                        r.to_string(),
                        s.to_string(),
                        basis.coeff(m, r, s).to_sci_string(32),
                    ])?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

//! Benchmark Hamiltonian systems.
//!
//! Each problem supplies the first-derivative map `(X', P') = (grad_P H, -grad_X H)`
//! and its directional derivative (the second-derivative map used by ZDS), plus the
//! invariants and reference solutions used for error measurement.

mod em;
mod kepler;
mod mass_spring;
mod nbody;
mod pendulum;
mod two_spring;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{BodySpace, Scalar};

pub use em::{EmParticle, EmVariant};
pub use kepler::{lrl, lrl_gradient, project_lrl, Kepler};
pub use mass_spring::MassSpring;
pub use nbody::{figure_eight, outer_solar, NBody, FIGURE_EIGHT_PERIOD};
pub use pendulum::{pendulum_period, Pendulum};
pub use two_spring::TwoSpring;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("singularity: {0}")]
    Singularity(String),
    #[error("invalid problem parameters: {0}")]
    Config(String),
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("unknown problem `{0}`")]
    Unknown(String),
    #[error("invariant {0} is not defined for this problem")]
    NoInvariant(InvariantKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InvariantKind {
    /// Total energy.
    H,
    /// Angular momentum (scalar in the plane, 3-vector in space).
    L,
    /// Scalar Laplace-Runge-Lenz invariant of the Kepler problem.
    Lrl,
}

impl fmt::Display for InvariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InvariantKind::H => "H",
            InvariantKind::L => "L",
            InvariantKind::Lrl => "A",
        })
    }
}

impl FromStr for InvariantKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "H" | "h" | "energy" => Ok(Self::H),
            "L" | "l" => Ok(Self::L),
            "A" | "a" | "LRL" | "lrl" | "R" => Ok(Self::Lrl),
            other => Err(format!("unknown invariant `{other}` (expected H, L or A)")),
        }
    }
}

/// Tabulated value of a trajectory coordinate at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceValue<S> {
    pub t: f64,
    /// `"x"` or `"p"`.
    pub quantity: &'static str,
    pub value: S,
}

/// A Hamiltonian system on the body space `R^{I x K}`.
pub trait Hamiltonian<S: Scalar>: Send + Sync {
    fn name(&self) -> &str;

    /// `(I, K)`: spatial dimension and body count.
    fn shape(&self) -> (usize, usize);

    fn initial_state(&self) -> (BodySpace<S>, BodySpace<S>);

    /// True if `H(X, P) = T(P) + V(X)`.
    fn is_separable(&self) -> bool;

    fn parameters(&self) -> Vec<(&'static str, S)> {
        Vec::new()
    }

    fn energy(&self, x: &BodySpace<S>, p: &BodySpace<S>) -> Result<S, ProblemError>;

    /// Writes `dx = grad_P H` and `dp = -grad_X H`.
    fn first_rhs(
        &self,
        x: &BodySpace<S>,
        p: &BodySpace<S>,
        dx: &mut BodySpace<S>,
        dp: &mut BodySpace<S>,
    ) -> Result<(), ProblemError>;

    /// Directional derivative of [`Hamiltonian::first_rhs`] at `(x, p)` along `(vx, vp)`.
    /// Along the flow, with `(vx, vp) = first_rhs(x, p)`, this is the second time derivative.
    fn second_rhs(
        &self,
        x: &BodySpace<S>,
        p: &BodySpace<S>,
        vx: &BodySpace<S>,
        vp: &BodySpace<S>,
        sx: &mut BodySpace<S>,
        sp: &mut BodySpace<S>,
    ) -> Result<(), ProblemError>;

    fn invariants(&self) -> Vec<InvariantKind> {
        vec![InvariantKind::H]
    }

    /// Invariant value; vector-valued invariants return all components.
    fn invariant(
        &self,
        kind: InvariantKind,
        x: &BodySpace<S>,
        p: &BodySpace<S>,
    ) -> Result<Vec<S>, ProblemError> {
        match kind {
            InvariantKind::H => Ok(vec![self.energy(x, p)?]),
            other => Err(ProblemError::NoInvariant(other)),
        }
    }

    fn exact_solution(&self, _t: S) -> Option<(BodySpace<S>, BodySpace<S>)> {
        None
    }

    fn reference_values(&self) -> Vec<ReferenceValue<S>> {
        Vec::new()
    }

    /// Pulls `(x, p)` back onto an invariant manifold, if the problem supports it.
    /// Returns whether a correction was applied.
    fn project(&self, _x: &mut BodySpace<S>, _p: &mut BodySpace<S>) -> bool {
        false
    }
}

/// Benchmark names accepted by [`by_name`].
pub const CATALOG: [&str; 8] = [
    "mass_spring",
    "two_spring",
    "pendulum",
    "kepler",
    "three_body_eight",
    "outer_solar",
    "em_scb",
    "em_challenging",
];

/// Builds a benchmark with the paper's parameters.
pub fn by_name<S: Scalar>(name: &str) -> Result<Box<dyn Hamiltonian<S>>, ProblemError> {
    let one = S::one();
    Ok(match name {
        "mass_spring" => Box::new(MassSpring::new(one, one, one, S::zero())?),
        "two_spring" => Box::new(TwoSpring::paper()?),
        "pendulum" => Box::new(Pendulum::paper()),
        "kepler" => Box::new(Kepler::paper()),
        "three_body_eight" => Box::new(figure_eight()),
        "outer_solar" => Box::new(outer_solar()),
        "em_scb" => Box::new(EmParticle::paper(EmVariant::Scb)),
        "em_challenging" => Box::new(EmParticle::paper(EmVariant::Challenging)),
        other => return Err(ProblemError::Unknown(other.to_string())),
    })
}

#[inline]
pub(crate) fn sq<S: Scalar>(v: S) -> S {
    v * v
}

use super::{Hamiltonian, ProblemError};
use crate::numerics::{BodySpace, Scalar};

/// `H = p^2 / 2m + kappa x^2 / 2`.
#[derive(Clone, Debug)]
pub struct MassSpring<S> {
    pub m: S,
    pub kappa: S,
    pub x0: S,
    pub p0: S,
}

impl<S: Scalar> MassSpring<S> {
    pub fn new(m: S, kappa: S, x0: S, p0: S) -> Result<Self, ProblemError> {
        if !(m > S::zero() && kappa > S::zero()) {
            return Err(ProblemError::Config("mass and stiffness must be positive".into()));
        }
        Ok(Self { m, kappa, x0, p0 })
    }

    pub fn omega(&self) -> S {
        (self.kappa / self.m).sqrt()
    }
}

impl<S: Scalar> Hamiltonian<S> for MassSpring<S> {
    fn name(&self) -> &str {
        "mass_spring"
    }

    fn shape(&self) -> (usize, usize) {
        (1, 1)
    }

    fn initial_state(&self) -> (BodySpace<S>, BodySpace<S>) {
        (BodySpace::from_vec(vec![self.x0]), BodySpace::from_vec(vec![self.p0]))
    }

    fn is_separable(&self) -> bool {
        true
    }

    fn parameters(&self) -> Vec<(&'static str, S)> {
        vec![("m", self.m), ("kappa", self.kappa)]
    }

    fn energy(&self, x: &BodySpace<S>, p: &BodySpace<S>) -> Result<S, ProblemError> {
        let (x, p) = (x[(0, 0)], p[(0, 0)]);
        let half = S::from_f64(0.5);
        Ok(half * p * p / self.m + half * self.kappa * x * x)
    }

    fn first_rhs(
        &self,
        x: &BodySpace<S>,
        p: &BodySpace<S>,
        dx: &mut BodySpace<S>,
        dp: &mut BodySpace<S>,
    ) -> Result<(), ProblemError> {
        dx[(0, 0)] = p[(0, 0)] / self.m;
        dp[(0, 0)] = -self.kappa * x[(0, 0)];
        Ok(())
    }

    fn second_rhs(
        &self,
        _x: &BodySpace<S>,
        _p: &BodySpace<S>,
        vx: &BodySpace<S>,
        vp: &BodySpace<S>,
        sx: &mut BodySpace<S>,
        sp: &mut BodySpace<S>,
    ) -> Result<(), ProblemError> {
        sx[(0, 0)] = vp[(0, 0)] / self.m;
        sp[(0, 0)] = -self.kappa * vx[(0, 0)];
        Ok(())
    }

    fn exact_solution(&self, t: S) -> Option<(BodySpace<S>, BodySpace<S>)> {
        let w = self.omega();
        let (s, c) = (w * t).sin_cos();
        let x = self.x0 * c + self.p0 / (self.m * w) * s;
        let p = -self.m * w * self.x0 * s + self.p0 * c;
        Some((BodySpace::from_vec(vec![x]), BodySpace::from_vec(vec![p])))
    }
}

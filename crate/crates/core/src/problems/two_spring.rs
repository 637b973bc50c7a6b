use super::{Hamiltonian, ProblemError};
use crate::numerics::{lit, BodySpace, Scalar};

/// Two masses in a line, wall - k1 - m1 - k2 - m2; coordinates are displacements.
///
/// `H = p1^2/2m1 + p2^2/2m2 + k1 x1^2/2 + k2 (x2 - x1)^2/2`.
#[derive(Clone, Debug)]
pub struct TwoSpring<S> {
    pub k1: S,
    pub k2: S,
    pub m1: S,
    pub m2: S,
    pub a: S,
    pub b: S,
    pub alpha1: S,
    pub alpha2: S,
    pub omega1: S,
    pub omega2: S,
}

impl<S: Scalar> TwoSpring<S> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(k1: S, k2: S, m1: S, m2: S, a: S, b: S, alpha1: S, alpha2: S) -> Result<Self, ProblemError> {
        let zero = S::zero();
        if !(k1 > zero && k2 > zero && m1 > zero && m2 > zero) {
            return Err(ProblemError::Config("spring constants and masses must be positive".into()));
        }
        let (omega1, omega2) = Self::frequencies(k1, k2, m1, m2)?;
        let tiny = S::from_f64(1e-12) * k2;
        if (k2 - m2 * omega2 * omega2).abs() <= tiny {
            return Err(ProblemError::Config("k2 = m2 omega2^2: mode shape undefined".into()));
        }
        Ok(Self { k1, k2, m1, m2, a, b, alpha1, alpha2, omega1, omega2 })
    }

    /// `k1=1, k2=5, m1=2, m2=1, A=1, B=2, alpha1=pi/2, alpha2=-pi/4`.
    pub fn paper() -> Result<Self, ProblemError> {
        let pi = S::pi();
        Self::new(
            S::one(),
            lit("5"),
            lit("2"),
            S::one(),
            S::one(),
            lit("2"),
            pi / S::from_f64(2.0),
            -pi / S::from_f64(4.0),
        )
    }

    /// Positive roots of `m1 m2 w^4 - (m1 k2 + m2 k1 + m2 k2) w^2 + k1 k2 = 0`, ascending.
    pub fn frequencies(k1: S, k2: S, m1: S, m2: S) -> Result<(S, S), ProblemError> {
        let b = m1 * k2 + m2 * k1 + m2 * k2;
        let a = m1 * m2;
        let disc = b * b - S::from_f64(4.0) * a * k1 * k2;
        if !(disc > S::zero()) {
            return Err(ProblemError::Config("resonant degeneracy: omega1 = omega2".into()));
        }
        let two_a = S::from_f64(2.0) * a;
        let w1sq = (b - disc.sqrt()) / two_a;
        let w2sq = (b + disc.sqrt()) / two_a;
        Ok((w1sq.sqrt(), w2sq.sqrt()))
    }

    fn mode_ratios(&self) -> (S, S) {
        let r1 = (self.k1 + self.k2 - self.m1 * self.omega1 * self.omega1) / self.k2;
        let r2 = self.k2 / (self.k2 - self.m2 * self.omega2 * self.omega2);
        (r1, r2)
    }
}

impl<S: Scalar> Hamiltonian<S> for TwoSpring<S> {
    fn name(&self) -> &str {
        "two_spring"
    }

    fn shape(&self) -> (usize, usize) {
        (1, 2)
    }

    fn initial_state(&self) -> (BodySpace<S>, BodySpace<S>) {
        self.exact_solution(S::zero()).expect("closed form always available")
    }

    fn is_separable(&self) -> bool {
        true
    }

    fn parameters(&self) -> Vec<(&'static str, S)> {
        vec![("k1", self.k1), ("k2", self.k2), ("m1", self.m1), ("m2", self.m2)]
    }

    fn energy(&self, x: &BodySpace<S>, p: &BodySpace<S>) -> Result<S, ProblemError> {
        let half = S::from_f64(0.5);
        let (x1, x2) = (x[(0, 0)], x[(0, 1)]);
        let (p1, p2) = (p[(0, 0)], p[(0, 1)]);
        let d = x2 - x1;
        Ok(half * (p1 * p1 / self.m1 + p2 * p2 / self.m2 + self.k1 * x1 * x1 + self.k2 * d * d))
    }

    fn first_rhs(
        &self,
        x: &BodySpace<S>,
        p: &BodySpace<S>,
        dx: &mut BodySpace<S>,
        dp: &mut BodySpace<S>,
    ) -> Result<(), ProblemError> {
        let (x1, x2) = (x[(0, 0)], x[(0, 1)]);
        dx[(0, 0)] = p[(0, 0)] / self.m1;
        dx[(0, 1)] = p[(0, 1)] / self.m2;
        dp[(0, 0)] = -self.k1 * x1 + self.k2 * (x2 - x1);
        dp[(0, 1)] = -self.k2 * (x2 - x1);
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
        let (v1, v2) = (vx[(0, 0)], vx[(0, 1)]);
        sx[(0, 0)] = vp[(0, 0)] / self.m1;
        sx[(0, 1)] = vp[(0, 1)] / self.m2;
        sp[(0, 0)] = -self.k1 * v1 + self.k2 * (v2 - v1);
        sp[(0, 1)] = -self.k2 * (v2 - v1);
        Ok(())
    }

    fn exact_solution(&self, t: S) -> Option<(BodySpace<S>, BodySpace<S>)> {
        let (r1, r2) = self.mode_ratios();
        let (s1, c1) = (self.omega1 * t + self.alpha1).sin_cos();
        let (s2, c2) = (self.omega2 * t + self.alpha2).sin_cos();
        let x1 = self.a * c1 + self.b * c2;
        let x2 = self.a * r1 * c1 + self.b * r2 * c2;
        let v1 = -self.a * self.omega1 * s1 - self.b * self.omega2 * s2;
        let v2 = -self.a * r1 * self.omega1 * s1 - self.b * r2 * self.omega2 * s2;
        Some((
            BodySpace::from_columns(&[vec![x1], vec![x2]]),
            BodySpace::from_columns(&[vec![self.m1 * v1], vec![self.m2 * v2]]),
        ))
    }
}

use super::{Hamiltonian, ProblemError, ReferenceValue};
use crate::numerics::{lit, BodySpace, Scalar};

/// Planar pendulum, `H = p^2 / (2 m l^2) + m g l (1 - cos x)`.
#[derive(Clone, Debug)]
pub struct Pendulum<S> {
    pub m: S,
    pub g: S,
    pub l: S,
    pub x0: S,
    pub p0: S,
    reference: Vec<ReferenceValue<S>>,
}

impl<S: Scalar> Pendulum<S> {
    pub fn new(m: S, g: S, l: S, x0: S, p0: S) -> Result<Self, ProblemError> {
        let z = S::zero();
        if !(m > z && g > z && l > z) {
            return Err(ProblemError::Config("m, g and l must be positive".into()));
        }
        Ok(Self { m, g, l, x0, p0, reference: Vec::new() })
    }

    /// `m = g = l = 1`, released from rest at `x = pi/4`, with the tabulated state at `t = 100`.
    pub fn paper() -> Self {
        let one = S::one();
        let mut p = Self::new(one, one, one, S::pi() / S::from_f64(4.0), S::zero())
            .expect("positive parameters");
        p.reference = vec![
            ReferenceValue { t: 100.0, quantity: "x", value: lit("-0.2633498226088722") },
            ReferenceValue { t: 100.0, quantity: "p", value: lit("-0.7189111241830892") },
        ];
        p
    }

    fn inertia(&self) -> S {
        self.m * self.l * self.l
    }
}

/// Period `4 sqrt(l / (m g)) K(w)`, with the complete elliptic integral `K` computed by
/// the arithmetic-geometric mean.
pub fn pendulum_period(m: f64, g: f64, l: f64, w: f64) -> Result<f64, ProblemError> {
    if !(0.0..1.0).contains(&w) {
        return Err(ProblemError::Domain(format!("elliptic modulus {w} outside [0, 1)")));
    }
    let (mut a, mut b) = (1.0f64, (1.0 - w * w).sqrt());
    for _ in 0..64 {
        if (a - b).abs() <= 1e-17 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    let k = std::f64::consts::PI / (2.0 * a);
    Ok(4.0 * (l / (m * g)).sqrt() * k)
}

impl<S: Scalar> Hamiltonian<S> for Pendulum<S> {
    fn name(&self) -> &str {
        "pendulum"
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
        vec![("m", self.m), ("g", self.g), ("l", self.l)]
    }

    fn energy(&self, x: &BodySpace<S>, p: &BodySpace<S>) -> Result<S, ProblemError> {
        let (x, p) = (x[(0, 0)], p[(0, 0)]);
        Ok(p * p / (S::from_f64(2.0) * self.inertia()) + self.m * self.g * self.l * (S::one() - x.cos()))
    }

    fn first_rhs(
        &self,
        x: &BodySpace<S>,
        p: &BodySpace<S>,
        dx: &mut BodySpace<S>,
        dp: &mut BodySpace<S>,
    ) -> Result<(), ProblemError> {
        dx[(0, 0)] = p[(0, 0)] / self.inertia();
        dp[(0, 0)] = -self.m * self.g * self.l * x[(0, 0)].sin();
        Ok(())
    }

    fn second_rhs(
        &self,
        x: &BodySpace<S>,
        _p: &BodySpace<S>,
        vx: &BodySpace<S>,
        vp: &BodySpace<S>,
        sx: &mut BodySpace<S>,
        sp: &mut BodySpace<S>,
    ) -> Result<(), ProblemError> {
        sx[(0, 0)] = vp[(0, 0)] / self.inertia();
        sp[(0, 0)] = -self.m * self.g * self.l * x[(0, 0)].cos() * vx[(0, 0)];
        Ok(())
    }

    fn reference_values(&self) -> Vec<ReferenceValue<S>> {
        self.reference.clone()
    }
}

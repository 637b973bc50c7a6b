use super::{sq, Hamiltonian, InvariantKind, ProblemError};
use crate::numerics::{lit, BodySpace, Scalar};

/// Planar Kepler problem around a fixed centre, `H = |p|^2/2 - 1/|x|`.
#[derive(Clone, Debug)]
pub struct Kepler<S> {
    pub x0: [S; 2],
    pub p0: [S; 2],
    lrl0: S,
}

impl<S: Scalar> Kepler<S> {
    pub fn new(x0: [S; 2], p0: [S; 2]) -> Result<Self, ProblemError> {
        if sq(x0[0]) + sq(x0[1]) == S::zero() {
            return Err(ProblemError::Singularity("initial position at the attracting centre".into()));
        }
        Ok(Self { x0, p0, lrl0: lrl(x0, p0) })
    }

    /// Eccentricity 0.6, semi-major axis 1: `x0 = (0.4, 0)`, `p0 = (0, 2)`.
    pub fn paper() -> Self {
        Self::new([lit("0.4"), S::zero()], [S::zero(), lit("2")]).expect("nonzero position")
    }

    pub fn lrl0(&self) -> S {
        self.lrl0
    }
}

fn radius<S: Scalar>(x: &BodySpace<S>) -> Result<S, ProblemError> {
    let r = (sq(x[(0, 0)]) + sq(x[(1, 0)])).sqrt();
    if r == S::zero() || !r.is_finite() {
        return Err(ProblemError::Singularity(format!("|x| = {r} in the Kepler problem")));
    }
    Ok(r)
}

/// Scalar LRL invariant `L (p2 - p1) - (x1 + x2)/|x|`: the sum of the two components of
/// `p x L - x/|x|`.
pub fn lrl<S: Scalar>(x: [S; 2], p: [S; 2]) -> S {
    let r = (sq(x[0]) + sq(x[1])).sqrt();
    let l = p[1] * x[0] - p[0] * x[1];
    l * (p[1] - p[0]) - (x[0] + x[1]) / r
}

/// Gradient of [`lrl`] with respect to `(x1, x2, p1, p2)`.
pub fn lrl_gradient<S: Scalar>(x: [S; 2], p: [S; 2]) -> [S; 4] {
    let [x1, x2] = x;
    let [p1, p2] = p;
    let r = (sq(x1) + sq(x2)).sqrt();
    let r3 = r * r * r;
    let two = S::from_f64(2.0);
    [
        p2 * (p2 - p1) - (x2 * x2 - x1 * x2) / r3,
        -p1 * (p2 - p1) - (x1 * x1 - x1 * x2) / r3,
        two * x2 * p1 - x1 * p2 - x2 * p2,
        two * x1 * p2 - x1 * p1 - x2 * p1,
    ]
}

/// One first-order projection step towards the level set `lrl = target`.
/// Returns `None` when the gradient is too small to project along.
pub fn project_lrl<S: Scalar>(x: [S; 2], p: [S; 2], target: S) -> Option<([S; 2], [S; 2])> {
    let g = lrl_gradient(x, p);
    let g2 = g.iter().fold(S::zero(), |acc, &v| acc + v * v);
    if g2.sqrt().to_f64() < 1e-14 {
        return None;
    }
    let lambda = (lrl(x, p) - target) / g2;
    Some(([x[0] - lambda * g[0], x[1] - lambda * g[1]], [p[0] - lambda * g[2], p[1] - lambda * g[3]]))
}

impl<S: Scalar> Hamiltonian<S> for Kepler<S> {
    fn name(&self) -> &str {
        "kepler"
    }

    fn shape(&self) -> (usize, usize) {
        (2, 1)
    }

    fn initial_state(&self) -> (BodySpace<S>, BodySpace<S>) {
        (BodySpace::from_vec(self.x0.to_vec()), BodySpace::from_vec(self.p0.to_vec()))
    }

    fn is_separable(&self) -> bool {
        true
    }

    fn energy(&self, x: &BodySpace<S>, p: &BodySpace<S>) -> Result<S, ProblemError> {
        let r = radius(x)?;
        Ok(S::from_f64(0.5) * (sq(p[(0, 0)]) + sq(p[(1, 0)])) - S::one() / r)
    }

    fn first_rhs(
        &self,
        x: &BodySpace<S>,
        p: &BodySpace<S>,
        dx: &mut BodySpace<S>,
        dp: &mut BodySpace<S>,
    ) -> Result<(), ProblemError> {
        let r = radius(x)?;
        let r3 = r * r * r;
        for i in 0..2 {
            dx[(i, 0)] = p[(i, 0)];
            dp[(i, 0)] = -x[(i, 0)] / r3;
        }
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
        let r = radius(x)?;
        let r2 = r * r;
        let r3 = r2 * r;
        let r5 = r3 * r2;
        let xv = x[(0, 0)] * vx[(0, 0)] + x[(1, 0)] * vx[(1, 0)];
        let three = S::from_f64(3.0);
        for i in 0..2 {
            sx[(i, 0)] = vp[(i, 0)];
            sp[(i, 0)] = -vx[(i, 0)] / r3 + three * x[(i, 0)] * xv / r5;
        }
        Ok(())
    }

    fn invariants(&self) -> Vec<InvariantKind> {
        vec![InvariantKind::H, InvariantKind::L, InvariantKind::Lrl]
    }

    fn invariant(
        &self,
        kind: InvariantKind,
        x: &BodySpace<S>,
        p: &BodySpace<S>,
    ) -> Result<Vec<S>, ProblemError> {
        let xs = [x[(0, 0)], x[(1, 0)]];
        let ps = [p[(0, 0)], p[(1, 0)]];
        match kind {
            InvariantKind::H => Ok(vec![self.energy(x, p)?]),
            InvariantKind::L => Ok(vec![ps[1] * xs[0] - ps[0] * xs[1]]),
            InvariantKind::Lrl => {
                radius(x)?;
                Ok(vec![lrl(xs, ps)])
            }
        }
    }

    fn project(&self, x: &mut BodySpace<S>, p: &mut BodySpace<S>) -> bool {
        let xs = [x[(0, 0)], x[(1, 0)]];
        let ps = [p[(0, 0)], p[(1, 0)]];
        match project_lrl(xs, ps, self.lrl0) {
            Some((nx, np)) => {
                for i in 0..2 {
                    x[(i, 0)] = nx[i];
                    p[(i, 0)] = np[i];
                }
                true
            }
            None => {
                log::warn!("LRL gradient vanishes; projection skipped");
                false
            }
        }
    }
}

use super::{Hamiltonian, InvariantKind, ProblemError};
use crate::numerics::{lit, BodySpace, Scalar};

/// Period of the three-body figure-eight choreography.
pub const FIGURE_EIGHT_PERIOD: f64 = 6.32591401228;

/// Gravitational n-body problem in the plane or in space,
/// `H = sum |p_k|^2 / 2 m_k - sum_{k<l} G m_k m_l / |x_k - x_l|`.
#[derive(Clone, Debug)]
pub struct NBody<S> {
    name: String,
    pub masses: Vec<S>,
    pub g: S,
    pub x0: BodySpace<S>,
    pub p0: BodySpace<S>,
}

impl<S: Scalar> NBody<S> {
    pub fn new(
        name: impl Into<String>,
        masses: Vec<S>,
        g: S,
        x0: BodySpace<S>,
        p0: BodySpace<S>,
    ) -> Result<Self, ProblemError> {
        let (dim, k) = x0.shape();
        if k < 2 || masses.len() != k || p0.shape() != (dim, k) {
            return Err(ProblemError::Config(format!(
                "need K >= 2 bodies with one mass each; got {} masses for shape {:?}",
                masses.len(),
                x0.shape()
            )));
        }
        if !(dim == 2 || dim == 3) {
            return Err(ProblemError::Config(format!("dimension {dim} unsupported (2 or 3)")));
        }
        if masses.iter().any(|&m| !(m > S::zero())) {
            return Err(ProblemError::Config("masses must be positive".into()));
        }
        let nb = Self { name: name.into(), masses, g, x0, p0 };
        for a in 0..k {
            for b in a + 1..k {
                nb.separation(&nb.x0, a, b)?;
            }
        }
        Ok(nb)
    }

    fn dim(&self) -> usize {
        self.x0.dim()
    }

    fn separation(&self, x: &BodySpace<S>, a: usize, b: usize) -> Result<S, ProblemError> {
        let r2 = x.body(a).iter().zip(x.body(b)).fold(S::zero(), |acc, (&u, &v)| acc + (u - v) * (u - v));
        if r2 == S::zero() || !r2.is_finite() {
            return Err(ProblemError::Singularity(format!("bodies {a} and {b} collide")));
        }
        Ok(r2.sqrt())
    }

    fn angular_momentum(&self, x: &BodySpace<S>, p: &BodySpace<S>) -> Vec<S> {
        let k = x.bodies();
        if self.dim() == 2 {
            let l = (0..k).fold(S::zero(), |acc, b| acc + x[(0, b)] * p[(1, b)] - x[(1, b)] * p[(0, b)]);
            vec![l]
        } else {
            let mut l = vec![S::zero(); 3];
            for b in 0..k {
                let (xb, pb) = (x.body(b), p.body(b));
                l[0] += xb[1] * pb[2] - xb[2] * pb[1];
                l[1] += xb[2] * pb[0] - xb[0] * pb[2];
                l[2] += xb[0] * pb[1] - xb[1] * pb[0];
            }
            l
        }
    }
}

impl<S: Scalar> Hamiltonian<S> for NBody<S> {
    fn name(&self) -> &str {
        &self.name
    }

    fn shape(&self) -> (usize, usize) {
        self.x0.shape()
    }

    fn initial_state(&self) -> (BodySpace<S>, BodySpace<S>) {
        (self.x0.clone(), self.p0.clone())
    }

    fn is_separable(&self) -> bool {
        true
    }

    fn parameters(&self) -> Vec<(&'static str, S)> {
        vec![("G", self.g)]
    }

    fn energy(&self, x: &BodySpace<S>, p: &BodySpace<S>) -> Result<S, ProblemError> {
        let k = x.bodies();
        let half = S::from_f64(0.5);
        let mut h = S::zero();
        for b in 0..k {
            let p2 = p.body(b).iter().fold(S::zero(), |acc, &v| acc + v * v);
            h += half * p2 / self.masses[b];
        }
        for a in 0..k {
            for b in a + 1..k {
                h -= self.g * self.masses[a] * self.masses[b] / self.separation(x, a, b)?;
            }
        }
        Ok(h)
    }

    fn first_rhs(
        &self,
        x: &BodySpace<S>,
        p: &BodySpace<S>,
        dx: &mut BodySpace<S>,
        dp: &mut BodySpace<S>,
    ) -> Result<(), ProblemError> {
        let (dim, k) = x.shape();
        for b in 0..k {
            for i in 0..dim {
                dx[(i, b)] = p[(i, b)] / self.masses[b];
            }
        }
        dp.fill(S::zero());
        for a in 0..k {
            for b in a + 1..k {
                let r = self.separation(x, a, b)?;
                let c = self.g * self.masses[a] * self.masses[b] / (r * r * r);
                for i in 0..dim {
                    let f = c * (x[(i, a)] - x[(i, b)]);
                    dp[(i, a)] -= f;
                    dp[(i, b)] += f;
                }
            }
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
        let (dim, k) = x.shape();
        for b in 0..k {
            for i in 0..dim {
                sx[(i, b)] = vp[(i, b)] / self.masses[b];
            }
        }
        sp.fill(S::zero());
        let three = S::from_f64(3.0);
        for a in 0..k {
            for b in a + 1..k {
                let r = self.separation(x, a, b)?;
                let r2 = r * r;
                let r3 = r2 * r;
                let c = self.g * self.masses[a] * self.masses[b];
                let mut dot = S::zero();
                for i in 0..dim {
                    dot += (x[(i, a)] - x[(i, b)]) * (vx[(i, a)] - vx[(i, b)]);
                }
                for i in 0..dim {
                    let dxi = x[(i, a)] - x[(i, b)];
                    let dvi = vx[(i, a)] - vx[(i, b)];
                    let f = c * (dvi / r3 - three * dot * dxi / (r3 * r2));
                    sp[(i, a)] -= f;
                    sp[(i, b)] += f;
                }
            }
        }
        Ok(())
    }

    fn invariants(&self) -> Vec<InvariantKind> {
        vec![InvariantKind::H, InvariantKind::L]
    }

    fn invariant(
        &self,
        kind: InvariantKind,
        x: &BodySpace<S>,
        p: &BodySpace<S>,
    ) -> Result<Vec<S>, ProblemError> {
        match kind {
            InvariantKind::H => Ok(vec![self.energy(x, p)?]),
            InvariantKind::L => Ok(self.angular_momentum(x, p)),
            other => Err(ProblemError::NoInvariant(other)),
        }
    }
}

/// Three equal masses on the figure-eight choreography.
pub fn figure_eight<S: Scalar>() -> NBody<S> {
    let x1 = [lit::<S>("0.97000436"), lit::<S>("-0.24308753")];
    let p1 = [lit::<S>("0.466203685"), lit::<S>("0.43236573")];
    let p3 = [lit::<S>("-0.93240737"), lit::<S>("-0.86473146")];
    let x = BodySpace::from_columns(&[x1.to_vec(), vec![-x1[0], -x1[1]], vec![S::zero(), S::zero()]]);
    let p = BodySpace::from_columns(&[p1.to_vec(), p1.to_vec(), p3.to_vec()]);
    NBody::new("three_body_eight", vec![S::one(); 3], S::one(), x, p).expect("valid figure-eight data")
}

// name, mass, position (au), velocity (au/day)
const OUTER_SOLAR: [(&str, &str, [&str; 3], [&str; 3]); 6] = [
    ("Sun", "1.00000597682", ["0", "0", "0"], ["0", "0", "0"]),
    (
        "Jupiter",
        "9.547861040430e-4",
        ["-3.5023653", "-3.8169847", "-1.5507963"],
        ["0.00565429", "-0.00412490", "-0.00190589"],
    ),
    (
        "Saturn",
        "2.855837331510e-4",
        ["9.0755314", "-3.0458353", "-1.6483708"],
        ["0.00168318", "0.00483525", "0.00192462"],
    ),
    (
        "Uranus",
        "4.37273164546e-5",
        ["8.3101420", "-16.2901086", "-7.2521278"],
        ["0.00354178", "0.00137102", "0.00055029"],
    ),
    (
        "Neptune",
        "5.17759138449e-5",
        ["11.4707666", "-25.7294829", "-10.8169456"],
        ["0.00288930", "0.00114527", "0.00039677"],
    ),
    (
        "Pluto",
        "1e-8",
        ["-15.5387357", "-25.2225594", "-3.1902382"],
        ["0.00276725", "-0.00170702", "-0.00136504"],
    ),
];

/// Sun, the four giant planets and Pluto; time in days.
pub fn outer_solar<S: Scalar>() -> NBody<S> {
    let mut masses = Vec::with_capacity(6);
    let mut xs = Vec::with_capacity(6);
    let mut ps = Vec::with_capacity(6);
    for (name, m, x, v) in OUTER_SOLAR {
        let mut m = lit::<S>(m);
        if name == "Pluto" {
            m = m * S::from_f64(10.0) / S::from_f64(13.0);
        }
        xs.push(x.iter().map(|s| lit::<S>(s)).collect::<Vec<_>>());
        ps.push(v.iter().map(|s| m * lit::<S>(s)).collect::<Vec<_>>());
        masses.push(m);
    }
    NBody::new(
        "outer_solar",
        masses,
        lit("2.95912208286e-4"),
        BodySpace::from_columns(&xs),
        BodySpace::from_columns(&ps),
    )
    .expect("valid outer solar system data")
}

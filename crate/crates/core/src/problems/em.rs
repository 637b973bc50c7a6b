use super::{sq, Hamiltonian, ProblemError};
use crate::numerics::{lit, BodySpace, Scalar};

/// Field configurations for the charged particle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EmVariant {
    /// `phi = -1/(0.1 + |x|)`, `A = (0, k x1, 0)` with `k = 1000`.
    Scb,
    /// `phi = 2 cos^2 x1 + sin^2 x1 (sin x2 cos x2 + sin x3 cos x3)`,
    /// `A = (r^2, r^2 x2/x1, -2 log(1 + r^2))`.
    Challenging,
    /// No field at all; a free particle.
    Free,
}

/// Potentials and their first and second spatial derivatives at one point.
struct Fields<S> {
    a: [S; 3],
    /// `da[i][j] = d_j A_i`
    da: [[S; 3]; 3],
    /// `dda[i][j][l] = d_j d_l A_i`
    dda: [[[S; 3]; 3]; 3],
    phi: S,
    dphi: [S; 3],
    ddphi: [[S; 3]; 3],
}

/// Charged particle, `H = |p - e A(x)|^2 / 2m + e phi(x)`.
#[derive(Clone, Debug)]
pub struct EmParticle<S> {
    pub variant: EmVariant,
    pub m: S,
    pub e: S,
    pub x0: [S; 3],
    pub p0: [S; 3],
    /// Magnetic strength `k` in `A = (0, k x1, 0)` for [`EmVariant::Scb`]; 1000 by default.
    pub field: S,
}

impl<S: Scalar> EmParticle<S> {
    pub fn new(variant: EmVariant, m: S, e: S, x0: [S; 3], p0: [S; 3]) -> Result<Self, ProblemError> {
        if !(m > S::zero()) {
            return Err(ProblemError::Config("mass must be positive".into()));
        }
        let p = Self { variant, m, e, x0, p0, field: lit("1000") };
        p.fields(&x0)?;
        Ok(p)
    }

    /// Initial data used for each variant in the benchmarks; unit mass and charge.
    pub fn paper(variant: EmVariant) -> Self {
        let (one, zero) = (S::one(), S::zero());
        let (x0, p0) = match variant {
            EmVariant::Scb => ([one, zero, zero], [zero, lit("101"), zero]),
            EmVariant::Challenging => ([lit("0.5"), lit("-0.25"), lit("-0.25")], [zero, zero, -one]),
            EmVariant::Free => ([zero; 3], [one, zero, zero]),
        };
        Self::new(variant, one, one, x0, p0).expect("valid initial data")
    }

    /// Replaces the SCB magnetic strength.
    pub fn with_field(mut self, field: S) -> Self {
        self.field = field;
        self
    }

    fn fields(&self, x: &[S; 3]) -> Result<Fields<S>, ProblemError> {
        let z = S::zero();
        let mut f = Fields {
            a: [z; 3],
            da: [[z; 3]; 3],
            dda: [[[z; 3]; 3]; 3],
            phi: z,
            dphi: [z; 3],
            ddphi: [[z; 3]; 3],
        };
        match self.variant {
            EmVariant::Free => {}
            EmVariant::Scb => scb(x, self.field, &mut f)?,
            EmVariant::Challenging => challenging(x, &mut f)?,
        }
        Ok(f)
    }

    fn velocity(&self, p: &BodySpace<S>, f: &Fields<S>) -> [S; 3] {
        std::array::from_fn(|i| (p[(i, 0)] - self.e * f.a[i]) / self.m)
    }
}

fn point<S: Scalar>(x: &BodySpace<S>) -> [S; 3] {
    [x[(0, 0)], x[(1, 0)], x[(2, 0)]]
}

fn scb<S: Scalar>(x: &[S; 3], k: S, f: &mut Fields<S>) -> Result<(), ProblemError> {
    let c = lit::<S>("0.1");
    let rho = (sq(x[0]) + sq(x[1]) + sq(x[2])).sqrt();
    if rho == S::zero() {
        return Err(ProblemError::Singularity("electric potential gradient undefined at x = 0".into()));
    }
    f.a[1] = k * x[0];
    f.da[1][0] = k;
    let cr = c + rho;
    f.phi = -S::one() / cr;
    // grad phi = g(rho) x with g = 1/(rho (c+rho)^2)
    let g = S::one() / (rho * cr * cr);
    let gp = -S::one() / (rho * rho * cr * cr) - S::from_f64(2.0) / (rho * cr * cr * cr);
    for i in 0..3 {
        f.dphi[i] = g * x[i];
        for j in 0..3 {
            let delta = if i == j { g } else { S::zero() };
            f.ddphi[i][j] = delta + x[i] * x[j] * gp / rho;
        }
    }
    Ok(())
}

fn challenging<S: Scalar>(x: &[S; 3], f: &mut Fields<S>) -> Result<(), ProblemError> {
    let [x1, x2, x3] = *x;
    if x1 == S::zero() || !x1.is_finite() {
        return Err(ProblemError::Singularity("magnetic potential singular at x1 = 0".into()));
    }
    let one = S::one();
    let two = S::from_f64(2.0);
    let (s1, c1) = x1.sin_cos();
    let (s2x1, c2x1) = (two * x1).sin_cos();
    let (s2x2, c2x2) = (two * x2).sin_cos();
    let (s2x3, c2x3) = (two * x3).sin_cos();
    let q = (s2x2 + s2x3) / two;
    let s1sq = s1 * s1;

    f.phi = two * c1 * c1 + s1sq * q;
    f.dphi = [s2x1 * (q - two), s1sq * c2x2, s1sq * c2x3];
    f.ddphi = [
        [two * c2x1 * (q - two), s2x1 * c2x2, s2x1 * c2x3],
        [s2x1 * c2x2, -two * s1sq * s2x2, S::zero()],
        [s2x1 * c2x3, S::zero(), -two * s1sq * s2x3],
    ];

    let r2 = sq(x1) + sq(x2) + sq(x3);
    let u = sq(x2) + sq(x3);
    let opr = one + r2;
    // A1 = r^2
    f.a[0] = r2;
    for j in 0..3 {
        f.da[0][j] = two * x[j];
        f.dda[0][j][j] = two;
    }
    // A2 = r^2 x2 / x1
    f.a[1] = r2 * x2 / x1;
    let x1sq = x1 * x1;
    let three = S::from_f64(3.0);
    f.da[1] = [x2 - x2 * u / x1sq, x1 + (three * sq(x2) + sq(x3)) / x1, two * x2 * x3 / x1];
    let d11 = two * x2 * u / (x1sq * x1);
    let d12 = one - (three * sq(x2) + sq(x3)) / x1sq;
    let d13 = -two * x2 * x3 / x1sq;
    let d22 = S::from_f64(6.0) * x2 / x1;
    let d23 = two * x3 / x1;
    let d33 = two * x2 / x1;
    f.dda[1] = [[d11, d12, d13], [d12, d22, d23], [d13, d23, d33]];
    // A3 = -2 log(1 + r^2)
    f.a[2] = -two * opr.ln();
    let four = S::from_f64(4.0);
    let eight = S::from_f64(8.0);
    for j in 0..3 {
        f.da[2][j] = -four * x[j] / opr;
        for l in 0..3 {
            let delta = if j == l { -four / opr } else { S::zero() };
            f.dda[2][j][l] = delta + eight * x[j] * x[l] / (opr * opr);
        }
    }
    Ok(())
}

impl<S: Scalar> Hamiltonian<S> for EmParticle<S> {
    fn name(&self) -> &str {
        match self.variant {
            EmVariant::Scb => "em_scb",
            EmVariant::Challenging => "em_challenging",
            EmVariant::Free => "em_free",
        }
    }

    fn shape(&self) -> (usize, usize) {
        (3, 1)
    }

    fn initial_state(&self) -> (BodySpace<S>, BodySpace<S>) {
        (BodySpace::from_vec(self.x0.to_vec()), BodySpace::from_vec(self.p0.to_vec()))
    }

    fn is_separable(&self) -> bool {
        self.variant == EmVariant::Free
    }

    fn parameters(&self) -> Vec<(&'static str, S)> {
        match self.variant {
            EmVariant::Scb => vec![("m", self.m), ("e", self.e), ("field", self.field)],
            _ => vec![("m", self.m), ("e", self.e)],
        }
    }

    fn energy(&self, x: &BodySpace<S>, p: &BodySpace<S>) -> Result<S, ProblemError> {
        let f = self.fields(&point(x))?;
        let v = self.velocity(p, &f);
        let v2 = v.iter().fold(S::zero(), |acc, &c| acc + c * c);
        Ok(S::from_f64(0.5) * self.m * v2 + self.e * f.phi)
    }

    fn first_rhs(
        &self,
        x: &BodySpace<S>,
        p: &BodySpace<S>,
        dx: &mut BodySpace<S>,
        dp: &mut BodySpace<S>,
    ) -> Result<(), ProblemError> {
        let f = self.fields(&point(x))?;
        let v = self.velocity(p, &f);
        for l in 0..3 {
            dx[(l, 0)] = v[l];
            // ([dA]^T v)_l = sum_i d_l A_i v_i
            let mut acc = -f.dphi[l];
            for i in 0..3 {
                acc += f.da[i][l] * v[i];
            }
            dp[(l, 0)] = self.e * acc;
        }
        Ok(())
    }

    fn second_rhs(
        &self,
        x: &BodySpace<S>,
        p: &BodySpace<S>,
        vx: &BodySpace<S>,
        vp: &BodySpace<S>,
        sx: &mut BodySpace<S>,
        sp: &mut BodySpace<S>,
    ) -> Result<(), ProblemError> {
        let f = self.fields(&point(x))?;
        let v = self.velocity(p, &f);
        let xd = [vx[(0, 0)], vx[(1, 0)], vx[(2, 0)]];
        // derivative of the velocity: (P' - e [dA] X') / m
        let mut acc_v = [S::zero(); 3];
        for i in 0..3 {
            let mut da_xd = S::zero();
            for j in 0..3 {
                da_xd += f.da[i][j] * xd[j];
            }
            acc_v[i] = (vp[(i, 0)] - self.e * da_xd) / self.m;
            sx[(i, 0)] = acc_v[i];
        }
        for l in 0..3 {
            let mut acc = S::zero();
            for i in 0..3 {
                acc += f.da[i][l] * acc_v[i];
                for j in 0..3 {
                    acc += f.dda[i][l][j] * xd[j] * v[i];
                }
                acc -= f.ddphi[l][i] * xd[i];
            }
            sp[(l, 0)] = self.e * acc;
        }
        Ok(())
    }
}

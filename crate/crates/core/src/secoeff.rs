//! Structural-equation coefficients.
//!
//! The structural equations of a block of `R` steps are the `R` independent linear
//! relations among the node values `Z_r`, first derivatives `D_r` (and for ZDS second
//! derivatives `S_r`), `r = 0..R`, that hold exactly for every polynomial of low enough
//! degree. They are found as the kernel of a monomial exactness matrix on the unit grid,
//! then solved for the unknown block values and rescaled to the physical step.
//!
//! All linear algebra here runs in double-double; tables are rounded to the target
//! backend only at the end.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{DoubleDouble, Scalar};

pub const MAX_R: usize = 12;
pub const MAX_CONDITION: f64 = 1e12;

type DD = DoubleDouble;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoeffError {
    #[error("block size R={0} outside supported range 1..={MAX_R}")]
    BlockSize(usize),
    #[error("{formulation} R={r}: kernel dimension {found}, expected {r}")]
    KernelDimension { formulation: Formulation, r: usize, found: usize },
    #[error("{formulation} R={r}: A_z is singular or ill-conditioned (condition {condition:.3e})")]
    IllConditioned { formulation: Formulation, r: usize, condition: f64 },
    #[error("time step must be positive and finite, got {0}")]
    TimeStep(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formulation {
    #[serde(rename = "zd")]
    Zd,
    #[serde(rename = "zds")]
    Zds,
}

impl Formulation {
    /// Number of derivative levels carried per node (values count as level 0).
    pub fn levels(self) -> usize {
        match self {
            Formulation::Zd => 2,
            Formulation::Zds => 3,
        }
    }

    /// Highest monomial degree the retained exactness rows enforce.
    pub fn exactness_degree(self, r: usize) -> usize {
        self.levels() * (r + 1) - r - 1
    }

    /// Nominal convergence order of the integrator.
    pub fn nominal_order(self, r: usize) -> usize {
        match self {
            Formulation::Zd => r + 2,
            Formulation::Zds => 2 * (r + 1),
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Formulation::Zd => "ZD",
            Formulation::Zds => "ZDS",
        })
    }
}

/// Dense row-major matrix, just enough for the small systems here.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Copy> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

/// Column index of `(node r, derivative order s)` in the coefficient layout.
#[inline]
pub fn column(r_max: usize, r: usize, s: usize) -> usize {
    s * (r_max + 1) + r
}

/// `d^s/dt^s t^k` evaluated at `t`.
fn monomial_derivative(k: usize, s: usize, t: DD) -> DD {
    if s > k {
        return DD::ZERO;
    }
    let mut c = 1.0;
    for j in 0..s {
        c *= (k - j) as f64;
    }
    DD::from_f64(c) * t.powi((k - s) as i32)
}

/// Full square exactness matrix on the unit grid: row `l` holds the derivatives of
/// `t^l` at the nodes `0..=R`, laid out by derivative order then node.
pub fn build_exactness_matrix(r: usize, formulation: Formulation) -> Result<Matrix<DD>, CoeffError> {
    if r == 0 || r > MAX_R {
        return Err(CoeffError::BlockSize(r));
    }
    let n = formulation.levels() * (r + 1);
    let mut m = Matrix::from_fn(n, n, |_, _| DD::ZERO);
    for l in 0..n {
        for s in 0..formulation.levels() {
            for node in 0..=r {
                let v = monomial_derivative(l, s, DD::from_f64(node as f64));
                m.set(l, column(r, node, s), v);
            }
        }
    }
    Ok(m)
}

/// Orthonormal kernel of the reduced exactness matrix, on the unit grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RawBasis {
    pub r: usize,
    pub formulation: Formulation,
    /// `vectors[m][column(R, r, s)] = a^m_{r,s}`.
    pub vectors: Vec<Vec<DD>>,
}

impl RawBasis {
    #[inline]
    pub fn coeff(&self, m: usize, r: usize, s: usize) -> DD {
        self.vectors[m][column(self.r, r, s)]
    }

    /// Residual of each basis vector against the retained exactness rows, relative to
    /// the vector norm and the largest row entry.
    pub fn null_residual(&self) -> f64 {
        let m = build_exactness_matrix(self.r, self.formulation).expect("valid basis size");
        let keep = m.rows - self.r;
        let mut worst = 0.0f64;
        for v in &self.vectors {
            let vn = v.iter().fold(DD::ZERO, |acc, &x| acc + x * x).sqrt().to_f64();
            for l in 0..keep {
                let row = m.row(l);
                let dot = row.iter().zip(v).fold(DD::ZERO, |acc, (&a, &b)| acc + a * b);
                let scale = row.iter().fold(0.0f64, |acc, x| acc.max(x.to_f64().abs()));
                worst = worst.max(dot.to_f64().abs() / (vn * scale));
            }
        }
        worst
    }
}

// Householder QR with column pivoting of an n x m matrix (n >= m); returns the
// reflector vectors, their scalings and the diagonal of R.
struct Qr {
    vs: Vec<Vec<DD>>,
    betas: Vec<DD>,
    diag: Vec<f64>,
}

fn householder_qr_pivoted(mut a: Vec<Vec<DD>>) -> Qr {
    // `a` is stored by column
    let m = a.len();
    let n = a.first().map_or(0, Vec::len);
    let mut vs = Vec::with_capacity(m);
    let mut betas = Vec::with_capacity(m);
    let mut diag = Vec::with_capacity(m);
    for k in 0..m {
        // pivot: remaining column with the largest trailing norm
        let norm2 = |c: &Vec<DD>| c[k..].iter().fold(DD::ZERO, |acc, &x| acc + x * x);
        let mut best = k;
        let mut best_norm = norm2(&a[k]);
        for (j, col) in a.iter().enumerate().skip(k + 1) {
            let nj = norm2(col);
            if nj > best_norm {
                best = j;
                best_norm = nj;
            }
        }
        a.swap(k, best);
        let alpha = best_norm.sqrt();
        let x0 = a[k][k];
        // v = x + sign(x0) |x| e_k
        let alpha = if x0.hi < 0.0 { -alpha } else { alpha };
        let mut v = vec![DD::ZERO; n];
        v[k..].copy_from_slice(&a[k][k..]);
        v[k] += alpha;
        let vtv = v[k..].iter().fold(DD::ZERO, |acc, &x| acc + x * x);
        let beta = if vtv.hi == 0.0 { DD::ZERO } else { DD::from_f64(2.0) / vtv };
        for col in a.iter_mut().skip(k) {
            let d = v[k..].iter().zip(&col[k..]).fold(DD::ZERO, |acc, (&x, &y)| acc + x * y);
            let f = beta * d;
            for (c, &vi) in col[k..].iter_mut().zip(&v[k..]) {
                *c -= f * vi;
            }
        }
        diag.push(a[k][k].to_f64().abs());
        vs.push(v);
        betas.push(beta);
    }
    Qr { vs, betas, diag }
}

/// Computes an orthonormal basis of the null space of the first `S(R+1) - R` rows of
/// the exactness matrix.
///
/// The kernel is read off the trailing columns of `Q` in a pivoted QR factorization of
/// the transposed, row-equilibrated reduced matrix. Each vector is then signed so that
/// its first entry of largest magnitude is positive.
pub fn kernel_basis(r: usize, formulation: Formulation) -> Result<RawBasis, CoeffError> {
    let full = build_exactness_matrix(r, formulation)?;
    let n = full.cols;
    let keep = n - r;
    // columns of M^T are the retained rows, each scaled to unit max entry
    let cols: Vec<Vec<DD>> = (0..keep)
        .map(|l| {
            let row = full.row(l);
            let scale = row.iter().fold(0.0f64, |acc, x| acc.max(x.to_f64().abs()));
            row.iter().map(|&x| x / scale).collect()
        })
        .collect();
    let qr = householder_qr_pivoted(cols);
    let lead = qr.diag.first().copied().unwrap_or(0.0);
    let rank = qr.diag.iter().filter(|&&d| d > 1e-26 * lead).count();
    if rank != keep {
        return Err(CoeffError::KernelDimension { formulation, r, found: n - rank });
    }
    let mut vectors = Vec::with_capacity(r);
    for j in keep..n {
        // Q e_j = H_0 H_1 ... H_{keep-1} e_j
        let mut q = vec![DD::ZERO; n];
        q[j] = DD::ONE;
        for k in (0..keep).rev() {
            let v = &qr.vs[k];
            let d = v.iter().zip(&q).fold(DD::ZERO, |acc, (&x, &y)| acc + x * y);
            let f = qr.betas[k] * d;
            for (qi, &vi) in q.iter_mut().zip(v) {
                *qi -= f * vi;
            }
        }
        fix_sign(&mut q);
        vectors.push(q);
    }
    Ok(RawBasis { r, formulation, vectors })
}

fn fix_sign(v: &mut [DD]) {
    let big = v.iter().fold(0.0f64, |acc, x| acc.max(x.to_f64().abs()));
    // ties within rounding noise go to the earliest entry
    if let Some(first) = v.iter().find(|x| x.to_f64().abs() >= big * (1.0 - 1e-20)) {
        if first.hi < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Solver-ready structural equations for one block size and time step.
///
/// The structural equations read, for `m = 1..R`,
/// `Z_m + b_z[m] Z_0 + b_d[m] D_0 + b_s[m] S_0 + sum_r (B_d[m][r] D_r + B_s[m][r] S_r) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffTable<S> {
    pub r: usize,
    pub formulation: Formulation,
    pub dt: S,
    /// `R x R`, row-major; row = equation, column = node `1..=R`.
    pub b_d_mat: Vec<S>,
    pub b_s_mat: Vec<S>,
    pub b_z: Vec<S>,
    pub b_d: Vec<S>,
    pub b_s: Vec<S>,
    /// 1-norm condition number of `A_z`.
    pub condition_az: f64,
}

impl<S: Scalar> CoeffTable<S> {
    #[inline]
    pub fn bd(&self, m: usize, r: usize) -> S {
        self.b_d_mat[m * self.r + r]
    }

    #[inline]
    pub fn bs(&self, m: usize, r: usize) -> S {
        self.b_s_mat[m * self.r + r]
    }
}

// LU with partial pivoting; solves A X = B for every column of B in place and returns
// the 1-norm of the inverse, or `None` if A is singular.
fn lu_solve(a: &Matrix<DD>, rhs: &mut [Vec<DD>]) -> Option<f64> {
    let n = a.rows;
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| {
            lu.get(i, k).abs().partial_cmp(&lu.get(j, k).abs()).unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if lu.get(p, k).hi == 0.0 {
            return None;
        }
        if p != k {
            for j in 0..n {
                let t = lu.get(k, j);
                lu.set(k, j, lu.get(p, j));
                lu.set(p, j, t);
            }
            perm.swap(k, p);
        }
        let piv = lu.get(k, k);
        for i in k + 1..n {
            let f = lu.get(i, k) / piv;
            lu.set(i, k, f);
            for j in k + 1..n {
                let v = lu.get(i, j) - f * lu.get(k, j);
                lu.set(i, j, v);
            }
        }
    }
    let solve = |b: &[DD]| -> Vec<DD> {
        let mut y: Vec<DD> = perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            for j in 0..i {
                let v = y[i] - lu.get(i, j) * y[j];
                y[i] = v;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let v = y[i] - lu.get(i, j) * y[j];
                y[i] = v;
            }
            y[i] = y[i] / lu.get(i, i);
        }
        y
    };
    for b in rhs.iter_mut() {
        *b = solve(b);
    }
    let mut inv_norm = 0.0f64;
    for j in 0..n {
        let mut e = vec![DD::ZERO; n];
        e[j] = DD::ONE;
        let col = solve(&e);
        inv_norm = inv_norm.max(col.iter().map(|x| x.to_f64().abs()).sum());
    }
    Some(inv_norm)
}

/// Unit-grid solved coefficients, kept in double-double.
#[derive(Clone, Debug)]
struct UnitTable {
    b_d_mat: Vec<DD>,
    b_s_mat: Vec<DD>,
    b_z: Vec<DD>,
    b_d: Vec<DD>,
    b_s: Vec<DD>,
    condition: f64,
}

fn solve_unit(basis: &RawBasis) -> Result<UnitTable, CoeffError> {
    let r = basis.r;
    let formulation = basis.formulation;
    let az = Matrix::from_fn(r, r, |m, node| basis.coeff(m, node + 1, 0));
    let az_norm = (0..r)
        .map(|j| (0..r).map(|i| az.get(i, j).to_f64().abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    // right-hand sides: one column per unknown coefficient
    let mut rhs: Vec<Vec<DD>> = Vec::new();
    rhs.push((0..r).map(|m| basis.coeff(m, 0, 0)).collect());
    rhs.push((0..r).map(|m| basis.coeff(m, 0, 1)).collect());
    for node in 1..=r {
        rhs.push((0..r).map(|m| basis.coeff(m, node, 1)).collect());
    }
    let zds = formulation == Formulation::Zds;
    if zds {
        rhs.push((0..r).map(|m| basis.coeff(m, 0, 2)).collect());
        for node in 1..=r {
            rhs.push((0..r).map(|m| basis.coeff(m, node, 2)).collect());
        }
    }
    let inv_norm = lu_solve(&az, &mut rhs).ok_or(CoeffError::IllConditioned {
        formulation,
        r,
        condition: f64::INFINITY,
    })?;
    let condition = az_norm * inv_norm;
    if !(condition.is_finite() && condition <= MAX_CONDITION) {
        return Err(CoeffError::IllConditioned { formulation, r, condition });
    }
    let gather = |cols: &[Vec<DD>]| {
        let mut mat = vec![DD::ZERO; r * r];
        for (node, col) in cols.iter().enumerate() {
            for m in 0..r {
                mat[m * r + node] = col[m];
            }
        }
        mat
    };
    let b_z = rhs[0].clone();
    let b_d = rhs[1].clone();
    let b_d_mat = gather(&rhs[2..2 + r]);
    let (b_s, b_s_mat) = if zds {
        (rhs[2 + r].clone(), gather(&rhs[3 + r..3 + 2 * r]))
    } else {
        (Vec::new(), Vec::new())
    };
    Ok(UnitTable { b_d_mat, b_s_mat, b_z, b_d, b_s, condition })
}

/// Solves the structural equations for the block values and rescales to step `dt`.
pub fn assemble_tables<S: Scalar>(basis: &RawBasis, dt: S) -> Result<CoeffTable<S>, CoeffError> {
    let dtf = dt.to_f64();
    if !(dtf > 0.0 && dtf.is_finite()) {
        return Err(CoeffError::TimeStep(dtf));
    }
    let unit = solve_unit(basis)?;
    Ok(rescale(basis.r, basis.formulation, &unit, dt))
}

fn rescale<S: Scalar>(r: usize, formulation: Formulation, unit: &UnitTable, dt: S) -> CoeffTable<S> {
    let dt2 = dt * dt;
    let conv = |v: &[DD], f: S| v.iter().map(|&x| S::from_dd(x) * f).collect::<Vec<S>>();
    CoeffTable {
        r,
        formulation,
        dt,
        b_d_mat: conv(&unit.b_d_mat, dt),
        b_s_mat: conv(&unit.b_s_mat, dt2),
        b_z: conv(&unit.b_z, S::one()),
        b_d: conv(&unit.b_d, dt),
        b_s: conv(&unit.b_s, dt2),
        condition_az: unit.condition,
    }
}

type CacheEntry = Arc<(RawBasis, UnitTable)>;

fn cache() -> &'static Mutex<HashMap<(usize, Formulation), CacheEntry>> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, Formulation), CacheEntry>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cached(r: usize, formulation: Formulation) -> Result<CacheEntry, CoeffError> {
    if let Some(e) = cache().lock().expect("coefficient cache poisoned").get(&(r, formulation)) {
        return Ok(Arc::clone(e));
    }
    let basis = kernel_basis(r, formulation)?;
    let unit = solve_unit(&basis)?;
    log::debug!("{formulation} R={r}: cond(A_z) = {:.3e}", unit.condition);
    let entry = Arc::new((basis, unit));
    cache()
        .lock()
        .expect("coefficient cache poisoned")
        .insert((r, formulation), Arc::clone(&entry));
    Ok(entry)
}

/// Cached kernel basis for `(R, formulation)`.
pub fn cached_basis(r: usize, formulation: Formulation) -> Result<RawBasis, CoeffError> {
    Ok(cached(r, formulation)?.0.clone())
}

/// Table for `(R, formulation, dt)`, reusing the cached unit-grid solve.
pub fn table<S: Scalar>(r: usize, formulation: Formulation, dt: S) -> Result<CoeffTable<S>, CoeffError> {
    let dtf = dt.to_f64();
    if !(dtf > 0.0 && dtf.is_finite()) {
        return Err(CoeffError::TimeStep(dtf));
    }
    let entry = cached(r, formulation)?;
    Ok(rescale(r, formulation, &entry.1, dt))
}

/// Worst normalized residual of the table's structural equations applied to
/// `t^degree` sampled at `t = r dt`, `r = 0..=R`.
pub fn exactness_residual<S: Scalar>(table: &CoeffTable<S>, degree: usize) -> f64 {
    let r = table.r;
    let k = degree as i32;
    let t = |node: usize| S::from_i(node as i64) * table.dt;
    let z = |node: usize| t(node).powi(k);
    let d = |node: usize| {
        if degree == 0 {
            S::zero()
        } else {
            S::from_i(degree as i64) * t(node).powi(k - 1)
        }
    };
    let s = |node: usize| {
        if degree < 2 {
            S::zero()
        } else {
            S::from_i((degree * (degree - 1)) as i64) * t(node).powi(k - 2)
        }
    };
    let zds = table.formulation == Formulation::Zds;
    let phi_max = (0..=r).map(|n| z(n).abs().to_f64()).fold(0.0f64, f64::max);
    let mut worst = 0.0f64;
    for m in 0..r {
        let mut acc = z(m + 1) + table.b_z[m] * z(0) + table.b_d[m] * d(0);
        let mut norm = 1.0 + table.b_z[m].abs().to_f64() + table.b_d[m].abs().to_f64();
        for node in 0..r {
            acc += table.bd(m, node) * d(node + 1);
            norm += table.bd(m, node).abs().to_f64();
        }
        if zds {
            acc += table.b_s[m] * s(0);
            norm += table.b_s[m].abs().to_f64();
            for node in 0..r {
                acc += table.bs(m, node) * s(node + 1);
                norm += table.bs(m, node).abs().to_f64();
            }
        }
        worst = worst.max(acc.abs().to_f64() / (norm * phi_max));
    }
    worst
}

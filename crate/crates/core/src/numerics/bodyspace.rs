use std::ops::{Index, IndexMut};

use super::Scalar;

/// `I x K` real matrix; column `k` holds the `I` coordinates of body `k`.
#[derive(Clone, Debug, PartialEq)]
pub struct BodySpace<S> {
    dim: usize,
    bodies: usize,
    data: Vec<S>,
}

impl<S: Scalar> BodySpace<S> {
    pub fn zeros(dim: usize, bodies: usize) -> Self {
        Self { dim, bodies, data: vec![S::zero(); dim * bodies] }
    }

    /// Builds from per-body columns.
    pub fn from_columns(cols: &[Vec<S>]) -> Self {
        let dim = cols.first().map_or(0, Vec::len);
        assert!(cols.iter().all(|c| c.len() == dim), "ragged body columns");
        let data = cols.iter().flat_map(|c| c.iter().copied()).collect();
        Self { dim, bodies: cols.len(), data }
    }

    /// Single body with the given coordinates.
    pub fn from_vec(v: Vec<S>) -> Self {
        Self { dim: v.len(), bodies: 1, data: v }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bodies(&self) -> usize {
        self.bodies
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.dim, self.bodies)
    }

    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn body(&self, k: usize) -> &[S] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn body_mut(&mut self, k: usize) -> &mut [S] {
        &mut self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn fill(&mut self, v: S) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    pub fn copy_from(&mut self, other: &Self) {
        debug_assert_eq!(self.shape(), other.shape());
        self.data.copy_from_slice(&other.data);
    }

    /// `self += a * x`
    #[inline]
    pub fn axpy(&mut self, a: S, x: &Self) {
        debug_assert_eq!(self.shape(), x.shape());
        for (y, &xv) in self.data.iter_mut().zip(&x.data) {
            *y += a * xv;
        }
    }

    pub fn scale(&mut self, a: S) {
        self.data.iter_mut().for_each(|x| *x *= a);
    }

    pub fn max_norm(&self) -> S {
        self.data.iter().fold(S::zero(), |m, &x| m.max(x.abs()))
    }

    /// Max-norm of `self - other`.
    pub fn max_diff(&self, other: &Self) -> S {
        self.data
            .iter()
            .zip(&other.data)
            .fold(S::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl<S> Index<(usize, usize)> for BodySpace<S> {
    type Output = S;
    #[inline]
    fn index(&self, (i, k): (usize, usize)) -> &S {
        &self.data[k * self.dim + i]
    }
}

impl<S> IndexMut<(usize, usize)> for BodySpace<S> {
    #[inline]
    fn index_mut(&mut self, (i, k): (usize, usize)) -> &mut S {
        &mut self.data[k * self.dim + i]
    }
}

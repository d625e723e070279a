//! Matrix-free linear operators and the few dense-vector kernels shared by
//! the rest of the crate.

/// A square linear map `x -> y` on `R^n`, applied without materializing a
/// matrix.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    /// Writes `M x` into `y`. Both slices have length `dim()`.
    fn apply_into(&self, x: &[f64], y: &mut [f64]);

    fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply_into(x, &mut y);
        y
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply_into(x, y)
    }
}

/// Wraps a closure as an operator.
pub struct FnOperator<F> {
    n: usize,
    f: F,
}

impl<F> FnOperator<F>
where
    F: Fn(&[f64], &mut [f64]),
{
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F> LinearOperator for FnOperator<F>
where
    F: Fn(&[f64], &mut [f64]),
{
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
}

/// `M - lambda v v^T` for a unit vector `v`.
pub struct Deflated<'a, M: ?Sized> {
    inner: &'a M,
    lambda: f64,
    v: &'a [f64],
}

impl<'a, M: LinearOperator + ?Sized> Deflated<'a, M> {
    pub fn new(inner: &'a M, lambda: f64, v: &'a [f64]) -> Self {
        Self { inner, lambda, v }
    }
}

impl<M: LinearOperator + ?Sized> LinearOperator for Deflated<'_, M> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.inner.apply_into(x, y);
        let c = self.lambda * dot(self.v, x);
        axpy(-c, self.v, y);
    }
}

/// `M - gamma s s^T`.
pub struct RankOneShift<'a, M: ?Sized> {
    inner: &'a M,
    gamma: f64,
    s: &'a [f64],
}

impl<'a, M: LinearOperator + ?Sized> RankOneShift<'a, M> {
    pub fn new(inner: &'a M, gamma: f64, s: &'a [f64]) -> Self {
        Self { inner, gamma, s }
    }
}

impl<M: LinearOperator + ?Sized> LinearOperator for RankOneShift<'_, M> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.inner.apply_into(x, y);
        let c = self.gamma * dot(self.s, x);
        axpy(-c, self.s, y);
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

pub fn sum(a: &[f64]) -> f64 {
    a.iter().sum()
}

//! Power iteration for symmetric matrix-free operators.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linop::{axpy, dot, norm2, scale, LinearOperator};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOptions {
    /// Converged once `|M v - lambda v| <= tol * |lambda|`.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// Unit vector, determined up to sign.
    pub vector: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    /// Set when the operator annihilated the start vector; `value` is 0
    /// and `vector` is arbitrary.
    pub degenerate: bool,
}

fn random_unit(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = rng_from_seed(seed);
    let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let nv = norm2(&v);
    scale(1.0 / nv, &mut v);
    v
}

// With |M v| settled, a residual that fails to shrink by 1% over this many
// rounds means the iterate is bouncing between a +-lambda pair.
const STALL_WINDOW: usize = 8;
const STALL_FACTOR: f64 = 0.99;
const MIN_PLAIN_ROUNDS: usize = 16;

/// Dominant-modulus eigenpair of a symmetric operator.
///
/// Plain iteration is used while the Rayleigh quotient tracks `|M v|`. When
/// the iterate oscillates between eigenvalues of opposite sign, iteration
/// continues on `M^2` and the signed pair is recovered from `v +- M v / |lambda|`.
pub fn power_iteration<M: LinearOperator + ?Sized>(
    op: &M,
    opts: &PowerOptions,
) -> Result<EigenPair> {
    if opts.tol.is_nan() || opts.tol <= 0.0 {
        return Err(Error::invalid(format!(
            "tolerance {} must be positive",
            opts.tol
        )));
    }
    let n = op.dim();
    if n == 0 {
        return Err(Error::invalid("operator has dimension zero"));
    }
    let mut v = random_unit(n, opts.seed);
    let mut w = vec![0.0; n];
    op.apply_into(&v, &mut w);
    if norm2(&w) == 0.0 {
        return Ok(EigenPair {
            value: 0.0,
            vector: v,
            residual: 0.0,
            iterations: 1,
            degenerate: true,
        });
    }

    let mut history = std::collections::VecDeque::with_capacity(STALL_WINDOW + 1);
    let mut prev_rho = 0.0;
    let mut residual = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        let lambda = dot(&v, &w);
        let rho = norm2(&w);
        residual = residual_norm(&w, lambda, &v);
        if residual <= opts.tol * lambda.abs() {
            return Ok(EigenPair {
                value: lambda,
                vector: v,
                residual,
                iterations: iter,
                degenerate: false,
            });
        }
        if rho == 0.0 {
            return Ok(EigenPair {
                value: 0.0,
                vector: v,
                residual: 0.0,
                iterations: iter,
                degenerate: true,
            });
        }
        history.push_back(residual / rho);
        let stalled = history.len() > STALL_WINDOW
            && history
                .pop_front()
                .is_some_and(|old| residual / rho > STALL_FACTOR * old);
        let stable = (rho - prev_rho).abs() <= 1e-3 * rho;
        prev_rho = rho;
        if iter >= MIN_PLAIN_ROUNDS && stable && stalled {
            return squared_iteration(op, v, opts, iter);
        }
        v.copy_from_slice(&w);
        scale(1.0 / rho, &mut v);
        op.apply_into(&v, &mut w);
    }
    Err(Error::Convergence {
        iterations: opts.max_iter,
        residual,
    })
}

fn residual_norm(w: &[f64], lambda: f64, v: &[f64]) -> f64 {
    w.iter()
        .zip(v)
        .map(|(wi, vi)| (wi - lambda * vi).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn squared_iteration<M: LinearOperator + ?Sized>(
    op: &M,
    mut v: Vec<f64>,
    opts: &PowerOptions,
    used: usize,
) -> Result<EigenPair> {
    let n = v.len();
    let mut mv = vec![0.0; n];
    let mut m2v = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for iter in used..opts.max_iter {
        op.apply_into(&v, &mut mv);
        op.apply_into(&mv, &mut m2v);
        let mu = dot(&mv, &mv);
        if mu == 0.0 {
            return Ok(EigenPair {
                value: 0.0,
                vector: v,
                residual: 0.0,
                iterations: iter,
                degenerate: true,
            });
        }
        residual = residual_norm(&m2v, mu, &v);
        if residual <= opts.tol * mu {
            let lambda = mu.sqrt();
            let (vector, value) = split_pair(&v, &mv, lambda);
            let check = op.apply_vec(&vector);
            return Ok(EigenPair {
                value,
                residual: residual_norm(&check, value, &vector),
                vector,
                iterations: iter + 1,
                degenerate: false,
            });
        }
        let nrm = norm2(&m2v);
        v.copy_from_slice(&m2v);
        scale(1.0 / nrm, &mut v);
    }
    Err(Error::Convergence {
        iterations: opts.max_iter,
        residual,
    })
}

/// Given `v` in the span of eigenvectors for `+lambda` and `-lambda` and
/// `mv = M v`, returns the larger of the two components (normalized) with
/// its signed eigenvalue.
fn split_pair(v: &[f64], mv: &[f64], lambda: f64) -> (Vec<f64>, f64) {
    let plus: Vec<f64> = v.iter().zip(mv).map(|(a, b)| a + b / lambda).collect();
    let minus: Vec<f64> = v.iter().zip(mv).map(|(a, b)| a - b / lambda).collect();
    let (np, nm) = (norm2(&plus), norm2(&minus));
    let (mut vec, value) = if np >= nm {
        (plus, lambda)
    } else {
        (minus, -lambda)
    };
    let nv = np.max(nm);
    scale(1.0 / nv, &mut vec);
    (vec, value)
}

/// `(I - v v^T) M (I - v v^T)`: the operator restricted to the orthogonal
/// complement of a unit vector.
struct Projected<'a, M: ?Sized> {
    inner: &'a M,
    v: &'a [f64],
}

impl<M: LinearOperator + ?Sized> Projected<'_, M> {
    fn project(&self, x: &mut [f64]) {
        let c = dot(self.v, x);
        axpy(-c, self.v, x);
    }
}

impl<M: LinearOperator + ?Sized> LinearOperator for Projected<'_, M> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let mut px = x.to_vec();
        self.project(&mut px);
        self.inner.apply_into(&px, y);
        self.project(y);
    }
}

/// Dominant eigenpair of the operator after deflating a converged pair.
/// The returned vector is orthogonal to `first.vector`.
pub fn second_eigenpair<M: LinearOperator + ?Sized>(
    op: &M,
    first: &EigenPair,
    opts: &PowerOptions,
) -> Result<EigenPair> {
    Error::check_dim(op.dim(), first.vector.len())?;
    let deflated = Projected {
        inner: op,
        v: &first.vector,
    };
    // what survives deflation of a rank-one operator is rounding noise
    let mut probe = random_unit(op.dim(), opts.seed);
    deflated.project(&mut probe);
    let probe_norm = norm2(&probe);
    if norm2(&deflated.apply_vec(&probe)) <= 1e-12 * first.value.abs() * probe_norm {
        scale(1.0 / probe_norm, &mut probe);
        return Ok(EigenPair {
            value: 0.0,
            vector: probe,
            residual: 0.0,
            iterations: 1,
            degenerate: true,
        });
    }
    let mut pair = power_iteration(&deflated, opts)?;
    deflated.project(&mut pair.vector);
    let nv = norm2(&pair.vector);
    if nv > 0.0 {
        scale(1.0 / nv, &mut pair.vector);
    }
    Ok(pair)
}

/// Restricts `op` to the complement of `v` (unit) for norm estimation.
pub fn projected<'a, M: LinearOperator + ?Sized>(
    op: &'a M,
    v: &'a [f64],
) -> impl LinearOperator + 'a {
    Projected { inner: op, v }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormOptions {
    /// Stop once one more round raises the estimate by at most
    /// `rel_tol * estimate`.
    pub rel_tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            max_iter: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub norm: f64,
    /// Sign of the eigenvalue that dominates the final iterate.
    pub sign: f64,
    pub iterations: usize,
}

impl NormEstimate {
    pub fn signed(&self) -> f64 {
        self.sign * self.norm
    }
}

/// Spectral norm of a symmetric operator from the ratios
/// `|M^{k+1} v| / |M^k v|`, which increase monotonically to `max |lambda|`.
/// Works for indefinite operators with no special handling of `+-lambda`
/// pairs; the estimate approaches the norm from below.
pub fn spectral_norm<M: LinearOperator + ?Sized>(
    op: &M,
    opts: &NormOptions,
) -> Result<NormEstimate> {
    if opts.rel_tol.is_nan() || opts.rel_tol <= 0.0 {
        return Err(Error::invalid(format!(
            "tolerance {} must be positive",
            opts.rel_tol
        )));
    }
    let n = op.dim();
    if n == 0 {
        return Err(Error::invalid("operator has dimension zero"));
    }
    let mut v = random_unit(n, opts.seed);
    let mut w = vec![0.0; n];
    let mut prev = 0.0;
    for iter in 1..=opts.max_iter {
        op.apply_into(&v, &mut w);
        let rho = norm2(&w);
        if rho == 0.0 {
            return Ok(NormEstimate {
                norm: 0.0,
                sign: 1.0,
                iterations: iter,
            });
        }
        if iter > 1 && rho - prev <= opts.rel_tol * rho {
            let plus: f64 = v.iter().zip(&w).map(|(a, b)| (a + b / rho).powi(2)).sum();
            let minus: f64 = v.iter().zip(&w).map(|(a, b)| (a - b / rho).powi(2)).sum();
            return Ok(NormEstimate {
                norm: rho,
                sign: if plus >= minus { 1.0 } else { -1.0 },
                iterations: iter,
            });
        }
        prev = rho;
        std::mem::swap(&mut v, &mut w);
        scale(1.0 / rho, &mut v);
    }
    Err(Error::Convergence {
        iterations: opts.max_iter,
        residual: f64::NAN,
    })
}

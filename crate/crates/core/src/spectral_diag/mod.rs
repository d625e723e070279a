//! Measured versions of every spectral quantity the recovery analysis
//! bounds: the degree-based signal strength `eta`, the degree deviation
//! `d'`, `|A - E[A]|`, the deviation `|M - gamma s s^T|` of a convolution
//! operator, its top eigenpairs and the correlation of the top eigenvector
//! with the planted signal.

mod power;

use serde::Serialize;

use crate::convolution::{build_operator, ConvOperator, OperatorKind, Sign};
use crate::csbm_model::{
    signal_vector, ExpectedAdjacency, ModelParams, Partition, SignalVector, SparseGraph,
};
use crate::error::{Error, Result};
use crate::linop::{dot, norm2, FnOperator, LinearOperator, RankOneShift};

pub use power::{
    power_iteration, projected, second_eigenpair, spectral_norm, EigenPair, NormEstimate,
    NormOptions, PowerOptions,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeStats {
    /// Empirical average degree `2|E| / n`.
    pub d: f64,
    /// `(p - q) n / (2 d)`
    pub eta: f64,
    /// `((p + q) n / 2 - d) / (n d)`
    pub d_prime: f64,
}

pub fn degree_stats(graph: &SparseGraph, params: &ModelParams) -> Result<DegreeStats> {
    Error::check_dim(params.n, graph.n())?;
    if graph.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let n = graph.n() as f64;
    let d = graph.average_degree();
    Ok(DegreeStats {
        d,
        eta: (params.p - params.q) * n / (2.0 * d),
        d_prime: (0.5 * (params.p + params.q) * n - d) / (n * d),
    })
}

/// `R = A - E[A]` applied matrix-free. `E[A]` keeps `p` on its diagonal
/// while sampled graphs have no self-loops, so `R` has diagonal `-p`.
pub fn error_matrix<'a>(
    graph: &'a SparseGraph,
    params: &ModelParams,
    s: &'a SignalVector,
) -> Result<impl LinearOperator + 'a> {
    Error::check_dim(graph.n(), s.len())?;
    let expected = ExpectedAdjacency::new(params.p, params.q, s);
    Ok(FnOperator::new(
        graph.n(),
        move |x: &[f64], y: &mut [f64]| {
            let mut ex = vec![0.0; x.len()];
            expected.apply_into(x, &mut ex);
            graph.adjacency_matvec(x, y);
            for (yi, ei) in y.iter_mut().zip(&ex) {
                *yi -= ei;
            }
        },
    ))
}

/// Estimated spectral norm of `A - E[A]`.
pub fn error_matrix_norm(
    graph: &SparseGraph,
    params: &ModelParams,
    s: &SignalVector,
    opts: &NormOptions,
) -> Result<f64> {
    let r = error_matrix(graph, params, s)?;
    Ok(spectral_norm(&r, opts)?.norm)
}

/// Estimated `|M - gamma s s^T|` for a symmetric convolution operator.
pub fn deviation_norm(
    op: &ConvOperator<'_>,
    gamma: f64,
    s: &SignalVector,
    opts: &NormOptions,
) -> Result<f64> {
    if !op.kind().is_symmetric() {
        return Err(Error::NotSymmetric(op.kind().name()));
    }
    deviation_norm_of(op, gamma, s, opts)
}

/// Same as [`deviation_norm`] for any symmetric operator.
pub fn deviation_norm_of<M: LinearOperator + ?Sized>(
    op: &M,
    gamma: f64,
    s: &SignalVector,
    opts: &NormOptions,
) -> Result<f64> {
    Error::check_dim(op.dim(), s.len())?;
    let shifted = RankOneShift::new(op, gamma, s.as_slice());
    Ok(spectral_norm(&shifted, opts)?.norm)
}

/// `<s, v>^2` for a unit vector `v`.
pub fn eigenvector_correlation(s: &SignalVector, v: &[f64]) -> Result<f64> {
    Error::check_dim(s.len(), v.len())?;
    let nv = norm2(v);
    if (nv - 1.0).abs() > 1e-8 {
        return Err(Error::NonUnitVector(nv));
    }
    Ok(dot(s.as_slice(), v).powi(2).clamp(0.0, 1.0))
}

/// Everything measured for one sampled graph and one operator kind.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralReport {
    pub d: f64,
    pub eta: f64,
    pub d_prime: f64,
    pub gamma: f64,
    pub r_norm: f64,
    pub delta: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub s_hat_corr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SpectralOptions {
    pub eigen: PowerOptions,
    pub norm: NormOptions,
}

/// `|A - E[A]|` is shared by every operator kind on the same graph, so it is
/// passed in rather than recomputed.
pub fn spectral_report(
    graph: &SparseGraph,
    params: &ModelParams,
    partition: &Partition,
    kind: OperatorKind,
    r_norm: f64,
    opts: &SpectralOptions,
) -> Result<SpectralReport> {
    let stats = degree_stats(graph, params)?;
    let gamma = params
        .gamma()
        .ok_or_else(|| Error::invalid("gamma undefined for p + q = 0"))?;
    let sign = Sign::for_params(params.p, params.q);
    let op = build_operator(graph, kind, sign)?;
    let s = signal_vector(partition);
    let gamma = gamma.abs();
    let delta = deviation_norm(&op, gamma, &s, &opts.norm)?;

    let first = match power_iteration(&op, &opts.eigen) {
        Ok(pair) => pair,
        // no usable spectral gap; fall back to the modulus estimate
        Err(Error::Convergence { .. }) => slow_top_pair(&op, &opts.norm)?,
        Err(e) => return Err(e),
    };
    let lambda2 = spectral_norm(&projected(&op, &first.vector), &opts.norm)?.signed();
    Ok(SpectralReport {
        d: stats.d,
        eta: stats.eta,
        d_prime: stats.d_prime,
        gamma,
        r_norm,
        delta,
        lambda1: first.value,
        lambda2,
        s_hat_corr: eigenvector_correlation(&s, &first.vector)?,
    })
}

fn slow_top_pair(op: &ConvOperator<'_>, opts: &NormOptions) -> Result<EigenPair> {
    let est = spectral_norm(op, opts)?;
    // rerun the same iteration to recover the final iterate
    let pair = power_iteration(
        op,
        &PowerOptions {
            tol: 1.0,
            max_iter: est.iterations.max(1),
            seed: opts.seed,
        },
    )?;
    Ok(EigenPair {
        value: est.signed(),
        ..pair
    })
}

//! Brute-force reference computations for small instances: dense operator
//! matrices and powers, the walk-sum expansion of `e_u^T R^l s`, Monte-Carlo
//! tail estimates and exhaustive walk-tuple counting.

mod walks;

use rand::Rng;

use crate::convolution::OperatorKind;
use crate::csbm_model::{sample_graph, signal_vector, ModelParams, Partition, SparseGraph};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, Stream};

pub use walks::{count_valid_walk_tuples, path_count_bound, WalkCountTable};

pub const MAX_DENSE_DIM: usize = 512;
pub const MAX_WALK_POWER: usize = 8;

fn check_dense_dim(n: usize) -> Result<()> {
    if n > MAX_DENSE_DIM {
        return Err(Error::SizeGuard(format!(
            "dense matrices are limited to n <= {MAX_DENSE_DIM}, got {n}"
        )));
    }
    Ok(())
}

/// Row-major square matrix, `n <= 512`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Result<Self> {
        check_dense_dim(n)?;
        Ok(Self {
            n,
            data: vec![0.0; n * n],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn scaled(mut self, alpha: f64) -> Self {
        self.data.iter_mut().for_each(|v| *v *= alpha);
        self
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        Error::check_dim(self.n, x.len())?;
        Ok((0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        Error::check_dim(self.n, other.n)?;
        let n = self.n;
        let mut out = DenseMatrix::zeros(n)?;
        for i in 0..n {
            for l in 0..n {
                let a = self.get(i, l);
                if a == 0.0 {
                    continue;
                }
                let src = other.row(l);
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: usize) -> Result<DenseMatrix> {
        let mut acc = DenseMatrix::identity(self.n)?;
        for _ in 0..k {
            acc = acc.matmul(self)?;
        }
        Ok(acc)
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            for j in 0..i {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }
}

pub fn dense_adjacency(graph: &SparseGraph) -> Result<DenseMatrix> {
    let mut a = DenseMatrix::zeros(graph.n())?;
    for (u, v) in graph.edges() {
        a.set(u, v, 1.0);
        a.set(v, u, 1.0);
    }
    Ok(a)
}

/// Dense form of a convolution operator with positive sign. Mirrors the
/// matrix-free definitions entry by entry.
pub fn dense_operator(graph: &SparseGraph, kind: OperatorKind) -> Result<DenseMatrix> {
    let n = graph.n();
    check_dense_dim(n)?;
    if graph.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let deg: Vec<f64> = graph.degrees().iter().map(|&d| d as f64).collect();
    if kind.is_normalized() {
        if let Some(v) = deg.iter().position(|&d| d == 0.0) {
            return Err(Error::IsolatedVertex(v));
        }
    }
    let a = dense_adjacency(graph)?;
    let d = graph.average_degree();
    let nf = n as f64;
    let two_m = 2.0 * graph.edge_count() as f64;
    let mut m = DenseMatrix::zeros(n)?;
    for i in 0..n {
        for j in 0..n {
            let aij = a.get(i, j);
            let v = match kind {
                OperatorKind::CorrectedUnnormalized => aij / d - 1.0 / nf,
                OperatorKind::CorrectedNormalized => {
                    aij / (deg[i] * deg[j]).sqrt() - (deg[i] * deg[j]).sqrt() / two_m
                }
                OperatorKind::VanillaRw => aij / deg[i],
                OperatorKind::VanillaSym => aij / (deg[i] * deg[j]).sqrt(),
                OperatorKind::VanillaAvg => aij / d,
            };
            m.set(i, j, v);
        }
    }
    Ok(m)
}

/// `x -> M^k x` through the dense matrix power.
pub fn dense_apply_k(m: &DenseMatrix, x: &[f64], k: usize) -> Result<Vec<f64>> {
    m.pow(k)?.matvec(x)
}

/// The block matrix `E[A]` with `p` on the diagonal blocks, diagonal included.
pub fn dense_expected_adjacency(
    params: &ModelParams,
    partition: &Partition,
) -> Result<DenseMatrix> {
    let n = partition.n();
    let mut m = DenseMatrix::zeros(n)?;
    for i in 0..n {
        for j in 0..n {
            let same = partition.in_s(i) == partition.in_s(j);
            m.set(i, j, if same { params.p } else { params.q });
        }
    }
    Ok(m)
}

pub fn dense_error_matrix(
    graph: &SparseGraph,
    params: &ModelParams,
    partition: &Partition,
) -> Result<DenseMatrix> {
    Error::check_dim(partition.n(), graph.n())?;
    let a = dense_adjacency(graph)?;
    let e = dense_expected_adjacency(params, partition)?;
    let mut r = a;
    for (ri, ei) in r.data.iter_mut().zip(&e.data) {
        *ri -= ei;
    }
    Ok(r)
}

fn check_walk_args(n: usize, u: usize, ell: usize) -> Result<()> {
    if u >= n {
        return Err(Error::invalid(format!(
            "vertex {u} out of range for n = {n}"
        )));
    }
    if ell > MAX_WALK_POWER {
        return Err(Error::SizeGuard(format!(
            "power {ell} exceeds {MAX_WALK_POWER}"
        )));
    }
    Ok(())
}

/// `e_u^T R^l s` by dense multiplication, `R = A - E[A]`. `l = 0` gives
/// `s(u) = +-1/sqrt(n)`.
pub fn entrywise_error(
    graph: &SparseGraph,
    params: &ModelParams,
    partition: &Partition,
    u: usize,
    ell: usize,
) -> Result<f64> {
    check_walk_args(graph.n(), u, ell)?;
    let r = dense_error_matrix(graph, params, partition)?;
    let mut v = signal_vector(partition).as_slice().to_vec();
    for _ in 0..ell {
        v = r.matvec(&v)?;
    }
    Ok(v[u])
}

/// The same quantity as [`entrywise_error`] written as a sum over every walk
/// `u = w(0), w(1), ..., w(l)` in the complete graph with loops:
/// `sum_w prod_j R[w(j-1), w(j)] * s(w(l))`.
pub fn walk_sum_error(
    graph: &SparseGraph,
    params: &ModelParams,
    partition: &Partition,
    u: usize,
    ell: usize,
) -> Result<f64> {
    let n = graph.n();
    check_walk_args(n, u, ell)?;
    if (n as f64).powi(ell as i32) > 1e7 {
        return Err(Error::SizeGuard(format!(
            "{n}^{ell} walks is too many to enumerate"
        )));
    }
    let r = dense_error_matrix(graph, params, partition)?;
    let s = signal_vector(partition);

    fn walk(r: &DenseMatrix, s: &[f64], at: usize, left: usize, weight: f64) -> f64 {
        if left == 0 {
            return weight * s[at];
        }
        (0..r.n())
            .map(|next| walk(r, s, next, left - 1, weight * r.get(at, next)))
            .sum()
    }
    Ok(walk(&r, s.as_slice(), u, ell, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailCheck {
    pub threshold: f64,
    pub exceedances: usize,
    pub trials: usize,
}

impl TailCheck {
    pub fn fraction(&self) -> f64 {
        self.exceedances as f64 / self.trials as f64
    }
}

/// Monte-Carlo estimate of
/// `Pr[|e_u^T R^l s| > (C sqrt(n p log n))^l / sqrt(n)]` with `p = max(p, q)`.
/// Trial `t` samples its graph from `derive_seed(seed, 0, t, Graph)`.
pub fn tail_check(
    params: &ModelParams,
    partition: &Partition,
    u: usize,
    ell: usize,
    trials: usize,
    c: f64,
    seed: u64,
) -> Result<TailCheck> {
    if trials == 0 {
        return Err(Error::invalid("tail check needs at least one trial"));
    }
    check_dense_dim(params.n)?;
    check_walk_args(params.n, u, ell)?;
    let n = params.n as f64;
    let p = params.p.max(params.q);
    let threshold = (c * (n * p * n.ln()).sqrt()).powi(ell as i32) / n.sqrt();
    let mut exceedances = 0;
    for t in 0..trials {
        let g = sample_graph(
            params,
            partition,
            derive_seed(seed, 0, t as u64, Stream::Graph),
        )?;
        if entrywise_error(&g, params, partition, u, ell)?.abs() > threshold {
            exceedances += 1;
        }
    }
    Ok(TailCheck {
        threshold,
        exceedances,
        trials,
    })
}

/// Random test vector with entries uniform in `[-1, 1)`.
pub fn random_vector(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = crate::rng::rng_from_seed(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convolution::{build_operator, Sign};
    use crate::csbm_model::sample_partition;

    fn k4() -> SparseGraph {
        SparseGraph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    fn two_triangles() -> SparseGraph {
        SparseGraph::from_edges(6, &[(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]).unwrap()
    }

    #[test]
    fn corrected_two_triangles_entries() {
        let g = two_triangles();
        let m = dense_operator(&g, OperatorKind::CorrectedUnnormalized).unwrap();
        let a = dense_adjacency(&g).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert!((m.get(i, j) - (a.get(i, j) / 2.0 - 1.0 / 6.0)).abs() < 1e-15);
            }
        }
        let op = build_operator(&g, OperatorKind::CorrectedUnnormalized, Sign::Positive).unwrap();
        let x = random_vector(6, 1);
        let dense = m.matvec(&x).unwrap();
        let sparse = op.apply(&x).unwrap();
        assert!(dense
            .iter()
            .zip(&sparse)
            .all(|(a, b)| (a - b).abs() < 1e-14));
    }

    #[test]
    fn normalized_k4_matches_hand_computation() {
        let g = k4();
        let m = dense_operator(&g, OperatorKind::CorrectedNormalized).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let a = if i == j { 0.0 } else { 1.0 };
                assert!((m.get(i, j) - (a / 3.0 - 0.25)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn size_guard() {
        assert!(matches!(DenseMatrix::zeros(513), Err(Error::SizeGuard(_))));
        let edges: Vec<(usize, usize)> = (0..512).map(|i| (i, i + 1)).collect();
        let g = SparseGraph::from_edges(513, &edges).unwrap();
        assert!(dense_operator(&g, OperatorKind::VanillaAvg).is_err());
    }

    #[test]
    fn symmetric_kinds_are_symmetric() {
        let g = SparseGraph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 2)]).unwrap();
        for kind in OperatorKind::ALL {
            let m = dense_operator(&g, kind).unwrap();
            if kind.is_symmetric() {
                assert!(m.max_asymmetry() < 1e-15, "{kind}");
            } else {
                assert!(m.max_asymmetry() > 0.1);
            }
        }
    }

    #[test]
    fn entrywise_error_conventions() {
        let params = ModelParams::graph_only(8, 0.5, 0.2).unwrap();
        let part = sample_partition(8, false, 0).unwrap();
        let g = sample_graph(&params, &part, 3).unwrap();
        let s0 = entrywise_error(&g, &params, &part, 0, 0).unwrap();
        assert!((s0 - 1.0 / 8f64.sqrt()).abs() < 1e-15);
        let s7 = entrywise_error(&g, &params, &part, 7, 0).unwrap();
        assert!((s7 + 1.0 / 8f64.sqrt()).abs() < 1e-15);

        let empty = ModelParams::graph_only(8, 0.0, 0.0).unwrap();
        let g = sample_graph(&empty, &part, 3).unwrap();
        for ell in 1..4 {
            assert_eq!(entrywise_error(&g, &empty, &part, 2, ell).unwrap(), 0.0);
        }
        assert!(entrywise_error(&g, &empty, &part, 8, 1).is_err());
        assert!(entrywise_error(&g, &empty, &part, 0, 9).is_err());
    }

    #[test]
    fn walk_sum_matches_dense_power() {
        let params = ModelParams::graph_only(6, 0.3, 0.1).unwrap();
        let part = sample_partition(6, false, 0).unwrap();
        for seed in 0..5 {
            let g = sample_graph(&params, &part, seed).unwrap();
            for u in 0..6 {
                for ell in 0..=3 {
                    let dense = entrywise_error(&g, &params, &part, u, ell).unwrap();
                    let walks = walk_sum_error(&g, &params, &part, u, ell).unwrap();
                    assert!(
                        (dense - walks).abs() <= 1e-12,
                        "u={u} l={ell}: {dense} vs {walks}"
                    );
                }
            }
        }
    }

    #[test]
    fn tail_check_limits() {
        let params = ModelParams::graph_only(32, 0.3, 0.1).unwrap();
        let part = sample_partition(32, false, 0).unwrap();
        let huge = tail_check(&params, &part, 0, 2, 50, 1e6, 9).unwrap();
        assert_eq!(huge.exceedances, 0);
        let tiny = tail_check(&params, &part, 0, 1, 50, 1e-9, 9).unwrap();
        assert!(tiny.fraction() > 0.9);
        assert!(tail_check(&params, &part, 0, 1, 0, 1.0, 9).is_err());
    }
}

//! The two-block contextual stochastic block model: balanced partitions,
//! sampled graphs and Gaussian-mixture features, plus the reduction of
//! `m`-dimensional features to the centered one-dimensional model.

mod graph;

use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linop::{dot, norm2, LinearOperator};
use crate::rng::rng_from_seed;

pub use graph::{read_edge_list, sample_graph, write_edge_list, SparseGraph};

/// All parameters of a two-block CSBM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub q: f64,
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    pub sigma: f64,
}

impl ModelParams {
    pub fn new(n: usize, p: f64, q: f64, mu: Vec<f64>, nu: Vec<f64>, sigma: f64) -> Result<Self> {
        let params = Self {
            n,
            m: mu.len(),
            p,
            q,
            mu,
            nu,
            sigma,
        };
        params.validate()?;
        Ok(params)
    }

    /// Parameters for experiments that only need the graph. Features are a
    /// unit-separated one-dimensional mixture with no noise.
    pub fn graph_only(n: usize, p: f64, q: f64) -> Result<Self> {
        Self::new(n, p, q, vec![1.0], vec![-1.0], 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        validate_vertex_count(self.n)?;
        for (name, v) in [("p", self.p), ("q", self.q)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} = {v} is not a probability")));
            }
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(format!(
                "sigma = {} must be finite and >= 0",
                self.sigma
            )));
        }
        if self.m == 0 {
            return Err(Error::invalid("feature dimension m must be positive"));
        }
        Error::check_dim(self.m, self.mu.len())?;
        Error::check_dim(self.m, self.nu.len())?;
        Ok(())
    }

    /// Relative signal strength `(p - q) / (p + q)`; `None` when `p + q = 0`.
    pub fn gamma(&self) -> Option<f64> {
        gamma(self.p, self.q)
    }

    /// Expected number of edges of a sampled graph.
    pub fn expected_edges(&self) -> f64 {
        let half = (self.n / 2) as f64;
        half * (half - 1.0) * self.p + half * half * self.q
    }
}

pub fn gamma(p: f64, q: f64) -> Option<f64> {
    (p + q > 0.0).then(|| (p - q) / (p + q))
}

fn validate_vertex_count(n: usize) -> Result<()> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "vertex count n = {n} must be even and >= 2"
        )));
    }
    Ok(())
}

/// A vector of `+1` / `-1` class labels with no balance requirement, as
/// produced by a classifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Labels(Vec<i8>);

impl Labels {
    pub fn new(labels: Vec<i8>) -> Result<Self> {
        if let Some(i) = labels.iter().position(|&l| l != 1 && l != -1) {
            return Err(Error::invalid(format!(
                "label {} at index {i} is not +1/-1",
                labels[i]
            )));
        }
        Ok(Self(labels))
    }

    pub(crate) fn from_vec_unchecked(labels: Vec<i8>) -> Self {
        Self(labels)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|l| -l).collect())
    }
}

/// Balanced assignment of vertices to the classes `S` (`+1`) and `T` (`-1`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    labels: Labels,
}

impl Partition {
    pub fn new(labels: Vec<i8>) -> Result<Self> {
        validate_vertex_count(labels.len())?;
        let labels = Labels::new(labels)?;
        let plus = labels.as_slice().iter().filter(|&&l| l == 1).count();
        if 2 * plus != labels.len() {
            return Err(Error::invalid(format!(
                "partition is unbalanced: {plus} of {} vertices in S",
                labels.len()
            )));
        }
        Ok(Self { labels })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &Labels {
        &self.labels
    }

    pub fn as_slice(&self) -> &[i8] {
        self.labels.as_slice()
    }

    pub fn in_s(&self, v: usize) -> bool {
        self.labels.0[v] == 1
    }

    pub fn negated(&self) -> Self {
        Self {
            labels: self.labels.negated(),
        }
    }
}

/// Balanced partition of `n` vertices. Without shuffling the first `n/2`
/// vertices form `S`.
pub fn sample_partition(n: usize, shuffle: bool, seed: u64) -> Result<Partition> {
    validate_vertex_count(n)?;
    let mut labels: Vec<i8> = (0..n).map(|i| if i < n / 2 { 1 } else { -1 }).collect();
    if shuffle {
        labels.shuffle(&mut rng_from_seed(seed));
    }
    Ok(Partition {
        labels: Labels(labels),
    })
}

/// The unit signal vector `s(i) = label(i) / sqrt(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalVector(Vec<f64>);

impl SignalVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn signal_vector(partition: &Partition) -> SignalVector {
    let scale = 1.0 / (partition.n() as f64).sqrt();
    SignalVector(
        partition
            .as_slice()
            .iter()
            .map(|&l| f64::from(l) * scale)
            .collect(),
    )
}

/// Node features, one row of length `m` per vertex, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n: usize,
    m: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if m == 0 {
            return Err(Error::invalid(
                "feature matrix must have at least one column",
            ));
        }
        let mut data = Vec::with_capacity(n * m);
        for row in rows {
            Error::check_dim(m, row.len())?;
            data.extend(row);
        }
        Ok(Self { n, m, data })
    }

    pub fn rows(&self) -> usize {
        self.n
    }

    pub fn cols(&self) -> usize {
        self.m
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.m)
    }

    /// One row per vertex, comma separated, no header.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(writer);
        for row in self.iter_rows() {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush().map_err(|e| Error::io("<features>", e))?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(reader: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_reader(reader);
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|f| {
                    f.trim().parse::<f64>().map_err(|e| Error::Parse {
                        location: format!("feature row {}", i + 1),
                        message: e.to_string(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::from_rows(rows)
    }
}

/// Row `i` is `mu + g_i` for `i` in `S` and `nu + g_i` otherwise, with
/// `g_i ~ N(0, sigma^2 I_m)` i.i.d.
pub fn sample_features(
    params: &ModelParams,
    partition: &Partition,
    seed: u64,
) -> Result<FeatureMatrix> {
    params.validate()?;
    Error::check_dim(params.n, partition.n())?;
    let mut rng = rng_from_seed(seed);
    let mut data = Vec::with_capacity(params.n * params.m);
    for v in 0..params.n {
        let mean = if partition.in_s(v) {
            &params.mu
        } else {
            &params.nu
        };
        for &c in mean {
            let z: f64 = rng.sample(StandardNormal);
            data.push(c + params.sigma * z);
        }
    }
    Ok(FeatureMatrix {
        n: params.n,
        m: params.m,
        data,
    })
}

/// Features of the centered one-dimensional model.
#[derive(Debug, Clone, PartialEq)]
pub struct OneDimFeatures {
    pub x: Vec<f64>,
    pub sigma_prime: f64,
}

/// Samples `x = s + g` with `g_i ~ N(0, sigma_prime^2)` directly.
pub fn sample_one_dim(
    signal: &SignalVector,
    sigma_prime: f64,
    seed: u64,
) -> Result<OneDimFeatures> {
    if !(sigma_prime >= 0.0 && sigma_prime.is_finite()) {
        return Err(Error::invalid(format!(
            "sigma' = {sigma_prime} must be finite and >= 0"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let x = signal
        .as_slice()
        .iter()
        .map(|&si| {
            let z: f64 = rng.sample(StandardNormal);
            si + sigma_prime * z
        })
        .collect();
    Ok(OneDimFeatures { x, sigma_prime })
}

/// Projects features onto `w = mu - nu`, centers with
/// `b = -<mu + nu, mu - nu> / 2` and rescales by `2 / (sqrt(n) |mu - nu|^2)`,
/// so the noiseless value of vertex `i` is exactly `s(i) = +-1/sqrt(n)`.
pub fn reduce_to_1d(features: &FeatureMatrix, params: &ModelParams) -> Result<OneDimFeatures> {
    params.validate()?;
    Error::check_dim(params.n, features.rows())?;
    Error::check_dim(params.m, features.cols())?;
    let w: Vec<f64> = params
        .mu
        .iter()
        .zip(&params.nu)
        .map(|(a, b)| a - b)
        .collect();
    let sep2 = dot(&w, &w);
    if sep2 == 0.0 {
        return Err(Error::DegenerateMeans);
    }
    let mid: Vec<f64> = params
        .mu
        .iter()
        .zip(&params.nu)
        .map(|(a, b)| a + b)
        .collect();
    let b = -0.5 * dot(&mid, &w);
    let sqrt_n = (params.n as f64).sqrt();
    let c = 2.0 / (sqrt_n * sep2);
    let x = features
        .iter_rows()
        .map(|row| c * (dot(row, &w) + b))
        .collect();
    Ok(OneDimFeatures {
        x,
        sigma_prime: 2.0 * params.sigma / (sqrt_n * norm2(&w)),
    })
}

/// `E[A] = (p+q)/2 * 1 1^T + (p-q) n / 2 * s s^T`, the block matrix with
/// `p` on the diagonal blocks (diagonal included) and `q` off them.
pub struct ExpectedAdjacency<'a> {
    p: f64,
    q: f64,
    s: &'a SignalVector,
}

impl<'a> ExpectedAdjacency<'a> {
    pub fn new(p: f64, q: f64, s: &'a SignalVector) -> Self {
        Self { p, q, s }
    }
}

impl LinearOperator for ExpectedAdjacency<'_> {
    fn dim(&self) -> usize {
        self.s.len()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        let n = self.s.len() as f64;
        let s = self.s.as_slice();
        let ones = 0.5 * (self.p + self.q) * x.iter().sum::<f64>();
        let along_s = 0.5 * (self.p - self.q) * n * dot(s, x);
        for (yi, si) in y.iter_mut().zip(s) {
            *yi = ones + along_s * si;
        }
    }
}

pub fn expected_adjacency_matvec(
    params: &ModelParams,
    s: &SignalVector,
    x: &[f64],
) -> Result<Vec<f64>> {
    Error::check_dim(s.len(), x.len())?;
    Ok(ExpectedAdjacency::new(params.p, params.q, s).apply_vec(x))
}

//! Matrix-free graph convolutions.
//!
//! The corrected operators remove the principal direction before
//! propagating:
//!
//! * `CorrectedUnnormalized`: `A/d - 1 1^T / n`
//! * `CorrectedNormalized`: `D^{-1/2} A D^{-1/2} - D^{1/2} 1 1^T D^{1/2} / sum_v d_v`
//!
//! and the vanilla baselines are `D^{-1} A`, `D^{-1/2} A D^{-1/2}` and `A/d`.
//! Every application costs `O(|E| + n)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::csbm_model::SparseGraph;
use crate::error::{Error, Result};
use crate::linop::{dot, LinearOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    CorrectedUnnormalized,
    CorrectedNormalized,
    VanillaRw,
    VanillaSym,
    VanillaAvg,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 5] = [
        OperatorKind::CorrectedUnnormalized,
        OperatorKind::CorrectedNormalized,
        OperatorKind::VanillaRw,
        OperatorKind::VanillaSym,
        OperatorKind::VanillaAvg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::CorrectedUnnormalized => "corrected_unnormalized",
            OperatorKind::CorrectedNormalized => "corrected_normalized",
            OperatorKind::VanillaRw => "vanilla_rw",
            OperatorKind::VanillaSym => "vanilla_sym",
            OperatorKind::VanillaAvg => "vanilla_avg",
        }
    }

    pub fn is_normalized(self) -> bool {
        matches!(
            self,
            OperatorKind::CorrectedNormalized | OperatorKind::VanillaRw | OperatorKind::VanillaSym
        )
    }

    pub fn is_corrected(self) -> bool {
        matches!(
            self,
            OperatorKind::CorrectedUnnormalized | OperatorKind::CorrectedNormalized
        )
    }

    pub fn is_symmetric(self) -> bool {
        self != OperatorKind::VanillaRw
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OperatorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown operator kind {s:?}")))
    }
}

/// Global sign applied to the whole operator. `Negative` is used when
/// `q > p` so that the signal eigenvalue stays positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Negative,
}

impl Sign {
    pub fn for_params(p: f64, q: f64) -> Self {
        if q > p {
            Sign::Negative
        } else {
            Sign::Positive
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Sign::Positive => 1.0,
            Sign::Negative => -1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConvOperator<'g> {
    kind: OperatorKind,
    graph: &'g SparseGraph,
    avg_degree: f64,
    // d_v^{-1/2} for normalized kinds, empty otherwise
    inv_sqrt_deg: Vec<f64>,
    // d_v^{1/2} for the normalized correction
    sqrt_deg: Vec<f64>,
    sign: Sign,
}

pub fn build_operator(
    graph: &SparseGraph,
    kind: OperatorKind,
    sign: Sign,
) -> Result<ConvOperator<'_>> {
    if graph.n() == 0 {
        return Err(Error::invalid("graph has no vertices"));
    }
    if graph.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let (inv_sqrt_deg, sqrt_deg) = if kind.is_normalized() {
        if let Some((v, 0)) = graph.min_degree() {
            return Err(Error::IsolatedVertex(v));
        }
        let sqrt: Vec<f64> = graph.degrees().iter().map(|&d| (d as f64).sqrt()).collect();
        (sqrt.iter().map(|s| 1.0 / s).collect(), sqrt)
    } else {
        (Vec::new(), Vec::new())
    };
    Ok(ConvOperator {
        kind,
        graph,
        avg_degree: graph.average_degree(),
        inv_sqrt_deg,
        sqrt_deg,
        sign,
    })
}

impl<'g> ConvOperator<'g> {
    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn sign(&self) -> Sign {
        self.sign
    }

    pub fn graph(&self) -> &'g SparseGraph {
        self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn average_degree(&self) -> f64 {
        self.avg_degree
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Error::check_dim(self.n(), x.len())?;
        Ok(self.apply_vec(x))
    }

    /// `M^k x`; `k = 0` returns `x`.
    pub fn apply_k(&self, x: &[f64], k: usize) -> Result<Vec<f64>> {
        Error::check_dim(self.n(), x.len())?;
        let mut cur = x.to_vec();
        let mut next = vec![0.0; x.len()];
        for _ in 0..k {
            self.apply_into(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// `M^k x / eta^k`, scaled one round at a time.
    pub fn rescaled_convolved(&self, x: &[f64], k: usize, eta: f64) -> Result<Vec<f64>> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::invalid(format!("eta = {eta} must be positive")));
        }
        let log_scale = k as f64 * eta.ln();
        if log_scale.abs() > 600.0 {
            return Err(Error::Range(format!(
                "|k ln eta| = {:.1} exceeds 600",
                log_scale.abs()
            )));
        }
        Error::check_dim(self.n(), x.len())?;
        let inv = 1.0 / eta;
        let mut cur = x.to_vec();
        let mut next = vec![0.0; x.len()];
        for _ in 0..k {
            self.apply_into(&cur, &mut next);
            next.iter_mut().for_each(|v| *v *= inv);
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    fn apply_unsigned(&self, x: &[f64], y: &mut [f64]) {
        let g = self.graph;
        match self.kind {
            OperatorKind::CorrectedUnnormalized => {
                let inv_d = 1.0 / self.avg_degree;
                let mean = x.iter().sum::<f64>() / x.len() as f64;
                for (v, yv) in y.iter_mut().enumerate() {
                    let acc: f64 = g.neighbors(v).iter().map(|&u| x[u as usize]).sum();
                    *yv = acc * inv_d - mean;
                }
            }
            OperatorKind::VanillaAvg => {
                let inv_d = 1.0 / self.avg_degree;
                for (v, yv) in y.iter_mut().enumerate() {
                    let acc: f64 = g.neighbors(v).iter().map(|&u| x[u as usize]).sum();
                    *yv = acc * inv_d;
                }
            }
            OperatorKind::VanillaRw => {
                for (v, yv) in y.iter_mut().enumerate() {
                    let acc: f64 = g.neighbors(v).iter().map(|&u| x[u as usize]).sum();
                    *yv = acc / g.degree(v) as f64;
                }
            }
            OperatorKind::VanillaSym | OperatorKind::CorrectedNormalized => {
                let w = &self.inv_sqrt_deg;
                for (v, yv) in y.iter_mut().enumerate() {
                    let acc: f64 = g
                        .neighbors(v)
                        .iter()
                        .map(|&u| w[u as usize] * x[u as usize])
                        .sum();
                    *yv = w[v] * acc;
                }
                if self.kind == OperatorKind::CorrectedNormalized {
                    let c = dot(&self.sqrt_deg, x) / (2.0 * g.edge_count() as f64);
                    for (yv, sv) in y.iter_mut().zip(&self.sqrt_deg) {
                        *yv -= c * sv;
                    }
                }
            }
        }
    }
}

impl LinearOperator for ConvOperator<'_> {
    fn dim(&self) -> usize {
        self.graph.n()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.apply_unsigned(x, y);
        if self.sign == Sign::Negative {
            y.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

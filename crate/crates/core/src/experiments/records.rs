//! CSV row types. Column order follows field order and is fixed by the
//! golden-header tests below.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::convolution::OperatorKind;
use crate::error::Result;

/// One row per `(trial, kind, k)` of a classification sweep. Optional
/// fields are empty when the trial failed or the quantity does not apply
/// to the operator kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub experiment: String,
    pub trial: usize,
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub sigma: f64,
    pub gamma: Option<f64>,
    pub kind: OperatorKind,
    pub k: usize,
    pub misclassified: Option<usize>,
    pub error_rate: Option<f64>,
    pub exact: Option<bool>,
    pub eta: Option<f64>,
    pub delta: Option<f64>,
    pub lambda1: Option<f64>,
    pub s_hat_corr: Option<f64>,
    /// `|x_k / eta^k - s|_inf`, corrected kinds only.
    pub inf_error: Option<f64>,
    /// Empty on success, otherwise a short error description.
    pub failure: String,
    pub wall_time_ms: f64,
}

pub const TRIAL_HEADER: &str =
    "experiment,trial,n,p,q,sigma,gamma,kind,k,misclassified,error_rate,exact,\
eta,delta,lambda1,s_hat_corr,inf_error,failure,wall_time_ms";

/// One row per `(trial, kind)` of a concentration sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRecord {
    pub experiment: String,
    pub trial: usize,
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub kind: OperatorKind,
    pub d: Option<f64>,
    pub eta: Option<f64>,
    pub d_prime: Option<f64>,
    pub gamma: Option<f64>,
    pub r_norm: Option<f64>,
    pub delta: Option<f64>,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    pub s_hat_corr: Option<f64>,
    pub failure: String,
    pub wall_time_ms: f64,
}

pub const CONCENTRATION_HEADER: &str =
    "experiment,trial,n,p,q,kind,d,eta,d_prime,gamma,r_norm,delta,lambda1,lambda2,s_hat_corr,failure,wall_time_ms";

/// Quantiles of one metric over the successful trials of one
/// `(n, p, q, kind)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRecord {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub kind: OperatorKind,
    pub metric: String,
    pub trials: usize,
    pub failed: usize,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

pub const SUMMARY_HEADER: &str = "n,p,q,kind,metric,trials,failed,min,q25,median,q75,max";

/// One row per `(n, k, t, ell)` of a walk audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkAuditRecord {
    pub experiment: String,
    pub n: usize,
    pub k: usize,
    pub t: usize,
    pub u: usize,
    pub self_loops: bool,
    pub ell: usize,
    pub count: u64,
    /// Decimal string; the bound can exceed `u64`.
    pub bound: String,
    pub within_bound: bool,
    pub wall_time_ms: f64,
}

pub const WALK_AUDIT_HEADER: &str =
    "experiment,n,k,t,u,self_loops,ell,count,bound,within_bound,wall_time_ms";

/// Streams serializable rows to CSV, writing the header with the first row.
pub struct RecordWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> RecordWriter<W> {
    pub fn new(writer: W) -> Self {
        Self {
            inner: csv::Writer::from_writer(writer),
        }
    }

    pub fn write<T: Serialize>(&mut self, record: &T) -> Result<()> {
        self.inner.serialize(record)?;
        Ok(())
    }

    /// Flushes buffered rows so partial results survive an abort.
    pub fn flush(&mut self) -> Result<()> {
        self.inner.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Linear-interpolation quantile of a sorted slice.
pub fn quantile(sorted: &[f64], prob: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        len => {
            let pos = prob.clamp(0.0, 1.0) * (len - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
        }
    }
}

/// Median of the finite values, `NaN` if there are none.
pub fn median(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header_of<T: Serialize>(row: &T) -> String {
        let mut w = RecordWriter::new(Vec::new());
        w.write(row).unwrap();
        let bytes = w.inner.into_inner().unwrap();
        String::from_utf8(bytes)
            .unwrap()
            .lines()
            .next()
            .unwrap()
            .to_string()
    }

    fn trial_row() -> TrialRecord {
        TrialRecord {
            experiment: "partial_sweep".into(),
            trial: 0,
            n: 4,
            p: 0.5,
            q: 0.1,
            sigma: 1.0,
            gamma: Some(2.0 / 3.0),
            kind: OperatorKind::CorrectedUnnormalized,
            k: 0,
            misclassified: None,
            error_rate: None,
            exact: None,
            eta: None,
            delta: None,
            lambda1: None,
            s_hat_corr: None,
            inf_error: None,
            failure: "isolated vertex 3".into(),
            wall_time_ms: 0.0,
        }
    }

    #[test]
    fn trial_header_golden() {
        assert_eq!(header_of(&trial_row()), TRIAL_HEADER);
    }

    #[test]
    fn concentration_header_golden() {
        let row = ConcentrationRecord {
            experiment: "concentration".into(),
            trial: 0,
            n: 4,
            p: 0.5,
            q: 0.1,
            kind: OperatorKind::CorrectedNormalized,
            d: None,
            eta: None,
            d_prime: None,
            gamma: None,
            r_norm: None,
            delta: None,
            lambda1: None,
            lambda2: None,
            s_hat_corr: None,
            failure: String::new(),
            wall_time_ms: 0.0,
        };
        assert_eq!(header_of(&row), CONCENTRATION_HEADER);
    }

    #[test]
    fn summary_header_golden() {
        let row = SummaryRecord {
            n: 4,
            p: 0.5,
            q: 0.1,
            kind: OperatorKind::CorrectedUnnormalized,
            metric: "delta".into(),
            trials: 1,
            failed: 0,
            min: 0.0,
            q25: 0.0,
            median: 0.0,
            q75: 0.0,
            max: 0.0,
        };
        assert_eq!(header_of(&row), SUMMARY_HEADER);
    }

    #[test]
    fn walk_header_golden() {
        let row = WalkAuditRecord {
            experiment: "walk_audit".into(),
            n: 4,
            k: 2,
            t: 2,
            u: 0,
            self_loops: true,
            ell: 1,
            count: 0,
            bound: "112".into(),
            within_bound: true,
            wall_time_ms: 0.0,
        };
        assert_eq!(header_of(&row), WALK_AUDIT_HEADER);
    }

    #[test]
    fn empty_options_roundtrip() {
        let row = trial_row();
        let mut w = RecordWriter::new(Vec::new());
        w.write(&row).unwrap();
        let bytes = w.inner.into_inner().unwrap();
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.lines().nth(1).unwrap().contains(",,,"));
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let back: TrialRecord = rdr.deserialize().next().unwrap().unwrap();
        assert_eq!(back, row);
    }

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.0), 1.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert!(quantile(&[], 0.5).is_nan());
        assert_eq!(median([3.0, f64::NAN, 1.0, 2.0]), 2.0);
    }
}

//! Zero-threshold classification and recovery scoring.

use crate::csbm_model::{Labels, Partition, SignalVector};
use crate::error::{Error, Result};
use crate::linop::dot;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationResult {
    pub predicted: Labels,
    /// Disagreements under the better of the two global orientations.
    pub misclassified: usize,
    pub error_rate: f64,
    pub exact: bool,
}

/// `+1` where `x(i) > 0`, `-1` otherwise. Zeros (and NaNs) land in `T`.
pub fn classify(x: &[f64]) -> Labels {
    Labels::from_vec_unchecked(x.iter().map(|&v| if v > 0.0 { 1 } else { -1 }).collect())
}

/// Scores a prediction against the truth up to a global sign flip.
pub fn score(pred: &Labels, truth: &Partition) -> Result<ClassificationResult> {
    Error::check_dim(truth.n(), pred.len())?;
    let n = truth.n();
    let hamming = pred
        .as_slice()
        .iter()
        .zip(truth.as_slice())
        .filter(|(a, b)| a != b)
        .count();
    let misclassified = hamming.min(n - hamming);
    Ok(ClassificationResult {
        predicted: pred.clone(),
        misclassified,
        error_rate: misclassified as f64 / n as f64,
        exact: misclassified == 0,
    })
}

pub fn classify_and_score(x: &[f64], truth: &Partition) -> Result<ClassificationResult> {
    score(&classify(x), truth)
}

/// `n * min_c |c x - s|^2`, attained at `c = <x, s> / |x|^2` (`c = 0` for
/// `x = 0`). Every misclassified vertex contributes at least `1/n` to the
/// squared distance, so this bounds the misclassification count.
pub fn mse_error_bound(x: &[f64], s: &SignalVector) -> Result<f64> {
    Error::check_dim(s.len(), x.len())?;
    let s = s.as_slice();
    let xx = dot(x, x);
    let c = if xx > 0.0 { dot(x, s) / xx } else { 0.0 };
    let dist2: f64 = x.iter().zip(s).map(|(xi, si)| (c * xi - si).powi(2)).sum();
    Ok(s.len() as f64 * dist2)
}

/// `max_i |x(i) - s(i)|`. Values below `1/sqrt(n)` guarantee exact recovery.
pub fn infinity_error(x_rescaled: &[f64], s: &SignalVector) -> Result<f64> {
    Error::check_dim(s.len(), x_rescaled.len())?;
    Ok(x_rescaled
        .iter()
        .zip(s.as_slice())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::csbm_model::{sample_partition, signal_vector};
    use proptest::prelude::*;

    fn truth4() -> Partition {
        sample_partition(4, false, 0).unwrap()
    }

    #[test]
    fn classify_signal_and_negation() {
        let truth = truth4();
        let s = signal_vector(&truth);
        let r = classify_and_score(s.as_slice(), &truth).unwrap();
        assert_eq!(r.predicted.as_slice(), truth.as_slice());
        assert!(r.exact);
        let neg: Vec<f64> = s.as_slice().iter().map(|v| -v).collect();
        let r = classify_and_score(&neg, &truth).unwrap();
        assert_eq!(r.predicted, truth.labels().negated());
        assert_eq!(r.misclassified, 0);
    }

    #[test]
    fn zero_vector_scores_half() {
        let truth = truth4();
        let r = classify_and_score(&[0.0; 4], &truth).unwrap();
        assert_eq!(r.predicted.as_slice(), &[-1, -1, -1, -1]);
        assert_eq!(r.misclassified, 2);
        assert_eq!(r.error_rate, 0.5);
        assert!(!r.exact);
    }

    #[test]
    fn score_cases() {
        let truth = truth4();
        assert_eq!(score(truth.labels(), &truth).unwrap().misclassified, 0);
        assert_eq!(
            score(&truth.labels().negated(), &truth)
                .unwrap()
                .misclassified,
            0
        );
        let one_off = Labels::new(vec![1, -1, -1, -1]).unwrap();
        assert_eq!(score(&one_off, &truth).unwrap().misclassified, 1);
        assert!(score(&Labels::new(vec![1, -1]).unwrap(), &truth).is_err());
    }

    #[test]
    fn mse_bound_cases() {
        let truth = truth4();
        let s = signal_vector(&truth);
        assert!(mse_error_bound(s.as_slice(), &s).unwrap() < 1e-15);
        let twice: Vec<f64> = s.as_slice().iter().map(|v| 2.0 * v).collect();
        assert!(mse_error_bound(&twice, &s).unwrap() < 1e-15);
        assert_eq!(mse_error_bound(&[0.0; 4], &s).unwrap(), 4.0);
    }

    #[test]
    fn infinity_error_cases() {
        let truth = sample_partition(16, false, 0).unwrap();
        let s = signal_vector(&truth);
        assert_eq!(infinity_error(s.as_slice(), &s).unwrap(), 0.0);
        let mut bumped = s.as_slice().to_vec();
        let bump = 1.0 / (2.0 * 4.0);
        bumped[0] += bump;
        assert!((infinity_error(&bumped, &s).unwrap() - bump).abs() < 1e-15);
    }

    fn labels_strategy(n: usize) -> impl Strategy<Value = Vec<i8>> {
        proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], n)
    }

    proptest! {
        #[test]
        fn score_is_flip_invariant(pred in labels_strategy(16), seed in 0u64..1000) {
            let truth = sample_partition(16, true, seed).unwrap();
            let pred = Labels::new(pred).unwrap();
            let a = score(&pred, &truth).unwrap();
            let b = score(&pred.negated(), &truth).unwrap();
            prop_assert_eq!(a.misclassified, b.misclassified);
            prop_assert!(a.misclassified <= 8);
        }

        #[test]
        fn classify_is_scale_invariant(
            x in proptest::collection::vec(-10.0f64..10.0, 1..40),
            alpha in 1e-6f64..1e6,
        ) {
            let scaled: Vec<f64> = x.iter().map(|v| alpha * v).collect();
            prop_assert_eq!(classify(&x), classify(&scaled));
        }

        #[test]
        fn misclassified_bounded_by_mse(
            x in proptest::collection::vec(-1.0f64..1.0, 32),
            seed in 0u64..1000,
        ) {
            let truth = sample_partition(32, true, seed).unwrap();
            let s = signal_vector(&truth);
            let m = classify_and_score(&x, &truth).unwrap().misclassified as f64;
            prop_assert!(m <= mse_error_bound(&x, &s).unwrap() + 1e-9);
        }

        #[test]
        fn small_infinity_error_is_exact(
            noise in proptest::collection::vec(-0.999f64..0.999, 36),
            seed in 0u64..1000,
        ) {
            let truth = sample_partition(36, true, seed).unwrap();
            let s = signal_vector(&truth);
            let scale = 1.0 / 6.0;
            let x: Vec<f64> = s.as_slice().iter().zip(&noise).map(|(a, b)| a + b * scale).collect();
            prop_assert!(infinity_error(&x, &s).unwrap() < scale);
            prop_assert!(classify_and_score(&x, &truth).unwrap().exact);
        }
    }
}

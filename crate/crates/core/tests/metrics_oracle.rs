//! Metrics recomputed by direct counting over the raw `(truth, prediction)`
//! pairs, never through the confusion matrix.

use hqnet::metrics::{per_class_prf, ConfusionMatrix, MetricsReport};
use proptest::collection::vec;
use proptest::prelude::*;

fn pairs() -> impl Strategy<Value = Vec<(usize, usize)>> {
    vec((0usize..10, 0usize..10), 0..400)
}

proptest! {
    #[test]
    fn counting_oracle_agrees(pairs in pairs()) {
        let m = ConfusionMatrix::from_pairs(pairs.iter().copied()).unwrap();
        let n = pairs.len();
        let correct = pairs.iter().filter(|(t, p)| t == p).count();
        prop_assert_eq!(m.total(), n as u64);
        prop_assert_eq!(m.trace(), correct as u64);
        if n > 0 {
            prop_assert_eq!(m.accuracy(), correct as f64 / n as f64);
        }
        for c in per_class_prf(&m) {
            let k = c.class;
            let tp = pairs.iter().filter(|&&(t, p)| t == k && p == k).count();
            let fp = pairs.iter().filter(|&&(t, p)| t != k && p == k).count();
            let fn_ = pairs.iter().filter(|&&(t, p)| t == k && p != k).count();
            let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
            let recall = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
            prop_assert_eq!(c.support, (tp + fn_) as u64);
            prop_assert!((c.precision - precision).abs() < 1e-15);
            prop_assert!((c.recall - recall).abs() < 1e-15);
            prop_assert_eq!(c.flagged, tp + fp == 0 || tp + fn_ == 0);
            if precision + recall > 0.0 {
                // F1 as the harmonic mean written in counts.
                let f1 = 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64;
                prop_assert!((c.f1 - f1).abs() < 1e-12);
            } else {
                prop_assert_eq!(c.f1, 0.0);
            }
            prop_assert!((0.0..=1.0).contains(&c.f1));
        }
    }

    #[test]
    fn supports_sum_to_total(pairs in pairs()) {
        let m = ConfusionMatrix::from_pairs(pairs.iter().copied()).unwrap();
        let report = MetricsReport::from_matrix(m.clone(), 0.0, 0.0);
        prop_assert_eq!(report.per_class.iter().map(|c| c.support).sum::<u64>(), m.total());
        prop_assert_eq!((0..10).map(|k| m.predicted(k)).sum::<u64>(), m.total());
        prop_assert_eq!(report.n_samples, m.total());
    }
}

#[test]
fn out_of_range_labels_are_rejected() {
    assert!(ConfusionMatrix::from_pairs([(10, 0)]).is_err());
    assert!(ConfusionMatrix::from_pairs([(0, 10)]).is_err());
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label smoothing settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    /// Mass moved from the true class to the uniform distribution, in `[0, 1)`.
    pub alpha: f64,
    pub n_classes: usize,
}

impl LossConfig {
    pub fn new(alpha: f64, n_classes: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::Config(format!("label smoothing {alpha} outside [0, 1)")));
        }
        if n_classes < 2 {
            return Err(Error::Config("need at least two classes".into()));
        }
        Ok(Self { alpha, n_classes })
    }
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            n_classes: 10,
        }
    }
}

/// Max-subtracted softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Loss and logit gradient for one sample, before any batch averaging.
///
/// The loss is `-(1-α)·log p_y - (α/K)·Σ_k log p_k`, i.e. cross-entropy
/// against the target `t_k = (1-α)·[k = y] + α/K`; its gradient is `p - t`.
pub fn label_smoothed_ce_single(logits: &[f64], label: usize, cfg: &LossConfig) -> Result<(f64, Vec<f64>)> {
    let k = cfg.n_classes;
    if logits.len() != k {
        return Err(Error::shape(format!("{} logits for {k} classes", logits.len())));
    }
    if label >= k {
        return Err(Error::Label { label, classes: k });
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
    let uniform = cfg.alpha / k as f64;
    let mut loss = 0.0;
    let mut grad = Vec::with_capacity(k);
    for (i, z) in logits.iter().enumerate() {
        let log_p = z - max - log_sum;
        let target = if i == label { 1.0 - cfg.alpha + uniform } else { uniform };
        loss -= target * log_p;
        grad.push(log_p.exp() - target);
    }
    Ok((loss, grad))
}

/// Batch-mean label-smoothed cross-entropy over row-major `[B, K]` logits.
/// The returned gradient already includes the `1/B` factor.
pub fn label_smoothed_ce(logits: &[f64], labels: &[usize], cfg: &LossConfig) -> Result<(f64, Vec<f64>)> {
    let b = labels.len();
    if b == 0 || logits.len() != b * cfg.n_classes {
        return Err(Error::shape(format!(
            "{} logits for a batch of {b} with {} classes",
            logits.len(),
            cfg.n_classes
        )));
    }
    let mut total = 0.0;
    let mut grad = Vec::with_capacity(logits.len());
    for (row, &y) in logits.chunks_exact(cfg.n_classes).zip(labels) {
        let (l, g) = label_smoothed_ce_single(row, y, cfg)?;
        total += l;
        grad.extend(g.into_iter().map(|v| v / b as f64));
    }
    Ok((total / b as f64, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn confident_correct_prediction() {
        let cfg = LossConfig::new(0.0, 10).unwrap();
        let mut z = vec![0.0; 10];
        z[3] = 60.0;
        let (l, _) = label_smoothed_ce(&z, &[3], &cfg).unwrap();
        assert!(l < 1e-20);
    }

    #[test]
    fn uniform_prediction_is_ln_k() {
        for alpha in [0.0, 0.05, 0.3, 0.9] {
            let cfg = LossConfig::new(alpha, 10).unwrap();
            let (l, _) = label_smoothed_ce(&[1.7; 20], &[0, 9], &cfg).unwrap();
            assert_abs_diff_eq!(l, 10f64.ln(), epsilon = 1e-12);
        }
    }

    #[test]
    fn scalar_hand_computation() {
        // logits (2, 0, …, 0), y = 0, α = 0.05:
        // log p_0 = 2 - ln(e² + 9), log p_k = -ln(e² + 9).
        let cfg = LossConfig::new(0.05, 10).unwrap();
        let mut z = vec![0.0; 10];
        z[0] = 2.0;
        let lse = (2f64.exp() + 9.0).ln();
        let want = -(0.95 + 0.005) * (2.0 - lse) - 9.0 * 0.005 * (-lse);
        let (l, g) = label_smoothed_ce(&z, &[0], &cfg).unwrap();
        assert_abs_diff_eq!(l, want, epsilon = 1e-14);
        assert_abs_diff_eq!(g[0], 2f64.exp() / (2f64.exp() + 9.0) - 0.955, epsilon = 1e-14);
        assert_abs_diff_eq!(g.iter().sum::<f64>(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn softmax_rows_sum_to_one() {
        let p = softmax(&[1000.0, -1000.0, 3.0, 0.0]);
        assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn label_out_of_range() {
        let cfg = LossConfig::default();
        assert!(matches!(
            label_smoothed_ce(&[0.0; 10], &[10], &cfg),
            Err(Error::Label { label: 10, .. })
        ));
        assert!(LossConfig::new(1.0, 10).is_err());
    }
}

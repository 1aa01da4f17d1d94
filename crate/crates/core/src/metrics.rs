//! Test-set evaluation: loss, accuracy, per-class precision/recall/F1 and
//! the confusion matrix, plus their on-disk report formats.
//!
//! `report.json` holds every scalar and the matrix; `per_class.csv` has the
//! columns in [`PER_CLASS_HEADER`]. Both carry [`REPORT_SCHEMA_VERSION`].

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::model::{HybridModel, N_CLASSES};
use crate::optim::{label_smoothed_ce_single, LossConfig};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const REPORT_JSON: &str = "report.json";
pub const PER_CLASS_CSV: &str = "per_class.csv";
pub const PER_CLASS_HEADER: &str = "class,precision,recall,f1,support,flagged";

/// Counts indexed `[true label][predicted label]`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; N_CLASSES]; N_CLASSES],
}

impl ConfusionMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut m = Self::new();
        for (truth, pred) in pairs {
            m.record(truth, pred)?;
        }
        Ok(m)
    }

    pub fn record(&mut self, truth: usize, pred: usize) -> Result<()> {
        for label in [truth, pred] {
            if label >= N_CLASSES {
                return Err(Error::Label {
                    label,
                    classes: N_CLASSES,
                });
            }
        }
        self.counts[truth][pred] += 1;
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..N_CLASSES).map(|k| self.counts[k][k]).sum()
    }

    /// Row sum: how many samples truly belong to `class`.
    pub fn support(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    /// Column sum: how many samples were predicted as `class`.
    pub fn predicted(&self, class: usize) -> u64 {
        self.counts.iter().map(|row| row[class]).sum()
    }

    /// `trace / total`; zero for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            n => self.trace() as f64 / n as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    /// Set when precision or recall had a zero denominator and was reported
    /// as 0.
    pub flagged: bool,
}

/// Precision, recall and F1 for every class. Zero denominators yield 0 and
/// set `flagged`.
pub fn per_class_prf(m: &ConfusionMatrix) -> Vec<ClassMetrics> {
    (0..N_CLASSES)
        .map(|k| {
            let tp = m.counts[k][k] as f64;
            let predicted = m.predicted(k);
            let support = m.support(k);
            let ratio = |den: u64| if den == 0 { 0.0 } else { tp / den as f64 };
            let precision = ratio(predicted);
            let recall = ratio(support);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassMetrics {
                class: k,
                precision,
                recall,
                f1,
                support,
                flagged: predicted == 0 || support == 0,
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub schema_version: u32,
    pub test_loss: f64,
    pub accuracy: f64,
    /// Label smoothing used for `test_loss`.
    pub alpha: f64,
    pub n_samples: u64,
    pub per_class: Vec<ClassMetrics>,
    pub matrix: ConfusionMatrix,
}

impl MetricsReport {
    pub fn from_matrix(matrix: ConfusionMatrix, test_loss: f64, alpha: f64) -> Self {
        Self {
            schema_version: REPORT_SCHEMA_VERSION,
            test_loss,
            accuracy: matrix.accuracy(),
            alpha,
            n_samples: matrix.total(),
            per_class: per_class_prf(&matrix),
            matrix,
        }
    }
}

/// Index of the largest logit; the first wins ties.
pub fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) })
        .0
}

/// Evaluation-mode pass over `data`: mean smoothed loss and the confusion
/// matrix of argmax predictions.
pub fn evaluate(model: &HybridModel, data: &Dataset, loss: &LossConfig) -> Result<MetricsReport> {
    if data.is_empty() {
        return Err(Error::Data("cannot evaluate on an empty dataset".into()));
    }
    let per_sample = data
        .images
        .par_iter()
        .map(|img| {
            let logits = model.predict(&img.to_input())?;
            let (l, _) = label_smoothed_ce_single(&logits, img.label, loss)?;
            Ok((l, img.label, argmax(&logits)))
        })
        .collect::<Result<Vec<_>>>()?;
    let total_loss: f64 = per_sample.iter().map(|(l, _, _)| l).sum();
    let matrix = ConfusionMatrix::from_pairs(per_sample.iter().map(|&(_, t, p)| (t, p)))?;
    Ok(MetricsReport::from_matrix(
        matrix,
        total_loss / data.len() as f64,
        loss.alpha,
    ))
}

/// Writes `report.json` and `per_class.csv` into `dir`, creating it if
/// needed. Returns the two paths.
pub fn emit_report(report: &MetricsReport, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let json_path = dir.join(REPORT_JSON);
    let json = serde_json::to_string_pretty(report).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(&json_path, json + "\n").map_err(|e| Error::io(&json_path, e))?;

    let csv_path = dir.join(PER_CLASS_CSV);
    let mut csv = format!("# schema_version={}\n{PER_CLASS_HEADER}\n", report.schema_version);
    for c in &report.per_class {
        csv += &format!(
            "{},{},{},{},{},{}\n",
            c.class, c.precision, c.recall, c.f1, c.support, c.flagged
        );
    }
    fs::write(&csv_path, csv).map_err(|e| Error::io(&csv_path, e))?;
    Ok((json_path, csv_path))
}

pub fn read_report(path: &Path) -> Result<MetricsReport> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let report: MetricsReport = serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
    if report.schema_version != REPORT_SCHEMA_VERSION {
        return Err(Error::Format(format!(
            "report schema {} (expected {REPORT_SCHEMA_VERSION})",
            report.schema_version
        )));
    }
    Ok(report)
}

//! Flat key-value run configuration, read from TOML and overridden by flags.

use std::path::{Path, PathBuf};

use hqnet::dataset::AugmentConfig;
use hqnet::optim::{AdamWConfig, PlateauConfig};
use hqnet::{HeadMode, ModelConfig, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Every tunable of a run. Missing keys take the defaults below, which are
/// the best grid cell on the ten-qubit model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub dropout: f64,
    pub label_smoothing: f64,
    pub depth: usize,
    pub n_qubits: usize,
    pub mode: HeadMode,
    pub seed: u64,
    pub max_epochs: usize,
    pub early_stop_patience: usize,
    pub early_stop_min_delta: f64,
    pub weight_decay: f64,
    pub clip_norm: f64,
    pub plateau_factor: f64,
    pub plateau_patience: usize,
    pub plateau_min_delta: f64,
    pub min_lr: f64,
    pub train_fraction: f64,
    pub augment: bool,
    pub rotate_deg: f64,
    pub translate_frac: f64,
    pub hflip_p: f64,
    pub elastic_alpha: f64,
    pub elastic_sigma: f64,
    pub elastic_p: f64,
    /// Data root; the `--data` flag and the `HQNET_DATA` variable take
    /// precedence.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let aug = AugmentConfig::default();
        let plateau = PlateauConfig::default();
        let train = TrainConfig::default();
        Self {
            lr: train.lr,
            batch_size: train.batch_size,
            dropout: 0.0,
            label_smoothing: train.alpha,
            depth: 5,
            n_qubits: 10,
            mode: HeadMode::Quantum,
            seed: 0,
            max_epochs: train.max_epochs,
            early_stop_patience: train.early_stop_patience,
            early_stop_min_delta: train.early_stop_min_delta,
            weight_decay: AdamWConfig::default().weight_decay,
            clip_norm: train.clip_norm,
            plateau_factor: plateau.factor,
            plateau_patience: plateau.patience,
            plateau_min_delta: plateau.min_delta,
            min_lr: plateau.min_lr,
            train_fraction: 0.8,
            augment: true,
            rotate_deg: aug.rotate_deg,
            translate_frac: aug.translate_frac,
            hflip_p: aug.hflip_p,
            elastic_alpha: aug.elastic_alpha,
            elastic_sigma: aug.elastic_sigma,
            elastic_p: aug.elastic_p,
            data: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            n_qubits: self.n_qubits,
            depth: self.depth,
            mode: self.mode,
            dropout: self.dropout,
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            model: self.model_config(),
            lr: self.lr,
            batch_size: self.batch_size,
            alpha: self.label_smoothing,
            max_epochs: self.max_epochs,
            early_stop_patience: self.early_stop_patience,
            early_stop_min_delta: self.early_stop_min_delta,
            clip_norm: self.clip_norm,
            optimizer: AdamWConfig {
                weight_decay: self.weight_decay,
                ..AdamWConfig::default()
            },
            plateau: PlateauConfig {
                factor: self.plateau_factor,
                patience: self.plateau_patience,
                min_delta: self.plateau_min_delta,
                min_lr: self.min_lr,
            },
            augment: if self.augment {
                AugmentConfig {
                    rotate_deg: self.rotate_deg,
                    translate_frac: self.translate_frac,
                    hflip_p: self.hflip_p,
                    elastic_alpha: self.elastic_alpha,
                    elastic_sigma: self.elastic_sigma,
                    elastic_p: self.elastic_p,
                }
            } else {
                AugmentConfig::none()
            },
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> CliResult<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(CliError::Config(format!(
                "train_fraction {} outside (0, 1)",
                self.train_fraction
            )));
        }
        self.train_config().validate()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_roundtrip_through_toml() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        cfg.validate().unwrap();
    }

    #[test]
    fn partial_file_fills_defaults() {
        let cfg = RunConfig::from_toml("lr = 5e-4\nmode = \"ablation\"\nn_qubits = 4\n").unwrap();
        assert_eq!(cfg.lr, 5e-4);
        assert_eq!(cfg.mode, HeadMode::Classical);
        assert_eq!(cfg.batch_size, 32);
        assert_eq!(cfg.model_config().n_qubits, 4);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_config_errors() {
        assert!(matches!(RunConfig::from_toml("learning_rate = 1.0"), Err(CliError::Config(_))));
        let cfg = RunConfig {
            dropout: 1.5,
            ..RunConfig::default()
        };
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn augment_toggle_disables_every_step() {
        let cfg = RunConfig {
            augment: false,
            ..RunConfig::default()
        };
        assert!(cfg.train_config().augment.is_identity());
    }
}

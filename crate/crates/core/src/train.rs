//! The epoch loop: augmented training pass, validation, plateau schedule and
//! early stopping, keeping the weights with the lowest validation loss.
//!
//! Per-sample gradients are accumulated in fixed-size chunks that run in
//! parallel and are then summed in chunk order, so results do not depend on
//! the number of worker threads.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{augment, batches, AugmentConfig, Dataset};
use crate::error::{Error, Result};
use crate::metrics::{argmax, evaluate};
use crate::model::{HybridModel, ModelConfig};
use crate::optim::{
    clip_grad_norm, label_smoothed_ce_single, AdamW, AdamWConfig, EarlyStopping, EpochRecord, LossConfig,
    PlateauConfig, PlateauScheduler, TrainState,
};
use crate::seeding::{self, tag};

/// Samples per gradient-accumulation chunk.
const GRAD_CHUNK: usize = 8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub model: ModelConfig,
    pub lr: f64,
    pub batch_size: usize,
    /// Label smoothing for both the training loss and the validation loss.
    pub alpha: f64,
    pub max_epochs: usize,
    pub early_stop_patience: usize,
    pub early_stop_min_delta: f64,
    pub clip_norm: f64,
    pub optimizer: AdamWConfig,
    pub plateau: PlateauConfig,
    pub augment: AugmentConfig,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig::default(),
            lr: 1e-3,
            batch_size: 32,
            alpha: 0.05,
            max_epochs: 100,
            early_stop_patience: 20,
            early_stop_min_delta: 1e-4,
            clip_norm: 1.0,
            optimizer: AdamWConfig::default(),
            plateau: PlateauConfig::default(),
            augment: AugmentConfig::default(),
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        LossConfig::new(self.alpha, crate::model::N_CLASSES)?;
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("learning rate {} must be positive", self.lr)));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        if !self.clip_norm.is_finite() || self.clip_norm <= 0.0 {
            return Err(Error::Config(format!("clip norm {} must be positive", self.clip_norm)));
        }
        for (name, p) in [("hflip_p", self.augment.hflip_p), ("elastic_p", self.augment.elastic_p)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} {p} outside [0, 1]")));
            }
        }
        Ok(())
    }

    fn loss(&self) -> LossConfig {
        LossConfig {
            alpha: self.alpha,
            n_classes: crate::model::N_CLASSES,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    /// Weights from the epoch with the lowest validation loss, or the
    /// initial weights when no epoch ran.
    pub model: HybridModel,
    pub log: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
    pub best_val_loss: f64,
    pub best_val_acc: f64,
    pub stopped_early: bool,
}

/// Model initialised from `seed` exactly as [`train`] does it.
pub fn initial_model(cfg: &TrainConfig) -> Result<HybridModel> {
    HybridModel::new(cfg.model, &mut seeding::stream(cfg.seed, &[tag::INIT]))
}

pub fn train(cfg: &TrainConfig, train_set: &Dataset, val_set: &Dataset) -> Result<TrainOutcome> {
    train_with_observer(cfg, train_set, val_set, |_| {})
}

/// Like [`train`], calling `observer` after every epoch.
pub fn train_with_observer(
    cfg: &TrainConfig,
    train_set: &Dataset,
    val_set: &Dataset,
    mut observer: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::Data("training and validation sets must be non-empty".into()));
    }
    let loss_cfg = cfg.loss();
    let mut model = initial_model(cfg)?;
    let mut state = TrainState {
        optimizer: AdamW::new(cfg.optimizer, model.num_params()),
        scheduler: PlateauScheduler::new(cfg.plateau, cfg.lr)?,
        early_stopping: EarlyStopping::new(cfg.early_stop_patience, cfg.early_stop_min_delta),
    };
    let mut outcome = TrainOutcome {
        model: model.clone(),
        log: Vec::new(),
        best_epoch: None,
        best_val_loss: f64::INFINITY,
        best_val_acc: 0.0,
        stopped_early: false,
    };

    for epoch in 1..=cfg.max_epochs {
        let lr = state.lr();
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for batch in batches(train_set.len(), cfg.batch_size, cfg.seed, epoch as u64)? {
            let mut step = batch_gradient(&model, cfg, &loss_cfg, train_set, &batch, epoch)?;
            loss_sum += step.loss_sum;
            correct += step.correct;
            clip_grad_norm(&mut step.grad, cfg.clip_norm);
            state.optimizer.step(&mut model.params_mut(), &step.grad, lr)?;
        }

        let val = evaluate(&model, val_set, &loss_cfg)?;
        if !val.test_loss.is_finite() {
            return Err(Error::NonFinite(format!("validation loss at epoch {epoch}")));
        }
        let record = EpochRecord {
            epoch,
            train_loss: loss_sum / train_set.len() as f64,
            train_acc: correct as f64 / train_set.len() as f64,
            val_loss: val.test_loss,
            val_acc: val.accuracy,
            lr,
        };
        observer(&record);
        outcome.log.push(record);

        outcome.best_val_acc = outcome.best_val_acc.max(val.accuracy);
        if val.test_loss < outcome.best_val_loss {
            outcome.best_val_loss = val.test_loss;
            outcome.best_epoch = Some(epoch);
            outcome.model = model.clone();
        }
        state.scheduler.step(val.test_loss);
        if state.early_stopping.check(val.test_loss) {
            outcome.stopped_early = true;
            break;
        }
    }
    Ok(outcome)
}

struct BatchStep {
    grad: Vec<f64>,
    loss_sum: f64,
    correct: usize,
}

/// Mean-loss gradient over one mini-batch. Each sample draws its
/// augmentation and dropout from its own stream keyed by epoch and index.
fn batch_gradient(
    model: &HybridModel,
    cfg: &TrainConfig,
    loss_cfg: &LossConfig,
    data: &Dataset,
    batch: &[usize],
    epoch: usize,
) -> Result<BatchStep> {
    let scale = 1.0 / batch.len() as f64;
    let chunks = batch
        .par_chunks(GRAD_CHUNK)
        .map(|chunk| {
            let mut acc = BatchStep {
                grad: vec![0.0; model.num_params()],
                loss_sum: 0.0,
                correct: 0,
            };
            for &idx in chunk {
                let mut rng = seeding::stream(cfg.seed, &[tag::SAMPLE, epoch as u64, idx as u64]);
                let img = augment(&data.images[idx], &cfg.augment, &mut rng);
                let cache = model.forward(&img.to_input(), true, &mut rng)?;
                let (loss, mut d_logits) = label_smoothed_ce_single(cache.logits(), img.label, loss_cfg)?;
                if !loss.is_finite() {
                    return Err(Error::NonFinite(format!("training loss for sample {idx}")));
                }
                acc.loss_sum += loss;
                acc.correct += usize::from(argmax(cache.logits()) == img.label);
                d_logits.iter_mut().for_each(|d| *d *= scale);
                model.backward(&cache, &d_logits, &mut acc.grad)?;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut parts = chunks.into_iter();
    let mut total = parts.next().expect("batches are non-empty");
    for part in parts {
        total.grad.iter_mut().zip(&part.grad).for_each(|(a, b)| *a += b);
        total.loss_sum += part.loss_sum;
        total.correct += part.correct;
    }
    Ok(total)
}

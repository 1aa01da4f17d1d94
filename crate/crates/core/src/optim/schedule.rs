use serde::{Deserialize, Serialize};

use super::adamw::AdamW;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateauConfig {
    pub factor: f64,
    pub patience: usize,
    pub min_delta: f64,
    pub min_lr: f64,
}

impl Default for PlateauConfig {
    fn default() -> Self {
        Self {
            factor: 0.5,
            patience: 5,
            min_delta: 1e-4,
            min_lr: 1e-5,
        }
    }
}

/// Multiplies the learning rate by `factor` once the validation loss has
/// failed to improve by at least `min_delta` for more than `patience`
/// consecutive epochs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateauScheduler {
    pub config: PlateauConfig,
    lr: f64,
    best: f64,
    bad_epochs: usize,
}

impl PlateauScheduler {
    pub fn new(config: PlateauConfig, lr: f64) -> Result<Self> {
        if !(lr > 0.0 && lr.is_finite()) {
            return Err(Error::Config(format!("learning rate {lr} must be positive")));
        }
        if !(config.factor > 0.0 && config.factor < 1.0) {
            return Err(Error::Config(format!("plateau factor {} outside (0, 1)", config.factor)));
        }
        Ok(Self {
            config,
            lr,
            best: f64::INFINITY,
            bad_epochs: 0,
        })
    }

    pub fn lr(&self) -> f64 {
        self.lr
    }

    pub fn bad_epochs(&self) -> usize {
        self.bad_epochs
    }

    /// Records one epoch's validation loss. Returns `true` if the learning
    /// rate was reduced.
    pub fn step(&mut self, val_loss: f64) -> bool {
        if val_loss < self.best - self.config.min_delta {
            self.best = val_loss;
            self.bad_epochs = 0;
            return false;
        }
        self.bad_epochs += 1;
        if self.bad_epochs > self.config.patience {
            self.bad_epochs = 0;
            let reduced = (self.lr * self.config.factor).max(self.config.min_lr);
            if reduced < self.lr {
                self.lr = reduced;
                return true;
            }
        }
        false
    }
}

/// Stops training once the validation loss has not improved for `patience`
/// epochs. Independent of the learning-rate schedule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EarlyStopping {
    pub patience: usize,
    pub min_delta: f64,
    best: f64,
    since_improve: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize, min_delta: f64) -> Self {
        Self {
            patience,
            min_delta,
            best: f64::INFINITY,
            since_improve: 0,
        }
    }

    pub fn best(&self) -> f64 {
        self.best
    }

    pub fn epochs_since_improve(&self) -> usize {
        self.since_improve
    }

    /// Returns `true` when training should stop.
    pub fn check(&mut self, val_loss: f64) -> bool {
        if val_loss < self.best - self.min_delta {
            self.best = val_loss;
            self.since_improve = 0;
        } else {
            self.since_improve += 1;
        }
        self.since_improve >= self.patience
    }
}

/// Everything the training loop carries between steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainState {
    pub optimizer: AdamW,
    pub scheduler: PlateauScheduler,
    pub early_stopping: EarlyStopping,
}

impl TrainState {
    pub fn lr(&self) -> f64 {
        self.scheduler.lr()
    }

    pub fn step(&self) -> u64 {
        self.optimizer.step_count()
    }

    pub fn best_val_loss(&self) -> f64 {
        self.early_stopping.best()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn improving_losses_keep_lr() {
        let mut s = PlateauScheduler::new(PlateauConfig::default(), 1e-3).unwrap();
        for i in 0..50 {
            assert!(!s.step(10.0 - i as f64 * 0.1));
        }
        assert_eq!(s.lr(), 1e-3);
    }

    #[test]
    fn flat_losses_reduce_exactly_once() {
        let cfg = PlateauConfig::default();
        let mut s = PlateauScheduler::new(cfg, 1e-3).unwrap();
        s.step(1.0); // establishes the baseline
        let reductions = (0..=cfg.patience).filter(|_| s.step(1.0)).count();
        assert_eq!(reductions, 1);
        assert_eq!(s.lr(), 5e-4);
        // the trace: reduction on the (patience+1)-th stagnant epoch, counter reset
        assert_eq!(s.bad_epochs(), 0);
    }

    #[test]
    fn floor_at_min_lr() {
        let cfg = PlateauConfig {
            patience: 0,
            ..PlateauConfig::default()
        };
        let mut s = PlateauScheduler::new(cfg, 1e-5).unwrap();
        s.step(1.0);
        for _ in 0..10 {
            assert!(!s.step(1.0));
        }
        assert_eq!(s.lr(), 1e-5);

        let mut s = PlateauScheduler::new(cfg, 1.5e-5).unwrap();
        s.step(1.0);
        assert!(s.step(1.0));
        assert_eq!(s.lr(), 1e-5);
    }

    #[test]
    fn early_stopping_trace() {
        let mut e = EarlyStopping::new(20, 1e-4);
        assert!(!e.check(1.0));
        for _ in 0..19 {
            assert!(!e.check(1.0));
        }
        // improvement resets the counter
        assert!(!e.check(0.5));
        assert_eq!(e.epochs_since_improve(), 0);
        for _ in 0..19 {
            assert!(!e.check(0.6));
        }
        assert!(e.check(0.6));
    }

    #[test]
    fn early_stop_counter_survives_lr_reductions() {
        let mut sched = PlateauScheduler::new(PlateauConfig::default(), 1e-3).unwrap();
        let mut stop = EarlyStopping::new(20, 1e-4);
        let mut reductions = 0;
        let mut stopped_at = None;
        for epoch in 0..40 {
            reductions += usize::from(sched.step(2.0));
            if stop.check(2.0) {
                stopped_at = Some(epoch);
                break;
            }
        }
        assert!(reductions >= 3);
        assert_eq!(stopped_at, Some(20));
    }
}

//! Training objective and optimizer machinery.

mod adamw;
mod clip;
mod log;
mod loss;
mod schedule;

pub use adamw::{AdamW, AdamWConfig};
pub use clip::{clip_grad_norm, l2_norm};
pub use log::{read_epoch_log, write_epoch_log, EpochRecord, EPOCH_LOG_HEADER};
pub use loss::{label_smoothed_ce, label_smoothed_ce_single, softmax, LossConfig};
pub use schedule::{EarlyStopping, PlateauConfig, PlateauScheduler, TrainState};

use std::fs;
use std::path::{Path, PathBuf};

use hqnet::checkpoint::{load_checkpoint, save_checkpoint};
use hqnet::dataset::{load_png, normalize, stratified_split, synthetic, write_shard, Dataset, SplitSpec};
use hqnet::metrics::{argmax, emit_report, evaluate, MetricsReport};
use hqnet::model::{Census, IMAGE_SIDE};
use hqnet::optim::{softmax, write_epoch_log, EpochRecord, LossConfig};
use hqnet::train::train_with_observer;
use hqnet::{Tensor, TrainOutcome};
use serde::Serialize;

use crate::config::RunConfig;
use crate::data;
use crate::error::{CliError, CliResult};
use crate::grid::{self, CellResult};

pub const CHECKPOINT_FILE: &str = "model.ckpt";
pub const EPOCH_LOG_FILE: &str = "epochs.csv";
pub const CONFIG_FILE: &str = "config.toml";
pub const GRID_RESULTS_FILE: &str = "grid_results.csv";
pub const GRID_RANKED_FILE: &str = "grid_ranked.csv";

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Other(format!("{}: {e}", path.display()))
}

fn loss_config(alpha: f64) -> CliResult<LossConfig> {
    Ok(LossConfig::new(alpha, hqnet::model::N_CLASSES)?)
}

fn split(cfg: &RunConfig, full: &Dataset) -> CliResult<(Dataset, Dataset)> {
    let spec = SplitSpec {
        train_fraction: cfg.train_fraction,
        seed: cfg.seed,
        stratified: true,
    };
    let (train, val) = stratified_split(full, &spec)?;
    if train.is_empty() || val.is_empty() {
        return Err(CliError::Data(format!(
            "{} images are too few for a {}/{} split",
            full.len(),
            cfg.train_fraction,
            1.0 - cfg.train_fraction
        )));
    }
    Ok((train, val))
}

fn print_epoch(r: &EpochRecord) {
    eprintln!(
        "epoch {:>3}  train_loss {:.4}  train_acc {:.4}  val_loss {:.4}  val_acc {:.4}  lr {:.2e}",
        r.epoch, r.train_loss, r.train_acc, r.val_loss, r.val_acc, r.lr
    );
}

fn run_training(cfg: &RunConfig, train: &Dataset, val: &Dataset, quiet: bool) -> CliResult<TrainOutcome> {
    Ok(train_with_observer(&cfg.train_config(), train, val, |r| {
        if !quiet {
            print_epoch(r)
        }
    })?)
}

/// Trains, then writes the best checkpoint, the epoch log, the resolved
/// configuration and an evaluation report into `out`.
pub fn train(cfg: &RunConfig, data_root: &Path, out: &Path, quiet: bool) -> CliResult<MetricsReport> {
    cfg.validate()?;
    let paths = data::resolve(data_root)?;
    let full = data::load(&paths.train)?;
    let (train_set, val_set) = split(cfg, &full)?;
    let test_set = paths.test.as_deref().map(data::load).transpose()?;

    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let resolved = RunConfig {
        data: Some(data_root.to_path_buf()),
        ..cfg.clone()
    };
    let cfg_path = out.join(CONFIG_FILE);
    fs::write(&cfg_path, resolved.to_toml()).map_err(|e| io_err(&cfg_path, e))?;

    let outcome = run_training(cfg, &train_set, &val_set, quiet)?;
    save_checkpoint(&outcome.model, &out.join(CHECKPOINT_FILE))?;
    write_epoch_log(&out.join(EPOCH_LOG_FILE), &outcome.log)?;

    let report = evaluate(
        &outcome.model,
        test_set.as_ref().unwrap_or(&val_set),
        &loss_config(cfg.label_smoothing)?,
    )?;
    emit_report(&report, out)?;
    Ok(report)
}

/// Runs (or resumes) the grid on `base`, writing the raw and ranked CSVs
/// into `out`.
pub fn grid_search(base: &RunConfig, data_root: &Path, out: &Path, quiet: bool) -> CliResult<Vec<(grid::GridCell, CellResult)>> {
    base.validate()?;
    let paths = data::resolve(data_root)?;
    let full = data::load(&paths.train)?;
    let (train_set, val_set) = split(base, &full)?;
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let ranked = grid::run_grid(base, &out.join(GRID_RESULTS_FILE), |cell, cfg| {
        if !quiet {
            eprintln!(
                "cell {:>2}: lr {} batch {} dropout {} smoothing {} depth {}",
                cell.index, cell.lr, cell.batch_size, cell.dropout, cell.label_smoothing, cell.depth
            );
        }
        cfg.validate()?;
        let outcome = run_training(cfg, &train_set, &val_set, quiet)?;
        Ok(CellResult {
            best_val_acc: outcome.best_val_acc,
            best_val_loss: outcome.best_val_loss,
            epochs: outcome.log.len(),
        })
    })?;
    grid::write_ranked(&out.join(GRID_RANKED_FILE), &ranked)?;
    Ok(ranked)
}

pub fn eval(checkpoint: &Path, data_root: &Path, alpha: f64, out: &Path) -> CliResult<MetricsReport> {
    let model = load_checkpoint(checkpoint)?;
    let test = data::load(&data::resolve_eval(data_root)?)?;
    let report = evaluate(&model, &test, &loss_config(alpha)?)?;
    emit_report(&report, out)?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prediction {
    pub label: usize,
    pub probabilities: Vec<f64>,
}

pub fn predict(checkpoint: &Path, image: &Path) -> CliResult<Prediction> {
    let model = load_checkpoint(checkpoint)?;
    let pixels = load_png(image)?;
    let x = Tensor::new(vec![1, IMAGE_SIDE, IMAGE_SIDE], normalize(&pixels))?;
    let probabilities = softmax(&model.predict(&x)?);
    Ok(Prediction {
        label: argmax(&probabilities),
        probabilities,
    })
}

/// Census of a checkpoint's tensors, or of the configured model when no
/// checkpoint is given (computed without allocating weights).
pub fn inspect_params(cfg: &RunConfig, checkpoint: Option<&Path>) -> CliResult<Census> {
    match checkpoint {
        Some(path) => Ok(load_checkpoint(path)?.param_census()),
        None => {
            cfg.validate()?;
            Ok(Census::for_config(&cfg.model_config()))
        }
    }
}

pub fn format_census(census: &Census) -> String {
    let group = |n: usize| {
        let digits = n.to_string();
        let mut out = String::new();
        for (i, ch) in digits.chars().enumerate() {
            if i > 0 && (digits.len() - i).is_multiple_of(3) {
                out.push(',');
            }
            out.push(ch);
        }
        out
    };
    let mut out = format!("{:<30} {:>12}\n", "component", "parameters");
    for row in &census.rows {
        out += &format!("{:<30} {:>12}\n", row.component, group(row.count));
    }
    out += &format!("{:<30} {:>12}\n", "Total", group(census.total));
    out
}

/// Writes `train.hqds` and `test.hqds` of procedurally drawn glyphs.
pub fn synth(out: &Path, train_per_class: usize, test_per_class: usize, seed: u64) -> CliResult<(PathBuf, PathBuf)> {
    fs::create_dir_all(out).map_err(|e| io_err(out, e))?;
    let train_path = out.join("train.hqds");
    let test_path = out.join("test.hqds");
    write_shard(&train_path, &synthetic::generate(train_per_class, seed)?)?;
    write_shard(&test_path, &synthetic::generate(test_per_class, seed.wrapping_add(1))?)?;
    Ok((train_path, test_path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn census_table_groups_digits() {
        let table = format_census(&Census::for_config(&RunConfig::default().model_config()));
        assert!(table.contains("2,338,432"));
        assert!(table.lines().last().unwrap().ends_with("2,339,092"));
    }
}

//! The 48-cell hyperparameter grid with a resumable results file.
//!
//! Cells are enumerated lexicographically over learning rate, batch size,
//! dropout, label smoothing and circuit depth, in that order. Each finished
//! cell is appended to the results CSV immediately; a later invocation
//! skips every cell already present there.

use std::fmt::Write as _;
use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::Path;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const LEARNING_RATES: [f64; 2] = [1e-3, 5e-4];
pub const BATCH_SIZES: [usize; 2] = [32, 64];
pub const DROPOUTS: [f64; 2] = [0.0, 0.05];
pub const LABEL_SMOOTHINGS: [f64; 2] = [0.0, 0.05];
pub const DEPTHS: [usize; 3] = [3, 4, 5];

pub const RESULTS_HEADER: &str = "cell,lr,batch_size,dropout,label_smoothing,depth,best_val_acc,best_val_loss,epochs";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridCell {
    pub index: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub dropout: f64,
    pub label_smoothing: f64,
    pub depth: usize,
}

impl GridCell {
    pub fn apply(&self, base: &RunConfig) -> RunConfig {
        RunConfig {
            lr: self.lr,
            batch_size: self.batch_size,
            dropout: self.dropout,
            label_smoothing: self.label_smoothing,
            depth: self.depth,
            ..base.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellResult {
    pub best_val_acc: f64,
    pub best_val_loss: f64,
    pub epochs: usize,
}

pub fn enumerate_grid() -> Vec<GridCell> {
    let mut cells = Vec::with_capacity(48);
    for &lr in &LEARNING_RATES {
        for &batch_size in &BATCH_SIZES {
            for &dropout in &DROPOUTS {
                for &label_smoothing in &LABEL_SMOOTHINGS {
                    for &depth in &DEPTHS {
                        cells.push(GridCell {
                            index: cells.len(),
                            lr,
                            batch_size,
                            dropout,
                            label_smoothing,
                            depth,
                        });
                    }
                }
            }
        }
    }
    cells
}

fn format_row(cell: &GridCell, r: &CellResult) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        cell.index,
        cell.lr,
        cell.batch_size,
        cell.dropout,
        cell.label_smoothing,
        cell.depth,
        r.best_val_acc,
        r.best_val_loss,
        r.epochs
    )
}

fn parse_row(line: &str) -> CliResult<(GridCell, CellResult)> {
    let bad = || CliError::Data(format!("malformed grid results row {line:?}"));
    let f: Vec<&str> = line.split(',').collect();
    if f.len() != 9 {
        return Err(bad());
    }
    let float = |s: &str| s.parse::<f64>().map_err(|_| bad());
    let int = |s: &str| s.parse::<usize>().map_err(|_| bad());
    Ok((
        GridCell {
            index: int(f[0])?,
            lr: float(f[1])?,
            batch_size: int(f[2])?,
            dropout: float(f[3])?,
            label_smoothing: float(f[4])?,
            depth: int(f[5])?,
        },
        CellResult {
            best_val_acc: float(f[6])?,
            best_val_loss: float(f[7])?,
            epochs: int(f[8])?,
        },
    ))
}

/// Rows already recorded in `path`, checked against the grid definition.
pub fn read_results(path: &Path) -> CliResult<Vec<(GridCell, CellResult)>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines();
    match lines.next() {
        None => return Ok(Vec::new()),
        Some(RESULTS_HEADER) => {}
        Some(_) => return Err(CliError::Data(format!("{}: unexpected header", path.display()))),
    }
    let grid = enumerate_grid();
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let (cell, result) = parse_row(line)?;
            if grid.get(cell.index) != Some(&cell) {
                return Err(CliError::Data(format!("results row {line:?} does not match the grid")));
            }
            Ok((cell, result))
        })
        .collect()
}

/// Best validation accuracy first; ties keep grid order.
pub fn rank(mut rows: Vec<(GridCell, CellResult)>) -> Vec<(GridCell, CellResult)> {
    rows.sort_by(|a, b| {
        b.1.best_val_acc
            .total_cmp(&a.1.best_val_acc)
            .then(a.0.index.cmp(&b.0.index))
    });
    rows
}

/// Trains every cell not yet in `results_path`, appending as it goes, and
/// returns all 48 rows ranked.
pub fn run_grid(
    base: &RunConfig,
    results_path: &Path,
    mut trainer: impl FnMut(&GridCell, &RunConfig) -> CliResult<CellResult>,
) -> CliResult<Vec<(GridCell, CellResult)>> {
    let mut rows = read_results(results_path)?;
    if !results_path.exists() || fs::metadata(results_path).map(|m| m.len() == 0).unwrap_or(true) {
        fs::write(results_path, format!("{RESULTS_HEADER}\n"))
            .map_err(|e| CliError::Other(format!("{}: {e}", results_path.display())))?;
    }
    for cell in enumerate_grid() {
        if rows.iter().any(|(c, _)| c.index == cell.index) {
            continue;
        }
        let result = trainer(&cell, &cell.apply(base))?;
        let mut file = OpenOptions::new()
            .append(true)
            .open(results_path)
            .map_err(|e| CliError::Other(format!("{}: {e}", results_path.display())))?;
        writeln!(file, "{}", format_row(&cell, &result))
            .map_err(|e| CliError::Other(format!("{}: {e}", results_path.display())))?;
        rows.push((cell, result));
    }
    Ok(rank(rows))
}

pub fn write_ranked(path: &Path, ranked: &[(GridCell, CellResult)]) -> CliResult<()> {
    let mut out = format!("rank,{RESULTS_HEADER}\n");
    for (i, (cell, result)) in ranked.iter().enumerate() {
        writeln!(out, "{},{}", i + 1, format_row(cell, result)).expect("writing to a String");
    }
    fs::write(path, out).map_err(|e| CliError::Other(format!("{}: {e}", path.display())))
}

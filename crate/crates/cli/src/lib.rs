//! Command-line front end for `hqnet`.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 for data errors
//! (missing, unreadable or malformed inputs), 4 for numeric failures, and 1
//! for anything else.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hqnet::HeadMode;

pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod grid;

pub use config::RunConfig;
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "hqnet", version, about = "Hybrid CNN + variational circuit digit classifier")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one model and write checkpoint, epoch log and report.
    Train(TrainArgs),
    /// Train all 48 grid cells (resumable) and rank them.
    GridSearch(GridArgs),
    /// Evaluate a checkpoint on a test set.
    Eval(EvalArgs),
    /// Classify one PNG image.
    Predict(PredictArgs),
    /// Print the trainable-parameter census.
    InspectParams(InspectArgs),
    /// Generate the synthetic glyph dataset as train/test shards.
    Synth(SynthArgs),
}

/// Configuration file plus per-key overrides; flags win over the file.
#[derive(Debug, Default, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Data root; falls back to $HQNET_DATA, then to `data` in the config.
    #[arg(long, env = data::DATA_ENV)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub dropout: Option<f64>,
    #[arg(long)]
    pub label_smoothing: Option<f64>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub n_qubits: Option<usize>,
    /// `quantum` or `classical` (alias `ablation`).
    #[arg(long)]
    pub mode: Option<HeadMode>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    /// Disable every augmentation step.
    #[arg(long)]
    pub no_augment: bool,
}

impl RunArgs {
    pub fn resolve(&self) -> CliResult<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field.clone() {
                    cfg.$field = v;
                }
            )*};
        }
        set!(seed, lr, batch_size, dropout, label_smoothing, depth, n_qubits, mode, max_epochs);
        if self.no_augment {
            cfg.augment = false;
        }
        if let Some(d) = &self.data {
            cfg.data = Some(d.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn require_data(cfg: &RunConfig) -> CliResult<PathBuf> {
    cfg.data
        .clone()
        .ok_or_else(|| CliError::Config(format!("no data root: pass --data or set {}", data::DATA_ENV)))
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value = "hqnet-run")]
    pub out: PathBuf,
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Cells use a 4-qubit register unless `--n-qubits` is given.
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value = "hqnet-grid")]
    pub out: PathBuf,
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Data root (its `test` entry is used when present).
    #[arg(long, env = data::DATA_ENV)]
    pub data: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub label_smoothing: f64,
    #[arg(long, default_value = "hqnet-eval")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    pub image: PathBuf,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub train_per_class: usize,
    #[arg(long, default_value_t = 50)]
    pub test_per_class: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Writes to stdout, treating a closed pipe as success.
fn emit(text: &str) -> CliResult<()> {
    use std::io::Write;
    match std::io::stdout().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Other(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn to_json(value: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(value).expect("report types serialize")
}

pub fn execute(command: Command) -> CliResult<()> {
    match command {
        Command::Train(a) => {
            let cfg = a.run.resolve()?;
            let root = require_data(&cfg)?;
            let report = commands::train(&cfg, &root, &a.out, a.quiet)?;
            emit(&format!(
                "accuracy {:.4}  loss {:.4}  outputs in {}\n",
                report.accuracy,
                report.test_loss,
                a.out.display()
            ))?;
        }
        Command::GridSearch(a) => {
            let mut cfg = a.run.resolve()?;
            if a.run.n_qubits.is_none() {
                cfg.n_qubits = 4;
            }
            let root = require_data(&cfg)?;
            let ranked = commands::grid_search(&cfg, &root, &a.out, a.quiet)?;
            let (best, result) = &ranked[0];
            emit(&format!(
                "best cell {}: lr {} batch {} dropout {} smoothing {} depth {}  val_acc {:.4}\n",
                best.index, best.lr, best.batch_size, best.dropout, best.label_smoothing, best.depth, result.best_val_acc
            ))?;
        }
        Command::Eval(a) => {
            let report = commands::eval(&a.checkpoint, &a.data, a.label_smoothing, &a.out)?;
            emit(&(to_json(&report) + "\n"))?;
        }
        Command::Predict(a) => {
            emit(&(to_json(&commands::predict(&a.checkpoint, &a.image)?) + "\n"))?;
        }
        Command::InspectParams(a) => {
            let cfg = a.run.resolve()?;
            let census = commands::inspect_params(&cfg, a.checkpoint.as_deref())?;
            if a.json {
                emit(&(to_json(&census) + "\n"))?;
            } else {
                emit(&commands::format_census(&census))?;
            }
        }
        Command::Synth(a) => {
            let (train, test) = commands::synth(&a.out, a.train_per_class, a.test_per_class, a.seed)?;
            emit(&format!("{}\n{}\n", train.display(), test.display()))?;
        }
    }
    Ok(())
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run(args: impl IntoIterator<Item = impl Into<OsString> + Clone>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => error::EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

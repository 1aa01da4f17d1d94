use std::path::{Path, PathBuf};

use hqnet::dataset::{load_dataset, Dataset};

use crate::error::{CliError, CliResult};

/// Environment variable consulted when `--data` is absent.
pub const DATA_ENV: &str = "HQNET_DATA";

/// Where the training and test data of a data root live.
///
/// A root containing `train` / `test` entries (directories, or
/// `train.hqds` / `test.hqds` shards) uses them; any other root is taken
/// to be the training data itself.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataPaths {
    pub train: PathBuf,
    pub test: Option<PathBuf>,
}

fn child(root: &Path, stem: &str) -> Option<PathBuf> {
    [stem.to_string(), format!("{stem}.hqds")]
        .into_iter()
        .map(|name| root.join(name))
        .find(|p| p.exists())
}

pub fn resolve(root: &Path) -> CliResult<DataPaths> {
    if !root.exists() {
        return Err(CliError::Data(format!("data root {} does not exist", root.display())));
    }
    Ok(match child(root, "train") {
        Some(train) => DataPaths {
            train,
            test: child(root, "test"),
        },
        None => DataPaths {
            train: root.to_path_buf(),
            test: None,
        },
    })
}

/// The evaluation set of a root: its `test` entry if present, else the root.
pub fn resolve_eval(root: &Path) -> CliResult<PathBuf> {
    let paths = resolve(root)?;
    Ok(paths.test.unwrap_or_else(|| root.to_path_buf()))
}

pub fn load(path: &Path) -> CliResult<Dataset> {
    let data = load_dataset(path)?;
    if data.is_empty() {
        return Err(CliError::Data(format!("{} holds no images", path.display())));
    }
    Ok(data)
}

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::Failure;

/// Values read from `--config`. Every field is optional; a flag given on
/// the command line wins over the file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub model: Option<String>,
    pub data: Option<PathBuf>,
    pub theta0: Option<Vec<f64>>,
    pub theta_star: Option<Vec<f64>>,
    pub sigma: Option<f64>,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    pub alpha: Option<f64>,
    pub max_iterations: Option<usize>,
    pub out: Option<PathBuf>,
    pub emit_plot_data: Option<PathBuf>,
    pub emit_data: Option<PathBuf>,
    pub dump_matrices: Option<PathBuf>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
    }
}

pub fn pick<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

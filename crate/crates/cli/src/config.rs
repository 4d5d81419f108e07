use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    #[default]
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MetricArg {
    Defect,
    Error,
}

/// Everything a run needs. Loaded from `--config` (JSON) and then overridden
/// by explicit flags.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Option<String>,
    pub orders: Vec<usize>,
    pub epsilons: Vec<f64>,
    pub p0: Option<f64>,
    /// Table name (`table1`..`table5`).
    pub name: Option<String>,
    pub metric: Option<MetricArg>,
    pub grid_points: Option<usize>,
    pub format: Format,
    pub out: Option<PathBuf>,
    /// Nonzero seeds jitter the shooting scan grid.
    pub seed: u64,
    /// Root tolerance on the condition residual.
    pub tol: Option<f64>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

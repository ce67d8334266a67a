use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use monoweight::neumann::Shape2D;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Flags shared by every subcommand; each overrides the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON file with any subset of the run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Weight exponents, comma separated.
    #[arg(long = "A", value_delimiter = ',', allow_hyphen_values = true)]
    pub a: Option<Vec<f64>>,
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<f64>,
    #[arg(long = "p-grid", value_delimiter = ',', allow_hyphen_values = true)]
    pub p_grid: Option<Vec<f64>>,
    /// Gradient powers for cov-verify, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha: Option<Vec<f64>>,
    /// random | off-center | extremal | sector | path to a JSON-lines file.
    #[arg(long)]
    pub corpus: Option<String>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// Output directory; without it reports go to standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads for corpus sweeps.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Grid spacing for solve-neumann.
    #[arg(long)]
    pub h: Option<f64>,
    /// Domain for solve-neumann as JSON, e.g. {"kind":"disk","params":{"center":[2,2],"radius":1}}.
    #[arg(long)]
    pub domain: Option<String>,
    /// Descent steps for shape-search.
    #[arg(long)]
    pub steps: Option<usize>,
}

/// Config-file form: every field optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<String>,
    #[serde(rename = "A")]
    pub a: Option<Vec<f64>>,
    pub n: Option<usize>,
    pub p: Option<f64>,
    pub p_grid: Option<Vec<f64>>,
    pub alpha: Option<Vec<f64>>,
    pub corpus: Option<String>,
    pub count: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub out: Option<String>,
    pub format: Option<Format>,
    pub workers: Option<usize>,
    pub h: Option<f64>,
    pub domain: Option<Shape2D>,
    pub steps: Option<usize>,
}

/// Fully resolved configuration, embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    pub n: usize,
    pub p: Option<f64>,
    pub p_grid: Option<Vec<f64>>,
    pub alpha: Option<Vec<f64>>,
    pub corpus: String,
    pub count: usize,
    pub seed: u64,
    pub tol: f64,
    pub out: Option<String>,
    pub format: Format,
    pub workers: Option<usize>,
    pub h: Option<f64>,
    pub domain: Option<Shape2D>,
    pub steps: Option<usize>,
}

fn read_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
}

impl RunConfig {
    /// Flags over file over defaults. `a` may still be empty for commands
    /// that derive it (cov-verify).
    pub fn resolve(command: &str, flags: &Flags, default_tol: f64) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(p) => read_file(p)?,
            None => FileConfig::default(),
        };
        if let Some(c) = &file.command {
            if c != command {
                return Err(CliError::Usage(format!("config file is for '{c}', not '{command}'")));
            }
        }
        let domain = match &flags.domain {
            Some(text) => Some(
                serde_json::from_str::<Shape2D>(text).map_err(|e| CliError::Usage(format!("bad --domain: {e}")))?,
            ),
            None => file.domain,
        };
        let a = flags.a.clone().or(file.a).unwrap_or_default();
        if let Some(n) = file.n {
            if !a.is_empty() && n != a.len() {
                return Err(CliError::Usage(format!("n = {n} does not match A of length {}", a.len())));
            }
        }
        let cfg = RunConfig {
            command: command.to_string(),
            n: a.len(),
            a,
            p: flags.p.or(file.p),
            p_grid: flags.p_grid.clone().or(file.p_grid),
            alpha: flags.alpha.clone().or(file.alpha),
            corpus: flags.corpus.clone().or(file.corpus).unwrap_or_else(|| "random".into()),
            count: flags.count.or(file.count).unwrap_or(20),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            tol: flags.tol.or(file.tol).unwrap_or(default_tol),
            out: flags.out.as_ref().map(|p| p.display().to_string()).or(file.out),
            format: flags.format.or(file.format).unwrap_or(Format::Json),
            workers: flags.workers.or(file.workers),
            h: flags.h.or(file.h),
            domain,
            steps: flags.steps.or(file.steps),
        };
        if !(cfg.tol >= 0.0) {
            return Err(CliError::Usage(format!("tolerance {} must be nonnegative", cfg.tol)));
        }
        if cfg.workers == Some(0) {
            return Err(CliError::Usage("--workers must be positive".into()));
        }
        Ok(cfg)
    }

    /// `p` values to sweep: the grid, else the single `p`, else `default`.
    pub fn exponents(&self, default: &[f64]) -> Vec<f64> {
        match (&self.p_grid, self.p) {
            (Some(g), _) => g.clone(),
            (None, Some(p)) => vec![p],
            (None, None) => default.to_vec(),
        }
    }
}

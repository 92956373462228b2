use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use nilheat::experiments::ExperimentConfig;
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every subcommand. Unset flags fall back to the config file,
/// then to the built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Built-in algebra name or algebra JSON file.
    #[arg(long, global = true)]
    pub algebra: Option<String>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub t: Option<f64>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long, global = true)]
    pub paths: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (falls back to NILHEAT_WORKERS, then the machine parallelism).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// TOML config file with `[experiment]` and `[output]` tables.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Omit run time and timestamp from JSON reports.
    #[arg(long, global = true)]
    pub reproducible: bool,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputTable {
    workers: Option<usize>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    experiment: ExperimentConfig,
    #[serde(default)]
    output: OutputTable,
}

/// Everything a subcommand needs after merging flags, file and defaults.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub experiment: ExperimentConfig,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub config_path: Option<PathBuf>,
    pub reproducible: bool,
}

fn read_file(path: &Path) -> Result<FileConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn env_workers() -> Result<Option<usize>, Failure> {
    match std::env::var("NILHEAT_WORKERS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Failure::config(format!("NILHEAT_WORKERS={v:?} is not a count"))),
        _ => Ok(None),
    }
}

impl Common {
    /// Flags over the config file over defaults; `default_format` applies when
    /// neither sets one.
    pub fn resolve(&self, default_format: Format) -> Result<Resolved, Failure> {
        let file = match &self.config {
            Some(p) => read_file(p)?,
            None => FileConfig::default(),
        };
        let mut e = file.experiment;
        if let Some(a) = &self.algebra {
            e.algebra = a.clone();
        }
        if let Some(t) = self.t {
            e.t = t;
        }
        if let Some(s) = self.steps {
            e.steps = s;
        }
        if let Some(p) = self.paths {
            e.paths = p;
        }
        if let Some(s) = self.seed {
            e.seed = s;
        }
        let workers = match self.workers {
            Some(w) => Some(w),
            None => env_workers()?.or(file.output.workers),
        };
        if workers == Some(0) {
            return Err(Failure::config("workers must be positive"));
        }
        Ok(Resolved {
            experiment: e,
            workers,
            out: self.out.clone().or(file.output.out),
            format: self.format.or(file.output.format).unwrap_or(default_format),
            config_path: self.config.clone(),
            reproducible: self.reproducible,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "[experiment]\nalgebra = \"abelian-2\"\nt = 0.5\npaths = 5000\n\n[output]\nformat = \"csv\"\n",
        )
        .unwrap();
        let common = Common {
            config: Some(path),
            paths: Some(2000),
            ..Common::default()
        };
        let r = common.resolve(Format::Json).unwrap();
        assert_eq!(r.experiment.algebra, "abelian-2");
        assert_eq!(r.experiment.t, 0.5);
        assert_eq!(r.experiment.paths, 2000);
        assert_eq!(r.experiment.steps, ExperimentConfig::default().steps);
        assert_eq!(r.format, Format::Csv);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(&path, "[experiment]\ntime = 1.0\n").unwrap();
        let common = Common {
            config: Some(path),
            ..Common::default()
        };
        assert!(common.resolve(Format::Json).is_err());
    }
}

//! Settings merged from flags, an optional JSON config file and the
//! environment. Flags win over the file, the file over the environment.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::Failure;

pub const THREADS_ENV: &str = "PHI_SENTINEL_THREADS";

/// JSON config file; every field is optional and mirrors a flag.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub library: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub background: Option<PathBuf>,
    pub k: Option<usize>,
    pub seed: Option<u64>,
    pub threshold: Option<f64>,
    pub threads: Option<usize>,
    pub folds: Option<usize>,
    pub fail_on_phi: Option<bool>,
    pub delimiter: Option<char>,
    pub no_header: Option<bool>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        let Some(path) = path else {
            return Ok(FileConfig::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::missing_input(format!("config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Failure::usage(format!("config {}: {e}", path.display())))
    }
}

/// Worker count: flag, then config file, then environment, then all cores.
pub fn resolve_threads(flag: Option<usize>, file: Option<usize>) -> Result<Option<usize>, Failure> {
    let env = match std::env::var(THREADS_ENV) {
        Ok(v) if !v.trim().is_empty() => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| Failure::usage(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?,
        ),
        _ => None,
    };
    let n = flag.or(file).or(env);
    if n == Some(0) {
        return Err(Failure::usage("thread count must be at least 1"));
    }
    Ok(n)
}

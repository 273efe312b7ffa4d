//! Files exchanged with users: datasets, configuration, thresholds.

pub mod config;
pub mod dataset;
pub mod thresholds;

pub use config::{parse_config, read_config};
pub use dataset::Dataset;
pub use thresholds::{parse_thresholds, read_thresholds};

use std::path::Path;

use crate::error::{Error, Result};

/// `key = value` lines; `#` starts a comment. Returns `(line, key, value)`.
pub(crate) fn key_values(text: &str, origin: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out: Vec<(usize, String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::Parse(format!("{origin}:{}: expected `key = value`", i + 1)));
        };
        let key = k.trim().to_string();
        if out.iter().any(|(_, seen, _)| *seen == key) {
            return Err(Error::Parse(format!("{origin}:{}: duplicate key `{key}`", i + 1)));
        }
        out.push((i + 1, key, v.trim().to_string()));
    }
    Ok(out)
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

//! Resolution of training settings from defaults, a config file, and flags.

use std::fs;
use std::path::Path;

use topic_embedding::model::ModelConfig;

use crate::error::{io_error, CliError};

pub const DEFAULT_TEST_FRAC: f64 = 0.1;

/// Everything a training run depends on besides its inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub model: ModelConfig,
    /// `0` trains on every document without a stopping criterion.
    pub test_frac: f64,
}

impl RunSettings {
    /// `key=value` lines covering every setting, readable by [`resolve`].
    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.entries() {
            out.push_str(&format!("{k}={v}\n"));
        }
        out
    }

    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let mut e = self.model.entries();
        e.push(("test_frac", format!("{:e}", self.test_frac)));
        e
    }
}

/// `key=value` pairs; blank lines and `#` comments are skipped.
pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let mut pairs = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => pairs.push((k.trim().to_string(), v.trim().to_string())),
            None => errors.push(format!(
                "{}:{}: expected key=value, got {line:?}",
                path.display(),
                i + 1
            )),
        }
    }
    if errors.is_empty() {
        Ok(pairs)
    } else {
        Err(CliError::Config(errors))
    }
}

/// Applies `file` then `flags` on top of the defaults for the resolved `K`,
/// collecting every bad key, bad value, and violated constraint.
pub fn resolve(file: &[(String, String)], flags: &[(&str, &str)]) -> Result<RunSettings, CliError> {
    let pairs: Vec<(&str, &str)> = file
        .iter()
        .map(|(k, v)| (k.as_str(), v.as_str()))
        .chain(flags.iter().copied())
        .collect();
    let mut errors = Vec::new();

    let k = match pairs.iter().rev().find(|(key, _)| *key == "k") {
        None => {
            errors.push("k is required (--k or k= in the config file)".to_string());
            None
        }
        Some((_, v)) => match v.trim().parse::<usize>() {
            Ok(k) => Some(k),
            Err(_) => {
                errors.push(format!("invalid value for k: {v:?}"));
                None
            }
        },
    };
    let mut settings = RunSettings {
        model: ModelConfig::new(k.unwrap_or(1)),
        test_frac: DEFAULT_TEST_FRAC,
    };
    for &(key, value) in &pairs {
        match key {
            "k" => {}
            "test_frac" => match value.trim().parse::<f64>() {
                Ok(f) if (0.0..1.0).contains(&f) => settings.test_frac = f,
                _ => errors.push(format!("test_frac must be in [0, 1): {value:?}")),
            },
            _ => {
                if let Err(e) = settings.model.set(key, value) {
                    errors.push(e);
                }
            }
        }
    }
    if k.is_some() {
        if let Err(e) = settings.model.validate() {
            errors.extend(e);
        }
    }
    if errors.is_empty() {
        Ok(settings)
    } else {
        Err(CliError::Config(errors))
    }
}

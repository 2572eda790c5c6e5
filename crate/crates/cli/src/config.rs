//! Flat key = value configuration files. Flags always take precedence over
//! file values; file values take precedence over built-in defaults.

use std::collections::HashMap;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

#[derive(Debug, Default, Clone)]
pub struct FileConfig {
    values: HashMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!(
                    "config line {} is not `key = value`: {raw}",
                    lineno + 1
                ))
            })?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(FileConfig { values })
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                CliError::Usage(format!("config key `{key}` has unparsable value `{raw}`"))
            }),
        }
    }
}

/// Flag, then config file, then default.
pub fn resolve<T: FromStr + Clone>(
    flag: Option<T>,
    config: &FileConfig,
    key: &str,
    default: T,
) -> Result<T, CliError> {
    if let Some(v) = flag {
        return Ok(v);
    }
    if let Some(v) = config.get::<T>(key)? {
        return Ok(v);
    }
    Ok(default)
}

/// As `resolve`, but with no default: the value must come from a flag or the
/// config file.
pub fn resolve_required<T: FromStr + Clone>(
    flag: Option<T>,
    config: &FileConfig,
    key: &str,
) -> Result<T, CliError> {
    if let Some(v) = flag {
        return Ok(v);
    }
    if let Some(v) = config.get::<T>(key)? {
        return Ok(v);
    }
    Err(CliError::Usage(format!(
        "missing required value `{key}` (flag or config)"
    )))
}

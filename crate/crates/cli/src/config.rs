//! Parameter resolution: command-line flag, then config file, then default.

use std::path::{Path, PathBuf};

use crate::error::{usage, CliError};
use crate::table::{Cell, Table};

const KNOWN_KEYS: &[&str] = &[
    "d", "m0", "m", "lambda", "lambda0", "cutoff", "grid_nodes", "threads", "format", "out", "t_max", "dt", "coupling",
    "stride",
];

#[derive(Debug, Clone, Default)]
pub struct Resolver {
    file: toml::Table,
    path: Option<PathBuf>,
    resolved: Vec<(String, Cell)>,
}

impl Resolver {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Resolver::default());
        };
        let config_err = |reason: String| CliError::Config { path: path.into(), reason };
        let text = std::fs::read_to_string(path).map_err(|e| config_err(e.to_string()))?;
        let file: toml::Table = text.parse().map_err(|e: toml::de::Error| config_err(e.message().to_string()))?;
        if let Some(k) = file.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(config_err(format!("unknown key `{k}`")));
        }
        Ok(Resolver { file, path: Some(path.into()), resolved: Vec::new() })
    }

    fn config_err(&self, key: &str, want: &str) -> CliError {
        CliError::Config {
            path: self.path.clone().unwrap_or_default(),
            reason: format!("`{key}` must be {want}"),
        }
    }

    fn record(&mut self, key: &str, value: Cell) {
        self.resolved.retain(|(k, _)| k != key);
        self.resolved.push((key.into(), value));
    }

    pub fn f64(&mut self, key: &str, flag: Option<f64>, default: Option<f64>) -> Result<Option<f64>, CliError> {
        let from_file = match self.file.get(key) {
            None => None,
            Some(toml::Value::Float(v)) => Some(*v),
            Some(toml::Value::Integer(v)) => Some(*v as f64),
            Some(_) => return Err(self.config_err(key, "a number")),
        };
        let v = flag.or(from_file).or(default);
        if let Some(v) = v {
            self.record(key, Cell::Float(v));
        }
        Ok(v)
    }

    pub fn require_f64(&mut self, key: &str, flag: Option<f64>, default: Option<f64>) -> Result<f64, CliError> {
        self.f64(key, flag, default)?.ok_or_else(|| usage(format!("missing required parameter --{}", key.replace('_', "-"))))
    }

    pub fn usize(&mut self, key: &str, flag: Option<usize>, default: Option<usize>) -> Result<Option<usize>, CliError> {
        let from_file = match self.file.get(key) {
            None => None,
            Some(toml::Value::Integer(v)) if *v >= 0 => Some(*v as usize),
            Some(_) => return Err(self.config_err(key, "a non-negative integer")),
        };
        let v = flag.or(from_file).or(default);
        if let Some(v) = v {
            self.record(key, Cell::Int(v as u64));
        }
        Ok(v)
    }

    pub fn string(&mut self, key: &str, flag: Option<String>, default: Option<&str>) -> Result<Option<String>, CliError> {
        let from_file = match self.file.get(key) {
            None => None,
            Some(toml::Value::String(s)) => Some(s.clone()),
            Some(_) => return Err(self.config_err(key, "a string")),
        };
        let v = flag.or(from_file).or(default.map(str::to_string));
        if let Some(v) = &v {
            self.record(key, Cell::Text(v.clone()));
        }
        Ok(v)
    }

    /// Copies every resolved value into the table's parameter block.
    pub fn echo(&self, table: &mut Table) {
        if let Some(p) = &self.path {
            table.param("config", p.display().to_string());
        }
        for (k, v) in &self.resolved {
            table.param(k, v.clone());
        }
    }
}

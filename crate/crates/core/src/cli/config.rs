//! Flat `key = value` config files. Command-line flags take precedence.

use std::path::{Path, PathBuf};

use toml::{Table, Value};

use super::CliError;

#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    path: Option<PathBuf>,
    table: Table,
}

impl ConfigFile {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        let table: Table = text
            .parse()
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        if let Some((k, _)) = table.iter().find(|(_, v)| v.is_table() || v.is_array()) {
            return Err(CliError::Usage(format!(
                "{}: key `{k}` is nested; config files are flat key = value",
                path.display()
            )));
        }
        Ok(Self {
            path: Some(path.to_path_buf()),
            table,
        })
    }

    fn bad(&self, key: &str, want: &str) -> CliError {
        let origin = self
            .path
            .as_ref()
            .map_or_else(String::new, |p| format!("{}: ", p.display()));
        CliError::Usage(format!("{origin}`{key}` must be {want}"))
    }

    pub fn has(&self, key: &str) -> bool {
        self.table.contains_key(key)
    }

    pub fn f64(&self, key: &str, flag: Option<f64>) -> Result<Option<f64>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Float(v)) => Ok(Some(*v)),
            Some(Value::Integer(v)) => Ok(Some(*v as f64)),
            Some(_) => Err(self.bad(key, "a number")),
        }
    }

    pub fn usize(&self, key: &str, flag: Option<usize>) -> Result<Option<usize>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::Integer(v)) if *v >= 0 => Ok(Some(*v as usize)),
            Some(_) => Err(self.bad(key, "a non-negative integer")),
        }
    }

    pub fn string(&self, key: &str, flag: Option<String>) -> Result<Option<String>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.table.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(self.bad(key, "a string")),
        }
    }

    /// Switches are on when set by flag or by file.
    pub fn flag(&self, key: &str, flag: bool) -> Result<bool, CliError> {
        if flag {
            return Ok(true);
        }
        match self.table.get(key) {
            None => Ok(false),
            Some(Value::Boolean(b)) => Ok(*b),
            Some(_) => Err(self.bad(key, "true or false")),
        }
    }
}

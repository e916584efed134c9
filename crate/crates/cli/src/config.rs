//! Flat `key = value` configuration files. Flags override file values.

use std::collections::BTreeSet;
use std::path::Path;

use toml::{Table, Value};

use crate::error::CliError;

/// A parsed config file plus the set of keys the command consumed, so that
/// unknown keys can be reported by name.
pub struct FlatConfig {
    table: Table,
    used: BTreeSet<String>,
}

impl FlatConfig {
    pub fn empty() -> Self {
        FlatConfig {
            table: Table::new(),
            used: BTreeSet::new(),
        }
    }

    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::empty());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Failed(format!("cannot read {}: {e}", path.display())))?;
        let table: Table = text
            .parse()
            .map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        if let Some((k, _)) = table.iter().find(|(_, v)| v.is_table()) {
            return Err(CliError::Invalid(format!(
                "config key `{k}`: nested tables are not supported"
            )));
        }
        Ok(FlatConfig {
            table,
            used: BTreeSet::new(),
        })
    }

    fn raw(&mut self, key: &str) -> Option<&Value> {
        self.used.insert(key.to_string());
        self.table.get(key)
    }

    pub fn has(&self, key: &str) -> bool {
        self.table.contains_key(key)
    }

    pub fn f64(&mut self, key: &str, flag: Option<f64>) -> Result<Option<f64>, CliError> {
        let from_file = match self.raw(key) {
            None => None,
            Some(Value::Float(x)) => Some(*x),
            Some(Value::Integer(i)) => Some(*i as f64),
            Some(other) => return Err(bad(key, "a number", other)),
        };
        Ok(flag.or(from_file))
    }

    pub fn u32(&mut self, key: &str, flag: Option<u32>) -> Result<Option<u32>, CliError> {
        let from_file =
            match self.raw(key) {
                None => None,
                Some(Value::Integer(i)) => Some(u32::try_from(*i).map_err(|_| {
                    CliError::Invalid(format!("config key `{key}`: {i} out of range"))
                })?),
                Some(other) => return Err(bad(key, "an integer", other)),
            };
        Ok(flag.or(from_file))
    }

    pub fn usize(&mut self, key: &str, flag: Option<usize>) -> Result<Option<usize>, CliError> {
        let from_file = self.u32(key, None)?;
        Ok(flag.or(from_file.map(|v| v as usize)))
    }

    pub fn string(&mut self, key: &str, flag: Option<String>) -> Result<Option<String>, CliError> {
        let from_file = match self.raw(key) {
            None => None,
            Some(Value::String(s)) => Some(s.clone()),
            Some(other) => return Err(bad(key, "a string", other)),
        };
        Ok(flag.or(from_file))
    }

    /// A number or an array of numbers.
    pub fn list(&mut self, key: &str) -> Result<Option<Vec<f64>>, CliError> {
        match self.raw(key) {
            None => Ok(None),
            Some(Value::Float(x)) => Ok(Some(vec![*x])),
            Some(Value::Integer(i)) => Ok(Some(vec![*i as f64])),
            Some(Value::Array(items)) => items
                .iter()
                .map(|v| match v {
                    Value::Float(x) => Ok(*x),
                    Value::Integer(i) => Ok(*i as f64),
                    other => Err(bad(key, "numbers", other)),
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            Some(other) => Err(bad(key, "a number or array of numbers", other)),
        }
    }

    /// Fails on the first key that no command option consumed.
    pub fn finish(self) -> Result<(), CliError> {
        match self.table.keys().find(|k| !self.used.contains(*k)) {
            Some(k) => Err(CliError::Invalid(format!("unknown config key `{k}`"))),
            None => Ok(()),
        }
    }
}

fn bad(key: &str, want: &str, got: &Value) -> CliError {
    CliError::Invalid(format!("config key `{key}`: expected {want}, got {got}"))
}

pub fn require<T>(value: Option<T>, key: &str) -> Result<T, CliError> {
    value.ok_or_else(|| {
        CliError::Invalid(format!(
            "missing required value `{key}` (flag or config key)"
        ))
    })
}

//! Flat key-value config files: `key = value` lines, `#` comments.
//! Violations are reported with the line number and field name.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(field) = &self.field {
            write!(f, "{field}: ")?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
    consumed: bool,
}

/// A parsed key-value file with typed, error-annotated accessors.
#[derive(Debug, Clone)]
pub struct KeyValueFile {
    entries: BTreeMap<String, Entry>,
}

impl KeyValueFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (index, raw_line) in text.lines().enumerate() {
            let line_number = index + 1;
            let line = match raw_line.find('#') {
                Some(comment) => &raw_line[..comment],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError {
                    line: Some(line_number),
                    field: None,
                    message: "expected `key = value`".to_string(),
                });
            };
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(ConfigError {
                    line: Some(line_number),
                    field: None,
                    message: "empty key".to_string(),
                });
            }
            if entries
                .insert(
                    key.clone(),
                    Entry {
                        value: value.trim().to_string(),
                        line: line_number,
                        consumed: false,
                    },
                )
                .is_some()
            {
                return Err(ConfigError {
                    line: Some(line_number),
                    field: Some(key),
                    message: "duplicate key".to_string(),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            line: None,
            field: None,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    pub fn require<T: FromStr>(&mut self, key: &str) -> Result<T, ConfigError>
    where
        T::Err: fmt::Display,
    {
        match self.optional(key)? {
            Some(value) => Ok(value),
            None => Err(ConfigError {
                line: None,
                field: Some(key.to_string()),
                message: "missing required field".to_string(),
            }),
        }
    }

    pub fn optional<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        let Some(entry) = self.entries.get_mut(key) else {
            return Ok(None);
        };
        entry.consumed = true;
        let line = entry.line;
        entry.value.parse::<T>().map(Some).map_err(|e| ConfigError {
            line: Some(line),
            field: Some(key.to_string()),
            message: e.to_string(),
        })
    }

    /// Comma-separated list field.
    pub fn optional_list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>, ConfigError>
    where
        T::Err: fmt::Display,
    {
        let Some(entry) = self.entries.get_mut(key) else {
            return Ok(None);
        };
        entry.consumed = true;
        let line = entry.line;
        entry
            .value
            .split(',')
            .map(|item| {
                item.trim().parse::<T>().map_err(|e| ConfigError {
                    line: Some(line),
                    field: Some(key.to_string()),
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<T>, _>>()
            .map(Some)
    }

    /// Errors on the first key nobody asked for — catches typos.
    pub fn reject_unknown(&self) -> Result<(), ConfigError> {
        for (key, entry) in &self.entries {
            if !entry.consumed {
                return Err(ConfigError {
                    line: Some(entry.line),
                    field: Some(key.clone()),
                    message: "unknown field".to_string(),
                });
            }
        }
        Ok(())
    }
}

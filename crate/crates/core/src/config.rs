//! Flat `key = value` configuration files with optional `[section]` headers.
//!
//! Keys inside a section are addressed as `section.key`. Blank lines and
//! lines starting with `#` or `;` are ignored.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("I/O error reading config: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("key `{key}`: invalid value `{value}`")]
    InvalidValue { key: String, value: String },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeyValueConfig {
    entries: BTreeMap<String, String>,
}

impl KeyValueConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                    line: n + 1,
                    message: "unterminated section header".into(),
                })?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: n + 1,
                message: "expected `key = value`".into(),
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(ConfigError::Syntax { line: n + 1, message: "empty key".into() });
            }
            let full = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
            entries.insert(full, value.trim().to_string());
        }
        Ok(KeyValueConfig { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.entries.insert(key.into(), value.into());
    }

    pub fn parse_value<T: FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| ConfigError::InvalidValue {
                key: key.to_string(),
                value: v.to_string(),
            }),
        }
    }

    /// A `|`-separated list value; empty items are dropped.
    pub fn list(&self, key: &str) -> Option<Vec<String>> {
        self.get(key).map(|v| {
            v.split('|').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
        })
    }

    /// Overlay environment variables named `<prefix><SECTION>_<KEY>` (upper
    /// case, dots and dashes mapped to underscores) on top of known keys.
    pub fn apply_env(&mut self, prefix: &str, vars: impl IntoIterator<Item = (String, String)>) {
        let vars: BTreeMap<String, String> = vars.into_iter().collect();
        let keys: Vec<String> = self.entries.keys().cloned().collect();
        for key in keys {
            let name = format!("{prefix}{}", key.to_uppercase().replace(['.', '-'], "_"));
            if let Some(v) = vars.get(&name) {
                self.entries.insert(key, v.clone());
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_prefix_keys() {
        let cfg = KeyValueConfig::parse(
            "# comment\ntop = 1\n[paragraphs]\nmin_chars = 500\n\n[sections]\ndiscard = Voir aussi | Liens externes\n",
        )
        .unwrap();
        assert_eq!(cfg.get("top"), Some("1"));
        assert_eq!(cfg.parse_value::<usize>("paragraphs.min_chars").unwrap(), Some(500));
        assert_eq!(cfg.list("sections.discard").unwrap(), ["Voir aussi", "Liens externes"]);
    }

    #[test]
    fn syntax_errors_carry_line() {
        let err = KeyValueConfig::parse("a = 1\nnonsense\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 2, .. }));
    }

    #[test]
    fn env_overrides_known_keys() {
        let mut cfg = KeyValueConfig::parse("[paragraphs]\nmin_chars = 500\n").unwrap();
        cfg.apply_env(
            "ANNOFORGE_",
            [("ANNOFORGE_PARAGRAPHS_MIN_CHARS".to_string(), "400".to_string())],
        );
        assert_eq!(cfg.get("paragraphs.min_chars"), Some("400"));
    }
}

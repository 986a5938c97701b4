//! Flat key=value config files.
//!
//! One `key = value` pair per line; `#` starts a comment; blank lines are
//! skipped. Every experiment CLI flag has a twin key here, and command-line
//! flags override file values. Duplicate keys keep the last value.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::parse(i + 1, format!("expected key=value, found {line:?}"))
            })?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::parse(i + 1, "empty key"));
            }
            entries.insert(key.to_string(), value.trim().to_string());
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Parses the value under `key` with its `FromStr`, mapping failures to
    /// a validation error that names the key.
    pub fn get_parsed<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: std::str::FromStr,
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|e| {
                Error::InvalidParameter(format!("config key {key} = {raw:?}: {e}"))
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_comments_and_blanks() {
        let cfg = ConfigFile::parse(
            "# an experiment\n\
             q = 7\n\
             \n\
             seed=42   # trailing comment\n\
             ka = 0,1,2\n",
        )
        .unwrap();
        assert_eq!(cfg.get("q"), Some("7"));
        assert_eq!(cfg.get("seed"), Some("42"));
        assert_eq!(cfg.get("ka"), Some("0,1,2"));
        assert_eq!(cfg.get("missing"), None);
    }

    #[test]
    fn rejects_lines_without_equals() {
        let err = ConfigFile::parse("q 7\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn last_duplicate_wins() {
        let cfg = ConfigFile::parse("a=1\na=2\n").unwrap();
        assert_eq!(cfg.get("a"), Some("2"));
    }

    #[test]
    fn typed_access_reports_the_key() {
        let cfg = ConfigFile::parse("replications = soon\n").unwrap();
        let err = cfg.get_parsed::<usize>("replications").unwrap_err();
        assert!(err.to_string().contains("replications"));
        assert_eq!(cfg.get_parsed::<u64>("absent").unwrap(), None);
    }
}

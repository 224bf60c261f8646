//! Flat `key = value` text format used for configs and metadata sidecars.
//!
//! Blank lines and lines starting with `#` are ignored, as is anything after
//! a `#` on a value line. Lists are comma separated.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvMap {
    entries: BTreeMap<String, (usize, String)>,
}

impl KvMap {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    line: i + 1,
                    column: 1,
                    message: format!("expected `key = value`, found `{line}`"),
                });
            };
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(Error::Parse {
                    line: i + 1,
                    column: 1,
                    message: "empty key".into(),
                });
            }
            if entries.insert(key.clone(), (i + 1, value.trim().to_string())).is_some() {
                return Err(Error::Parse {
                    line: i + 1,
                    column: 1,
                    message: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn insert(&mut self, key: &str, value: impl ToString) {
        let line = self.entries.len() + 1;
        self.entries.insert(key.to_string(), (line, value.to_string()));
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Fails on the first key not in `known`.
    pub fn reject_unknown(&self, known: &[&str]) -> Result<()> {
        match self.keys().find(|k| !known.contains(k)) {
            Some(k) => Err(Error::invalid(k, "unknown key")),
            None => Ok(()),
        }
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::invalid(key, format!("cannot parse `{v}`")))
            })
            .transpose()
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        Ok(self.get(key)?.unwrap_or(default))
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.get(key)?.ok_or_else(|| Error::invalid(key, "missing"))
    }

    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse()
                            .map_err(|_| Error::invalid(key, format!("cannot parse `{s}`")))
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, (_, v)) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

/// Joins values with `, ` for list-valued keys.
pub fn join<T: ToString>(values: &[T]) -> String {
    values.iter().map(ToString::to_string).collect::<Vec<_>>().join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_lists() {
        let kv = KvMap::parse("# header\nn = 500 # obs\nps = 10, 50,100\n\n").unwrap();
        assert_eq!(kv.require::<usize>("n").unwrap(), 500);
        assert_eq!(kv.get_list::<usize>("ps").unwrap().unwrap(), vec![10, 50, 100]);
        assert!(kv.get::<f64>("missing").unwrap().is_none());
    }

    #[test]
    fn reports_bad_lines_and_values() {
        assert!(matches!(
            KvMap::parse("a = 1\nnot a pair"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(KvMap::parse("a = 1\na = 2").is_err());
        let kv = KvMap::parse("rho = x").unwrap();
        match kv.get::<f64>("rho") {
            Err(Error::InvalidConfig { field, .. }) => assert_eq!(field, "rho"),
            other => panic!("unexpected {other:?}"),
        }
        assert!(kv.reject_unknown(&["n"]).is_err());
    }
}

//! Flat `key = value` text documents used for models, baseline parameters
//! and run configuration.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KvDoc {
    entries: Vec<(String, String, usize)>,
    source: String,
}

impl KvDoc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut doc = KvDoc {
            entries: Vec::new(),
            source: source.to_string(),
        };
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                path: source.to_string(),
                line: i + 1,
                message,
            };
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got {line:?}")))?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(err("empty key".into()));
            }
            if doc.entries.iter().any(|(key, _, _)| key == k) {
                return Err(err(format!("duplicate key `{k}`")));
            }
            doc.entries.push((k.to_string(), v.to_string(), i + 1));
        }
        Ok(doc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        match self.entries.iter_mut().find(|(k, _, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value, 0)),
        }
    }

    pub fn set_f64(&mut self, key: &str, value: f64) {
        self.set(key, fmt_sig9(value));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _, _)| k == key)
            .map(|(_, v, _)| v.as_str())
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(k, _, _)| k.as_str())
    }

    /// Parses an optional value, reporting the line of a malformed one.
    pub fn parse_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        let Some((_, v, line)) = self.entries.iter().find(|(k, _, _)| k == key) else {
            return Ok(None);
        };
        v.parse().map(Some).map_err(|_| Error::Parse {
            path: self.source.clone(),
            line: *line,
            message: format!("invalid value {v:?} for `{key}`"),
        })
    }

    pub fn require<T: FromStr>(&self, key: &str) -> Result<T> {
        self.parse_opt(key)?.ok_or_else(|| {
            Error::invalid(format!("{}: missing key `{key}`", self.source))
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v, _) in &self.entries {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

/// Rounds to 9 significant digits and prints the shortest decimal that
/// reads back to the rounded value.
pub fn fmt_sig9(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    let rounded: f64 = format!("{v:.8e}").parse().expect("valid float");
    format!("{rounded}")
}

/// The value a float takes after one save/load cycle.
pub fn round_sig9(v: f64) -> f64 {
    fmt_sig9(v).parse().unwrap_or(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_skips_comments() {
        let doc = KvDoc::parse("# hdr\n\na = 1\n b=two \n", "t").unwrap();
        assert_eq!(doc.get("a"), Some("1"));
        assert_eq!(doc.get("b"), Some("two"));
        assert_eq!(doc.keys().count(), 2);
    }

    #[test]
    fn errors_name_the_line() {
        let err = KvDoc::parse("a = 1\noops\n", "cfg").unwrap_err();
        assert_eq!(err.to_string(), "cfg:2: expected `key = value`, got \"oops\"");
        let err = KvDoc::parse("a = 1\na = 2\n", "cfg").unwrap_err();
        assert!(err.to_string().contains("duplicate"));
        let doc = KvDoc::parse("\nx = abc\n", "cfg").unwrap();
        let err = doc.require::<f64>("x").unwrap_err();
        assert!(err.to_string().starts_with("cfg:2:"));
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(fmt_sig9(0.1), "0.1");
        assert_eq!(fmt_sig9(std::f64::consts::PI), "3.14159265");
        assert_eq!(fmt_sig9(1.0 / 255.0), "0.00392156863");
        assert_eq!(fmt_sig9(0.0), "0");
    }

    proptest! {
        #[test]
        fn sig9_is_a_fixed_point(v in -1e6f64..1e6) {
            let once = round_sig9(v);
            prop_assert_eq!(round_sig9(once), once);
            prop_assert!((once - v).abs() <= v.abs() * 5e-9 + f64::MIN_POSITIVE);
        }
    }
}

//! Flat `key = value` run configuration.
//!
//! ```text
//! line    := blank | comment | entry
//! comment := '#' any*
//! entry   := key '=' value
//! key     := [a-z0-9_]+
//! ```
//!
//! Whitespace around keys and values is ignored. A key may appear once per
//! source. Positional `key=value` arguments override the file, and the
//! `--seed`/`--grid` flags override both.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug)]
struct Entry {
    value: String,
    origin: String,
}

/// Settings of one run, each remembering where it was set.
#[derive(Clone, Debug, Default)]
pub struct Params {
    entries: BTreeMap<String, Entry>,
}

fn valid_key(k: &str) -> bool {
    !k.is_empty()
        && k.bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

fn split_entry(text: &str, origin: &str) -> CliResult<(String, String)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| CliError::Usage(format!("{origin}: expected key = value, got '{text}'")))?;
    let (k, v) = (k.trim(), v.trim());
    if !valid_key(k) {
        return Err(CliError::Usage(format!("{origin}: invalid key '{k}'")));
    }
    if v.is_empty() {
        return Err(CliError::Usage(format!("{origin}: empty value for '{k}'")));
    }
    Ok((k.to_string(), v.to_string()))
}

impl Params {
    pub fn parse_str(text: &str, source: &str) -> CliResult<Params> {
        let mut p = Params::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let origin = format!("{source}:{}", i + 1);
            let (k, v) = split_entry(line, &origin)?;
            if let Some(prev) = p.entries.get(&k) {
                return Err(CliError::Usage(format!(
                    "{origin}: duplicate key '{k}' (first set at {})",
                    prev.origin
                )));
            }
            p.entries.insert(k, Entry { value: v, origin });
        }
        Ok(p)
    }

    pub fn from_file(path: &Path) -> CliResult<Params> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Params::parse_str(&text, &path.display().to_string())
    }

    /// Apply positional `key=value` arguments on top of the current entries.
    pub fn apply_overrides(&mut self, args: &[String]) -> CliResult<()> {
        let mut seen = BTreeMap::new();
        for (i, a) in args.iter().enumerate() {
            let origin = format!("argument {}", i + 1);
            let (k, v) = split_entry(a, &origin)?;
            if seen.insert(k.clone(), ()).is_some() {
                return Err(CliError::Usage(format!("{origin}: duplicate key '{k}'")));
            }
            self.entries.insert(k, Entry { value: v, origin });
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: impl Display, origin: &str) {
        self.entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                origin: origin.to_string(),
            },
        );
    }

    /// Reject keys that `allowed` does not list.
    pub fn check_allowed(&self, command: &str, allowed: &[&str]) -> CliResult<()> {
        for (k, e) in &self.entries {
            if !allowed.contains(&k.as_str()) {
                return Err(CliError::Usage(format!(
                    "{}: key '{k}' is not accepted by '{command}' (accepted: {})",
                    e.origin,
                    allowed.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.str(key).unwrap_or(default)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> CliResult<Option<T>>
    where
        T::Err: Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(Some)
                .map_err(|err| CliError::Usage(format!("{}: bad value '{}' for '{key}': {err}", e.origin, e.value))),
        }
    }

    pub fn get_or<T: FromStr>(&self, key: &str, default: T) -> CliResult<T>
    where
        T::Err: Display,
    {
        Ok(self.get(key)?.unwrap_or(default))
    }

    /// Run `parse` on the value of `key`, prefixing errors with its origin.
    pub fn parse_with<T>(&self, key: &str, default: &str, parse: impl FnOnce(&str) -> CliResult<T>) -> CliResult<T> {
        match self.entries.get(key) {
            None => parse(default),
            Some(e) => parse(&e.value).map_err(|err| match err {
                CliError::Usage(m) => CliError::Usage(format!("{}: {m}", e.origin)),
                other => other,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grammar() {
        let p = Params::parse_str("# run\n grid = 64 \n\npsi=power:2\n", "cfg").unwrap();
        assert_eq!(p.get::<usize>("grid").unwrap(), Some(64));
        assert_eq!(p.str("psi"), Some("power:2"));
        assert!(p.str("weight").is_none());
    }

    #[test]
    fn rejects_duplicates_and_junk() {
        assert!(Params::parse_str("a=1\na=2\n", "cfg").is_err());
        assert!(Params::parse_str("just words\n", "cfg").is_err());
        assert!(Params::parse_str("Grid=1\n", "cfg").is_err());
        assert!(Params::parse_str("grid=\n", "cfg").is_err());
    }

    #[test]
    fn overrides_and_allowed() {
        let mut p = Params::parse_str("grid=64\n", "cfg").unwrap();
        p.apply_overrides(&["grid=32".into(), "seed=3".into()]).unwrap();
        assert_eq!(p.get::<usize>("grid").unwrap(), Some(32));
        assert!(p.check_allowed("map", &["grid", "seed"]).is_ok());
        let err = p.check_allowed("ode", &["psi"]).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(p.get::<usize>("seed").is_ok());
        p.set("seed", "x", "flag");
        assert!(p.get::<u64>("seed").is_err());
    }
}

//! Flat `key = value` configuration. Command-line flags override file
//! entries, which override built-in defaults; every resolved value is kept
//! so the run can be replayed from its snapshot.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::error::CliError;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct KvConfig {
    /// key -> (1-based line, raw value)
    entries: BTreeMap<String, (usize, String)>,
}

impl KvConfig {
    /// Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`, got {line:?}", i + 1)))?;
            let k = k.trim();
            if k.is_empty() {
                return Err(CliError::Config(format!("line {}: empty key", i + 1)));
            }
            if entries.insert(k.to_string(), (i + 1, v.trim().to_string())).is_some() {
                return Err(CliError::Config(format!("line {}: duplicate key {k:?}", i + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

/// Resolved parameters of one run, in key order.
#[derive(Debug, Default)]
pub struct Resolver {
    file: KvConfig,
    used: BTreeSet<String>,
    pub snapshot: BTreeMap<String, String>,
}

impl Resolver {
    pub fn new(file: KvConfig) -> Self {
        Self { file, ..Default::default() }
    }

    /// Flag, then file, then `default`.
    pub fn get<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        self.used.insert(key.to_string());
        let value = match (flag, self.file.entries.get(key)) {
            (Some(v), _) => v,
            (None, Some((line, raw))) => raw
                .parse()
                .map_err(|e| CliError::Config(format!("line {line}: field {key:?}: cannot parse {raw:?}: {e}")))?,
            (None, None) => default,
        };
        self.snapshot.insert(key.to_string(), value.to_string());
        Ok(value)
    }

    /// Optional value with no default; absent keys are left out of the snapshot.
    pub fn get_opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError>
    where
        T: FromStr + Display,
        T::Err: Display,
    {
        self.used.insert(key.to_string());
        let value = match (flag, self.file.entries.get(key)) {
            (Some(v), _) => Some(v),
            (None, Some((line, raw))) => Some(
                raw.parse()
                    .map_err(|e| CliError::Config(format!("line {line}: field {key:?}: cannot parse {raw:?}: {e}")))?,
            ),
            (None, None) => None,
        };
        if let Some(v) = &value {
            self.snapshot.insert(key.to_string(), v.to_string());
        }
        Ok(value)
    }

    /// Fails on file keys the subcommand never asked for.
    pub fn finish(&self) -> Result<(), CliError> {
        for k in self.file.keys() {
            if !self.used.contains(k) {
                let line = self.file.entries[k].0;
                return Err(CliError::Config(format!("line {line}: unknown field {k:?} for this subcommand")));
            }
        }
        Ok(())
    }

    /// The snapshot in the file format accepted by [`KvConfig::parse`].
    pub fn to_text(&self) -> String {
        self.snapshot.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// Comma-separated list of numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct List<T>(pub Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',')
            .map(|x| x.trim().parse::<T>().map_err(|e| format!("{x:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(List)
    }
}

impl<T: Display> Display for List<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_beats_file_beats_default() {
        let file = KvConfig::parse("runs = 7\n# comment\n\nperms=3").unwrap();
        let mut r = Resolver::new(file);
        assert_eq!(r.get("runs", Some(9usize), 1).unwrap(), 9);
        assert_eq!(r.get("perms", None, 1usize).unwrap(), 3);
        assert_eq!(r.get("epochs", None, 300u64).unwrap(), 300);
        r.finish().unwrap();
    }

    #[test]
    fn errors_name_the_line() {
        let e = KvConfig::parse("a = 1\nnonsense").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        let mut r = Resolver::new(KvConfig::parse("x = 1\nruns = abc").unwrap());
        let e = r.get("runs", None, 1usize).unwrap_err();
        assert!(e.to_string().contains("line 2") && e.to_string().contains("runs"), "{e}");
        let e = r.finish().unwrap_err();
        assert!(e.to_string().contains("\"x\""), "{e}");
    }

    #[test]
    fn snapshot_round_trips() {
        let mut r = Resolver::new(KvConfig::default());
        r.get("betas", None, List(vec![0.5, 1.0, 2.5])).unwrap();
        r.get("seed", Some(7u64), 0).unwrap();
        r.get("eta", None, 0.1f64 + 0.2).unwrap();
        let mut again = Resolver::new(KvConfig::parse(&r.to_text()).unwrap());
        assert_eq!(again.get("betas", None, List(vec![])).unwrap(), List(vec![0.5, 1.0, 2.5]));
        assert_eq!(again.get("seed", None, 0u64).unwrap(), 7);
        assert_eq!(again.get("eta", None, 0.0f64).unwrap(), 0.1 + 0.2);
        assert_eq!(again.to_text(), r.to_text());
    }
}

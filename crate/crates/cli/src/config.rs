use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// Flat `key = value` settings read from a config file.
///
/// Blank lines and lines starting with `#` are ignored. Keys use the long
/// flag names with `_` or `-` interchangeably. Command-line flags take
/// precedence over file values.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim().replace('-', "_");
            if key.is_empty() {
                return Err(CliError::Config(format!("line {}: empty key", lineno + 1)));
            }
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(CliError::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
        }
        Ok(Self { entries })
    }

    /// Rejects keys outside `allowed`.
    pub fn check_keys(&self, allowed: &[&str]) -> Result<(), CliError> {
        match self.entries.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(CliError::Config(format!("unknown config key `{k}` (allowed: {})", allowed.join(", ")))),
            None => Ok(()),
        }
    }

    /// The flag value if given, else the parsed file value, else `None`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: std::fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.entries.get(key) {
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|e| CliError::Config(format!("bad value `{v}` for `{key}`: {e}"))),
            None => Ok(None),
        }
    }

    pub fn pick_or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }
}

/// Comma-separated list of sample counts, e.g. `4,8,16`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NList(pub Vec<usize>);

impl FromStr for NList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = s
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        if v.is_empty() {
            return Err("empty list".into());
        }
        Ok(NList(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_pairs() {
        let c = ConfigFile::parse("# comment\nseed = 7\n\ngrid-points=1024\n").unwrap();
        assert_eq!(c.pick::<u64>(None, "seed").unwrap(), Some(7));
        assert_eq!(c.pick::<u64>(Some(3), "seed").unwrap(), Some(3));
        assert_eq!(c.pick::<usize>(None, "grid_points").unwrap(), Some(1024));
        assert_eq!(c.pick_or::<f64>(None, "step", 1e-3).unwrap(), 1e-3);
        c.check_keys(&["seed", "grid_points"]).unwrap();
        assert!(c.check_keys(&["seed"]).is_err());
    }

    #[test]
    fn rejects_malformed_lines() {
        assert!(ConfigFile::parse("seed 7").is_err());
        assert!(ConfigFile::parse("= 7").is_err());
        assert!(ConfigFile::parse("a = 1\na = 2").is_err());
        let c = ConfigFile::parse("seed = x").unwrap();
        assert!(c.pick::<u64>(None, "seed").is_err());
    }

    #[test]
    fn n_list_parsing() {
        assert_eq!("4, 8,16".parse::<NList>().unwrap(), NList(vec![4, 8, 16]));
        assert!("4,,8".parse::<NList>().is_err());
    }
}

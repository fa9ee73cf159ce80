//! INI-style configuration files: `key = value` lines, `#`/`;` comments.
//!
//! Keys mirror the long command-line options with underscores; a flag
//! given on the command line always wins over the config file.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::failure::Failure;

/// Every key a config file may set. Anything else is rejected so typos
/// fail loudly instead of silently using a default.
const ALLOWED_KEYS: &[&str] = &[
    "threads",
    "preset",
    "g",
    "kappa_inv",
    "gamma_inv",
    "sigma2",
    "paths",
    "years",
    "freq",
    "seed",
    "burn_in",
    "drift",
    "start_date",
    "t_years",
    "ratio",
    "cut",
    "grid",
    "min_history",
    "per_symbol_norm",
    "weights",
    "daily_vol",
];

/// Parsed config file; absent keys defer to built-in defaults.
#[derive(Debug, Default)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    /// Loads and validates a config file. Later lines override earlier
    /// ones for the same key.
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Failure::Usage(format!(
                    "{}:{}: expected `key = value`, found `{line}`",
                    path.display(),
                    idx + 1
                )));
            };
            let key = key.trim().to_ascii_lowercase().replace('-', "_");
            if !ALLOWED_KEYS.contains(&key.as_str()) {
                return Err(Failure::Usage(format!(
                    "{}:{}: unknown config key `{key}`",
                    path.display(),
                    idx + 1
                )));
            }
            entries.insert(key, value.trim().to_string());
        }
        Ok(Self { entries })
    }

    /// Raw string value of `key`, if present.
    pub fn get_raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Parsed value of `key`, if present.
    pub fn get_parse<T: FromStr>(&self, key: &'static str) -> Result<Option<T>, Failure> {
        self.get_raw(key)
            .map(|raw| {
                raw.parse().map_err(|_| {
                    Failure::Usage(format!("config key `{key}`: invalid value `{raw}`"))
                })
            })
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load_str(content: &str) -> Result<ConfigMap, Failure> {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("meanrev.conf");
        fs::write(&path, content).unwrap();
        ConfigMap::load(&path)
    }

    #[test]
    fn parses_keys_comments_and_overrides() {
        let cfg = load_str(
            "# comment\n\
             ; also a comment\n\
             threads = 4\n\
             T-YEARS = 25\n\
             seed=1\n\
             seed = 2\n",
        )
        .unwrap();
        assert_eq!(cfg.get_parse::<usize>("threads").unwrap(), Some(4));
        assert_eq!(cfg.get_parse::<f64>("t_years").unwrap(), Some(25.0));
        assert_eq!(cfg.get_parse::<u64>("seed").unwrap(), Some(2));
        assert_eq!(cfg.get_raw("ratio"), None);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        let err = load_str("bogus_key = 1\n").unwrap_err();
        assert!(matches!(err, Failure::Usage(ref m) if m.contains("bogus_key")));
        let err = load_str("just a line\n").unwrap_err();
        assert!(matches!(err, Failure::Usage(ref m) if m.contains("key = value")));
    }

    #[test]
    fn bad_values_fail_at_parse_time() {
        let cfg = load_str("threads = lots\n").unwrap();
        assert!(matches!(
            cfg.get_parse::<usize>("threads").unwrap_err(),
            Failure::Usage(ref m) if m.contains("lots")
        ));
    }
}

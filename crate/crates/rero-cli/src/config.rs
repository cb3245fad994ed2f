//! Flat key-value config files mirroring the flag names; flags override
//! file entries.
//!
//! ```text
//! # low-dimensional simulation context
//! n = 4
//! norm = 1.01
//! sigma = 0.1
//! trials = 500
//! ```

use std::collections::HashMap;
use std::path::Path;

const KNOWN_KEYS: &[&str] = &[
    "metric",
    "n",
    "sigma",
    "clip-norm",
    "min-norm",
    "eta",
    "eta-db",
    "gamma",
    "gamma-prior",
    "m-rows",
    "rest-norm",
    "trials",
    "seed",
    "format",
    "data-range",
    "target",
    "norm",
    "loss-derivatives",
    "bias-rows",
    "variable",
    "grid",
    "emit",
    "columns",
];

pub struct ConfigMap {
    values: HashMap<String, String>,
}

impl ConfigMap {
    pub fn empty() -> Self {
        Self {
            values: HashMap::new(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                format!(
                    "config {} line {}: expected 'key = value', got '{line}'",
                    path.display(),
                    lineno + 1
                )
            })?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(format!(
                    "config {} line {}: unknown key '{key}'",
                    path.display(),
                    lineno + 1
                ));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, String> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| format!("config key '{key}': cannot parse '{v}'")),
        }
    }

    /// Flag value if present, else the config entry.
    pub fn f64(&self, key: &str, flag: Option<f64>) -> Result<Option<f64>, String> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.parsed(key),
        }
    }

    pub fn u64(&self, key: &str, flag: Option<u64>) -> Result<Option<u64>, String> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.parsed(key),
        }
    }

    pub fn usize(&self, key: &str, flag: Option<usize>) -> Result<Option<usize>, String> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.parsed(key),
        }
    }

    pub fn string(&self, key: &str, flag: Option<String>) -> Option<String> {
        flag.or_else(|| self.values.get(key).cloned())
    }

    pub fn bool(&self, key: &str, flag: bool) -> Result<bool, String> {
        if flag {
            return Ok(true);
        }
        Ok(self.parsed::<bool>(key)?.unwrap_or(false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_config(content: &str) -> tempfile::NamedTempFile {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(content.as_bytes()).unwrap();
        file
    }

    #[test]
    fn parses_and_merges() {
        let file = write_config("# comment\nsigma = 0.5\nn = 4\nbias-rows = true\n");
        let cfg = ConfigMap::load(file.path()).unwrap();
        assert_eq!(cfg.f64("sigma", None).unwrap(), Some(0.5));
        // Flags override the file.
        assert_eq!(cfg.f64("sigma", Some(2.0)).unwrap(), Some(2.0));
        assert_eq!(cfg.u64("n", None).unwrap(), Some(4));
        assert!(cfg.bool("bias-rows", false).unwrap());
        assert_eq!(cfg.f64("eta", None).unwrap(), None);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        let file = write_config("sigmaa = 0.5\n");
        assert!(ConfigMap::load(file.path()).is_err());
        let file = write_config("just words\n");
        assert!(ConfigMap::load(file.path()).is_err());
    }

    #[test]
    fn rejects_unparseable_values() {
        let file = write_config("sigma = abc\n");
        let cfg = ConfigMap::load(file.path()).unwrap();
        assert!(cfg.f64("sigma", None).is_err());
    }
}

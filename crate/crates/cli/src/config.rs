//! Flat key-value configuration files with dotted section prefixes:
//!
//!   model.n = 2
//!   solver.dr = 0.02
//!
//! Flag values override file values; resolved settings are echoed into
//! every output for reproducibility. No environment variables.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone, Default)]
pub struct FileConfig {
    map: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut map = BTreeMap::new();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config file {}", path.display()))?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((key, value)) = line.split_once('=') else {
                    bail!("{}:{}: expected key = value", path.display(), lineno + 1);
                };
                map.insert(key.trim().to_string(), value.trim().to_string());
            }
        }
        Ok(FileConfig { map })
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.map
            .get(key)
            .map(|v| {
                v.parse::<f64>()
                    .with_context(|| format!("config key {key}: bad number {v:?}"))
            })
            .transpose()
    }

    pub fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        self.map
            .get(key)
            .map(|v| {
                v.parse::<u64>()
                    .with_context(|| format!("config key {key}: bad integer {v:?}"))
            })
            .transpose()
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|s| s.as_str())
    }
}

/// flag > file > default for one scalar setting.
pub fn resolve<T: Copy>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn parses_sections_and_overrides() {
        let dir = std::env::temp_dir();
        let path = dir.join("strausslab_cfg_test.conf");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "# comment\nmodel.n = 3\nsolver.dr = 0.04\n").unwrap();
        let cfg = FileConfig::load(Some(&path)).unwrap();
        assert_eq!(cfg.get_u64("model.n").unwrap(), Some(3));
        assert_eq!(cfg.get_f64("solver.dr").unwrap(), Some(0.04));
        assert_eq!(cfg.get_f64("solver.cfl").unwrap(), None);
        assert_eq!(resolve(Some(0.01), Some(0.04), 0.02), 0.01);
        assert_eq!(resolve(None, Some(0.04), 0.02), 0.04);
        assert_eq!(resolve::<f64>(None, None, 0.02), 0.02);
        std::fs::remove_file(&path).ok();
    }
}

//! Flat key=value configuration files and the flag/env/file precedence.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::{usage, AppResult};

/// Environment variable overriding the output directory (and nothing else).
pub const OUT_DIR_ENV: &str = "KINEX_OUT_DIR";

/// Key=value entries from a config file or a manifest's config echo. Keys
/// mirror long flag names exactly; `#` starts a comment.
pub struct Overlay {
    entries: BTreeMap<String, String>,
}

impl Overlay {
    pub fn empty() -> Self {
        Overlay {
            entries: BTreeMap::new(),
        }
    }

    pub fn from_entries(entries: BTreeMap<String, String>) -> Self {
        Overlay { entries }
    }

    pub fn from_file(path: &Path) -> AppResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(usage(format!("config line {}: expected key=value", i + 1)));
            };
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Overlay { entries })
    }

    /// Reject keys outside the subcommand's vocabulary so typos fail loudly.
    pub fn check_keys(&self, allowed: &[&str]) -> AppResult<()> {
        for key in self.entries.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(usage(format!("unknown config key {key:?}")));
            }
        }
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Flag value if given, else the parsed file entry, else nothing.
    pub fn resolve_opt<T: FromStr>(&self, flag: Option<T>, key: &str) -> AppResult<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.entries.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|_| usage(format!("config key {key}: cannot parse {raw:?}"))),
        }
    }

    /// Flag value if given, else the parsed file entry, else the default.
    pub fn resolve<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> AppResult<T> {
        Ok(self.resolve_opt(flag, key)?.unwrap_or(default))
    }

    /// Presence flags cannot be negated, so a file entry of `true` sticks.
    pub fn resolve_switch(&self, flag: bool, key: &str) -> AppResult<bool> {
        if flag {
            return Ok(true);
        }
        self.resolve(None, key, false)
    }
}

/// Output directory precedence: the `--out` flag, then `KINEX_OUT_DIR`,
/// then the config entry, then the current directory.
pub fn resolve_out(flag: Option<PathBuf>, overlay: &Overlay) -> PathBuf {
    if let Some(path) = flag {
        return path;
    }
    if let Ok(raw) = std::env::var(OUT_DIR_ENV) {
        if !raw.is_empty() {
            return PathBuf::from(raw);
        }
    }
    if let Some(raw) = overlay.raw("out") {
        return PathBuf::from(raw);
    }
    PathBuf::from(".")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn files_parse_and_flags_win() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.conf");
        std::fs::write(&path, "# comment\nsteps = 100\nseed=7 # trailing\n\n").unwrap();
        let overlay = Overlay::from_file(&path).unwrap();
        assert_eq!(overlay.resolve(None::<u64>, "steps", 5).unwrap(), 100);
        assert_eq!(overlay.resolve(Some(9u64), "steps", 5).unwrap(), 9);
        assert_eq!(overlay.resolve(None::<u64>, "agents", 500).unwrap(), 500);
        assert!(overlay.check_keys(&["steps", "seed"]).is_ok());
        assert!(overlay.check_keys(&["steps"]).is_err());

        std::fs::write(&path, "no equals sign\n").unwrap();
        assert!(Overlay::from_file(&path).is_err());
    }

    #[test]
    fn bad_values_are_usage_errors() {
        let mut entries = BTreeMap::new();
        entries.insert("steps".to_string(), "ten".to_string());
        let overlay = Overlay::from_entries(entries);
        assert!(overlay.resolve(None::<u64>, "steps", 5).is_err());
    }
}

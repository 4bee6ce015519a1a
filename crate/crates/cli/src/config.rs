//! Run configuration: flat `key = value` files merged under command-line
//! flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use fracharm::fractal::Family;
use fracharm::quadrature::QuadratureConfig;
use fracharm::verify::checks::is_check;

use crate::UsageError;

/// Environment variable that overrides the cache directory.
pub const CACHE_ENV: &str = "FRACHARM_CACHE_DIR";

/// Every key a config file may set.
pub const KEYS: [&str; 11] = [
    "family",
    "level",
    "s",
    "seed",
    "out",
    "cache",
    "checks",
    "cells",
    "quad_nodes",
    "quad_tail_tol",
    "jobs",
];

/// Settings shared by all commands after merging file, flags and defaults.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub family: Family,
    pub level: u32,
    pub s_values: Vec<f64>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub cache_dir: PathBuf,
    pub checks: Vec<String>,
    /// y-grid cell count for `extend`.
    pub cells: usize,
    pub quadrature: QuadratureConfig,
    pub jobs: Option<usize>,
}

/// Values given on the command line; `None` falls back to the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub family: Option<String>,
    pub level: Option<String>,
    pub s: Option<String>,
    pub seed: Option<String>,
    pub out: Option<String>,
    pub cache: Option<String>,
    pub checks: Option<String>,
    pub cells: Option<String>,
    pub jobs: Option<String>,
}

/// Parses `key = value` lines; `#` starts a comment. Unknown keys and
/// duplicate keys are errors.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    let mut out = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| UsageError(format!("config line {}: expected `key = value`", k + 1)))?;
        let key = key.trim().to_string();
        if !KEYS.contains(&key.as_str()) {
            return Err(UsageError(format!(
                "config line {}: unknown key `{key}` (known: {})",
                k + 1,
                KEYS.join(", ")
            )));
        }
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(UsageError(format!(
                "config line {}: duplicate key `{key}`",
                k + 1
            )));
        }
    }
    Ok(out)
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, UsageError> {
    value
        .trim()
        .parse()
        .map_err(|_| UsageError(format!("invalid value `{value}` for {key}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, UsageError> {
    value
        .split([',', ' '])
        .filter(|v| !v.trim().is_empty())
        .map(|v| parse_value(key, v))
        .collect()
}

impl RunConfig {
    /// Merges flags over the optional config file over defaults.
    pub fn resolve(file: Option<&Path>, flags: &Overrides) -> Result<Self, UsageError> {
        let file_values = match file {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| UsageError(format!("cannot read config {}: {e}", p.display())))?;
                parse_config(&text)?
            }
            None => BTreeMap::new(),
        };
        let pick = |key: &str, flag: &Option<String>| {
            flag.clone().or_else(|| file_values.get(key).cloned())
        };

        let family: Family = match pick("family", &flags.family) {
            Some(v) => v
                .parse()
                .map_err(|e: fracharm::Error| UsageError(e.to_string()))?,
            None => Family::Gasket,
        };
        let level = match pick("level", &flags.level) {
            Some(v) => parse_value("level", &v)?,
            None => 3,
        };
        if level > family.max_level() {
            return Err(UsageError(format!(
                "level {level} exceeds the maximum {} for {family}",
                family.max_level()
            )));
        }
        let s_values: Vec<f64> = match pick("s", &flags.s) {
            Some(v) => parse_list("s", &v)?,
            None => vec![0.5],
        };
        if s_values.is_empty() || s_values.iter().any(|s| !(*s > 0.0 && *s <= 1.0)) {
            return Err(UsageError("s values must lie in (0, 1]".into()));
        }
        let checks: Vec<String> = match pick("checks", &flags.checks) {
            Some(v) => parse_list("checks", &v)?,
            None => Vec::new(),
        };
        for c in &checks {
            validate_check(c)?;
        }
        let cache_dir = flags
            .cache
            .clone()
            .or_else(|| std::env::var(CACHE_ENV).ok().filter(|v| !v.is_empty()))
            .or_else(|| file_values.get("cache").cloned());
        let out_dir = PathBuf::from(pick("out", &flags.out).unwrap_or_else(|| "out".into()));
        let defaults = QuadratureConfig::default();
        let quadrature = QuadratureConfig {
            nodes: match file_values.get("quad_nodes") {
                Some(v) => parse_value("quad_nodes", v)?,
                None => defaults.nodes,
            },
            tail_tol: match file_values.get("quad_tail_tol") {
                Some(v) => parse_value("quad_tail_tol", v)?,
                None => defaults.tail_tol,
            },
        };
        let jobs = match pick("jobs", &flags.jobs) {
            Some(v) => {
                let n: usize = parse_value("jobs", &v)?;
                if n == 0 {
                    return Err(UsageError("jobs must be at least 1".into()));
                }
                Some(n)
            }
            None => None,
        };
        Ok(Self {
            family,
            level,
            s_values,
            seed: match pick("seed", &flags.seed) {
                Some(v) => parse_value("seed", &v)?,
                None => 0,
            },
            cache_dir: cache_dir
                .map(PathBuf::from)
                .unwrap_or_else(|| out_dir.join("cache")),
            out_dir,
            checks,
            cells: match pick("cells", &flags.cells) {
                Some(v) => parse_value("cells", &v)?,
                None => fracharm::extension::DEFAULT_CELLS,
            },
            quadrature,
            jobs,
        })
    }

    /// s values restricted to the open interval (0, 1).
    pub fn fractional_s(&self) -> Result<Vec<f64>, UsageError> {
        if self.s_values.iter().any(|&s| s >= 1.0) {
            return Err(UsageError(
                "this command needs s in the open interval (0, 1)".into(),
            ));
        }
        Ok(self.s_values.clone())
    }
}

pub fn validate_check(name: &str) -> Result<(), UsageError> {
    if is_check(name) {
        Ok(())
    } else {
        Err(UsageError(format!(
            "unknown check `{name}` (known: {})",
            fracharm::verify::checks::CHECK_NAMES.join(", ")
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_rejects_unknown_keys() {
        let map = parse_config("# run\nfamily = interval  # trailing\n\nlevel=4\n").unwrap();
        assert_eq!(map["family"], "interval");
        assert_eq!(map["level"], "4");
        assert!(parse_config("colour = red").is_err());
        assert!(parse_config("level").is_err());
        assert!(parse_config("level = 1\nlevel = 2").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(
            &path,
            "family = interval\nlevel = 4\ns = 0.3, 0.7\nseed = 9\n",
        )
        .unwrap();
        let flags = Overrides {
            level: Some("5".into()),
            cache: Some("/tmp/c".into()),
            ..Overrides::default()
        };
        let cfg = RunConfig::resolve(Some(&path), &flags).unwrap();
        assert_eq!(cfg.family, Family::Interval);
        assert_eq!(cfg.level, 5);
        assert_eq!(cfg.s_values, vec![0.3, 0.7]);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.cache_dir, PathBuf::from("/tmp/c"));
    }

    #[test]
    fn rejects_bad_values() {
        let bad = |o: Overrides| RunConfig::resolve(None, &o).is_err();
        assert!(bad(Overrides {
            s: Some("1.5".into()),
            ..Overrides::default()
        }));
        assert!(bad(Overrides {
            family: Some("carpet".into()),
            ..Overrides::default()
        }));
        assert!(bad(Overrides {
            level: Some("99".into()),
            ..Overrides::default()
        }));
        assert!(bad(Overrides {
            checks: Some("spectrum,nonsense".into()),
            ..Overrides::default()
        }));
    }
}

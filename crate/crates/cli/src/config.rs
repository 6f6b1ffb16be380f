use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use kicked_core::numeric::linspace;
use kicked_core::sequential::{Mode, Window};
use serde::{Deserialize, Serialize};

use crate::error::{config_err, CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<Format> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => config_err(format!("format must be csv or json, got {s:?}")),
        }
    }
}

/// `a:b:n`, `n` equally spaced values from `a` to `b` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauGrid {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl TauGrid {
    pub fn values(&self) -> Vec<f64> {
        linspace(self.a, self.b, self.n)
    }
}

impl FromStr for TauGrid {
    type Err = CliError;
    fn from_str(s: &str) -> CliResult<TauGrid> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return config_err(format!("tau grid must look like a:b:n, got {s:?}"));
        };
        let grid = TauGrid {
            a: parse_f64("tau-grid", a)?,
            b: parse_f64("tau-grid", b)?,
            n: parse_num("tau-grid", n)?,
        };
        if grid.n == 0 || !(grid.a <= grid.b) {
            return config_err(format!("tau grid needs a ≤ b and n ≥ 1, got {s:?}"));
        }
        Ok(grid)
    }
}

pub fn parse_f64(key: &str, s: &str) -> CliResult<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: {s:?} is not a number")))?;
    if !v.is_finite() {
        return config_err(format!("{key}: {s:?} is not finite"));
    }
    Ok(v)
}

pub fn parse_num<T: FromStr>(key: &str, s: &str) -> CliResult<T> {
    s.trim()
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: {s:?} is not a valid integer")))
}

pub fn parse_bool(key: &str, s: &str) -> CliResult<bool> {
    match s.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => config_err(format!("{key}: {s:?} is not a boolean")),
    }
}

pub fn parse_window(s: &str) -> CliResult<(u64, u64)> {
    let Some((a, b)) = s.split_once(':') else {
        return config_err(format!("window must look like nmin:nmax, got {s:?}"));
    };
    let w = (parse_num("window", a)?, parse_num("window", b)?);
    if w.0 == 0 || w.0 > w.1 {
        return config_err(format!("window needs 1 ≤ nmin ≤ nmax, got {s:?}"));
    }
    Ok(w)
}

pub fn parse_mode(s: &str) -> CliResult<Mode> {
    match s {
        "canonical" => Ok(Mode::Canonical),
        "fast" => Ok(Mode::Fast),
        _ => config_err(format!("mode must be canonical or fast, got {s:?}")),
    }
}

/// A fully resolved run. Serializes into the manifest and back for replays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub tau: Option<f64>,
    pub tau_grid: Option<TauGrid>,
    pub steps: Option<u64>,
    pub window: Option<(u64, u64)>,
    pub seed: Option<u64>,
    pub format: Format,
    pub strict: bool,
    pub mode: Mode,
    /// Subcommand-specific keys, validated against the subcommand's key list.
    pub params: BTreeMap<String, String>,
}

/// Keys every subcommand accepts.
pub const COMMON_KEYS: &[&str] = &["tau", "tau-grid", "steps", "window", "seed", "format", "strict", "mode"];

impl RunConfig {
    pub fn new(subcommand: impl Into<String>) -> RunConfig {
        RunConfig {
            subcommand: subcommand.into(),
            tau: None,
            tau_grid: None,
            steps: None,
            window: None,
            seed: None,
            format: Format::Csv,
            strict: false,
            mode: Mode::Canonical,
            params: BTreeMap::new(),
        }
    }

    /// Applies one `key=value` pair; `allowed` lists the subcommand's own keys.
    pub fn set(&mut self, key: &str, value: &str, allowed: &[&str]) -> CliResult<()> {
        match key {
            "tau" => self.tau = Some(parse_f64(key, value)?),
            "tau-grid" => self.tau_grid = Some(value.parse()?),
            "steps" => self.steps = Some(parse_num(key, value)?),
            "window" => self.window = Some(parse_window(value)?),
            "seed" => self.seed = Some(parse_num(key, value)?),
            "format" => self.format = value.parse()?,
            "strict" => self.strict = parse_bool(key, value)?,
            "mode" => self.mode = parse_mode(value)?,
            _ if allowed.contains(&key) => {
                self.params.insert(key.to_string(), value.to_string());
            }
            _ => {
                return config_err(format!("unknown key {key:?} for {}", self.subcommand));
            }
        }
        Ok(())
    }

    /// Reads a flat `key=value` file; `#` starts a comment.
    pub fn apply_file(&mut self, path: &Path, allowed: &[&str]) -> CliResult<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return config_err(format!("{}:{}: expected key=value", path.display(), i + 1));
            };
            self.set(k.trim(), v.trim(), allowed)?;
        }
        Ok(())
    }

    pub fn seed_or(&self, default: u64) -> u64 {
        self.seed.unwrap_or(default)
    }

    pub fn steps_or(&self, default: u64) -> u64 {
        self.steps.unwrap_or(default)
    }

    /// The τ values of the run: the grid if given, else `--tau`, else `default`.
    pub fn taus_or(&self, default: &[f64]) -> Vec<f64> {
        if let Some(g) = self.tau_grid {
            g.values()
        } else if let Some(t) = self.tau {
            vec![t]
        } else {
            default.to_vec()
        }
    }

    pub fn window_or(&self, default: (u64, u64)) -> CliResult<Window> {
        let (a, b) = self.window.unwrap_or(default);
        Ok(Window::new(a, b)?)
    }

    pub fn param(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    pub fn f64_param(&self, key: &str, default: f64) -> CliResult<f64> {
        self.param(key).map_or(Ok(default), |s| parse_f64(key, s))
    }

    pub fn num_param<T: FromStr>(&self, key: &str, default: T) -> CliResult<T> {
        self.param(key).map_or(Ok(default), |s| parse_num(key, s))
    }

    pub fn bool_param(&self, key: &str, default: bool) -> CliResult<bool> {
        self.param(key).map_or(Ok(default), |s| parse_bool(key, s))
    }

    pub fn str_param<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.param(key).unwrap_or(default)
    }

    /// Comma-separated reals.
    pub fn f64_list(&self, key: &str, default: &[f64]) -> CliResult<Vec<f64>> {
        match self.param(key) {
            None => Ok(default.to_vec()),
            Some(s) => s.split(',').map(|x| parse_f64(key, x)).collect(),
        }
    }

    /// Comma-separated integers.
    pub fn num_list<T: FromStr + Clone>(&self, key: &str, default: &[T]) -> CliResult<Vec<T>> {
        match self.param(key) {
            None => Ok(default.to_vec()),
            Some(s) => s.split(',').map(|x| parse_num(key, x)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_and_window_parsing() {
        let g: TauGrid = "1:2:3".parse().unwrap();
        assert_eq!(g.values(), vec![1.0, 1.5, 2.0]);
        assert!("1:2".parse::<TauGrid>().is_err());
        assert!("2:1:3".parse::<TauGrid>().is_err());
        assert_eq!(parse_window("10:20").unwrap(), (10, 20));
        assert!(parse_window("0:20").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut c = RunConfig::new("demo");
        c.set("eps", "0.1", &["eps"]).unwrap();
        c.set("tau", "1.5", &[]).unwrap();
        assert_eq!(c.param("eps"), Some("0.1"));
        assert_eq!(c.tau, Some(1.5));
        let err = c.set("bogus", "1", &["eps"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn config_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.conf");
        std::fs::write(&p, "# demo\ntau = 0.5\nseed=7  # trailing\n\neps=0.2\n").unwrap();
        let mut c = RunConfig::new("demo");
        c.apply_file(&p, &["eps"]).unwrap();
        assert_eq!((c.tau, c.seed, c.param("eps")), (Some(0.5), Some(7), Some("0.2")));
        std::fs::write(&p, "what\n").unwrap();
        assert!(c.apply_file(&p, &["eps"]).is_err());
    }
}

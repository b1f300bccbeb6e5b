//! Plain-text `key = value` run configuration.
//!
//! Keys: `zeros`, `max_zeros`, `grid.pairs` (`N:H, ...`), `grid.ns`,
//! `grid.families` (`pow:NUM/DEN`, `frac:DIV`), `checks`, `output_dir`,
//! `formats` (`csv`, `json`), `threads`, and `tolerance.<name>` for every
//! name in [`Tolerances::entries`]. `#` starts a comment. Unknown and
//! repeated keys are errors.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::verifier::{CampaignCheck, Family, GridSpec, Tolerances};

/// Environment variable naming the default zero table.
pub const ZEROS_ENV: &str = "GOLDBACH_ZEROS";
pub const DEFAULT_MAX_ZEROS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown output format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub zeros_path: Option<PathBuf>,
    pub max_zeros: usize,
    pub grid: GridSpec,
    pub checks: Vec<CampaignCheck>,
    pub tolerances: Tolerances,
    pub output_dir: Option<PathBuf>,
    pub formats: Vec<OutputFormat>,
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            zeros_path: None,
            max_zeros: DEFAULT_MAX_ZEROS,
            grid: GridSpec::default(),
            checks: vec![
                CampaignCheck::Main,
                CampaignCheck::Ablation,
                CampaignCheck::Average,
            ],
            tolerances: Tolerances::default(),
            output_dir: None,
            formats: Vec::new(),
            threads: 1,
        }
    }
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

/// Integer that may be written as `10000`, `1e4` or `10_000`.
pub fn parse_count(s: &str) -> Result<u64> {
    let t = s.trim().replace('_', "");
    if let Ok(v) = t.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = t
        .parse()
        .map_err(|_| Error::Config(format!("expected an integer, got {s:?}")))?;
    if f >= 0.0 && f.fract() == 0.0 && f < 2f64.powi(63) {
        Ok(f as u64)
    } else {
        Err(Error::Config(format!(
            "expected a non-negative integer, got {s:?}"
        )))
    }
}

fn parse_pair(s: &str) -> Result<(u64, u64)> {
    let (n, h) = s
        .split_once(':')
        .ok_or_else(|| Error::Config(format!("expected N:H, got {s:?}")))?;
    Ok((parse_count(n)?, parse_count(h)?))
}

impl RunConfig {
    /// Sets one key. Relative paths resolve against `base`.
    pub fn apply(&mut self, key: &str, value: &str, base: &Path) -> Result<()> {
        let value = value.trim();
        match key {
            "zeros" => self.zeros_path = Some(base.join(value)),
            "max_zeros" => self.max_zeros = parse_count(value)? as usize,
            "grid.pairs" => self.grid.pairs = list(value).map(parse_pair).collect::<Result<_>>()?,
            "grid.ns" => self.grid.ns = list(value).map(parse_count).collect::<Result<_>>()?,
            "grid.families" => {
                self.grid.families = list(value).map(Family::from_str).collect::<Result<_>>()?
            }
            "checks" => {
                self.checks = list(value)
                    .map(CampaignCheck::from_str)
                    .collect::<Result<_>>()?
            }
            "output_dir" => self.output_dir = Some(base.join(value)),
            "formats" => {
                self.formats = list(value)
                    .map(OutputFormat::from_str)
                    .collect::<Result<_>>()?
            }
            "threads" => self.threads = parse_count(value)? as usize,
            _ => {
                let name = key
                    .strip_prefix("tolerance.")
                    .ok_or_else(|| Error::Config(format!("unknown key {key:?}")))?;
                let v: f64 = value.parse().map_err(|_| {
                    Error::Config(format!("{key}: expected a number, got {value:?}"))
                })?;
                self.tolerances.set(name, v)?;
            }
        }
        Ok(())
    }

    /// Applies every line of a config text on top of `self`.
    pub fn merge_text(&mut self, text: &str, base: &Path) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            let k = k.trim();
            if !seen.insert(k.to_string()) {
                return Err(Error::Config(format!("line {}: repeated key {k:?}", i + 1)));
            }
            self.apply(k, v, base)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.merge_text(text, base)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        RunConfig::from_text(&text, base)
    }

    pub fn validate(&self) -> Result<()> {
        self.tolerances.validate()?;
        if self.threads == 0 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        if self.max_zeros == 0 {
            return Err(Error::Config("max_zeros must be at least 1".into()));
        }
        Ok(())
    }

    /// Explicit path, else the environment variable.
    pub fn resolve_zeros_path(&self) -> Option<PathBuf> {
        self.zeros_path
            .clone()
            .or_else(|| std::env::var_os(ZEROS_ENV).map(PathBuf::from))
    }
}

//! Check records, report collections, and their CSV / JSON / plot-data forms.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exp_sums::TBoundScan;
use crate::verifier::{FamilySlope, Tolerances};

/// Version of the JSON document and of the CSV column layout.
pub const SCHEMA_VERSION: u32 = 1;

/// CSV columns, in order.
pub const CSV_COLUMNS: [&str; 21] = [
    "check",
    "family",
    "n",
    "h",
    "y",
    "param",
    "zero_height",
    "zeros_used",
    "lhs",
    "main_term",
    "zero_term",
    "observed_error",
    "bound",
    "ratio",
    "constant",
    "trend_slope",
    "slope_limit",
    "pass",
    "ablation",
    "error",
    "notes",
];

/// One check: both sides of an identity or bound, the observed error, and
/// the verdict against a configured constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check: String,
    pub family: Option<String>,
    pub n: Option<u64>,
    pub h: Option<u64>,
    pub y: Option<i64>,
    /// Auxiliary scalar input (M, T, ξ, ...), named in `notes`.
    pub param: Option<f64>,
    pub zero_height: Option<f64>,
    pub zeros_used: Option<usize>,
    pub lhs: f64,
    pub main_term: f64,
    pub zero_term: f64,
    pub observed_error: f64,
    pub bound: f64,
    pub ratio: f64,
    pub constant: f64,
    pub trend_slope: Option<f64>,
    pub slope_limit: Option<f64>,
    pub pass: bool,
    pub ablation: bool,
    pub error: Option<String>,
    pub extras: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn new(check: impl Into<String>) -> Self {
        VerificationReport {
            check: check.into(),
            family: None,
            n: None,
            h: None,
            y: None,
            param: None,
            zero_height: None,
            zeros_used: None,
            lhs: 0.0,
            main_term: 0.0,
            zero_term: 0.0,
            observed_error: 0.0,
            bound: 0.0,
            ratio: 0.0,
            constant: 0.0,
            trend_slope: None,
            slope_limit: None,
            pass: false,
            ablation: false,
            error: None,
            extras: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    /// A row recording a failed computation.
    pub fn failed(check: impl Into<String>, message: impl Into<String>) -> Self {
        let mut r = Self::new(check);
        r.error = Some(message.into());
        r
    }

    /// Sets `observed_error = lhs − (main + zero)`, the ratio against `bound`
    /// and the ratio part of the verdict.
    pub fn judge_identity(&mut self, bound: f64, constant: f64) {
        self.observed_error = self.lhs - (self.main_term + self.zero_term);
        self.judge(bound, constant);
    }

    /// Ratio `|observed_error| / bound` against `constant`; a set trend slope
    /// must also be within its limit.
    pub fn judge(&mut self, bound: f64, constant: f64) {
        self.bound = bound;
        self.constant = constant;
        self.ratio = if bound > 0.0 {
            self.observed_error.abs() / bound
        } else {
            f64::INFINITY
        };
        self.pass = self.error.is_none() && self.ratio <= constant && self.trend_ok();
    }

    pub fn set_trend(&mut self, slope: Option<f64>, limit: f64) {
        self.trend_slope = slope;
        self.slope_limit = Some(limit);
        self.pass = self.error.is_none() && self.ratio <= self.constant && self.trend_ok();
    }

    pub fn trend_ok(&self) -> bool {
        match (self.trend_slope, self.slope_limit) {
            (Some(s), Some(l)) => s <= l,
            (None, Some(_)) => false,
            _ => true,
        }
    }

    pub fn with_spec(mut self, n: u64, h: u64, y: Option<i64>) -> Self {
        self.n = Some(n);
        self.h = Some(h);
        self.y = y;
        self
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn extra(&mut self, key: &str, value: f64) {
        self.extras.insert(key.to_string(), value);
    }

    /// Sort key `(check, N, H)`, then the remaining inputs for stability.
    pub fn sort_key(&self) -> (String, u64, u64, i64, u64) {
        (
            self.check.clone(),
            self.n.unwrap_or(0),
            self.h.unwrap_or(0),
            self.y.unwrap_or(i64::MIN),
            self.param.map_or(0, f64::to_bits),
        )
    }
}

/// `x` with 12 significant digits; fixed notation for moderate magnitudes.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{x:.11e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..15).contains(&exp) {
        format!("{x:.*}", (11 - exp).max(0) as usize)
    } else {
        sci
    }
}

/// A set of checks with the constants and thread count they ran under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub threads: usize,
    pub tolerances: Tolerances,
    pub family_slopes: Vec<FamilySlope>,
    pub rows: Vec<VerificationReport>,
}

impl Report {
    pub fn new(threads: usize, tolerances: Tolerances) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            threads,
            tolerances,
            family_slopes: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: VerificationReport) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, rows: impl IntoIterator<Item = VerificationReport>) {
        self.rows.extend(rows);
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// True when every non-ablation row passes.
    pub fn all_pass(&self) -> bool {
        self.rows.iter().filter(|r| !r.ablation).all(|r| r.pass)
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        let mut w = w;
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w).map_err(|e| Error::io("<json>", e))
    }

    /// `#` header lines (schema, threads, every tolerance), then one row per check.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# schema_version={}", self.schema_version)?;
        writeln!(w, "# threads={}", self.threads)?;
        for (k, v) in self.tolerances.entries() {
            writeln!(w, "# tolerance.{k}={}", fmt_sig(v))?;
        }
        for s in &self.family_slopes {
            writeln!(
                w,
                "# slope check={} family={} points={} error={} relative={} ratio={}",
                s.check,
                s.family,
                s.points,
                opt(s.error_slope),
                opt(s.relative_slope),
                opt(s.ratio_slope)
            )?;
        }
        writeln!(w, "{}", CSV_COLUMNS.join(","))?;
        for r in &self.rows {
            let fields = [
                csv_text(&r.check),
                csv_text(r.family.as_deref().unwrap_or("")),
                r.n.map_or(String::new(), |v| v.to_string()),
                r.h.map_or(String::new(), |v| v.to_string()),
                r.y.map_or(String::new(), |v| v.to_string()),
                opt(r.param),
                opt(r.zero_height),
                r.zeros_used.map_or(String::new(), |v| v.to_string()),
                fmt_sig(r.lhs),
                fmt_sig(r.main_term),
                fmt_sig(r.zero_term),
                fmt_sig(r.observed_error),
                fmt_sig(r.bound),
                fmt_sig(r.ratio),
                fmt_sig(r.constant),
                opt(r.trend_slope),
                opt(r.slope_limit),
                r.pass.to_string(),
                r.ablation.to_string(),
                csv_text(r.error.as_deref().unwrap_or("")),
                csv_text(&r.notes.join("; ")),
            ];
            writeln!(w, "{}", fields.join(","))?;
        }
        Ok(())
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or(String::new(), fmt_sig)
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn file_stem(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes one gnuplot table per (check, family): an `N observed_error` block
/// and an `N ratio` block separated by two blank lines. Rows that errored are
/// skipped. Returns the files written, in name order.
pub fn emit_plotdata(rows: &[VerificationReport], dir: &Path) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(Error::Precondition("no reports to plot".into()));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut groups: BTreeMap<(String, String), Vec<&VerificationReport>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.error.is_none()) {
        let family = r.family.clone().unwrap_or_else(|| "single".into());
        groups.entry((r.check.clone(), family)).or_default().push(r);
    }
    let mut out = Vec::new();
    for ((check, family), mut group) in groups {
        group.sort_by_key(|r| r.sort_key());
        let mut text = format!("# check {check} family {family}\n# N observed_error\n");
        for r in &group {
            text += &format!("{} {}\n", r.n.unwrap_or(0), fmt_sig(r.observed_error));
        }
        text += "\n\n# N ratio\n";
        for r in &group {
            text += &format!("{} {}\n", r.n.unwrap_or(0), fmt_sig(r.ratio));
        }
        let path = dir.join(format!("{}__{}.dat", file_stem(&check), file_stem(&family)));
        write_file(&path, &text)?;
        out.push(path);
    }
    Ok(out)
}

/// |T_H(α)| against both bounds: columns `alpha abs_t first_bound second_bound`.
pub fn emit_t_scan(scan: &TBoundScan, dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let s = scan.spec;
    let mut text = format!(
        "# T_H scan N={} H={} y={}\n# alpha abs_t first_bound second_bound\n",
        s.n, s.h, s.y
    );
    for p in &scan.samples {
        text += &format!(
            "{} {} {} {}\n",
            fmt_sig(p.alpha),
            fmt_sig(p.abs_t),
            fmt_sig(p.first_bound),
            fmt_sig(p.second_bound)
        );
    }
    let path = dir.join(format!("t-scan__H{}_y{}.dat", s.h, s.y));
    write_file(&path, &text)?;
    Ok(path)
}

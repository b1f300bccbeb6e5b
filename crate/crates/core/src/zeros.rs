//! Ordinates of the nontrivial zeros of ζ: table ingestion, a low-height
//! Euler–Maclaurin zero finder, and zero-counting checks.
//!
//! Zeros are stored as ordinates γ > 0 only; ρ = 1/2 + iγ and the conjugate
//! 1/2 − iγ is implied.

use std::f64::consts::{PI, TAU};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report::VerificationReport;

/// Highest t accepted by [`find_zeros_low`].
pub const EM_MAX_HEIGHT: f64 = 500.0;
/// Grid step of the sign-change scan.
pub const SCAN_STEP: f64 = 0.05;
/// Final bracket width of the bisection.
pub const BISECT_TOL: f64 = 1e-10;
const BISECT_MAX_ITER: usize = 200;
const SCAN_START: f64 = 10.0;

const BUNDLED: &str = include_str!("../data/zeros_100.txt");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ZeroSource {
    FileTable {
        path: PathBuf,
        precision: Option<f64>,
    },
    Computed {
        method: String,
    },
    Synthetic,
}

/// Validated, strictly ascending positive ordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSet {
    gammas: Vec<f64>,
    source: ZeroSource,
    complete_to: f64,
}

impl ZeroSet {
    /// Checks ordering and positivity. `complete_to` defaults to the last
    /// ordinate.
    pub fn new(gammas: Vec<f64>, source: ZeroSource) -> Result<Self> {
        for (i, w) in gammas.windows(2).enumerate() {
            if w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater) {
                return Err(Error::InvalidZeroSet(format!(
                    "ordinate #{} = {} does not exceed {}",
                    i + 2,
                    w[1],
                    w[0]
                )));
            }
        }
        if let Some(&g) = gammas.first() {
            if !(g > 0.0 && g.is_finite()) || !gammas.last().unwrap().is_finite() {
                return Err(Error::InvalidZeroSet(format!(
                    "ordinate {g} is not positive"
                )));
            }
            if !matches!(source, ZeroSource::Synthetic) && g <= 14.0 {
                return Err(Error::InvalidZeroSet(format!(
                    "first ordinate {g} is below 14"
                )));
            }
        }
        let complete_to = gammas.last().copied().unwrap_or(0.0);
        Ok(ZeroSet {
            gammas,
            source,
            complete_to,
        })
    }

    pub fn empty() -> Self {
        ZeroSet {
            gammas: Vec::new(),
            source: ZeroSource::Synthetic,
            complete_to: 0.0,
        }
    }

    pub fn synthetic(gammas: Vec<f64>) -> Result<Self> {
        Self::new(gammas, ZeroSource::Synthetic)
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    pub fn source(&self) -> &ZeroSource {
        &self.source
    }

    /// Largest stored ordinate (0 when empty).
    pub fn height(&self) -> f64 {
        self.gammas.last().copied().unwrap_or(0.0)
    }

    /// Height up to which the set claims to hold every zero.
    pub fn complete_to(&self) -> f64 {
        self.complete_to
    }

    /// Number of stored ordinates ≤ t.
    pub fn count_below(&self, t: f64) -> usize {
        self.gammas.partition_point(|&g| g <= t)
    }

    /// The ordinates ≤ t.
    pub fn truncated(&self, t: f64) -> ZeroSet {
        let k = self.count_below(t);
        ZeroSet {
            gammas: self.gammas[..k].to_vec(),
            source: self.source.clone(),
            complete_to: t.min(self.complete_to),
        }
    }

    /// The first `n` ordinates.
    pub fn take(&self, n: usize) -> ZeroSet {
        let k = n.min(self.len());
        let complete_to = if k < self.len() {
            self.gammas[k - 1]
        } else {
            self.complete_to
        };
        ZeroSet {
            gammas: self.gammas[..k].to_vec(),
            source: self.source.clone(),
            complete_to: if k == 0 { 0.0 } else { complete_to },
        }
    }

    /// A copy without the ordinate at `index` (defect injection for tests).
    pub fn without(&self, index: usize) -> ZeroSet {
        let mut gammas = self.gammas.clone();
        gammas.remove(index);
        ZeroSet {
            gammas,
            source: self.source.clone(),
            complete_to: self.complete_to,
        }
    }
}

/// Parses the text table format: one ordinate per line, `#` comments, blank
/// lines ignored. A `# precision: <x>` comment declares the table precision.
pub fn parse_zeros(text: &str, origin: &Path, max_count: usize) -> Result<ZeroSet> {
    let mut gammas: Vec<f64> = Vec::new();
    let mut precision = None;
    for (i, raw) in text.lines().enumerate() {
        if gammas.len() >= max_count {
            break;
        }
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(p) = comment.trim().strip_prefix("precision:") {
                precision = p.trim().parse::<f64>().ok();
            }
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            path: origin.to_path_buf(),
            line: i + 1,
            msg,
        };
        let g: f64 = line
            .parse()
            .map_err(|e| parse_err(format!("cannot parse {line:?}: {e}")))?;
        if !(g > 0.0 && g.is_finite()) {
            return Err(parse_err(format!(
                "ordinate {line} is not a positive number"
            )));
        }
        if let Some(&prev) = gammas.last() {
            if g <= prev {
                return Err(Error::Ordering {
                    path: origin.to_path_buf(),
                    line: i + 1,
                    value: g,
                });
            }
        }
        gammas.push(g);
    }
    if gammas.is_empty() {
        return Err(Error::EmptyFile(origin.to_path_buf()));
    }
    ZeroSet::new(
        gammas,
        ZeroSource::FileTable {
            path: origin.to_path_buf(),
            precision,
        },
    )
}

/// Loads the first `max_count` ordinates of a table file.
pub fn load_zeros(path: &Path, max_count: usize) -> Result<ZeroSet> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_zeros(&text, path, max_count)
}

/// The first 100 ordinates shipped with the crate (9 decimals).
pub fn bundled_zeros() -> ZeroSet {
    parse_zeros(BUNDLED, Path::new("<bundled zeros_100.txt>"), usize::MAX)
        .expect("bundled table is valid")
}

/// Declared precision of a file table, if any.
pub fn declared_precision(zs: &ZeroSet) -> Option<f64> {
    match zs.source() {
        ZeroSource::FileTable { precision, .. } => *precision,
        _ => None,
    }
}

/// θ(t) from its asymptotic expansion through t^{-7}.
pub fn riemann_siegel_theta(t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    let t5 = t3 * t2;
    let t7 = t5 * t2;
    0.5 * t * (t / TAU).ln() - 0.5 * t - PI / 8.0
        + 1.0 / (48.0 * t)
        + 7.0 / (5760.0 * t3)
        + 31.0 / (80640.0 * t5)
        + 127.0 / (430_080.0 * t7)
}

/// B_{2k} / (2k)! for k = 1..=10.
const BERNOULLI_OVER_FACTORIAL: [f64; 10] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40_320.0,
    5.0 / 66.0 / 3_628_800.0,
    -691.0 / 2730.0 / 479_001_600.0,
    7.0 / 6.0 / 87_178_291_200.0,
    -3617.0 / 510.0 / 20_922_789_888_000.0,
    43867.0 / 798.0 / 6_402_373_705_728_000.0,
    -174_611.0 / 330.0 / 2_432_902_008_176_640_000.0,
];

/// ζ(1/2 + it) by Euler–Maclaurin summation, for 0 < t ≤ 500.
pub fn zeta_critical(t: f64) -> Complex64 {
    let s = Complex64::new(0.5, t);
    let n_terms = (t.ceil() as usize).max(20);
    let mut acc = Complex64::new(0.0, 0.0);
    for n in 1..n_terms {
        let ln = (n as f64).ln();
        let (sn, cs) = (-t * ln).sin_cos();
        acc += Complex64::new(cs, sn) / (n as f64).sqrt();
    }
    let nf = n_terms as f64;
    let n_pow_neg_s = (-s * nf.ln()).exp();
    acc += n_pow_neg_s * nf / (s - 1.0);
    acc += 0.5 * n_pow_neg_s;
    // rising factorial s(s+1)...(s+2k-2) times N^{-s-2k+1}
    let mut poch = s;
    let mut npow = n_pow_neg_s / nf;
    for (k, c) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        acc += poch * npow * *c;
        let j = 2.0 * k as f64;
        poch *= (s + j + 1.0) * (s + j + 2.0);
        npow /= nf * nf;
    }
    acc
}

/// Hardy's Z(t) = e^{iθ(t)} ζ(1/2 + it), real for real t.
pub fn hardy_z(t: f64) -> f64 {
    let (s, c) = riemann_siegel_theta(t).sin_cos();
    (Complex64::new(c, s) * zeta_critical(t)).re
}

fn bisect(mut a: f64, mut b: f64, mut za: f64) -> Result<f64> {
    for _ in 0..BISECT_MAX_ITER {
        if b - a <= BISECT_TOL {
            return Ok(0.5 * (a + b));
        }
        let m = 0.5 * (a + b);
        let zm = hardy_z(m);
        if zm == 0.0 {
            return Ok(m);
        }
        if (zm > 0.0) == (za > 0.0) {
            a = m;
            za = zm;
        } else {
            b = m;
        }
    }
    Err(Error::Convergence {
        t: a,
        msg: format!("bracket [{a}, {b}] still wider than {BISECT_TOL}"),
    })
}

/// Every ordinate in (0, T], as sign changes of Z on a 0.05 grid refined by
/// bisection. T must not exceed 500.
pub fn find_zeros_low(t_max: f64) -> Result<ZeroSet> {
    if !(t_max.is_finite() && t_max <= EM_MAX_HEIGHT) {
        return Err(Error::Domain(format!(
            "find_zeros_low supports T <= {EM_MAX_HEIGHT}, got {t_max}"
        )));
    }
    let steps = ((t_max - SCAN_START) / SCAN_STEP).ceil().max(0.0) as usize;
    let grid: Vec<(f64, f64)> = (0..=steps)
        .into_par_iter()
        .map(|k| {
            let t = SCAN_START + k as f64 * SCAN_STEP;
            (t, hardy_z(t))
        })
        .collect();
    let mut gammas = Vec::new();
    for w in grid.windows(2) {
        let ((a, za), (b, zb)) = (w[0], w[1]);
        if za == 0.0 {
            gammas.push(a);
        } else if (za > 0.0) != (zb > 0.0) && zb != 0.0 {
            gammas.push(bisect(a, b, za)?);
        }
    }
    gammas.retain(|&g| g <= t_max);
    gammas.dedup();
    let mut zs = ZeroSet::new(
        gammas,
        ZeroSource::Computed {
            method: format!("euler-maclaurin scan step {SCAN_STEP}, bisection {BISECT_TOL}"),
        },
    )?;
    zs.complete_to = t_max.max(0.0);
    Ok(zs)
}

/// (T/2π) ln(T/2π) − T/2π + 7/8.
pub fn zero_count_estimate(t: f64) -> f64 {
    let x = t / TAU;
    x * x.ln() - x + 0.875
}

/// Mean of N(t) − estimate(t) over [max(T − 20, 10), T] at step 0.05.
pub fn averaged_count_deviation(zs: &ZeroSet, t: f64) -> f64 {
    let lo = (t - 20.0).max(SCAN_START).min(t);
    let steps = ((t - lo) / SCAN_STEP).round() as usize;
    let mut acc = 0.0;
    for k in 0..=steps {
        let s = lo + k as f64 * SCAN_STEP;
        acc += zs.count_below(s) as f64 - zero_count_estimate(s);
    }
    acc / (steps + 1) as f64
}

/// Pointwise count check with slack c·ln T, plus a windowed-mean check of
/// N(t) − estimate(t) (threshold `mean_limit`) that exposes a missing or
/// spurious ordinate.
pub fn count_check(zs: &ZeroSet, t: f64, c: f64, mean_limit: f64) -> VerificationReport {
    let mut r = VerificationReport::new("zero-count");
    r.param = Some(t);
    r.zero_height = Some(zs.height());
    r.zeros_used = Some(zs.count_below(t));
    r.lhs = zs.count_below(t) as f64;
    r.main_term = zero_count_estimate(t);
    r.note("param = T");
    r.judge_identity(t.ln().max(f64::MIN_POSITIVE), c);
    let mean = averaged_count_deviation(zs, t);
    r.extra("window_mean_deviation", mean);
    r.extra("window_mean_limit", mean_limit);
    if mean.abs() > mean_limit {
        r.pass = false;
        r.note("windowed mean of N(t) - estimate exceeds its limit");
    }
    if t > zs.complete_to() {
        r.pass = false;
        r.note("T exceeds the height to which the set is complete");
    }
    r
}

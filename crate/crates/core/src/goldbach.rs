//! R(n) = Σ_{h+k=n} Λ(h)Λ(k) and the Cesàro-weighted window sums built on it.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::convolution::{self_convolve_split, DEFAULT_MAX_FFT_LEN};
use crate::error::{Error, Result};
use crate::lambda::{LambdaWindow, PsiSource};
use crate::report::fmt_sig;
use crate::sum::NeumaierSum;

/// Every nonzero R(n) is at least (ln 2)^2, so FFT output below this is noise.
const R_ZERO_SNAP: f64 = 0.24;

/// The pair (N, H) and an optional right end offset y (defaults to H).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub n: u64,
    pub h: u64,
    pub y: i64,
}

impl WindowSpec {
    pub fn new(n: u64, h: u64) -> Result<Self> {
        Self::with_y(n, h, h as i64)
    }

    pub fn with_y(n: u64, h: u64, y: i64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidWindow(format!("N = {n} must be at least 2")));
        }
        if h < 1 || h > n {
            return Err(Error::InvalidWindow(format!(
                "H = {h} must satisfy 1 <= H <= N = {n}"
            )));
        }
        let hi = h as i64;
        if y < -hi || y > hi {
            return Err(Error::InvalidWindow(format!("y = {y} outside [-{h}, {h}]")));
        }
        debug_assert!(n + h <= 2 * n);
        Ok(WindowSpec { n, h, y })
    }

    /// N − H.
    pub fn start(&self) -> u64 {
        self.n - self.h
    }

    /// N + H.
    pub fn end(&self) -> u64 {
        self.n + self.h
    }

    /// N + y.
    pub fn y_end(&self) -> u64 {
        (self.n as i64 + self.y) as u64
    }

    pub fn weight(&self) -> CesaroWeight {
        CesaroWeight { h: self.h }
    }
}

/// The triangular weight t_H(m) = H − |m| on |m| <= H.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CesaroWeight {
    pub h: u64,
}

impl CesaroWeight {
    #[inline]
    pub fn at(&self, m: i64) -> i64 {
        let h = self.h as i64;
        if m.abs() > h {
            0
        } else {
            h - m.abs()
        }
    }

    /// t_H(n − N).
    #[inline]
    pub fn at_offset(&self, n: u64, center: u64) -> i64 {
        self.at(n as i64 - center as i64)
    }

    /// Σ_{|m|<=H} t_H(m), computed exactly.
    pub fn total(&self) -> i128 {
        let h = self.h as i64;
        (-h..=h).map(|m| self.at(m) as i128).sum()
    }

    /// Σ_{|n−N|<=H} t_H(n − N) n, computed exactly.
    pub fn moment(&self, center: u64) -> i128 {
        let h = self.h as i64;
        (-h..=h)
            .map(|m| self.at(m) as i128 * (center as i128 + m as i128))
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RMethod {
    Direct,
    Fft,
}

/// R(n) for n in [N − H, N + H].
#[derive(Debug, Clone, PartialEq)]
pub struct RWindow {
    spec: WindowSpec,
    values: Vec<f64>,
    method: RMethod,
}

impl RWindow {
    /// Wraps externally supplied values (e.g. synthetic fixtures).
    pub fn from_values(spec: WindowSpec, values: Vec<f64>, method: RMethod) -> Result<Self> {
        let want = (2 * spec.h + 1) as usize;
        if values.len() != want {
            return Err(Error::Mismatch(format!(
                "{} values for a window of {want}",
                values.len()
            )));
        }
        Ok(RWindow {
            spec,
            values,
            method,
        })
    }

    pub fn spec(&self) -> &WindowSpec {
        &self.spec
    }

    pub fn method(&self) -> RMethod {
        self.method
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// R(n); panics outside [N − H, N + H].
    pub fn r(&self, n: u64) -> f64 {
        self.values[(n - self.spec.start()) as usize]
    }

    pub fn get(&self, n: u64) -> Option<f64> {
        n.checked_sub(self.spec.start())
            .and_then(|i| self.values.get(i as usize))
            .copied()
    }

    /// CSV with header `n,R(n)`, ascending n.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,R(n)")?;
        for (i, v) in self.values.iter().enumerate() {
            writeln!(w, "{},{}", self.spec.start() + i as u64, fmt_sig(*v))?;
        }
        Ok(())
    }
}

/// Σ_{h=1}^{n−1} Λ(h)Λ(n−h), compensated, h ascending.
pub fn r_direct(n: u64, window: &LambdaWindow) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("R(n) needs n >= 2, got {n}")));
    }
    if n == 2 {
        return Ok(0.0);
    }
    window.require(1, n - 1)?;
    let mut acc = NeumaierSum::new();
    for h in 1..n {
        let a = window.value(h);
        if a != 0.0 {
            let b = window.value(n - h);
            if b != 0.0 {
                acc.add(a * b);
            }
        }
    }
    Ok(acc.value())
}

pub fn r_window_direct(spec: &WindowSpec, window: &LambdaWindow) -> Result<RWindow> {
    let values = (spec.start()..=spec.end())
        .map(|n| if n < 2 { Ok(0.0) } else { r_direct(n, window) })
        .collect::<Result<Vec<_>>>()?;
    RWindow::from_values(*spec, values, RMethod::Direct)
}

/// R(n) for every n in `[lo, hi]` from one self-convolution of Λ(0..=hi).
pub fn r_range_fft(
    lo: u64,
    hi: u64,
    window: &LambdaWindow,
    max_fft_len: usize,
) -> Result<Vec<f64>> {
    if lo > hi {
        return Err(Error::InvalidRange { lo, hi });
    }
    if hi < 2 {
        return Ok(vec![0.0; (hi - lo + 1) as usize]);
    }
    let dense = window.dense_from_zero(hi - 1)?;
    let conv = self_convolve_split(&dense, hi as usize + 1, max_fft_len)?;
    Ok((lo..=hi)
        .map(|n| {
            let v = conv.get(n as usize).copied().unwrap_or(0.0);
            if v < R_ZERO_SNAP {
                0.0
            } else {
                v
            }
        })
        .collect())
}

pub fn r_window_fft(spec: &WindowSpec, window: &LambdaWindow) -> Result<RWindow> {
    r_window_fft_with(spec, window, DEFAULT_MAX_FFT_LEN)
}

pub fn r_window_fft_with(
    spec: &WindowSpec,
    window: &LambdaWindow,
    max_fft_len: usize,
) -> Result<RWindow> {
    let values = r_range_fft(spec.start(), spec.end(), window, max_fft_len)?;
    RWindow::from_values(*spec, values, RMethod::Fft)
}

fn check_matches(spec: &WindowSpec, rwin: &RWindow) -> Result<()> {
    if rwin.spec.n != spec.n || rwin.spec.h != spec.h {
        return Err(Error::Mismatch(format!(
            "R window is for (N, H) = ({}, {}), check asks for ({}, {})",
            rwin.spec.n, rwin.spec.h, spec.n, spec.h
        )));
    }
    Ok(())
}

/// (1/H) Σ_{n=N−H}^{N+H} t_H(n−N) R(n); integer weights, one final division.
pub fn cesaro_lhs_main(spec: &WindowSpec, rwin: &RWindow) -> Result<f64> {
    check_matches(spec, rwin)?;
    let w = spec.weight();
    let mut acc = NeumaierSum::new();
    for n in spec.start()..=spec.end() {
        acc.add(w.at_offset(n, spec.n) as f64 * rwin.r(n));
    }
    Ok(acc.value() / spec.h as f64)
}

/// e^{−n/N} (R(n) − (2ψ(n) − n)) t_H(n − N) / H for n in [N − H, N + H].
pub fn average_summand(spec: &WindowSpec, rwin: &RWindow, psi: &dyn PsiSource) -> Result<Vec<f64>> {
    check_matches(spec, rwin)?;
    let w = spec.weight();
    let nf = spec.n as f64;
    let hf = spec.h as f64;
    (spec.start()..=spec.end())
        .map(|n| {
            let diff = rwin.r(n) - (2.0 * psi.psi_at(n)? - n as f64);
            Ok((-(n as f64) / nf).exp() * w.at_offset(n, spec.n) as f64 * diff / hf)
        })
        .collect()
}

/// Σ_{n=N−H}^{N+y} e^{−n/N} (R(n) − (2ψ(n) − n)) (1 − |n − N|/H), ascending n.
pub fn cesaro_lhs_average(spec: &WindowSpec, rwin: &RWindow, psi: &dyn PsiSource) -> Result<f64> {
    check_matches(spec, rwin)?;
    let w = spec.weight();
    let nf = spec.n as f64;
    let mut acc = NeumaierSum::new();
    for n in spec.start()..=spec.y_end() {
        let t = w.at_offset(n, spec.n);
        if t == 0 {
            continue;
        }
        let diff = rwin.r(n) - (2.0 * psi.psi_at(n)? - n as f64);
        acc.add((-(n as f64) / nf).exp() * t as f64 * diff);
    }
    Ok(acc.value() / spec.h as f64)
}

/// Max over y in [−H, H) of |Σ_{n=N−H}^{N+y} summand(n)|, with the arg-max.
///
/// `summand[i]` is the value at n = N − H + i; at least 2H entries are
/// needed. Ties go to the smallest y.
pub fn max_over_y(spec: &WindowSpec, summand: &[f64]) -> Result<(f64, i64)> {
    let count = 2 * spec.h as usize;
    if summand.len() < count {
        return Err(Error::Mismatch(format!(
            "summand has {} entries, need {count}",
            summand.len()
        )));
    }
    let h = spec.h as i64;
    let mut acc = NeumaierSum::new();
    let mut best = (f64::NEG_INFINITY, -h);
    for (i, v) in summand[..count].iter().enumerate() {
        acc.add(*v);
        let a = acc.value().abs();
        if a > best.0 {
            best = (a, i as i64 - h);
        }
    }
    Ok(best)
}

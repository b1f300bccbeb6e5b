//! Truncated sums over nontrivial zeros, each paired with its conjugate.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cmath::{cexpm1, real_pow_split};
use crate::error::{Error, Result};
use crate::goldbach::WindowSpec;
use crate::lambda::PsiSource;
use crate::quad;
use crate::report::VerificationReport;
use crate::stats::loglog_slope;
use crate::sum::NeumaierSum;
use crate::zeros::ZeroSet;

/// Series is used below this value of |ρ+2|·H/N, direct powers above.
pub const SERIES_CROSSOVER: f64 = 0.5;
/// Band of |ρ+2|·H/N where both paths are evaluated and compared.
pub const CROSSOVER_BAND: (f64, f64) = (0.4, 0.6);
/// Relative disagreement in the band that triggers a warning.
pub const CROSSOVER_WARN: f64 = 1e-6;
const SERIES_STOP: f64 = 1e-18;
const SERIES_MAX_TERMS: usize = 2000;
/// Per-term relative tolerance of the integral form.
pub const INTEGRAL_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvaluationPath {
    Direct,
    SeriesExpansion,
    IntegralForm,
    /// Some terms by series, the rest by direct powers.
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SumOrder {
    #[default]
    Ascending,
    Descending,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroSumResult {
    pub value: f64,
    pub truncation_height: f64,
    pub terms_used: usize,
    /// Heuristic bound on the omitted tail; never added to `value`.
    pub tail_estimate: f64,
    pub evaluation_path: EvaluationPath,
    pub series_terms: usize,
    pub degenerate: bool,
    pub warnings: Vec<String>,
}

impl ZeroSumResult {
    fn empty(path: EvaluationPath, truncation_height: f64, tail_estimate: f64) -> Self {
        ZeroSumResult {
            value: 0.0,
            truncation_height,
            terms_used: 0,
            tail_estimate,
            evaluation_path: path,
            series_terms: 0,
            degenerate: true,
            warnings: Vec::new(),
        }
    }
}

/// Lower end of the density model (1/2π) ln(γ/2π), which is negative below 2π.
fn density_floor(t: f64) -> f64 {
    t.max(TAU)
}

/// ∫_T^∞ (1/2π) ln(γ/2π) γ^{−k} dγ for k > 1.
pub fn density_tail(t: f64, k: f64) -> f64 {
    let t = density_floor(t);
    let km1 = k - 1.0;
    t.powf(-km1) * ((t / TAU).ln() / km1 + 1.0 / (km1 * km1)) / TAU
}

/// ∫_a^b (1/2π) ln(γ/2π) γ^{−1} dγ.
fn density_band_inv(a: f64, b: f64) -> f64 {
    let (a, b) = (density_floor(a), density_floor(b));
    if b <= a {
        return 0.0;
    }
    let la = (a / TAU).ln();
    let lb = (b / TAU).ln();
    0.5 * (lb * lb - la * la) / TAU
}

#[inline]
fn rho(gamma: f64) -> Complex64 {
    Complex64::new(0.5, gamma)
}

fn ordered_sum(terms: &[f64], order: SumOrder) -> f64 {
    match order {
        SumOrder::Ascending => terms.iter().copied().collect::<NeumaierSum>().value(),
        SumOrder::Descending => terms.iter().rev().copied().collect::<NeumaierSum>().value(),
    }
}

/// Σ_γ 2 Re[M^{ρ+1} / (ρ(ρ+1))]. Errors on an empty set.
pub fn psi_zero_sum(m: f64, zs: &ZeroSet) -> Result<ZeroSumResult> {
    if zs.is_empty() {
        return Err(Error::EmptyZeroSet);
    }
    psi_zero_sum_allow_empty(m, zs)
}

/// [`psi_zero_sum`] that returns a degenerate zero value for an empty set.
pub fn psi_zero_sum_allow_empty(m: f64, zs: &ZeroSet) -> Result<ZeroSumResult> {
    if !(m > 1.0 && m.is_finite()) {
        return Err(Error::Domain(format!("M must exceed 1, got {m}")));
    }
    let t = zs.complete_to();
    let tail = 2.0 * m.powf(1.5) * density_tail(t, 2.0);
    if zs.is_empty() {
        return Ok(ZeroSumResult::empty(EvaluationPath::Direct, t, tail));
    }
    let terms: Vec<f64> = zs
        .gammas()
        .par_iter()
        .map(|&g| {
            let r = rho(g);
            2.0 * (real_pow_split(m, 1.5, g) / (r * (r + 1.0))).re
        })
        .collect();
    Ok(ZeroSumResult {
        value: ordered_sum(&terms, SumOrder::Ascending),
        truncation_height: t,
        terms_used: terms.len(),
        tail_estimate: tail,
        evaluation_path: EvaluationPath::Direct,
        series_terms: 0,
        degenerate: false,
        warnings: Vec::new(),
    })
}

/// Σ_γ 2 Re[N^{ρ+1} / (ρ(ρ+1)(ρ+2))], the zero term of the Cesàro-weighted
/// long-interval formula. An empty set gives a degenerate zero.
pub fn cesaro_zero_sum(n: f64, zs: &ZeroSet) -> Result<ZeroSumResult> {
    if !(n > 1.0 && n.is_finite()) {
        return Err(Error::Domain(format!("N must exceed 1, got {n}")));
    }
    let t = zs.complete_to();
    let tail = 2.0 * n.powf(1.5) * density_tail(t, 3.0);
    if zs.is_empty() {
        return Ok(ZeroSumResult::empty(EvaluationPath::Direct, t, tail));
    }
    let terms: Vec<f64> = zs
        .gammas()
        .par_iter()
        .map(|&g| {
            let r = rho(g);
            2.0 * (real_pow_split(n, 1.5, g) / (r * (r + 1.0) * (r + 2.0))).re
        })
        .collect();
    Ok(ZeroSumResult {
        value: ordered_sum(&terms, SumOrder::Ascending),
        truncation_height: t,
        terms_used: terms.len(),
        tail_estimate: tail,
        evaluation_path: EvaluationPath::Direct,
        series_terms: 0,
        degenerate: false,
        warnings: Vec::new(),
    })
}

/// ((1+h)^s − 2 + (1−h)^s) by the even binomial series 2 Σ_{k≥1} C(s,2k) h^{2k}.
/// Returns the value and the number of series terms used.
pub fn second_difference_series(s: Complex64, h: f64) -> (Complex64, usize) {
    let mut c = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut used = 0;
    for j in 1..=2 * SERIES_MAX_TERMS {
        c *= (s - (j as f64 - 1.0)) * (h / j as f64);
        if j % 2 == 0 {
            acc += c;
            used += 1;
            if c.norm() < SERIES_STOP * acc.norm() || c.norm() == 0.0 {
                break;
            }
        }
    }
    (2.0 * acc, used)
}

/// ((1+h)^s − 2 + (1−h)^s) by direct complex powers, with 0^s = 0.
pub fn second_difference_direct(s: Complex64, h: f64) -> Complex64 {
    let up = (s * h.ln_1p()).exp();
    let down = if h >= 1.0 {
        Complex64::new(0.0, 0.0)
    } else {
        (s * (-h).ln_1p()).exp()
    };
    up - 2.0 + down
}

struct SdTerm {
    value: f64,
    series: Option<usize>,
    warning: Option<String>,
}

fn sd_term(nf: f64, h: f64, g: f64) -> SdTerm {
    let r = rho(g);
    let s = r + 2.0;
    let x = s.norm() * h;
    let (ratio, series) = if x < SERIES_CROSSOVER {
        let (v, k) = second_difference_series(s, h);
        (v, Some(k))
    } else {
        (second_difference_direct(s, h), None)
    };
    let warning = if (CROSSOVER_BAND.0..=CROSSOVER_BAND.1).contains(&x) {
        let other = match series {
            Some(_) => second_difference_direct(s, h),
            None => second_difference_series(s, h).0,
        };
        let rel = (other - ratio).norm() / ratio.norm();
        (rel > CROSSOVER_WARN)
            .then(|| format!("series and direct paths differ by {rel:.3e} relative at gamma = {g}"))
    } else {
        None
    };
    let value = 2.0 * (real_pow_split(nf, 2.5, g) * ratio / (r * (r + 1.0) * s)).re;
    SdTerm {
        value,
        series,
        warning,
    }
}

/// Heuristic tail of the second-difference sum above `t`, from the per-pair
/// envelope 2 min(H²(N+H)^{1/2}/γ, 4(N+H)^{5/2}/γ³).
pub fn second_difference_tail(n: u64, h: u64, t: f64) -> f64 {
    let top = (n + h) as f64;
    let hf = h as f64;
    let a = hf * hf * top.sqrt();
    let b = 4.0 * top.powf(2.5);
    let crossover = 2.0 * top / hf;
    2.0 * (a * density_band_inv(t, crossover) + b * density_tail(t.max(crossover), 3.0))
}

/// S = Σ_γ 2 Re[((N+H)^{ρ+2} − 2N^{ρ+2} + (N−H)^{ρ+2}) / (ρ(ρ+1)(ρ+2))].
pub fn second_difference_term(n: u64, h: u64, zs: &ZeroSet) -> Result<ZeroSumResult> {
    second_difference_term_ordered(n, h, zs, SumOrder::Ascending)
}

pub fn second_difference_term_ordered(
    n: u64,
    h: u64,
    zs: &ZeroSet,
    order: SumOrder,
) -> Result<ZeroSumResult> {
    WindowSpec::new(n, h)?;
    let t = zs.complete_to();
    let tail = second_difference_tail(n, h, t);
    if zs.is_empty() {
        return Ok(ZeroSumResult::empty(EvaluationPath::Direct, t, tail));
    }
    let nf = n as f64;
    let hr = h as f64 / nf;
    let terms: Vec<SdTerm> = zs
        .gammas()
        .par_iter()
        .map(|&g| sd_term(nf, hr, g))
        .collect();
    let values: Vec<f64> = terms.iter().map(|x| x.value).collect();
    let n_series = terms.iter().filter(|x| x.series.is_some()).count();
    let path = match n_series {
        0 => EvaluationPath::Direct,
        k if k == terms.len() => EvaluationPath::SeriesExpansion,
        _ => EvaluationPath::Mixed,
    };
    let warnings: Vec<String> = terms.iter().filter_map(|x| x.warning.clone()).collect();
    Ok(ZeroSumResult {
        value: ordered_sum(&values, order),
        truncation_height: t,
        terms_used: values.len(),
        tail_estimate: tail,
        evaluation_path: path,
        series_terms: terms.iter().filter_map(|x| x.series).sum(),
        degenerate: false,
        warnings,
    })
}

/// g(u) = (1+u)^{ρ+1} − (1−u)^{ρ+1}, computed as
/// (1−u)^{ρ+1} (e^{(ρ+1) ln((1+u)/(1−u))} − 1) for small u.
fn integrand(r1: Complex64, u: f64) -> Complex64 {
    if u < 0.5 {
        let lo = (r1 * (-u).ln_1p()).exp();
        lo * cexpm1(r1 * (2.0 * u.atanh()))
    } else {
        let up = (r1 * u.ln_1p()).exp();
        let down = if u >= 1.0 {
            Complex64::new(0.0, 0.0)
        } else {
            (r1 * (-u).ln_1p()).exp()
        };
        up - down
    }
}

/// The same S as [`second_difference_term`], from
/// Δ²/(ρ(ρ+1)(ρ+2)) = N^{ρ+2}/(ρ(ρ+1)) ∫_0^{H/N} g(u) du
/// by adaptive quadrature per zero.
pub fn second_difference_term_integral(n: u64, h: u64, zs: &ZeroSet) -> Result<ZeroSumResult> {
    WindowSpec::new(n, h)?;
    let t = zs.complete_to();
    let tail = second_difference_tail(n, h, t);
    if zs.is_empty() {
        return Ok(ZeroSumResult::empty(EvaluationPath::IntegralForm, t, tail));
    }
    let nf = n as f64;
    let hr = h as f64 / nf;
    let terms: Vec<f64> = zs
        .gammas()
        .par_iter()
        .map(|&g| {
            let r = rho(g);
            let r1 = r + 1.0;
            let q = quad::integrate(|u| integrand(r1, u), 0.0, hr, INTEGRAL_REL_TOL, 0.0)?;
            Ok(2.0 * (real_pow_split(nf, 2.5, g) * q.value / (r * r1)).re)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ZeroSumResult {
        value: ordered_sum(&terms, SumOrder::Ascending),
        truncation_height: t,
        terms_used: terms.len(),
        tail_estimate: tail,
        evaluation_path: EvaluationPath::IntegralForm,
        series_terms: 0,
        degenerate: false,
        warnings: Vec::new(),
    })
}

pub(crate) fn zero_notes(r: &mut VerificationReport, zsum: &ZeroSumResult, scale: f64) {
    r.zero_height = Some(zsum.truncation_height);
    r.zeros_used = Some(zsum.terms_used);
    r.extra("zero_tail_estimate", zsum.tail_estimate * scale);
    r.note("zero sums truncated at the table height; tail estimate is heuristic and not added");
    if zsum.degenerate {
        r.note("empty zero set: zero term is 0");
    }
    for w in &zsum.warnings {
        r.note(w.clone());
    }
}

/// |Σ_{n≤M}(ψ(n)−n) + Σ_ρ M^{ρ+1}/(ρ(ρ+1))| / M.
pub fn psi_explicit_check(
    m: f64,
    zs: &ZeroSet,
    psi: &dyn PsiSource,
    constant: f64,
) -> Result<VerificationReport> {
    let zsum = psi_zero_sum_allow_empty(m, zs)?;
    let top = m.floor() as u64;
    let mut acc = NeumaierSum::new();
    for k in 1..=top {
        acc.add(psi.psi_at(k)? - k as f64);
    }
    let mut r = VerificationReport::new("psi-explicit");
    r.param = Some(m);
    r.note("param = M");
    r.lhs = acc.value();
    r.zero_term = -zsum.value;
    zero_notes(&mut r, &zsum, 1.0);
    r.ablation = zs.is_empty();
    r.judge_identity(m, constant);
    Ok(r)
}

/// D = Σ t_H(n−N)(ψ(n)−n) + S, reported as |D|/(HN).
pub fn pesato_identity_check(
    n: u64,
    h: u64,
    zs: &ZeroSet,
    psi: &dyn PsiSource,
    constant: f64,
) -> Result<VerificationReport> {
    let spec = WindowSpec::new(n, h)?;
    if h < 2 {
        return Err(Error::Precondition(format!(
            "the weighted ψ identity needs H >= 2, got {h}"
        )));
    }
    let w = spec.weight();
    let mut acc = NeumaierSum::new();
    for k in spec.start()..=spec.end() {
        let t = w.at_offset(k, n);
        if t != 0 {
            acc.add(t as f64 * (psi.psi_at(k)? - k as f64));
        }
    }
    let zsum = second_difference_term(n, h, zs)?;
    let mut r = VerificationReport::new("pesato").with_spec(n, h, None);
    r.lhs = acc.value();
    r.zero_term = -zsum.value;
    zero_notes(&mut r, &zsum, 1.0);
    r.ablation = zs.is_empty();
    r.judge_identity(h as f64 * n as f64, constant);
    Ok(r)
}

/// Trend rule for a family of pesato rows: the log-log slope of |D| against
/// N must not exceed `factor` times the slope of HN. Updates every row.
pub fn pesato_trend(rows: &mut [VerificationReport], factor: f64) -> Option<f64> {
    let (x, d, hn) = family_columns(rows, |r| r.observed_error);
    let slope = loglog_slope(&x, &d);
    let ref_slope = loglog_slope(&x, &hn);
    for r in rows.iter_mut() {
        if let Some(rs) = ref_slope {
            r.extra("reference_slope", rs);
            r.set_trend(slope, factor * rs);
        } else {
            r.set_trend(None, f64::NAN);
        }
    }
    slope
}

fn family_columns(
    rows: &[VerificationReport],
    value: impl Fn(&VerificationReport) -> f64,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let x = rows.iter().map(|r| r.n.unwrap_or(0) as f64).collect();
    let d = rows.iter().map(&value).collect();
    let hn = rows
        .iter()
        .map(|r| r.n.unwrap_or(0) as f64 * r.h.unwrap_or(0) as f64)
        .collect();
    (x, d, hn)
}

/// |S| / (H² N^{1/2} (ln N)² + HN).
pub fn order_of_magnitude_check(
    n: u64,
    h: u64,
    zs: &ZeroSet,
    constant: f64,
) -> Result<VerificationReport> {
    let zsum = second_difference_term(n, h, zs)?;
    let (nf, hf) = (n as f64, h as f64);
    let ln = nf.ln();
    let mut r = VerificationReport::new("zero-term-size").with_spec(n, h, None);
    r.zero_term = zsum.value;
    r.observed_error = zsum.value;
    zero_notes(&mut r, &zsum, 1.0);
    r.ablation = zs.is_empty();
    r.judge(hf * hf * nf.sqrt() * ln * ln + hf * nf, constant);
    r.note("unconditional estimate HN exp(-c (ln N)^(3/5) (ln ln N)^(-1/5)) + N not asserted: c unspecified, not separable at this scale");
    Ok(r)
}

/// Flat-trend rule: log-log slope of the ratio against N at most `limit`.
pub fn ratio_trend(rows: &mut [VerificationReport], limit: f64) -> Option<f64> {
    let x: Vec<f64> = rows.iter().map(|r| r.n.unwrap_or(0) as f64).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let slope = loglog_slope(&x, &y);
    for r in rows.iter_mut() {
        r.set_trend(slope, limit);
    }
    slope
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::{sieve_window, LinearPsi, PsiTable};
    use crate::zeros::bundled_zeros;

    fn naive_sd(n: f64, h: f64, g: f64) -> f64 {
        let s = rho(g) + 2.0;
        let p = |x: f64| {
            if x == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                (s * x.ln()).exp()
            }
        };
        let r = rho(g);
        2.0 * ((p(n + h) - 2.0 * p(n) + p(n - h)) / (r * (r + 1.0) * s)).re
    }

    #[test]
    fn empty_sets() {
        let e = ZeroSet::empty();
        assert!(psi_zero_sum(10.0, &e).is_err());
        let v = psi_zero_sum_allow_empty(10.0, &e).unwrap();
        assert_eq!(v.value, 0.0);
        assert!(v.degenerate);
        assert_eq!(second_difference_term(100, 10, &e).unwrap().value, 0.0);
        assert_eq!(
            second_difference_term_integral(100, 10, &e).unwrap().value,
            0.0
        );
        assert!(psi_zero_sum(1.0, &bundled_zeros()).is_err());
    }

    #[test]
    fn series_and_direct_agree_in_band() {
        for k in 0..200 {
            let g = 14.0 + k as f64 * 3.7;
            let s = rho(g) + 2.0;
            for x in [0.4, 0.45, 0.5, 0.55, 0.6] {
                let h = x / s.norm();
                let a = second_difference_series(s, h).0;
                let b = second_difference_direct(s, h);
                assert!((a - b).norm() <= 1e-9 * a.norm(), "g={g} x={x}");
            }
        }
    }

    #[test]
    fn matches_naive_when_cancellation_is_mild() {
        let zs = bundled_zeros();
        let got = second_difference_term(1000, 500, &zs).unwrap();
        let want: f64 = zs
            .gammas()
            .iter()
            .map(|&g| naive_sd(1000.0, 500.0, g))
            .sum();
        assert!((got.value - want).abs() < 1e-10 * want.abs());
        assert_eq!(got.evaluation_path, EvaluationPath::Direct);
        let small = second_difference_term(10_000, 100, &zs).unwrap();
        assert_eq!(small.evaluation_path, EvaluationPath::Mixed);
        assert!(small.series_terms > 0);
    }

    #[test]
    fn full_window_uses_zero_power_convention() {
        let zs = bundled_zeros().take(5);
        let got = second_difference_term(50, 50, &zs).unwrap();
        let want: f64 = zs.gammas().iter().map(|&g| naive_sd(50.0, 50.0, g)).sum();
        assert!((got.value - want).abs() < 1e-12 * want.abs());
    }

    #[test]
    fn integral_form_agrees() {
        let one = ZeroSet::synthetic(vec![14.134725]).unwrap();
        let a = second_difference_term(100, 10, &one).unwrap().value;
        let b = second_difference_term_integral(100, 10, &one)
            .unwrap()
            .value;
        assert!((a - b).abs() <= 1e-8 * a.abs(), "{a} {b}");
        let zs = bundled_zeros();
        for (n, h) in [(10_000, 100), (1000, 1000), (5000, 7)] {
            let a = second_difference_term(n, h, &zs).unwrap().value;
            let b = second_difference_term_integral(n, h, &zs).unwrap().value;
            assert!((a - b).abs() <= 1e-8 * a.abs(), "({n},{h}): {a} {b}");
        }
    }

    #[test]
    fn order_robustness() {
        let zs = bundled_zeros();
        let a = second_difference_term_ordered(10_000, 100, &zs, SumOrder::Ascending).unwrap();
        let b = second_difference_term_ordered(10_000, 100, &zs, SumOrder::Descending).unwrap();
        assert!((a.value - b.value).abs() <= 1e-9 * a.value.abs());
    }

    #[test]
    fn tail_helpers() {
        // ∫_T^∞ ln(γ/2π)/(2π γ²) dγ checked by a crude Riemann sum
        let t = 100.0;
        let mut acc = 0.0;
        let mut g = t;
        while g < 1e7 {
            let dg = g * 1e-4;
            acc += (g / TAU).ln() / (TAU * g * g) * dg;
            g += dg;
        }
        assert!((density_tail(t, 2.0) - acc).abs() < 1e-3 * acc);
        assert!(second_difference_tail(10_000, 100, 1e5) > 0.0);
    }

    #[test]
    fn pesato_degenerate_inputs() {
        let zs = bundled_zeros();
        let r = pesato_identity_check(1000, 10, &zs, &LinearPsi, 5.0).unwrap();
        let s = second_difference_term(1000, 10, &zs).unwrap().value;
        assert_eq!(r.lhs, 0.0);
        assert!((r.ratio - s.abs() / 10_000.0).abs() < 1e-15 * r.ratio.max(1.0));
        let w = sieve_window(1, 1002).unwrap();
        let psi = PsiTable::new(&w).unwrap();
        let r = pesato_identity_check(1000, 2, &zs, &psi, 5.0).unwrap();
        assert!(r.ratio.is_finite());
        assert!(pesato_identity_check(1000, 1, &zs, &psi, 5.0).is_err());
    }

    #[test]
    fn magnitude_check_edge_cases() {
        let r = order_of_magnitude_check(1000, 1, &bundled_zeros(), 5.0).unwrap();
        assert!(r.ratio.is_finite());
        let r = order_of_magnitude_check(1000, 10, &ZeroSet::empty(), 5.0).unwrap();
        assert_eq!(r.ratio, 0.0);
    }
}

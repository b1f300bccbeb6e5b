//! End-to-end checks of the short-interval explicit formula and its averaged
//! form, the long-interval formulas, and the campaign harness.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circle::{self, CircleConstants};
use crate::convolution::DEFAULT_MAX_FFT_LEN;
use crate::error::{Error, Result};
use crate::exp_sums::t_bound_scan;
use crate::goldbach::{
    average_summand, cesaro_lhs_main, max_over_y, r_range_fft, r_window_fft, RWindow, WindowSpec,
};
use crate::lambda::{sieve_window, LambdaWindow, PsiSource, PsiTable};
use crate::report::{Report, VerificationReport};
use crate::stats::loglog_slope;
use crate::sum::NeumaierSum;
use crate::zero_sums::{
    cesaro_zero_sum, order_of_magnitude_check, pesato_identity_check, pesato_trend,
    psi_explicit_check, psi_zero_sum_allow_empty, ratio_trend, second_difference_term, zero_notes,
};
use crate::zeros::{count_check, ZeroSet};

/// Pass/fail constants. Every field must be positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Ratio constant of the short-interval explicit formula.
    pub main: f64,
    /// Ratio constant of the max-over-y averaged statement.
    pub average_max: f64,
    /// Ratio constant of the y = H averaged statement.
    pub average_full: f64,
    /// Ratio constant of the long-interval sum.
    pub long_sum: f64,
    /// Ratio constant of the Cesàro long-interval sum.
    pub long_cesaro: f64,
    /// Largest log-log slope of the ratio against N along a family.
    pub slope: f64,
    /// Ratio constant of the ψ explicit-formula remainder.
    pub psi_explicit: f64,
    /// Largest log-log slope of that remainder against M.
    pub psi_slope: f64,
    /// Ratio constant of the weighted ψ identity.
    pub pesato: f64,
    /// Slope of |D| against N, as a multiple of the slope of HN.
    pub pesato_factor: f64,
    /// Ratio constant of the zero-term size bound.
    pub zero_term: f64,
    /// Slack of the zero count, in units of ln T.
    pub count_c: f64,
    /// Limit of the windowed mean count deviation.
    pub count_mean: f64,
    /// Constant of both exponential-sum bounds.
    pub t_bound: f64,
    /// Floor of the sharpness statistic.
    pub sharpness: f64,
    /// Relative tolerance of the chain cross-check.
    pub chain_rel: f64,
    pub circle: CircleConstants,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            main: 5.0,
            average_max: 5.0,
            average_full: 5.0,
            long_sum: 5.0,
            long_cesaro: 5.0,
            slope: 0.15,
            psi_explicit: 5.0,
            psi_slope: 1.15,
            pesato: 5.0,
            pesato_factor: 1.15,
            zero_term: 5.0,
            count_c: 2.0,
            count_mean: 0.5,
            t_bound: 2.0,
            sharpness: 0.1,
            chain_rel: 1e-9,
            circle: CircleConstants::default(),
        }
    }
}

impl Tolerances {
    /// Every constant by name, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        let c = &self.circle;
        vec![
            ("main", self.main),
            ("average_max", self.average_max),
            ("average_full", self.average_full),
            ("long_sum", self.long_sum),
            ("long_cesaro", self.long_cesaro),
            ("slope", self.slope),
            ("psi_explicit", self.psi_explicit),
            ("psi_slope", self.psi_slope),
            ("pesato", self.pesato),
            ("pesato_factor", self.pesato_factor),
            ("zero_term", self.zero_term),
            ("count_c", self.count_c),
            ("count_mean", self.count_mean),
            ("t_bound", self.t_bound),
            ("sharpness", self.sharpness),
            ("chain_rel", self.chain_rel),
            ("residue", c.residue),
            ("mean_square", c.mean_square),
            ("lp", c.lp),
            ("i1", c.i1),
            ("i2", c.i2),
            ("i3", c.i3),
            ("identity_rel", c.identity_rel),
        ]
    }

    /// Sets one constant by its [`entries`](Self::entries) name.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Config(format!(
                "tolerance {key} must be positive, got {value}"
            )));
        }
        let c = &mut self.circle;
        let slot = match key {
            "main" => &mut self.main,
            "average_max" => &mut self.average_max,
            "average_full" => &mut self.average_full,
            "long_sum" => &mut self.long_sum,
            "long_cesaro" => &mut self.long_cesaro,
            "slope" => &mut self.slope,
            "psi_explicit" => &mut self.psi_explicit,
            "psi_slope" => &mut self.psi_slope,
            "pesato" => &mut self.pesato,
            "pesato_factor" => &mut self.pesato_factor,
            "zero_term" => &mut self.zero_term,
            "count_c" => &mut self.count_c,
            "count_mean" => &mut self.count_mean,
            "t_bound" => &mut self.t_bound,
            "sharpness" => &mut self.sharpness,
            "chain_rel" => &mut self.chain_rel,
            "residue" => &mut c.residue,
            "mean_square" => &mut c.mean_square,
            "lp" => &mut c.lp,
            "i1" => &mut c.i1,
            "i2" => &mut c.i2,
            "i3" => &mut c.i3,
            "identity_rel" => &mut c.identity_rel,
            _ => return Err(Error::Config(format!("unknown tolerance {key}"))),
        };
        *slot = value;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        for (k, v) in self.entries() {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "tolerance {k} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Λ on [1, hi] and its ψ prefix table, shared by every check.
#[derive(Debug, Clone)]
pub struct Arithmetic {
    pub window: LambdaWindow,
    pub psi: PsiTable,
}

impl Arithmetic {
    pub fn sieve(hi: u64) -> Result<Self> {
        let window = sieve_window(1, hi.max(2))?;
        let psi = PsiTable::new(&window)?;
        Ok(Arithmetic { window, psi })
    }

    pub fn from_window(window: LambdaWindow) -> Result<Self> {
        let psi = PsiTable::new(&window)?;
        Ok(Arithmetic { window, psi })
    }

    pub fn hi(&self) -> u64 {
        self.window.hi()
    }
}

fn ln(x: f64) -> f64 {
    x.ln()
}

/// N (ln 2N/H)² + H (ln N)² ln 2H.
pub fn main_bound(n: u64, h: u64) -> f64 {
    let (nf, hf) = (n as f64, h as f64);
    nf * ln(2.0 * nf / hf).powi(2) + hf * ln(nf).powi(2) * ln(2.0 * hf)
}

/// N (ln N)² ln 2H.
pub fn average_max_bound(n: u64, h: u64) -> f64 {
    let nf = n as f64;
    nf * ln(nf).powi(2) * ln(2.0 * h as f64)
}

/// N (ln 2N/H)².
pub fn average_full_bound(n: u64, h: u64) -> f64 {
    let nf = n as f64;
    nf * ln(2.0 * nf / h as f64).powi(2)
}

/// Short-interval explicit formula: (1/H) Σ t_H(n−N) R(n) against
/// HN − (2/H) S. An empty zero set gives the ablation row.
pub fn verify_main(
    spec: &WindowSpec,
    arith: &Arithmetic,
    zs: &ZeroSet,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let rwin = r_window_fft(spec, &arith.window)?;
    verify_main_with(spec, &rwin, zs, tol)
}

/// [`verify_main`] on a precomputed R window.
pub fn verify_main_with(
    spec: &WindowSpec,
    rwin: &RWindow,
    zs: &ZeroSet,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let (n, h) = (spec.n, spec.h);
    let lhs = cesaro_lhs_main(spec, rwin)?;
    let zsum = second_difference_term(n, h, zs)?;
    let hf = h as f64;
    let mut r = VerificationReport::new(if zs.is_empty() {
        "main-ablation"
    } else {
        "main"
    })
    .with_spec(n, h, None);
    r.lhs = lhs;
    r.main_term = hf * n as f64;
    r.zero_term = -2.0 / hf * zsum.value;
    zero_notes(&mut r, &zsum, 2.0 / hf);
    r.ablation = zs.is_empty();
    r.judge_identity(main_bound(n, h), tol.main);
    r.extras.insert(
        "relative_error".into(),
        r.observed_error.abs() / r.main_term,
    );
    if h == n {
        r.note("H = N: the full-window regime of the Cesaro long-interval formula");
    }
    Ok(r)
}

/// Both averaged statements; no zeros involved. Returns the max-over-y row
/// and the y = H row.
pub fn verify_average(
    spec: &WindowSpec,
    arith: &Arithmetic,
    tol: &Tolerances,
) -> Result<[VerificationReport; 2]> {
    let rwin = r_window_fft(spec, &arith.window)?;
    verify_average_with(spec, &rwin, &arith.psi, tol)
}

/// [`verify_average`] on a precomputed R window and any ψ source.
pub fn verify_average_with(
    spec: &WindowSpec,
    rwin: &RWindow,
    psi: &dyn PsiSource,
    tol: &Tolerances,
) -> Result<[VerificationReport; 2]> {
    let (n, h) = (spec.n, spec.h);
    let summand = average_summand(spec, rwin, psi)?;
    let (best, arg) = max_over_y(spec, &summand)?;
    let full: f64 = summand.iter().copied().collect::<NeumaierSum>().value();

    let mut max_row = VerificationReport::new("average-max").with_spec(n, h, Some(arg));
    max_row.lhs = best;
    max_row.observed_error = best;
    max_row.note("y = arg max over [-H, H); ties go to the smallest y");
    max_row.judge(average_max_bound(n, h), tol.average_max);

    let mut full_row = VerificationReport::new("average-full").with_spec(n, h, Some(h as i64));
    full_row.lhs = full;
    full_row.observed_error = full;
    full_row.judge(average_full_bound(n, h), tol.average_full);
    if max_row.ratio > 0.0 {
        full_row.extra("ratio_over_max_ratio", full_row.ratio / max_row.ratio);
    }
    if h == n {
        full_row.note("H = N: the bound reduces to N (ln 2)^2");
    }
    Ok([max_row, full_row])
}

/// Σ_{n≤N} R(n) against N²/2 − 2 Σ N^{ρ+1}/(ρ(ρ+1)) (bound N (ln N)³), and
/// Σ_{n≤N} R(n)(1 − n/N) against N²/6 − 2 Σ N^{ρ+1}/(ρ(ρ+1)(ρ+2)) (bound N).
pub fn verify_long_interval(
    n: u64,
    arith: &Arithmetic,
    zs: &ZeroSet,
    tol: &Tolerances,
) -> Result<[VerificationReport; 2]> {
    if n < 2 {
        return Err(Error::Domain(format!("N must be at least 2, got {n}")));
    }
    arith.window.require(1, n)?;
    let r = r_range_fft(1, n, &arith.window, DEFAULT_MAX_FFT_LEN)?;
    let nf = n as f64;
    let mut plain = NeumaierSum::new();
    let mut weighted = NeumaierSum::new();
    for (i, v) in r.iter().enumerate() {
        let k = (i + 1) as f64;
        plain.add(*v);
        weighted.add(*v * (1.0 - k / nf));
    }
    let ablation = zs.is_empty();
    let suffix = if ablation { "-ablation" } else { "" };

    let zs1 = psi_zero_sum_allow_empty(nf, zs)?;
    let mut a = VerificationReport::new(format!("long-sum{suffix}"));
    a.n = Some(n);
    a.lhs = plain.value();
    a.main_term = nf * nf / 2.0;
    a.zero_term = -2.0 * zs1.value;
    zero_notes(&mut a, &zs1, 2.0);
    a.ablation = ablation;
    a.judge_identity(nf * ln(nf).powi(3), tol.long_sum);

    let zs2 = cesaro_zero_sum(nf, zs)?;
    let mut b = VerificationReport::new(format!("long-cesaro{suffix}"));
    b.n = Some(n);
    b.lhs = weighted.value();
    b.main_term = nf * nf / 6.0;
    b.zero_term = -2.0 * zs2.value;
    zero_notes(&mut b, &zs2, 2.0);
    b.ablation = ablation;
    b.judge_identity(nf, tol.long_cesaro);
    Ok([a, b])
}

/// Σ t_H(n−N) n = H² N in exact integer arithmetic.
pub fn moment_identity_check(spec: &WindowSpec) -> VerificationReport {
    let w = spec.weight();
    let lhs = w.moment(spec.n);
    let rhs = spec.h as i128 * spec.h as i128 * spec.n as i128;
    let mut r = VerificationReport::new("weight-moment").with_spec(spec.n, spec.h, None);
    r.lhs = lhs as f64;
    r.main_term = rhs as f64;
    r.observed_error = (lhs - rhs) as f64;
    r.bound = 1.0;
    r.ratio = r.observed_error.abs();
    r.pass = lhs == rhs;
    r.note("exact integer comparison");
    r
}

/// Chain cross-check. The unweighted window sum D = Σ t_H (R − (2ψ − n)) is
/// formed twice: from the short-interval pieces, H·lhs − H²N − 2 Σ t_H (ψ − n),
/// and by exact Abel summation of the e^{−n/N}-weighted partial sums of the
/// averaged statement. Pass when they agree to `chain_rel` of Σ t_H R.
pub fn chain_check(
    spec: &WindowSpec,
    arith: &Arithmetic,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let rwin = r_window_fft(spec, &arith.window)?;
    chain_check_with(spec, &rwin, &arith.psi, tol)
}

pub fn chain_check_with(
    spec: &WindowSpec,
    rwin: &RWindow,
    psi: &dyn PsiSource,
    tol: &Tolerances,
) -> Result<VerificationReport> {
    let (n, h) = (spec.n, spec.h);
    let hf = h as f64;
    let nf = n as f64;
    let lhs = cesaro_lhs_main(spec, rwin)?;
    let w = spec.weight();
    let mut psi_part = NeumaierSum::new();
    for k in spec.start()..=spec.end() {
        let t = w.at_offset(k, n);
        if t != 0 {
            psi_part.add(t as f64 * (psi.psi_at(k)? - k as f64));
        }
    }
    let from_main = hf * lhs - hf * hf * nf - 2.0 * psi_part.value();

    // Abel summation: Σ c_k e^{k/N} = e^{B/N} P(B) − Σ_{k<B} P(k)(e^{(k+1)/N} − e^{k/N}).
    let summand = average_summand(spec, rwin, psi)?;
    let (a, b) = (spec.start(), spec.end());
    let mut partial = NeumaierSum::new();
    let mut acc = NeumaierSum::new();
    for (i, v) in summand.iter().enumerate() {
        partial.add(*v);
        let k = a + i as u64;
        if k < b {
            let step = (k as f64 / nf).exp() * (1.0 / nf).exp_m1();
            acc.add(-partial.value() * step);
        }
    }
    acc.add((b as f64 / nf).exp() * partial.value());
    let from_average = hf * acc.value();

    let mass = hf * lhs.abs();
    let mut r = VerificationReport::new("chain").with_spec(n, h, None);
    r.lhs = from_main;
    r.main_term = from_average;
    r.observed_error = from_main - from_average;
    r.extra("window_difference", from_main);
    r.extra(
        "chain_bound",
        hf * nf * ln(2.0 * nf / hf).powi(2) + hf * hf * ln(nf).powi(2) * ln(2.0 * hf),
    );
    r.note("bound = sum of t_H R(n); constant = relative tolerance");
    r.judge(mass.max(1.0), tol.chain_rel);
    Ok(r)
}

/// Log-log slope of |remainder| against M over a family of ψ explicit-formula
/// rows; every row gets the verdict.
pub fn psi_explicit_trend(rows: &mut [VerificationReport], limit: f64) -> Option<f64> {
    let x: Vec<f64> = rows.iter().map(|r| r.param.unwrap_or(0.0)).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.observed_error.abs()).collect();
    let slope = loglog_slope(&x, &y);
    for r in rows.iter_mut() {
        r.set_trend(slope, limit);
    }
    slope
}

/// Individually runnable lemma-level checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LemmaId {
    Residue,
    MeanSquare,
    Lp,
    TBound,
    Decomposition,
    PsiExplicit,
    Pesato,
    Moment,
    ZeroTerm,
    ZeroCount,
    Chain,
}

impl LemmaId {
    pub const ALL: [LemmaId; 11] = [
        LemmaId::Residue,
        LemmaId::MeanSquare,
        LemmaId::Lp,
        LemmaId::TBound,
        LemmaId::Decomposition,
        LemmaId::PsiExplicit,
        LemmaId::Pesato,
        LemmaId::Moment,
        LemmaId::ZeroTerm,
        LemmaId::ZeroCount,
        LemmaId::Chain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LemmaId::Residue => "residue",
            LemmaId::MeanSquare => "mean-square",
            LemmaId::Lp => "lp",
            LemmaId::TBound => "t-bound",
            LemmaId::Decomposition => "decomposition",
            LemmaId::PsiExplicit => "psi-explicit",
            LemmaId::Pesato => "pesato",
            LemmaId::Moment => "moment",
            LemmaId::ZeroTerm => "zero-term",
            LemmaId::ZeroCount => "zero-count",
            LemmaId::Chain => "chain",
        }
    }

    pub fn needs_zeros(self) -> bool {
        matches!(
            self,
            LemmaId::PsiExplicit | LemmaId::Pesato | LemmaId::ZeroTerm | LemmaId::ZeroCount
        )
    }
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LemmaId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.strip_prefix("lemma:").unwrap_or(s);
        LemmaId::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = LemmaId::ALL.iter().map(|l| l.name()).collect();
                Error::Config(format!(
                    "unknown lemma {s:?}; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

/// Inputs of a single lemma run. Unused fields are ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaInput {
    pub n: u64,
    pub h: u64,
    pub y: i64,
    /// M for the ψ formula, ξ for the short arc, n for the residue, T for
    /// the zero count.
    pub param: Option<f64>,
}

/// Λ range a lemma run needs, as the upper end of [1, hi].
pub fn lemma_sieve_limit(id: LemmaId, input: &LemmaInput) -> u64 {
    match id {
        LemmaId::MeanSquare | LemmaId::Lp | LemmaId::Decomposition => {
            20 * input.n.max(1) + 2 * input.h
        }
        LemmaId::PsiExplicit => input.param.unwrap_or(input.n as f64).floor() as u64,
        LemmaId::Pesato | LemmaId::Chain => input.n + input.h,
        _ => 2,
    }
}

pub fn run_lemma(
    id: LemmaId,
    input: &LemmaInput,
    arith: &Arithmetic,
    zs: &ZeroSet,
    tol: &Tolerances,
) -> Result<Vec<VerificationReport>> {
    let (n, h) = (input.n, input.h);
    let c = &tol.circle;
    Ok(match id {
        LemmaId::Residue => {
            let m = input.param.map_or(n, |p| p as u64);
            vec![circle::residue_check(m, n, c.residue)?.to_report()]
        }
        LemmaId::MeanSquare => {
            vec![circle::mean_square_check(n, &arith.window, c.mean_square)?.to_report()]
        }
        LemmaId::Lp => {
            let xi = input.param.unwrap_or(0.5);
            vec![circle::lp_bound_check(n, xi, &arith.window, c.lp)?.to_report()]
        }
        LemmaId::TBound => {
            let spec = WindowSpec::with_y(n, h, input.y)?;
            t_bound_scan(&spec, 2000).reports(tol.t_bound, tol.sharpness)
        }
        LemmaId::Decomposition => {
            circle::i_decomposition_check(n, h, input.y, &arith.window, &arith.psi, c)?
                .iter()
                .map(|x| x.to_report())
                .collect()
        }
        LemmaId::PsiExplicit => {
            let m = input.param.unwrap_or(n as f64);
            vec![psi_explicit_check(m, zs, &arith.psi, tol.psi_explicit)?]
        }
        LemmaId::Pesato => vec![pesato_identity_check(n, h, zs, &arith.psi, tol.pesato)?],
        LemmaId::Moment => vec![moment_identity_check(&WindowSpec::new(n, h)?)],
        LemmaId::ZeroTerm => vec![order_of_magnitude_check(n, h, zs, tol.zero_term)?],
        LemmaId::ZeroCount => {
            let t = input.param.unwrap_or_else(|| zs.complete_to());
            vec![count_check(zs, t, tol.count_c, tol.count_mean)]
        }
        LemmaId::Chain => vec![chain_check(&WindowSpec::new(n, h)?, arith, tol)?],
    })
}

/// How H is derived from N along a campaign family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// H = ⌊N^{num/den}⌋.
    Power { num: u32, den: u32 },
    /// H = ⌊N/div⌋.
    Fraction { div: u64 },
}

impl Family {
    pub fn h_for(&self, n: u64) -> u64 {
        match *self {
            Family::Power { num, den } => {
                let e = num as f64 / den as f64;
                let mut h = (n as f64).powf(e).floor() as u64;
                // exact integer correction of the floating root
                let pow = |x: u64| (x as u128).checked_pow(den);
                let target = (n as u128).checked_pow(num);
                if let Some(t) = target {
                    while h > 0 && pow(h).map_or(true, |p| p > t) {
                        h -= 1;
                    }
                    while pow(h + 1).is_some_and(|p| p <= t) {
                        h += 1;
                    }
                }
                h
            }
            Family::Fraction { div } => n / div.max(1),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Family::Power { num, den } => format!("theta={num}/{den}"),
            Family::Fraction { div } => format!("N/{div}"),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for Family {
    type Err = Error;

    /// `pow:NUM/DEN` or `frac:DIV`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Config(format!(
                "bad family {s:?}; expected pow:NUM/DEN or frac:DIV"
            ))
        };
        let (kind, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        match kind {
            "pow" => {
                let (a, b) = rest.split_once('/').ok_or_else(bad)?;
                let num: u32 = a.trim().parse().map_err(|_| bad())?;
                let den: u32 = b.trim().parse().map_err(|_| bad())?;
                if den == 0 || num == 0 || num > den {
                    return Err(bad());
                }
                Ok(Family::Power { num, den })
            }
            "frac" => {
                let div: u64 = rest.trim().parse().map_err(|_| bad())?;
                if div == 0 {
                    return Err(bad());
                }
                Ok(Family::Fraction { div })
            }
            _ => Err(bad()),
        }
    }
}

/// Grid of (N, H) points: explicit pairs plus every N crossed with every family.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub pairs: Vec<(u64, u64)>,
    pub ns: Vec<u64>,
    pub families: Vec<Family>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridPoint {
    pub n: u64,
    pub h: u64,
    pub family: Option<String>,
}

impl GridSpec {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty() && (self.ns.is_empty() || self.families.is_empty())
    }

    pub fn points(&self) -> Vec<GridPoint> {
        let mut out: Vec<GridPoint> = self
            .pairs
            .iter()
            .map(|&(n, h)| GridPoint { n, h, family: None })
            .collect();
        for f in &self.families {
            for &n in &self.ns {
                out.push(GridPoint {
                    n,
                    h: f.h_for(n),
                    family: Some(f.label()),
                });
            }
        }
        out
    }

    /// Largest N + H over the grid.
    pub fn sieve_limit(&self) -> u64 {
        self.points()
            .iter()
            .map(|p| p.n.saturating_add(p.h.min(p.n)))
            .max()
            .unwrap_or(2)
    }
}

/// Check kinds a campaign can run on each grid point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CampaignCheck {
    Main,
    Ablation,
    Average,
    Pesato,
    ZeroTerm,
    Chain,
    Long,
}

impl CampaignCheck {
    pub const ALL: [CampaignCheck; 7] = [
        CampaignCheck::Main,
        CampaignCheck::Ablation,
        CampaignCheck::Average,
        CampaignCheck::Pesato,
        CampaignCheck::ZeroTerm,
        CampaignCheck::Chain,
        CampaignCheck::Long,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CampaignCheck::Main => "main",
            CampaignCheck::Ablation => "ablation",
            CampaignCheck::Average => "average",
            CampaignCheck::Pesato => "pesato",
            CampaignCheck::ZeroTerm => "zero-term",
            CampaignCheck::Chain => "chain",
            CampaignCheck::Long => "long",
        }
    }

    fn report_names(self) -> &'static [&'static str] {
        match self {
            CampaignCheck::Main => &["main"],
            CampaignCheck::Ablation => &["main-ablation"],
            CampaignCheck::Average => &["average-max", "average-full"],
            CampaignCheck::Pesato => &["pesato"],
            CampaignCheck::ZeroTerm => &["zero-term-size"],
            CampaignCheck::Chain => &["chain"],
            CampaignCheck::Long => &["long-sum", "long-cesaro"],
        }
    }
}

impl FromStr for CampaignCheck {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CampaignCheck::ALL
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown campaign check {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub grid: GridSpec,
    pub checks: Vec<CampaignCheck>,
    pub tolerances: Tolerances,
    pub threads: usize,
}

/// Per-family regression summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySlope {
    pub check: String,
    pub family: String,
    pub points: usize,
    /// Log-log slope of |observed error| against N.
    pub error_slope: Option<f64>,
    /// Log-log slope of |observed error| / (HN) against N.
    pub relative_slope: Option<f64>,
    /// Log-log slope of the ratio against N.
    pub ratio_slope: Option<f64>,
}

fn run_point(
    check: CampaignCheck,
    p: &GridPoint,
    arith: &Arithmetic,
    zs: &ZeroSet,
    tol: &Tolerances,
) -> Result<Vec<VerificationReport>> {
    let spec = WindowSpec::new(p.n, p.h)?;
    let empty = ZeroSet::empty();
    Ok(match check {
        CampaignCheck::Main => vec![verify_main(&spec, arith, zs, tol)?],
        CampaignCheck::Ablation => vec![verify_main(&spec, arith, &empty, tol)?],
        CampaignCheck::Average => verify_average(&spec, arith, tol)?.to_vec(),
        CampaignCheck::Pesato => vec![pesato_identity_check(p.n, p.h, zs, &arith.psi, tol.pesato)?],
        CampaignCheck::ZeroTerm => vec![order_of_magnitude_check(p.n, p.h, zs, tol.zero_term)?],
        CampaignCheck::Chain => vec![chain_check(&spec, arith, tol)?],
        CampaignCheck::Long => verify_long_interval(p.n, arith, zs, tol)?
            .into_iter()
            .map(|mut r| {
                r.h = Some(p.h);
                r
            })
            .collect(),
    })
}

/// Runs every selected check on every grid point. A failing point is
/// recorded as an error row; the rest still run. Rows are sorted by
/// (check, N, H), and families with at least three rows get trend verdicts.
pub fn grid_campaign(cfg: &CampaignConfig, arith: &Arithmetic, zs: &ZeroSet) -> Report {
    let tol = &cfg.tolerances;
    let points = cfg.grid.points();
    let tasks: Vec<(CampaignCheck, &GridPoint)> = cfg
        .checks
        .iter()
        .flat_map(|&c| points.iter().map(move |p| (c, p)))
        .collect();
    let mut rows: Vec<VerificationReport> = tasks
        .par_iter()
        .map(|&(check, p)| {
            let mut out = match run_point(check, p, arith, zs, tol) {
                Ok(rows) => rows,
                Err(e) => check
                    .report_names()
                    .iter()
                    .map(|name| {
                        let mut r = VerificationReport::failed(*name, e.to_string());
                        r.n = Some(p.n);
                        r.h = Some(p.h);
                        r.ablation = check == CampaignCheck::Ablation;
                        r
                    })
                    .collect(),
            };
            for r in &mut out {
                r.family = p.family.clone();
            }
            out
        })
        .flatten()
        .collect();
    rows.sort_by(|a, b| {
        a.sort_key()
            .cmp(&b.sort_key())
            .then_with(|| a.family.cmp(&b.family))
    });
    let slopes = apply_trends(&mut rows, tol);
    let mut report = Report::new(cfg.threads, *tol);
    report.family_slopes = slopes;
    report.rows = rows;
    report
}

/// Groups rows by (check, family) and applies the trend rule of each check.
pub fn apply_trends(rows: &mut [VerificationReport], tol: &Tolerances) -> Vec<FamilySlope> {
    let mut groups: BTreeMap<(String, String), Vec<usize>> = BTreeMap::new();
    for (i, r) in rows.iter().enumerate() {
        if let (Some(f), None) = (&r.family, &r.error) {
            groups
                .entry((r.check.clone(), f.clone()))
                .or_default()
                .push(i);
        }
    }
    let mut out = Vec::new();
    for ((check, family), idx) in groups {
        let mut group: Vec<VerificationReport> = idx.iter().map(|&i| rows[i].clone()).collect();
        let x: Vec<f64> = group.iter().map(|r| r.n.unwrap_or(0) as f64).collect();
        let err: Vec<f64> = group.iter().map(|r| r.observed_error.abs()).collect();
        let rel: Vec<f64> = group
            .iter()
            .map(|r| r.observed_error.abs() / (r.n.unwrap_or(0) as f64 * r.h.unwrap_or(0) as f64))
            .collect();
        let ratios: Vec<f64> = group.iter().map(|r| r.ratio).collect();
        let summary = FamilySlope {
            check: check.clone(),
            family,
            points: group.len(),
            error_slope: loglog_slope(&x, &err),
            relative_slope: loglog_slope(&x, &rel),
            ratio_slope: loglog_slope(&x, &ratios),
        };
        if group.len() >= 3 {
            match check.as_str() {
                "main"
                | "main-ablation"
                | "average-max"
                | "average-full"
                | "long-sum"
                | "long-cesaro"
                | "long-sum-ablation"
                | "long-cesaro-ablation"
                | "zero-term-size" => {
                    ratio_trend(&mut group, tol.slope);
                }
                "pesato" => {
                    pesato_trend(&mut group, tol.pesato_factor);
                }
                _ => {}
            }
            for (k, &i) in idx.iter().enumerate() {
                rows[i] = group[k].clone();
            }
        }
        out.push(summary);
    }
    out
}

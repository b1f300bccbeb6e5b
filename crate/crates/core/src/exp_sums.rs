//! The circle-method kernels S̃(α), V(α) and T_H(N, y; α), pointwise and on
//! FFT grids.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::cmath::{cexpm1, e, e_minus_one, frac_mul};
use crate::error::{Error, Result};
use crate::goldbach::WindowSpec;
use crate::lambda::LambdaWindow;
use crate::report::{fmt_sig, VerificationReport};
use crate::sum::ComplexSum;

/// Below this value of H‖α‖ the closed forms of T_H fall back to the direct sum.
pub const CLOSED_FORM_MIN_H_ALPHA: f64 = 1e-6;
/// |z| below which V uses its Laurent expansion.
const V_SERIES_RADIUS: f64 = 1e-4;

/// ‖α‖, the distance to the nearest integer.
pub fn norm_dist(alpha: f64) -> f64 {
    (alpha - alpha.round()).abs()
}

/// z = 1/N − 2πiα.
pub fn z_param(n: u64, alpha: f64) -> Complex64 {
    Complex64::new(1.0 / n as f64, -TAU * alpha)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaPoint {
    pub alpha: f64,
    pub z: Complex64,
}

impl AlphaPoint {
    pub fn new(n: u64, alpha: f64) -> Result<Self> {
        if n == 0 || alpha.is_nan() || alpha.abs() > 0.5 {
            return Err(Error::Domain(format!(
                "need N >= 1 and |alpha| <= 1/2, got N = {n}, alpha = {alpha}"
            )));
        }
        Ok(AlphaPoint {
            alpha,
            z: z_param(n, alpha),
        })
    }
}

/// V(α) = Σ_{m≥1} e^{−m/N} e(mα) = 1/(e^z − 1).
pub fn v_kernel(n: u64, alpha: f64) -> Complex64 {
    let z = z_param(n, alpha);
    if z.norm() < V_SERIES_RADIUS {
        let z3 = z * z * z;
        z.inv() - 0.5 + z / 12.0 - z3 / 720.0
    } else {
        cexpm1(z).inv()
    }
}

/// Σ_{n>M} ln(n) e^{−n/N} ≤ N e^{−M/N} (ln M + N/M).
pub fn s_tilde_tail_bound(n: u64, m: u64) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    nf * (-mf / nf).exp() * (mf.ln() + nf / mf)
}

/// Least M* ≥ N with [`s_tilde_tail_bound`] ≤ eps.
pub fn s_tilde_truncation(n: u64, eps: f64) -> Result<u64> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::Domain(format!(
            "tail budget must be positive, got {eps}"
        )));
    }
    let n = n.max(2);
    let mut hi = n;
    while s_tilde_tail_bound(n, hi) > eps {
        hi = hi
            .checked_mul(2)
            .ok_or_else(|| Error::Domain("tail budget too small".into()))?;
    }
    let mut lo = hi / 2;
    if lo < n {
        return Ok(hi);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if s_tilde_tail_bound(n, mid) > eps {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// Default S̃ tail budget, 1e-9·N.
pub fn default_eps(n: u64) -> f64 {
    1e-9 * n as f64
}

/// S̃(α) = Σ_{n≤M*} Λ(n) e^{−n/N} e(nα) with the dropped tail ≤ eps.
pub fn s_tilde(n: u64, alpha: f64, eps: f64, window: &LambdaWindow) -> Result<Complex64> {
    let m = s_tilde_truncation(n, eps)?;
    window.require(1, m)?;
    let nf = n as f64;
    let mut acc = ComplexSum::new();
    for k in 1..=m {
        let l = window.value(k);
        if l != 0.0 {
            acc.add(e(frac_mul(k as f64, alpha)) * (l * (-(k as f64) / nf).exp()));
        }
    }
    Ok(acc.value())
}

/// T_H(N, y; α) = Σ_{n=N−H}^{N+y} t_H(n−N) e(nα), summed in ascending n with
/// the phase e(Nα) factored out.
pub fn t_sum_direct(spec: &WindowSpec, alpha: f64) -> Complex64 {
    let w = spec.weight();
    let h = spec.h as i64;
    let mut acc = ComplexSum::new();
    for m in -h..=spec.y {
        let t = w.at(m);
        if t != 0 {
            acc.add(e(frac_mul(m as f64, alpha)) * t as f64);
        }
    }
    e(frac_mul(spec.n as f64, alpha)) * acc.value()
}

/// T_H by closed forms: the squared geometric sum for y = H, the two-term
/// form with (1−e(α)) and (1−e(α))² denominators for 0 ≤ y < H, and the
/// ramp sum Σ j w^j for y < 0. Falls back to the direct sum when H‖α‖ (for
/// the ramp, (H+y)‖α‖) is below [`CLOSED_FORM_MIN_H_ALPHA`].
pub fn t_sum_closed(spec: &WindowSpec, alpha: f64) -> Complex64 {
    let a = norm_dist(alpha);
    let hf = spec.h as f64;
    if a == 0.0 || hf * a < CLOSED_FORM_MIN_H_ALPHA {
        return t_sum_direct(spec, alpha);
    }
    let phase = e(frac_mul(spec.n as f64, alpha));
    let h = spec.h as i64;
    let y = spec.y;
    let one_minus_w = -e_minus_one(alpha);
    let inner = if y == h {
        let r = (PI * hf * alpha).sin() / (PI * alpha).sin();
        Complex64::new(r * r, 0.0)
    } else if y >= 0 {
        let yf = y as f64;
        let first = e(frac_mul(yf + 1.0, alpha)) * (yf - hf) / one_minus_w;
        let second = e(alpha)
            * (e_minus_one(frac_mul(yf, alpha)) + e_minus_one(frac_mul(-hf, alpha)))
            / (one_minus_w * one_minus_w);
        first + second
    } else {
        // n = N − H + j, weight j for j = 0..=L
        let l = (y + h) as f64;
        if l == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if l * a < CLOSED_FORM_MIN_H_ALPHA {
            return t_sum_direct(spec, alpha);
        }
        let w = e(alpha);
        let wl = e(frac_mul(l, alpha));
        let one_minus_wl = -e_minus_one(frac_mul(l, alpha));
        let ramp = w * (one_minus_wl / (one_minus_w * one_minus_w) - wl * l / one_minus_w);
        e(frac_mul(-hf, alpha)) * ramp
    };
    phase * inner
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TBoundSample {
    pub alpha: f64,
    pub abs_t: f64,
    pub first_bound: f64,
    pub second_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TBoundScan {
    pub spec: WindowSpec,
    /// sup |T| / (H min(H, 1/‖α‖)).
    pub first_ratio: f64,
    /// sup |T| / min(H², 1/‖α‖²); only meaningful for y = H.
    pub second_ratio: f64,
    /// max over α ∈ [1/H, 1/2] of |T| ‖α‖ / H, for y ≤ H/2.
    pub sharpness: Option<f64>,
    pub samples: Vec<TBoundSample>,
}

/// Log-spaced α from 1/(4H²) to 1/2, both signs, plus α = 0.
pub fn log_alpha_grid(h: u64, count: usize) -> Vec<f64> {
    let lo = (0.25 / (h as f64 * h as f64)).min(0.5);
    let count = count.max(2);
    let (la, lb) = (lo.ln(), 0.5f64.ln());
    let mut out = vec![0.0];
    for i in 0..count {
        let a = (la + (lb - la) * i as f64 / (count - 1) as f64).exp();
        out.push(a);
        out.push(-a);
    }
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Scans |T_H| against both bounds on a log-spaced α grid, and the sharpness
/// statistic on a uniform grid over [1/H, 1/2].
pub fn t_bound_scan(spec: &WindowSpec, samples: usize) -> TBoundScan {
    let hf = spec.h as f64;
    let mut first_ratio = 0.0f64;
    let mut second_ratio = 0.0f64;
    let mut rows = Vec::new();
    for alpha in log_alpha_grid(spec.h, samples) {
        let t = t_sum_closed(spec, alpha).norm();
        let a = norm_dist(alpha);
        let first = if a == 0.0 {
            hf * hf
        } else {
            hf * hf.min(1.0 / a)
        };
        let second = if a == 0.0 {
            hf * hf
        } else {
            (hf * hf).min(1.0 / (a * a))
        };
        first_ratio = first_ratio.max(t / first);
        second_ratio = second_ratio.max(t / second);
        rows.push(TBoundSample {
            alpha,
            abs_t: t,
            first_bound: first,
            second_bound: second,
        });
    }
    let sharpness = (2 * spec.y <= spec.h as i64).then(|| {
        let lo = (1.0 / hf).min(0.5);
        let k = samples.max(2);
        (0..k)
            .map(|i| {
                let alpha = lo + (0.5 - lo) * i as f64 / (k - 1) as f64;
                t_sum_closed(spec, alpha).norm() * norm_dist(alpha) / hf
            })
            .fold(0.0, f64::max)
    });
    TBoundScan {
        spec: *spec,
        first_ratio,
        second_ratio,
        sharpness,
        samples: rows,
    }
}

impl TBoundScan {
    /// One row per applicable statement: the first bound always, the second
    /// for y = H, the sharpness floor for y ≤ H/2.
    pub fn reports(&self, constant: f64, sharpness_floor: f64) -> Vec<VerificationReport> {
        let s = self.spec;
        let mut out = Vec::new();
        let mut r = VerificationReport::new("t-bound-first").with_spec(s.n, s.h, Some(s.y));
        r.observed_error = self.first_ratio;
        r.note("observed_error = sup |T| / (H min(H, 1/||alpha||))");
        r.judge(1.0, constant);
        out.push(r);
        if s.y == s.h as i64 {
            let mut r = VerificationReport::new("t-bound-second").with_spec(s.n, s.h, Some(s.y));
            r.observed_error = self.second_ratio;
            r.note("observed_error = sup |T| / min(H^2, 1/||alpha||^2)");
            r.judge(1.0, constant);
            out.push(r);
        }
        if let Some(v) = self.sharpness {
            let mut r = VerificationReport::new("t-sharpness").with_spec(s.n, s.h, Some(s.y));
            r.lhs = v;
            r.constant = sharpness_floor;
            r.ratio = v;
            r.pass = v >= sharpness_floor;
            r.note("lhs = max over [1/H, 1/2] of |T| ||alpha|| / H; pass when >= constant");
            out.push(r);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Kernel {
    /// T_H(N, y; α).
    THat { h: u64, y: i64 },
    /// V truncated after `terms` coefficients.
    V { terms: u64 },
    /// S̃ with tail budget `eps`.
    STilde { eps: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridEvaluation {
    pub m: usize,
    pub kernel: Kernel,
    /// `values[j]` is the kernel at α = j/M, read as j/M − 1 for j ≥ M/2.
    pub values: Vec<Complex64>,
    /// Σ |coefficient|², for Parseval checks.
    pub coeff_energy: f64,
}

impl GridEvaluation {
    pub fn alpha(&self, j: usize) -> f64 {
        grid_alpha(j, self.m)
    }

    /// (1/M) Σ_j |values[j]|².
    pub fn mean_square(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.m as f64
    }

    /// CSV `j,alpha,re,im`, ascending j.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "j,alpha,re,im")?;
        for (j, v) in self.values.iter().enumerate() {
            writeln!(
                w,
                "{j},{},{},{}",
                fmt_sig(self.alpha(j)),
                fmt_sig(v.re),
                fmt_sig(v.im)
            )?;
        }
        Ok(())
    }
}

pub fn grid_alpha(j: usize, m: usize) -> f64 {
    if 2 * j < m {
        j as f64 / m as f64
    } else {
        j as f64 / m as f64 - 1.0
    }
}

/// Least power of two ≥ 4 × `len`.
pub fn grid_size_for(len: u64) -> usize {
    (4 * len.max(1) as usize).next_power_of_two()
}

/// Samples a kernel at α = j/M with one inverse transform of its coefficients.
///
/// M must be a power of two and at least twice the number of coefficients.
/// For S̃ the window must cover the truncation point.
pub fn fft_grid(
    n: u64,
    kernel: &Kernel,
    m: usize,
    window: Option<&LambdaWindow>,
) -> Result<GridEvaluation> {
    if !m.is_power_of_two() {
        return Err(Error::AliasBudget(format!(
            "grid size {m} is not a power of two"
        )));
    }
    let nf = n as f64;
    // (frequency, coefficient) pairs
    let (first, coeffs): (u64, Vec<f64>) = match *kernel {
        Kernel::THat { h, y } => {
            let spec = WindowSpec::with_y(n, h, y)?;
            let w = spec.weight();
            let c = (spec.start()..=spec.y_end())
                .map(|k| w.at_offset(k, n) as f64)
                .collect();
            (spec.start(), c)
        }
        Kernel::V { terms } => (1, (1..=terms).map(|k| (-(k as f64) / nf).exp()).collect()),
        Kernel::STilde { eps } => {
            let top = s_tilde_truncation(n, eps)?;
            let window =
                window.ok_or_else(|| Error::Precondition("S~ grid needs a Λ window".into()))?;
            window.require(1, top)?;
            (
                1,
                (1..=top)
                    .map(|k| window.value(k) * (-(k as f64) / nf).exp())
                    .collect(),
            )
        }
    };
    if (m as u64) < 2 * coeffs.len() as u64 {
        return Err(Error::AliasBudget(format!(
            "grid size {m} is below twice the {} coefficients",
            coeffs.len()
        )));
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    let mut energy = 0.0;
    for (i, c) in coeffs.iter().enumerate() {
        let k = ((first + i as u64) % m as u64) as usize;
        buf[k] += *c;
        energy += c * c;
    }
    // inverse transform: Σ_k c_k e^{+2πi jk/M}, unnormalised
    FftPlanner::<f64>::new()
        .plan_fft_inverse(m)
        .process(&mut buf);
    Ok(GridEvaluation {
        m,
        kernel: *kernel,
        values: buf,
        coeff_energy: energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::sieve_window;

    fn spec(n: u64, h: u64, y: i64) -> WindowSpec {
        WindowSpec::with_y(n, h, y).unwrap()
    }

    #[test]
    fn v_examples() {
        assert!((v_kernel(100, 0.0).re - 1.0 / (0.01f64.exp_m1())).abs() < 1e-10);
        assert!((v_kernel(100, 0.0).re - 99.500_833_3).abs() < 1e-6);
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 1..=500 {
            acc += e(m as f64 * 0.5) * (-(m as f64) / 10.0).exp();
        }
        assert!((v_kernel(10, 0.5) - acc).norm() < 1e-10);
        // series branch matches closed form at its edge
        let a = 0.9e-4 / TAU;
        let z = z_param(1_000_000, a);
        assert!(
            (v_kernel(1_000_000, a) - cexpm1(z).inv()).norm()
                < 1e-9 * v_kernel(1_000_000, a).norm()
        );
    }

    #[test]
    fn v_minus_inverse_z_is_bounded() {
        for n in [10u64, 100, 10_000] {
            for i in 0..=1000 {
                let a = -0.5 + i as f64 / 1000.0;
                assert!((v_kernel(n, a) - z_param(n, a).inv()).norm() <= 1.0);
            }
        }
    }

    #[test]
    fn truncation_meets_budget() {
        for n in [10u64, 500, 10_000] {
            let eps = default_eps(n);
            let m = s_tilde_truncation(n, eps).unwrap();
            assert!(s_tilde_tail_bound(n, m) <= eps);
            assert!(s_tilde_tail_bound(n, m - 1) > eps);
        }
    }

    #[test]
    fn s_tilde_examples() {
        let n = 10_000;
        let w = sieve_window(1, 40 * n).unwrap();
        let v0 = s_tilde(n, 0.0, default_eps(n), &w).unwrap();
        assert!((v0.re / n as f64 - 1.0).abs() < 0.05);
        let half = s_tilde(n, 0.5, default_eps(n), &w).unwrap();
        assert!(half.im.abs() < 1e-9 * half.norm());
        let a = s_tilde(n, 0.123, 1.0, &w).unwrap();
        let b = s_tilde(n, 0.123, 0.5, &w).unwrap();
        assert!((a - b).norm() <= 1.0);
        let small = sieve_window(1, 100).unwrap();
        assert!(matches!(
            s_tilde(n, 0.1, 1.0, &small),
            Err(Error::Coverage { .. })
        ));
    }

    #[test]
    fn t_direct_examples() {
        assert_eq!(t_sum_direct(&spec(100, 7, 7), 0.0).re, 49.0);
        assert_eq!(t_sum_direct(&spec(100, 3, 0), 0.0).re, 6.0);
        assert_eq!(t_sum_direct(&spec(100, 3, -3), 0.37).norm(), 0.0);
        assert_eq!(t_sum_closed(&spec(100, 7, 7), 0.0).re, 49.0);
    }

    #[test]
    fn t_closed_examples() {
        for (n, h, y, a) in [
            (50, 5, 5, 0.25),
            (50, 5, 2, 1.0 / 3.0),
            (50, 5, -2, 0.1),
            (50, 5, 0, -0.4),
        ] {
            let s = spec(n, h, y);
            let d = t_sum_direct(&s, a);
            let c = t_sum_closed(&s, a);
            assert!(
                (d - c).norm() <= 1e-12 * d.norm().max(1.0),
                "{n} {h} {y} {a}: {d} {c}"
            );
        }
        let s = spec(50, 20, 20);
        assert!((t_sum_closed(&s, 1e-9).norm() - 400.0).abs() <= 1e-6 * 400.0);
    }

    #[test]
    fn t_closed_near_fallback_threshold() {
        for h in [4u64, 64, 1000] {
            for y in [
                -(h as i64) + 1,
                -(h as i64) / 2,
                0,
                h as i64 / 2,
                h as i64 - 1,
                h as i64,
            ] {
                let s = spec(5000, h, y);
                for a in [
                    2e-6 / h as f64,
                    1e-4 / h as f64,
                    1e-2 / h as f64,
                    0.3 / h as f64,
                ] {
                    let d = t_sum_direct(&s, a);
                    let c = t_sum_closed(&s, a);
                    assert!(
                        (d - c).norm() <= 1e-9 * d.norm(),
                        "h={h} y={y} a={a}: {d} {c}"
                    );
                }
            }
        }
    }

    #[test]
    fn scan_examples() {
        let r = t_bound_scan(&spec(1000, 64, 0), 200);
        assert!(r.first_ratio <= 2.0 && r.sharpness.unwrap() >= 0.1);
        let r = t_bound_scan(&spec(1000, 64, 64), 200);
        assert!(r.second_ratio <= 2.0 && r.first_ratio <= 2.0 && r.sharpness.is_none());
        let r = t_bound_scan(&spec(1000, 1, 0), 50);
        assert!(r.first_ratio <= 1.0 + 1e-12 && r.second_ratio <= 1.0 + 1e-12);
        assert_eq!(r.reports(2.0, 0.1).len(), 2);
    }

    #[test]
    fn grid_t_matches_direct() {
        let g = fft_grid(50, &Kernel::THat { h: 8, y: 8 }, 64, None).unwrap();
        for j in 0..64 {
            let d = t_sum_direct(&spec(50, 8, 8), g.alpha(j));
            assert!((g.values[j] - d).norm() < 1e-10, "j={j}");
        }
        assert!(matches!(
            fft_grid(50, &Kernel::THat { h: 8, y: 8 }, 16, None),
            Err(Error::AliasBudget(_))
        ));
    }

    #[test]
    fn grid_v_matches_closed_form() {
        let n = 50;
        let terms = 40 * n;
        let m = grid_size_for(terms);
        let g = fft_grid(n, &Kernel::V { terms }, m, None).unwrap();
        for j in (0..m).step_by(97) {
            assert!((g.values[j] - v_kernel(n, g.alpha(j))).norm() < 1e-8);
        }
    }

    #[test]
    fn grid_s_tilde_parseval_and_symmetry() {
        let n = 500;
        let eps = default_eps(n);
        let top = s_tilde_truncation(n, eps).unwrap();
        let w = sieve_window(1, top).unwrap();
        let m = grid_size_for(top);
        let g = fft_grid(n, &Kernel::STilde { eps }, m, Some(&w)).unwrap();
        assert!((g.mean_square() - g.coeff_energy).abs() <= 1e-9 * g.coeff_energy);
        for j in 1..m / 2 {
            assert!((g.values[m - j] - g.values[j].conj()).norm() <= 1e-12 * g.values[0].norm());
        }
        let direct = s_tilde(n, g.alpha(37), eps, &w).unwrap();
        assert!((g.values[37] - direct).norm() < 1e-8 * direct.norm().max(1.0));
    }
}

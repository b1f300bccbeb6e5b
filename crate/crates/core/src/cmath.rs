//! Complex helpers that avoid cancellation near the origin.

use num_complex::Complex64;

/// e^z − 1 without losing relative accuracy for small |z|.
pub fn cexpm1(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let em1 = z.re.exp_m1();
    let half = (0.5 * z.im).sin();
    Complex64::new(em1 * c - 2.0 * half * half, (em1 + 1.0) * s)
}

/// `base^s` for real `base > 0`; `0^s = 0` when `Re s > 0`.
pub fn real_pow(base: f64, s: Complex64) -> Complex64 {
    if base == 0.0 {
        assert!(s.re > 0.0, "0^s needs Re s > 0");
        return Complex64::new(0.0, 0.0);
    }
    (s * base.ln()).exp()
}

/// `x^(a + iγ) = x^a e^{iγ ln x}`, keeping the phase argument exact in `ln x`.
pub fn real_pow_split(x: f64, a: f64, gamma: f64) -> Complex64 {
    let (s, c) = (gamma * x.ln()).sin_cos();
    Complex64::new(c, s) * x.powf(a)
}

/// e(x) = e^{2πix}.
pub fn e(x: f64) -> Complex64 {
    let (s, c) = (std::f64::consts::TAU * x).sin_cos();
    Complex64::new(c, s)
}

/// Fractional part of kα for integer-valued k, in [−1/2, 1/2], with the
/// rounding error of the product recovered by a fused multiply-add.
pub fn frac_mul(k: f64, alpha: f64) -> f64 {
    let p = k * alpha;
    let err = k.mul_add(alpha, -p);
    (p - p.round()) + err
}

/// e(x) − 1, accurate for small |x|.
pub fn e_minus_one(x: f64) -> Complex64 {
    let t = std::f64::consts::PI * x;
    let s = t.sin();
    Complex64::new(-2.0 * s * s, (2.0 * t).sin())
}

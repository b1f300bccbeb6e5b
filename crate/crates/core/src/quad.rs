//! Adaptive Gauss–Kronrod (7/15-point) quadrature for complex integrands.

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4096;

/// One 15-point Kronrod panel; returns (estimate, |K15 − G7|).
fn panel<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let dx = r * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += s * WGK[i];
        if i % 2 == 1 {
            g += s * WG[i / 2];
        }
    }
    (k * r, ((k - g) * r).norm())
}

#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: Complex64,
    pub error: f64,
    pub intervals: usize,
}

/// ∫_a^b f with global error estimate ≤ max(rel_tol |I|, abs_tol).
pub fn integrate<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Quadrature> {
    let mut parts = vec![(a, b, panel(&f, a, b))];
    loop {
        let value: Complex64 = parts.iter().map(|p| p.2 .0).sum();
        let error: f64 = parts.iter().map(|p| p.2 .1).sum();
        if error <= (rel_tol * value.norm()).max(abs_tol) {
            return Ok(Quadrature {
                value,
                error,
                intervals: parts.len(),
            });
        }
        if parts.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature {
                what: format!("adaptive GK15 on [{a}, {b}]"),
                estimate: error,
            });
        }
        let (i, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .expect("nonempty");
        let (lo, hi, _) = parts.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        parts.push((lo, mid, panel(&f, lo, mid)));
        parts.push((mid, hi, panel(&f, mid, hi)));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let q = integrate(|x| Complex64::new(x.powi(5), 0.0), 0.0, 2.0, 1e-14, 0.0).unwrap();
        assert!((q.value.re - 64.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn oscillatory() {
        // ∫_0^1 e^{i 200 x} dx = (e^{200i} − 1)/(200i)
        let q = integrate(
            |x| Complex64::new(0.0, 200.0 * x).exp(),
            0.0,
            1.0,
            1e-12,
            0.0,
        )
        .unwrap();
        let want = (Complex64::new(0.0, 200.0).exp() - 1.0) / Complex64::new(0.0, 200.0);
        assert!((q.value - want).norm() < 1e-12);
    }

    #[test]
    fn gives_up() {
        let r = integrate(
            |x| Complex64::new((1.0 / x).sin() / x, 0.0),
            1e-300,
            1.0,
            1e-15,
            0.0,
        );
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}

//! Self-convolution of real sequences via real-input FFTs.

use num_complex::Complex64;
use realfft::RealFftPlanner;

use crate::error::{Error, Result};

/// Transform lengths above this need an explicit budget override.
pub const DEFAULT_MAX_FFT_LEN: usize = 1 << 27;

/// Upper bound on `len * max|A|^2` for the integer part; keeps the FFT error
/// of the integer self-convolution far below the 0.5 rounding margin.
const INTEGER_BUDGET: f64 = (1u64 << 40) as f64;

/// Plain floating-point self-convolution `c[n] = sum_{i+j=n} x[i] x[j]` for
/// `n < out_len`.
pub fn self_convolve_plain(x: &[f64], out_len: usize, max_len: usize) -> Result<Vec<f64>> {
    let len = transform_len(x.len(), max_len)?;
    let mut planner = RealFftPlanner::<f64>::new();
    let spec = forward(&mut planner, x, len);
    let prod: Vec<Complex64> = spec.iter().map(|z| z * z).collect();
    Ok(inverse(&mut planner, prod, len, out_len))
}

/// Self-convolution with the error of the dominant part removed.
///
/// `x = A / 2^s + b` with integer `A`; `A*A` is computed by FFT and rounded
/// to the exact integer result, so only `2 A*b / 2^s + b*b` carries
/// floating-point error, and `|b| <= 2^-(s+1)` makes that error tiny.
pub fn self_convolve_split(x: &[f64], out_len: usize, max_len: usize) -> Result<Vec<f64>> {
    let len = transform_len(x.len(), max_len)?;
    let max_abs = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max_abs == 0.0 {
        return Ok(vec![0.0; out_len]);
    }
    let s = (0.5 * (INTEGER_BUDGET / (x.len() as f64 * max_abs * max_abs)).log2()).floor();
    let s = s.clamp(0.0, 30.0) as i32;
    let scale = 2f64.powi(s);
    let a: Vec<f64> = x.iter().map(|v| (v * scale).round()).collect();
    let b: Vec<f64> = x.iter().zip(&a).map(|(v, ai)| v - ai / scale).collect();

    let mut planner = RealFftPlanner::<f64>::new();
    let fa = forward(&mut planner, &a, len);
    let fb = forward(&mut planner, &b, len);
    let aa: Vec<Complex64> = fa.iter().map(|z| z * z).collect();
    let rest: Vec<Complex64> = fa
        .iter()
        .zip(&fb)
        .map(|(za, zb)| 2.0 * za * zb / scale + zb * zb)
        .collect();
    let aa = inverse(&mut planner, aa, len, out_len);
    let rest = inverse(&mut planner, rest, len, out_len);
    let inv_sq = 1.0 / (scale * scale);
    Ok(aa
        .into_iter()
        .zip(rest)
        .map(|(i, r)| i.round() * inv_sq + r)
        .collect())
}

fn transform_len(n: usize, max_len: usize) -> Result<usize> {
    let len = (2 * n).next_power_of_two().max(2);
    if len > max_len {
        return Err(Error::Resource { len, max: max_len });
    }
    Ok(len)
}

fn forward(planner: &mut RealFftPlanner<f64>, x: &[f64], len: usize) -> Vec<Complex64> {
    let fft = planner.plan_fft_forward(len);
    let mut input = vec![0.0; len];
    input[..x.len()].copy_from_slice(x);
    let mut out = fft.make_output_vec();
    fft.process(&mut input, &mut out)
        .expect("buffer lengths come from the plan");
    out
}

fn inverse(
    planner: &mut RealFftPlanner<f64>,
    mut spec: Vec<Complex64>,
    len: usize,
    out_len: usize,
) -> Vec<f64> {
    let ifft = planner.plan_fft_inverse(len);
    // the DC and Nyquist bins of a real signal's spectrum are real
    spec[0].im = 0.0;
    let last = spec.len() - 1;
    spec[last].im = 0.0;
    let mut out = ifft.make_output_vec();
    ifft.process(&mut spec, &mut out)
        .expect("buffer lengths come from the plan");
    let norm = 1.0 / len as f64;
    out.truncate(out_len.min(len));
    out.iter_mut().for_each(|v| *v *= norm);
    out
}

//! Least-squares slopes used by the trend rules.

/// Ordinary least-squares slope of `y` on `x`; `None` with fewer than two
/// distinct abscissae or non-finite input.
pub fn ols_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    Some(sxy / sxx)
}

/// Slope of ln|y| against ln x. Zero `y` values make it undefined.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.iter().chain(y).any(|v| *v == 0.0) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.abs().ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    ols_slope(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_lines() {
        assert_eq!(ols_slope(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]), Some(2.0));
        let s = loglog_slope(&[10.0, 100.0, 1000.0], &[3e2, 3e4, 3e6]).unwrap();
        assert!((s - 2.0).abs() < 1e-12);
        assert_eq!(ols_slope(&[1.0, 1.0], &[0.0, 1.0]), None);
        assert_eq!(loglog_slope(&[1.0, 2.0], &[0.0, 1.0]), None);
    }
}

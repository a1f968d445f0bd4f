//! Small numerical helpers shared by the physics modules.

use crate::error::{QuenchError, Result};

/// Fractional part of `k * x` in `[0, 1)`.
///
/// The product is split into `hi + lo` with a fused multiply-add, so the
/// reduction stays accurate when `k * x` is much larger than one (large mode
/// numbers times a time or period fraction). `k` must be exactly
/// representable, i.e. below 2^53.
#[inline]
pub fn frac_of_product(k: f64, x: f64) -> f64 {
    let hi = k * x;
    let lo = k.mul_add(x, -hi);
    let r = (hi - hi.floor()) + lo;
    r - r.floor()
}

/// `sin(pi * k * s)` with the argument reduced modulo 2 before scaling,
/// so that integer `k * s` gives an exact zero.
#[inline]
pub fn sin_pi_product(k: f64, s: f64) -> f64 {
    let mut r = 2.0 * frac_of_product(k, 0.5 * s);
    let sign = if r >= 1.0 {
        r -= 1.0;
        -1.0
    } else {
        1.0
    };
    sign * (std::f64::consts::PI * r.min(1.0 - r)).sin()
}

#[inline]
pub fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// `n` points spaced uniformly in `log` between `lo` and `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == n {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// `n` points spaced uniformly between `lo` and `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub rms: f64,
}

/// Unweighted least-squares line through `(xs, ys)`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(QuenchError::InvalidArgument(format!(
            "fit needs paired data, got {} x and {} y values",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(QuenchError::IllConditionedFit(format!(
            "{} points cannot determine a line",
            xs.len()
        )));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(QuenchError::IllConditionedFit(
            "non-finite value in fit data".into(),
        ));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx <= 0.0 {
        return Err(QuenchError::IllConditionedFit(
            "abscissae are all equal".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    Ok(LineFit {
        slope,
        intercept,
        rms: (ss / n).sqrt(),
    })
}

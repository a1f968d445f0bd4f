//! The small-shift limit of the escape probability.
//!
//! As Δ → 0 the escape probability scaled by `8Δ²` becomes a function of
//! `ξ = t/T` alone,
//!
//! ```text
//! F(ξ) = Σ_{n≥2} n²/(1-n²)² · [1 - cos(2π n² ξ)]
//! ```
//!
//! which is periodic, symmetric about `ξ = 1/2` and dips at rational
//! `ξ = q/p²`.
//!
//! `1 - |A|²` only sees phase differences between modes, so the limit that
//! the exact escape probability actually approaches uses `n² - 1` in place
//! of `n²`; it is available as [`universal_relative_phase`].

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{QuenchError, Result};
use crate::numeric::frac_of_product;
use crate::spectral::WellConfig;
use crate::survival::SurvivalSeries;

/// Default number of terms for `F`.
pub const DEFAULT_TERMS: usize = 100_000;

/// Grid spacing of the valley test.
pub const VALLEY_PROBE: f64 = 1e-4;

#[inline]
fn weight(n: f64) -> f64 {
    let d = n * n - 1.0;
    n * n / (d * d)
}

/// `2 Σ_{n>N} n²/(n²-1)²` bounded by `2∫_N^∞`, i.e.
/// `½[1/(N-1) + 1/(N+1) + ln((N+1)/(N-1))]`.
pub fn tail_bound(terms: usize) -> f64 {
    let n = terms.max(2) as f64;
    0.5 * (1.0 / (n - 1.0) + 1.0 / (n + 1.0) + ((n + 1.0) / (n - 1.0)).ln())
}

/// `sup F = 2 Σ_{n≥2} n²/(n²-1)² = (π²/3 + 1/4)/2`.
pub fn upper_bound() -> f64 {
    0.5 * (PI * PI / 3.0 + 0.25)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniversalValue {
    pub value: f64,
    pub tail_bound: f64,
}

fn phase_sum(xi: f64, terms: usize, shift: f64) -> f64 {
    (2..=terms.max(1))
        .rev()
        .map(|n| {
            let nf = n as f64;
            let c = frac_of_product(nf * nf - shift, xi);
            let s = (PI * c).sin();
            // 1 - cos(2πc) = 2 sin²(πc)
            2.0 * weight(nf) * s * s
        })
        .sum()
}

/// `F(ξ)` truncated at `terms`, with the bound on the dropped terms.
pub fn universal_f(xi: f64, terms: usize) -> UniversalValue {
    UniversalValue {
        value: phase_sum(xi, terms, 0.0),
        tail_bound: tail_bound(terms),
    }
}

/// `Σ_{n≥2} n²/(1-n²)² [1 - cos(2π(n²-1)ξ)]`, the limit of the scaled exact
/// escape probability.
pub fn universal_relative_phase(xi: f64, terms: usize) -> UniversalValue {
    UniversalValue {
        value: phase_sum(xi, terms, 1.0),
        tail_bound: tail_bound(terms),
    }
}

/// `F` on `ξ_k = k/M`, `k = 0..M-1`, in `O(N + M log M)`.
///
/// Bucketing the weights by `n² mod M` turns the sum into one length-`M`
/// DFT with exact integer phases.
pub fn universal_f_periodic_grid(intervals: usize, terms: usize) -> Vec<f64> {
    assert!(intervals >= 1);
    let m = intervals as u64;
    let mut buckets = vec![Complex::new(0.0, 0.0); intervals];
    let mut total = 0.0;
    for n in (2..=terms.max(1) as u64).rev() {
        let w = weight(n as f64);
        total += w;
        buckets[((n * n) % m) as usize].re += w;
    }
    FftPlanner::<f64>::new()
        .plan_fft_forward(intervals)
        .process(&mut buckets);
    buckets.iter().map(|c| (total - c.re).max(0.0)).collect()
}

/// Samples of `F` on a sorted `ξ` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniversalCurve {
    pub xi_grid: Vec<f64>,
    pub values: Vec<f64>,
    pub truncation: usize,
    pub tail_bound: f64,
}

impl UniversalCurve {
    /// Direct evaluation at each grid point, in parallel.
    pub fn sample(xi_grid: &[f64], terms: usize) -> Result<Self> {
        check_sorted(xi_grid)?;
        let values = xi_grid
            .par_iter()
            .map(|&xi| universal_f(xi, terms).value)
            .collect();
        Ok(Self {
            xi_grid: xi_grid.to_vec(),
            values,
            truncation: terms,
            tail_bound: tail_bound(terms),
        })
    }

    /// `ξ_k = k/M` for `k = 0..=M`, covering `[0, 1]`.
    pub fn uniform(intervals: usize, terms: usize) -> Result<Self> {
        Self::uniform_points(intervals, intervals + 1, terms)
    }

    /// Ruler grid for [`crate::fractal::curve_length`]: spacing `ε = 1/M`
    /// and points `k = 0..=M+1`, so every two-sided difference on
    /// `m = 1..=M` is available.
    pub fn ruler_grid(epsilon: f64, terms: usize) -> Result<Self> {
        let m = intervals_for(epsilon)?;
        Self::uniform_points(m, m + 2, terms)
    }

    fn uniform_points(intervals: usize, points: usize, terms: usize) -> Result<Self> {
        if intervals == 0 {
            return Err(QuenchError::InvalidArgument(
                "need at least one interval".into(),
            ));
        }
        let periodic = universal_f_periodic_grid(intervals, terms);
        let step = 1.0 / intervals as f64;
        Ok(Self {
            xi_grid: (0..points).map(|k| k as f64 * step).collect(),
            values: (0..points).map(|k| periodic[k % intervals]).collect(),
            truncation: terms,
            tail_bound: tail_bound(terms),
        })
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Sup-norm distance to another curve on the same grid.
    pub fn sup_distance(&self, other: &UniversalCurve) -> Result<f64> {
        if self.xi_grid != other.xi_grid {
            return Err(QuenchError::GridMismatch(
                "curves use different ξ grids".into(),
            ));
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// `M` with `M·ε = 1`; rulers must divide the unit period.
pub fn intervals_for(epsilon: f64) -> Result<usize> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(QuenchError::InvalidArgument(format!(
            "ruler must lie in (0, 1], got {epsilon}"
        )));
    }
    let m = (1.0 / epsilon).round();
    if ((m * epsilon) - 1.0).abs() > 1e-9 {
        return Err(QuenchError::GridMismatch(format!(
            "ruler {epsilon} does not divide the unit period"
        )));
    }
    Ok(m as usize)
}

fn check_sorted(grid: &[f64]) -> Result<()> {
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(QuenchError::InvalidArgument(
            "ξ grid must be nonempty and sorted".into(),
        ));
    }
    Ok(())
}

/// `P_escape(ξT) / (8Δ²)` from the exact series, for comparison with `F`.
pub fn scaled_escape_limit(delta: f64, xi_grid: &[f64], modes: usize) -> Result<UniversalCurve> {
    if !(delta > 0.0) {
        return Err(QuenchError::InvalidArgument(format!(
            "scaling by 8Δ² needs Δ > 0, got {delta}"
        )));
    }
    check_sorted(xi_grid)?;
    if xi_grid.iter().any(|x| *x < 0.0) {
        return Err(QuenchError::InvalidArgument(
            "ξ grid must be non-negative".into(),
        ));
    }
    let config = WellConfig::new(delta)?;
    let series = SurvivalSeries::new(&config, modes)?;
    let scale = 8.0 * delta * delta;
    let values: Result<Vec<f64>> = xi_grid
        .par_iter()
        .map(|&xi| series.escape_at_fraction(xi).map(|p| p / scale))
        .collect();
    Ok(UniversalCurve {
        xi_grid: xi_grid.to_vec(),
        values: values?,
        truncation: modes,
        tail_bound: crate::spectral::tail_bound(
            &config,
            crate::spectral::Observable::Survival,
            modes,
        ) / scale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Valley {
    pub q: u64,
    pub p: u64,
    pub location: f64,
    pub depth: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValleyList {
    pub entries: Vec<Valley>,
}

impl ValleyList {
    pub fn contains(&self, q: u64, p: u64) -> bool {
        self.entries.iter().any(|v| v.q == q && v.p == p)
    }
}

/// Rewrites `q/p²` with the smallest square denominator `p' ≥ 2` of the
/// same value.
fn lowest_square_form(q: u64, p: u64) -> (u64, u64) {
    let (mut q, mut p) = (q, p);
    if let Some(r) = (2..=p).rev().find(|r| p % r == 0 && q % (r * r) == 0) {
        q /= r * r;
        p /= r;
    }
    if p == 1 {
        (4 * q, 2)
    } else {
        (q, p)
    }
}

/// Rational points `q/p²` in `[0, 1]` (`2 ≤ p ≤ p_max`, `q ≤ q_scan` when
/// given) where the sampled `F` is a strict local minimum against its
/// neighbours `ξ ± 10⁻⁴`.
pub fn valley_locations(p_max: u64, q_scan: Option<u64>, terms: usize) -> Result<ValleyList> {
    if p_max < 2 {
        return Err(QuenchError::InvalidArgument(format!(
            "p_max must be at least 2, got {p_max}"
        )));
    }
    let mut candidates: BTreeMap<(u64, u64), ()> = BTreeMap::new();
    for p in 2..=p_max {
        let top = q_scan.map_or(p * p, |q| q.min(p * p));
        for q in 0..=top {
            candidates.insert(lowest_square_form(q, p), ());
        }
    }
    let mut entries: Vec<Valley> = candidates
        .keys()
        .par_bridge()
        .filter_map(|&(q, p)| {
            let location = q as f64 / (p * p) as f64;
            let depth = universal_f(location, terms).value;
            let left = universal_f(location - VALLEY_PROBE, terms).value;
            let right = universal_f(location + VALLEY_PROBE, terms).value;
            (depth < left && depth < right).then_some(Valley {
                q,
                p,
                location,
                depth,
            })
        })
        .collect();
    entries.sort_by(|a, b| a.location.total_cmp(&b.location).then(a.p.cmp(&b.p)));
    Ok(ValleyList { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_at_origin_and_half_has_closed_form() {
        assert_eq!(universal_f(0.0, 1000).value, 0.0);
        // only odd n survive: 2Σ_{odd n≥3} n²/(n²-1)² = (π²/3 + 1)/8
        let closed = (PI * PI / 3.0 + 1.0) / 8.0;
        let v = universal_f(0.5, 1_000_000);
        assert!((v.value - closed).abs() <= v.tail_bound);
        assert_abs_diff_eq!(v.value, closed, epsilon = 2e-6);
        assert_abs_diff_eq!(v.value, 0.536_232_5, epsilon = 1e-6);
    }

    #[test]
    fn reflection_and_periodicity() {
        let a = universal_f(0.3, 20_000).value;
        let b = universal_f(0.7, 20_000).value;
        assert_abs_diff_eq!(a, b, epsilon = 1e-9);
        for xi in [0.013, 0.25, 0.61] {
            let v = universal_f(xi, 20_000).value;
            assert_abs_diff_eq!(universal_f(xi + 1.0, 20_000).value, v, epsilon = 1e-9);
        }
    }

    #[test]
    fn bounds_hold() {
        assert_abs_diff_eq!(tail_bound(100_000), 2e-5, epsilon = 1e-8);
        let direct: f64 = 2.0 * (2..2_000_000).rev().map(|n| weight(n as f64)).sum::<f64>();
        assert_abs_diff_eq!(upper_bound(), direct, epsilon = 2e-6);
        let curve = UniversalCurve::uniform(997, 20_000).unwrap();
        assert!(curve
            .values
            .iter()
            .all(|&v| (0.0..=upper_bound()).contains(&v)));
    }

    #[test]
    fn fft_grid_matches_direct_sum() {
        let m = 360;
        let grid = universal_f_periodic_grid(m, 5_000);
        for k in [0usize, 1, 7, 90, 120, 181, 359] {
            let direct = universal_f(k as f64 / m as f64, 5_000).value;
            assert_abs_diff_eq!(grid[k], direct, epsilon = 1e-10);
        }
    }

    #[test]
    fn ruler_grid_wraps_periodically() {
        let c = UniversalCurve::ruler_grid(0.01, 1000).unwrap();
        assert_eq!(c.xi_grid.len(), 102);
        assert_eq!(c.values[100], c.values[0]);
        assert_eq!(c.values[101], c.values[1]);
        assert!(UniversalCurve::ruler_grid(0.3, 10).is_err());
        assert!(intervals_for(0.0).is_err());
    }

    #[test]
    fn relative_phase_limit_differs_from_printed_function() {
        let f = universal_f(0.1, 20_000).value;
        let g = universal_relative_phase(0.1, 20_000).value;
        assert!((f - g).abs() > 0.1);
        assert_abs_diff_eq!(universal_relative_phase(0.0, 100).value, 0.0);
        assert_abs_diff_eq!(
            universal_relative_phase(0.2, 20_000).value,
            universal_relative_phase(0.8, 20_000).value,
            epsilon = 1e-9
        );
    }

    #[test]
    fn scaled_escape_vanishes_at_origin() {
        let c = scaled_escape_limit(1e-3, &[0.0, 0.5], 5000).unwrap();
        assert_eq!(c.values[0], 0.0);
        assert!(scaled_escape_limit(0.0, &[0.1], 10).is_err());
    }

    #[test]
    fn lowest_square_forms() {
        assert_eq!(lowest_square_form(4, 4), (1, 2));
        assert_eq!(lowest_square_form(2, 2), (2, 2));
        assert_eq!(lowest_square_form(9, 3), (4, 2));
        assert_eq!(lowest_square_form(0, 5), (0, 2));
        assert_eq!(lowest_square_form(8, 6), (2, 3));
    }

    #[test]
    fn quarter_is_a_valley() {
        let v = valley_locations(2, None, 20_000).unwrap();
        assert!(v.contains(1, 2), "{:?}", v);
        assert!(v.contains(0, 2));
        let at = universal_f(0.25, 20_000).value;
        assert!(at < universal_f(0.249, 20_000).value);
        assert!(at < universal_f(0.251, 20_000).value);
        assert!(valley_locations(1, None, 10).is_err());
    }
}

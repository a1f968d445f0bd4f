//! Mode-series representation of the quenched well.
//!
//! Before the quench the particle sits in the ground state `√2 sin(πx)` of a
//! unit-width well. At `t = 0` the right wall jumps to `L = 1 + Δ`; the state
//! is expanded in the eigenmodes `√(2/L) sin(nπx/L)` of the wider well and each
//! mode rotates with energy `(πn/L)²` (units `2m = ħ = 1`).

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QuenchError, Result};
use crate::numeric::{frac_of_product, sin_pi_product};

/// Half-width of the window around `n/L = 1` where the coefficient formula
/// is replaced by its local expansion.
pub const SINGULAR_WINDOW: f64 = 1e-6;

/// Hard cap on the number of modes [`truncation_for_tolerance`] may return.
pub const DEFAULT_MODE_CAP: usize = 1_000_000;

/// Geometry of the sudden wall shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WellConfig {
    delta: f64,
    width: f64,
    period: f64,
}

impl WellConfig {
    pub fn new(delta: f64) -> Result<Self> {
        if !delta.is_finite() || delta < 0.0 {
            return Err(QuenchError::InvalidDelta(delta));
        }
        let width = 1.0 + delta;
        Ok(Self {
            delta,
            width,
            period: 2.0 * width * width / PI,
        })
    }

    /// Wall shift Δ.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Expanded width `L = 1 + Δ`.
    pub fn width(&self) -> f64 {
        self.width
    }

    /// Revival period `T = 2L²/π`.
    pub fn period(&self) -> f64 {
        self.period
    }

    /// Energy `(πn/L)²` of mode `n` in the expanded well.
    pub fn energy(&self, n: usize) -> f64 {
        let k = PI * n as f64 / self.width;
        k * k
    }
}

/// Overlap `a_n` of the initial state with mode `n` of the expanded well.
///
/// Uses `sin(πn/L) = (-1)^(n+1) sin(πnΔ/L)` and `L - n` formed from the
/// integer part first, which keeps full relative precision for small Δ.
pub fn mode_coefficient(config: &WellConfig, n: usize) -> f64 {
    assert!(n >= 1, "mode index starts at 1");
    let l = config.width();
    let nf = n as f64;
    let gap = (1.0 - nf) + config.delta();
    if gap.abs() < SINGULAR_WINDOW * l {
        // u = n/L = 1 + h:  sin(πu)/(1-u²) = (π/2)(1 - h/2 + (1/4 - π²/6)h² + ...)
        let h = -gap / l;
        return (1.0 - 0.5 * h + (0.25 - PI * PI / 6.0) * h * h) / l.sqrt();
    }
    let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
    let s = sign * sin_pi_product(nf, config.delta() / l);
    // 1 - u² = (L - n)(L + n)/L²
    2.0 / (PI * l.sqrt()) * s * l * l / (gap * (l + nf))
}

/// Truncated expansion coefficients `a_1..a_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeCoefficients {
    config: WellConfig,
    values: Vec<f64>,
}

impl ModeCoefficients {
    pub fn new(config: &WellConfig, modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(QuenchError::InvalidArgument(
                "need at least one mode".into(),
            ));
        }
        let values = (1..=modes)
            .into_par_iter()
            .map(|n| mode_coefficient(config, n))
            .collect();
        Ok(Self {
            config: *config,
            values,
        })
    }

    pub fn config(&self) -> &WellConfig {
        &self.config
    }

    /// `a_1..a_N`; index 0 holds `a_1`.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn truncation(&self) -> usize {
        self.values.len()
    }

    /// `1 - Σ a_n²` over the retained modes, summed smallest first.
    pub fn completeness_deficit(&self) -> f64 {
        1.0 - self.values.iter().rev().map(|a| a * a).sum::<f64>()
    }
}

/// Series whose truncation error [`truncation_for_tolerance`] bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// Completeness deficit `Σ_{n>N} a_n²`.
    Coefficients,
    /// Escape/survival probability, `|ΔP| ≤ 4 Σ_{n>N} a_n²`.
    Survival,
    /// Pointwise wavefunction, terms decaying only like `n⁻²`.
    Wavefunction,
}

fn min_modes(config: &WellConfig) -> usize {
    (config.width().floor() as usize + 1).max(2)
}

/// Rigorous bound on the part of the `observable` series beyond mode `modes`.
///
/// From `a_n² ≤ 4L³ / (π² (n² - L²)²)` and integral comparison on
/// `[N, ∞)`, valid for `N > L`. Returns infinity otherwise.
pub fn tail_bound(config: &WellConfig, observable: Observable, modes: usize) -> f64 {
    let l = config.width();
    let n = modes as f64;
    if n <= l {
        return f64::INFINITY;
    }
    let shrink = 1.0 - (l / n) * (l / n);
    match observable {
        Observable::Coefficients => 4.0 * l.powi(3) / (3.0 * PI * PI * n.powi(3) * shrink * shrink),
        Observable::Survival => 4.0 * tail_bound(config, Observable::Coefficients, modes),
        Observable::Wavefunction => 2.0 * 2f64.sqrt() * l / (PI * shrink * n),
    }
}

/// Smallest mode count whose tail bound is below `tol`, capped at
/// [`DEFAULT_MODE_CAP`].
pub fn truncation_for_tolerance(
    config: &WellConfig,
    observable: Observable,
    tol: f64,
) -> Result<usize> {
    truncation_for_tolerance_capped(config, observable, tol, DEFAULT_MODE_CAP)
}

pub fn truncation_for_tolerance_capped(
    config: &WellConfig,
    observable: Observable,
    tol: f64,
    cap: usize,
) -> Result<usize> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(QuenchError::InvalidArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let lo_start = min_modes(config);
    if lo_start > cap || tail_bound(config, observable, cap) > tol {
        return Err(QuenchError::TruncationCap { tol, cap });
    }
    if tail_bound(config, observable, lo_start) <= tol {
        return Ok(lo_start);
    }
    // bracket then bisect: bound(lo) > tol >= bound(hi)
    let mut lo = lo_start;
    let mut hi = lo_start;
    while tail_bound(config, observable, hi) > tol {
        lo = hi;
        hi = (hi * 2).min(cap);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if tail_bound(config, observable, mid) <= tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn check_coeffs(config: &WellConfig, coeffs: &ModeCoefficients) -> Result<()> {
    if coeffs.config() != config {
        return Err(QuenchError::InvalidArgument(
            "coefficients were computed for a different well".into(),
        ));
    }
    Ok(())
}

fn check_position(config: &WellConfig, x: f64) -> Result<()> {
    if !(0.0..=config.width()).contains(&x) {
        return Err(QuenchError::Domain {
            what: "x",
            value: x,
            lo: 0.0,
            hi: config.width(),
        });
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(QuenchError::Domain {
            what: "t",
            value: t,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    Ok(())
}

/// Rotated mode amplitudes `√(2/L) a_n e^{-i(πn/L)² t}`.
///
/// The phase is `2π n² (t/T)` reduced modulo one cycle, so `t = T` returns
/// the `t = 0` amplitudes exactly.
fn rotated_amplitudes(coeffs: &ModeCoefficients, t: f64) -> Vec<Complex64> {
    let config = coeffs.config();
    let tau = t / config.period();
    let norm = (2.0 / config.width()).sqrt();
    coeffs
        .values()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let n = (i + 1) as f64;
            let theta = 2.0 * PI * frac_of_product(n * n, tau);
            Complex64::new(theta.cos(), -theta.sin()) * (norm * a)
        })
        .collect()
}

/// `ψ(x, t)` from the truncated mode series.
pub fn wavefunction(
    config: &WellConfig,
    coeffs: &ModeCoefficients,
    x: f64,
    t: f64,
) -> Result<Complex64> {
    check_coeffs(config, coeffs)?;
    check_position(config, x)?;
    check_time(t)?;
    let s = x / config.width();
    let amps = rotated_amplitudes(coeffs, t);
    Ok(amps
        .iter()
        .enumerate()
        .rev()
        .map(|(i, c)| c * sin_pi_product((i + 1) as f64, s))
        .sum())
}

/// `ψ(x, t)` at every point of `xs`.
pub fn wavefunction_on_grid(
    config: &WellConfig,
    coeffs: &ModeCoefficients,
    xs: &[f64],
    t: f64,
) -> Result<Vec<Complex64>> {
    check_coeffs(config, coeffs)?;
    check_time(t)?;
    for &x in xs {
        check_position(config, x)?;
    }
    let amps = rotated_amplitudes(coeffs, t);
    let l = config.width();
    Ok(xs
        .par_iter()
        .map(|&x| {
            let s = x / l;
            amps.iter()
                .enumerate()
                .rev()
                .map(|(i, c)| c * sin_pi_product((i + 1) as f64, s))
                .sum()
        })
        .collect())
}

/// `|ψ(x, t)|²` sampled on a rectangular grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    pub x_grid: Vec<f64>,
    pub t_grid: Vec<f64>,
    /// Row-major, one row per time.
    pub values: Vec<f64>,
}

impl DensityField {
    pub fn at(&self, ti: usize, xi: usize) -> f64 {
        self.values[ti * self.x_grid.len() + xi]
    }

    pub fn row(&self, ti: usize) -> &[f64] {
        let nx = self.x_grid.len();
        &self.values[ti * nx..(ti + 1) * nx]
    }

    /// Trapezoidal `∫ |ψ|² dx` over the x grid at time index `ti`.
    pub fn norm(&self, ti: usize) -> f64 {
        let row = self.row(ti);
        self.x_grid
            .windows(2)
            .zip(row.windows(2))
            .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1]))
            .sum()
    }

    /// Largest absolute difference between two rows.
    pub fn row_distance(&self, a: usize, b: usize) -> f64 {
        self.row(a)
            .iter()
            .zip(self.row(b))
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max)
    }
}

fn check_sorted(what: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(QuenchError::InvalidArgument(format!(
            "{what} grid is empty"
        )));
    }
    if grid.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(QuenchError::InvalidArgument(format!(
            "{what} grid must be sorted"
        )));
    }
    Ok(())
}

/// Probability density on `x_grid × t_grid`. Rows are evaluated in parallel
/// and assembled in time order.
pub fn density_field(
    config: &WellConfig,
    coeffs: &ModeCoefficients,
    x_grid: &[f64],
    t_grid: &[f64],
) -> Result<DensityField> {
    check_coeffs(config, coeffs)?;
    check_sorted("x", x_grid)?;
    check_sorted("t", t_grid)?;
    for &x in x_grid {
        check_position(config, x)?;
    }
    for &t in t_grid {
        check_time(t)?;
    }
    let modes = coeffs.truncation();
    let l = config.width();
    let sines: Vec<f64> = x_grid
        .par_iter()
        .flat_map_iter(|&x| {
            let s = x / l;
            (1..=modes).map(move |n| sin_pi_product(n as f64, s))
        })
        .collect();
    let values = t_grid
        .par_iter()
        .flat_map_iter(|&t| {
            let amps = rotated_amplitudes(coeffs, t);
            let sines = &sines;
            (0..x_grid.len()).map(move |xi| {
                let row = &sines[xi * modes..(xi + 1) * modes];
                let psi: Complex64 = amps.iter().zip(row).rev().map(|(c, s)| c * s).sum();
                psi.norm_sqr()
            })
        })
        .collect();
    Ok(DensityField {
        x_grid: x_grid.to_vec(),
        t_grid: t_grid.to_vec(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn well(delta: f64) -> WellConfig {
        WellConfig::new(delta).unwrap()
    }

    /// Composite Simpson quadrature of `2/√L ∫₀¹ sin(πx) sin(nπx/L) dx`.
    fn overlap_by_quadrature(config: &WellConfig, n: usize) -> f64 {
        let m = 20_000;
        let h = 1.0 / m as f64;
        let f = |x: f64| (PI * x).sin() * (n as f64 * PI * x / config.width()).sin();
        let mut acc = f(0.0) + f(1.0);
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(i as f64 * h);
        }
        2.0 / config.width().sqrt() * acc * h / 3.0
    }

    #[test]
    fn config_derives_width_and_period() {
        let c = well(0.2);
        assert_eq!(c.width(), 1.2);
        assert_abs_diff_eq!(c.period(), 2.0 * 1.44 / PI, epsilon = 1e-15);
        assert_abs_diff_eq!(c.period(), 0.9167, epsilon = 1e-4);
        assert!(WellConfig::new(-0.1).is_err());
        assert!(WellConfig::new(f64::NAN).is_err());
        assert!(WellConfig::new(0.0).is_ok());
    }

    #[test]
    fn unshifted_well_is_its_own_eigenbasis() {
        let c = well(0.0);
        assert_abs_diff_eq!(mode_coefficient(&c, 1), 1.0, epsilon = 1e-15);
        for n in 2..20 {
            assert_abs_diff_eq!(mode_coefficient(&c, n), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn coefficient_matches_quadrature() {
        let c = well(0.2);
        let q = overlap_by_quadrature(&c, 1);
        assert_abs_diff_eq!(q, 0.9510, epsilon = 1e-4);
        for n in 1..12 {
            assert_abs_diff_eq!(
                mode_coefficient(&c, n),
                overlap_by_quadrature(&c, n),
                epsilon = 1e-10
            );
        }
    }

    #[test]
    fn singular_mode_takes_limit_value() {
        // n/L = 1 exactly for n = 2, Δ = 1 and n = 4, Δ = 3
        for (delta, n) in [(1.0, 2), (3.0, 4)] {
            let c = well(delta);
            assert_abs_diff_eq!(
                mode_coefficient(&c, n),
                1.0 / c.width().sqrt(),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn coefficient_continuous_across_window() {
        for n in [2usize, 3, 5] {
            let l_at = n as f64;
            for side in [-1.0, 1.0] {
                let inside = well(l_at * (1.0 + side * 0.99e-6) - 1.0);
                let outside = well(l_at * (1.0 + side * 1.01e-6) - 1.0);
                let a = mode_coefficient(&inside, n);
                let b = mode_coefficient(&outside, n);
                assert!(((a - b) / b).abs() < 1e-6, "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn completeness_improves_with_modes() {
        for delta in [0.003, 0.05, 0.2] {
            let c = well(delta);
            let n = truncation_for_tolerance(&c, Observable::Coefficients, 1e-6).unwrap();
            let coeffs = ModeCoefficients::new(&c, n).unwrap();
            let deficit = coeffs.completeness_deficit();
            assert!((-1e-14..1e-6).contains(&deficit), "Δ={delta}: {deficit}");
            let mut prev = f64::INFINITY;
            for m in [2, 5, 20, 100, 1000] {
                let d = ModeCoefficients::new(&c, m).unwrap().completeness_deficit();
                assert!(d <= prev);
                prev = d;
            }
        }
    }

    #[test]
    fn tail_bound_dominates_actual_tail() {
        let c = well(0.2);
        let all = ModeCoefficients::new(&c, 200_000).unwrap();
        let a = all.values();
        for n in [2usize, 10, 100, 1000] {
            let actual: f64 = a[n..].iter().rev().map(|v| v * v).sum();
            let bound = tail_bound(&c, Observable::Coefficients, n);
            assert!(actual <= bound, "N={n}: {actual} > {bound}");
            let pointwise: f64 =
                a[n..].iter().rev().map(|v| v.abs()).sum::<f64>() * (2.0 / c.width()).sqrt();
            assert!(pointwise <= tail_bound(&c, Observable::Wavefunction, n));
        }
    }

    #[test]
    fn truncation_examples() {
        let c = well(0.003);
        let n = truncation_for_tolerance(&c, Observable::Survival, 1e-6).unwrap();
        assert!(tail_bound(&c, Observable::Survival, n) < 1e-6);
        assert!(tail_bound(&c, Observable::Survival, n - 1) >= 1e-6);
        // independent arithmetic: 16 L³/(3π² N³) with the N > L shrink factor
        let l: f64 = 1.003;
        let direct = |n: f64| {
            16.0 * l.powi(3) / (3.0 * PI * PI * n.powi(3) * (1.0 - (l / n).powi(2)).powi(2))
        };
        assert!(direct(n as f64) < 1e-6 && direct(n as f64 - 1.0) >= 1e-6);

        assert_eq!(
            truncation_for_tolerance(&c, Observable::Survival, 1.0).unwrap(),
            2
        );

        let capped =
            truncation_for_tolerance_capped(&c, Observable::Wavefunction, 1e-12, 1_000_000);
        assert!(matches!(capped, Err(QuenchError::TruncationCap { .. })));
        let n =
            truncation_for_tolerance_capped(&c, Observable::Survival, 1e-12, 1_000_000).unwrap();
        assert!(n <= 1_000_000);
        assert!(truncation_for_tolerance(&c, Observable::Survival, 0.0).is_err());
    }

    #[test]
    fn truncation_monotone_in_tolerance() {
        let c = well(0.05);
        let mut prev = 0;
        for k in 0..12 {
            let tol = 10f64.powi(-k);
            let n = truncation_for_tolerance(&c, Observable::Survival, tol).unwrap();
            assert!(n >= prev);
            prev = n;
        }
    }

    #[test]
    fn wavefunction_boundaries_and_initial_state() {
        let c = well(0.2);
        let coeffs = ModeCoefficients::new(&c, 4000).unwrap();
        for t in [0.0, 0.01, 0.3] {
            assert_eq!(wavefunction(&c, &coeffs, 0.0, t).unwrap().norm(), 0.0);
            assert_eq!(wavefunction(&c, &coeffs, c.width(), t).unwrap().norm(), 0.0);
        }
        let psi = wavefunction(&c, &coeffs, 0.5, 0.0).unwrap();
        assert_abs_diff_eq!(psi.re, 2f64.sqrt(), epsilon = 1e-4);
        assert_abs_diff_eq!(psi.im, 0.0, epsilon = 1e-12);
        let beyond = wavefunction(&c, &coeffs, 1.1, 0.0).unwrap();
        assert_abs_diff_eq!(beyond.norm(), 0.0, epsilon = 1e-3);
        assert!(matches!(
            wavefunction(&c, &coeffs, 1.3, 0.0),
            Err(QuenchError::Domain { .. })
        ));
        assert!(wavefunction(&c, &coeffs, 0.5, -1.0).is_err());
        let other = ModeCoefficients::new(&well(0.1), 10).unwrap();
        assert!(wavefunction(&c, &other, 0.5, 0.0).is_err());
    }

    #[test]
    fn density_field_revives_and_stays_normalised() {
        let c = well(0.2);
        let coeffs = ModeCoefficients::new(&c, 2000).unwrap();
        let xs = crate::numeric::linear_grid(0.0, c.width(), 241);
        let ts = vec![0.0, 0.1, 0.37, c.period()];
        let field = density_field(&c, &coeffs, &xs, &ts).unwrap();
        assert_abs_diff_eq!(field.at(0, 100), 2.0, epsilon = 1e-3); // x = 0.5
        for ti in 0..ts.len() {
            assert_eq!(field.at(ti, 0), 0.0);
            assert_eq!(field.at(ti, 240), 0.0);
            assert!(field.row(ti).iter().all(|&v| v >= 0.0));
            assert_abs_diff_eq!(field.norm(ti), 1.0, epsilon = 1e-3);
        }
        assert!(field.row_distance(0, 3) < 1e-12);
    }

    #[test]
    fn density_rejects_unsorted_grids() {
        let c = well(0.2);
        let coeffs = ModeCoefficients::new(&c, 10).unwrap();
        assert!(density_field(&c, &coeffs, &[0.5, 0.1], &[0.0]).is_err());
        assert!(density_field(&c, &coeffs, &[0.1], &[]).is_err());
        assert!(density_field(&c, &coeffs, &[0.1, 2.0], &[0.0]).is_err());
    }
}

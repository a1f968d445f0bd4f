//! Survival amplitude, escape probability and its short-time laws.
//!
//! Before the wavefront reaches the displaced wall (`t ≪ Δ²`) the escape
//! probability grows like free-space leakage, `∝ t^{3/2}`; afterwards the
//! reflections slow it to `∝ Δ² t^{1/2}`. The two closed-form laws cross at
//! `t = 3Δ²`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QuenchError, Result};
use crate::numeric::{fit_line, frac_of_product, log_grid, sin_pi_product};
use crate::oracle::quadrature::{quadrature_with, Domain, Integrand};
use crate::spectral::{ModeCoefficients, WellConfig};

/// Violations of `[0, 1]` up to this size are rounding and get clamped.
pub const PROBABILITY_NOISE: f64 = 1e-12;

/// Relative error target for [`escape_integral`].
pub const INTEGRAL_REL_TOL: f64 = 1e-7;

/// `(8/3) π^{3/2} / √2`, coefficient of the `t^{3/2}` law.
pub fn free_coefficient() -> f64 {
    8.0 / 3.0 * PI.powf(1.5) / 2f64.sqrt()
}

/// `8 π^{3/2} / √2`, coefficient of the `Δ² t^{1/2}` law.
pub fn confined_coefficient() -> f64 {
    8.0 * PI.powf(1.5) / 2f64.sqrt()
}

/// Weights `a_n²` for a fixed well and truncation, reused across times.
#[derive(Debug, Clone)]
pub struct SurvivalSeries {
    config: WellConfig,
    weights: Vec<f64>,
}

impl SurvivalSeries {
    pub fn new(config: &WellConfig, modes: usize) -> Result<Self> {
        Ok(Self::from_coefficients(&ModeCoefficients::new(
            config, modes,
        )?))
    }

    pub fn from_coefficients(coeffs: &ModeCoefficients) -> Self {
        Self {
            config: *coeffs.config(),
            weights: coeffs.values().iter().map(|a| a * a).collect(),
        }
    }

    pub fn config(&self) -> &WellConfig {
        &self.config
    }

    pub fn truncation(&self) -> usize {
        self.weights.len()
    }

    /// `Σ_{n≤N} a_n² e^{-i(πn/L)² t}`.
    pub fn amplitude(&self, t: f64) -> Result<Complex64> {
        check_time(t)?;
        let tau = t / self.config.period();
        Ok(self
            .weights
            .iter()
            .enumerate()
            .rev()
            .map(|(i, w)| {
                let n = (i + 1) as f64;
                let theta = 2.0 * PI * frac_of_product(n * n, tau);
                Complex64::new(theta.cos(), -theta.sin()) * w
            })
            .sum())
    }

    /// `1 - |A(t)|²`; see [`SurvivalSeries::escape_at_fraction`].
    pub fn escape(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        self.escape_at_fraction(t / self.config.period())
            .map_err(|e| match e {
                QuenchError::TruncationInconsistent { value, modes, .. } => {
                    QuenchError::TruncationInconsistent { t, value, modes }
                }
                other => other,
            })
    }

    /// Escape probability at `t = τT`.
    ///
    /// The global phase of mode 1 is removed and completeness is used to
    /// write `A e^{iE₁t} = 1 + Σ_{n≥2} a_n² (e^{-iφ_n} - 1)` with
    /// `φ_n = 2π(n² - 1)τ`. Then `1 - |1 + S|² = -2 Re S - |S|²` has no
    /// cancellation at short times.
    pub fn escape_at_fraction(&self, tau: f64) -> Result<f64> {
        let (mut re, mut im) = (0.0, 0.0);
        for (i, w) in self.weights.iter().enumerate().skip(1).rev() {
            let n = (i + 1) as f64;
            let cycles = frac_of_product(n * n - 1.0, tau);
            let half = PI * cycles;
            let s = half.sin();
            re -= 2.0 * w * s * s;
            im -= w * (2.0 * half).sin();
        }
        let p = -2.0 * re - (re * re + im * im);
        if !(-PROBABILITY_NOISE..=1.0 + PROBABILITY_NOISE).contains(&p) {
            return Err(QuenchError::TruncationInconsistent {
                t: tau * self.config.period(),
                value: p,
                modes: self.truncation(),
            });
        }
        Ok(p.clamp(0.0, 1.0))
    }
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

pub fn survival_amplitude(config: &WellConfig, t: f64, modes: usize) -> Result<Complex64> {
    SurvivalSeries::new(config, modes)?.amplitude(t)
}

pub fn escape_probability_exact(config: &WellConfig, t: f64, modes: usize) -> Result<f64> {
    SurvivalSeries::new(config, modes)?.escape(t)
}

/// Small-shift form `(16/π²) Σ_{n=2}^N sin²(πnΔ) sin²((πn)² t/2) / n⁴`.
pub fn escape_small_delta(config: &WellConfig, t: f64, modes: usize) -> Result<f64> {
    check_time(t)?;
    let delta = config.delta();
    // (πn)² t/2 = π · n² (πt/2)
    let chirp = 0.5 * PI * t;
    let sum: f64 = (2..=modes.max(1))
        .rev()
        .map(|n| {
            let nf = n as f64;
            let a = sin_pi_product(nf, delta);
            let b = sin_pi_product(nf * nf, chirp);
            let n2 = nf * nf;
            a * a * b * b / (n2 * n2)
        })
        .sum();
    Ok(16.0 / (PI * PI) * sum)
}

/// Continuum form `16π t^{3/2} ∫₀^∞ sin²(yΔ/√t) sin²(y²/2) / y⁴ dy`.
pub fn escape_integral(delta: f64, t: f64) -> Result<f64> {
    if !delta.is_finite() || delta < 0.0 {
        return Err(QuenchError::InvalidDelta(delta));
    }
    check_time(t)?;
    if t == 0.0 || delta == 0.0 {
        return Ok(0.0);
    }
    let ratio = delta / t.sqrt();
    let r = quadrature_with(
        Integrand::EscapeKernel { ratio },
        Domain::HalfLine { lo: 0.0 },
        0.0,
        INTEGRAL_REL_TOL,
    )?;
    Ok(16.0 * PI * t.powf(1.5) * r.value)
}

/// Free-space law `(8/3)(π^{3/2}/√2) t^{3/2}` for `t ≪ Δ²`.
pub fn asymptote_free(t: f64) -> f64 {
    free_coefficient() * t.powf(1.5)
}

/// Confined law `8Δ² (π^{3/2}/√2) t^{1/2}` for `Δ² ≪ t ≪ 1`.
pub fn asymptote_confined(delta: f64, t: f64) -> f64 {
    confined_coefficient() * delta * delta * t.sqrt()
}

/// Time at which the two laws are equal.
pub fn transition_time(delta: f64) -> f64 {
    3.0 * delta * delta
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    SmallDelta,
    Integral,
    AsymptoteFree,
    AsymptoteConfined,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::SmallDelta => "small_delta",
            Method::Integral => "integral",
            Method::AsymptoteFree => "asymptote_free",
            Method::AsymptoteConfined => "asymptote_confined",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesMeta {
    pub method: Method,
    pub modes: Option<usize>,
    pub config: WellConfig,
}

/// A sampled observable with strictly increasing times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
    meta: SeriesMeta,
}

impl TimeSeries {
    pub fn new(
        times: Vec<f64>,
        values: Vec<f64>,
        meta: SeriesMeta,
        probability: bool,
    ) -> Result<Self> {
        if times.len() != values.len() {
            return Err(QuenchError::InvalidArgument(
                "times and values differ in length".into(),
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(QuenchError::InvalidArgument(
                "times must be strictly increasing".into(),
            ));
        }
        if probability && values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(QuenchError::InvalidArgument(
                "probability series has values outside [0, 1]".into(),
            ));
        }
        Ok(Self {
            times,
            values,
            meta,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn meta(&self) -> &SeriesMeta {
        &self.meta
    }

    /// `(t, value, method, N)` rows.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, Method, Option<usize>)> + '_ {
        self.times
            .iter()
            .zip(&self.values)
            .map(move |(&t, &v)| (t, v, self.meta.method, self.meta.modes))
    }
}

/// Evaluates `method` at every time in parallel; output order follows `times`.
pub fn escape_series(
    config: &WellConfig,
    times: &[f64],
    method: Method,
    modes: usize,
) -> Result<TimeSeries> {
    let series = match method {
        Method::Exact => Some(SurvivalSeries::new(config, modes)?),
        _ => None,
    };
    let values: Result<Vec<f64>> = times
        .par_iter()
        .map(|&t| match method {
            Method::Exact => series.as_ref().expect("built above").escape(t),
            Method::SmallDelta => escape_small_delta(config, t, modes),
            Method::Integral => escape_integral(config.delta(), t),
            Method::AsymptoteFree => {
                check_time(t)?;
                Ok(asymptote_free(t))
            }
            Method::AsymptoteConfined => {
                check_time(t)?;
                Ok(asymptote_confined(config.delta(), t))
            }
        })
        .collect();
    let uses_modes = matches!(method, Method::Exact | Method::SmallDelta);
    TimeSeries::new(
        times.to_vec(),
        values?,
        SeriesMeta {
            method,
            modes: uses_modes.then_some(modes),
            config: *config,
        },
        matches!(
            method,
            Method::Exact | Method::SmallDelta | Method::Integral
        ),
    )
}

/// Log-log power-law fits in the two short-time windows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub delta: f64,
    /// `3Δ²`.
    pub transition_time: f64,
    pub slope_early: f64,
    pub slope_late: f64,
    /// `C` in `P ≈ C t^{3/2}` over the early window.
    pub prefactor_early: f64,
    /// `C` in `P ≈ C t^{1/2}` over the late window (includes the `Δ²`).
    pub prefactor_late: f64,
}

/// Fit of `P ≈ C t^k`: free slope, and `C` with the exponent held at `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub prefactor: f64,
    pub rms: f64,
}

pub fn fit_power_law(times: &[f64], values: &[f64], exponent: f64) -> Result<PowerLawFit> {
    if values.iter().any(|v| !(*v > 0.0)) {
        return Err(QuenchError::IllConditionedFit(
            "power-law fit needs positive values".into(),
        ));
    }
    let lx: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let fit = fit_line(&lx, &ly)?;
    let log_c = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| y - exponent * x)
        .sum::<f64>()
        / lx.len() as f64;
    Ok(PowerLawFit {
        slope: fit.slope,
        prefactor: log_c.exp(),
        rms: fit.rms,
    })
}

/// Samples per window used by [`regime_report`].
pub const REGIME_SAMPLES: usize = 16;

pub fn regime_report(
    delta: f64,
    early_window: (f64, f64),
    late_window: (f64, f64),
    modes: usize,
) -> Result<RegimeReport> {
    regime_report_with(delta, early_window, late_window, modes, REGIME_SAMPLES)
}

pub fn regime_report_with(
    delta: f64,
    early_window: (f64, f64),
    late_window: (f64, f64),
    modes: usize,
    samples: usize,
) -> Result<RegimeReport> {
    if samples < 5 {
        return Err(QuenchError::IllConditionedFit(format!(
            "{samples} samples per window, need at least 5"
        )));
    }
    for (lo, hi) in [early_window, late_window] {
        if !(lo > 0.0 && hi > lo) {
            return Err(QuenchError::InvalidArgument(format!(
                "fit window [{lo}, {hi}] must be positive and non-empty"
            )));
        }
    }
    let config = WellConfig::new(delta)?;
    let series = SurvivalSeries::new(&config, modes)?;
    let fit = |(lo, hi): (f64, f64), k: f64| -> Result<PowerLawFit> {
        let ts = log_grid(lo, hi, samples);
        let ps: Result<Vec<f64>> = ts.par_iter().map(|&t| series.escape(t)).collect();
        fit_power_law(&ts, &ps?, k)
    };
    let early = fit(early_window, 1.5)?;
    let late = fit(late_window, 0.5)?;
    Ok(RegimeReport {
        delta,
        transition_time: transition_time(delta),
        slope_early: early.slope,
        slope_late: late.slope,
        prefactor_early: early.prefactor,
        prefactor_late: late.prefactor,
    })
}

/// Central log-log derivative `d ln P / d ln t` at the interior points of
/// `times`; returns `(t_i, slope_i)` pairs.
pub fn local_loglog_slopes(series: &SurvivalSeries, times: &[f64]) -> Result<Vec<(f64, f64)>> {
    let ps: Result<Vec<f64>> = times.par_iter().map(|&t| series.escape(t)).collect();
    let ps = ps?;
    Ok((1..times.len().saturating_sub(1))
        .map(|i| {
            let s = (ps[i + 1].ln() - ps[i - 1].ln()) / (times[i + 1].ln() - times[i - 1].ln());
            (times[i], s)
        })
        .collect())
}

//! Adaptive Gauss–Kronrod quadrature and the chirped integrals behind the
//! short-time escape laws.
//!
//! Every integrand here carries a `sin²(y²/2)` factor whose oscillation
//! period shrinks like `π/y`. On `[0, Y]` the range is split at the zeros
//! `y = √(2πk)` beyond `y = 3`, and the tail beyond `Y` is written as
//! `(1 - cos y²)/2` times the remaining factor: the non-chirped half is
//! integrated (or known in closed form) and the chirped half is bounded by
//! one integration by parts, `|∫_Y^∞ cos(y²) y^{-p} dy| ≤ Y^{-p-1}`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{QuenchError, Result};
use crate::numeric::sinc;

/// Where the chirped panels stop and the tail treatment takes over.
pub const CHIRP_CUTOFF: f64 = 200.0;

/// Default cap on adaptive subintervals.
pub const MAX_INTERVALS: usize = 400_000;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_014_396,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// 10-point Gauss weights for the odd-indexed Kronrod nodes
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// 21-point Kronrod estimate on `[a, b]` with `|K21 - G10|` as its error.
fn gauss_kronrod_21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[10] * fc;
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    /// Estimated absolute error (quadrature estimate plus any analytic tail bound).
    pub error: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Globally adaptive quadrature over `[breaks[0], breaks.last()]`.
///
/// Starts from the panels given by `breaks` and bisects the panel with the
/// largest error estimate until the total error is within
/// `max(abs_tol, rel_tol·|value|)`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<QuadratureResult> {
    if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(QuenchError::InvalidArgument(
            "quadrature breakpoints must be strictly increasing".into(),
        ));
    }
    let mut heap: BinaryHeap<Segment> = breaks
        .windows(2)
        .map(|w| {
            let (value, error) = gauss_kronrod_21(&f, w[0], w[1]);
            Segment {
                a: w[0],
                b: w[1],
                value,
                error,
            }
        })
        .collect();
    let mut total: f64 = heap.iter().map(|s| s.value).sum();
    let mut err: f64 = heap.iter().map(|s| s.error).sum();

    while err > abs_tol.max(rel_tol * total.abs()) {
        if heap.len() >= max_intervals {
            return Err(QuenchError::NonConvergence {
                estimate: total,
                error: err,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(QuenchError::NonConvergence {
                estimate: total,
                error: err,
                intervals: heap.len() + 1,
            });
        }
        let (lv, le) = gauss_kronrod_21(&f, worst.a, mid);
        let (rv, re) = gauss_kronrod_21(&f, mid, worst.b);
        total += lv + rv - worst.value;
        err += le + re - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: lv,
            error: le,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: rv,
            error: re,
        });
    }

    // deterministic final sum in position order
    let mut segments = heap.into_vec();
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok(QuadratureResult {
        value: segments.iter().map(|s| s.value).sum(),
        error: segments.iter().map(|s| s.error).sum(),
        intervals: segments.len(),
    })
}

/// The integrands the short-time analysis needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrand {
    Zero,
    /// `sin²(y²/2) / y⁴`, the `t^{3/2}` (free-space) constant.
    FreeRegime,
    /// `sin²(y²/2) / y²`, the `t^{1/2}` (confined) constant.
    ConfinedRegime,
    /// `sin²(a y) sin²(y²/2) / y⁴` with `a = Δ/√t`.
    EscapeKernel {
        ratio: f64,
    },
}

impl Integrand {
    pub fn eval(&self, y: f64) -> f64 {
        let chirp = sinc(0.5 * y * y);
        match *self {
            Integrand::Zero => 0.0,
            Integrand::FreeRegime => 0.25 * chirp * chirp,
            Integrand::ConfinedRegime => 0.25 * y * y * chirp * chirp,
            Integrand::EscapeKernel { ratio } => {
                let s = ratio * sinc(ratio * y);
                0.25 * s * s * y * y * chirp * chirp
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Finite { lo: f64, hi: f64 },
    HalfLine { lo: f64 },
}

/// Panel edges on `[lo, hi]`: `lo`, `3`, the zeros `√(2πk)` of `sin(y²/2)`
/// beyond 3, and `hi`.
fn chirp_breaks(lo: f64, hi: f64) -> Vec<f64> {
    let mut breaks = vec![lo];
    if lo < 3.0 && hi > 3.0 {
        breaks.push(3.0);
    }
    let start = lo.max(3.0);
    let mut k = ((start * start) / (2.0 * PI)).floor() as u64 + 1;
    loop {
        let z = (2.0 * PI * k as f64).sqrt();
        if z >= hi {
            break;
        }
        if z > *breaks.last().unwrap() {
            breaks.push(z);
        }
        k += 1;
    }
    if hi > *breaks.last().unwrap() {
        breaks.push(hi);
    }
    breaks
}

/// `∫_{z0}^∞ sin²z / z⁴ dz` for `z0 > 0`, with its error bound.
fn sine_square_tail(z0: f64, rel_tol: f64) -> Result<(f64, f64)> {
    let span = 400.0 * PI;
    let z1 = z0 + span;
    let mut breaks = vec![z0];
    let mut k = (z0 / PI).floor() + 1.0;
    while k * PI < z1 {
        breaks.push(k * PI);
        k += 1.0;
    }
    breaks.push(z1);
    let f = |z: f64| {
        let s = sinc(z);
        s * s / (z * z)
    };
    let body = integrate_adaptive(f, &breaks, 0.0, rel_tol, MAX_INTERVALS)?;
    // ∫_{z1}^∞ (1 - cos 2z)/(2z⁴), the cosine half bounded by z1⁻⁴/2
    let rest = 1.0 / (6.0 * z1.powi(3));
    Ok((body.value + rest, body.error + 0.5 / z1.powi(4)))
}

fn half_line(
    integrand: Integrand,
    lo: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadratureResult> {
    if lo < 0.0 {
        return Err(QuenchError::InvalidArgument(format!(
            "half-line integrals start at y >= 0, got {lo}"
        )));
    }
    if let Integrand::EscapeKernel { ratio } = integrand {
        if ratio == 0.0 {
            return Ok(QuadratureResult {
                value: 0.0,
                error: 0.0,
                intervals: 0,
            });
        }
    }
    if integrand == Integrand::Zero {
        return Ok(QuadratureResult {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let y = CHIRP_CUTOFF.max(lo + 1.0);
    let (tail, tail_err) = match integrand {
        Integrand::Zero => (0.0, 0.0),
        Integrand::FreeRegime => (1.0 / (6.0 * y.powi(3)), 0.5 / y.powi(5)),
        Integrand::ConfinedRegime => (0.5 / y, 0.5 / y.powi(3)),
        Integrand::EscapeKernel { ratio } => {
            let a = ratio.abs();
            let (j, j_err) = sine_square_tail(a * y, 0.1 * rel_tol.max(1e-12))?;
            let cube = a * a * a;
            // chirped half: g = sin²(ay)/(2y⁴); |∫ cos(y²) g| ≤ g(Y)/(2Y) + ½∫|(g/y)'|
            let g_end = (a * y).powi(2).min(1.0) / (2.0 * y.powi(4));
            let slope = (a / (4.0 * y.powi(4))).min(2.0 * a * a / (3.0 * y.powi(3)))
                + (1.0 / y.powi(5)).min(5.0 * a * a / (3.0 * y.powi(3)));
            let chirp_bound = g_end / (2.0 * y) + 0.25 * slope;
            (0.5 * cube * j, 0.5 * cube * j_err + chirp_bound)
        }
    };
    let body = integrate_adaptive(
        |v| integrand.eval(v),
        &chirp_breaks(lo, y),
        0.5 * abs_tol,
        0.5 * rel_tol,
        MAX_INTERVALS,
    )?;
    let result = QuadratureResult {
        value: body.value + tail,
        error: body.error + tail_err,
        intervals: body.intervals,
    };
    if result.error > abs_tol.max(rel_tol * result.value.abs()) {
        return Err(QuenchError::NonConvergence {
            estimate: result.value,
            error: result.error,
            intervals: result.intervals,
        });
    }
    Ok(result)
}

/// Integral of `integrand` over `domain` with estimated absolute error
/// below `tol`.
pub fn adaptive_quadrature(
    integrand: Integrand,
    domain: Domain,
    tol: f64,
) -> Result<QuadratureResult> {
    quadrature_with(integrand, domain, tol, 0.0)
}

/// As [`adaptive_quadrature`], accepting either an absolute or a relative
/// error target (whichever is looser).
pub fn quadrature_with(
    integrand: Integrand,
    domain: Domain,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadratureResult> {
    if !(abs_tol > 0.0 || rel_tol > 0.0) {
        return Err(QuenchError::InvalidArgument(
            "quadrature needs a positive tolerance".into(),
        ));
    }
    match domain {
        Domain::Finite { lo, hi } => {
            if !(hi > lo) {
                return Err(QuenchError::InvalidArgument(format!(
                    "empty interval [{lo}, {hi}]"
                )));
            }
            integrate_adaptive(
                |v| integrand.eval(v),
                &chirp_breaks(lo, hi),
                abs_tol,
                rel_tol,
                MAX_INTERVALS,
            )
        }
        Domain::HalfLine { lo } => half_line(integrand, lo, abs_tol, rel_tol),
    }
}

/// Closed form of `∫₀^∞ sin²(y²/2)/y⁴ dy`.
pub fn free_regime_constant() -> f64 {
    PI.sqrt() / (3.0 * 2f64.sqrt())
}

/// Closed form of `∫₀^∞ sin²(y²/2)/y² dy`.
pub fn confined_regime_constant() -> f64 {
    PI.sqrt() / (2.0 * 2f64.sqrt())
}

//! Ruler-length measurement of `F` and the scaling of its phase sums.
//!
//! A curve whose measured length grows like `l(ε) ∝ ε^{1-D}` as the ruler
//! `ε` shrinks has divider dimension `D`. For `F` the increments over a
//! ruler are dominated by `n ≲ (2ε)^{-1/2}` terms with effectively random
//! signs, giving `l ∝ ε^{-1/4}` and `D = 5/4`.

use rayon::prelude::*;
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{QuenchError, Result};
use crate::numeric::{fit_line, frac_of_product, log_grid};
use crate::universal::{intervals_for, UniversalCurve};

/// Both length variants for one ruler.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveLength {
    pub epsilon: f64,
    /// `Σ_m √(ε² + [F(mε+ε) - F(mε-ε)]²) / 4`.
    pub printed: f64,
    /// `½ Σ_m |F(mε+ε) - F(mε-ε)|`.
    pub simplified: f64,
}

/// Length of `curve` measured with ruler `epsilon`, summing over
/// `m = 1..=⌊1/ε⌋`. The curve must be sampled at `ξ_k = kε` for
/// `k = 0..=⌊1/ε⌋+1`.
pub fn curve_length(curve: &UniversalCurve, epsilon: f64) -> Result<CurveLength> {
    if !(epsilon > 0.0) {
        return Err(QuenchError::InvalidArgument(format!(
            "ruler must be positive, got {epsilon}"
        )));
    }
    let m = (1.0 / epsilon + 1e-9).floor() as usize;
    if curve.xi_grid.len() < m + 2 {
        return Err(QuenchError::GridMismatch(format!(
            "ruler {epsilon} needs {} samples, curve has {}",
            m + 2,
            curve.xi_grid.len()
        )));
    }
    let spacing_ok = curve.xi_grid[..m + 2]
        .iter()
        .enumerate()
        .all(|(k, &x)| (x - k as f64 * epsilon).abs() <= 1e-9 * (1.0 + k as f64 * epsilon));
    if !spacing_ok {
        return Err(QuenchError::GridMismatch(format!(
            "curve spacing is not the ruler {epsilon}"
        )));
    }
    let f = &curve.values;
    let (mut printed, mut simplified) = (0.0, 0.0);
    for i in 1..=m {
        let d = f[i + 1] - f[i - 1];
        printed += (epsilon * epsilon + d * d).sqrt();
        simplified += d.abs();
    }
    Ok(CurveLength {
        epsilon,
        printed: printed / 4.0,
        simplified: simplified / 2.0,
    })
}

/// Rulers `1/M` with `M` log-spaced from `1/eps_max` to `1/eps_min`,
/// deduplicated and sorted largest first.
pub fn ruler_set(eps_min: f64, eps_max: f64, count: usize) -> Result<Vec<f64>> {
    if !(eps_min > 0.0 && eps_max > eps_min && eps_max <= 1.0) || count < 2 {
        return Err(QuenchError::InvalidArgument(format!(
            "bad ruler range [{eps_min}, {eps_max}] x {count}"
        )));
    }
    let mut ms: Vec<usize> = log_grid(1.0 / eps_max, 1.0 / eps_min, count)
        .into_iter()
        .map(|m| m.round() as usize)
        .collect();
    ms.dedup();
    Ok(ms.into_iter().map(|m| 1.0 / m as f64).collect())
}

/// Lengths of `F` (truncated at `terms`) for each ruler, computed in
/// parallel and returned in input order.
pub fn measure_lengths(epsilons: &[f64], terms: usize) -> Result<Vec<CurveLength>> {
    epsilons
        .par_iter()
        .map(|&eps| {
            let curve = UniversalCurve::ruler_grid(eps, terms)?;
            curve_length(&curve, eps)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionFit {
    /// Strictly decreasing.
    pub epsilons: Vec<f64>,
    pub lengths: Vec<f64>,
    /// `d ln l / d ln ε`.
    pub slope: f64,
    /// `1 - slope`.
    pub dimension: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
}

/// Least-squares slope of `ln l` against `ln ε`. Needs at least five
/// rulers spanning two decades.
pub fn dimension_fit(epsilons: &[f64], lengths: &[f64]) -> Result<DimensionFit> {
    if epsilons.len() != lengths.len() {
        return Err(QuenchError::InvalidArgument(
            "rulers and lengths differ in count".into(),
        ));
    }
    if epsilons.len() < 5 {
        return Err(QuenchError::IllConditionedFit(format!(
            "{} rulers, need at least 5",
            epsilons.len()
        )));
    }
    if epsilons.iter().chain(lengths).any(|v| !(*v > 0.0)) {
        return Err(QuenchError::IllConditionedFit(
            "rulers and lengths must be positive".into(),
        ));
    }
    let mut pairs: Vec<(f64, f64)> = epsilons
        .iter()
        .copied()
        .zip(lengths.iter().copied())
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(QuenchError::IllConditionedFit("repeated ruler".into()));
    }
    let span = (pairs[0].0 / pairs[pairs.len() - 1].0).log10();
    if span < 2.0 - 1e-9 {
        return Err(QuenchError::IllConditionedFit(format!(
            "rulers span {span:.2} decades, need at least 2"
        )));
    }
    let lx: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let fit = fit_line(&lx, &ly)?;
    Ok(DimensionFit {
        epsilons: pairs.iter().map(|p| p.0).collect(),
        lengths: pairs.iter().map(|p| p.1).collect(),
        slope: fit.slope,
        dimension: 1.0 - fit.slope,
        residual: fit.rms,
    })
}

/// The deterministic sums `ξ_m = Σ_{n=2}^{K} sin(2π n² m ε)`,
/// `K = ⌊√(1/2ε)⌋`, for `m = 1..=⌊1/ε⌋`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSumSample {
    pub epsilon: f64,
    /// Highest `n` in each sum.
    pub cutoff: usize,
    pub values: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation over `m`.
    pub std: f64,
}

impl PhaseSumSample {
    /// Number of summed terms, `K - 1`.
    pub fn terms(&self) -> usize {
        self.cutoff.saturating_sub(1)
    }
}

fn floor_robust(x: f64) -> usize {
    (x + 1e-9 * x.max(1.0)).floor() as usize
}

pub fn phase_sum_samples(epsilon: f64) -> Result<PhaseSumSample> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(QuenchError::InvalidArgument(format!(
            "ruler must lie in (0, 1], got {epsilon}"
        )));
    }
    let cutoff = floor_robust((0.5 / epsilon).sqrt());
    if cutoff < 2 {
        return Err(QuenchError::InvalidArgument(format!(
            "ruler {epsilon} leaves no terms (cutoff {cutoff})"
        )));
    }
    let count = floor_robust(1.0 / epsilon);
    let values = match intervals_for(epsilon) {
        Ok(m) if m == count => phase_sums_fft(m, cutoff),
        _ => phase_sums_direct(epsilon, count, cutoff),
    };
    let (mean, std) = moments(&values);
    Ok(PhaseSumSample {
        epsilon,
        cutoff,
        values,
        mean,
        std,
    })
}

/// With `ε = 1/M` the phases are `n² m mod M`, so all sums come from one
/// DFT of the residue counts.
fn phase_sums_fft(m: usize, cutoff: usize) -> Vec<f64> {
    let mut buckets = vec![Complex::new(0.0, 0.0); m];
    for n in 2..=cutoff as u64 {
        buckets[((n * n) % m as u64) as usize].re += 1.0;
    }
    FftPlanner::<f64>::new()
        .plan_fft_forward(m)
        .process(&mut buckets);
    // forward DFT carries e^{-iθ}: Σ sin θ = -Im
    (1..=m).map(|k| -buckets[k % m].im).collect()
}

fn phase_sums_direct(epsilon: f64, count: usize, cutoff: usize) -> Vec<f64> {
    (1..=count)
        .into_par_iter()
        .map(|m| {
            let x = m as f64 * epsilon;
            (2..=cutoff)
                .map(|n| {
                    let nf = n as f64;
                    (2.0 * std::f64::consts::PI * frac_of_product(nf * nf, x)).sin()
                })
                .sum()
        })
        .collect()
}

pub fn phase_sums_direct_for_test(epsilon: f64) -> Vec<f64> {
    let cutoff = floor_robust((0.5 / epsilon).sqrt());
    phase_sums_direct(epsilon, floor_robust(1.0 / epsilon), cutoff)
}

fn moments(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: u64,
    /// Count a normal law with the sample mean and std would put here.
    pub normal_expected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalityReport {
    pub samples: usize,
    pub mean: f64,
    pub std: f64,
    pub bins: Vec<HistogramBin>,
    /// `None` when the sample has no spread.
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
}

/// Histogram of the phase sums against a fitted normal, plus standardised
/// third and fourth moments. Purely descriptive.
pub fn normality_diagnostics(sample: &PhaseSumSample, bins: usize) -> Result<NormalityReport> {
    let values = &sample.values;
    if values.is_empty() {
        return Err(QuenchError::InvalidArgument("empty sample".into()));
    }
    if bins == 0 {
        return Err(QuenchError::InvalidArgument("need at least one bin".into()));
    }
    let (mean, std) = moments(values);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi > lo {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    };
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for v in values {
        let i = (((v - lo) / width).floor() as usize).min(bins - 1);
        counts[i] += 1;
    }
    let normal = (std > 0.0).then(|| Normal::new(mean, std).expect("positive std"));
    let n = values.len() as f64;
    let histogram = counts
        .iter()
        .enumerate()
        .map(|(i, &count)| {
            let left = lo + i as f64 * width;
            let right = if i + 1 == bins {
                hi
            } else {
                lo + (i + 1) as f64 * width
            };
            let normal_expected = normal
                .as_ref()
                .map_or(0.0, |d| n * (d.cdf(right) - d.cdf(left)));
            HistogramBin {
                left,
                right,
                count,
                normal_expected,
            }
        })
        .collect();
    let (skewness, excess_kurtosis) = if std > 0.0 && values.len() > 1 {
        let m3 = values
            .iter()
            .map(|v| ((v - mean) / std).powi(3))
            .sum::<f64>()
            / n;
        let m4 = values
            .iter()
            .map(|v| ((v - mean) / std).powi(4))
            .sum::<f64>()
            / n;
        (Some(m3), Some(m4 - 3.0))
    } else {
        (None, None)
    };
    Ok(NormalityReport {
        samples: values.len(),
        mean,
        std,
        bins: histogram,
        skewness,
        excess_kurtosis,
    })
}

/// Log-log slope of the phase-sum spread against the ruler.
pub fn sigma_scaling(epsilons: &[f64]) -> Result<(Vec<(f64, f64)>, f64)> {
    let sigmas: Result<Vec<(f64, f64)>> = epsilons
        .par_iter()
        .map(|&e| phase_sum_samples(e).map(|s| (e, s.std)))
        .collect();
    let sigmas = sigmas?;
    let lx: Vec<f64> = sigmas.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = sigmas.iter().map(|p| p.1.ln()).collect();
    let fit = fit_line(&lx, &ly)?;
    Ok((sigmas, fit.slope))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn synthetic(eps: f64, f: impl Fn(f64) -> f64) -> UniversalCurve {
        let m = (1.0 / eps).round() as usize;
        let xi: Vec<f64> = (0..m + 2).map(|k| k as f64 * eps).collect();
        UniversalCurve {
            values: xi.iter().map(|&x| f(x)).collect(),
            xi_grid: xi,
            truncation: 0,
            tail_bound: 0.0,
        }
    }

    #[test]
    fn constant_curve_gives_ruler_baseline() {
        for eps in [0.1, 0.01, 0.001] {
            let l = curve_length(&synthetic(eps, |_| 0.7), eps).unwrap();
            assert_abs_diff_eq!(l.printed, 0.25, epsilon = 1e-12);
            assert_eq!(l.simplified, 0.0);
        }
    }

    #[test]
    fn identity_curve_has_unit_variation() {
        for eps in [0.1, 0.01, 0.0025] {
            let l = curve_length(&synthetic(eps, |x| x), eps).unwrap();
            assert_abs_diff_eq!(l.simplified, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn length_rejects_mismatched_grid() {
        let c = synthetic(0.01, |x| x);
        assert!(matches!(
            curve_length(&c, 0.02),
            Err(QuenchError::GridMismatch(_))
        ));
        assert!(matches!(
            curve_length(&c, 0.005),
            Err(QuenchError::GridMismatch(_))
        ));
    }

    #[test]
    fn fit_on_synthetic_laws() {
        let eps = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4];
        let quarter: Vec<f64> = eps.iter().map(|e: &f64| e.powf(-0.25)).collect();
        let fit = dimension_fit(&eps, &quarter).unwrap();
        assert_abs_diff_eq!(fit.dimension, 1.25, epsilon = 1e-12);
        let flat = vec![3.0; 5];
        assert_abs_diff_eq!(
            dimension_fit(&eps, &flat).unwrap().dimension,
            1.0,
            epsilon = 1e-12
        );
        // sorted largest ruler first regardless of input order
        let rev: Vec<f64> = eps.iter().rev().copied().collect();
        let rq: Vec<f64> = quarter.iter().rev().copied().collect();
        let fit = dimension_fit(&rev, &rq).unwrap();
        assert!(fit.epsilons.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn fit_needs_span_and_count() {
        let r = dimension_fit(&[1e-2, 5e-3, 3e-3, 2e-3, 1e-3], &[1.0; 5]);
        assert!(matches!(r, Err(QuenchError::IllConditionedFit(_))));
        let r = dimension_fit(&[1e-2, 1e-3, 1e-4, 1e-5], &[1.0; 4]);
        assert!(matches!(r, Err(QuenchError::IllConditionedFit(_))));
    }

    #[test]
    fn ruler_set_divides_period() {
        let r = ruler_set(1e-5, 1e-2, 13).unwrap();
        assert_eq!(r[0], 1e-2);
        assert_eq!(*r.last().unwrap(), 1e-5);
        for e in &r {
            assert!(intervals_for(*e).is_ok());
        }
    }

    #[test]
    fn phase_sums_fft_matches_direct() {
        for eps in [1e-3, 2.5e-4] {
            let s = phase_sum_samples(eps).unwrap();
            let direct = phase_sums_direct_for_test(eps);
            assert_eq!(s.values.len(), direct.len());
            for (a, b) in s.values.iter().zip(&direct) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn phase_sums_bounded_by_term_count() {
        for eps in [1e-2, 3e-3, 7.3e-4] {
            let s = phase_sum_samples(eps).unwrap();
            let k = s.terms() as f64;
            assert!(s.values.iter().all(|v| v.abs() <= k + 1e-9));
        }
        assert!(phase_sum_samples(0.2).is_err());
    }

    #[test]
    fn degenerate_sample_has_undefined_moments() {
        let s = PhaseSumSample {
            epsilon: 1.0,
            cutoff: 2,
            values: vec![0.4],
            mean: 0.4,
            std: 0.0,
        };
        let r = normality_diagnostics(&s, 5).unwrap();
        assert_eq!(r.skewness, None);
        assert_eq!(r.excess_kurtosis, None);
        assert_eq!(r.bins.iter().map(|b| b.count).sum::<u64>(), 1);
    }

    #[test]
    fn histogram_counts_every_sample() {
        let s = phase_sum_samples(1e-3).unwrap();
        let r = normality_diagnostics(&s, 40).unwrap();
        assert_eq!(r.bins.iter().map(|b| b.count).sum::<u64>(), 1000);
        let expected: f64 = r.bins.iter().map(|b| b.normal_expected).sum();
        assert!(expected <= 1000.0 + 1e-9);
    }
}

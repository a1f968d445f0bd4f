use proptest::prelude::*;

use quench_core::fractal::{curve_length, dimension_fit, measure_lengths, ruler_set};
use quench_core::numeric::linear_grid;
use quench_core::spectral::{
    density_field, mode_coefficient, tail_bound, truncation_for_tolerance, ModeCoefficients,
    Observable, WellConfig, SINGULAR_WINDOW,
};
use quench_core::survival::{escape_integral, escape_small_delta, SurvivalSeries};
use quench_core::universal::{universal_f, upper_bound, UniversalCurve};

fn config() -> impl Strategy<Value = WellConfig> {
    (1e-3f64..1.0).prop_map(|d| WellConfig::new(d).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn escape_is_periodic_and_time_symmetric(c in config(), frac in 0.0f64..1.0) {
        let s = SurvivalSeries::new(&c, 3000).unwrap();
        let t = frac * c.period();
        let p = s.escape(t).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!((s.escape(t + c.period()).unwrap() - p).abs() < 1e-8);
        prop_assert!((s.escape(c.period() - t).unwrap() - p).abs() < 1e-8);
    }

    #[test]
    fn survival_amplitude_is_bounded(c in config(), frac in 0.0f64..1.0) {
        let s = SurvivalSeries::new(&c, 2000).unwrap();
        let a = s.amplitude(frac * c.period()).unwrap();
        prop_assert!(a.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn truncation_changes_stay_within_tail_bound(
        c in config(),
        frac in 0.0f64..1.0,
        small in 2usize..400,
        extra in 1usize..4000,
    ) {
        let n_small = small.max(c.width() as usize + 1);
        let t = frac * c.period();
        let a = SurvivalSeries::new(&c, n_small).unwrap().escape(t).unwrap();
        let b = SurvivalSeries::new(&c, n_small + extra).unwrap().escape(t).unwrap();
        prop_assert!((a - b).abs() <= tail_bound(&c, Observable::Survival, n_small) + 1e-14);
    }

    #[test]
    fn completeness_deficit_shrinks(c in config(), n in 2usize..500) {
        let a = ModeCoefficients::new(&c, n).unwrap().completeness_deficit();
        let b = ModeCoefficients::new(&c, n + 1).unwrap().completeness_deficit();
        prop_assert!(b <= a + 1e-15);
        prop_assert!(a >= -1e-14);
    }

    #[test]
    fn coefficient_continuous_across_window(n in 2usize..60, side in prop::bool::ANY) {
        let s = if side { 1.0 } else { -1.0 };
        let inside = WellConfig::new(n as f64 * (1.0 + s * 0.99 * SINGULAR_WINDOW) - 1.0).unwrap();
        let outside = WellConfig::new(n as f64 * (1.0 + s * 1.01 * SINGULAR_WINDOW) - 1.0).unwrap();
        let a = mode_coefficient(&inside, n);
        let b = mode_coefficient(&outside, n);
        prop_assert!(((a - b) / a).abs() < 1e-6);
    }

    #[test]
    fn tolerance_truncation_is_monotone(c in config(), e1 in 2.0f64..10.0, e2 in 0.0f64..3.0) {
        let loose = 10f64.powf(-e1);
        let tight = loose * 10f64.powf(-e2);
        let a = truncation_for_tolerance(&c, Observable::Survival, loose).unwrap();
        let b = truncation_for_tolerance(&c, Observable::Survival, tight).unwrap();
        prop_assert!(b >= a);
        prop_assert!(tail_bound(&c, Observable::Survival, b) <= tight);
    }

    #[test]
    fn density_revives_after_one_period(c in config(), frac in 0.0f64..1.0) {
        let coeffs = ModeCoefficients::new(&c, 300).unwrap();
        let xs = linear_grid(0.0, c.width(), 65);
        let t = frac * c.period();
        let field = density_field(&c, &coeffs, &xs, &[t, t + c.period()]).unwrap();
        prop_assert!(field.row_distance(0, 1) < 1e-9);
    }

    #[test]
    fn density_stays_normalized(c in config(), frac in 0.0f64..1.0) {
        let modes = truncation_for_tolerance(&c, Observable::Wavefunction, 1e-2).unwrap();
        let coeffs = ModeCoefficients::new(&c, modes).unwrap();
        let xs = linear_grid(0.0, c.width(), 1201);
        let field = density_field(&c, &coeffs, &xs, &[frac * c.period()]).unwrap();
        prop_assert!((field.norm(0) - 1.0).abs() < 1e-2);
    }

    #[test]
    fn integral_and_series_agree_at_small_delta(log_t in -8.0f64..-2.0) {
        let c = WellConfig::new(0.003).unwrap();
        let t = 10f64.powf(log_t);
        let a = escape_integral(0.003, t).unwrap();
        let b = escape_small_delta(&c, t, 100_000).unwrap();
        prop_assume!(a > 1e-12 && b > 1e-12);
        prop_assert!((a / b - 1.0).abs() < 0.1);
    }

    #[test]
    fn universal_f_symmetries(xi in -2.0f64..2.0) {
        let f = universal_f(xi, 5000).value;
        prop_assert!(f >= 0.0 && f <= upper_bound());
        prop_assert!((universal_f(xi + 1.0, 5000).value - f).abs() < 1e-9);
        prop_assert!((universal_f(1.0 - xi, 5000).value - f).abs() < 1e-9);
    }

    #[test]
    fn dimension_fit_recovers_power_laws(k in -1.0f64..1.0, scale in 0.1f64..10.0) {
        let eps = [1e-2, 4e-3, 1e-3, 4e-4, 1e-4, 4e-5];
        let l: Vec<f64> = eps.iter().map(|e: &f64| scale * e.powf(k)).collect();
        let fit = dimension_fit(&eps, &l).unwrap();
        prop_assert!((fit.dimension - (1.0 - k)).abs() < 1e-9);
        prop_assert!(fit.residual < 1e-9);
    }

    #[test]
    fn linear_curves_measure_total_variation(slope in -5.0f64..5.0, m in 10usize..400) {
        let eps = 1.0 / m as f64;
        let xi: Vec<f64> = (0..m + 2).map(|k| k as f64 * eps).collect();
        let curve = UniversalCurve {
            values: xi.iter().map(|x| slope * x).collect(),
            xi_grid: xi,
            truncation: 0,
            tail_bound: 0.0,
        };
        let l = curve_length(&curve, eps).unwrap();
        prop_assert!((l.simplified - slope.abs()).abs() < 1e-9);
    }
}

#[test]
fn universal_f_ignores_well_parameters() {
    // no Δ or T enters: the same (ξ, N) gives the same bits
    let a = universal_f(0.3141, 12_345);
    let _ = WellConfig::new(0.7).unwrap();
    let b = universal_f(0.3141, 12_345);
    assert_eq!(a.value.to_bits(), b.value.to_bits());
}

#[test]
fn ruler_halving_does_not_shrink_length() {
    let rulers: Vec<f64> = (0..7).map(|k| 1.0 / (100 * (1 << k)) as f64).collect();
    let lengths = measure_lengths(&rulers, 100_000).unwrap();
    for w in lengths.windows(2) {
        assert!(w[1].printed >= 0.9 * w[0].printed, "{w:?}");
        assert!(w[1].simplified >= 0.9 * w[0].simplified, "{w:?}");
    }
}

#[test]
fn printed_and_simplified_dimensions_agree() {
    let rulers = ruler_set(1e-5, 1e-2, 13).unwrap();
    let lengths = measure_lengths(&rulers, 100_000).unwrap();
    let p: Vec<f64> = lengths.iter().map(|l| l.printed).collect();
    let s: Vec<f64> = lengths.iter().map(|l| l.simplified).collect();
    let dp = dimension_fit(&rulers, &p).unwrap().dimension;
    let ds = dimension_fit(&rulers, &s).unwrap().dimension;
    assert!((dp - ds).abs() < 0.03, "{dp} vs {ds}");
}

#[test]
fn dimension_fit_is_bit_reproducible() {
    let rulers = ruler_set(1e-5, 1e-2, 13).unwrap();
    let fits: Vec<_> = (0..3)
        .map(|_| {
            let l: Vec<f64> = measure_lengths(&rulers, 50_000)
                .unwrap()
                .iter()
                .map(|l| l.printed)
                .collect();
            dimension_fit(&rulers, &l).unwrap()
        })
        .collect();
    assert!(fits.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn scaled_escape_approaches_f_as_delta_shrinks() {
    // distances to F fall slowly but strictly with Δ
    let xi: Vec<f64> = (0..128).map(|k| k as f64 / 128.0).collect();
    let f = UniversalCurve::sample(&xi, 100_000).unwrap();
    let d: Vec<f64> = [1e-2, 3e-3, 1e-3]
        .iter()
        .map(|&delta| {
            let c = WellConfig::new(delta).unwrap();
            let n = truncation_for_tolerance(&c, Observable::Survival, 1e-15).unwrap();
            quench_core::universal::scaled_escape_limit(delta, &xi, n)
                .unwrap()
                .sup_distance(&f)
                .unwrap()
        })
        .collect();
    assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
}

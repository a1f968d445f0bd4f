//! C interface to `quench-core`.
//!
//! Fallible functions return a [`QuenchStatus`] and write results through
//! out-pointers. On failure a message is kept per thread and can be read
//! with [`quench_last_error`]. Handles are opaque and must be released with
//! their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use quench_core::fractal::dimension_fit;
use quench_core::spectral::{truncation_for_tolerance, Observable};
use quench_core::universal::{universal_f, universal_f_periodic_grid};
use quench_core::{
    asymptote_confined, asymptote_free, escape_integral, escape_small_delta, mode_coefficient,
    transition_time, QuenchError, SurvivalSeries, WellConfig,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuenchStatus {
    Ok = 0,
    InvalidArgument = 1,
    Domain = 2,
    Truncation = 3,
    NonConvergence = 4,
    GridMismatch = 5,
    IllConditioned = 6,
    NullPointer = 7,
    Panic = 8,
}

/// Which series a truncation request is for.
pub const QUENCH_OBSERVABLE_COEFFICIENTS: u32 = 0;
pub const QUENCH_OBSERVABLE_SURVIVAL: u32 = 1;
pub const QUENCH_OBSERVABLE_WAVEFUNCTION: u32 = 2;

/// Expanded-well geometry.
pub struct QuenchWell {
    config: WellConfig,
}

/// Precomputed survival weights for one well and truncation.
pub struct QuenchSurvival {
    series: SurvivalSeries,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &QuenchError) -> QuenchStatus {
    match e {
        QuenchError::InvalidDelta(_) | QuenchError::InvalidArgument(_) => {
            QuenchStatus::InvalidArgument
        }
        QuenchError::Domain { .. } => QuenchStatus::Domain,
        QuenchError::TruncationCap { .. } | QuenchError::TruncationInconsistent { .. } => {
            QuenchStatus::Truncation
        }
        QuenchError::NonConvergence { .. } => QuenchStatus::NonConvergence,
        QuenchError::GridMismatch(_) => QuenchStatus::GridMismatch,
        QuenchError::IllConditionedFit(_) => QuenchStatus::IllConditioned,
    }
}

/// Runs `f`, turning errors and panics into a status plus message.
fn guard(f: impl FnOnce() -> Result<(), QuenchStatus>) -> QuenchStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QuenchStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            QuenchStatus::Panic
        }
    }
}

fn check<T>(r: Result<T, QuenchError>) -> Result<T, QuenchStatus> {
    r.map_err(|e| {
        let s = status_of(&e);
        set_error(e.to_string());
        s
    })
}

fn null() -> QuenchStatus {
    set_error("null pointer argument".into());
    QuenchStatus::NullPointer
}

unsafe fn put<T>(out: *mut T, v: T) -> Result<(), QuenchStatus> {
    if out.is_null() {
        return Err(null());
    }
    out.write(v);
    Ok(())
}

unsafe fn borrow<'a, T>(p: *const T) -> Result<&'a T, QuenchStatus> {
    p.as_ref().ok_or_else(null)
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn quench_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn quench_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn quench_well_new(delta: f64, out: *mut *mut QuenchWell) -> QuenchStatus {
    guard(|| {
        let config = check(WellConfig::new(delta))?;
        put(out, Box::into_raw(Box::new(QuenchWell { config })))
    })
}

/// # Safety
/// `well` must be NULL or a handle from [`quench_well_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn quench_well_free(well: *mut QuenchWell) {
    if !well.is_null() {
        drop(Box::from_raw(well));
    }
}

/// Width `L = 1 + Δ` and revival period `T = 2L²/π`.
///
/// # Safety
/// `well` must be a live handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn quench_well_geometry(
    well: *const QuenchWell,
    width: *mut f64,
    period: *mut f64,
) -> QuenchStatus {
    guard(|| {
        let w = borrow(well)?;
        put(width, w.config.width())?;
        put(period, w.config.period())
    })
}

/// Coefficient `a_n`, `n ≥ 1`.
///
/// # Safety
/// `well` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn quench_mode_coefficient(
    well: *const QuenchWell,
    n: usize,
    out: *mut f64,
) -> QuenchStatus {
    guard(|| {
        let w = borrow(well)?;
        if n == 0 {
            set_error("mode index starts at 1".into());
            return Err(QuenchStatus::InvalidArgument);
        }
        put(out, mode_coefficient(&w.config, n))
    })
}

/// Smallest mode count whose analytic tail bound is below `tol`.
///
/// # Safety
/// `well` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn quench_truncation_for_tolerance(
    well: *const QuenchWell,
    observable: u32,
    tol: f64,
    out: *mut usize,
) -> QuenchStatus {
    guard(|| {
        let w = borrow(well)?;
        let obs = match observable {
            QUENCH_OBSERVABLE_COEFFICIENTS => Observable::Coefficients,
            QUENCH_OBSERVABLE_SURVIVAL => Observable::Survival,
            QUENCH_OBSERVABLE_WAVEFUNCTION => Observable::Wavefunction,
            other => {
                set_error(format!("unknown observable {other}"));
                return Err(QuenchStatus::InvalidArgument);
            }
        };
        put(out, check(truncation_for_tolerance(&w.config, obs, tol))?)
    })
}

/// # Safety
/// `well` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn quench_survival_new(
    well: *const QuenchWell,
    modes: usize,
    out: *mut *mut QuenchSurvival,
) -> QuenchStatus {
    guard(|| {
        let w = borrow(well)?;
        let series = check(SurvivalSeries::new(&w.config, modes))?;
        put(out, Box::into_raw(Box::new(QuenchSurvival { series })))
    })
}

/// # Safety
/// `series` must be NULL or a handle from [`quench_survival_new`] not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn quench_survival_free(series: *mut QuenchSurvival) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Survival amplitude `A(t)` as real and imaginary parts.
///
/// # Safety
/// `series` must be a live handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn quench_survival_amplitude(
    series: *const QuenchSurvival,
    t: f64,
    re: *mut f64,
    im: *mut f64,
) -> QuenchStatus {
    guard(|| {
        let s = borrow(series)?;
        let a = check(s.series.amplitude(t))?;
        put(re, a.re)?;
        put(im, a.im)
    })
}

/// Escape probability `1 - |A(t)|²`.
///
/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn quench_survival_escape(
    series: *const QuenchSurvival,
    t: f64,
    out: *mut f64,
) -> QuenchStatus {
    guard(|| {
        let s = borrow(series)?;
        put(out, check(s.series.escape(t))?)
    })
}

/// Leading-order small-Δ escape series.
///
/// # Safety
/// `well` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn quench_escape_small_delta(
    well: *const QuenchWell,
    t: f64,
    modes: usize,
    out: *mut f64,
) -> QuenchStatus {
    guard(|| {
        let w = borrow(well)?;
        put(out, check(escape_small_delta(&w.config, t, modes))?)
    })
}

/// Continuum escape integral.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn quench_escape_integral(delta: f64, t: f64, out: *mut f64) -> QuenchStatus {
    guard(|| put(out, check(escape_integral(delta, t))?))
}

/// `t^{3/2}` law valid for `t ≪ Δ²`.
#[no_mangle]
pub extern "C" fn quench_asymptote_free(t: f64) -> f64 {
    asymptote_free(t)
}

/// `Δ² t^{1/2}` law valid for `Δ² ≪ t ≪ 1`.
#[no_mangle]
pub extern "C" fn quench_asymptote_confined(delta: f64, t: f64) -> f64 {
    asymptote_confined(delta, t)
}

/// Where the two asymptotes cross, `3Δ²`.
#[no_mangle]
pub extern "C" fn quench_transition_time(delta: f64) -> f64 {
    transition_time(delta)
}

/// `F(ξ)` summed to `terms` and the bound on the neglected tail.
///
/// # Safety
/// The out-pointers must be writable; `tail_bound` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn quench_universal_f(
    xi: f64,
    terms: usize,
    value: *mut f64,
    tail_bound: *mut f64,
) -> QuenchStatus {
    guard(|| {
        if !xi.is_finite() {
            set_error(format!("ξ must be finite, got {xi}"));
            return Err(QuenchStatus::InvalidArgument);
        }
        let v = universal_f(xi, terms);
        put(value, v.value)?;
        if !tail_bound.is_null() {
            tail_bound.write(v.tail_bound);
        }
        Ok(())
    })
}

/// `F(k/M)` for `k = 0..M-1` into `values`, which must hold `intervals`
/// doubles.
///
/// # Safety
/// `values` must point to `intervals` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn quench_universal_grid(
    intervals: usize,
    terms: usize,
    values: *mut f64,
) -> QuenchStatus {
    guard(|| {
        if values.is_null() {
            return Err(null());
        }
        if intervals == 0 {
            set_error("need at least one interval".into());
            return Err(QuenchStatus::InvalidArgument);
        }
        let grid = universal_f_periodic_grid(intervals, terms);
        std::slice::from_raw_parts_mut(values, intervals).copy_from_slice(&grid);
        Ok(())
    })
}

/// Log-log fit of ruler lengths: `dimension = 1 - slope`.
///
/// # Safety
/// `epsilons` and `lengths` must each point to `count` doubles; the
/// out-pointers must be writable; `residual` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn quench_dimension_fit(
    epsilons: *const f64,
    lengths: *const f64,
    count: usize,
    dimension: *mut f64,
    residual: *mut f64,
) -> QuenchStatus {
    guard(|| {
        if epsilons.is_null() || lengths.is_null() {
            return Err(null());
        }
        let e = std::slice::from_raw_parts(epsilons, count);
        let l = std::slice::from_raw_parts(lengths, count);
        let fit = check(dimension_fit(e, l))?;
        put(dimension, fit.dimension)?;
        if !residual.is_null() {
            residual.write(fit.residual);
        }
        Ok(())
    })
}

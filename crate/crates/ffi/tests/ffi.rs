use std::ffi::CStr;
use std::ptr;

use quench_ffi::*;

fn last_error() -> String {
    let p = quench_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn well(delta: f64) -> *mut QuenchWell {
    let mut w = ptr::null_mut();
    assert_eq!(unsafe { quench_well_new(delta, &mut w) }, QuenchStatus::Ok);
    assert!(!w.is_null());
    w
}

#[test]
fn well_geometry_and_coefficients() {
    let w = well(0.2);
    let (mut width, mut period) = (0.0, 0.0);
    unsafe {
        assert_eq!(
            quench_well_geometry(w, &mut width, &mut period),
            QuenchStatus::Ok
        );
        assert!((width - 1.2).abs() < 1e-15);
        assert!((period - 0.916_732_472).abs() < 1e-8);
        let mut a1 = 0.0;
        assert_eq!(quench_mode_coefficient(w, 1, &mut a1), QuenchStatus::Ok);
        assert!((a1 - 0.950_975_481_489_622_5).abs() < 1e-14);
        assert_eq!(
            quench_mode_coefficient(w, 0, &mut a1),
            QuenchStatus::InvalidArgument
        );
        quench_well_free(w);
    }
}

#[test]
fn invalid_delta_sets_message() {
    let mut w = ptr::null_mut();
    let s = unsafe { quench_well_new(-0.5, &mut w) };
    assert_eq!(s, QuenchStatus::InvalidArgument);
    assert!(w.is_null());
    assert!(last_error().contains("-0.5"));
}

#[test]
fn null_pointers_are_rejected() {
    unsafe {
        assert_eq!(
            quench_well_new(0.1, ptr::null_mut()),
            QuenchStatus::NullPointer
        );
        let mut v = 0.0;
        assert_eq!(
            quench_mode_coefficient(ptr::null(), 1, &mut v),
            QuenchStatus::NullPointer
        );
        assert_eq!(
            quench_universal_grid(4, 10, ptr::null_mut()),
            QuenchStatus::NullPointer
        );
        quench_well_free(ptr::null_mut());
        quench_survival_free(ptr::null_mut());
    }
}

#[test]
fn truncation_and_survival() {
    let w = well(0.003);
    unsafe {
        let mut n = 0usize;
        assert_eq!(
            quench_truncation_for_tolerance(w, QUENCH_OBSERVABLE_SURVIVAL, 1e-15, &mut n),
            QuenchStatus::Ok
        );
        assert!(n > 1000);
        assert_eq!(
            quench_truncation_for_tolerance(w, 9, 1e-6, &mut n),
            QuenchStatus::InvalidArgument
        );
        assert_eq!(
            quench_truncation_for_tolerance(w, QUENCH_OBSERVABLE_WAVEFUNCTION, 1e-12, &mut n),
            QuenchStatus::Truncation
        );

        let mut s = ptr::null_mut();
        assert_eq!(quench_survival_new(w, 100_000, &mut s), QuenchStatus::Ok);
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(
            quench_survival_amplitude(s, 0.0, &mut re, &mut im),
            QuenchStatus::Ok
        );
        assert!((re - 1.0).abs() < 1e-9 && im.abs() < 1e-15);
        let mut p = 0.0;
        assert_eq!(quench_survival_escape(s, 1e-8, &mut p), QuenchStatus::Ok);
        assert!((p / quench_asymptote_free(1e-8) - 1.0).abs() < 0.01);
        assert_eq!(
            quench_survival_escape(s, -1.0, &mut p),
            QuenchStatus::Domain
        );
        quench_survival_free(s);

        let mut q = 0.0;
        assert_eq!(
            quench_escape_small_delta(w, 1e-6, 100_000, &mut q),
            QuenchStatus::Ok
        );
        let mut r = 0.0;
        assert_eq!(
            quench_escape_integral(0.003, 1e-6, &mut r),
            QuenchStatus::Ok
        );
        assert!((q / r - 1.0).abs() < 0.02);
        quench_well_free(w);
    }
}

#[test]
fn asymptotes_cross_at_transition() {
    let d = 0.003;
    let t = quench_transition_time(d);
    assert!((t - 2.7e-5).abs() < 1e-20);
    let (a, b) = (quench_asymptote_free(t), quench_asymptote_confined(d, t));
    assert!(((a - b) / a).abs() < 1e-14);
}

#[test]
fn universal_function_values() {
    unsafe {
        let (mut v, mut tb) = (0.0, 0.0);
        assert_eq!(
            quench_universal_f(0.5, 1_000_000, &mut v, &mut tb),
            QuenchStatus::Ok
        );
        let closed = (std::f64::consts::PI.powi(2) / 3.0 + 1.0) / 8.0;
        assert!((v - closed).abs() <= tb);
        assert_eq!(
            quench_universal_f(0.25, 1000, &mut v, ptr::null_mut()),
            QuenchStatus::Ok
        );
        assert_eq!(
            quench_universal_f(f64::NAN, 10, &mut v, ptr::null_mut()),
            QuenchStatus::InvalidArgument
        );

        let mut grid = vec![f64::NAN; 8];
        assert_eq!(
            quench_universal_grid(8, 20_000, grid.as_mut_ptr()),
            QuenchStatus::Ok
        );
        assert_eq!(grid[0], 0.0);
        for k in 1..8 {
            assert!((grid[k] - grid[8 - k]).abs() < 1e-9, "reflection at {k}");
        }
    }
}

#[test]
fn dimension_fit_through_ffi() {
    let eps = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5];
    let len: Vec<f64> = eps.iter().map(|e: &f64| e.powf(-0.25)).collect();
    unsafe {
        let (mut d, mut r) = (0.0, 0.0);
        assert_eq!(
            quench_dimension_fit(eps.as_ptr(), len.as_ptr(), eps.len(), &mut d, &mut r),
            QuenchStatus::Ok
        );
        assert!((d - 1.25).abs() < 1e-12);
        assert_eq!(
            quench_dimension_fit(eps.as_ptr(), len.as_ptr(), 3, &mut d, ptr::null_mut()),
            QuenchStatus::IllConditioned
        );
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(quench_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/quench.h"))
        .expect("header generated by the build script");
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exported: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .filter_map(|rest| rest.split('(').next())
        .collect();
    assert!(exported.len() >= 15);
    for name in exported {
        assert!(
            header.contains(&format!("{name}(")),
            "{name} missing from header"
        );
    }
    assert!(header.contains("typedef struct QuenchWell QuenchWell;"));
    assert!(header.contains("QUENCH_STATUS_OK = 0"));
}

#[test]
fn c_consumer_links_and_runs() {
    use std::process::Command;
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler, skipping");
        return;
    }
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().unwrap().parent().unwrap();
    if !lib_dir.join("libquench_ffi.so").exists() {
        eprintln!("shared library not built here, skipping");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("consumer");
    let manifest = env!("CARGO_MANIFEST_DIR");
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror"])
        .arg(format!("-I{manifest}/include"))
        .arg(format!("{manifest}/tests/c/consumer.c"))
        .arg(format!("-L{}", lib_dir.display()))
        .arg(format!("-Wl,-rpath,{}", lib_dir.display()))
        .args(["-lquench_ffi", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C consumer failed to compile");
    let out = Command::new(&bin).output().unwrap();
    assert!(
        out.status.success(),
        "consumer exited with {:?}",
        out.status.code()
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("quench "));
}

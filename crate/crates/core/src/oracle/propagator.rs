//! Finite-difference Crank–Nicolson propagation on a uniform grid.
//!
//! The Cayley form `(1 + iHdt/2) ψ' = (1 - iHdt/2) ψ` is unitary for the
//! Hermitian second-difference operator, so the discrete norm is conserved
//! up to rounding. Walls are Dirichlet nodes fixed at zero.

use num_complex::Complex64;

use crate::error::{QuenchError, Result};
use crate::spectral::WellConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub x_grid: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    pub dx: f64,
    pub t: f64,
}

impl GridState {
    /// Samples `f` on `points` uniform nodes of `[0, width]`; the end nodes
    /// are pinned to zero.
    pub fn from_fn<F: Fn(f64) -> Complex64>(width: f64, points: usize, f: F) -> Result<Self> {
        if points < 3 {
            return Err(QuenchError::InvalidArgument(format!(
                "grid needs at least 3 points, got {points}"
            )));
        }
        if !(width > 0.0) {
            return Err(QuenchError::InvalidArgument(format!(
                "grid width must be positive, got {width}"
            )));
        }
        let dx = width / (points - 1) as f64;
        let x_grid: Vec<f64> = (0..points)
            .map(|j| {
                if j + 1 == points {
                    width
                } else {
                    j as f64 * dx
                }
            })
            .collect();
        let mut amplitudes: Vec<Complex64> = x_grid.iter().map(|&x| f(x)).collect();
        amplitudes[0] = Complex64::new(0.0, 0.0);
        amplitudes[points - 1] = Complex64::new(0.0, 0.0);
        Ok(Self {
            x_grid,
            amplitudes,
            dx,
            t: 0.0,
        })
    }

    pub fn zero(width: f64, points: usize) -> Result<Self> {
        Self::from_fn(width, points, |_| Complex64::new(0.0, 0.0))
    }

    /// The pre-quench ground state `√2 sin(πx)` on `[0, 1]`, zero on `(1, L]`.
    pub fn initial_eigenstate(config: &WellConfig, points: usize) -> Result<Self> {
        Self::from_fn(config.width(), points, |x| {
            if x <= 1.0 {
                Complex64::new(2f64.sqrt() * (std::f64::consts::PI * x).sin(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn points(&self) -> usize {
        self.x_grid.len()
    }

    /// Discrete `∫ |ψ|² dx` (trapezoidal; the end nodes are zero).
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.dx
    }

    /// Discrete `L²` distance to `other` sampled on the same nodes.
    pub fn l2_distance(&self, other: &[Complex64]) -> Result<f64> {
        if other.len() != self.points() {
            return Err(QuenchError::GridMismatch(format!(
                "{} samples against a {}-point grid",
                other.len(),
                self.points()
            )));
        }
        let s: f64 = self
            .amplitudes
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((s * self.dx).sqrt())
    }

    fn same_grid(&self, other: &GridState) -> bool {
        self.points() == other.points()
            && (self.dx - other.dx).abs() <= 1e-14 * self.dx
            && self.x_grid.last() == other.x_grid.last()
    }
}

/// Pre-factored Crank–Nicolson stepper for a fixed grid and step.
#[derive(Debug, Clone)]
pub struct CrankNicolson {
    dt: f64,
    diag_rhs: Complex64,
    off_rhs: Complex64,
    off: Complex64,
    // Thomas-algorithm sweep coefficients for the implicit side
    upper: Vec<Complex64>,
    pivot: Vec<Complex64>,
}

impl CrankNicolson {
    pub fn new(points: usize, dx: f64, dt: f64) -> Result<Self> {
        if points < 3 {
            return Err(QuenchError::InvalidArgument("grid too small".into()));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(QuenchError::InvalidArgument(format!(
                "time step must be positive, got {dt}"
            )));
        }
        let interior = points - 2;
        let r = dt / (dx * dx);
        let i = Complex64::i();
        let diag = Complex64::new(1.0, 0.0) + i * r;
        let off = -i * (0.5 * r);
        let mut upper = Vec::with_capacity(interior);
        let mut pivot = Vec::with_capacity(interior);
        let mut prev = Complex64::new(0.0, 0.0);
        for _ in 0..interior {
            let p = diag - off * prev;
            pivot.push(p);
            prev = off / p;
            upper.push(prev);
        }
        Ok(Self {
            dt,
            diag_rhs: Complex64::new(1.0, 0.0) - i * r,
            off_rhs: i * (0.5 * r),
            off,
            upper,
            pivot,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances the full-grid amplitudes (end nodes included, kept at zero)
    /// by one step. `scratch` must have the grid's length.
    pub fn step(&self, psi: &mut [Complex64], scratch: &mut [Complex64]) {
        let m = self.pivot.len();
        debug_assert_eq!(psi.len(), m + 2);
        // rhs for interior nodes 1..=m stored at scratch[0..m]
        for j in 0..m {
            scratch[j] = self.diag_rhs * psi[j + 1] + self.off_rhs * (psi[j] + psi[j + 2]);
        }
        scratch[0] /= self.pivot[0];
        for j in 1..m {
            scratch[j] = (scratch[j] - self.off * scratch[j - 1]) / self.pivot[j];
        }
        for j in (0..m - 1).rev() {
            let next = scratch[j + 1];
            scratch[j] -= self.upper[j] * next;
        }
        psi[1..=m].copy_from_slice(&scratch[..m]);
    }
}

/// Advances `state` by `steps` Crank–Nicolson steps of size `dt`.
pub fn propagate(state: &GridState, dt: f64, steps: usize) -> Result<GridState> {
    let stepper = CrankNicolson::new(state.points(), state.dx, dt)?;
    let mut out = state.clone();
    let mut scratch = vec![Complex64::new(0.0, 0.0); state.points()];
    for _ in 0..steps {
        stepper.step(&mut out.amplitudes, &mut scratch);
    }
    out.t = state.t + dt * steps as f64;
    Ok(out)
}

/// Trapezoidal `∫ conj(a) b dx`.
pub fn overlap(a: &GridState, b: &GridState) -> Result<Complex64> {
    if !a.same_grid(b) {
        return Err(QuenchError::GridMismatch(format!(
            "{} points (dx {}) vs {} points (dx {})",
            a.points(),
            a.dx,
            b.points(),
            b.dx
        )));
    }
    let n = a.points();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..n {
        let w = if j == 0 || j + 1 == n { 0.5 } else { 1.0 };
        acc += a.amplitudes[j].conj() * b.amplitudes[j] * w;
    }
    Ok(acc * a.dx)
}

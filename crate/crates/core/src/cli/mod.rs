//! The `quench` command-line front end.
//!
//! Every subcommand writes one table, to stdout or `--output`, as CSV with
//! `#` metadata lines or as JSON lines. Exit codes: 0 success, 1 failed
//! verification, 2 usage error, 3 numerical non-convergence.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::QuenchError;
use crate::fractal::{
    dimension_fit, measure_lengths, normality_diagnostics, phase_sum_samples, ruler_set,
    sigma_scaling,
};
use crate::numeric::{linear_grid, log_grid};
use crate::oracle::checks::{run_suite, SuiteConfig};
use crate::spectral::{
    density_field, tail_bound as series_tail_bound, truncation_for_tolerance, ModeCoefficients,
    Observable, WellConfig,
};
use crate::survival::{
    asymptote_confined, asymptote_free, escape_integral, transition_time, SurvivalSeries,
};
use crate::universal::{
    tail_bound as f_tail_bound, valley_locations, UniversalCurve, DEFAULT_TERMS,
};

use config::ConfigFile;
use output::{Cell, Format, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Largest truncation of the `F` series a tolerance may ask for.
const MAX_F_TERMS: usize = 100_000_000;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Verification(_) => EXIT_VERIFICATION,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<QuenchError> for CliError {
    fn from(e: QuenchError) -> Self {
        match e {
            QuenchError::NonConvergence { .. }
            | QuenchError::TruncationCap { .. }
            | QuenchError::TruncationInconsistent { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "quench",
    version,
    about = "Escape dynamics after a sudden square-well expansion"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Expansion coefficients a_n of the initial state.
    Coeffs(CoeffsArgs),
    /// Probability density on an (x, t) grid.
    Evolve(EvolveArgs),
    /// Escape probability by every method on a time grid.
    Escape(EscapeArgs),
    /// The universal function F and its valleys.
    Universal(UniversalArgs),
    /// Ruler lengths of F, phase-sum statistics and the dimension fit.
    Fractal(FractalArgs),
    /// Cross-checks against the grid propagator and quadrature.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Flat key = value file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (default: stdout).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct Truncation {
    /// Number of modes (or terms).
    #[arg(long = "n", conflicts_with = "tol")]
    pub n: Option<usize>,
    /// Choose the truncation from the analytic tail bound.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct CoeffsArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[command(flatten)]
    pub truncation: Truncation,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct EvolveArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[command(flatten)]
    pub truncation: Truncation,
    /// Points on [0, L].
    #[arg(long)]
    pub x_points: Option<usize>,
    /// Points on [0, t_max].
    #[arg(long)]
    pub t_points: Option<usize>,
    /// Last time (default: the revival period T).
    #[arg(long)]
    pub t_max: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct EscapeArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[command(flatten)]
    pub truncation: Truncation,
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Log-spaced points between t_min and t_max.
    #[arg(long)]
    pub points: Option<usize>,
    /// Prepend a t = 0 row.
    #[arg(long)]
    pub include_zero: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct UniversalArgs {
    #[command(flatten)]
    pub truncation: Truncation,
    /// Intervals across the sampled range.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub xmin: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub xmax: Option<f64>,
    /// Largest denominator root p in the valley scan q/p².
    #[arg(long)]
    pub p_max: Option<usize>,
    /// Largest numerator q in the valley scan.
    #[arg(long)]
    pub q_scan: Option<usize>,
    /// Write the valley table here as well.
    #[arg(long)]
    pub valleys: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct FractalArgs {
    #[command(flatten)]
    pub truncation: Truncation,
    #[arg(long)]
    pub eps_min: Option<f64>,
    #[arg(long)]
    pub eps_max: Option<f64>,
    /// Number of log-spaced rulers.
    #[arg(long)]
    pub rulers: Option<usize>,
    /// Spread of the phase sums against the ruler instead of lengths.
    #[arg(long, conflicts_with_all = ["histogram", "selftest"])]
    pub sigma: bool,
    /// Histogram of the phase sums at one ruler.
    #[arg(long, conflicts_with = "selftest")]
    pub histogram: bool,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub bins: Option<usize>,
    /// Fit the synthetic law l = ε^(-1/4); fails unless D = 1.25.
    #[arg(long)]
    pub selftest: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub t: Option<f64>,
    /// Grid points for the propagator and overlap checks.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub modes: Option<usize>,
    /// Shorthand for --format json.
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub common: Common,
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Tables go to `stdout` unless an output path is set;
/// diagnostics go to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli.command, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "quench: {e}");
            e.exit_code()
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn execute(command: &Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Coeffs(a) => cmd_coeffs(a, stdout),
        Command::Evolve(a) => cmd_evolve(a, stdout),
        Command::Escape(a) => cmd_escape(a, stdout),
        Command::Universal(a) => cmd_universal(a, stdout),
        Command::Fractal(a) => cmd_fractal(a, stdout),
        Command::OracleCheck(a) => cmd_oracle_check(a, stdout),
    }
}

/// Resolved output settings.
struct Sink {
    path: Option<PathBuf>,
    format: Format,
}

impl Sink {
    fn resolve(common: &Common, file: &ConfigFile) -> Result<Self, CliError> {
        let format = match common.format {
            Some(f) => f,
            None => match file.string("format", None)? {
                None => Format::Csv,
                Some(s) => Format::parse(&s)
                    .ok_or_else(|| CliError::Usage(format!("unknown format `{s}`")))?,
            },
        };
        let path = match &common.output {
            Some(p) => Some(p.clone()),
            None => file.string("output", None)?.map(PathBuf::from),
        };
        Ok(Self { path, format })
    }

    fn emit(&self, table: &Table, stdout: &mut dyn Write) -> Result<(), CliError> {
        let text = table.render(self.format);
        match &self.path {
            Some(p) => write_file(p, &text),
            None => stdout
                .write_all(text.as_bytes())
                .map_err(|e| CliError::Usage(format!("stdout: {e}"))),
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Exactly one of `n` and `tol`, flags first, then the file.
enum Trunc {
    Modes(usize),
    Tolerance(f64),
}

fn resolve_truncation(
    t: &Truncation,
    file: &ConfigFile,
    default_tol: f64,
) -> Result<Trunc, CliError> {
    match (t.n, t.tol) {
        (Some(n), _) => return modes(n),
        (_, Some(tol)) => return tolerance(tol),
        _ => {}
    }
    match (file.usize("n", None)?, file.f64("tol", None)?) {
        (Some(_), Some(_)) => Err(CliError::Usage(
            "config sets both `n` and `tol`; choose one".into(),
        )),
        (Some(n), None) => modes(n),
        (None, Some(tol)) => tolerance(tol),
        (None, None) => tolerance(default_tol),
    }
}

fn modes(n: usize) -> Result<Trunc, CliError> {
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    Ok(Trunc::Modes(n))
}

fn tolerance(tol: f64) -> Result<Trunc, CliError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::Usage(format!(
            "--tol must be positive, got {tol}"
        )));
    }
    Ok(Trunc::Tolerance(tol))
}

impl Trunc {
    /// Mode count for a series observable, recording the choice in `table`.
    fn series_modes(
        &self,
        config: &WellConfig,
        obs: Observable,
        table: &mut Table,
    ) -> Result<usize, CliError> {
        let n = match *self {
            Trunc::Modes(n) => n,
            Trunc::Tolerance(tol) => {
                table.meta("tolerance", tol);
                truncation_for_tolerance(config, obs, tol)?
            }
        };
        table.meta("modes", n);
        table.meta("tail_bound", series_tail_bound(config, obs, n));
        Ok(n)
    }

    /// Term count for `F`, recording the choice in `table`.
    fn f_terms(&self, table: &mut Table) -> Result<usize, CliError> {
        let n = match *self {
            Trunc::Modes(n) => n.max(1),
            Trunc::Tolerance(tol) => {
                table.meta("tolerance", tol);
                f_terms_for_tolerance(tol)?
            }
        };
        table.meta("terms", n);
        table.meta("tail_bound", f_tail_bound(n));
        Ok(n)
    }
}

fn f_terms_for_tolerance(tol: f64) -> Result<usize, CliError> {
    if f_tail_bound(MAX_F_TERMS) > tol {
        return Err(QuenchError::TruncationCap {
            tol,
            cap: MAX_F_TERMS,
        }
        .into());
    }
    let (mut lo, mut hi) = (1usize, 2usize);
    while f_tail_bound(hi) > tol {
        lo = hi;
        hi = (hi * 2).min(MAX_F_TERMS);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if f_tail_bound(mid) > tol {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

fn require_delta(flag: Option<f64>, file: &ConfigFile) -> Result<WellConfig, CliError> {
    let delta = file
        .f64("delta", flag)?
        .ok_or_else(|| CliError::Usage("--delta is required".into()))?;
    Ok(WellConfig::new(delta)?)
}

fn well_meta(table: &mut Table, config: &WellConfig) {
    table.meta("delta", config.delta());
    table.meta("width", config.width());
    table.meta("period", config.period());
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::Usage(format!(
            "--{name} must be positive, got {v}"
        )))
    }
}

fn at_least(name: &str, v: usize, min: usize) -> Result<usize, CliError> {
    if v >= min {
        Ok(v)
    } else {
        Err(CliError::Usage(format!(
            "--{name} must be at least {min}, got {v}"
        )))
    }
}

pub fn cmd_coeffs(a: &CoeffsArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let file = ConfigFile::load(a.common.config.as_deref())?;
    let sink = Sink::resolve(&a.common, &file)?;
    let config = require_delta(a.delta, &file)?;
    let trunc = resolve_truncation(&a.truncation, &file, 1e-8)?;
    let mut table = Table::new("coeffs", &["n", "a_n"]);
    well_meta(&mut table, &config);
    let n = trunc.series_modes(&config, Observable::Coefficients, &mut table)?;
    let coeffs = ModeCoefficients::new(&config, n)?;
    table.meta("completeness_deficit", coeffs.completeness_deficit());
    for (i, &c) in coeffs.values().iter().enumerate() {
        table.row(vec![(i + 1).into(), c.into()]);
    }
    sink.emit(&table, stdout)
}

pub fn cmd_evolve(a: &EvolveArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let file = ConfigFile::load(a.common.config.as_deref())?;
    let sink = Sink::resolve(&a.common, &file)?;
    let config = require_delta(a.delta, &file)?;
    let trunc = resolve_truncation(&a.truncation, &file, 1e-3)?;
    let nx = at_least(
        "x-points",
        file.usize("x_points", a.x_points)?.unwrap_or(512),
        2,
    )?;
    let nt = at_least(
        "t-points",
        file.usize("t_points", a.t_points)?.unwrap_or(512),
        1,
    )?;
    let t_max = positive(
        "t-max",
        file.f64("t_max", a.t_max)?.unwrap_or(config.period()),
    )?;

    let mut table = Table::new("evolve", &["t", "density"]);
    well_meta(&mut table, &config);
    let n = trunc.series_modes(&config, Observable::Wavefunction, &mut table)?;
    let x_grid = linear_grid(0.0, config.width(), nx);
    let t_grid = linear_grid(0.0, t_max, nt);
    table.meta(
        "x_grid",
        format!("linear 0 {} {nx}", output::float(config.width())),
    );
    table.meta("t_grid", format!("linear 0 {} {nt}", output::float(t_max)));
    let coeffs = ModeCoefficients::new(&config, n)?;
    let field = density_field(&config, &coeffs, &x_grid, &t_grid)?;
    for (i, &t) in t_grid.iter().enumerate() {
        table.row(vec![t.into(), Cell::List(field.row(i).to_vec())]);
    }
    sink.emit(&table, stdout)
}

pub fn cmd_escape(a: &EscapeArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let file = ConfigFile::load(a.common.config.as_deref())?;
    let sink = Sink::resolve(&a.common, &file)?;
    let config = require_delta(a.delta, &file)?;
    let trunc = resolve_truncation(&a.truncation, &file, 1e-15)?;
    let t_min = positive("t-min", file.f64("t_min", a.t_min)?.unwrap_or(1e-8))?;
    let t_max = positive("t-max", file.f64("t_max", a.t_max)?.unwrap_or(1e-2))?;
    let points = at_least("points", file.usize("points", a.points)?.unwrap_or(61), 2)?;
    let include_zero = file.flag("include_zero", a.include_zero)?;
    if t_max <= t_min {
        return Err(CliError::Usage(format!(
            "--t-max {t_max} must exceed --t-min {t_min}"
        )));
    }

    let columns = [
        "t",
        "exact",
        "small_delta",
        "integral",
        "asymptote_free",
        "asymptote_confined",
    ];
    let mut table = Table::new("escape", &columns);
    well_meta(&mut table, &config);
    let n = trunc.series_modes(&config, Observable::Survival, &mut table)?;
    table.meta(
        "t_grid",
        format!(
            "log {} {} {points}",
            output::float(t_min),
            output::float(t_max)
        ),
    );
    table.meta("include_zero", if include_zero { "true" } else { "false" });
    table.meta("transition_time", transition_time(config.delta()));

    let mut times = log_grid(t_min, t_max, points);
    if include_zero {
        times.insert(0, 0.0);
    }
    let series = SurvivalSeries::new(&config, n)?;
    use rayon::prelude::*;
    let rows: Result<Vec<Vec<Cell>>, QuenchError> = times
        .par_iter()
        .map(|&t| {
            Ok(vec![
                t.into(),
                series.escape(t)?.into(),
                crate::survival::escape_small_delta(&config, t, n)?.into(),
                escape_integral(config.delta(), t)?.into(),
                asymptote_free(t).into(),
                asymptote_confined(config.delta(), t).into(),
            ])
        })
        .collect();
    for row in rows? {
        table.row(row);
    }
    sink.emit(&table, stdout)
}

pub fn cmd_universal(a: &UniversalArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let file = ConfigFile::load(a.common.config.as_deref())?;
    let sink = Sink::resolve(&a.common, &file)?;
    let trunc = match (
        a.truncation.n,
        a.truncation.tol,
        file.has("n") || file.has("tol"),
    ) {
        (None, None, false) => Trunc::Modes(DEFAULT_TERMS),
        _ => resolve_truncation(&a.truncation, &file, 0.0)?,
    };
    let points = at_least("points", file.usize("points", a.points)?.unwrap_or(512), 1)?;
    let xmin = file.f64("xmin", a.xmin)?;
    let xmax = file.f64("xmax", a.xmax)?;
    let p_max = at_least("p-max", file.usize("p_max", a.p_max)?.unwrap_or(3), 2)?;
    let q_scan = file.usize("q_scan", a.q_scan)?;
    let valley_path = match &a.valleys {
        Some(p) => Some(p.clone()),
        None => file.string("valleys", None)?.map(PathBuf::from),
    };

    let mut table = Table::new("universal", &["xi", "F", "tail_bound"]);
    let terms = trunc.f_terms(&mut table)?;
    let curve = match (xmin, xmax) {
        (None, None) => {
            table.meta("xi_grid", format!("uniform 0 1 {points}"));
            UniversalCurve::uniform(points, terms)?
        }
        (lo, hi) => {
            let lo = lo.unwrap_or(0.0);
            let hi = hi.unwrap_or(1.0);
            if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
                return Err(CliError::Usage(format!(
                    "--xmax {hi} must exceed --xmin {lo}"
                )));
            }
            table.meta(
                "xi_grid",
                format!(
                    "linear {} {} {points}",
                    output::float(lo),
                    output::float(hi)
                ),
            );
            UniversalCurve::sample(&linear_grid(lo, hi, points + 1), terms)?
        }
    };
    let valleys = valley_locations(p_max as u64, q_scan.map(|q| q as u64), terms)?;
    table.meta("p_max", p_max);
    table.meta(
        "valleys",
        valleys
            .entries
            .iter()
            .map(|v| format!("{}/{}^2", v.q, v.p))
            .collect::<Vec<_>>()
            .join(" "),
    );
    for (&x, &f) in curve.xi_grid.iter().zip(&curve.values) {
        table.row(vec![x.into(), f.into(), curve.tail_bound.into()]);
    }
    if let Some(path) = valley_path {
        let mut vt = Table::new("universal-valleys", &["q", "p", "xi", "F"]);
        vt.meta("terms", terms);
        vt.meta("p_max", p_max);
        vt.meta("probe", crate::universal::VALLEY_PROBE);
        for v in &valleys.entries {
            vt.row(vec![
                v.q.into(),
                v.p.into(),
                v.location.into(),
                v.depth.into(),
            ]);
        }
        write_file(&path, &vt.render(sink.format))?;
    }
    sink.emit(&table, stdout)
}

pub fn cmd_fractal(a: &FractalArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let file = ConfigFile::load(a.common.config.as_deref())?;
    let sink = Sink::resolve(&a.common, &file)?;
    let sigma = file.flag("sigma", a.sigma)?;
    let histogram = file.flag("histogram", a.histogram)?;
    let selftest = file.flag("selftest", a.selftest)?;
    if [sigma, histogram, selftest].iter().filter(|b| **b).count() > 1 {
        return Err(CliError::Usage(
            "choose at most one of --sigma, --histogram, --selftest".into(),
        ));
    }

    if histogram {
        let eps = positive("epsilon", file.f64("epsilon", a.epsilon)?.unwrap_or(1e-5))?;
        let bins = at_least("bins", file.usize("bins", a.bins)?.unwrap_or(40), 1)?;
        let sample = phase_sum_samples(eps)?;
        let report = normality_diagnostics(&sample, bins)?;
        let mut table = Table::new(
            "fractal-histogram",
            &["left", "right", "count", "normal_expected"],
        );
        table.meta("epsilon", eps);
        table.meta("cutoff", sample.cutoff);
        table.meta("samples", report.samples);
        table.meta("mean", report.mean);
        table.meta("std", report.std);
        table.meta(
            "skewness",
            report.skewness.map_or(Cell::from("undefined"), Cell::from),
        );
        table.meta(
            "excess_kurtosis",
            report
                .excess_kurtosis
                .map_or(Cell::from("undefined"), Cell::from),
        );
        for b in &report.bins {
            table.row(vec![
                b.left.into(),
                b.right.into(),
                b.count.into(),
                b.normal_expected.into(),
            ]);
        }
        return sink.emit(&table, stdout);
    }

    let (def_min, def_max, def_count) = if sigma {
        (1e-6, 1e-2, 9)
    } else {
        (1e-5, 1e-2, 13)
    };
    let eps_min = positive(
        "eps-min",
        file.f64("eps_min", a.eps_min)?.unwrap_or(def_min),
    )?;
    let eps_max = positive(
        "eps-max",
        file.f64("eps_max", a.eps_max)?.unwrap_or(def_max),
    )?;
    let count = at_least(
        "rulers",
        file.usize("rulers", a.rulers)?.unwrap_or(def_count),
        2,
    )?;
    let rulers = ruler_set(eps_min, eps_max, count)?;

    if sigma {
        let (rows, slope) = sigma_scaling(&rulers)?;
        let mut table = Table::new("fractal-sigma", &["epsilon", "sigma"]);
        table.meta(
            "rulers",
            format!(
                "log {} {} {count}",
                output::float(eps_min),
                output::float(eps_max)
            ),
        );
        table.meta("slope", slope);
        for (e, s) in rows {
            table.row(vec![e.into(), s.into()]);
        }
        return sink.emit(&table, stdout);
    }

    let mut table = Table::new("fractal", &["epsilon", "l_printed", "l_simplified"]);
    table.meta(
        "rulers",
        format!(
            "log {} {} {count}",
            output::float(eps_min),
            output::float(eps_max)
        ),
    );
    let (printed, simplified): (Vec<f64>, Vec<f64>) = if selftest {
        table.meta("selftest", "l = epsilon^(-1/4)");
        let l: Vec<f64> = rulers.iter().map(|e| e.powf(-0.25)).collect();
        (l.clone(), l)
    } else {
        let trunc = match (
            a.truncation.n,
            a.truncation.tol,
            file.has("n") || file.has("tol"),
        ) {
            (None, None, false) => Trunc::Modes(DEFAULT_TERMS),
            _ => resolve_truncation(&a.truncation, &file, 0.0)?,
        };
        let terms = trunc.f_terms(&mut table)?;
        let lengths = measure_lengths(&rulers, terms)?;
        lengths.iter().map(|l| (l.printed, l.simplified)).unzip()
    };
    let fit_p = dimension_fit(&rulers, &printed)?;
    let fit_s = dimension_fit(&rulers, &simplified)?;
    table.meta("dimension_printed", fit_p.dimension);
    table.meta("dimension_simplified", fit_s.dimension);
    table.meta("slope_printed", fit_p.slope);
    table.meta("residual_printed", fit_p.residual);
    for (i, &e) in rulers.iter().enumerate() {
        table.row(vec![e.into(), printed[i].into(), simplified[i].into()]);
    }
    sink.emit(&table, stdout)?;
    if selftest && (fit_p.dimension - 1.25).abs() > 1e-9 {
        return Err(CliError::Verification(format!(
            "self-test dimension {} differs from 1.25",
            fit_p.dimension
        )));
    }
    Ok(())
}

pub fn cmd_oracle_check(a: &OracleArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let file = ConfigFile::load(a.common.config.as_deref())?;
    let mut sink = Sink::resolve(&a.common, &file)?;
    if file.flag("json", a.json)? {
        sink.format = Format::Json;
    }
    let d = SuiteConfig::default();
    let cfg = SuiteConfig {
        delta: file.f64("delta", a.delta)?.unwrap_or(d.delta),
        t: positive("t", file.f64("t", a.t)?.unwrap_or(d.t))?,
        points: at_least(
            "points",
            file.usize("points", a.points)?.unwrap_or(d.points),
            3,
        )?,
        steps: at_least("steps", file.usize("steps", a.steps)?.unwrap_or(d.steps), 1)?,
        modes: at_least("modes", file.usize("modes", a.modes)?.unwrap_or(d.modes), 1)?,
    };
    WellConfig::new(cfg.delta)?;
    let checks = run_suite(&cfg)?;
    let mut table = Table::new(
        "oracle-check",
        &["check", "measured", "threshold", "status"],
    );
    table.meta("delta", cfg.delta);
    table.meta("t", cfg.t);
    table.meta("points", cfg.points);
    table.meta("steps", cfg.steps);
    table.meta("modes", cfg.modes);
    for c in &checks {
        table.row(vec![
            c.name.as_str().into(),
            c.measured.into(),
            c.threshold.into(),
            if c.passed { "pass" } else { "fail" }.into(),
        ]);
    }
    sink.emit(&table, stdout)?;
    let failed: Vec<&str> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.as_str())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("quench").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn f_terms_match_bound() {
        let n = f_terms_for_tolerance(2e-5).unwrap();
        assert!(f_tail_bound(n) <= 2e-5);
        assert!(f_tail_bound(n - 1) > 2e-5);
        assert!(f_terms_for_tolerance(1e-12).is_err());
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_capture(&["coeffs", "--n", "3"]).0, EXIT_USAGE);
        assert_eq!(
            run_capture(&["coeffs", "--delta", "0.2", "--n", "3", "--tol", "1e-3"]).0,
            EXIT_USAGE
        );
        assert_eq!(
            run_capture(&["coeffs", "--delta", "-0.1", "--n", "3"]).0,
            EXIT_USAGE
        );
        assert_eq!(run_capture(&["nonsense"]).0, EXIT_USAGE);
    }

    #[test]
    fn truncation_cap_exits_three() {
        let (code, _, err) = run_capture(&["evolve", "--delta", "0.2", "--tol", "1e-12"]);
        assert_eq!(code, EXIT_NUMERICAL, "{err}");
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("oracle-check"));
    }
}

//! Argument parsing and the subcommands of `cod`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use cod_core::engine::{self, Field, StopPolicy, StopReason};
use cod_core::oracles::{crank_nicolson, leapfrog_wave};
use cod_core::oscillator::{self, power_series_solution, term_bound, upper_estimate, OscillatorProblem};
use cod_core::schrodinger_exp::{general_solution, residual, ExpPotentialProblem};
use cod_core::spectral::{self, PeriodicField, Variant};
use cod_core::tdse::{self, PropagatorStep, TdseSetup};
use cod_core::wave::{self, WaveProblem};
use cod_core::{CodScheme, Grid, GridFunction, C64};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::expr::Expr;
use crate::io::{self, RunReport};
use crate::verify::{self, Level};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SOLVER: i32 = 1;
pub const EXIT_DIVERGED: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Debug, Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Solver(String),
    #[error("{0}")]
    Diverged(String),
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) => EXIT_USAGE,
            AppError::Solver(_) => EXIT_SOLVER,
            AppError::Diverged(_) => EXIT_DIVERGED,
        }
    }
}

impl From<cod_core::Error> for AppError {
    fn from(e: cod_core::Error) -> Self {
        AppError::Solver(e.to_string())
    }
}

impl From<io::IoError> for AppError {
    fn from(e: io::IoError) -> Self {
        AppError::Solver(e.to_string())
    }
}

type AppResult<T> = Result<T, AppError>;

/// Numeric flag values accept constant expressions such as `2*pi`.
fn number(s: &str) -> Result<f64, String> {
    let v = Expr::parse(s, &[]).map_err(|e| e.to_string())?.eval(&[]);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not a finite number"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "cod", version, about = "Cyclic operator decomposition series solvers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// f'' + w^2(t) f = 0 with f(t_a) = a, f'(t_b) = b
    #[command(args_override_self = true)]
    Oscillator(OscillatorArgs),
    /// Closed-form series for w^2 = -t^alpha, f(0) = 1, f'(0) = 0
    #[command(args_override_self = true)]
    PowerSeries(PowerSeriesArgs),
    /// psi'' + (m^2 - A e^x) psi = 0
    #[command(args_override_self = true)]
    ExpPotential(ExpPotentialArgs),
    /// [Laplacian + 2(E - U)] psi = phi on a periodic box
    #[command(args_override_self = true)]
    Stationary(StationaryArgs),
    /// Time-dependent Schrodinger equation on a periodic grid
    #[command(args_override_self = true)]
    Tdse(TdseArgs),
    /// d/dt(eps(x) dA/dt) = d^2A/dx^2 on a periodic grid
    #[command(args_override_self = true)]
    Wave(WaveArgs),
    /// Run the acceptance suite and print a pass/fail table
    #[command(args_override_self = true)]
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct SeriesArgs {
    /// Stop once two consecutive terms are below tol * (1 + |partial sum|)
    #[arg(long, default_value = "1e-12", value_parser = number)]
    pub tol: f64,
    #[arg(long, default_value_t = 100)]
    pub max_terms: usize,
    /// Divergence is declared when |term_n| >= factor * |term_{n-window}|
    #[arg(long, default_value_t = 5)]
    pub divergence_window: usize,
    #[arg(long, default_value = "10", value_parser = number)]
    pub divergence_factor: f64,
}

impl SeriesArgs {
    fn policy(&self) -> AppResult<StopPolicy> {
        if self.divergence_window < 1 || self.divergence_factor <= 1.0 {
            return Err(AppError::Usage("divergence window must be >= 1 and factor > 1".into()));
        }
        StopPolicy::new(self.tol, self.max_terms)
            .map(|p| p.with_divergence(self.divergence_window, self.divergence_factor))
            .map_err(|e| AppError::Usage(e.to_string()))
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    /// Directory for the CSV and JSON outputs
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct OscillatorArgs {
    /// w^2 as an expression in t
    #[arg(long, conflicts_with = "from_csv", allow_hyphen_values = true)]
    pub omega_sq: Option<String>,
    /// Sampled w^2 as `t,re[,im]` rows on a uniform grid
    #[arg(long)]
    pub from_csv: Option<PathBuf>,
    #[arg(long, default_value = "0", value_parser = number)]
    pub t_min: f64,
    #[arg(long, default_value = "1", value_parser = number)]
    pub t_max: f64,
    #[arg(long, default_value = "1e-3", value_parser = number)]
    pub step: f64,
    #[arg(long, default_value = "1", value_parser = number, allow_hyphen_values = true)]
    pub a: f64,
    #[arg(long, default_value = "0", value_parser = number, allow_hyphen_values = true)]
    pub a_im: f64,
    #[arg(long, default_value = "0", value_parser = number, allow_hyphen_values = true)]
    pub b: f64,
    #[arg(long, default_value = "0", value_parser = number, allow_hyphen_values = true)]
    pub b_im: f64,
    /// Anchor of f (defaults to the grid start)
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    pub t_a: Option<f64>,
    /// Anchor of f' (defaults to the grid start)
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    pub t_b: Option<f64>,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PowerSeriesArgs {
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 25)]
    pub terms: usize,
    #[arg(long, default_value = "1", value_parser = number)]
    pub t_max: f64,
    #[arg(long, default_value = "0.01", value_parser = number)]
    pub step: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ExpPotentialArgs {
    /// m, with 2E = m^2
    #[arg(long, default_value = "1", value_parser = number, allow_hyphen_values = true)]
    pub m: f64,
    /// A in the potential A e^x
    #[arg(long, default_value = "1", value_parser = number, allow_hyphen_values = true)]
    pub amplitude: f64,
    #[arg(long, default_value = "1", value_parser = number, allow_hyphen_values = true)]
    pub c1: f64,
    #[arg(long, default_value = "0", value_parser = number, allow_hyphen_values = true)]
    pub c1_im: f64,
    #[arg(long, default_value = "0", value_parser = number, allow_hyphen_values = true)]
    pub c2: f64,
    #[arg(long, default_value = "0", value_parser = number, allow_hyphen_values = true)]
    pub c2_im: f64,
    #[arg(long, default_value_t = 30)]
    pub terms: usize,
    #[arg(long, default_value = "-5", value_parser = number, allow_hyphen_values = true)]
    pub x_min: f64,
    #[arg(long, default_value = "1", value_parser = number, allow_hyphen_values = true)]
    pub x_max: f64,
    #[arg(long, default_value = "1e-3", value_parser = number)]
    pub step: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Laplace,
    Resolvent,
}

#[derive(Debug, Clone, Args)]
pub struct PeriodicGridArgs {
    /// Number of grid points (even, >= 4)
    #[arg(long, default_value_t = 64)]
    pub points: usize,
    #[arg(long, default_value = "2*pi", value_parser = number)]
    pub box_length: f64,
    /// Left edge of the box (defaults to 0)
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    pub start: Option<f64>,
}

impl PeriodicGridArgs {
    fn grid(&self, default_start: f64) -> AppResult<Grid> {
        if self.points < 4 || !self.points.is_multiple_of(2) || self.points > 4096 {
            return Err(AppError::Usage("--points must be even and between 4 and 4096".into()));
        }
        positive("box-length", self.box_length)?;
        Grid::periodic(self.start.unwrap_or(default_start), self.box_length, self.points)
            .map_err(|e| AppError::Usage(e.to_string()))
    }
}

#[derive(Debug, Clone, Args)]
pub struct StationaryArgs {
    /// U as an expression in x
    #[arg(long, default_value = "0", conflicts_with = "from_csv", allow_hyphen_values = true)]
    pub potential: String,
    /// Sampled U as `x,re[,im]` rows on the periodic grid
    #[arg(long)]
    pub from_csv: Option<PathBuf>,
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    pub energy: f64,
    #[arg(long, value_enum, default_value = "resolvent")]
    pub variant: VariantArg,
    /// Generating function (defaults to 1 for laplace, 0 for resolvent)
    #[arg(long, allow_hyphen_values = true)]
    pub psi_g: Option<String>,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub psi_g_im: String,
    /// Source phi in [Laplacian + 2(E - U)] psi = phi
    #[arg(long, allow_hyphen_values = true)]
    pub source: Option<String>,
    #[command(flatten)]
    pub grid: PeriodicGridArgs,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TdseArgs {
    /// U as an expression in x and t
    #[arg(long, default_value = "0")]
    pub potential: String,
    /// Uniform vector potential A as an expression in t
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub vector_potential: String,
    /// Real part of the initial state, an expression in x
    #[arg(long, allow_hyphen_values = true)]
    pub psi0: String,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub psi0_im: String,
    #[arg(long, default_value = "1e-2", value_parser = number)]
    pub dt: f64,
    #[arg(long, default_value = "1", value_parser = number)]
    pub t_final: f64,
    /// Series terms per step
    #[arg(long, default_value_t = 4)]
    pub terms: usize,
    /// Sub-nodes per step (defaults to terms + 1)
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Also run Crank-Nicolson at dt/16 and report the distance
    #[arg(long)]
    pub oracle: bool,
    #[command(flatten)]
    pub grid: PeriodicGridArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct WaveArgs {
    /// Permittivity eps(x) > 0 as an expression in x
    #[arg(long, default_value = "1", conflicts_with = "from_csv", allow_hyphen_values = true)]
    pub epsilon: String,
    /// Sampled eps as `x,re` rows on the periodic grid
    #[arg(long)]
    pub from_csv: Option<PathBuf>,
    /// Initial field A(x, 0)
    #[arg(long, allow_hyphen_values = true)]
    pub s: String,
    /// Initial eps dA/dt (x, 0)
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub r: String,
    #[arg(long, default_value = "1", value_parser = number)]
    pub t_max: f64,
    #[arg(long, default_value_t = 1001)]
    pub t_points: usize,
    /// Also write the row at this time (must be a grid time)
    #[arg(long, value_parser = number)]
    pub snapshot: Option<f64>,
    /// Also run the leapfrog oracle and report the distance
    #[arg(long)]
    pub oracle: bool,
    #[command(flatten)]
    pub grid: PeriodicGridArgs,
    #[command(flatten)]
    pub series: SeriesArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// Reduced resolution
    #[arg(long)]
    pub quick: bool,
}

fn positive(name: &str, v: f64) -> AppResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(AppError::Usage(format!("--{name} must be positive")))
    }
}

fn parse_expr(flag: &str, src: &str, vars: &[&str]) -> AppResult<Expr> {
    Expr::parse(src, vars).map_err(|e| AppError::Usage(format!("--{flag}: {e}")))
}

fn out_file(out: &OutArgs, name: &str) -> AppResult<PathBuf> {
    Ok(io::ensure_dir(&out.out_dir)?.join(name))
}

/// Parses `argv` (including the program name), runs the command and
/// returns the process exit code. Diagnostics go to standard error.
pub fn main_with(argv: Vec<String>) -> i32 {
    let argv = match crate::config::expand_args(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cmd: &Command) -> AppResult<i32> {
    match cmd {
        Command::Oscillator(a) => run_oscillator(a),
        Command::PowerSeries(a) => run_power_series(a),
        Command::ExpPotential(a) => run_exp_potential(a),
        Command::Stationary(a) => run_stationary(a),
        Command::Tdse(a) => run_tdse(a),
        Command::Wave(a) => run_wave(a),
        Command::Verify(a) => run_verify(a),
    }
}

fn finish<F>(run: &engine::SeriesRun<F>, report_path: &Path, hint: Option<String>) -> AppResult<i32> {
    println!("{}: {} after {} terms -> {}", run.label, run.stop_reason, run.terms_used, report_path.display());
    if run.stop_reason == StopReason::DivergenceDetected {
        let msg = hint.unwrap_or_else(|| "series diverged".into());
        return Err(AppError::Diverged(msg));
    }
    Ok(EXIT_OK)
}

fn run_oscillator(a: &OscillatorArgs) -> AppResult<i32> {
    let policy = a.series.policy()?;
    let omega_sq = match (&a.omega_sq, &a.from_csv) {
        (_, Some(path)) => io::read_grid_function(path)?,
        (Some(src), None) => {
            positive("step", a.step)?;
            if a.t_max <= a.t_min {
                return Err(AppError::Usage("--t-max must exceed --t-min".into()));
            }
            let grid = Grid::with_step(a.t_min, a.t_max, a.step).map_err(|e| AppError::Usage(e.to_string()))?;
            let e = parse_expr("omega-sq", src, &["t"])?;
            GridFunction::from_real_fn(grid, |t| e.eval1(t))
        }
        (None, None) => return Err(AppError::Usage("one of --omega-sq or --from-csv is required".into())),
    };
    let grid = *omega_sq.grid();
    let t_a = a.t_a.unwrap_or(grid.start());
    let t_b = a.t_b.unwrap_or(grid.start());
    let (fa, fb) = (C64::new(a.a, a.a_im), C64::new(a.b, a.b_im));
    let problem = OscillatorProblem::new(omega_sq.clone(), t_a, t_b, fa, fb)
        .map_err(|e| AppError::Usage(e.to_string()))?;
    let scheme = oscillator::build_scheme(&problem)?;
    let run = engine::run_cod(&scheme, &policy)?;
    let defect = engine::defect(&scheme, &run)?.sup_norm();

    let mut two_term = scheme.generating().clone();
    two_term.axpy(C64::new(1.0, 0.0), &scheme.cycle_map(scheme.generating())?);
    let delta = run.partial_sum.sup_distance(&two_term)?;
    let mut report = RunReport::from_run(&run, defect)
        .with("grid", json!({"start": grid.start(), "step": grid.step(), "count": grid.count()}))
        .with("two_term_delta", delta);
    if t_a == grid.start() && t_b == grid.start() && a.b == 0.0 && a.b_im == 0.0 {
        // |term_n| <= |a| C^n (t - t0)^{2n} / (2n)!
        let c_max = omega_sq.norms().sup;
        let h = grid.step();
        let mut excess = f64::NEG_INFINITY;
        for (n, term) in engine::terms(&scheme).take(run.terms_used + 1).enumerate().skip(1) {
            let term = term?;
            for (i, t) in grid.points().enumerate() {
                let b = term_bound(n, fa.norm(), c_max, t - grid.start());
                excess = excess.max(term[i].norm() - b - 10.0 * h * h);
            }
        }
        report = report.with("term_bound_c", c_max).with("term_bound_holds", excess <= 0.0);
    }
    io::write_grid_function(&out_file(&a.out, "oscillator.csv")?, "t", &run.partial_sum)?;
    let path = out_file(&a.out, "oscillator_report.json")?;
    io::write_json(&path, &report)?;
    finish(&run, &path, Some("series diverged; shorten the interval or refine the grid".into()))
}

fn run_power_series(a: &PowerSeriesArgs) -> AppResult<i32> {
    if a.alpha <= -1.0 {
        return Err(AppError::Usage("--alpha must be greater than -1".into()));
    }
    if a.terms < 1 {
        return Err(AppError::Usage("--terms must be at least 1".into()));
    }
    positive("t-max", a.t_max)?;
    positive("step", a.step)?;
    let grid = Grid::with_step(0.0, a.t_max, a.step).map_err(|e| AppError::Usage(e.to_string()))?;
    let s = power_series_solution(a.alpha, a.terms)?;
    let mut all_hold = true;
    let rows: Vec<Vec<String>> = grid
        .points()
        .map(|t| {
            let f = s.eval(t);
            let u = upper_estimate(a.alpha, t);
            let holds = f <= u;
            all_hold &= holds;
            vec![crate::format::g17(t), crate::format::g17(f), crate::format::g17(u), holds.to_string()]
        })
        .collect();
    io::write_table(&out_file(&a.out, "power_series.csv")?, &["t", "f", "upper_estimate", "inequality"], rows)?;
    let report = json!({
        "label": format!("power series alpha={}", a.alpha),
        "terms_used": a.terms,
        "coefficients": s.coefficients.iter().take(10).collect::<Vec<_>>(),
        "exponents": s.exponents.iter().take(10).collect::<Vec<_>>(),
        "upper_estimate_holds": all_hold,
    });
    let path = out_file(&a.out, "power_series_report.json")?;
    io::write_json(&path, &report)?;
    println!("power series alpha={}: upper estimate holds: {all_hold} -> {}", a.alpha, path.display());
    Ok(EXIT_OK)
}

fn run_exp_potential(a: &ExpPotentialArgs) -> AppResult<i32> {
    if a.m == 0.0 {
        return Err(AppError::Usage("--m must be nonzero (zero energy is degenerate)".into()));
    }
    if a.terms < 1 {
        return Err(AppError::Usage("--terms must be at least 1".into()));
    }
    positive("step", a.step)?;
    if a.x_max <= a.x_min {
        return Err(AppError::Usage("--x-max must exceed --x-min".into()));
    }
    let grid = Grid::with_step(a.x_min, a.x_max, a.step).map_err(|e| AppError::Usage(e.to_string()))?;
    let p = ExpPotentialProblem::new(a.m, a.amplitude, C64::new(a.c1, a.c1_im), C64::new(a.c2, a.c2_im))
        .map_err(|e| AppError::Usage(e.to_string()))?;
    let sol = general_solution(&p, a.terms)?;
    let psi = sol.sample(grid);
    let res = residual(&psi, a.m, a.amplitude)?;
    let rows = grid
        .points()
        .zip(psi.values().iter().zip(res.values()))
        .map(|(x, (v, r))| vec![x, v.re, v.im, r.norm()]);
    io::write_csv(&out_file(&a.out, "exp_potential.csv")?, &["x", "psi_re", "psi_im", "residual_abs"], rows)?;
    // sup over the window of |A e^x|^n |P_n|
    let z = (a.amplitude * a.x_max.exp()).abs();
    let term_norms: Vec<f64> =
        sol.series.product_coeffs.iter().enumerate().map(|(n, p)| p.norm() * z.powi(n as i32)).collect();
    let report = RunReport {
        label: format!("exp potential m={} A={}", a.m, a.amplitude),
        terms_used: a.terms,
        stop_reason: "fixed_terms".into(),
        term_sup_norms: term_norms,
        defect_sup_norm: res.norms().sup,
        extra: Default::default(),
    }
    .with("tail_bound_at_x_max", sol.series.tail_bound(a.x_max));
    let path = out_file(&a.out, "exp_potential_report.json")?;
    io::write_json(&path, &report)?;
    println!("{}: residual {:e} -> {}", report.label, report.defect_sup_norm, path.display());
    Ok(EXIT_OK)
}

fn periodic_from_expr(grid: Grid, re: &Expr, im: Option<&Expr>) -> AppResult<PeriodicField> {
    let f = GridFunction::from_fn(grid, |x| C64::new(re.eval1(x), im.map_or(0.0, |e| e.eval1(x))));
    Ok(PeriodicField::from_grid_function(&f)?)
}

fn run_stationary(a: &StationaryArgs) -> AppResult<i32> {
    let policy = a.series.policy()?;
    let potential = match &a.from_csv {
        Some(path) => PeriodicField::from_grid_function(&io::read_grid_function(path)?)
            .map_err(|e| AppError::Usage(e.to_string()))?,
        None => {
            let grid = a.grid.grid(0.0)?;
            periodic_from_expr(grid, &parse_expr("potential", &a.potential, &["x"])?, None)?
        }
    };
    let grid = potential.grid();
    let variant = match a.variant {
        VariantArg::Laplace => Variant::Laplace,
        VariantArg::Resolvent => Variant::Resolvent,
    };
    let default_g = if variant == Variant::Laplace { "1" } else { "0" };
    let g_re = parse_expr("psi-g", a.psi_g.as_deref().unwrap_or(default_g), &["x"])?;
    let g_im = parse_expr("psi-g-im", &a.psi_g_im, &["x"])?;
    let psi_g = periodic_from_expr(grid, &g_re, Some(&g_im))?;
    let scheme = spectral::build_scheme(&potential, a.energy, &psi_g, variant)?;
    let run = match &a.source {
        Some(src) => {
            let phi = periodic_from_expr(grid, &parse_expr("source", src, &["x"])?, None)?;
            engine::run_cod_with_source(&scheme, &phi, &policy)?
        }
        None => engine::run_cod(&scheme, &policy)?,
    };
    let defect = engine::defect(&scheme, &run)?.sup_norm();
    io::write_grid_function(&out_file(&a.out, "stationary.csv")?, "x", &run.partial_sum.to_grid_function()?)?;
    let report = RunReport::from_run(&run, defect)
        .with("variant", variant.as_str())
        .with("energy", a.energy)
        .with("points", grid.count());
    let path = out_file(&a.out, "stationary_report.json")?;
    io::write_json(&path, &report)?;
    finish(&run, &path, Some("series diverged; |2(E - U)| is too large for this component choice".into()))
}

#[derive(Debug, Serialize)]
struct TdseReport {
    label: String,
    steps: usize,
    dt: f64,
    terms_per_step: usize,
    quadrature_nodes: usize,
    time_dependent: bool,
    max_drift: f64,
    final_norm: f64,
    warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    crank_nicolson_distance: Option<f64>,
}

fn run_tdse(a: &TdseArgs) -> AppResult<i32> {
    positive("dt", a.dt)?;
    positive("t-final", a.t_final)?;
    if a.terms < 1 {
        return Err(AppError::Usage("--terms must be at least 1".into()));
    }
    let step = match a.nodes {
        Some(q) => PropagatorStep::with_nodes(a.dt, a.terms, q),
        None => PropagatorStep::new(a.dt, a.terms),
    }
    .map_err(|e| AppError::Usage(e.to_string()))?;
    tdse::step_count(a.t_final, a.dt).map_err(|e| AppError::Usage(e.to_string()))?;
    let grid = a.grid.grid(-0.5 * a.grid.box_length)?;
    let u = parse_expr("potential", &a.potential, &["x", "t"])?;
    let av = parse_expr("vector-potential", &a.vector_potential, &["t"])?;
    let re = parse_expr("psi0", &a.psi0, &["x"])?;
    let im = parse_expr("psi0-im", &a.psi0_im, &["x"])?;
    let psi0 = GridFunction::from_fn(grid, |x| C64::new(re.eval1(x), im.eval1(x)));
    let time_dependent = u.uses("t") || av.uses("t");
    let setup = if time_dependent {
        let u2 = u.clone();
        TdseSetup::new(
            grid,
            std::sync::Arc::new(move |x, t| u2.eval(&[x, t])),
            std::sync::Arc::new(move |t| av.eval1(t)),
            psi0,
        )
    } else {
        let a0 = av.eval1(0.0);
        let u2 = u.clone();
        TdseSetup::with_constant_field(grid, move |x| u2.eval(&[x, 0.0]), a0, psi0)
    }
    .map_err(|e| AppError::Usage(e.to_string()))?;

    let (psi, report) = tdse::propagate(&setup, &step, a.t_final)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let records: Vec<_> = report
        .records
        .iter()
        .map(|r| json!({"step": r.step, "t": r.t, "norm": r.norm, "drift": r.drift}))
        .collect();
    io::write_json_lines(&out_file(&a.out, "tdse_steps.jsonl")?, &records)?;
    io::write_grid_function(&out_file(&a.out, "tdse_final.csv")?, "x", &psi)?;
    let crank_nicolson_distance = if a.oracle {
        let cn = crank_nicolson(&setup, a.dt / 16.0, a.t_final)?;
        Some(psi.sup_distance(&cn.solution)?)
    } else {
        None
    };
    let out = TdseReport {
        label: format!("tdse n={} dt={}", grid.count(), a.dt),
        steps: report.records.len(),
        dt: a.dt,
        terms_per_step: step.n_terms,
        quadrature_nodes: step.quadrature_nodes,
        time_dependent,
        max_drift: report.max_drift,
        final_norm: psi.norms().l2,
        warnings: report.warnings.clone(),
        crank_nicolson_distance,
    };
    let path = out_file(&a.out, "tdse_report.json")?;
    io::write_json(&path, &out)?;
    println!("{}: {} steps, max norm drift {:e} -> {}", out.label, out.steps, out.max_drift, path.display());
    Ok(EXIT_OK)
}

fn run_wave(a: &WaveArgs) -> AppResult<i32> {
    let policy = a.series.policy()?;
    positive("t-max", a.t_max)?;
    if a.t_points < 4 || a.t_points > wave::MAX_AXIS {
        return Err(AppError::Usage(format!("--t-points must be between 4 and {}", wave::MAX_AXIS)));
    }
    let eps = match &a.from_csv {
        Some(path) => io::read_grid_function(path)?,
        None => {
            let grid = a.grid.grid(0.0)?;
            let e = parse_expr("epsilon", &a.epsilon, &["x"])?;
            GridFunction::from_real_fn(grid, |x| e.eval1(x))
        }
    };
    let x = *eps.grid();
    if x.count() > wave::MAX_AXIS {
        return Err(AppError::Usage(format!("at most {} x points", wave::MAX_AXIS)));
    }
    let s = parse_expr("s", &a.s, &["x"])?;
    let r = parse_expr("r", &a.r, &["x"])?;
    let problem = WaveProblem::new(
        eps,
        GridFunction::from_real_fn(x, |v| s.eval1(v)),
        GridFunction::from_real_fn(x, |v| r.eval1(v)),
    )
    .map_err(|e| AppError::Usage(e.to_string()))?;
    let t = Grid::spanning(0.0, a.t_max, a.t_points).map_err(|e| AppError::Usage(e.to_string()))?;
    if let Some(ts) = a.snapshot {
        if t.index_of(ts).is_none() {
            return Err(AppError::Usage(format!("--snapshot {ts} is not a grid time")));
        }
    }
    let scheme = wave::build_wave_scheme(&problem, x, t)?;
    let run = engine::run_cod(&scheme, &policy)?;
    let defect = engine::defect(&scheme, &run)?.sup_norm();
    let field = &run.partial_sum;
    let rows = (0..field.rows()).flat_map(|it| {
        let tv = t.point(it);
        (0..field.cols()).map(move |ix| {
            let v = field.at(it, ix);
            vec![tv, x.point(ix), v.re, v.im]
        })
    });
    io::write_csv(&out_file(&a.out, "wave_field.csv")?, &["t", "x", "re", "im"], rows)?;
    if let Some(ts) = a.snapshot {
        io::write_grid_function(&out_file(&a.out, "wave_snapshot.csv")?, "x", &field.snapshot(ts)?)?;
    }
    let (s_err, r_err) = wave::initial_condition_errors(field, &problem)?;
    let mut report = RunReport::from_run(&run, defect)
        .with("x_grid", json!({"start": x.start(), "step": x.step(), "count": x.count()}))
        .with("t_grid", json!({"start": 0.0, "step": t.step(), "count": t.count()}))
        .with("initial_s_error", s_err)
        .with("initial_r_error", r_err);
    if a.oracle && run.stop_reason != StopReason::DivergenceDetected {
        let o = leapfrog_wave(&problem, t, 2)?;
        report = report
            .with("leapfrog_distance", field.sup_distance(&o.solution)?)
            .with("leapfrog_error_estimate", o.error_estimate);
    }
    let path = out_file(&a.out, "wave_report.json")?;
    io::write_json(&path, &report)?;
    finish(&run, &path, Some(wave::divergence_hint(&problem, &x, a.t_max)))
}

fn run_verify(a: &VerifyArgs) -> AppResult<i32> {
    let level = if a.quick { Level::Quick } else { Level::Full };
    let results = verify::run_all(level);
    print!("{}", verify::format_table(&results));
    Ok(if results.iter().all(|r| r.passed) { EXIT_OK } else { EXIT_SOLVER })
}

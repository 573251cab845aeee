//! `chemotaxis` command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 2 | usage error (unknown flag, bad value syntax) |
//! | 3 | configuration file not found |
//! | 4 | configuration schema violation |
//! | 5 | snapshot or end time not aligned to the step grid |
//! | 6 | numerical failure (NaN/Inf or non-positive values) |
//! | 7 | I/O failure |
//! | 8 | fit failure or unreadable diagnostics file |

use std::path::PathBuf;
use std::process::ExitCode;

use chemotaxis::diagnostics::fit_exponential_rate;
use chemotaxis::integrator::{check_stability, Verdict};
use chemotaxis::runner::{read_diagnostics, run};
use chemotaxis::{DiagnosticsRecord, Error, Grid, GridMode, RunConfig, RunRecord, StepConfig};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "chemotaxis",
    version,
    about = "Chemotaxis system simulator with convergence diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Execute a run described by a TOML configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Case 1 preset: k = 0.8, mu1 = 0.8, mu2 = 0.9, r = 0.1, t_end = 1000.
    Case1 {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Case 2 preset: as Case 1 with k = 1, t_end = 1600.
    Case2 {
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Recompute a decay fit from a stored diagnostics.jsonl.
    Fit {
        #[arg(long)]
        diagnostics: PathBuf,
        /// Fit window as `t_lo,t_hi`.
        #[arg(long, value_parser = parse_window)]
        window: [f64; 2],
        #[arg(long, value_enum, default_value_t = Quantity::SqrtE)]
        quantity: Quantity,
    },
    /// Check a time step against the diffusive explicit Euler bound.
    Stability {
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        nx: usize,
        #[arg(long)]
        lx: f64,
        /// Defaults to `nx`.
        #[arg(long)]
        ny: Option<usize>,
        /// Defaults to `lx`.
        #[arg(long)]
        ly: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Quantity {
    SqrtE,
    LinfU,
    LinfV,
    LinfW,
    LinfTotal,
    LyapunovF,
}

impl Quantity {
    fn extract(self, r: &DiagnosticsRecord) -> f64 {
        match self {
            Quantity::SqrtE => r.l2_distance(),
            Quantity::LinfU => r.linf_u,
            Quantity::LinfV => r.linf_v,
            Quantity::LinfW => r.linf_w,
            Quantity::LinfTotal => r.linf_total(),
            Quantity::LyapunovF => r.lyapunov_f,
        }
    }
}

/// Overrides for every configuration key.
#[derive(Args, Debug, Default)]
struct Overrides {
    #[arg(long)]
    chi1: Option<f64>,
    #[arg(long)]
    chi2: Option<f64>,
    #[arg(long)]
    mu1: Option<f64>,
    #[arg(long)]
    mu2: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long, value_enum)]
    grid_mode: Option<GridModeArg>,
    #[arg(long)]
    lx: Option<f64>,
    #[arg(long)]
    ly: Option<f64>,
    /// Node spacing; implies `--grid-mode exact-spacing`.
    #[arg(long)]
    dx: Option<f64>,
    #[arg(long)]
    dy: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    floor: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    u0: Option<f64>,
    #[arg(long)]
    v0: Option<f64>,
    #[arg(long)]
    w0: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Comma-separated snapshot times.
    #[arg(long, value_delimiter = ',')]
    snapshot_times: Option<Vec<f64>>,
    #[arg(long)]
    diag_interval: Option<f64>,
    /// Upwind face densities (`--upwind` or `--upwind=false`).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    upwind: Option<bool>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Decay-fit window as `t_lo,t_hi`.
    #[arg(long, value_parser = parse_window)]
    fit_window: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GridModeArg {
    ExactDomain,
    ExactSpacing,
}

fn parse_window(s: &str) -> Result<[f64; 2], String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `t_lo,t_hi`, got {s:?}"))?;
    let parse = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    Ok([parse(a)?, parse(b)?])
}

impl Overrides {
    fn apply(self, cfg: &mut RunConfig) {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { cfg.$field = v; })*
            };
        }
        set!(chi1, chi2, mu1, mu2, r, k, nx, ny, dt, t_end, floor, seed, u0, v0, w0, sigma);
        set!(snapshot_times, diag_interval, upwind, out_dir);
        if let Some(m) = self.grid_mode {
            cfg.grid_mode = match m {
                GridModeArg::ExactDomain => GridMode::ExactDomain,
                GridModeArg::ExactSpacing => GridMode::ExactSpacing,
            };
        }
        if self.lx.is_some() || self.ly.is_some() {
            cfg.lx = self.lx.or(cfg.lx);
            cfg.ly = self.ly.or(cfg.ly);
        }
        if let Some(dx) = self.dx {
            cfg.set_spacing(dx, self.dy.unwrap_or(dx));
        } else if let Some(dy) = self.dy {
            cfg.dy = Some(dy);
        }
        if self.fit_window.is_some() {
            cfg.fit_window = self.fit_window;
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ConfigNotFound(_) => 3,
        Error::Schema(_) | Error::InvalidGrid(_) | Error::InvalidParams(_) => 4,
        Error::Misaligned { .. } => 5,
        Error::NonFinite { .. }
        | Error::NonPositiveSignal { .. }
        | Error::NonPositiveValue { .. } => 6,
        Error::Io { .. } => 7,
        Error::Fit(_) | Error::Parse(_) | Error::Json(_) | Error::GridMismatch(_) => 8,
    }
}

fn summarize(rec: &RunRecord) {
    let c = &rec.config;
    println!("out_dir: {}", c.out_dir.display());
    println!(
        "stability: {} (dt = {}, diffusive bound = {:.6})",
        verdict_word(rec.stability.verdict),
        rec.stability.dt,
        rec.stability.bound
    );
    if let Some(d) = &rec.final_diagnostics {
        println!(
            "t = {}: linf distances u {:.3e}, v {:.3e}, w {:.3e}; F = {:.3e}; E = {:.3e}",
            d.t, d.linf_u, d.linf_v, d.linf_w, d.lyapunov_f, d.dissipation_e
        );
    }
    if let Some(f) = rec.fits.as_ref() {
        match (&f.sqrt_e.fit, &f.sqrt_e.error) {
            (Some(fit), _) => println!(
                "sqrt(E) fit over [{}, {}]: lambda = {:.6e}, C = {:.6e}, residual = {:.3e}",
                fit.fit_window[0], fit.fit_window[1], fit.lambda, fit.c_amp, fit.residual
            ),
            (None, Some(e)) => println!("sqrt(E) fit: {e}"),
            _ => {}
        }
    }
    println!(
        "observed: min value {:.6e}, sup w {:.6e}, clamps {}, wall clock {:.2}s",
        rec.observed.min_value,
        rec.observed.max_w,
        rec.observed.total_clamps,
        rec.wall_clock_seconds
    );
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Warn => "warn",
    }
}

fn execute(cfg: RunConfig, preset: bool) -> Result<(), Error> {
    cfg.validate()?;
    if preset {
        println!(
            "note: chi1 = {}, chi2 = {} are library defaults, not preset-specified values (override with --chi1/--chi2)",
            cfg.chi1, cfg.chi2
        );
    }
    let rec = run(&cfg)?;
    summarize(&rec);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, overrides } => {
            let mut cfg = RunConfig::from_file(&config)?;
            overrides.apply(&mut cfg);
            execute(cfg, false)
        }
        Command::Case1 { overrides } => {
            let mut cfg = RunConfig::case1();
            overrides.apply(&mut cfg);
            execute(cfg, true)
        }
        Command::Case2 { overrides } => {
            let mut cfg = RunConfig::case2();
            overrides.apply(&mut cfg);
            execute(cfg, true)
        }
        Command::Fit {
            diagnostics,
            window,
            quantity,
        } => {
            let records = read_diagnostics(&diagnostics)?;
            let series: Vec<(f64, f64)> =
                records.iter().map(|r| (r.t, quantity.extract(r))).collect();
            let fit = fit_exponential_rate(&series, window)?;
            println!("{}", serde_json::to_string(&fit)?);
            Ok(())
        }
        Command::Stability { dt, nx, lx, ny, ly } => {
            let grid = Grid::new(nx, ny.unwrap_or(nx), lx, ly.unwrap_or(lx))?;
            let step = StepConfig::new(dt);
            step.validate()?;
            let adv = check_stability(&step, &grid);
            println!(
                "{} (dt = {}, bound = {:.6}, dx = {:.6}, dy = {:.6})",
                verdict_word(adv.verdict),
                dt,
                adv.bound,
                grid.dx(),
                grid.dy()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

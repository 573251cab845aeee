//! Experiment orchestration: initial data, the time loop and persisted
//! artifacts.
//!
//! A run writes into its own `out_dir`:
//!
//! - `snap_<field>_t<time>.csv` for `u`, `v`, `w` at every snapshot time
//! - `diagnostics.jsonl`, one [`DiagnosticsRecord`] per line
//! - `run.json`, the [`RunRecord`]

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::diagnostics::{collect, fit_exponential_rate, DecayFit, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::integrator::{check_stability, euler_step, StabilityAdvisory, State, StepOutputs};
use crate::params::{equilibrium, Equilibrium};
use crate::rng::NormalStream;
use crate::snapshot;

pub const DIAGNOSTICS_FILE: &str = "diagnostics.jsonl";
pub const RECORD_FILE: &str = "run.json";

/// `base + N(0, sigma²)` at every node of every field, floored.
pub fn perturbed_ic(base: [f64; 3], sigma: f64, seed: u64, grid: Grid, floor: f64) -> State {
    perturbed_ic_counted(base, sigma, seed, grid, floor).0
}

fn perturbed_ic_counted(
    base: [f64; 3],
    sigma: f64,
    seed: u64,
    grid: Grid,
    floor: f64,
) -> (State, usize) {
    let mut clamped = 0;
    let mut make = |field: u64, b: f64| {
        let mut stream = NormalStream::new(seed, field);
        let values = (0..grid.len())
            .map(|node| {
                let x = if sigma == 0.0 {
                    b
                } else {
                    b + sigma * stream.sample(node)
                };
                if x < floor {
                    clamped += 1;
                    floor
                } else {
                    x
                }
            })
            .collect();
        Field::from_values(grid, values).expect("grid-sized")
    };
    let u = make(0, base[0]);
    let v = make(1, base[1]);
    let w = make(2, base[2]);
    (State { u, v, w, t: 0.0 }, clamped)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedGrid {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
    pub dx: f64,
    pub dy: f64,
}

impl From<&Grid> for ResolvedGrid {
    fn from(g: &Grid) -> Self {
        ResolvedGrid {
            nx: g.nx(),
            ny: g.ny(),
            lx: g.lx(),
            ly: g.ly(),
            dx: g.dx(),
            dy: g.dy(),
        }
    }
}

/// A decay fit, or the reason it could not be made.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOutcome {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<DecayFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl From<Result<DecayFit>> for FitOutcome {
    fn from(r: Result<DecayFit>) -> Self {
        match r {
            Ok(fit) => FitOutcome {
                fit: Some(fit),
                error: None,
            },
            Err(e) => FitOutcome {
                fit: None,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fits {
    pub sqrt_e: FitOutcome,
    pub linf_u: FitOutcome,
    pub linf_v: FitOutcome,
    pub linf_w: FitOutcome,
}

/// Observed suprema standing in for the existential bounds of the theory.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Observed {
    #[serde(deserialize_with = "crate::diagnostics::f64_or_nan")]
    pub max_mass_u: f64,
    #[serde(deserialize_with = "crate::diagnostics::f64_or_nan")]
    pub max_mass_v: f64,
    #[serde(deserialize_with = "crate::diagnostics::f64_or_nan")]
    pub max_mass_w: f64,
    /// Ceiling of `∫u ln u + ∫v ln v` over all samples.
    #[serde(deserialize_with = "crate::diagnostics::f64_or_nan")]
    pub max_entropy: f64,
    /// Smallest nodal value of any field after any step.
    #[serde(deserialize_with = "crate::diagnostics::f64_or_nan")]
    pub min_value: f64,
    /// `sup ‖w‖∞` over all steps.
    #[serde(deserialize_with = "crate::diagnostics::f64_or_nan")]
    pub max_w: f64,
    /// `16 / (1 + max_w²)`, the sensitivity threshold evaluated a posteriori.
    #[serde(deserialize_with = "crate::diagnostics::f64_or_nan")]
    pub chi0_a_posteriori: f64,
    /// Whether `chi1² + chi2² ≤ chi0_a_posteriori`.
    pub sensitivity_small: bool,
    pub total_clamps: usize,
    pub clamps_after_t1: usize,
    #[serde(deserialize_with = "crate::diagnostics::f64_or_nan")]
    pub max_chemo_flux: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config: RunConfig,
    pub grid: ResolvedGrid,
    pub equilibrium: Equilibrium,
    pub stability: StabilityAdvisory,
    pub complete: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub steps_taken: u64,
    pub wall_clock_seconds: f64,
    pub final_diagnostics: Option<DiagnosticsRecord>,
    pub fits: Option<Fits>,
    pub observed: Observed,
    /// File names relative to `out_dir`.
    pub artifacts: Vec<String>,
}

impl RunRecord {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

/// Name of a snapshot file, e.g. `snap_u_t1000.csv`.
pub fn snapshot_name(field: &str, t: f64) -> String {
    format!("snap_{field}_t{t}.csv")
}

/// Reads a `diagnostics.jsonl` file.
pub fn read_diagnostics(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

/// Decay fits of `√E` and the three max-norm distances over `window`.
pub fn fit_all(records: &[DiagnosticsRecord], window: [f64; 2]) -> Fits {
    let series = |f: fn(&DiagnosticsRecord) -> f64| -> Vec<(f64, f64)> {
        records.iter().map(|r| (r.t, f(r))).collect()
    };
    Fits {
        sqrt_e: fit_exponential_rate(&series(|r| r.l2_distance()), window).into(),
        linf_u: fit_exponential_rate(&series(|r| r.linf_u), window).into(),
        linf_v: fit_exponential_rate(&series(|r| r.linf_v), window).into(),
        linf_w: fit_exponential_rate(&series(|r| r.linf_w), window).into(),
    }
}

struct Loop<'a> {
    cfg: &'a RunConfig,
    out_dir: &'a Path,
    eq: Equilibrium,
    artifacts: Vec<String>,
    records: Vec<DiagnosticsRecord>,
    observed: Observed,
    steps_taken: u64,
}

impl Loop<'_> {
    fn write_snapshot(&mut self, s: &State, label: f64) -> Result<()> {
        for (name, field) in s.fields() {
            let file = snapshot_name(name, label);
            snapshot::write_csv(&self.out_dir.join(&file), field, label)?;
            self.artifacts.push(file);
        }
        Ok(())
    }

    fn execute(&mut self) -> Result<()> {
        let cfg = self.cfg;
        let grid = cfg.grid()?;
        let params = cfg.params()?;
        let step_cfg = cfg.step_config();
        let total = cfg.total_steps()?;
        let stride = cfg.diag_stride()?;
        let snaps = cfg.snapshot_steps()?;
        // label each snapshot with the configured time, not n·dt
        let snap_label = |n: u64| {
            cfg.snapshot_times
                .iter()
                .copied()
                .find(|&t| cfg.steps_to(t).ok() == Some(n))
                .unwrap_or(n as f64 * cfg.dt)
        };

        let diag_path = self.out_dir.join(DIAGNOSTICS_FILE);
        let file = File::create(&diag_path).map_err(|e| Error::io(&diag_path, e))?;
        let mut diag = BufWriter::new(file);
        self.artifacts.push(DIAGNOSTICS_FILE.to_string());

        let (mut state, ic_clamps) = perturbed_ic_counted(
            [cfg.u0, cfg.v0, cfg.w0],
            cfg.sigma,
            cfg.seed,
            grid,
            cfg.floor,
        );
        let mut pending = StepOutputs {
            clamp_count: ic_clamps,
            max_chemo_flux: 0.0,
        };
        self.observed.total_clamps = ic_clamps;
        self.observed.min_value = min_of(&state);
        self.observed.max_w = state.w.max();
        let mut next_snap = snaps.iter().peekable();

        for n in 0..=total {
            let is_snap = next_snap.peek() == Some(&&n);
            if is_snap {
                next_snap.next();
                self.write_snapshot(&state, snap_label(n))?;
            }
            if n % stride == 0 || is_snap || n == total {
                let rec = collect(&state, &self.eq, pending)?;
                pending = StepOutputs::default();
                serde_json::to_writer(&mut diag, &rec)?;
                diag.write_all(b"\n")
                    .map_err(|e| Error::io(&diag_path, e))?;
                self.records.push(rec);
            }
            if n == total {
                break;
            }

            let (next, out) = euler_step(&state, &params, &step_cfg)?;
            state = next;
            state.t = (n + 1) as f64 * cfg.dt;
            self.steps_taken = n + 1;
            pending.absorb(out);

            let obs = &mut self.observed;
            obs.total_clamps += out.clamp_count;
            if state.t > 1.0 {
                obs.clamps_after_t1 += out.clamp_count;
            }
            obs.max_chemo_flux = obs.max_chemo_flux.max(out.max_chemo_flux);
            obs.min_value = obs.min_value.min(min_of(&state));
            obs.max_w = obs.max_w.max(state.w.max());
        }
        diag.flush().map_err(|e| Error::io(&diag_path, e))?;
        Ok(())
    }
}

fn min_of(s: &State) -> f64 {
    s.u.min().min(s.v.min()).min(s.w.min())
}

/// Executes a configured run and writes all artifacts to `cfg.out_dir`.
///
/// On a numerical failure the partial artifacts stay on disk and `run.json`
/// is written with `complete: false` before the error is returned.
pub fn run(cfg: &RunConfig) -> Result<RunRecord> {
    cfg.validate()?;
    let started = Instant::now();
    let grid = cfg.grid()?;
    let params = cfg.params()?;
    let out_dir: PathBuf = cfg.out_dir.clone();
    fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;

    let mut lp = Loop {
        cfg,
        out_dir: &out_dir,
        eq: equilibrium(&params),
        artifacts: Vec::new(),
        records: Vec::new(),
        observed: Observed::default(),
        steps_taken: 0,
    };
    let outcome = lp.execute();

    let mut observed = lp.observed;
    for r in &lp.records {
        observed.max_mass_u = observed.max_mass_u.max(r.mass_u);
        observed.max_mass_v = observed.max_mass_v.max(r.mass_v);
        observed.max_mass_w = observed.max_mass_w.max(r.mass_w);
    }
    observed.max_entropy = lp
        .records
        .iter()
        .map(|r| r.entropy)
        .fold(f64::NEG_INFINITY, f64::max);
    observed.chi0_a_posteriori = 16.0 / (1.0 + observed.max_w * observed.max_w);
    observed.sensitivity_small =
        params.chi1 * params.chi1 + params.chi2 * params.chi2 <= observed.chi0_a_posteriori;

    let mut artifacts = lp.artifacts;
    artifacts.push(RECORD_FILE.to_string());
    let mut record = RunRecord {
        config: cfg.clone(),
        grid: ResolvedGrid::from(&grid),
        equilibrium: lp.eq,
        stability: check_stability(&cfg.step_config(), &grid),
        complete: outcome.is_ok(),
        error: outcome.as_ref().err().map(|e| e.to_string()),
        steps_taken: lp.steps_taken,
        wall_clock_seconds: 0.0,
        final_diagnostics: lp.records.last().cloned(),
        fits: outcome
            .is_ok()
            .then(|| fit_all(&lp.records, cfg.fit_window())),
        observed,
        artifacts,
    };
    record.wall_clock_seconds = started.elapsed().as_secs_f64();

    let path = out_dir.join(RECORD_FILE);
    let json = serde_json::to_string_pretty(&record)?;
    fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    outcome.map(|()| record)
}

/// Runs independent configurations on separate threads. Each run owns its
/// state, RNG streams and output directory.
pub fn run_many(cfgs: &[RunConfig]) -> Vec<Result<RunRecord>> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = cfgs.iter().map(|c| scope.spawn(move || run(c))).collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("run thread panicked"))
            .collect()
    })
}

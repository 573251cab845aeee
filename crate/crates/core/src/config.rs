//! Run configuration and its flat TOML file form.
//!
//! Every key is optional; omitted keys take the Case 1 preset value. Unknown
//! keys are rejected.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridMode};
use crate::integrator::{StepConfig, DEFAULT_FLOOR};
use crate::operators::FaceRule;
use crate::params::{Params, DEFAULT_CHI};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub chi1: f64,
    pub chi2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub r: f64,
    pub k: f64,

    pub nx: usize,
    pub ny: usize,
    pub grid_mode: GridMode,
    /// Edge lengths; exact-domain mode only (default 2π, `ly` defaults to `lx`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lx: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ly: Option<f64>,
    /// Node spacings; exact-spacing mode only (`dy` defaults to `dx`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dx: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dy: Option<f64>,

    pub dt: f64,
    pub t_end: f64,
    pub floor: f64,
    pub seed: u64,

    pub u0: f64,
    pub v0: f64,
    pub w0: f64,
    pub sigma: f64,

    pub snapshot_times: Vec<f64>,
    pub diag_interval: f64,
    pub upwind: bool,
    pub out_dir: PathBuf,
    /// Window for the decay fits; `[t_end/2, 0.9·t_end]` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_window: Option<[f64; 2]>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::case1()
    }
}

impl RunConfig {
    /// `k = 0.8`, snapshots at 10, 20, 60 and 1000.
    pub fn case1() -> Self {
        let p = Params::case1();
        RunConfig {
            chi1: DEFAULT_CHI,
            chi2: DEFAULT_CHI,
            mu1: p.mu1,
            mu2: p.mu2,
            r: p.r,
            k: p.k,
            nx: 13,
            ny: 13,
            grid_mode: GridMode::ExactDomain,
            lx: None,
            ly: None,
            dx: None,
            dy: None,
            dt: 0.01,
            t_end: 1000.0,
            floor: DEFAULT_FLOOR,
            seed: DEFAULT_SEED,
            u0: 2.5,
            v0: 2.5,
            w0: 5.0,
            sigma: 0.2,
            snapshot_times: vec![10.0, 20.0, 60.0, 1000.0],
            diag_interval: 1.0,
            upwind: false,
            out_dir: PathBuf::from("runs/case1"),
            fit_window: None,
        }
    }

    /// As Case 1 with `k = 1`, run to `t = 1600`.
    pub fn case2() -> Self {
        RunConfig {
            k: 1.0,
            t_end: 1600.0,
            snapshot_times: vec![10.0, 20.0, 60.0, 1600.0],
            out_dir: PathBuf::from("runs/case2"),
            ..RunConfig::case1()
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Schema(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        if !path.is_file() {
            return Err(Error::ConfigNotFound(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("flat config always serializes")
    }

    pub fn params(&self) -> Result<Params> {
        Params::new(self.chi1, self.chi2, self.mu1, self.mu2, self.r, self.k)
    }

    pub fn grid(&self) -> Result<Grid> {
        match self.grid_mode {
            GridMode::ExactDomain => {
                if self.dx.is_some() || self.dy.is_some() {
                    return Err(Error::Schema(
                        "dx/dy are only valid with grid_mode = \"exact-spacing\"".into(),
                    ));
                }
                let lx = self.lx.unwrap_or(TAU);
                Grid::new(self.nx, self.ny, lx, self.ly.unwrap_or(lx))
            }
            GridMode::ExactSpacing => {
                if self.lx.is_some() || self.ly.is_some() {
                    return Err(Error::Schema(
                        "lx/ly are only valid with grid_mode = \"exact-domain\"".into(),
                    ));
                }
                let dx = self
                    .dx
                    .ok_or_else(|| Error::Schema("exact-spacing mode requires dx".into()))?;
                Grid::with_spacing(self.nx, self.ny, dx, self.dy.unwrap_or(dx))
            }
        }
    }

    pub fn step_config(&self) -> StepConfig {
        StepConfig {
            dt: self.dt,
            floor: self.floor,
            face: if self.upwind {
                FaceRule::Upwind
            } else {
                FaceRule::Centered
            },
        }
    }

    /// Switches to exact-spacing mode with the given spacing.
    pub fn set_spacing(&mut self, dx: f64, dy: f64) {
        self.grid_mode = GridMode::ExactSpacing;
        self.lx = None;
        self.ly = None;
        self.dx = Some(dx);
        self.dy = Some(dy);
    }

    pub fn fit_window(&self) -> [f64; 2] {
        self.fit_window
            .unwrap_or([0.5 * self.t_end, 0.9 * self.t_end])
    }

    /// Number of steps to reach `t`, or an error if `t` is off the step grid.
    pub fn steps_to(&self, t: f64) -> Result<u64> {
        steps_for(t, self.dt)
    }

    pub fn total_steps(&self) -> Result<u64> {
        self.steps_to(self.t_end)
    }

    /// Steps between diagnostics samples.
    pub fn diag_stride(&self) -> Result<u64> {
        let n = steps_for(self.diag_interval, self.dt)?;
        if n == 0 {
            return Err(Error::Schema("diag_interval must be at least dt".into()));
        }
        Ok(n)
    }

    /// Sorted, deduplicated snapshot step indices.
    pub fn snapshot_steps(&self) -> Result<Vec<u64>> {
        let mut steps = self
            .snapshot_times
            .iter()
            .map(|&t| self.steps_to(t))
            .collect::<Result<Vec<_>>>()?;
        steps.sort_unstable();
        steps.dedup();
        Ok(steps)
    }

    pub fn validate(&self) -> Result<()> {
        self.params().map_err(|e| Error::Schema(e.to_string()))?;
        self.grid().map_err(|e| match e {
            Error::Schema(_) => e,
            other => Error::Schema(other.to_string()),
        })?;
        self.step_config()
            .validate()
            .map_err(|e| Error::Schema(e.to_string()))?;

        let finite_nonneg = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Schema(format!(
                    "{name} must be finite and ≥ 0, got {v}"
                )))
            }
        };
        finite_nonneg("t_end", self.t_end)?;
        finite_nonneg("sigma", self.sigma)?;
        for (name, v) in [("u0", self.u0), ("v0", self.v0), ("w0", self.w0)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Schema(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.diag_interval > 0.0 && self.diag_interval.is_finite()) {
            return Err(Error::Schema(format!(
                "diag_interval must be positive, got {}",
                self.diag_interval
            )));
        }
        for &t in &self.snapshot_times {
            if !(0.0..=self.t_end).contains(&t) {
                return Err(Error::Schema(format!(
                    "snapshot time {t} outside [0, {}]",
                    self.t_end
                )));
            }
        }
        if let Some([a, b]) = self.fit_window {
            if !(a < b) {
                return Err(Error::Schema(format!("fit_window [{a}, {b}] is empty")));
            }
        }
        self.total_steps()?;
        self.diag_stride()?;
        self.snapshot_steps()?;
        Ok(())
    }
}

fn steps_for(t: f64, dt: f64) -> Result<u64> {
    let n = (t / dt).round();
    if !(n >= 0.0) || (n * dt - t).abs() > 1e-9 * t.abs().max(1.0) {
        return Err(Error::Misaligned { time: t, dt });
    }
    Ok(n as u64)
}

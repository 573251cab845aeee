//! Finite-difference / finite-volume simulator for the chemotaxis system
//!
//! ```text
//! u_t = Δu − chi1 ∇·(u w^{−k} ∇w) + w − mu1 u²
//! v_t = Δv − chi2 ∇·(v w^{−k} ∇w) + w + r u v − mu2 v²
//! w_t = Δw + u + v − w
//! ```
//!
//! on a rectangle with zero-flux boundaries, plus the diagnostics used to
//! watch boundedness and convergence to the constant steady state.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` deliberately rejects NaN

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod integrator;
pub mod operators;
pub mod params;
pub mod rng;
pub mod runner;
pub mod snapshot;

pub use config::RunConfig;
pub use diagnostics::{DecayFit, DiagnosticsRecord};
pub use error::{Error, Result};
pub use grid::{Field, Grid, GridMode};
pub use integrator::{euler_step, State, StepConfig, StepOutputs};
pub use operators::FaceRule;
pub use params::{equilibrium, Equilibrium, Params};
pub use runner::{run, RunRecord};

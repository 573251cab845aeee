//! Model coefficients, the singular sensitivity and the constant steady state.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Chemotactic sensitivity used when none is configured. The preset cases
/// do not pin these values down; 0.5 keeps `chi1² + chi2²` small.
pub const DEFAULT_CHI: f64 = 0.5;

/// Coefficients of the three-component system
///
/// ```text
/// u_t = Δu − chi1 ∇·(u w^{−k} ∇w) + w − mu1 u²
/// v_t = Δv − chi2 ∇·(v w^{−k} ∇w) + w + r u v − mu2 v²
/// w_t = Δw + u + v − w
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub chi1: f64,
    pub chi2: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub r: f64,
    pub k: f64,
}

impl Params {
    pub fn new(chi1: f64, chi2: f64, mu1: f64, mu2: f64, r: f64, k: f64) -> Result<Self> {
        let p = Params {
            chi1,
            chi2,
            mu1,
            mu2,
            r,
            k,
        };
        p.validate()?;
        Ok(p)
    }

    /// `k = 0.8, mu1 = 0.8, mu2 = 0.9, r = 0.1`, default sensitivities.
    pub fn case1() -> Self {
        Params {
            chi1: DEFAULT_CHI,
            chi2: DEFAULT_CHI,
            mu1: 0.8,
            mu2: 0.9,
            r: 0.1,
            k: 0.8,
        }
    }

    /// As [`Params::case1`] with `k = 1`.
    pub fn case2() -> Self {
        Params {
            k: 1.0,
            ..Self::case1()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("chi1", self.chi1),
            ("chi2", self.chi2),
            ("mu1", self.mu1),
            ("mu2", self.mu2),
            ("r", self.r),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !(self.k > 0.0 && self.k <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "k must lie in (0, 1], got {}",
                self.k
            )));
        }
        Ok(())
    }

    /// Whether `mu1 < mu2 < 3 mu1` and `r = mu2 − mu1` (up to rounding), the
    /// regime in which the steady state is `(2/mu1, 2/mu1, 4/mu1)`.
    pub fn in_convergence_regime(&self) -> bool {
        let balanced = (self.r - (self.mu2 - self.mu1)).abs() <= 1e-12 * self.mu2;
        self.mu1 < self.mu2 && self.mu2 < 3.0 * self.mu1 && balanced
    }
}

/// Spatially constant steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    /// Positive root of `mu2 a² − r a − mu1 = 0`; equals `v*/u*`.
    pub a: f64,
    pub u_star: f64,
    pub v_star: f64,
    pub w_star: f64,
}

pub fn equilibrium(p: &Params) -> Equilibrium {
    let a = (p.r + (p.r * p.r + 4.0 * p.mu1 * p.mu2).sqrt()) / (2.0 * p.mu2);
    let u_star = (1.0 + a) / p.mu1;
    Equilibrium {
        a,
        u_star,
        v_star: a * u_star,
        w_star: p.mu1 * u_star * u_star,
    }
}

/// Chemotactic coefficient `chi · w^{−k}`.
pub fn sensitivity(w: f64, chi: f64, k: f64) -> Result<f64> {
    if !(w > 0.0) {
        return Err(Error::InvalidParams(format!(
            "sensitivity is singular at w = {w}"
        )));
    }
    Ok(chi * w.powf(-k))
}

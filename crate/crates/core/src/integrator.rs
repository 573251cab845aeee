//! Explicit Euler stepping with a positivity floor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};
use crate::operators::{assemble_rhs_with_flux, FaceRule};
use crate::params::Params;

pub const DEFAULT_FLOOR: f64 = 1e-6;

/// The three unknowns at one time instant.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: Field,
    pub v: Field,
    pub w: Field,
    pub t: f64,
}

impl State {
    pub fn uniform(grid: Grid, u: f64, v: f64, w: f64) -> Self {
        State {
            u: Field::constant(grid, u),
            v: Field::constant(grid, v),
            w: Field::constant(grid, w),
            t: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    pub fn fields(&self) -> [(&'static str, &Field); 3] {
        [("u", &self.u), ("v", &self.v), ("w", &self.w)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepConfig {
    pub dt: f64,
    pub floor: f64,
    pub face: FaceRule,
}

impl StepConfig {
    pub fn new(dt: f64) -> Self {
        StepConfig {
            dt,
            floor: DEFAULT_FLOOR,
            face: FaceRule::Centered,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.floor > 0.0 && self.floor.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "floor must be positive, got {}",
                self.floor
            )));
        }
        Ok(())
    }
}

/// What a single step produced besides the new state.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepOutputs {
    /// Nodes (over all three fields) raised to the floor.
    pub clamp_count: usize,
    pub max_chemo_flux: f64,
}

impl StepOutputs {
    /// Accumulates another step: counts add, fluxes take the maximum.
    pub fn absorb(&mut self, other: StepOutputs) {
        self.clamp_count += other.clamp_count;
        self.max_chemo_flux = self.max_chemo_flux.max(other.max_chemo_flux);
    }
}

/// One explicit Euler step: `max(old + dt·rhs(old), floor)` for all three
/// fields, all right-hand sides evaluated from the pre-step state.
pub fn euler_step(s: &State, p: &Params, c: &StepConfig) -> Result<(State, StepOutputs)> {
    let (rhs, max_chemo_flux) = assemble_rhs_with_flux(s, p, c.face)?;
    let t = s.t + c.dt;
    let mut clamp_count = 0;

    let mut advance = |name: &'static str, old: &Field, rate: Field| -> Result<Field> {
        let mut next = rate.into_values();
        for (idx, (n, &o)) in next.iter_mut().zip(old.values()).enumerate() {
            let x = o + c.dt * *n;
            if !x.is_finite() {
                let (i, j) = old.grid().node(idx);
                return Err(Error::NonFinite {
                    field: name,
                    i,
                    j,
                    value: x,
                    t,
                });
            }
            if x < c.floor {
                clamp_count += 1;
                *n = c.floor;
            } else {
                *n = x;
            }
        }
        Field::from_values(*old.grid(), next)
    };
    let u = advance("u", &s.u, rhs.du)?;
    let v = advance("v", &s.v, rhs.dv)?;
    let w = advance("w", &s.w, rhs.dw)?;

    Ok((
        State { u, v, w, t },
        StepOutputs {
            clamp_count,
            max_chemo_flux,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Warn,
}

/// Outcome of the diffusive time-step check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityAdvisory {
    pub verdict: Verdict,
    pub dt: f64,
    /// `½ / (1/dx² + 1/dy²)`, the unit-diffusivity explicit Euler limit.
    pub bound: f64,
}

pub fn diffusive_bound(g: &Grid) -> f64 {
    0.5 / (1.0 / (g.dx() * g.dx()) + 1.0 / (g.dy() * g.dy()))
}

/// Advisory only; chemotaxis and reaction shift the true limit.
pub fn check_stability(c: &StepConfig, g: &Grid) -> StabilityAdvisory {
    let bound = diffusive_bound(g);
    StabilityAdvisory {
        verdict: if c.dt <= bound {
            Verdict::Pass
        } else {
            Verdict::Warn
        },
        dt: c.dt,
        bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::equilibrium;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn paper_grid() -> Grid {
        Grid::new(13, 13, 2.0 * PI, 2.0 * PI).unwrap()
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let p = Params::case1();
        let eq = equilibrium(&p);
        let s = State::uniform(paper_grid(), eq.u_star, eq.v_star, eq.w_star);
        let (next, out) = euler_step(&s, &p, &StepConfig::new(0.01)).unwrap();
        assert_eq!(out.clamp_count, 0);
        for ((_, a), (_, b)) in next.fields().into_iter().zip(s.fields()) {
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).abs() <= 1e-15);
            }
        }
        assert_eq!(next.t, 0.01);
    }

    #[test]
    fn reaction_only_update_on_constants() {
        let p = Params::case1();
        let s = State::uniform(paper_grid(), 0.01, 0.01, 1.0);
        let (next, _) = euler_step(&s, &p, &StepConfig::new(0.01)).unwrap();
        let u = 0.01 + 0.01 * (1.0 - 0.8 * 1e-4);
        let v = 0.01 + 0.01 * (1.0 + 0.1 * 1e-4 - 0.9 * 1e-4);
        assert!((next.u.at(3, 4) - u).abs() < 1e-16);
        assert!((next.u.at(3, 4) - 0.019_999_2).abs() < 1e-12);
        assert!((next.v.at(0, 0) - v).abs() < 1e-16);
        assert!((next.w.at(12, 12) - 0.9902).abs() < 1e-15);
    }

    #[test]
    fn clamps_to_floor() {
        let p = Params::case1();
        // u decays hard: w − mu1 u² < 0 with a step large enough to overshoot
        let s = State::uniform(paper_grid(), 10.0, 1.0, 1e-6);
        let c = StepConfig::new(0.2);
        let (next, out) = euler_step(&s, &p, &c).unwrap();
        assert!(next.u.values().iter().all(|&x| x == DEFAULT_FLOOR));
        assert_eq!(out.clamp_count, 169);
        assert!(next.w.min() >= DEFAULT_FLOOR);
    }

    #[test]
    fn reports_first_non_finite_node() {
        let p = Params::case1();
        let mut s = State::uniform(paper_grid(), 2.5, 2.5, 5.0);
        s.u.values_mut()[paper_grid().index(4, 7)] = 1e200;
        match euler_step(&s, &p, &StepConfig::new(0.01)) {
            Err(Error::NonFinite {
                field: "u",
                i: 4,
                j: 7,
                ..
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn stability_advisory() {
        let c = StepConfig::new(0.01);
        let a = check_stability(&c, &paper_grid());
        assert_eq!(a.verdict, Verdict::Pass);
        assert!((a.bound - 0.068_538_919_452_009_48).abs() < 1e-15);

        let g = Grid::with_spacing(13, 13, 0.5, 0.5).unwrap();
        let a = check_stability(&c, &g);
        assert_eq!((a.verdict, a.bound), (Verdict::Pass, 0.0625));
        let a = check_stability(&StepConfig::new(0.1), &g);
        assert_eq!(a.verdict, Verdict::Warn);
    }

    proptest! {
        #[test]
        fn uniform_states_follow_the_reaction_ode(u0 in 0.1f64..5.0, v0 in 0.1f64..5.0, w0 in 0.1f64..8.0) {
            let p = Params::case2();
            let c = StepConfig::new(0.01);
            let mut s = State::uniform(paper_grid(), u0, v0, w0);
            let (mut u, mut v, mut w) = (u0, v0, w0);
            for _ in 0..50 {
                s = euler_step(&s, &p, &c).unwrap().0;
                let du = w - p.mu1 * u * u;
                let dv = w + p.r * u * v - p.mu2 * v * v;
                let dw = u + v - w;
                u = (u + c.dt * du).max(c.floor);
                v = (v + c.dt * dv).max(c.floor);
                w = (w + c.dt * dw).max(c.floor);
                for (f, x) in [(&s.u, u), (&s.v, v), (&s.w, w)] {
                    prop_assert!(f.values().iter().all(|&y| (y - x).abs() <= 1e-13));
                }
            }
        }
    }
}

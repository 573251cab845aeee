//! Monitored quantities: masses, distances to equilibrium, entropy, the
//! Lyapunov functional `F`, its dissipation `E`, and log-linear decay fits.

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::integrator::{State, StepOutputs};
use crate::params::Equilibrium;

/// One diagnostics sample. Serialized field names are part of the
/// `diagnostics.jsonl` format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    #[serde(deserialize_with = "f64_or_nan")]
    pub t: f64,
    #[serde(deserialize_with = "f64_or_nan")]
    pub mass_u: f64,
    #[serde(deserialize_with = "f64_or_nan")]
    pub mass_v: f64,
    #[serde(deserialize_with = "f64_or_nan")]
    pub mass_w: f64,
    #[serde(deserialize_with = "f64_or_nan")]
    pub linf_u: f64,
    #[serde(deserialize_with = "f64_or_nan")]
    pub linf_v: f64,
    #[serde(deserialize_with = "f64_or_nan")]
    pub linf_w: f64,
    #[serde(deserialize_with = "f64_or_nan")]
    pub min_u: f64,
    #[serde(deserialize_with = "f64_or_nan")]
    pub min_v: f64,
    #[serde(deserialize_with = "f64_or_nan")]
    pub min_w: f64,
    #[serde(deserialize_with = "f64_or_nan")]
    pub entropy: f64,
    #[serde(rename = "lyapunov_F")]
    #[serde(deserialize_with = "f64_or_nan")]
    pub lyapunov_f: f64,
    #[serde(rename = "dissipation_E")]
    #[serde(deserialize_with = "f64_or_nan")]
    pub dissipation_e: f64,
    /// Floor activations since the previous sample.
    pub clamp_count: usize,
    /// Largest face flux seen since the previous sample.
    #[serde(deserialize_with = "f64_or_nan")]
    pub max_chemo_flux: f64,
}

impl DiagnosticsRecord {
    /// `linf_u + linf_v + linf_w`.
    pub fn linf_total(&self) -> f64 {
        self.linf_u + self.linf_v + self.linf_w
    }

    /// L² distance `√E`.
    pub fn l2_distance(&self) -> f64 {
        self.dissipation_e.sqrt()
    }
}

/// JSON has no Inf/NaN; serde_json writes them as `null`, read back as NaN.
pub(crate) fn f64_or_nan<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// `d − ln(1 + d)` without cancellation for small `|d|`.
///
/// With `y = d/(2 + d)`, `ln(1 + d) = 2 atanh y`, so
/// `d − ln(1 + d) = d·y − 2(y³/3 + y⁵/5 + …)`.
fn log_gap(d: f64) -> f64 {
    if d.abs() >= 0.5 {
        return d - d.ln_1p();
    }
    let y = d / (2.0 + d);
    let y2 = y * y;
    let mut term = y * y2;
    let mut tail = 0.0f64;
    let mut n = 3.0;
    while term.abs() > 1e-18 * tail.abs() && n < 80.0 {
        tail += term / n;
        term *= y2;
        n += 2.0;
    }
    d * y - 2.0 * tail
}

/// Integrand `x − x* − x* ln(x/x*)`, i.e. `x*·(s − 1 − ln s)` with `s = x/x*`.
fn bregman_density(x: f64, x_star: f64) -> f64 {
    x_star * log_gap((x - x_star) / x_star)
}

fn require_positive(name: &'static str, f: &Field) -> Result<()> {
    if let Some(idx) = f.values().iter().position(|&x| !(x > 0.0)) {
        let (i, j) = f.grid().node(idx);
        return Err(Error::NonPositiveValue {
            field: name,
            i,
            j,
            value: f.values()[idx],
        });
    }
    Ok(())
}

/// Lyapunov functional
/// `∫(u − u* − u* ln(u/u*)) + ∫(v − …) + 2∫(w − w* − w* ln(w/w*))`.
pub fn lyapunov_f(s: &State, eq: &Equilibrium) -> Result<f64> {
    for (name, f) in s.fields() {
        require_positive(name, f)?;
    }
    let part = |f: &Field, star: f64| f.map(|x| bregman_density(x, star)).integrate();
    Ok(part(&s.u, eq.u_star) + part(&s.v, eq.v_star) + 2.0 * part(&s.w, eq.w_star))
}

/// `∫(u − u*)² + ∫(v − v*)²`.
pub fn dissipation_e(s: &State, eq: &Equilibrium) -> f64 {
    let sq = |f: &Field, star: f64| f.map(|x| (x - star) * (x - star)).integrate();
    sq(&s.u, eq.u_star) + sq(&s.v, eq.v_star)
}

/// `∫u ln u + ∫v ln v`.
pub fn entropy(s: &State) -> Result<f64> {
    require_positive("u", &s.u)?;
    require_positive("v", &s.v)?;
    let part = |f: &Field| f.map(|x| x * x.ln()).integrate();
    Ok(part(&s.u) + part(&s.v))
}

pub fn collect(s: &State, eq: &Equilibrium, outputs: StepOutputs) -> Result<DiagnosticsRecord> {
    Ok(DiagnosticsRecord {
        t: s.t,
        mass_u: s.u.integrate(),
        mass_v: s.v.integrate(),
        mass_w: s.w.integrate(),
        linf_u: s.u.max_abs_deviation(eq.u_star),
        linf_v: s.v.max_abs_deviation(eq.v_star),
        linf_w: s.w.max_abs_deviation(eq.w_star),
        min_u: s.u.min(),
        min_v: s.v.min(),
        min_w: s.w.min(),
        entropy: entropy(s)?,
        lyapunov_f: lyapunov_f(s, eq)?,
        dissipation_e: dissipation_e(s, eq),
        clamp_count: outputs.clamp_count,
        max_chemo_flux: outputs.max_chemo_flux,
    })
}

/// Least-squares fit of `y ≈ C e^{−λ t}` in log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub c_amp: f64,
    pub lambda: f64,
    pub fit_window: [f64; 2],
    /// Root-mean-square residual of `ln y`.
    pub residual: f64,
    pub samples: usize,
}

pub const MIN_FIT_SAMPLES: usize = 5;

/// Fits `ln y = ln C − λ t` over the samples with `t ∈ [t_lo, t_hi]`.
pub fn fit_exponential_rate(series: &[(f64, f64)], window: [f64; 2]) -> Result<DecayFit> {
    let [t_lo, t_hi] = window;
    if !(t_lo < t_hi) {
        return Err(Error::Fit(format!("empty window [{t_lo}, {t_hi}]")));
    }
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, _)| t >= t_lo && t <= t_hi)
        .collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(Error::Fit(format!(
            "window [{t_lo}, {t_hi}] holds {} samples, need at least {MIN_FIT_SAMPLES}",
            pts.len()
        )));
    }
    if let Some(&(t, y)) = pts.iter().find(|&&(_, y)| !(y > 0.0 && y.is_finite())) {
        return Err(Error::Fit(format!(
            "non-positive sample y = {y} at t = {t}"
        )));
    }

    // Offsetting by the first log value makes a constant series fit with an
    // exactly zero slope.
    let n = pts.len() as f64;
    let base = pts[0].1.ln();
    let logs: Vec<(f64, f64)> = pts.iter().map(|&(t, y)| (t, y.ln() - base)).collect();
    let t_mean = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let l_mean = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(t, l) in &logs {
        let dt = t - t_mean;
        sxx += dt * dt;
        sxy += dt * (l - l_mean);
    }
    if sxx == 0.0 {
        return Err(Error::Fit("all samples share one time".into()));
    }
    let slope = sxy / sxx;
    let intercept = l_mean - slope * t_mean;
    let rss: f64 = logs
        .iter()
        .map(|&(t, l)| {
            let r = l - (intercept + slope * t);
            r * r
        })
        .sum();

    Ok(DecayFit {
        c_amp: (base + intercept).exp(),
        lambda: 0.0 - slope,
        fit_window: window,
        residual: (rss / n).sqrt(),
        samples: pts.len(),
    })
}

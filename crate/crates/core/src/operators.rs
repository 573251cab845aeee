//! Discrete spatial right-hand side.
//!
//! Neumann boundaries are realised by mirror ghosts: the ghost beyond a
//! boundary node takes the value of the first interior node on the other
//! side. For the Laplacian this gives `2(f₁ − f₀)/dx²` at the wall; for the
//! finite-volume chemotaxis term it gives a mirrored (negated) face flux,
//! so a boundary node's half control volume receives no flux through the
//! wall. Both operators then integrate to exactly zero under the
//! trapezoidal weights of [`Field::integrate`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Field;
use crate::integrator::State;
use crate::params::Params;

/// How the transported density is evaluated on a cell face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FaceRule {
    /// Arithmetic mean of the two adjacent nodes.
    #[default]
    Centered,
    /// Value at the node the flux leaves.
    Upwind,
}

/// Time derivatives of `(u, v, w)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsTriple {
    pub du: Field,
    pub dv: Field,
    pub dw: Field,
}

/// Five-point Laplacian with mirror ghosts on every edge.
pub fn laplacian(f: &Field) -> Field {
    let g = *f.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (idx2, idy2) = (1.0 / (g.dx() * g.dx()), 1.0 / (g.dy() * g.dy()));
    let v = f.values();
    let mut out = Vec::with_capacity(v.len());
    for j in 0..ny {
        let (jm, jp) = mirror(j, ny);
        for i in 0..nx {
            let (im, ip) = mirror(i, nx);
            let c = v[j * nx + i];
            let lx = (v[j * nx + ip] - 2.0 * c + v[j * nx + im]) * idx2;
            let ly = (v[jp * nx + i] - 2.0 * c + v[jm * nx + i]) * idy2;
            out.push(lx + ly);
        }
    }
    Field::from_values(g, out).expect("same grid")
}

/// Neighbour indices with reflection at both ends.
#[inline]
fn mirror(i: usize, n: usize) -> (usize, usize) {
    let lo = if i == 0 { 1 } else { i - 1 };
    let hi = if i + 1 == n { n - 2 } else { i + 1 };
    (lo, hi)
}

/// Result of a chemotaxis divergence evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ChemotaxisDivergence {
    pub divergence: Field,
    /// Largest `|F|` over all interior faces.
    pub max_face_flux: f64,
}

/// Finite-volume approximation of `∇·(n · chi w^{−k} ∇w)`.
///
/// The face flux between nodes `i` and `i+1` is
/// `chi · n_face · (w_{i+1} − w_i)/dx / w_face^k` with `w_face` the mean of
/// the two nodes (raised to `k` after averaging) and `n_face` chosen by
/// `rule`. The caller subtracts the result in the evolution equation.
pub fn chemotaxis_divergence(
    n: &Field,
    w: &Field,
    chi: f64,
    k: f64,
    rule: FaceRule,
) -> Result<ChemotaxisDivergence> {
    n.same_grid(w)?;
    if let Some(idx) = w.values().iter().position(|&x| !(x > 0.0)) {
        let (i, j) = w.grid().node(idx);
        return Err(Error::NonPositiveSignal {
            i,
            j,
            value: w.values()[idx],
        });
    }

    let g = *n.grid();
    let (nx, ny, dx, dy) = (g.nx(), g.ny(), g.dx(), g.dy());
    let (nv, wv) = (n.values(), w.values());

    let flux = |a: usize, b: usize, h: f64| -> f64 {
        let grad = (wv[b] - wv[a]) / h;
        let n_face = match rule {
            FaceRule::Centered => 0.5 * (nv[a] + nv[b]),
            FaceRule::Upwind if grad >= 0.0 => nv[a],
            FaceRule::Upwind => nv[b],
        };
        let w_face = 0.5 * (wv[a] + wv[b]);
        chi * n_face * grad / w_face.powf(k)
    };

    // fx[j*(nx-1) + i] is the flux through the face between (i,j) and (i+1,j)
    let mut fx = Vec::with_capacity((nx - 1) * ny);
    for j in 0..ny {
        for i in 0..nx - 1 {
            fx.push(flux(j * nx + i, j * nx + i + 1, dx));
        }
    }
    // fy[j*nx + i] sits between (i,j) and (i,j+1)
    let mut fy = Vec::with_capacity(nx * (ny - 1));
    for j in 0..ny - 1 {
        for i in 0..nx {
            fy.push(flux(j * nx + i, (j + 1) * nx + i, dy));
        }
    }
    let max_face_flux = fx.iter().chain(&fy).fold(0.0f64, |m, f| m.max(f.abs()));

    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let east = if i + 1 == nx {
                -fx[j * (nx - 1) + nx - 2]
            } else {
                fx[j * (nx - 1) + i]
            };
            let west = if i == 0 {
                -fx[j * (nx - 1)]
            } else {
                fx[j * (nx - 1) + i - 1]
            };
            let north = if j + 1 == ny {
                -fy[(ny - 2) * nx + i]
            } else {
                fy[j * nx + i]
            };
            let south = if j == 0 { -fy[i] } else { fy[(j - 1) * nx + i] };
            out.push((east - west) / dx + (north - south) / dy);
        }
    }
    Ok(ChemotaxisDivergence {
        divergence: Field::from_values(g, out)?,
        max_face_flux,
    })
}

/// Nodewise reaction terms `(w − mu1 u², w + r u v − mu2 v², u + v − w)`.
pub fn reaction(u: &Field, v: &Field, w: &Field, p: &Params) -> Result<RhsTriple> {
    u.same_grid(v)?;
    u.same_grid(w)?;
    let g = *u.grid();
    let (mut du, mut dv, mut dw) = (
        Vec::with_capacity(g.len()),
        Vec::with_capacity(g.len()),
        Vec::with_capacity(g.len()),
    );
    for ((&u, &v), &w) in u.values().iter().zip(v.values()).zip(w.values()) {
        du.push(w - p.mu1 * u * u);
        dv.push(w + p.r * u * v - p.mu2 * v * v);
        dw.push(u + v - w);
    }
    Ok(RhsTriple {
        du: Field::from_values(g, du)?,
        dv: Field::from_values(g, dv)?,
        dw: Field::from_values(g, dw)?,
    })
}

/// Full right-hand side together with the largest chemotactic face flux of
/// either species.
pub fn assemble_rhs_with_flux(s: &State, p: &Params, rule: FaceRule) -> Result<(RhsTriple, f64)> {
    let chem_u = chemotaxis_divergence(&s.u, &s.w, p.chi1, p.k, rule)?;
    let chem_v = chemotaxis_divergence(&s.v, &s.w, p.chi2, p.k, rule)?;
    let react = reaction(&s.u, &s.v, &s.w, p)?;

    let combine = |lap: Field, chem: &Field, r: &Field| -> Field {
        let mut out = lap.into_values();
        for ((o, &c), &r) in out.iter_mut().zip(chem.values()).zip(r.values()) {
            *o = *o - c + r;
        }
        Field::from_values(*s.u.grid(), out).expect("same grid")
    };
    let du = combine(laplacian(&s.u), &chem_u.divergence, &react.du);
    let dv = combine(laplacian(&s.v), &chem_v.divergence, &react.dv);
    let mut dw = laplacian(&s.w).into_values();
    for (o, &r) in dw.iter_mut().zip(react.dw.values()) {
        *o += r;
    }
    let dw = Field::from_values(*s.w.grid(), dw)?;

    let max_flux = chem_u.max_face_flux.max(chem_v.max_face_flux);
    Ok((RhsTriple { du, dv, dw }, max_flux))
}

pub fn assemble_rhs(s: &State, p: &Params, rule: FaceRule) -> Result<RhsTriple> {
    assemble_rhs_with_flux(s, p, rule).map(|(rhs, _)| rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::params::equilibrium;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn unit3() -> Grid {
        Grid::new(3, 3, 2.0, 2.0).unwrap()
    }

    /// Independent route: pad with mirror ghosts, then apply the textbook
    /// conservative stencil `chi ∇·(n ∇w)` on the padded array. Returns the
    /// divergence and, per node, `chi Σ|F|/h` over its four faces as the
    /// rounding scale.
    fn padded_advective(n: &Field, w: &Field, chi: f64) -> Vec<(f64, f64)> {
        let g = n.grid();
        let (nx, ny) = (g.nx(), g.ny());
        let pad = |f: &Field| {
            let mut p = vec![0.0; (nx + 2) * (ny + 2)];
            for jj in 0..ny + 2 {
                for ii in 0..nx + 2 {
                    let src = |k: usize, len: usize| match k {
                        0 => 1,
                        k if k == len + 1 => len - 2,
                        k => k - 1,
                    };
                    p[jj * (nx + 2) + ii] = f.at(src(ii, nx), src(jj, ny));
                }
            }
            p
        };
        let (pn, pw) = (pad(n), pad(w));
        let at = |p: &Vec<f64>, i: usize, j: usize| p[j * (nx + 2) + i];
        let (dx, dy) = (g.dx(), g.dy());
        let mut out = Vec::new();
        for j in 1..=ny {
            for i in 1..=nx {
                let fe =
                    0.5 * (at(&pn, i, j) + at(&pn, i + 1, j)) * (at(&pw, i + 1, j) - at(&pw, i, j))
                        / dx;
                let fw =
                    0.5 * (at(&pn, i - 1, j) + at(&pn, i, j)) * (at(&pw, i, j) - at(&pw, i - 1, j))
                        / dx;
                let fnn =
                    0.5 * (at(&pn, i, j) + at(&pn, i, j + 1)) * (at(&pw, i, j + 1) - at(&pw, i, j))
                        / dy;
                let fs =
                    0.5 * (at(&pn, i, j - 1) + at(&pn, i, j)) * (at(&pw, i, j) - at(&pw, i, j - 1))
                        / dy;
                let scale = chi * ((fe.abs() + fw.abs()) / dx + (fnn.abs() + fs.abs()) / dy);
                out.push((chi * ((fe - fw) / dx + (fnn - fs) / dy), scale));
            }
        }
        out
    }

    #[test]
    fn laplacian_annihilates_constants() {
        let g = Grid::new(7, 5, 3.0, 2.0).unwrap();
        let l = laplacian(&Field::constant(g, 3.7));
        assert!(l.values().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn laplacian_of_interior_spike() {
        let g = Grid::new(5, 5, 4.0, 4.0).unwrap();
        let mut f = Field::zeros(g);
        f.values_mut()[g.index(2, 2)] = 1.0;
        let l = laplacian(&f);
        for j in 0..5 {
            for i in 0..5 {
                let expect = match (i, j) {
                    (2, 2) => -4.0,
                    (1, 2) | (3, 2) | (2, 1) | (2, 3) => 1.0,
                    _ => 0.0,
                };
                assert_eq!(l.at(i, j), expect, "node ({i},{j})");
            }
        }
    }

    fn cos_error(n: usize) -> f64 {
        let g = Grid::new(n, n, 2.0 * PI, 2.0 * PI).unwrap();
        let f = Field::from_fn(g, |x, y| x.cos() * y.cos());
        let l = laplacian(&f);
        l.values()
            .iter()
            .zip(f.values())
            .fold(0.0, |m, (&a, &b)| m.max((a + 2.0 * b).abs()))
    }

    #[test]
    fn laplacian_is_second_order() {
        let (e17, e33, e65) = (cos_error(17), cos_error(33), cos_error(65));
        assert!((e17 - 0.025_570_338_466_683).abs() < 1e-12);
        assert!((e33 - 0.006_417_271_910_076).abs() < 1e-12);
        for ratio in [e17 / e33, e33 / e65] {
            assert!((3.2..=4.8).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn chemotaxis_vanishes_on_constant_signal_or_empty_density() {
        let g = Grid::new(6, 5, 2.0, 1.0).unwrap();
        let n = Field::from_fn(g, |x, y| 1.0 + x * y);
        let w = Field::constant(g, 2.0);
        let d = chemotaxis_divergence(&n, &w, 0.5, 0.8, FaceRule::Centered).unwrap();
        assert!(d.divergence.values().iter().all(|&x| x == 0.0));
        assert_eq!(d.max_face_flux, 0.0);

        let w = Field::from_fn(g, |x, y| 1.0 + x + y * y);
        let d = chemotaxis_divergence(&Field::zeros(g), &w, 0.5, 0.8, FaceRule::Upwind).unwrap();
        assert!(d.divergence.values().iter().all(|&x| x == 0.0));
    }

    // Golden values from a hand-assembled flux table (mirror ghosts, centered
    // faces) on a 3×3 grid with dx = dy = 1.
    const GOLDEN_N: [f64; 9] = [1.0, 2.0, 3.0, 0.5, 1.5, 2.5, 2.0, 1.0, 0.25];
    const GOLDEN_W: [f64; 9] = [1.0, 2.0, 4.0, 3.0, 1.0, 2.0, 0.5, 1.5, 3.0];

    #[test]
    fn golden_flux_table_k0() {
        let g = unit3();
        let n = Field::from_values(g, GOLDEN_N.to_vec()).unwrap();
        let w = Field::from_values(g, GOLDEN_W.to_vec()).unwrap();
        let d = chemotaxis_divergence(&n, &w, 1.0, 0.0, FaceRule::Centered).unwrap();
        let expect = [6.0, 0.0, -21.0, -8.625, 6.375, 2.875, 9.25, -1.8125, -4.625];
        for (a, b) in d.divergence.values().iter().zip(expect) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
        // largest face: n_face = 2.75, Δw = −2 between (2,0) and (2,1)
        assert_eq!(d.max_face_flux, 5.5);
        assert!(d.divergence.integrate().abs() < 1e-14);
    }

    #[test]
    fn golden_flux_table_k1() {
        let g = unit3();
        let n = Field::from_values(g, GOLDEN_N.to_vec()).unwrap();
        let w = Field::from_values(g, GOLDEN_W.to_vec()).unwrap();
        let d = chemotaxis_divergence(&n, &w, 1.0, 1.0, FaceRule::Centered).unwrap();
        let expect = [
            3.5,
            -1.666_666_666_666_666_7,
            -7.0,
            -4.535_714_285_714_286,
            4.0,
            -0.283_333_333_333_333_2,
            6.571_428_571_428_571,
            -2.083_333_333_333_333,
            -1.933_333_333_333_333_6,
        ];
        for (a, b) in d.divergence.values().iter().zip(expect) {
            assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn upwind_takes_donor_density() {
        // single gradient along x: w increases with i, so flux leaves node i
        let g = unit3();
        let n = Field::from_values(g, vec![1.0, 4.0, 9.0, 1.0, 4.0, 9.0, 1.0, 4.0, 9.0]).unwrap();
        let w = Field::from_fn(g, |x, _| 1.0 + x);
        let d = chemotaxis_divergence(&n, &w, 1.0, 0.0, FaceRule::Upwind).unwrap();
        // faces carry n_i · 1: F½ = 1, F3/2 = 4
        assert_eq!(d.divergence.at(0, 1), 2.0);
        assert_eq!(d.divergence.at(1, 1), 3.0);
        assert_eq!(d.divergence.at(2, 1), -8.0);
        assert_eq!(d.max_face_flux, 4.0);
    }

    #[test]
    fn rejects_nonpositive_signal() {
        let g = unit3();
        let n = Field::constant(g, 1.0);
        let mut w = Field::constant(g, 1.0);
        w.values_mut()[g.index(1, 2)] = 0.0;
        match chemotaxis_divergence(&n, &w, 1.0, 0.5, FaceRule::Centered) {
            Err(Error::NonPositiveSignal { i: 1, j: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn reaction_examples() {
        let g = unit3();
        let p = Params::case1();
        let eq = equilibrium(&p);
        let r = reaction(
            &Field::constant(g, eq.u_star),
            &Field::constant(g, eq.v_star),
            &Field::constant(g, eq.w_star),
            &p,
        )
        .unwrap();
        for f in [&r.du, &r.dv, &r.dw] {
            assert!(f.values().iter().all(|x| x.abs() < 1e-14));
        }

        let r = reaction(
            &Field::zeros(g),
            &Field::zeros(g),
            &Field::constant(g, 1.0),
            &p,
        )
        .unwrap();
        assert_eq!(
            (r.du.at(0, 0), r.dv.at(1, 1), r.dw.at(2, 2)),
            (1.0, 1.0, -1.0)
        );

        let p = Params::new(0.5, 0.5, 1.0, 1.0, 1.0, 0.5).unwrap();
        let one = Field::constant(g, 1.0);
        let r = reaction(&one, &one, &one, &p).unwrap();
        assert_eq!(
            (r.du.at(0, 0), r.dv.at(1, 1), r.dw.at(2, 2)),
            (0.0, 1.0, 1.0)
        );
    }

    #[test]
    fn rhs_on_constant_states() {
        let g = Grid::new(13, 13, 2.0 * PI, 2.0 * PI).unwrap();
        let p = Params::case1();
        let eq = equilibrium(&p);
        let s = State::uniform(g, eq.u_star, eq.v_star, eq.w_star);
        let rhs = assemble_rhs(&s, &p, FaceRule::Centered).unwrap();
        for f in [&rhs.du, &rhs.dv, &rhs.dw] {
            assert!(f.values().iter().all(|x| x.abs() < 1e-14));
        }

        let s = State::uniform(g, 1.0, 2.0, 3.0);
        let rhs = assemble_rhs(&s, &p, FaceRule::Centered).unwrap();
        let react = reaction(&s.u, &s.v, &s.w, &p).unwrap();
        assert_eq!(rhs, react);
    }

    fn positive_pair(nx: usize, ny: usize) -> impl Strategy<Value = (Field, Field)> {
        let g = Grid::new(nx, ny, 2.0 * PI, 2.0 * PI).unwrap();
        (
            prop::collection::vec(0.0f64..10.0, nx * ny),
            prop::collection::vec(1e-6f64..10.0, nx * ny),
        )
            .prop_map(move |(a, b)| {
                (
                    Field::from_values(g, a).unwrap(),
                    Field::from_values(g, b).unwrap(),
                )
            })
    }

    fn abs_integral(f: &Field) -> f64 {
        f.map(f64::abs).integrate()
    }

    proptest! {
        #[test]
        fn laplacian_integrates_to_zero((f, _) in positive_pair(9, 6)) {
            let l = laplacian(&f);
            prop_assert!(l.integrate().abs() <= 1e-12 * abs_integral(&l).max(1.0));
        }

        #[test]
        fn chemotaxis_integrates_to_zero((n, w) in positive_pair(8, 11), chi in 0.1f64..5.0, k in 0.0f64..1.0, upwind: bool) {
            let rule = if upwind { FaceRule::Upwind } else { FaceRule::Centered };
            let d = chemotaxis_divergence(&n, &w, chi, k, rule).unwrap().divergence;
            prop_assert!(d.integrate().abs() <= 1e-12 * abs_integral(&d).max(1.0));
        }

        #[test]
        fn k0_matches_padded_conservative_form((n, w) in positive_pair(7, 9), chi in 0.1f64..5.0) {
            let d = chemotaxis_divergence(&n, &w, chi, 0.0, FaceRule::Centered).unwrap().divergence;
            let reference = padded_advective(&n, &w, chi);
            for (a, &(b, scale)) in d.values().iter().zip(&reference) {
                prop_assert!((a - b).abs() <= 1e-14 * scale.max(1.0), "{} vs {}", a, b);
            }
        }

        #[test]
        fn signal_mass_balance((u, w) in positive_pair(13, 13), v0 in 0.1f64..5.0) {
            let g = *u.grid();
            let s = State { u: u.clone(), v: Field::constant(g, v0), w: w.clone(), t: 0.0 };
            let rhs = assemble_rhs(&s, &Params::case1(), FaceRule::Centered).unwrap();
            let expect = s.u.integrate() + s.v.integrate() - s.w.integrate();
            let scale = s.u.integrate() + s.v.integrate() + s.w.integrate();
            prop_assert!((rhs.dw.integrate() - expect).abs() <= 1e-12 * scale);
        }
    }
}

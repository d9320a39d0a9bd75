//! Energies, area, hole radii and the annular velocity estimators.
//!
//! Surface integrals use the measure `2 pi X^r ds`; edge lengths are `2 pi X^r`.

use std::f64::consts::PI;

use crate::curve::GeneratingCurve;
use crate::error::Result;
use crate::fem::{eval_p2, unit_gauss};
use crate::solver::{SimParams, SystemState};

/// Nondimensional energy split into its three parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energy {
    pub bend: f64,
    pub gauss: f64,
    pub line: f64,
    pub total: f64,
}

/// `int (H - H0)^2 dA + gamma_g int K dA + gamma_l |edge|`, with `H` the
/// discrete mean-curvature field and `K` taken from the curve.
pub fn total_energy(state: &SystemState, params: &SimParams, gauss_points: usize) -> Result<Energy> {
    let curve = &state.curve;
    let (xs, ws) = unit_gauss(gauss_points);
    let mut bend = 0.0;
    let mut gauss = 0.0;
    for c in 0..curve.mesh().n_cells() {
        let h = curve.mesh().width(c);
        for (&u, &w) in xs.iter().zip(&ws) {
            let p = curve.at(c, u);
            let dm = 2.0 * PI * w * h * p.speed() * p.x[0];
            let hv = eval_p2(&state.h, c, u) - params.h0;
            bend += dm * hv * hv;
            if params.gamma_g != 0.0 {
                gauss += dm * p.gaussian_curvature()?;
            }
        }
    }
    let gauss = params.gamma_g * gauss;
    let line = params.gamma_l * edge_length(curve);
    Ok(Energy {
        bend,
        gauss,
        line,
        total: bend + gauss + line,
    })
}

/// Total length of the open edges.
pub fn edge_length(curve: &GeneratingCurve) -> f64 {
    curve.open_ends().into_iter().map(|e| 2.0 * PI * curve.end_radius(e)).sum()
}

/// Surface area `2 pi int X^r ds`.
pub fn area(curve: &GeneratingCurve, gauss_points: usize) -> f64 {
    let (xs, ws) = unit_gauss(gauss_points);
    let mut a = 0.0;
    for c in 0..curve.mesh().n_cells() {
        let h = curve.mesh().width(c);
        for (&u, &w) in xs.iter().zip(&ws) {
            let p = curve.at(c, u);
            a += w * h * p.speed() * p.x[0];
        }
    }
    2.0 * PI * a
}

/// `X^r` at each open edge, start first.
pub fn hole_radius(state: &SystemState) -> Vec<f64> {
    state.hole_radii()
}

/// Largest `|X^z - X^z(0)|` over the dofs; zero for a planar state.
pub fn planarity(curve: &GeneratingCurve) -> f64 {
    let z0 = curve.xz()[0];
    curve.xz().iter().fold(0.0_f64, |m, z| m.max((z - z0).abs()))
}

fn radial_integrals(curve: &GeneratingCurve, u: &[f64], gauss_points: usize, mut f: impl FnMut(f64, f64, f64)) {
    // Calls f(r, U^r, weight of dr) at each quadrature point.
    let m = curve.n_dofs();
    let ur: Vec<f64> = (0..m).map(|i| u[2 * i]).collect();
    let (xs, ws) = unit_gauss(gauss_points);
    for c in 0..curve.mesh().n_cells() {
        let h = curve.mesh().width(c);
        for (&u, &w) in xs.iter().zip(&ws) {
            let p = curve.at(c, u);
            f(p.x[0], eval_p2(&ur, c, u), w * h * p.xa[0].abs());
        }
    }
}

/// `F_h = int r^2 U^r dr / int r dr` over a planar annular curve.
///
/// `u` is the interleaved velocity solved on `curve`, i.e. the velocity of
/// the next time level paired with the geometry it was computed on.
pub fn f_estimate(curve: &GeneratingCurve, u: &[f64], gauss_points: usize) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    radial_integrals(curve, u, gauss_points, |r, ur, w| {
        num += w * r * r * ur;
        den += w * r;
    });
    num / den
}

/// `(int r (U^r - F_h / r)^2 dr)^(1/2)`.
pub fn velocity_error(curve: &GeneratingCurve, u: &[f64], gauss_points: usize) -> f64 {
    let f = f_estimate(curve, u, gauss_points);
    let mut e = 0.0;
    radial_integrals(curve, u, gauss_points, |r, ur, w| {
        let d = ur - f / r;
        e += w * r * d * d;
    });
    e.sqrt()
}

/// Relative spread `std(r U^r) / |mean(r U^r)|` over the P2 dofs.
pub fn flux_spread(curve: &GeneratingCurve, u: &[f64]) -> f64 {
    let m = curve.n_dofs();
    let v: Vec<f64> = (0..m).map(|i| curve.xr()[i] * u[2 * i]).collect();
    let mean = v.iter().sum::<f64>() / m as f64;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m as f64;
    var.sqrt() / mean.abs()
}

/// `(s, H)` at every P2 dof, `s` the arc length from the start.
pub fn curvature_profile(state: &SystemState) -> Vec<(f64, f64)> {
    let curve = &state.curve;
    let (xs, ws) = unit_gauss(8);
    let mut out = Vec::with_capacity(curve.n_dofs());
    let mut s = 0.0;
    out.push((0.0, state.h[0]));
    for c in 0..curve.mesh().n_cells() {
        let h = curve.mesh().width(c);
        for (k, (lo, hi)) in [(0.0, 0.5), (0.5, 1.0)].into_iter().enumerate() {
            s += xs
                .iter()
                .zip(&ws)
                .map(|(&u, &w)| w * (hi - lo) * h * curve.at(c, lo + (hi - lo) * u).speed())
                .sum::<f64>();
            out.push((s, state.h[2 * c + k + 1]));
        }
    }
    out
}

/// Arc-length distance from the last open edge over which `H` leaves its
/// interior plateau (the value at mid-length) by more than `fraction` of the
/// plateau-to-edge jump. Zero if there is no jump.
pub fn boundary_layer_width(state: &SystemState, fraction: f64) -> f64 {
    let prof = curvature_profile(state);
    let len = prof.last().map(|p| p.0).unwrap_or(0.0);
    let plateau = prof
        .iter()
        .min_by(|a, b| (a.0 - 0.5 * len).abs().total_cmp(&(b.0 - 0.5 * len).abs()))
        .map(|p| p.1)
        .unwrap_or(0.0);
    let edge = prof.last().map(|p| p.1).unwrap_or(0.0);
    let jump = (edge - plateau).abs();
    if jump == 0.0 {
        return 0.0;
    }
    // Walk inward from the edge until H is back within the band.
    let mut s_in = len;
    for w in prof.windows(2).rev() {
        let (s0, h0) = w[0];
        let (s1, h1) = w[1];
        let d0 = (h0 - plateau).abs() - fraction * jump;
        let d1 = (h1 - plateau).abs() - fraction * jump;
        if d0 <= 0.0 && d1 > 0.0 {
            s_in = s0 + (s1 - s0) * (-d0) / (d1 - d0);
            break;
        }
        if s0 < 0.5 * len {
            s_in = s0;
            break;
        }
    }
    len - s_in
}

/// Physical-to-nondimensional parameter map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nondimensional {
    pub beta: f64,
    pub gamma_g: f64,
    pub gamma_l: f64,
    pub h0: f64,
    /// Time scale `L^3 mu / alpha`.
    pub time_scale: f64,
}

/// Physical parameters in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physical {
    pub length: f64,
    pub mu: f64,
    pub mu_membrane: f64,
    pub line_tension: f64,
    pub bending: f64,
    pub gaussian_bending: f64,
    pub c0: f64,
}

pub fn nondimensionalize(p: &Physical) -> Result<Nondimensional> {
    for (name, v) in [("length", p.length), ("mu", p.mu), ("bending", p.bending)] {
        if !(v > 0.0) {
            return Err(crate::Error::Domain(format!("{name} = {v} must be positive")));
        }
    }
    Ok(Nondimensional {
        beta: p.mu_membrane / (p.length * p.mu),
        gamma_g: p.gaussian_bending / p.bending,
        gamma_l: p.line_tension * p.length / p.bending,
        h0: p.length * p.c0,
        time_scale: p.length.powi(3) * p.mu / p.bending,
    })
}

/// `mu R_i^2 / gamma` expressed in nondimensional time: `R_i^2 / gamma_l`.
pub fn tau_20(inner_radius: f64, gamma_l: f64) -> f64 {
    inner_radius * inner_radius / gamma_l
}

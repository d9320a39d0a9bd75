//! Galerkin matrix of the axisymmetric single-layer operator on P2 densities.
//!
//! The double integral is assembled over pairs of cells. Coincident cells are
//! split along the diagonal and integrated in the difference variable with the
//! log-corrected rule; touching cells use a polar map around the shared node;
//! all other pairs are subdivided until well separated and then use tensor
//! Gauss rules. Only pairs `c1 <= c2` are computed and the result is mirrored,
//! so the matrix is symmetric to rounding.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{alpert_log_rule, QuadRule};
use crate::curve::GeneratingCurve;
use crate::error::Result;
use crate::fem::{p2_basis, unit_gauss};
use crate::special::axisym_kernel;

/// Quadrature controls for the singular assembly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleLayerOptions {
    /// Gauss points per direction on smooth pieces.
    pub gauss_points: usize,
    pub alpert_order: usize,
    /// Trapezoidal panels of the log-corrected rule.
    pub alpert_panels: usize,
    /// Separation (in units of the larger interval) above which a pair is treated as smooth.
    pub separation: f64,
}

impl Default for SingleLayerOptions {
    fn default() -> Self {
        SingleLayerOptions {
            gauss_points: 8,
            alpert_order: 7,
            alpert_panels: 16,
            separation: 1.0,
        }
    }
}

type Block = [[f64; 6]; 6];

#[derive(Clone, Copy)]
struct Sample {
    r: f64,
    z: f64,
    // X^r |X_alpha| h: the weighted measure in the local coordinate.
    g: f64,
    phi: [f64; 3],
}

fn sample(curve: &GeneratingCurve, c: usize, u: f64) -> Sample {
    let p = curve.at(c, u);
    let h = curve.mesh().width(c);
    let (phi, _, _) = p2_basis(u);
    Sample {
        r: p.x[0],
        z: p.x[1],
        g: p.x[0] * p.speed() * h,
        phi,
    }
}

#[inline]
fn accumulate(block: &mut Block, t: &Sample, s: &Sample, w: f64) -> Result<()> {
    let k = axisym_kernel(t.r, s.r, t.z - s.z)?;
    let f = w * t.g * s.g / (8.0 * PI);
    for li in 0..3 {
        let fi = f * t.phi[li];
        for lj in 0..3 {
            let fij = fi * s.phi[lj];
            for a in 0..2 {
                for b in 0..2 {
                    block[2 * li + a][2 * lj + b] += fij * k[a][b];
                }
            }
        }
    }
    Ok(())
}

struct Rules {
    gx: Vec<f64>,
    gw: Vec<f64>,
    alpert: QuadRule,
    separation: f64,
}

fn same_cell(curve: &GeneratingCurve, c: usize, q: &Rules) -> Result<Block> {
    // Half u > v with u = v + t; the other half is the transpose.
    let mut half = [[0.0; 6]; 6];
    for (&t, &wt) in q.alpert.nodes.iter().zip(&q.alpert.weights) {
        let len = 1.0 - t;
        for (&x, &wx) in q.gx.iter().zip(&q.gw) {
            let v = len * x;
            let src = sample(curve, c, v);
            let tgt = sample(curve, c, v + t);
            accumulate(&mut half, &tgt, &src, wt * wx * len)?;
        }
    }
    let mut out = half;
    for i in 0..6 {
        for j in 0..6 {
            out[i][j] += half[j][i];
        }
    }
    Ok(out)
}

fn touching(curve: &GeneratingCurve, c: usize, q: &Rules) -> Result<Block> {
    // Target in cell c, source in cell c + 1; x, y are alpha-distances from the shared node.
    let h1 = curve.mesh().width(c);
    let h2 = curve.mesh().width(c + 1);
    let split = h1 / (h1 + h2);
    let mut out = [[0.0; 6]; 6];
    for (lo, hi) in [(0.0, split), (split, 1.0)] {
        for (&x, &wx) in q.gx.iter().zip(&q.gw) {
            let lam = lo + (hi - lo) * x;
            let wl = wx * (hi - lo);
            let rmax = (h1 / lam).min(h2 / (1.0 - lam));
            for (&tau, &wt) in q.alpert.nodes.iter().zip(&q.alpert.weights) {
                let rho = rmax * tau;
                let u = 1.0 - rho * lam / h1;
                let v = rho * (1.0 - lam) / h2;
                let tgt = sample(curve, c, u.clamp(0.0, 1.0));
                let src = sample(curve, c + 1, v.clamp(0.0, 1.0));
                let jac = rmax * rmax * tau / (h1 * h2);
                accumulate(&mut out, &tgt, &src, wl * wt * jac)?;
            }
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn separated(
    curve: &GeneratingCurve,
    c1: usize,
    (u0, u1): (f64, f64),
    c2: usize,
    (v0, v1): (f64, f64),
    q: &Rules,
    out: &mut Block,
    depth: usize,
) -> Result<()> {
    let mesh = curve.mesh();
    let (a1, b1) = mesh.cell(c1);
    let (a2, b2) = mesh.cell(c2);
    let h1 = b1 - a1;
    let h2 = b2 - a2;
    let s1 = (a1 + u0 * h1, a1 + u1 * h1);
    let s2 = (a2 + v0 * h2, a2 + v1 * h2);
    let len1 = s1.1 - s1.0;
    let len2 = s2.1 - s2.0;
    let gap = (s2.0 - s1.1).max(s1.0 - s2.1).max(0.0);
    if gap >= q.separation * len1.max(len2) || depth > 40 {
        let sv: Vec<Sample> = q.gx.iter().map(|&x| sample(curve, c2, v0 + (v1 - v0) * x)).collect();
        for (&x, &wx) in q.gx.iter().zip(&q.gw) {
            let tgt = sample(curve, c1, u0 + (u1 - u0) * x);
            for (src, &wy) in sv.iter().zip(&q.gw) {
                accumulate(out, &tgt, src, wx * wy * (u1 - u0) * (v1 - v0))?;
            }
        }
        return Ok(());
    }
    if len1 >= len2 {
        let m = 0.5 * (u0 + u1);
        separated(curve, c1, (u0, m), c2, (v0, v1), q, out, depth + 1)?;
        separated(curve, c1, (m, u1), c2, (v0, v1), q, out, depth + 1)
    } else {
        let m = 0.5 * (v0 + v1);
        separated(curve, c1, (u0, u1), c2, (v0, m), q, out, depth + 1)?;
        separated(curve, c1, (u0, u1), c2, (m, v1), q, out, depth + 1)
    }
}

/// Dense matrix `B[(i,a),(j,b)] = <phi_i e_a, S[phi_j e_b]>` over the P2
/// basis, with coefficient index `2 i + a`.
pub fn singular_pair_assembly(curve: &GeneratingCurve, opts: &SingleLayerOptions) -> Result<DMatrix<f64>> {
    let (gx, gw) = unit_gauss(opts.gauss_points);
    let rules = Rules {
        gx,
        gw,
        alpert: alpert_log_rule(opts.alpert_order, opts.alpert_panels)?,
        separation: opts.separation,
    };
    let n = curve.mesh().n_cells();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|c1| (c1..n).map(move |c2| (c1, c2))).collect();
    let blocks: Vec<Result<Block>> = pairs
        .par_iter()
        .map(|&(c1, c2)| {
            if c1 == c2 {
                same_cell(curve, c1, &rules)
            } else if c2 == c1 + 1 {
                touching(curve, c1, &rules)
            } else {
                let mut b = [[0.0; 6]; 6];
                separated(curve, c1, (0.0, 1.0), c2, (0.0, 1.0), &rules, &mut b, 0)?;
                Ok(b)
            }
        })
        .collect();
    let m = 2 * (2 * n + 1);
    let mut out = DMatrix::zeros(m, m);
    for (&(c1, c2), blk) in pairs.iter().zip(blocks) {
        let blk = blk?;
        for li in 0..6 {
            let gi = 4 * c1 + li;
            for lj in 0..6 {
                let gj = 4 * c2 + lj;
                out[(gi, gj)] += blk[li][lj];
                if c1 != c2 {
                    out[(gj, gi)] += blk[li][lj];
                }
            }
        }
    }
    Ok(out)
}

//! P2 generating curves and their axisymmetric geometry.

use crate::error::{Error, Result};
use crate::fem::p2_basis;
use crate::mesh::ReferenceMesh;

/// Endpoint of the reference interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum End {
    Start,
    End,
}

impl End {
    fn sign(self) -> f64 {
        match self {
            End::Start => -1.0,
            End::End => 1.0,
        }
    }
}

/// Darboux data of an open edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeFrame {
    pub nu: [f64; 2],
    pub kappa_n: f64,
    pub kappa_g: f64,
    pub end: End,
}

/// Position and `alpha`-derivatives of the curve at one parameter value.
#[derive(Debug, Clone, Copy)]
pub struct CurvePoint {
    pub x: [f64; 2],
    pub xa: [f64; 2],
    pub xaa: [f64; 2],
}

impl CurvePoint {
    pub fn speed(&self) -> f64 {
        self.xa[0].hypot(self.xa[1])
    }

    pub fn tangent(&self) -> [f64; 2] {
        let v = self.speed();
        [self.xa[0] / v, self.xa[1] / v]
    }

    /// Unit normal `(-tau_z, tau_r)`: points to `+z` on a disk and inward on a
    /// sphere traced from the south pole, so that the unit sphere has `H = 1`.
    pub fn normal(&self) -> [f64; 2] {
        let t = self.tangent();
        [-t[1], t[0]]
    }

    /// Signed curvature of the planar curve, `X^r_s X^z_ss - X^z_s X^r_ss`.
    pub fn kappa(&self) -> f64 {
        let v = self.speed();
        (self.xa[0] * self.xaa[1] - self.xa[1] * self.xaa[0]) / (v * v * v)
    }

    /// Azimuthal principal curvature `X^z_s / X^r`.
    pub fn azimuthal(&self) -> Result<f64> {
        if self.x[0] <= 0.0 {
            return Err(Error::AxisSingularity(format!(
                "X^r = {} at the evaluation point",
                self.x[0]
            )));
        }
        Ok(self.tangent()[1] / self.x[0])
    }

    pub fn mean_curvature(&self) -> Result<f64> {
        Ok(0.5 * (self.kappa() + self.azimuthal()?))
    }

    pub fn gaussian_curvature(&self) -> Result<f64> {
        Ok(self.kappa() * self.azimuthal()?)
    }
}

/// Curve `X(alpha) = (X^r, X^z)` in the P2 space over a reference mesh.
#[derive(Debug, Clone)]
pub struct GeneratingCurve {
    mesh: ReferenceMesh,
    xr: Vec<f64>,
    xz: Vec<f64>,
    axis_start: bool,
    axis_end: bool,
}

/// `alpha` coordinate of P2 dof `i`.
pub fn p2_dof_alpha(mesh: &ReferenceMesh, i: usize) -> f64 {
    let c = i / 2;
    if i % 2 == 0 {
        mesh.nodes()[c]
    } else {
        let (a, b) = mesh.cell(c);
        0.5 * (a + b)
    }
}

impl GeneratingCurve {
    /// Build from P2 coefficients; radial coefficients at axis ends are forced to 0.
    pub fn from_coefficients(
        mesh: ReferenceMesh,
        mut xr: Vec<f64>,
        xz: Vec<f64>,
        axis_start: bool,
        axis_end: bool,
    ) -> Result<Self> {
        let m = 2 * mesh.n_cells() + 1;
        if xr.len() != m || xz.len() != m {
            return Err(Error::Geometry(format!(
                "expected {m} coefficients per component, got {} and {}",
                xr.len(),
                xz.len()
            )));
        }
        if axis_start {
            xr[0] = 0.0;
        }
        if axis_end {
            xr[m - 1] = 0.0;
        }
        let c = GeneratingCurve {
            mesh,
            xr,
            xz,
            axis_start,
            axis_end,
        };
        c.validate()?;
        Ok(c)
    }

    /// P2 interpolant of a closed-form curve given on `alpha in [0, 1]`.
    pub fn interpolate(
        mesh: ReferenceMesh,
        f: impl Fn(f64) -> [f64; 2],
        axis_start: bool,
        axis_end: bool,
    ) -> Result<Self> {
        let m = 2 * mesh.n_cells() + 1;
        let mut xr = Vec::with_capacity(m);
        let mut xz = Vec::with_capacity(m);
        for i in 0..m {
            let p = f(p2_dof_alpha(&mesh, i));
            xr.push(p[0]);
            xz.push(p[1]);
        }
        Self::from_coefficients(mesh, xr, xz, axis_start, axis_end)
    }

    /// Same mesh and axis flags, new coefficients.
    pub fn with_coefficients(&self, xr: Vec<f64>, xz: Vec<f64>) -> Result<Self> {
        Self::from_coefficients(self.mesh.clone(), xr, xz, self.axis_start, self.axis_end)
    }

    fn validate(&self) -> Result<()> {
        let m = self.xr.len();
        for i in 0..m {
            let on_axis = (i == 0 && self.axis_start) || (i == m - 1 && self.axis_end);
            if !self.xr[i].is_finite() || !self.xz[i].is_finite() {
                return Err(Error::Geometry(format!("non-finite coefficient at dof {i}")));
            }
            if !on_axis && self.xr[i] <= 0.0 {
                return Err(Error::Geometry(format!(
                    "X^r = {} at dof {i} is not positive off the axis",
                    self.xr[i]
                )));
            }
        }
        Ok(())
    }

    pub fn mesh(&self) -> &ReferenceMesh {
        &self.mesh
    }

    pub fn xr(&self) -> &[f64] {
        &self.xr
    }

    pub fn xz(&self) -> &[f64] {
        &self.xz
    }

    pub fn axis_start(&self) -> bool {
        self.axis_start
    }

    pub fn axis_end(&self) -> bool {
        self.axis_end
    }

    pub fn n_dofs(&self) -> usize {
        self.xr.len()
    }

    /// Open (off-axis) ends in the order start, end.
    pub fn open_ends(&self) -> Vec<End> {
        let mut v = Vec::new();
        if !self.axis_start {
            v.push(End::Start);
        }
        if !self.axis_end {
            v.push(End::End);
        }
        v
    }

    pub fn is_axis(&self, end: End) -> bool {
        match end {
            End::Start => self.axis_start,
            End::End => self.axis_end,
        }
    }

    /// P2 dof index of an endpoint.
    pub fn end_dof(&self, end: End) -> usize {
        match end {
            End::Start => 0,
            End::End => self.xr.len() - 1,
        }
    }

    /// Evaluate on cell `c` at local coordinate `u in [0, 1]`.
    pub fn at(&self, c: usize, u: f64) -> CurvePoint {
        let h = self.mesh.width(c);
        let (v, d, dd) = p2_basis(u);
        let mut p = CurvePoint {
            x: [0.0; 2],
            xa: [0.0; 2],
            xaa: [0.0; 2],
        };
        for k in 0..3 {
            let i = 2 * c + k;
            for (a, coef) in [self.xr[i], self.xz[i]].into_iter().enumerate() {
                p.x[a] += v[k] * coef;
                p.xa[a] += d[k] * coef / h;
                p.xaa[a] += dd[k] * coef / (h * h);
            }
        }
        p
    }

    pub fn eval(&self, alpha: f64) -> CurvePoint {
        let (c, u) = self.mesh.locate(alpha);
        self.at(c, u)
    }

    /// Total arc length by Gauss quadrature per cell.
    pub fn length(&self) -> f64 {
        let (xs, ws) = crate::fem::unit_gauss(8);
        (0..self.mesh.n_cells())
            .map(|c| {
                let h = self.mesh.width(c);
                xs.iter().zip(&ws).map(|(&u, &w)| w * h * self.at(c, u).speed()).sum::<f64>()
            })
            .sum()
    }

    /// Smallest `|X_alpha|` sampled at cell nodes and midpoints.
    pub fn min_speed(&self) -> f64 {
        let mut m = f64::INFINITY;
        for c in 0..self.mesh.n_cells() {
            for u in [0.0, 0.5, 1.0] {
                m = m.min(self.at(c, u).speed());
            }
        }
        m
    }

    /// Physical radius at an endpoint.
    pub fn end_radius(&self, end: End) -> f64 {
        self.xr[self.end_dof(end)]
    }

    /// One-sided evaluation at an endpoint.
    pub fn at_end(&self, end: End) -> CurvePoint {
        match end {
            End::Start => self.at(0, 0.0),
            End::End => self.at(self.mesh.n_cells() - 1, 1.0),
        }
    }

    /// Mean curvature at every P2 dof: one-sided values averaged at shared
    /// nodes, and the pole limit `H = kappa` at axis ends.
    pub fn nodal_mean_curvature(&self) -> Vec<f64> {
        let n = self.mesh.n_cells();
        let m = self.xr.len();
        let mut acc = vec![0.0; m];
        let mut cnt = vec![0.0; m];
        for c in 0..n {
            for (k, u) in [0.0, 0.5, 1.0].into_iter().enumerate() {
                let i = 2 * c + k;
                let p = self.at(c, u);
                let h = match p.mean_curvature() {
                    Ok(h) => h,
                    Err(_) => p.kappa(),
                };
                acc[i] += h;
                cnt[i] += 1.0;
            }
        }
        acc.iter().zip(&cnt).map(|(a, c)| a / c).collect()
    }
}

/// Mean and Gaussian curvature at `alpha`.
pub fn curvatures(curve: &GeneratingCurve, alpha: f64) -> Result<(f64, f64)> {
    let p = curve.eval(alpha);
    Ok((p.mean_curvature()?, p.gaussian_curvature()?))
}

/// Pole values of `(H, K)` at an axis end from the one-sided limit
/// `X^z_s / X^r -> X^z_ss / X^r_s`, which equals the meridian curvature.
pub fn axis_limits(curve: &GeneratingCurve, end: End) -> Result<(f64, f64)> {
    if !curve.is_axis(end) {
        return Err(Error::Geometry("requested axis limit at an open edge".into()));
    }
    let p = curve.at_end(end);
    let v = p.speed();
    let ts = [p.xa[0] / v, p.xa[1] / v];
    // X_ss = (X_aa - (X_aa . tau) tau) / v^2
    let dot = p.xaa[0] * ts[0] + p.xaa[1] * ts[1];
    let zss = (p.xaa[1] - dot * ts[1]) / (v * v);
    if ts[0].abs() < 1e-300 {
        return Err(Error::Geometry("curve is tangent to the axis".into()));
    }
    let az = zss / ts[0];
    let k = p.kappa();
    Ok((0.5 * (k + az), k * az))
}

/// Conormal and edge curvatures at an open end.
pub fn edge_frame(curve: &GeneratingCurve, end: End) -> Result<EdgeFrame> {
    if curve.is_axis(end) {
        return Err(Error::Geometry("no edge at an axis endpoint".into()));
    }
    let p = curve.at_end(end);
    if p.x[0] <= 0.0 {
        return Err(Error::Geometry(format!("edge radius {} is not positive", p.x[0])));
    }
    let t = p.tangent();
    let s = end.sign();
    Ok(EdgeFrame {
        nu: [s * t[0], s * t[1]],
        kappa_n: s * t[1] / p.x[0],
        kappa_g: s * t[0] / p.x[0],
        end,
    })
}

/// Unit normal and tangent at `alpha`.
pub fn normal_and_tangent(curve: &GeneratingCurve, alpha: f64) -> Result<([f64; 2], [f64; 2])> {
    let p = curve.eval(alpha);
    let v = p.speed();
    if v < 1e-12 {
        return Err(Error::Geometry(format!("|X_alpha| = {v} is degenerate")));
    }
    Ok((p.normal(), p.tangent()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, RefineAt};
    use std::f64::consts::PI;

    fn sphere(n: usize, eps: f64, l: f64) -> GeneratingCurve {
        let m = build_mesh(n, eps, RefineAt::End).unwrap();
        GeneratingCurve::interpolate(m, |a| [(a * l).sin(), -(a * l).cos()], true, false).unwrap()
    }

    #[test]
    fn sphere_curvatures() {
        let c = sphere(64, 1e-3, 0.9 * PI);
        for &a in &[0.1, 0.4, 0.77, 0.95] {
            let (h, k) = curvatures(&c, a).unwrap();
            assert!((h - 1.0).abs() < 2e-3, "H = {h}");
            assert!((k - 1.0).abs() < 4e-3, "K = {k}");
        }
        assert!(matches!(curvatures(&c, 0.0), Err(Error::AxisSingularity(_))));
        let (h, _) = axis_limits(&c, End::Start).unwrap();
        assert!((h - 1.0).abs() < 4e-3);
    }

    #[test]
    fn disk_and_cylinder() {
        let m = build_mesh(8, 1e-3, RefineAt::End).unwrap();
        let d = GeneratingCurve::interpolate(m.clone(), |a| [a, 0.0], true, false).unwrap();
        let (h, k) = curvatures(&d, 0.3).unwrap();
        assert_eq!((h, k), (0.0, 0.0));
        let cyl = GeneratingCurve::interpolate(m, |a| [2.0, a], false, false).unwrap();
        let (h, k) = curvatures(&cyl, 0.3).unwrap();
        assert!((h - 0.25).abs() < 1e-14);
        assert!(k.abs() < 1e-14);
    }

    #[test]
    fn annulus_edges() {
        let m = build_mesh(8, 1e-3, RefineAt::Both).unwrap();
        let c = GeneratingCurve::interpolate(m, |a| [1.0 + a, 0.0], false, false).unwrap();
        let e = edge_frame(&c, End::End).unwrap();
        assert!((e.nu[0] - 1.0).abs() < 1e-14 && e.nu[1].abs() < 1e-14);
        assert!(e.kappa_n.abs() < 1e-14);
        assert!((e.kappa_g - 0.5).abs() < 1e-14);
        let s = edge_frame(&c, End::Start).unwrap();
        assert!((s.nu[0] + 1.0).abs() < 1e-14);
        assert!((s.kappa_g + 1.0).abs() < 1e-14);
    }

    #[test]
    fn cap_edge() {
        let l = 0.9 * PI;
        let c = sphere(64, 0.0, l);
        let e = edge_frame(&c, End::End).unwrap();
        assert!((e.kappa_n - 1.0).abs() < 1e-6);
        assert!((e.kappa_g - l.cos() / l.sin()).abs() < 1e-5);
        assert!(edge_frame(&c, End::Start).is_err());
    }

    #[test]
    fn orientation() {
        let m = build_mesh(8, 1e-3, RefineAt::End).unwrap();
        let d = GeneratingCurve::interpolate(m, |a| [a, 0.0], true, false).unwrap();
        let (n, t) = normal_and_tangent(&d, 0.5).unwrap();
        assert_eq!(t, [1.0, 0.0]);
        assert_eq!(n, [-0.0, 1.0]);
        let c = sphere(64, 1e-3, PI);
        let (n, t) = normal_and_tangent(&c, 0.5).unwrap();
        assert!((t[1] - 1.0).abs() < 1e-6 && (n[0] + 1.0).abs() < 1e-6);
    }

    #[test]
    fn conormal_points_outward() {
        let c = sphere(16, 1e-3, 0.6 * PI);
        let e = edge_frame(&c, End::End).unwrap();
        let m = c.n_dofs();
        let d = [c.xr()[m - 1] - c.xr()[m - 2], c.xz()[m - 1] - c.xz()[m - 2]];
        assert!(e.nu[0] * d[0] + e.nu[1] * d[1] > 0.0);
    }

    #[test]
    fn rejects_nonpositive_radius() {
        let m = build_mesh(4, 0.0, RefineAt::None).unwrap();
        let r = GeneratingCurve::interpolate(m, |a| [a - 0.5, 0.0], false, false);
        assert!(matches!(r, Err(Error::Geometry(_))));
    }
}

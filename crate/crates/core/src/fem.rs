//! P1/P2 Lagrange spaces on the reference mesh and the weighted curve forms.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::curve::{End, GeneratingCurve};
use crate::error::{Error, Result};
use crate::mesh::ReferenceMesh;
use crate::quadrature::gauss_rule;

/// P2 shape functions on `[0, 1]` with nodes `0, 1/2, 1`: values, first and second derivatives.
#[inline]
pub fn p2_basis(u: f64) -> ([f64; 3], [f64; 3], [f64; 3]) {
    (
        [2.0 * (u - 0.5) * (u - 1.0), -4.0 * u * (u - 1.0), 2.0 * u * (u - 0.5)],
        [4.0 * u - 3.0, 4.0 - 8.0 * u, 4.0 * u - 1.0],
        [4.0, -8.0, 4.0],
    )
}

#[inline]
pub fn p1_basis(u: f64) -> [f64; 2] {
    [1.0 - u, u]
}

const MAX_CACHED: usize = 32;

/// Gauss-Legendre nodes and weights on `[0, 1]`, cached for small counts.
pub fn unit_gauss(n: usize) -> (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<Vec<(Vec<f64>, Vec<f64>)>> = OnceLock::new();
    if (1..=MAX_CACHED).contains(&n) {
        let c = CACHE.get_or_init(|| {
            (1..=MAX_CACHED)
                .map(|k| {
                    let r = gauss_rule(k).expect("positive point count").unit();
                    (r.nodes, r.weights)
                })
                .collect()
        });
        return c[n - 1].clone();
    }
    let r = gauss_rule(n.max(1)).expect("positive point count").unit();
    (r.nodes, r.weights)
}

/// Constraint attached to a finite element space.
#[derive(Debug, Clone, PartialEq)]
pub enum Constraint {
    None,
    /// Radial component fixed to zero at the listed axis ends.
    AxisRZero(Vec<End>),
    /// Scalar value prescribed at the listed open ends.
    Dirichlet(Vec<(End, f64)>),
}

/// Degree-of-freedom map for a (possibly vector-valued) Lagrange space.
#[derive(Debug, Clone, PartialEq)]
pub struct DofLayout {
    n_cells: usize,
    degree: usize,
    components: usize,
    fixed: BTreeMap<usize, f64>,
}

impl DofLayout {
    /// Scalar dofs per component.
    pub fn n_dofs(&self) -> usize {
        self.degree * self.n_cells + 1
    }

    /// Total coefficient count (components times scalar dofs).
    pub fn len(&self) -> usize {
        self.components * self.n_dofs()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn fixed(&self) -> &BTreeMap<usize, f64> {
        &self.fixed
    }

    pub fn is_fixed(&self, i: usize) -> bool {
        self.fixed.contains_key(&i)
    }

    pub fn n_free(&self) -> usize {
        self.len() - self.fixed.len()
    }

    pub fn free_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|i| !self.fixed.contains_key(i)).collect()
    }

    /// Coefficient index of scalar dof `i`, component `a`.
    #[inline]
    pub fn index(&self, i: usize, a: usize) -> usize {
        self.components * i + a
    }

    /// Scalar dofs of cell `c`.
    pub fn cell_dofs(&self, c: usize) -> Vec<usize> {
        (0..=self.degree).map(|k| self.degree * c + k).collect()
    }

    pub fn end_dof(&self, end: End) -> usize {
        match end {
            End::Start => 0,
            End::End => self.n_dofs() - 1,
        }
    }
}

/// Lagrange space of the given degree and component count over `mesh`.
///
/// `axis_ends` lists the ends lying on the rotation axis; Dirichlet data may
/// only be prescribed at open ends.
pub fn build_space(
    mesh: &ReferenceMesh,
    degree: usize,
    components: usize,
    constraint: Constraint,
    axis_ends: &[End],
) -> Result<DofLayout> {
    if !(degree == 1 || degree == 2) {
        return Err(Error::Config(format!("degree {degree} not supported")));
    }
    if !(components == 1 || components == 2) {
        return Err(Error::Config(format!("{components} components not supported")));
    }
    let mut layout = DofLayout {
        n_cells: mesh.n_cells(),
        degree,
        components,
        fixed: BTreeMap::new(),
    };
    match constraint {
        Constraint::None => {}
        Constraint::AxisRZero(ends) => {
            if components != 2 {
                return Err(Error::Config("axis constraint needs a vector field".into()));
            }
            for e in ends {
                let i = layout.index(layout.end_dof(e), 0);
                layout.fixed.insert(i, 0.0);
            }
        }
        Constraint::Dirichlet(vals) => {
            if components != 1 {
                return Err(Error::Config("Dirichlet data is scalar".into()));
            }
            for (e, v) in vals {
                if axis_ends.contains(&e) {
                    return Err(Error::Config(
                        "Dirichlet edge data prescribed at an axis endpoint".into(),
                    ));
                }
                layout.fixed.insert(layout.end_dof(e), v);
            }
        }
    }
    Ok(layout)
}

/// Triplet sparse matrix with deterministic duplicate merging.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pub rows: usize,
    pub cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl SparseMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.entries.push((i, j, v));
    }

    /// Sort by (row, col) and sum duplicates in insertion order.
    pub fn compress(&mut self) {
        self.entries.sort_by_key(|&(i, j, _)| (i, j));
        let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(self.entries.len());
        for &(i, j, v) in &self.entries {
            match out.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => out.push((i, j, v)),
            }
        }
        self.entries = out;
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries
            .iter()
            .filter(|e| e.0 == i && e.1 == j)
            .map(|e| e.2)
            .sum()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
        }
        y
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        self.entries.iter().map(|&(i, j, v)| x[i] * v * y[j]).sum()
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut t = SparseMatrix {
            rows: self.cols,
            cols: self.rows,
            entries: self.entries.iter().map(|&(i, j, v)| (j, i, v)).collect(),
        };
        t.compress();
        t
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for &(i, j, v) in &self.entries {
            m[(i, j)] += v;
        }
        m
    }
}

/// Weighted bilinear forms on the generating curve, all with measure `X^r ds`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormKind {
    /// `int X^r f g ds`
    MassWeighted,
    /// `int X^r f_s g_s ds`
    StiffnessWeighted,
    /// `int X^r (X_s . psi_s + psi^r / X^r) q ds`, vector trial, scalar test.
    SurfaceDivergence,
    /// `int X^r (X_s . psi_s)(X_s . u_s) ds`, vector-vector.
    TangentialRate,
    /// `int psi^r u^r / X^r ds`, vector-vector, radial block only.
    AzimuthalRate,
    /// `int X^r psi . n g ds`, vector test, scalar trial.
    NormalProjection,
}

/// Local quadrature data on one cell.
pub(crate) struct CellPoint {
    pub w: f64,
    pub xr: f64,
    pub tau: [f64; 2],
    pub n: [f64; 2],
    pub p2: [f64; 3],
    pub p2s: [f64; 3],
    pub p1: [f64; 2],
    pub p1s: [f64; 2],
}

pub(crate) fn cell_points(curve: &GeneratingCurve, c: usize, q: usize) -> Vec<CellPoint> {
    let (xs, ws) = unit_gauss(q);
    let h = curve.mesh().width(c);
    xs.iter()
        .zip(&ws)
        .map(|(&u, &wq)| {
            let p = curve.at(c, u);
            let v = p.speed();
            let (b, d, _) = p2_basis(u);
            let du_ds = 1.0 / (h * v);
            CellPoint {
                w: wq * h * v,
                xr: p.x[0],
                tau: p.tangent(),
                n: p.normal(),
                p2: b,
                p2s: [d[0] * du_ds, d[1] * du_ds, d[2] * du_ds],
                p1: p1_basis(u),
                p1s: [-du_ds, du_ds],
            }
        })
        .collect()
}

/// Assemble `form` with rows indexed by `test` coefficients and columns by `trial`.
pub fn assemble_weighted_form(
    trial: &DofLayout,
    test: &DofLayout,
    curve: &GeneratingCurve,
    form: FormKind,
    gauss_points: usize,
) -> Result<SparseMatrix> {
    let n = curve.mesh().n_cells();
    if trial.n_cells != n || test.n_cells != n {
        return Err(Error::Config("layouts and curve use different meshes".into()));
    }
    let expect = |cond: bool, what: &str| -> Result<()> {
        if cond {
            Ok(())
        } else {
            Err(Error::Config(format!("{form:?}: {what}")))
        }
    };
    match form {
        FormKind::MassWeighted | FormKind::StiffnessWeighted => {
            expect(trial.components == test.components, "component mismatch")?
        }
        FormKind::SurfaceDivergence => expect(
            trial.components == 2 && test.components == 1,
            "needs vector trial and scalar test",
        )?,
        FormKind::TangentialRate | FormKind::AzimuthalRate => expect(
            trial.components == 2 && test.components == 2 && trial.degree == 2 && test.degree == 2,
            "needs P2 vector spaces",
        )?,
        FormKind::NormalProjection => expect(
            trial.components == 1 && test.components == 2,
            "needs vector test and scalar trial",
        )?,
    }
    let mut mat = SparseMatrix::new(test.len(), trial.len());
    for c in 0..n {
        let pts = cell_points(curve, c, gauss_points);
        let td = test.cell_dofs(c);
        let sd = trial.cell_dofs(c);
        let val = |deg: usize, p: &CellPoint, k: usize| if deg == 2 { p.p2[k] } else { p.p1[k] };
        for p in &pts {
            let wr = p.w * p.xr;
            let tder = |k: usize| if test.degree == 2 { p.p2s[k] } else { p.p1s[k] };
            let sder = |k: usize| if trial.degree == 2 { p.p2s[k] } else { p.p1s[k] };
            for (li, &i) in td.iter().enumerate() {
                for (lj, &j) in sd.iter().enumerate() {
                    match form {
                        FormKind::MassWeighted => {
                            let v = wr * val(test.degree, p, li) * val(trial.degree, p, lj);
                            for a in 0..test.components {
                                mat.add(test.index(i, a), trial.index(j, a), v);
                            }
                        }
                        FormKind::StiffnessWeighted => {
                            let v = wr * tder(li) * sder(lj);
                            for a in 0..test.components {
                                mat.add(test.index(i, a), trial.index(j, a), v);
                            }
                        }
                        FormKind::SurfaceDivergence => {
                            let q = val(test.degree, p, li);
                            for b in 0..2 {
                                let mut v = wr * p.tau[b] * sder(lj) * q;
                                if b == 0 {
                                    v += p.w * val(trial.degree, p, lj) * q;
                                }
                                mat.add(test.index(i, 0), trial.index(j, b), v);
                            }
                        }
                        FormKind::TangentialRate => {
                            let v = wr * tder(li) * sder(lj);
                            for a in 0..2 {
                                for b in 0..2 {
                                    mat.add(test.index(i, a), trial.index(j, b), v * p.tau[a] * p.tau[b]);
                                }
                            }
                        }
                        FormKind::AzimuthalRate => {
                            let v = p.w * p.p2[li] * p.p2[lj] / p.xr;
                            mat.add(test.index(i, 0), trial.index(j, 0), v);
                        }
                        FormKind::NormalProjection => {
                            let v = wr * val(test.degree, p, li) * val(trial.degree, p, lj);
                            for a in 0..2 {
                                mat.add(test.index(i, a), trial.index(j, 0), v * p.n[a]);
                            }
                        }
                    }
                }
            }
        }
    }
    mat.compress();
    Ok(mat)
}

/// Edge payload for `boundary_load`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgePayload {
    Scalar(f64),
    Vector([f64; 2]),
}

/// Point functional at open edges weighted by the edge radius `X^r`.
pub fn boundary_load(
    test: &DofLayout,
    curve: &GeneratingCurve,
    edge_values: &[(End, EdgePayload)],
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; test.len()];
    for &(end, payload) in edge_values {
        if curve.is_axis(end) {
            return Err(Error::Geometry("edge load requested on the axis".into()));
        }
        let w = curve.end_radius(end);
        let i = test.end_dof(end);
        match payload {
            EdgePayload::Scalar(v) => {
                if test.components != 1 {
                    return Err(Error::Config("scalar payload on a vector space".into()));
                }
                out[i] += w * v;
            }
            EdgePayload::Vector(v) => {
                if test.components != 2 {
                    return Err(Error::Config("vector payload on a scalar space".into()));
                }
                out[test.index(i, 0)] += w * v[0];
                out[test.index(i, 1)] += w * v[1];
            }
        }
    }
    Ok(out)
}

/// Evaluate a scalar P2 field on cell `c` at `u`.
pub fn eval_p2(coef: &[f64], c: usize, u: f64) -> f64 {
    let (b, _, _) = p2_basis(u);
    b[0] * coef[2 * c] + b[1] * coef[2 * c + 1] + b[2] * coef[2 * c + 2]
}

/// Evaluate a scalar P1 field on cell `c` at `u`.
pub fn eval_p1(coef: &[f64], c: usize, u: f64) -> f64 {
    let b = p1_basis(u);
    b[0] * coef[c] + b[1] * coef[c + 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, RefineAt};

    fn disk(n: usize) -> GeneratingCurve {
        let m = build_mesh(n, 1e-3, RefineAt::End).unwrap();
        GeneratingCurve::interpolate(m, |a| [a, 0.0], true, false).unwrap()
    }

    fn space(c: &GeneratingCurve, deg: usize, comp: usize) -> DofLayout {
        build_space(c.mesh(), deg, comp, Constraint::None, &[End::Start]).unwrap()
    }

    #[test]
    fn dof_counts() {
        let m = build_mesh(4, 0.0, RefineAt::End).unwrap();
        let p2 = build_space(&m, 2, 1, Constraint::None, &[]).unwrap();
        assert_eq!((p2.n_dofs(), p2.fixed().len()), (9, 0));
        let p1 = build_space(&m, 1, 1, Constraint::None, &[]).unwrap();
        assert_eq!(p1.n_dofs(), 5);
        let d = build_space(&m, 2, 1, Constraint::Dirichlet(vec![(End::End, 0.7)]), &[End::Start]).unwrap();
        assert_eq!(d.n_dofs(), 9);
        assert_eq!(d.fixed().get(&8), Some(&0.7));
        let bad = build_space(&m, 2, 1, Constraint::Dirichlet(vec![(End::Start, 0.7)]), &[End::Start]);
        assert!(matches!(bad, Err(Error::Config(_))));
        let v = build_space(&m, 2, 2, Constraint::AxisRZero(vec![End::Start]), &[End::Start]).unwrap();
        assert_eq!((v.len(), v.n_free()), (18, 17));
        assert!(v.is_fixed(0) && !v.is_fixed(1));
    }

    #[test]
    fn disk_mass_and_stiffness() {
        let c = disk(8);
        let s = space(&c, 2, 1);
        let mass = assemble_weighted_form(&s, &s, &c, FormKind::MassWeighted, 4).unwrap();
        let ones = vec![1.0; s.len()];
        assert!((mass.bilinear(&ones, &ones) - 0.5).abs() < 1e-13);
        let xr = c.xr().to_vec();
        assert!((mass.bilinear(&ones, &xr) - 1.0 / 3.0).abs() < 1e-13);
        let stiff = assemble_weighted_form(&s, &s, &c, FormKind::StiffnessWeighted, 4).unwrap();
        assert!((stiff.bilinear(&xr, &xr) - 0.5).abs() < 1e-13);
    }

    #[test]
    fn p1_derivative_and_divergence() {
        // div of U = (r, 0) on the flat disk is 2; paired with Q = 1 gives int 2 r dr = 1.
        let c = disk(6);
        let v = space(&c, 2, 2);
        let q = space(&c, 1, 1);
        let div = assemble_weighted_form(&v, &q, &c, FormKind::SurfaceDivergence, 4).unwrap();
        let mut u = vec![0.0; v.len()];
        for i in 0..v.n_dofs() {
            u[v.index(i, 0)] = c.xr()[i];
        }
        let ones = vec![1.0; q.len()];
        assert!((div.bilinear(&ones, &u) - 1.0).abs() < 1e-13);
        // P1 stiffness of f = alpha on a straight segment of length 1 parametrized by alpha.
        let s1 = space(&c, 1, 1);
        let k = assemble_weighted_form(&s1, &s1, &c, FormKind::StiffnessWeighted, 4).unwrap();
        let f: Vec<f64> = c.mesh().nodes().to_vec();
        assert!((k.bilinear(&f, &f) - 0.5).abs() < 1e-13);
    }

    #[test]
    fn partition_of_unity() {
        for &u in &[0.0, 0.1, 0.37, 0.5, 0.93, 1.0] {
            let (b, d, _) = p2_basis(u);
            assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            assert!(d.iter().sum::<f64>().abs() < 1e-14);
            assert!((p1_basis(u).iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn boundary_point_load() {
        let m = build_mesh(8, 1e-3, RefineAt::Both).unwrap();
        let c = GeneratingCurve::interpolate(m, |a| [1.0 + a, 0.0], false, false).unwrap();
        let v = build_space(c.mesh(), 2, 2, Constraint::None, &[]).unwrap();
        let load = boundary_load(&v, &c, &[(End::End, EdgePayload::Vector([1.0, 0.0]))]).unwrap();
        let last = v.end_dof(End::End);
        assert_eq!(load[v.index(last, 0)], 2.0);
        assert_eq!(load.iter().filter(|x| **x != 0.0).count(), 1);
        let zero = boundary_load(&v, &c, &[(End::End, EdgePayload::Vector([0.0, 0.0]))]).unwrap();
        assert!(zero.iter().all(|x| *x == 0.0));
        let both = boundary_load(
            &v,
            &c,
            &[(End::Start, EdgePayload::Vector([-1.0, 0.0])), (End::End, EdgePayload::Vector([1.0, 0.0]))],
        )
        .unwrap();
        assert_eq!(both[0], -1.0);
        assert_eq!(both[v.index(last, 0)], 2.0);
    }

    #[test]
    fn sparse_ops() {
        let mut a = SparseMatrix::new(2, 3);
        a.add(1, 2, 1.0);
        a.add(0, 0, 2.0);
        a.add(1, 2, 0.5);
        a.compress();
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.get(1, 2), 1.5);
        assert_eq!(a.mul_vec(&[1.0, 0.0, 2.0]), vec![2.0, 3.0]);
        assert_eq!(a.transpose().get(2, 1), 1.5);
    }
}

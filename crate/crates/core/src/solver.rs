//! Monolithic semi-implicit time stepping of the coupled membrane-flow system.
//!
//! Unknowns are blocked as `(xi, U, P, X, Hvec, H, g)`; vector fields
//! interleave `(r, z)` per dof. Constrained coefficients (axis radial values
//! and the edge value of `H`) are eliminated before the dense LU solve.

use nalgebra::{DMatrix, DVector};

use crate::curve::{edge_frame, End, GeneratingCurve};
use crate::diagnostics::{self, Energy};
use crate::error::{Error, Result};
use crate::fem::{
    assemble_weighted_form, boundary_load, build_space, eval_p2, unit_gauss, Constraint, DofLayout,
    EdgePayload, FormKind, SparseMatrix,
};
use crate::quadrature::{singular_pair_assembly, SingleLayerOptions};

/// Nondimensional model and run-control parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub beta: f64,
    pub gamma_g: f64,
    pub gamma_l: f64,
    pub h0: f64,
    pub dt: f64,
    pub stop_tol: f64,
    pub t_end: f64,
    /// Absolute hole radius below which a run stops; `None` picks 1% of the initial radius.
    pub min_hole_radius: Option<f64>,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            beta: 1.0,
            gamma_g: 0.0,
            gamma_l: 1.0,
            h0: 0.0,
            dt: 0.01,
            stop_tol: 1e-6,
            t_end: 100.0,
            min_hole_radius: None,
        }
    }
}

impl SimParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.beta >= 0.0) {
            return Err(Error::Config(format!("beta = {} must be nonnegative", self.beta)));
        }
        if !(self.stop_tol > 0.0) {
            return Err(Error::Config(format!("stop_tol = {} must be positive", self.stop_tol)));
        }
        Ok(())
    }
}

/// Quadrature settings shared by all forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization {
    pub gauss_points: usize,
    pub single_layer: SingleLayerOptions,
}

impl Default for Discretization {
    fn default() -> Self {
        Discretization {
            gauss_points: 4,
            single_layer: SingleLayerOptions::default(),
        }
    }
}

/// All fields at one time level.
#[derive(Debug, Clone)]
pub struct SystemState {
    pub t: f64,
    pub curve: GeneratingCurve,
    pub xi: Vec<f64>,
    pub u: Vec<f64>,
    pub p: Vec<f64>,
    pub hvec: Vec<f64>,
    pub h: Vec<f64>,
    pub g: Vec<f64>,
}

impl SystemState {
    /// Fluid fields at rest and `H` interpolated from the curve geometry.
    pub fn initial(curve: GeneratingCurve) -> Self {
        let m = curve.n_dofs();
        let n = curve.mesh().n_cells();
        let h = curve.nodal_mean_curvature();
        SystemState {
            t: 0.0,
            curve,
            xi: vec![0.0; 2 * m],
            u: vec![0.0; 2 * m],
            p: vec![0.0; n + 1],
            hvec: vec![0.0; 2 * m],
            h,
            g: vec![0.0; m],
        }
    }

    /// Radii of the open edges in the order start, end.
    pub fn hole_radii(&self) -> Vec<f64> {
        self.curve.open_ends().into_iter().map(|e| self.curve.end_radius(e)).collect()
    }
}

/// Field blocks of the monolithic system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Xi = 0,
    U = 1,
    P = 2,
    X = 3,
    Hvec = 4,
    H = 5,
    G = 6,
}

/// Assembled and reduced linear system for one step.
#[derive(Debug, Clone)]
pub struct StepSystem {
    pub layouts: Vec<DofLayout>,
    /// Start of each block in the unreduced numbering, plus the total.
    pub offsets: [usize; 8],
    pub matrix: DMatrix<f64>,
    pub rhs: DVector<f64>,
    /// Unreduced index of every reduced unknown.
    pub free: Vec<usize>,
    pub fixed: Vec<(usize, f64)>,
    /// Single-layer Galerkin block, kept for diagnostics.
    pub single_layer: DMatrix<f64>,
    /// `int X^r Q (X_s . U_s + U^r / X^r)` operator on the current curve.
    pub divergence: SparseMatrix,
}

impl StepSystem {
    pub fn size(&self) -> usize {
        self.free.len()
    }

    /// Number of free coefficients in one block.
    pub fn block_free(&self, b: Block) -> usize {
        self.layouts[b as usize].n_free()
    }
}

/// Per-step solver report.
#[derive(Debug, Clone, Copy)]
pub struct StepInfo {
    pub residual: f64,
    pub inextensibility: f64,
    pub size: usize,
}

/// Edge data evaluated on the curve at the current time level.
#[derive(Debug, Clone, Copy)]
pub struct EdgeData {
    pub end: End,
    pub nu: [f64; 2],
    pub kappa_n: f64,
    pub kappa_g: f64,
    pub gauss: f64,
    pub radius: f64,
}

pub fn edge_data(curve: &GeneratingCurve) -> Result<Vec<EdgeData>> {
    curve
        .open_ends()
        .into_iter()
        .map(|end| {
            let f = edge_frame(curve, end)?;
            let k = curve.at_end(end).gaussian_curvature()?;
            Ok(EdgeData {
                end,
                nu: f.nu,
                kappa_n: f.kappa_n,
                kappa_g: f.kappa_g,
                gauss: k,
                radius: curve.end_radius(end),
            })
        })
        .collect()
}

fn axis_ends(curve: &GeneratingCurve) -> Vec<End> {
    [End::Start, End::End].into_iter().filter(|&e| curve.is_axis(e)).collect()
}

/// Layouts of the seven blocks in order, with constraints for the given curve.
pub fn block_layouts(curve: &GeneratingCurve, params: &SimParams) -> Result<Vec<DofLayout>> {
    let mesh = curve.mesh();
    let axis = axis_ends(curve);
    let edges = edge_data(curve)?;
    let vec_free = build_space(mesh, 2, 2, Constraint::None, &axis)?;
    let vec_axis = build_space(mesh, 2, 2, Constraint::AxisRZero(axis.clone()), &axis)?;
    let p1 = build_space(mesh, 1, 1, Constraint::None, &axis)?;
    let dir: Vec<(End, f64)> = edges
        .iter()
        .map(|e| (e.end, params.h0 - params.gamma_g * e.kappa_n))
        .collect();
    let h = build_space(mesh, 2, 1, Constraint::Dirichlet(dir), &axis)?;
    let g = build_space(mesh, 2, 1, Constraint::None, &axis)?;
    Ok(vec![vec_free, vec_axis.clone(), p1, vec_axis.clone(), vec_axis, h, g])
}

struct Reducer {
    map: Vec<Option<usize>>,
    fixed_val: Vec<f64>,
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl Reducer {
    #[inline]
    fn add(&mut self, i: usize, j: usize, v: f64) {
        if let Some(ri) = self.map[i] {
            match self.map[j] {
                Some(cj) => self.a[(ri, cj)] += v,
                None => self.b[ri] -= v * self.fixed_val[j],
            }
        }
    }

    fn add_sparse(&mut self, m: &SparseMatrix, r0: usize, c0: usize, scale: f64) {
        for &(i, j, v) in m.entries() {
            self.add(r0 + i, c0 + j, scale * v);
        }
    }

    fn add_rhs(&mut self, v: &[f64], r0: usize) {
        for (i, x) in v.iter().enumerate() {
            if let Some(ri) = self.map[r0 + i] {
                self.b[ri] += x;
            }
        }
    }
}

/// Assemble rows (a)-(g) of the scheme on the state's curve.
pub fn assemble_step(state: &SystemState, params: &SimParams, disc: &Discretization) -> Result<StepSystem> {
    params.validate()?;
    let curve = &state.curve;
    let q = disc.gauss_points;
    let layouts = block_layouts(curve, params)?;
    let mut offsets = [0usize; 8];
    for k in 0..7 {
        offsets[k + 1] = offsets[k] + layouts[k].len();
    }
    let total = offsets[7];
    let mut map = vec![None; total];
    let mut fixed_val = vec![0.0; total];
    let mut free = Vec::new();
    let mut fixed = Vec::new();
    for (k, l) in layouts.iter().enumerate() {
        for i in 0..l.len() {
            let gi = offsets[k] + i;
            match l.fixed().get(&i) {
                Some(&v) => {
                    fixed_val[gi] = v;
                    fixed.push((gi, v));
                }
                None => {
                    map[gi] = Some(free.len());
                    free.push(gi);
                }
            }
        }
    }
    let nf = free.len();
    let mut red = Reducer {
        map,
        fixed_val,
        a: DMatrix::zeros(nf, nf),
        b: DVector::zeros(nf),
    };

    let v2 = &layouts[Block::Xi as usize];
    let s2 = &layouts[Block::G as usize];
    let s1 = &layouts[Block::P as usize];
    let mass_v = assemble_weighted_form(v2, v2, curve, FormKind::MassWeighted, q)?;
    let mass_s = assemble_weighted_form(s2, s2, curve, FormKind::MassWeighted, q)?;
    let stiff_v = assemble_weighted_form(v2, v2, curve, FormKind::StiffnessWeighted, q)?;
    let stiff_s = assemble_weighted_form(s2, s2, curve, FormKind::StiffnessWeighted, q)?;
    let tang = assemble_weighted_form(v2, v2, curve, FormKind::TangentialRate, q)?;
    let azim = assemble_weighted_form(v2, v2, curve, FormKind::AzimuthalRate, q)?;
    let div = assemble_weighted_form(v2, s1, curve, FormKind::SurfaceDivergence, q)?;
    let nproj = assemble_weighted_form(s2, v2, curve, FormKind::NormalProjection, q)?;
    let div_t = div.transpose();
    let nproj_t = nproj.transpose();
    let bem = singular_pair_assembly(curve, &disc.single_layer)?;

    let o = |b: Block| offsets[b as usize];

    // (a) -<phi, S[xi]> + <phi, U> = 0
    for i in 0..bem.nrows() {
        for j in 0..bem.ncols() {
            red.add(o(Block::Xi) + i, o(Block::Xi) + j, -bem[(i, j)]);
        }
    }
    red.add_sparse(&mass_v, o(Block::Xi), o(Block::U), 1.0);

    // (b) momentum balance
    red.add_sparse(&mass_v, o(Block::U), o(Block::Xi), 1.0);
    red.add_sparse(&tang, o(Block::U), o(Block::U), 2.0 * params.beta);
    red.add_sparse(&azim, o(Block::U), o(Block::U), 2.0 * params.beta);
    red.add_sparse(&div_t, o(Block::U), o(Block::P), -1.0);
    red.add_sparse(&nproj, o(Block::U), o(Block::G), 1.0);
    let edges = edge_data(curve)?;
    let h_edge = |e: &EdgeData| state.h[curve.end_dof(e.end)];
    let load_b: Vec<(End, EdgePayload)> = edges
        .iter()
        .map(|e| {
            let c = (h_edge(e) - params.h0).powi(2) + params.gamma_g * e.gauss + params.gamma_l * e.kappa_g;
            (e.end, EdgePayload::Vector([-c * e.nu[0], -c * e.nu[1]]))
        })
        .collect();
    red.add_rhs(&boundary_load(v2, curve, &load_b)?, o(Block::U));

    // (c) inextensibility
    red.add_sparse(&div, o(Block::P), o(Block::U), -1.0);

    // (d) X^{n+1} - dt U^{n+1} = X^n, coefficientwise
    let m = curve.n_dofs();
    let mut xn = vec![0.0; 2 * m];
    for i in 0..m {
        xn[2 * i] = curve.xr()[i];
        xn[2 * i + 1] = curve.xz()[i];
    }
    for i in 0..2 * m {
        red.add(o(Block::X) + i, o(Block::X) + i, 1.0);
        red.add(o(Block::X) + i, o(Block::U) + i, -params.dt);
    }
    red.add_rhs(&xn, o(Block::X));

    // (e) 2 <zeta, Hvec> + <zeta_s, X_s> + <zeta^r / X^r, X^r> = <zeta, nu>
    red.add_sparse(&mass_v, o(Block::Hvec), o(Block::Hvec), 2.0);
    red.add_sparse(&stiff_v, o(Block::Hvec), o(Block::X), 1.0);
    red.add_sparse(&azim, o(Block::Hvec), o(Block::X), 1.0);
    let load_e: Vec<(End, EdgePayload)> = edges.iter().map(|e| (e.end, EdgePayload::Vector(e.nu))).collect();
    red.add_rhs(&boundary_load(v2, curve, &load_e)?, o(Block::Hvec));

    // (f) <eta, H - n . Hvec> = 0
    red.add_sparse(&mass_s, o(Block::H), o(Block::H), 1.0);
    red.add_sparse(&nproj_t, o(Block::H), o(Block::Hvec), -1.0);

    // (g) <chi, g> + <chi_s, H_s> = 2 <chi, (H-H0)(H^2 + H H0 - K)> - gamma_l kappa_n chi|edge
    red.add_sparse(&mass_s, o(Block::G), o(Block::G), 1.0);
    red.add_sparse(&stiff_s, o(Block::G), o(Block::H), 1.0);
    let mut cubic = vec![0.0; m];
    let (gx, gw) = unit_gauss(q);
    for c in 0..curve.mesh().n_cells() {
        let hc = curve.mesh().width(c);
        for (&u, &w) in gx.iter().zip(&gw) {
            let pt = curve.at(c, u);
            let k = pt.gaussian_curvature()?;
            let hn = eval_p2(&state.h, c, u);
            let f = 2.0 * (hn - params.h0) * (hn * hn + hn * params.h0 - k);
            let (b, _, _) = crate::fem::p2_basis(u);
            let wm = w * hc * pt.speed() * pt.x[0];
            for l in 0..3 {
                cubic[2 * c + l] += wm * f * b[l];
            }
        }
    }
    red.add_rhs(&cubic, o(Block::G));
    let load_g: Vec<(End, EdgePayload)> = edges
        .iter()
        .map(|e| (e.end, EdgePayload::Scalar(-params.gamma_l * e.kappa_n)))
        .collect();
    red.add_rhs(&boundary_load(s2, curve, &load_g)?, o(Block::G));

    Ok(StepSystem {
        layouts,
        offsets,
        matrix: red.a,
        rhs: red.b,
        free,
        fixed,
        single_layer: bem,
        divergence: div,
    })
}

/// Solve a reduced system by dense LU with one step of iterative refinement.
pub fn solve_dense(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<(DVector<f64>, f64)> {
    let lu = a.clone().lu();
    let mut x = lu
        .solve(b)
        .ok_or_else(|| Error::Solver(format!("singular {}x{} system", a.nrows(), a.ncols())))?;
    let r = b - a * &x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    let r = b - a * &x;
    let scale = a.abs().column_sum().max() * x.amax() + b.amax();
    let rel = if scale > 0.0 { r.amax() / scale } else { 0.0 };
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::Solver("non-finite solution".into()));
    }
    Ok((x, rel))
}

/// Advance one time step.
pub fn solve_step(state: &SystemState, params: &SimParams, disc: &Discretization) -> Result<(SystemState, StepInfo)> {
    let sys = assemble_step(state, params, disc)?;
    let (x, residual) = solve_dense(&sys.matrix, &sys.rhs)?;
    if residual > 1e-10 {
        return Err(Error::Solver(format!("relative residual {residual:.3e} exceeds 1e-10")));
    }
    let total = sys.offsets[7];
    let mut full = vec![0.0; total];
    for (k, &gi) in sys.free.iter().enumerate() {
        full[gi] = x[k];
    }
    for &(gi, v) in &sys.fixed {
        full[gi] = v;
    }
    let block = |b: Block| full[sys.offsets[b as usize]..sys.offsets[b as usize + 1]].to_vec();
    let xs = block(Block::X);
    let m = state.curve.n_dofs();
    let xr: Vec<f64> = (0..m).map(|i| xs[2 * i]).collect();
    let xz: Vec<f64> = (0..m).map(|i| xs[2 * i + 1]).collect();
    let curve = state.curve.with_coefficients(xr, xz)?;
    let u = block(Block::U);
    let inext = sys.divergence.mul_vec(&u).iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let next = SystemState {
        t: state.t + params.dt,
        curve,
        xi: block(Block::Xi),
        u,
        p: block(Block::P),
        hvec: block(Block::Hvec),
        h: block(Block::H),
        g: block(Block::G),
    };
    Ok((
        next,
        StepInfo {
            residual,
            inextensibility: inext,
            size: sys.size(),
        },
    ))
}

/// Solve rows (e) and (f) with the curve held fixed, returning `(Hvec, H)`.
pub fn recover_curvature(
    curve: &GeneratingCurve,
    params: &SimParams,
    gauss_points: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let layouts = block_layouts(curve, params)?;
    let vl = &layouts[Block::Hvec as usize];
    let hl = &layouts[Block::H as usize];
    let v2 = &layouts[Block::Xi as usize];
    let s2 = &layouts[Block::G as usize];
    let q = gauss_points;
    let mass_v = assemble_weighted_form(v2, v2, curve, FormKind::MassWeighted, q)?;
    let stiff_v = assemble_weighted_form(v2, v2, curve, FormKind::StiffnessWeighted, q)?;
    let azim = assemble_weighted_form(v2, v2, curve, FormKind::AzimuthalRate, q)?;
    let mass_s = assemble_weighted_form(s2, s2, curve, FormKind::MassWeighted, q)?;
    let nproj = assemble_weighted_form(s2, v2, curve, FormKind::NormalProjection, q)?;
    let m = curve.n_dofs();
    let mut xn = vec![0.0; 2 * m];
    for i in 0..m {
        xn[2 * i] = curve.xr()[i];
        xn[2 * i + 1] = curve.xz()[i];
    }
    let edges = edge_data(curve)?;
    let load: Vec<(End, EdgePayload)> = edges.iter().map(|e| (e.end, EdgePayload::Vector(e.nu))).collect();
    let mut rhs = boundary_load(v2, curve, &load)?;
    let sx = stiff_v.mul_vec(&xn);
    let ax = azim.mul_vec(&xn);
    for i in 0..2 * m {
        rhs[i] -= sx[i] + ax[i];
    }
    let hvec = solve_reduced(&mass_v, 2.0, vl, &rhs)?;
    let nt = nproj.transpose().mul_vec(&hvec);
    let h = solve_reduced(&mass_s, 1.0, hl, &nt)?;
    Ok((hvec, h))
}

/// Solve `scale * A x = rhs` on the free dofs of `layout`, fixed dofs at their values.
fn solve_reduced(a: &SparseMatrix, scale: f64, layout: &DofLayout, rhs: &[f64]) -> Result<Vec<f64>> {
    let free = layout.free_indices();
    let mut pos = vec![None; layout.len()];
    for (k, &i) in free.iter().enumerate() {
        pos[i] = Some(k);
    }
    let n = free.len();
    let mut am = DMatrix::zeros(n, n);
    let mut b = DVector::from_iterator(n, free.iter().map(|&i| rhs[i]));
    for &(i, j, v) in a.entries() {
        if let Some(ri) = pos[i] {
            match pos[j] {
                Some(cj) => am[(ri, cj)] += scale * v,
                None => b[ri] -= scale * v * layout.fixed()[&j],
            }
        }
    }
    let (x, _) = solve_dense(&am, &b)?;
    let mut out = vec![0.0; layout.len()];
    for (k, &i) in free.iter().enumerate() {
        out[i] = x[k];
    }
    for (&i, &v) in layout.fixed() {
        out[i] = v;
    }
    Ok(out)
}

/// Why a run ended.
#[derive(Debug, Clone, PartialEq)]
pub enum StopReason {
    Converged,
    EndTime,
    HoleClosed,
    StepFailure(String),
}

impl std::fmt::Display for StopReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StopReason::Converged => f.write_str("converged"),
            StopReason::EndTime => f.write_str("end-time"),
            StopReason::HoleClosed => f.write_str("hole-closed"),
            StopReason::StepFailure(m) => write!(f, "step-failure: {m}"),
        }
    }
}

/// Diagnostics recorded at each accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub energy: Energy,
    pub area: f64,
    pub hole_radii: Vec<f64>,
}

impl SeriesRow {
    pub fn of(state: &SystemState, params: &SimParams, q: usize) -> Result<Self> {
        Ok(SeriesRow {
            t: state.t,
            energy: diagnostics::total_energy(state, params, q)?,
            area: diagnostics::area(&state.curve, q),
            hole_radii: state.hole_radii(),
        })
    }
}

/// Result of a time loop.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// One row per recorded state, including the initial one.
    pub series: Vec<SeriesRow>,
    pub snapshots: Vec<SystemState>,
    pub final_state: SystemState,
    pub stop: StopReason,
    pub steps: usize,
}

/// Run the time loop until a stop criterion fires.
///
/// A state is recorded every `snapshot_every` steps and at the end; `series`
/// has one row per recorded state. `on_step` sees every accepted step.
pub fn run(
    initial: SystemState,
    params: &SimParams,
    disc: &Discretization,
    snapshot_every: usize,
    mut on_step: impl FnMut(&SystemState, &SeriesRow, &StepInfo),
) -> Result<Trajectory> {
    params.validate()?;
    let q = disc.gauss_points;
    let every = snapshot_every.max(1);
    let r0 = initial.hole_radii();
    let guard = match params.min_hole_radius {
        Some(v) => v,
        None => 1e-2 * r0.iter().cloned().fold(f64::INFINITY, f64::min),
    };
    let speed0 = initial.curve.min_speed();
    let first = SeriesRow::of(&initial, params, q)?;
    let mut series = vec![first.clone()];
    let mut snapshots = vec![initial.clone()];
    let mut last_row = first;
    let mut state = initial;
    let mut steps = 0usize;
    let stop = loop {
        if state.t >= params.t_end - 1e-6 * params.dt {
            break StopReason::EndTime;
        }
        let (next, info) = match solve_step(&state, params, disc) {
            Ok(v) => v,
            Err(e) => break StopReason::StepFailure(e.to_string()),
        };
        let sp = next.curve.min_speed();
        if sp < 1e-2 * speed0 {
            break StopReason::StepFailure(format!("mesh degenerated: min |X_alpha| = {sp:.3e}"));
        }
        let row = match SeriesRow::of(&next, params, q) {
            Ok(r) => r,
            Err(e) => break StopReason::StepFailure(e.to_string()),
        };
        steps += 1;
        on_step(&next, &row, &info);
        let e0 = last_row.energy.total;
        let e1 = row.energy.total;
        let rel = (e1 - e0).abs() / e0.abs().max(f64::MIN_POSITIVE);
        let closed = row.hole_radii.iter().any(|&r| r < guard);
        let done = if closed {
            Some(StopReason::HoleClosed)
        } else if rel < params.stop_tol {
            Some(StopReason::Converged)
        } else if next.t >= params.t_end - 1e-6 * params.dt {
            Some(StopReason::EndTime)
        } else {
            None
        };
        state = next;
        if steps % every == 0 || done.is_some() {
            series.push(row.clone());
            snapshots.push(state.clone());
        }
        last_row = row;
        if let Some(s) = done {
            break s;
        }
    };
    Ok(Trajectory {
        series,
        snapshots,
        final_state: state,
        stop,
        steps,
    })
}

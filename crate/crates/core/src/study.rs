//! Parameter sweeps: annulus mesh convergence, annulus width, and edge
//! boundary layers on the spherical cap.
//!
//! Runs are independent and execute in parallel. A failed run does not stop
//! the sweep; its rows carry the failure reason in the `status` column.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::config::SimConfig;
use crate::curve::GeneratingCurve;
use crate::diagnostics::{boundary_layer_width, curvature_profile, f_estimate, flux_spread, tau_20, velocity_error};
use crate::error::{Error, Result};
use crate::output::{num, write_table};
use crate::scenarios::{initial_shape, Scenario};
use crate::solver::{run, solve_step, SimParams, SystemState};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyKind {
    /// One-step annulus velocity error against `N`, graded and uniform.
    Convergence,
    /// `F_h(t)` for annuli of increasing width.
    Width,
    /// Edge layer of `H` on the cap for decreasing `1 / gamma_l`.
    BoundaryLayer,
}

impl StudyKind {
    pub fn name(&self) -> &'static str {
        match self {
            StudyKind::Convergence => "convergence",
            StudyKind::Width => "width",
            StudyKind::BoundaryLayer => "boundary_layer",
        }
    }
}

impl fmt::Display for StudyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StudyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "convergence" => Ok(StudyKind::Convergence),
            "width" => Ok(StudyKind::Width),
            "boundary_layer" => Ok(StudyKind::BoundaryLayer),
            _ => Err(Error::Config(format!("unknown study '{s}'"))),
        }
    }
}

/// A sweep over one parameter.
///
/// `sample_times` are in units of `tau_20 = r_inner^2 / gamma_l` for the width
/// study and plain model time for the boundary-layer study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyPlan {
    pub kind: StudyKind,
    pub sweep: Vec<f64>,
    pub sample_times: Vec<f64>,
}

impl StudyPlan {
    pub fn new(kind: StudyKind) -> Self {
        let (sweep, sample_times) = match kind {
            StudyKind::Convergence => (vec![4.0, 8.0, 16.0, 32.0, 64.0, 128.0], vec![]),
            StudyKind::Width => (vec![16.0, 32.0, 64.0, 128.0], vec![0.5, 1.0, 1.5, 2.0, 2.5, 3.0]),
            StudyKind::BoundaryLayer => (vec![1.0, 0.1, 0.01], vec![0.005, 0.01, 0.02]),
        };
        StudyPlan {
            kind,
            sweep,
            sample_times,
        }
    }

    /// Compatibility with the scenario; errors name the offending key.
    pub fn check(&self, scenario: &Scenario) -> std::result::Result<(), (&'static str, String)> {
        let scenario_ok = match self.kind {
            StudyKind::Convergence | StudyKind::Width => matches!(scenario, Scenario::Annulus { .. }),
            StudyKind::BoundaryLayer => matches!(scenario, Scenario::SphericalCap { .. }),
        };
        if !scenario_ok {
            return Err(("study", format!("study '{}' does not apply to scenario '{}'", self.kind, scenario)));
        }
        if self.sweep.is_empty() || self.sweep.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(("sweep", "sweep must be a nonempty list of positive numbers".into()));
        }
        if self.kind == StudyKind::Convergence && self.sweep.iter().any(|v| v.fract() != 0.0 || *v < 4.0) {
            return Err(("sweep", "convergence sweep values are cell counts >= 4".into()));
        }
        if self.kind != StudyKind::Convergence {
            if self.sample_times.is_empty() || self.sample_times.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
                return Err(("sample_times", "sample_times must be a nonempty list of positive numbers".into()));
            }
            if self.sample_times.windows(2).any(|w| w[1] <= w[0]) {
                return Err(("sample_times", "sample_times must be increasing".into()));
            }
        }
        Ok(())
    }

    pub fn validate(&self, scenario: &Scenario) -> Result<()> {
        self.check(scenario).map_err(|(k, m)| Error::Config(format!("{k}: {m}")))
    }
}

/// Single-token status cell.
fn status(r: &std::result::Result<(), String>) -> String {
    match r {
        Ok(()) => "ok".into(),
        Err(e) => format!("failed:{}", e.split_whitespace().collect::<Vec<_>>().join("_")),
    }
}

/// Result of one annulus step from the initial state.
#[derive(Debug, Clone)]
pub struct AnnulusStep {
    pub curve: GeneratingCurve,
    pub next: SystemState,
    pub velocity_error: f64,
    pub f: f64,
    pub flux_spread: f64,
}

impl AnnulusStep {
    /// Radial component of the stress-jump density at the P2 dofs.
    pub fn xi_r(&self) -> Vec<f64> {
        self.next.xi.iter().step_by(2).copied().collect()
    }
}

/// Solve one step on the annulus with `n` cells and grading `epsilon`.
pub fn annulus_step(cfg: &SimConfig, n: usize, epsilon: f64) -> Result<AnnulusStep> {
    let curve = initial_shape(&cfg.scenario, n, epsilon)?;
    let state = SystemState::initial(curve.clone());
    let (next, _) = solve_step(&state, &cfg.params, &cfg.disc)?;
    let q = cfg.disc.gauss_points;
    Ok(AnnulusStep {
        velocity_error: velocity_error(&curve, &next.u, q),
        f: f_estimate(&curve, &next.u, q),
        flux_spread: flux_spread(&curve, &next.u),
        curve,
        next,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub graded: std::result::Result<f64, String>,
    pub uniform: std::result::Result<f64, String>,
}

/// Velocity error for each `N` on the graded (`cfg.epsilon`) and uniform meshes.
pub fn convergence_study(cfg: &SimConfig, ns: &[usize]) -> Vec<ConvergenceRow> {
    ns.par_iter()
        .map(|&n| {
            let err = |eps: f64| annulus_step(cfg, n, eps).map(|s| s.velocity_error).map_err(|e| e.to_string());
            let (graded, uniform) = rayon::join(|| err(cfg.epsilon), || err(1.0));
            ConvergenceRow { n, graded, uniform }
        })
        .collect()
}

/// Observed order between consecutive rows, `None` where either error is missing.
pub fn pairwise_orders(pts: &[(usize, Option<f64>)]) -> Vec<Option<f64>> {
    let mut out = vec![None];
    for w in pts.windows(2) {
        out.push(match (w[0].1, w[1].1) {
            (Some(a), Some(b)) if a > 0.0 && b > 0.0 => Some((a / b).ln() / (w[1].0 as f64 / w[0].0 as f64).ln()),
            _ => None,
        });
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_else(|| "nan".into())
}

/// Evolve `initial` and call `sample` with the previous curve and the new
/// state whenever a sample time is reached.
fn sample_run(
    initial: SystemState,
    params: &SimParams,
    cfg: &SimConfig,
    times: &[f64],
    mut sample: impl FnMut(usize, &GeneratingCurve, &SystemState),
) -> std::result::Result<(), String> {
    let mut p = params.clone();
    p.t_end = *times.last().expect("validated nonempty");
    p.stop_tol = f64::MIN_POSITIVE;
    let mut prev = initial.curve.clone();
    let mut next_sample = 0;
    let dt = p.dt;
    let traj = run(initial, &p, &cfg.disc, usize::MAX, |st, _, _| {
        while next_sample < times.len() && st.t >= times[next_sample] - 0.5 * dt {
            sample(next_sample, &prev, st);
            next_sample += 1;
        }
        prev = st.curve.clone();
    })
    .map_err(|e| e.to_string())?;
    if next_sample < times.len() {
        return Err(format!("stopped at t = {:.4}: {}", traj.final_state.t, traj.stop));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct WidthRun {
    pub width: f64,
    /// `F / gamma_l` at each sample time; `None` after a failure.
    pub f_scaled: Vec<Option<f64>>,
    pub outcome: std::result::Result<(), String>,
}

/// `F_h / gamma_l` at `t / tau_20` for annuli `(r_i, r_i + width)`.
pub fn width_study(cfg: &SimConfig, widths: &[f64], times_over_tau: &[f64]) -> Result<Vec<WidthRun>> {
    let Scenario::Annulus { r_inner, .. } = cfg.scenario else {
        return Err(Error::Config("width study needs the annulus scenario".into()));
    };
    let gl = cfg.params.gamma_l;
    if !(gl > 0.0) {
        return Err(Error::Config("width study needs gamma_l > 0".into()));
    }
    let tau = tau_20(r_inner, gl);
    let times: Vec<f64> = times_over_tau.iter().map(|t| t * tau).collect();
    let q = cfg.disc.gauss_points;
    Ok(widths
        .par_iter()
        .map(|&width| {
            let mut f_scaled = vec![None; times.len()];
            let sc = Scenario::Annulus {
                r_inner,
                r_outer: r_inner + width,
            };
            let outcome = initial_shape(&sc, cfg.n, cfg.epsilon).map_err(|e| e.to_string()).and_then(|c| {
                sample_run(SystemState::initial(c), &cfg.params, cfg, &times, |k, prev, st| {
                    f_scaled[k] = Some(f_estimate(prev, &st.u, q) / gl);
                })
            });
            WidthRun {
                width,
                f_scaled,
                outcome,
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerRun {
    pub inv_gamma_l: f64,
    /// Layer width at each sample time.
    pub widths: Vec<Option<f64>>,
    /// `(s, H)` profiles at each sample time.
    pub profiles: Vec<Vec<(f64, f64)>>,
    pub outcome: std::result::Result<(), String>,
}

/// Fraction of the plateau-to-edge jump that delimits the layer.
pub const LAYER_FRACTION: f64 = 0.1;

/// Curvature profiles and layer widths on the cap for each `1 / gamma_l`.
pub fn boundary_layer_study(cfg: &SimConfig, inv_gamma_l: &[f64], times: &[f64]) -> Result<Vec<LayerRun>> {
    let initial = SystemState::initial(cfg.initial_curve()?);
    Ok(inv_gamma_l
        .par_iter()
        .map(|&inv| {
            let params = SimParams {
                gamma_l: 1.0 / inv,
                ..cfg.params.clone()
            };
            let mut widths = vec![None; times.len()];
            let mut profiles = vec![Vec::new(); times.len()];
            let outcome = sample_run(initial.clone(), &params, cfg, times, |k, _, st| {
                widths[k] = Some(boundary_layer_width(st, LAYER_FRACTION));
                profiles[k] = curvature_profile(st);
            });
            LayerRun {
                inv_gamma_l: inv,
                widths,
                profiles,
                outcome,
            }
        })
        .collect())
}

/// Run the study described by `cfg.study` and write its tables into `dir`.
pub fn run_study(cfg: &SimConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let plan = cfg
        .study
        .clone()
        .ok_or_else(|| Error::Config("configuration has no 'study' key".into()))?;
    plan.validate(&cfg.scenario)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    match plan.kind {
        StudyKind::Convergence => {
            let ns: Vec<usize> = plan.sweep.iter().map(|&v| v as usize).collect();
            let rows = convergence_study(cfg, &ns);
            let g: Vec<(usize, Option<f64>)> = rows.iter().map(|r| (r.n, r.graded.clone().ok())).collect();
            let u: Vec<(usize, Option<f64>)> = rows.iter().map(|r| (r.n, r.uniform.clone().ok())).collect();
            let (og, ou) = (pairwise_orders(&g), pairwise_orders(&u));
            let table: Vec<Vec<String>> = rows
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let outcome = r.graded.clone().and(r.uniform.clone()).map(|_| ());
                    vec![
                        r.n.to_string(),
                        opt(g[i].1),
                        opt(u[i].1),
                        opt(og[i]),
                        opt(ou[i]),
                        status(&outcome),
                    ]
                })
                .collect();
            let path = dir.join("convergence.dat");
            write_table(
                &path,
                cfg,
                "annulus one-step velocity error",
                &["N", "error_graded", "error_uniform", "order_graded", "order_uniform", "status"],
                &table,
            )?;
            files.push(path);
        }
        StudyKind::Width => {
            let runs = width_study(cfg, &plan.sweep, &plan.sample_times)?;
            let mut table = Vec::new();
            for r in &runs {
                for (k, t) in plan.sample_times.iter().enumerate() {
                    table.push(vec![num(r.width), num(*t), opt(r.f_scaled[k]), status(&r.outcome)]);
                }
            }
            let path = dir.join("width.dat");
            write_table(&path, cfg, "F / gamma_l against t / tau_20", &["width", "t_over_tau", "F_over_gamma_l", "status"], &table)?;
            files.push(path);
        }
        StudyKind::BoundaryLayer => {
            let runs = boundary_layer_study(cfg, &plan.sweep, &plan.sample_times)?;
            let mut table = Vec::new();
            for r in &runs {
                for (k, t) in plan.sample_times.iter().enumerate() {
                    table.push(vec![num(r.inv_gamma_l), num(*t), opt(r.widths[k]), status(&r.outcome)]);
                    if r.widths[k].is_some() {
                        let path = dir.join(format!("profile_{}_{}.dat", num(r.inv_gamma_l), num(*t)));
                        let rows: Vec<Vec<String>> = r.profiles[k].iter().map(|&(s, h)| vec![num(s), num(h)]).collect();
                        let title = format!("H profile, 1/gamma_l = {}, t = {}", r.inv_gamma_l, t);
                        write_table(&path, cfg, &title, &["s", "H"], &rows)?;
                        files.push(path);
                    }
                }
            }
            let path = dir.join("boundary_layer.dat");
            write_table(&path, cfg, "edge layer width of H", &["inv_gamma_l", "t", "layer_width", "status"], &table)?;
            files.insert(0, path);
        }
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for k in [StudyKind::Convergence, StudyKind::Width, StudyKind::BoundaryLayer] {
            assert_eq!(k.name().parse::<StudyKind>().unwrap(), k);
        }
        assert!("sweepy".parse::<StudyKind>().is_err());
    }

    #[test]
    fn plan_checks() {
        let ann: Scenario = "annulus".parse().unwrap();
        let cap: Scenario = "spherical_cap".parse().unwrap();
        assert!(StudyPlan::new(StudyKind::Convergence).check(&ann).is_ok());
        assert_eq!(StudyPlan::new(StudyKind::Convergence).check(&cap).unwrap_err().0, "study");
        assert!(StudyPlan::new(StudyKind::BoundaryLayer).check(&cap).is_ok());
        let mut s = StudyPlan::new(StudyKind::Convergence);
        s.sweep = vec![4.5];
        assert_eq!(s.check(&ann).unwrap_err().0, "sweep");
        let mut s = StudyPlan::new(StudyKind::Width);
        s.sample_times = vec![2.0, 1.0];
        assert_eq!(s.check(&ann).unwrap_err().0, "sample_times");
    }

    #[test]
    fn orders_skip_missing() {
        let o = pairwise_orders(&[(8, Some(1e-2)), (16, Some(2.5e-3)), (32, None), (64, Some(1e-5))]);
        assert_eq!(o[0], None);
        assert!((o[1].unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(o[2], None);
        assert_eq!(o[3], None);
    }

    #[test]
    fn status_is_one_token() {
        assert_eq!(status(&Ok(())), "ok");
        assert_eq!(status(&Err("mesh  degenerated here".into())), "failed:mesh_degenerated_here");
    }
}

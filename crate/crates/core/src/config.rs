//! Run configuration: a flat TOML table of `key = value` pairs.
//!
//! Every key is optional except `scenario`. Unknown keys are rejected.
//!
//! | key | meaning | default |
//! |---|---|---|
//! | `scenario` | `annulus`, `spherical_cap`, `flat_disk`, `biconcave`, `cup` | required |
//! | `r_inner`, `r_outer` | annulus radii | 1, 2 |
//! | `cap_angle`, `radius` | cap arc length and sphere radius; `radius` is also the disk radius | 0.9 pi, 1 |
//! | `case` | equilibrium case for `cup` (1-3) | 1 |
//! | `beta`, `gamma_g`, `gamma_l`, `h0` | model parameters | per scenario |
//! | `dt`, `t_end`, `stop_tol` | time stepping | 0.01, 100, 1e-6 |
//! | `min_hole_radius` | absolute stop radius | 1% of the initial hole |
//! | `n`, `epsilon` | cells and grading regularization | 32, 1e-3 |
//! | `gauss_points` | Gauss points per cell for the FEM forms | 4 |
//! | `bem_gauss_points`, `alpert_order`, `alpert_panels`, `separation` | single-layer quadrature | 8, 7, 16, 1 |
//! | `output_dir`, `snapshot_every` | output policy | `output`, 10 |
//! | `study` | `convergence`, `width` or `boundary_layer`; only read by `membrane study` | none |
//! | `sweep` | swept values: `N`, annulus widths, or `1 / gamma_l` | per study |
//! | `sample_times` | times at which a study samples each run | per study |

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::quadrature::SingleLayerOptions;
use crate::scenarios::Scenario;
use crate::solver::{Discretization, SimParams};
use crate::study::{StudyKind, StudyPlan};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r_inner: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r_outer: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cap_angle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    case: Option<usize>,
    beta: Option<f64>,
    gamma_g: Option<f64>,
    gamma_l: Option<f64>,
    h0: Option<f64>,
    dt: Option<f64>,
    t_end: Option<f64>,
    stop_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_hole_radius: Option<f64>,
    n: Option<usize>,
    epsilon: Option<f64>,
    gauss_points: Option<usize>,
    bem_gauss_points: Option<usize>,
    alpert_order: Option<usize>,
    alpert_panels: Option<usize>,
    separation: Option<f64>,
    output_dir: Option<String>,
    snapshot_every: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    study: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sample_times: Option<Vec<f64>>,
}

/// Fully defaulted and validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub scenario: Scenario,
    pub params: SimParams,
    pub n: usize,
    pub epsilon: f64,
    pub disc: Discretization,
    pub output_dir: PathBuf,
    pub snapshot_every: usize,
    pub study: Option<StudyPlan>,
}

impl SimConfig {
    /// Defaults for a scenario.
    pub fn new(scenario: Scenario) -> Self {
        SimConfig {
            scenario,
            params: scenario.default_params(),
            n: 32,
            epsilon: 1e-3,
            disc: Discretization::default(),
            output_dir: PathBuf::from("output"),
            snapshot_every: 10,
            study: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.params.validate()?;
        if self.n < 4 {
            return Err(Error::Config(format!("n = {} must be at least 4", self.n)));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::Config(format!("epsilon = {} not in [0, 1]", self.epsilon)));
        }
        if self.disc.gauss_points == 0 || self.disc.single_layer.gauss_points == 0 {
            return Err(Error::Config("gauss point counts must be positive".into()));
        }
        crate::quadrature::alpert_log_rule(self.disc.single_layer.alpert_order, self.disc.single_layer.alpert_panels)?;
        if !(self.disc.single_layer.separation > 0.0) {
            return Err(Error::Config("separation must be positive".into()));
        }
        if self.snapshot_every == 0 {
            return Err(Error::Config("snapshot_every must be positive".into()));
        }
        if let Some(st) = &self.study {
            st.validate(&self.scenario)?;
        }
        Ok(())
    }

    fn to_raw(&self) -> RawConfig {
        let mut raw = RawConfig {
            scenario: Some(self.scenario.name().to_string()),
            ..RawConfig::default()
        };
        match self.scenario {
            Scenario::Annulus { r_inner, r_outer } => {
                raw.r_inner = Some(r_inner);
                raw.r_outer = Some(r_outer);
            }
            Scenario::SphericalCap { angle, radius } => {
                raw.cap_angle = Some(angle);
                raw.radius = Some(radius);
            }
            Scenario::FlatDisk { radius } => raw.radius = Some(radius),
            Scenario::Biconcave => {}
            Scenario::Cup { case } => raw.case = Some(case),
        }
        let p = &self.params;
        raw.beta = Some(p.beta);
        raw.gamma_g = Some(p.gamma_g);
        raw.gamma_l = Some(p.gamma_l);
        raw.h0 = Some(p.h0);
        raw.dt = Some(p.dt);
        raw.t_end = Some(p.t_end);
        raw.stop_tol = Some(p.stop_tol);
        raw.min_hole_radius = p.min_hole_radius;
        raw.n = Some(self.n);
        raw.epsilon = Some(self.epsilon);
        let sl = &self.disc.single_layer;
        raw.gauss_points = Some(self.disc.gauss_points);
        raw.bem_gauss_points = Some(sl.gauss_points);
        raw.alpert_order = Some(sl.alpert_order);
        raw.alpert_panels = Some(sl.alpert_panels);
        raw.separation = Some(sl.separation);
        raw.output_dir = Some(self.output_dir.to_string_lossy().into_owned());
        raw.snapshot_every = Some(self.snapshot_every);
        if let Some(st) = &self.study {
            raw.study = Some(st.kind.name().to_string());
            raw.sweep = Some(st.sweep.clone());
            raw.sample_times = Some(st.sample_times.clone());
        }
        raw
    }

    /// Canonical serialization; `parse_config_str` inverts it exactly.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_raw()).expect("flat table of scalars always serializes")
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.to_toml().as_bytes());
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// The generating curve at `t = 0`.
    pub fn initial_curve(&self) -> Result<crate::curve::GeneratingCurve> {
        crate::scenarios::initial_shape(&self.scenario, self.n, self.epsilon)
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line on which `key` is assigned, or 0 when it is absent.
fn key_line(text: &str, key: &str) -> usize {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key).is_some_and(|rest| rest.trim_start().starts_with('='))
        })
        .map(|i| i + 1)
        .unwrap_or(0)
}

fn key_in_message(msg: &str) -> String {
    // serde names offending fields in backticks
    msg.split('`').nth(1).unwrap_or("").to_string()
}

/// Parse and validate a configuration from TOML text.
pub fn parse_config_str(text: &str) -> Result<SimConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(0);
        let msg = e.message().to_string();
        let mut key = key_in_message(&msg);
        if key.is_empty() {
            key = e
                .span()
                .and_then(|s| text.get(s.clone()))
                .and_then(|_| text.lines().nth(line.saturating_sub(1)))
                .and_then(|l| l.split('=').next())
                .map(|k| k.trim().to_string())
                .unwrap_or_default();
        }
        Error::Parse { line, key, message: msg }
    })?;
    let perr = |key: &str, message: String| Error::Parse {
        line: key_line(text, key),
        key: key.to_string(),
        message,
    };
    let name = raw
        .scenario
        .clone()
        .ok_or_else(|| perr("scenario", "missing required key".into()))?;
    let scenario = match name.as_str() {
        "annulus" => Scenario::Annulus {
            r_inner: raw.r_inner.unwrap_or(1.0),
            r_outer: raw.r_outer.unwrap_or(2.0),
        },
        "spherical_cap" => Scenario::SphericalCap {
            angle: raw.cap_angle.unwrap_or(0.9 * PI),
            radius: raw.radius.unwrap_or(1.0),
        },
        "flat_disk" => Scenario::FlatDisk {
            radius: raw.radius.unwrap_or(1.0),
        },
        "biconcave" => Scenario::Biconcave,
        "cup" => Scenario::Cup {
            case: raw.case.unwrap_or(1),
        },
        other => return Err(perr("scenario", format!("unknown scenario '{other}'"))),
    };
    let shape_keys: &[(&str, bool)] = &[
        ("r_inner", raw.r_inner.is_some()),
        ("r_outer", raw.r_outer.is_some()),
        ("cap_angle", raw.cap_angle.is_some()),
        ("radius", raw.radius.is_some()),
        ("case", raw.case.is_some()),
    ];
    let allowed: &[&str] = match scenario {
        Scenario::Annulus { .. } => &["r_inner", "r_outer"],
        Scenario::SphericalCap { .. } => &["cap_angle", "radius"],
        Scenario::FlatDisk { .. } => &["radius"],
        Scenario::Biconcave => &[],
        Scenario::Cup { .. } => &["case"],
    };
    for &(k, set) in shape_keys {
        if set && !allowed.contains(&k) {
            return Err(perr(k, format!("not a parameter of scenario '{name}'")));
        }
    }
    scenario.validate().map_err(|e| perr(allowed.first().copied().unwrap_or("scenario"), e.to_string()))?;

    let mut cfg = SimConfig::new(scenario);
    let p = &mut cfg.params;
    p.beta = raw.beta.unwrap_or(p.beta);
    p.gamma_g = raw.gamma_g.unwrap_or(p.gamma_g);
    p.gamma_l = raw.gamma_l.unwrap_or(p.gamma_l);
    p.h0 = raw.h0.unwrap_or(p.h0);
    p.dt = raw.dt.unwrap_or(p.dt);
    p.t_end = raw.t_end.unwrap_or(p.t_end);
    p.stop_tol = raw.stop_tol.unwrap_or(p.stop_tol);
    p.min_hole_radius = raw.min_hole_radius.or(p.min_hole_radius);
    cfg.n = raw.n.unwrap_or(cfg.n);
    cfg.epsilon = raw.epsilon.unwrap_or(cfg.epsilon);
    cfg.disc = Discretization {
        gauss_points: raw.gauss_points.unwrap_or(cfg.disc.gauss_points),
        single_layer: SingleLayerOptions {
            gauss_points: raw.bem_gauss_points.unwrap_or(cfg.disc.single_layer.gauss_points),
            alpert_order: raw.alpert_order.unwrap_or(cfg.disc.single_layer.alpert_order),
            alpert_panels: raw.alpert_panels.unwrap_or(cfg.disc.single_layer.alpert_panels),
            separation: raw.separation.unwrap_or(cfg.disc.single_layer.separation),
        },
    };
    if let Some(d) = raw.output_dir {
        cfg.output_dir = PathBuf::from(d);
    }
    cfg.snapshot_every = raw.snapshot_every.unwrap_or(cfg.snapshot_every);
    match &raw.study {
        Some(name) => {
            let kind: StudyKind = name.parse().map_err(|e: Error| perr("study", e.to_string()))?;
            let mut st = StudyPlan::new(kind);
            if let Some(v) = raw.sweep.clone() {
                st.sweep = v;
            }
            if let Some(v) = raw.sample_times.clone() {
                st.sample_times = v;
            }
            st.check(&cfg.scenario).map_err(|(key, msg)| perr(key, msg))?;
            cfg.study = Some(st);
        }
        None => {
            for (k, set) in [("sweep", raw.sweep.is_some()), ("sample_times", raw.sample_times.is_some())] {
                if set {
                    return Err(perr(k, "only valid together with 'study'".into()));
                }
            }
        }
    }

    let checks: [(&str, bool, String); 9] = [
        ("dt", cfg.params.dt > 0.0, format!("dt = {} must be positive", cfg.params.dt)),
        ("beta", cfg.params.beta >= 0.0, format!("beta = {} must be nonnegative", cfg.params.beta)),
        ("stop_tol", cfg.params.stop_tol > 0.0, format!("stop_tol = {} must be positive", cfg.params.stop_tol)),
        ("t_end", cfg.params.t_end > 0.0, format!("t_end = {} must be positive", cfg.params.t_end)),
        (
            "min_hole_radius",
            cfg.params.min_hole_radius.is_none_or(|r| r >= 0.0),
            "min_hole_radius must be nonnegative".into(),
        ),
        ("n", cfg.n >= 4, format!("n = {} must be at least 4", cfg.n)),
        ("epsilon", (0.0..=1.0).contains(&cfg.epsilon), format!("epsilon = {} not in [0, 1]", cfg.epsilon)),
        ("snapshot_every", cfg.snapshot_every > 0, "snapshot_every must be positive".into()),
        ("separation", cfg.disc.single_layer.separation > 0.0, "separation must be positive".into()),
    ];
    for (key, ok, msg) in checks {
        if !ok {
            return Err(perr(key, msg));
        }
    }
    for (key, v) in [("gauss_points", cfg.disc.gauss_points), ("bem_gauss_points", cfg.disc.single_layer.gauss_points)] {
        if v == 0 || v > 32 {
            return Err(perr(key, format!("{key} = {v} not in 1..=32")));
        }
    }
    if let Err(e) = crate::quadrature::alpert_log_rule(cfg.disc.single_layer.alpert_order, cfg.disc.single_layer.alpert_panels) {
        let key = if crate::quadrature::SUPPORTED_ORDERS.contains(&cfg.disc.single_layer.alpert_order) {
            "alpert_panels"
        } else {
            "alpert_order"
        };
        return Err(perr(key, e.to_string()));
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Read and parse a configuration file.
pub fn parse_config(path: &Path) -> Result<SimConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_annulus_gets_defaults() {
        let c = parse_config_str("scenario = \"annulus\"\nr_inner = 1.0\nr_outer = 2.0\n").unwrap();
        assert_eq!(
            c.scenario,
            Scenario::Annulus {
                r_inner: 1.0,
                r_outer: 2.0
            }
        );
        assert_eq!(c.params.dt, 0.01);
        assert_eq!(c.n, 32);
        assert_eq!(c.epsilon, 1e-3);
        assert_eq!(c.params.stop_tol, 1e-6);
        assert_eq!(c.params.gamma_l, 1.0);
    }

    #[test]
    fn negative_dt_names_key_and_line() {
        let e = parse_config_str("scenario = \"annulus\"\n\ndt = -0.1\n").unwrap_err();
        match e {
            Error::Parse { line, key, .. } => {
                assert_eq!(key, "dt");
                assert_eq!(line, 3);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn unknown_key_rejected() {
        let e = parse_config_str("scenario = \"annulus\"\nbogus = 3\n").unwrap_err();
        match e {
            Error::Parse { line, key, .. } => {
                assert_eq!(key, "bogus");
                assert_eq!(line, 2);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn type_mismatch_rejected() {
        let e = parse_config_str("scenario = \"annulus\"\nn = \"many\"\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
    }

    #[test]
    fn shape_key_must_match_scenario() {
        let e = parse_config_str("scenario = \"biconcave\"\nr_inner = 1.0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, ref key, .. } if key == "r_inner"), "{e}");
        assert!(parse_config_str("scenario = \"annulus\"\nr_inner = 3.0\n").is_err());
    }

    #[test]
    fn round_trip() {
        let mut c = parse_config_str("scenario = \"spherical_cap\"\ngamma_l = 0.5\nmin_hole_radius = 0.01\n").unwrap();
        c.params.beta = 0.1 + 0.2;
        let back = parse_config_str(&c.to_toml()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
    }

    #[test]
    fn study_keys() {
        let c = parse_config_str("scenario = \"annulus\"\nstudy = \"width\"\nsweep = [16.0, 32.0]\n").unwrap();
        let st = c.study.clone().unwrap();
        assert_eq!(st.kind, StudyKind::Width);
        assert_eq!(st.sweep, vec![16.0, 32.0]);
        assert_eq!(parse_config_str(&c.to_toml()).unwrap(), c);
        let e = parse_config_str("scenario = \"annulus\"\nsweep = [4.0]\n").unwrap_err();
        assert!(matches!(e, Error::Parse { ref key, .. } if key == "sweep"), "{e}");
        let e = parse_config_str("scenario = \"biconcave\"\nstudy = \"convergence\"\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
    }
}

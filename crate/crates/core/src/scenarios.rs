//! Initial generating curves.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::curve::GeneratingCurve;
use crate::error::{Error, Result};
use crate::mesh::{build_mesh, RefineAt};
use crate::solver::SimParams;

/// Closed-form initial shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    /// Flat annulus `R_i < r < R_o`, graded at both edges.
    Annulus { r_inner: f64, r_outer: f64 },
    /// Arc `(sin s, -cos s)`, `s in [0, angle]`, of a sphere of the given radius.
    SphericalCap { angle: f64, radius: f64 },
    /// Flat disk of radius `radius`.
    FlatDisk { radius: f64 },
    /// Red-cell profile with a pore at `eta = 0.95`.
    Biconcave,
    /// Cup-shaped spherical cap for the equilibrium cases 1-3, scaled to the case area.
    Cup { case: usize },
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Area, line tension and cap angle of the three equilibrium cases
/// (`gamma_g = -0.122`, `c0 = 0.2`, lengths in micrometres).
pub const CUP_CASES: [(f64, f64, f64); 3] = [(27.61, 0.65, 0.55 * PI), (23.15, 0.78, 0.6 * PI), (18.42, 0.79, 0.65 * PI)];

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Annulus { .. } => "annulus",
            Scenario::SphericalCap { .. } => "spherical_cap",
            Scenario::FlatDisk { .. } => "flat_disk",
            Scenario::Biconcave => "biconcave",
            Scenario::Cup { .. } => "cup",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        match *self {
            Scenario::Annulus { r_inner, r_outer } => {
                if !(r_inner > 0.0 && r_outer > r_inner) {
                    return bad(format!("annulus needs 0 < r_inner < r_outer, got {r_inner}, {r_outer}"));
                }
            }
            Scenario::SphericalCap { angle, radius } => {
                if !(angle > 0.0 && angle < PI && radius > 0.0) {
                    return bad(format!("cap needs 0 < angle < pi and radius > 0, got {angle}, {radius}"));
                }
            }
            Scenario::FlatDisk { radius } => {
                if !(radius > 0.0) {
                    return bad(format!("disk radius {radius} must be positive"));
                }
            }
            Scenario::Biconcave => {}
            Scenario::Cup { case } => {
                if !(1..=3).contains(&case) {
                    return bad(format!("cup case {case} not in 1..=3"));
                }
            }
        }
        Ok(())
    }

    /// Which ends of the reference interval get graded.
    pub fn refine(&self) -> RefineAt {
        match self {
            Scenario::Annulus { .. } => RefineAt::Both,
            _ => RefineAt::End,
        }
    }

    /// Whether `alpha = 0` lies on the symmetry axis.
    pub fn axis_start(&self) -> bool {
        !matches!(self, Scenario::Annulus { .. })
    }

    /// Point of the closed-form curve at `alpha in [0, 1]`.
    pub fn point(&self, a: f64) -> [f64; 2] {
        match *self {
            Scenario::Annulus { r_inner, r_outer } => [r_inner + (r_outer - r_inner) * a, 0.0],
            Scenario::SphericalCap { angle, radius } => {
                let s = angle * a;
                [radius * s.sin(), -radius * s.cos()]
            }
            Scenario::FlatDisk { radius } => [radius * a, 0.0],
            Scenario::Biconcave => {
                let eta = 0.475 * (1.0 - (PI * a).cos());
                let x = 2.0 * eta - 1.0;
                [
                    2.0 * (eta * (1.0 - eta)).sqrt(),
                    0.7 * x - 0.6 * x.powi(3) + 0.05 * x.powi(5),
                ]
            }
            Scenario::Cup { case } => {
                let (area, _, angle) = CUP_CASES[case - 1];
                let radius = (area / (2.0 * PI * (1.0 - angle.cos()))).sqrt();
                Scenario::SphericalCap { angle, radius }.point(a)
            }
        }
    }

    /// Closed-form area where one is available.
    pub fn exact_area(&self) -> Option<f64> {
        match *self {
            Scenario::Annulus { r_inner, r_outer } => Some(PI * (r_outer * r_outer - r_inner * r_inner)),
            Scenario::SphericalCap { angle, radius } => Some(2.0 * PI * radius * radius * (1.0 - angle.cos())),
            Scenario::FlatDisk { radius } => Some(PI * radius * radius),
            Scenario::Biconcave => None,
            Scenario::Cup { case } => Some(CUP_CASES[case - 1].0),
        }
    }

    /// Model parameters used for this shape when the configuration sets none.
    pub fn default_params(&self) -> SimParams {
        let base = SimParams::default();
        match *self {
            Scenario::Annulus { .. } => SimParams {
                gamma_l: 1.0,
                ..base
            },
            Scenario::SphericalCap { .. } => SimParams {
                gamma_l: 0.0,
                ..base
            },
            Scenario::FlatDisk { .. } | Scenario::Biconcave => SimParams {
                h0: 0.1,
                gamma_l: 1.0,
                ..base
            },
            Scenario::Cup { case } => SimParams {
                gamma_g: -0.122,
                h0: 0.2,
                gamma_l: CUP_CASES[case - 1].1,
                ..base
            },
        }
    }
}

/// P2 interpolant of the scenario curve on a graded mesh of `n` cells.
pub fn initial_shape(scenario: &Scenario, n: usize, epsilon: f64) -> Result<GeneratingCurve> {
    scenario.validate()?;
    let mesh = build_mesh(n, epsilon, scenario.refine())?;
    GeneratingCurve::interpolate(mesh, |a| scenario.point(a), scenario.axis_start(), false)
}

impl FromStr for Scenario {
    type Err = Error;

    /// Parse a bare name with default shape parameters.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "annulus" => Ok(Scenario::Annulus {
                r_inner: 1.0,
                r_outer: 2.0,
            }),
            "spherical_cap" => Ok(Scenario::SphericalCap {
                angle: 0.9 * PI,
                radius: 1.0,
            }),
            "flat_disk" => Ok(Scenario::FlatDisk { radius: 1.0 }),
            "biconcave" => Ok(Scenario::Biconcave),
            "cup" => Ok(Scenario::Cup { case: 1 }),
            _ => Err(Error::Config(format!("unknown scenario '{s}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::area;

    #[test]
    fn cap_edge_radius() {
        let c = initial_shape(&"spherical_cap".parse().unwrap(), 16, 1e-3).unwrap();
        assert!((c.xr().last().unwrap() - 0.309017).abs() < 1e-6);
        assert_eq!(c.xr()[0], 0.0);
    }

    #[test]
    fn annulus_edges() {
        let c = initial_shape(&"annulus".parse().unwrap(), 8, 1e-3).unwrap();
        assert_eq!(c.xr()[0], 1.0);
        assert_eq!(*c.xr().last().unwrap(), 2.0);
        assert!(initial_shape(&Scenario::Annulus { r_inner: 2.0, r_outer: 1.0 }, 8, 1e-3).is_err());
    }

    #[test]
    fn biconcave_pore() {
        let c = initial_shape(&Scenario::Biconcave, 16, 1e-3).unwrap();
        assert!((c.xr().last().unwrap() - 2.0 * (0.95_f64 * 0.05).sqrt()).abs() < 1e-12);
        assert!((c.xr().last().unwrap() - 0.43589).abs() < 1e-5);
    }

    #[test]
    fn cup_areas_match_cases() {
        for case in 1..=3 {
            let s = Scenario::Cup { case };
            let c = initial_shape(&s, 32, 1e-3).unwrap();
            let a = area(&c, 6);
            assert!((a - CUP_CASES[case - 1].0).abs() < 1e-4 * a, "case {case}: {a}");
        }
    }
}

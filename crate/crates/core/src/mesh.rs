//! Graded reference meshes on the unit interval.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which end(s) of the reference interval receive graded refinement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RefineAt {
    Start,
    End,
    Both,
    None,
}

impl fmt::Display for RefineAt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RefineAt::Start => "start",
            RefineAt::End => "end",
            RefineAt::Both => "both",
            RefineAt::None => "none",
        };
        f.write_str(s)
    }
}

impl FromStr for RefineAt {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "start" => Ok(RefineAt::Start),
            "end" => Ok(RefineAt::End),
            "both" => Ok(RefineAt::Both),
            "none" => Ok(RefineAt::None),
            other => Err(Error::Config(format!("unknown refinement `{other}`"))),
        }
    }
}

/// Regularized grading map `(1-eps) cos(pi/2 (1-eta)) + eps eta`.
///
/// The unregularized map has zero slope at `eta = 1`, so cells cluster there
/// with widths of order `N^-2`.
pub fn graded_map(eta: f64, eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Domain(format!("eta = {eta} outside [0, 1]")));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Domain(format!("epsilon = {eps} outside [0, 1]")));
    }
    Ok(graded_unchecked(eta, eps))
}

fn graded_unchecked(eta: f64, eps: f64) -> f64 {
    if eta == 0.0 {
        return 0.0;
    }
    if eta == 1.0 {
        return 1.0;
    }
    (1.0 - eps) * (FRAC_PI_2 * eta).sin() + eps * eta
}

/// Partition `0 = alpha_0 < ... < alpha_N = 1` of the reference interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceMesh {
    nodes: Vec<f64>,
    refine: RefineAt,
    epsilon: f64,
}

impl ReferenceMesh {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn n_cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn refine(&self) -> RefineAt {
        self.refine
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn cell(&self, c: usize) -> (f64, f64) {
        (self.nodes[c], self.nodes[c + 1])
    }

    pub fn width(&self, c: usize) -> f64 {
        self.nodes[c + 1] - self.nodes[c]
    }

    pub fn widths(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Cell containing `alpha` and the local coordinate in `[0, 1]`.
    pub fn locate(&self, alpha: f64) -> (usize, f64) {
        let n = self.n_cells();
        let c = match self
            .nodes
            .binary_search_by(|x| x.partial_cmp(&alpha).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(i) => i.min(n - 1),
            Err(i) => i.saturating_sub(1).min(n - 1),
        };
        let (a, b) = self.cell(c);
        (c, ((alpha - a) / (b - a)).clamp(0.0, 1.0))
    }

    /// Construct directly from node positions (must start at 0, end at 1, increase).
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return Err(Error::Config("mesh needs at least 2 cells".into()));
        }
        if nodes[0] != 0.0 || *nodes.last().unwrap() != 1.0 {
            return Err(Error::Config("mesh must span [0, 1]".into()));
        }
        if nodes.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("mesh nodes must be strictly increasing".into()));
        }
        Ok(ReferenceMesh {
            nodes,
            refine: RefineAt::None,
            epsilon: 1.0,
        })
    }
}

/// Build an `n`-cell mesh graded toward the requested end(s).
pub fn build_mesh(n: usize, eps: f64, refine: RefineAt) -> Result<ReferenceMesh> {
    if n < 2 {
        return Err(Error::Config(format!("N = {n} must be at least 2")));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Config(format!("epsilon = {eps} outside [0, 1]")));
    }
    let phi = |eta: f64| graded_unchecked(eta, eps);
    let mut nodes: Vec<f64> = (0..=n)
        .map(|i| {
            let eta = i as f64 / n as f64;
            match refine {
                RefineAt::None => eta,
                RefineAt::End => phi(eta),
                RefineAt::Start => 1.0 - phi(1.0 - eta),
                RefineAt::Both => {
                    if 2 * i <= n {
                        0.5 * (1.0 - phi(1.0 - 2.0 * eta))
                    } else {
                        0.5 + 0.5 * phi(2.0 * eta - 1.0)
                    }
                }
            }
        })
        .collect();
    nodes[0] = 0.0;
    nodes[n] = 1.0;
    if nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!(
            "graded mesh with N = {n}, epsilon = {eps} is degenerate"
        )));
    }
    Ok(ReferenceMesh {
        nodes,
        refine,
        epsilon: eps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_endpoints_and_midpoint() {
        assert_eq!(graded_map(0.0, 0.001).unwrap(), 0.0);
        assert_eq!(graded_map(1.0, 0.5).unwrap(), 1.0);
        let v = graded_map(0.5, 0.0).unwrap();
        assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(graded_map(1.5, 0.0).is_err());
        assert!(graded_map(0.5, -0.1).is_err());
    }

    #[test]
    fn end_graded_nodes() {
        let m = build_mesh(4, 0.0, RefineAt::End).unwrap();
        let want = [0.0, 0.3826834323650898, 0.7071067811865476, 0.9238795325112867, 1.0];
        for (a, b) in m.nodes().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        let u = build_mesh(4, 0.0, RefineAt::None).unwrap();
        assert_eq!(u.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn last_cell_width() {
        let m = build_mesh(32, 0.0, RefineAt::End).unwrap();
        let h = m.width(31);
        assert!((h - (1.0 - (std::f64::consts::PI / 64.0).cos())).abs() < 1e-15);
        assert!((h - 1.204e-3).abs() < 1e-6);
    }

    #[test]
    fn both_is_symmetric() {
        let m = build_mesh(16, 1e-3, RefineAt::Both).unwrap();
        let x = m.nodes();
        for i in 0..=16 {
            assert!((x[i] + x[16 - i] - 1.0).abs() < 1e-14);
        }
        assert!(m.width(0) < m.width(8) / 10.0);
    }

    #[test]
    fn start_mirrors_end() {
        let e = build_mesh(8, 0.1, RefineAt::End).unwrap();
        let s = build_mesh(8, 0.1, RefineAt::Start).unwrap();
        for i in 0..=8 {
            assert!((s.nodes()[i] - (1.0 - e.nodes()[8 - i])).abs() < 1e-15);
        }
    }

    #[test]
    fn too_few_cells() {
        assert!(matches!(build_mesh(1, 0.0, RefineAt::End), Err(Error::Config(_))));
    }

    #[test]
    fn locate_cells() {
        let m = build_mesh(4, 0.0, RefineAt::None).unwrap();
        assert_eq!(m.locate(0.0), (0, 0.0));
        assert_eq!(m.locate(1.0), (3, 1.0));
        let (c, u) = m.locate(0.6);
        assert_eq!(c, 2);
        assert!((u - 0.4).abs() < 1e-12);
    }
}

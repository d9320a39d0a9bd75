//! Quadrature rules and singular single-layer assembly.

mod alpert;
mod gauss;
mod single_layer;

pub use alpert::{alpert_log_rule, min_panels, SUPPORTED_ORDERS};
pub use gauss::gauss_rule;
pub use single_layer::{singular_pair_assembly, SingleLayerOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadKind {
    Gauss,
    AlpertLog,
}

/// Nodes and weights on a reference interval (`[-1, 1]` for Gauss, `(0, 1]` for Alpert).
#[derive(Debug, Clone)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub exactness_degree: usize,
    pub kind: QuadKind,
}

/// Least-squares slope of `-log(err)` against `log(n)`.
pub fn observed_order(samples: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = samples.iter().map(|&(n, e)| (n.ln(), -e.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

impl QuadRule {
    /// The rule remapped to `[0, 1]`; Alpert rules are returned unchanged.
    pub fn unit(&self) -> QuadRule {
        match self.kind {
            QuadKind::AlpertLog => self.clone(),
            QuadKind::Gauss => QuadRule {
                nodes: self.nodes.iter().map(|x| 0.5 * (x + 1.0)).collect(),
                weights: self.weights.iter().map(|w| 0.5 * w).collect(),
                exactness_degree: self.exactness_degree,
                kind: self.kind,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

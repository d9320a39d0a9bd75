//! Endpoint-corrected trapezoidal rules for `phi(x) ln(x) + psi(x)` on `(0, 1]`.
//!
//! Correction nodes were computed offline by solving the moment equations
//! with Hurwitz zeta right-hand sides in extended precision.

use super::{QuadKind, QuadRule};
use crate::error::{Error, Result};

/// Orders for which tables are available.
pub const SUPPORTED_ORDERS: [usize; 2] = [5, 7];

struct Correction {
    shift: usize,
    nodes: &'static [(f64, f64)],
}

const REG_2: [(f64, f64); 2] = [
    (0.2245784979812613936265, 0.5540781643606371937957),
    (1.013719374359164138288, 0.9459218356393628062043),
];
const REG_3: [(f64, f64); 3] = [
    (0.2180540672543505021712, 0.5408088967208192973771),
    (1.001181873031216425812, 0.9516615045823566111565),
    (1.997580526418032958461, 1.007529598696824091466),
];
const LOG_4: [(f64, f64); 4] = [
    (0.02339013027203800035850999, 0.08609736556158104786866717),
    (0.2854764931311983747838124, 0.4847019685417959375654922),
    (1.005403327220699733434279, 0.9152988869123724967476001),
    (1.994970303994294302306289, 1.013901778984250517818241),
];
const LOG_6: [(f64, f64); 6] = [
    (0.007814992387595725519216618, 0.0293420117833884543689946),
    (0.1063692145302568275218197, 0.1960909759508381879316792),
    (0.4484350011026798887809753, 0.5025277663280350660903295),
    (1.110739517247675634248458, 0.8066829837898749449760887),
    (2.011491707318504347904064, 0.9664957668620055152218696),
    (3.000200797963417155641417, 0.9988604952858578314110384),
];

fn tables(order: usize) -> Option<(Correction, Correction)> {
    match order {
        5 => Some((
            Correction { shift: 3, nodes: &LOG_4 },
            Correction { shift: 2, nodes: &REG_2 },
        )),
        7 => Some((
            Correction { shift: 4, nodes: &LOG_6 },
            Correction { shift: 3, nodes: &REG_3 },
        )),
        _ => None,
    }
}

/// Smallest panel count usable with the given order.
pub fn min_panels(order: usize) -> Option<usize> {
    tables(order).map(|(l, r)| l.shift + r.shift)
}

/// Rule on `(0, 1]` with `n` trapezoidal panels, log-corrected at 0 and
/// regular-corrected at 1.
pub fn alpert_log_rule(order: usize, n: usize) -> Result<QuadRule> {
    let (log, reg) = tables(order).ok_or_else(|| {
        Error::Config(format!(
            "Alpert order {order} unsupported (available: {SUPPORTED_ORDERS:?})"
        ))
    })?;
    if n < log.shift + reg.shift {
        return Err(Error::Config(format!(
            "Alpert order {order} needs at least {} panels, got {n}",
            log.shift + reg.shift
        )));
    }
    let h = 1.0 / n as f64;
    let mut nodes = Vec::with_capacity(n + log.nodes.len() + reg.nodes.len());
    let mut weights = Vec::with_capacity(nodes.capacity());
    for &(x, w) in log.nodes {
        nodes.push(x * h);
        weights.push(w * h);
    }
    for i in log.shift..=n - reg.shift {
        nodes.push(i as f64 * h);
        weights.push(h);
    }
    for &(y, v) in reg.nodes.iter().rev() {
        nodes.push(1.0 - y * h);
        weights.push(v * h);
    }
    Ok(QuadRule {
        nodes,
        weights,
        exactness_degree: order,
        kind: QuadKind::AlpertLog,
    })
}

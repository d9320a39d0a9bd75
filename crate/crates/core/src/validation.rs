//! Oracle checks shared by the `validate` command and the acceptance suite.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fem::{eval_p2, unit_gauss};
use crate::oracle;
use crate::quadrature::{alpert_log_rule, gauss_rule, observed_order, SUPPORTED_ORDERS};
use crate::scenarios::{initial_shape, Scenario};
use crate::solver::{recover_curvature, SimParams};
use crate::special::{axisym_kernel, elliptic_ke, i_mn};

/// Outcome of one check: `measured` compared against `threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    /// Passes when `measured <= threshold`.
    pub fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            threshold,
            pass: measured <= threshold,
            detail: String::new(),
        }
    }

    /// Passes when `measured >= threshold`.
    pub fn at_least(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            threshold,
            pass: measured >= threshold,
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: measured {:.3e}, threshold {:.3e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.threshold
        )?;
        if !self.detail.is_empty() {
            write!(f, " ({})", self.detail)?;
        }
        Ok(())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// AGM `K, E` against adaptive quadrature on `k = 0, 0.1, ..., 0.9, 0.99`.
pub fn elliptic_check() -> Result<Check> {
    let mut worst = 0.0_f64;
    let ks: Vec<f64> = (0..10).map(|i| i as f64 / 10.0).chain([0.99]).collect();
    for &k in &ks {
        let p = elliptic_ke(k)?;
        let (kq, eq) = oracle::elliptic_quadrature(k);
        worst = worst.max(rel(p.k_val, kq)).max(rel(p.e_val, eq));
    }
    Ok(Check::at_most("elliptic K,E vs quadrature (max rel)", worst, 1e-12))
}

/// `I_mn` for `m in {1, 3}`, `n in {0, 1, 2}` on a 5x5x5 grid of `(r1, r2, z)`.
pub fn i_mn_check() -> Result<Check> {
    let rs = [0.2, 0.5, 1.0, 1.7, 3.0];
    let zs = [-1.5, -0.4, 0.05, 0.3, 1.0];
    let mut worst = 0.0_f64;
    for &r1 in &rs {
        for &r2 in &rs {
            for &z in &zs {
                for m in [1, 3] {
                    for n in 0..3 {
                        let v = i_mn(m, n, r1, r2, z)?;
                        let o = oracle::i_mn_quadrature(m, n, r1, r2, z);
                        worst = worst.max(rel(v, o));
                    }
                }
            }
        }
    }
    Ok(Check::at_most("I_mn vs quadrature on 5x5x5 grid (max rel)", worst, 1e-10))
}

/// Kernel against the azimuthally integrated Stokeslet on random separated samples.
pub fn kernel_ring_check(samples: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    let mut done = 0;
    while done < samples {
        let r: f64 = rng.random_range(0.05..3.0);
        let rp: f64 = rng.random_range(0.05..3.0);
        let dz: f64 = rng.random_range(-2.0..2.0);
        let d = ((r - rp) * (r - rp) + dz * dz).sqrt();
        if d < 0.1 * r.max(rp) {
            continue;
        }
        let s = axisym_kernel(r, rp, dz)?;
        let o = oracle::kernel_ring(r, rp, dz);
        let scale = o.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
        for a in 0..2 {
            for b in 0..2 {
                worst = worst.max((s[a][b] - o[a][b]).abs() / scale);
            }
        }
        done += 1;
    }
    Ok(Check::at_most(format!("kernel vs ring-integrated Stokeslet, {samples} samples (max rel)"), worst, 1e-9))
}

/// Gauss rules with `n = 1..=20` integrate monomials up to degree `2n - 1`.
pub fn gauss_check() -> Result<Check> {
    let mut worst = 0.0_f64;
    for n in 1..=20 {
        let r = gauss_rule(n)?.unit();
        for d in 0..2 * n {
            let v: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * x.powi(d as i32)).sum();
            worst = worst.max((v - 1.0 / (d as f64 + 1.0)).abs());
        }
    }
    Ok(Check::at_most("Gauss exactness to degree 2n-1 (max abs)", worst, 1e-14))
}

/// Sample sizes used to measure the order of each supported Alpert rule.
pub fn alpert_sweep(order: usize) -> [usize; 3] {
    match order {
        5 => [32, 64, 128],
        _ => [12, 24, 48],
    }
}

/// Observed order of each supported rule on `ln x`, `x ln x`, `sin x ln x`.
pub fn alpert_checks() -> Result<Vec<Check>> {
    let integrals: [(&str, fn(f64) -> f64, f64); 3] = [
        ("ln x", f64::ln, -1.0),
        ("x ln x", |x| x * x.ln(), -0.25),
        ("sin x ln x", |x| x.sin() * x.ln(), oracle::sin_log_series()),
    ];
    let mut out = Vec::new();
    for &order in &SUPPORTED_ORDERS {
        for (name, f, exact) in integrals {
            let pts = alpert_sweep(order)
                .iter()
                .map(|&n| {
                    let r = alpert_log_rule(order, n)?;
                    let v: f64 = r.nodes.iter().zip(&r.weights).map(|(x, w)| w * f(*x)).sum();
                    Ok((n as f64, (v - exact).abs()))
                })
                .collect::<Result<Vec<_>>>()?;
            let slope = observed_order(&pts);
            let dev = (slope - order as f64).abs();
            out.push(
                Check::at_most(format!("Alpert order {order} on {name}: |slope - {order}|"), dev, 0.3)
                    .with_detail(format!("slope {slope:.3}")),
            );
        }
    }
    Ok(out)
}

/// Weighted L2 error `(int X^r (H_h - 1)^2 ds)^(1/2)` of the curvature recovered
/// on the frozen unit-sphere cap of arc length `0.9 pi`.
pub fn curvature_recovery_error(n: usize) -> Result<f64> {
    let curve = initial_shape(
        &Scenario::SphericalCap {
            angle: 0.9 * PI,
            radius: 1.0,
        },
        n,
        1e-3,
    )?;
    let params = SimParams {
        h0: 1.0,
        gamma_g: 0.0,
        ..SimParams::default()
    };
    let (_, h) = recover_curvature(&curve, &params, 6)?;
    let (xs, ws) = unit_gauss(8);
    let mut e = 0.0;
    for c in 0..curve.mesh().n_cells() {
        let hc = curve.mesh().width(c);
        for (&u, &w) in xs.iter().zip(&ws) {
            let p = curve.at(c, u);
            let d = eval_p2(&h, c, u) - 1.0;
            e += w * hc * p.speed() * p.x[0] * d * d;
        }
    }
    Ok(e.sqrt())
}

/// Order of the curvature recovery over `N = 8, 16, 32, 64`, taken from the two
/// finest meshes; the coarsest pair is still pre-asymptotic.
pub fn curvature_recovery_check() -> Result<Check> {
    let pts = [8usize, 16, 32, 64]
        .iter()
        .map(|&n| Ok((n as f64, curvature_recovery_error(n)?)))
        .collect::<Result<Vec<_>>>()?;
    let fine = observed_order(&pts[2..]);
    let errs: Vec<String> = pts.iter().map(|p| format!("{:.2e}", p.1)).collect();
    Ok(Check::at_least("curvature recovery L2 order", fine, 1.9).with_detail(format!(
        "errors {}, least-squares slope {:.3}",
        errs.join(", "),
        observed_order(&pts)
    )))
}

/// The full oracle suite in a fixed order.
pub fn oracle_suite() -> Result<Vec<Check>> {
    let mut out = vec![elliptic_check()?, i_mn_check()?, kernel_ring_check(50, 2024)?, gauss_check()?];
    out.extend(alpert_checks()?);
    out.push(curvature_recovery_check()?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_display() {
        let c = Check::at_most("x", 1e-3, 1e-2);
        assert!(c.pass);
        assert!(c.to_string().starts_with("PASS x"));
        assert!(!Check::at_least("y", 1.0, 2.0).pass);
    }

    #[test]
    fn cheap_oracles_pass() {
        assert!(elliptic_check().unwrap().pass);
        assert!(gauss_check().unwrap().pass);
        for c in alpert_checks().unwrap() {
            assert!(c.pass, "{c}");
        }
    }
}

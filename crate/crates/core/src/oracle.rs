//! Independent reference computations used by tests and `membrane validate`.
//!
//! Everything here is deliberately slow and direct: adaptive Gauss-Kronrod on
//! the defining integrals, with no shared code path with the fast routines.

use std::f64::consts::{FRAC_PI_2, PI};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        rk += WGK[j] * s;
        if j % 2 == 1 {
            rg += WG[j / 2] * s;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

/// Globally adaptive 15-point Gauss-Kronrod quadrature.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, epsabs: f64, epsrel: f64) -> f64 {
    let (v, e) = gk15(&f, a, b);
    let mut parts = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    for _ in 0..20000 {
        if err <= epsabs.max(epsrel * total.abs()) {
            break;
        }
        let (imax, _) = parts
            .iter()
            .enumerate()
            .fold((0, -1.0), |(bi, be), (i, p)| if p.3 > be { (i, p.3) } else { (bi, be) });
        let (pa, pb, pv, pe) = parts.swap_remove(imax);
        let m = 0.5 * (pa + pb);
        let (v1, e1) = gk15(&f, pa, m);
        let (v2, e2) = gk15(&f, m, pb);
        total += v1 + v2 - pv;
        err += e1 + e2 - pe;
        parts.push((pa, m, v1, e1));
        parts.push((m, pb, v2, e2));
    }
    // Re-sum to shed accumulated rounding from the running updates.
    parts.iter().map(|p| p.2).sum()
}

/// `K(k)` and `E(k)` from their defining integrals.
pub fn elliptic_quadrature(k: f64) -> (f64, f64) {
    let k2 = k * k;
    let kk = integrate(|t| (1.0 - k2 * t.sin().powi(2)).powf(-0.5), 0.0, FRAC_PI_2, 0.0, 1e-15);
    let ee = integrate(|t| (1.0 - k2 * t.sin().powi(2)).sqrt(), 0.0, FRAC_PI_2, 0.0, 1e-15);
    (kk, ee)
}

/// `I_mn` as the sum of the two quarter-period integrals in the moduli `k1` and `k2`.
pub fn i_mn_quadrature(m: u32, n: u32, r1: f64, r2: f64, z: f64) -> f64 {
    let d1 = (r1 - r2).powi(2) + z * z;
    let d2 = (r1 + r2).powi(2) + z * z;
    let k1sq = 4.0 * r1 * r2 / d1;
    let k2sq = 4.0 * r1 * r2 / d2;
    let mh = 0.5 * m as f64;
    let f1 = |t: f64| {
        let s2 = t.sin().powi(2);
        (1.0 - 2.0 * s2).powi(n as i32) * (1.0 + k1sq * s2).powf(-mh)
    };
    let f2 = |t: f64| {
        let s2 = t.sin().powi(2);
        // 1 - k^2 sin^2 = k'^2 + k^2 cos^2 avoids cancellation near t = pi/2.
        let den = (1.0 - k2sq) + k2sq * t.cos().powi(2);
        (2.0 * s2 - 1.0).powi(n as i32) * den.powf(-mh)
    };
    let a1 = integrate(f1, 0.0, FRAC_PI_2, 0.0, 1e-14);
    let a2 = integrate(f2, 0.0, FRAC_PI_2, 0.0, 1e-14);
    2.0 * d1.powf(-mh) * a1 + 2.0 * d2.powf(-mh) * a2
}

/// Azimuthal integral of `-8 pi G` between the target ring point at angle 0
/// and the source ring, projected on `(e_r, e_z)` at both ends.
pub fn kernel_ring(r: f64, rp: f64, dz: f64) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let f = |p: f64| {
                let (sp, cp) = p.sin_cos();
                let x = [r - rp * cp, -rp * sp, dz];
                let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
                let rr = r2.sqrt();
                let ta = if a == 0 { [1.0, 0.0, 0.0] } else { [0.0, 0.0, 1.0] };
                let sb = if b == 0 { [cp, sp, 0.0] } else { [0.0, 0.0, 1.0] };
                let dot = ta[0] * sb[0] + ta[1] * sb[1] + ta[2] * sb[2];
                let xa = ta[0] * x[0] + ta[1] * x[1] + ta[2] * x[2];
                let xb = sb[0] * x[0] + sb[1] * x[1] + sb[2] * x[2];
                dot / rr + xa * xb / (r2 * rr)
            };
            // The integrand peaks at phi = 0 and 2 pi; split there.
            out[a][b] = integrate(&f, 0.0, PI, 0.0, 1e-14) + integrate(&f, PI, 2.0 * PI, 0.0, 1e-14);
        }
    }
    out
}

/// `int_0^1 sin(x) ln(x) dx` from its alternating series.
pub fn sin_log_series() -> f64 {
    let mut sum = 0.0;
    let mut fact = 1.0;
    for k in 0..20 {
        let kf = k as f64;
        if k > 0 {
            fact *= (2.0 * kf) * (2.0 * kf + 1.0);
        }
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        sum += sign / (fact * (2.0 * kf + 2.0).powi(2));
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adaptive_handles_log_endpoint() {
        let v = integrate(|x: f64| x.ln(), 0.0, 1.0, 0.0, 1e-13);
        assert!((v + 1.0).abs() < 1e-12);
    }

    #[test]
    fn series_value() {
        assert!((sin_log_series() + 0.23981174200056474).abs() < 1e-16);
    }

    #[test]
    fn ring_oracle_axis_source() {
        let s = kernel_ring(1.0, 0.0, 0.0);
        assert!((s[1][1] - 2.0 * PI).abs() < 1e-12);
        assert!(s[0][0].abs() < 1e-12);
    }
}

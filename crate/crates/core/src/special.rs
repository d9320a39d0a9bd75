//! Complete elliptic integrals, ring integrals `I_mn`, the free-space Stokeslet
//! and the azimuthally integrated kernel matrix.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Complete elliptic integrals of the first and second kind at modulus `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticPair {
    pub k_val: f64,
    pub e_val: f64,
    pub k: f64,
}

/// `K(k)` and `E(k)` by the arithmetic-geometric mean.
pub fn elliptic_ke(k: f64) -> Result<EllipticPair> {
    if k.is_nan() || k < 0.0 {
        return Err(Error::Domain(format!("modulus k = {k} must be nonnegative")));
    }
    if k >= 1.0 {
        return Err(Error::Divergence(k));
    }
    let kp = ((1.0 - k) * (1.0 + k)).sqrt();
    let (kk, ee) = agm_ke(k, kp);
    Ok(EllipticPair {
        k_val: kk,
        e_val: ee,
        k,
    })
}

/// AGM with the complementary modulus supplied directly, so `K` stays
/// accurate when `k' = sqrt(1 - k^2)` is far below machine epsilon relative to 1.
pub(crate) fn agm_ke(k: f64, kp: f64) -> (f64, f64) {
    let mut a = 1.0_f64;
    let mut b = kp;
    let mut c = k;
    let mut pow = 0.5;
    let mut sum = pow * c * c;
    for _ in 0..64 {
        if c.abs() <= 1e-17 * a {
            break;
        }
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        c = 0.5 * (a - b);
        a = an;
        b = bn;
        pow *= 2.0;
        sum += pow * c * c;
    }
    let kk = FRAC_PI_2 / a;
    (kk, kk * (1.0 - sum))
}

// Switch from power series to elliptic closed forms above this k^2.
const SERIES_K2: f64 = 0.4;

/// `int_0^{pi/2} (2 sin^2 t - 1)^n (1 - k^2 sin^2 t)^{-m/2} dt` by its power series in `k^2`.
fn reduced_series(m: u32, n: u32, k2: f64) -> f64 {
    let mh = 0.5 * m as f64;
    // w_j = (1/2)_j / j!, the normalized moments of sin^{2j}.
    let mut w = [1.0, 0.5, 0.375];
    let mut coef = 1.0_f64;
    let mut pk = 1.0;
    let mut sum = 0.0_f64;
    for j in 0..400 {
        let jf = j as f64;
        let moment = match n {
            0 => w[0],
            1 => 2.0 * w[1] - w[0],
            _ => 4.0 * w[2] - 4.0 * w[1] + w[0],
        };
        let term = coef * pk * moment;
        sum += term;
        if j > 2 && term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        coef *= (mh + jf) / (jf + 1.0);
        pk *= k2;
        let next = w[2] * (jf + 2.5) / (jf + 3.0);
        w = [w[1], w[2], next];
    }
    FRAC_PI_2 * sum
}

/// Reduced integrals `I^(2)_mn(k)` for all six `(m, n)` pairs.
///
/// Layout: `[I10, I11, I12, I30, I31, I32]`.
fn reduced_all(k2: f64, kp2: f64) -> [f64; 6] {
    if k2 < SERIES_K2 {
        return [
            reduced_series(1, 0, k2),
            reduced_series(1, 1, k2),
            reduced_series(1, 2, k2),
            reduced_series(3, 0, k2),
            reduced_series(3, 1, k2),
            reduced_series(3, 2, k2),
        ];
    }
    let (kk, ee) = agm_ke(k2.sqrt(), kp2.sqrt());
    let c = (2.0 - k2) / k2;
    let d = 2.0 / k2;
    let j3 = (2.0 * (2.0 - k2) * ee - kp2 * kk) / 3.0;
    let e_kp = ee / kp2;
    [
        kk,
        c * kk - d * ee,
        c * c * kk - 2.0 * c * d * ee + d * d * j3,
        e_kp,
        c * e_kp - d * kk,
        c * c * e_kp - 2.0 * c * d * kk + d * d * ee,
    ]
}

struct Moduli {
    a: f64,
    d02: f64,
    k2: f64,
    kp2: f64,
}

fn moduli(r1: f64, r2: f64, z: f64) -> Result<Moduli> {
    if r1 < 0.0 || r2 < 0.0 || !r1.is_finite() || !r2.is_finite() || !z.is_finite() {
        return Err(Error::Domain(format!(
            "ring integral needs finite r1, r2 >= 0 (got {r1}, {r2}, {z})"
        )));
    }
    let dr = r1 - r2;
    let d02 = dr * dr + z * z;
    let sr = r1 + r2;
    let a = sr * sr + z * z;
    if a == 0.0 || (d02 == 0.0 && r1 > 0.0) || d02 < 1e-300 * a {
        return Err(Error::Singularity(format!(
            "coincident ring point r1 = r2 = {r1}, dz = {z}"
        )));
    }
    Ok(Moduli {
        a,
        d02,
        k2: 4.0 * r1 * r2 / a,
        kp2: d02 / a,
    })
}

/// Ring integral `int_0^{2pi} cos^n(phi) / D^{m/2} dphi` with
/// `D = r1^2 + r2^2 - 2 r1 r2 cos(phi) + z^2`.
pub fn i_mn(m: u32, n: u32, r1: f64, r2: f64, z: f64) -> Result<f64> {
    if !(m == 1 || m == 3) || n > 2 {
        return Err(Error::Domain(format!("unsupported (m, n) = ({m}, {n})")));
    }
    let md = moduli(r1, r2, z)?;
    let red = reduced_all(md.k2, md.kp2);
    let idx = if m == 1 { n } else { 3 + n } as usize;
    Ok(4.0 * md.a.powf(-0.5 * m as f64) * red[idx])
}

/// Free-space Stokeslet `-(1/8pi)(I/|x| + x x^T/|x|^3)`.
pub fn stokeslet(x: [f64; 3]) -> Result<[[f64; 3]; 3]> {
    let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    if r2 == 0.0 {
        return Err(Error::Singularity("Stokeslet at the origin".into()));
    }
    let r = r2.sqrt();
    let r3 = r2 * r;
    let pre = -1.0 / (8.0 * PI);
    let mut g = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let delta = if i == j { 1.0 / r } else { 0.0 };
            g[i][j] = pre * (delta + x[i] * x[j] / r3);
        }
    }
    Ok(g)
}

/// Axisymmetric kernel matrix `S(r, r', dz)` acting on `(xi^r, xi^z)`.
///
/// Rows are the `(r, z)` components of the velocity at the target ring,
/// columns the components of the density on the source ring.
pub fn axisym_kernel(r: f64, rp: f64, dz: f64) -> Result<[[f64; 2]; 2]> {
    let md = moduli(r, rp, dz)?;
    let s = md.a.sqrt().recip();
    if md.k2 < SERIES_K2 {
        let j = reduced_all(md.k2, md.kp2);
        let i10 = 4.0 * s * j[0];
        let i11 = 4.0 * s * j[1];
        let s3 = 4.0 * s * s * s;
        let i30 = s3 * j[3];
        let i31 = s3 * j[4];
        return Ok([
            [i11 - dz * dz * i31, dz * (r * i30 - rp * i31)],
            [dz * (r * i31 - rp * i30), i10 + dz * dz * i30],
        ]);
    }
    // Near-diagonal regime: rewrite every term so nothing of size 1/d0^2 is
    // formed and subtracted.
    let (kk, ee) = agm_ke(md.k2.sqrt(), md.kp2.sqrt());
    let c = (2.0 - md.k2) / md.k2;
    let d = 2.0 / md.k2;
    let i10 = 4.0 * s * kk;
    let i11 = 4.0 * s * (c * kk - d * ee);
    let e4 = 4.0 * s * ee;
    let t = dz * dz / md.d02;
    let dz2_i30 = t * e4;
    let dz2_i31 = t * c * e4 - 4.0 * s * (dz * dz / md.a) * d * kk;
    let q = (r - rp) * dz / md.d02 * e4;
    let gap = i10 - e4;
    Ok([
        [i11 - dz2_i31, q + dz * gap / (2.0 * r)],
        [q - dz * gap / (2.0 * rp), i10 + dz2_i30],
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn elliptic_at_zero() {
        let p = elliptic_ke(0.0).unwrap();
        assert_eq!(p.k_val, FRAC_PI_2);
        assert_eq!(p.e_val, FRAC_PI_2);
    }

    #[test]
    fn elliptic_half() {
        let p = elliptic_ke(0.5).unwrap();
        assert!((p.k_val - 1.6857503548125961).abs() < 1e-14);
        assert!((p.e_val - 1.4674622093394272).abs() < 1e-14);
    }

    #[test]
    fn elliptic_errors() {
        assert!(matches!(elliptic_ke(1.0), Err(Error::Divergence(_))));
        assert!(matches!(elliptic_ke(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn elliptic_vs_quadrature() {
        for &k in &[0.1, 0.5, 0.9, 0.99, 0.999] {
            let p = elliptic_ke(k).unwrap();
            let (kq, eq) = oracle::elliptic_quadrature(k);
            assert!(rel(p.k_val, kq) < 1e-13, "K({k})");
            assert!(rel(p.e_val, eq) < 1e-13, "E({k})");
        }
    }

    #[test]
    fn legendre_relation() {
        for &k in &[0.05, 0.3, 0.6, 0.8, 0.95] {
            let kp: f64 = (1.0 - k * k as f64).sqrt();
            let a = elliptic_ke(k).unwrap();
            let b = elliptic_ke(kp).unwrap();
            let lhs = a.e_val * b.k_val + b.e_val * a.k_val - a.k_val * b.k_val;
            assert!((lhs - FRAC_PI_2).abs() < 1e-12);
        }
    }

    #[test]
    fn i_mn_trivial_values() {
        assert!((i_mn(1, 0, 1.0, 0.0, 0.0).unwrap() - 2.0 * PI).abs() < 1e-14);
        assert!(i_mn(1, 1, 1.0, 0.0, 0.0).unwrap().abs() < 1e-14);
        assert!(matches!(i_mn(1, 0, 1.0, 1.0, 0.0), Err(Error::Singularity(_))));
        assert!(i_mn(2, 0, 1.0, 0.5, 0.3).is_err());
    }

    #[test]
    fn i_mn_vs_oracle_both_regimes() {
        for &(r1, r2, z) in &[(1.0, 0.5, 0.3), (1.0, 0.98, 0.01), (0.2, 3.0, 1.0), (1.0, 1.0, 1e-3)] {
            for m in [1, 3] {
                for n in 0..3 {
                    let v = i_mn(m, n, r1, r2, z).unwrap();
                    let o = oracle::i_mn_quadrature(m, n, r1, r2, z);
                    assert!(rel(v, o) < 1e-10, "I{m}{n}({r1},{r2},{z}): {v} vs {o}");
                }
            }
        }
    }

    #[test]
    fn stokeslet_values() {
        let g = stokeslet([1.0, 0.0, 0.0]).unwrap();
        assert!((g[0][0] + 1.0 / (4.0 * PI)).abs() < 1e-16);
        assert!((g[1][1] + 1.0 / (8.0 * PI)).abs() < 1e-16);
        assert_eq!(g[0][1], 0.0);
        let x = [0.3, -0.2, 0.7];
        assert_eq!(stokeslet(x).unwrap(), stokeslet([-0.3, 0.2, -0.7]).unwrap());
        let a = stokeslet([1.0, 1.0, 0.0]).unwrap();
        let b = stokeslet([2.0, 2.0, 0.0]).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((b[i][j] - 0.5 * a[i][j]).abs() < 1e-16);
            }
        }
        assert!(stokeslet([0.0; 3]).is_err());
    }

    #[test]
    fn kernel_axis_source() {
        let s = axisym_kernel(1.0, 0.0, 0.0).unwrap();
        assert!(s[0][0].abs() < 1e-14);
        assert!(s[0][1].abs() < 1e-14 && s[1][0].abs() < 1e-14);
        assert!((s[1][1] - 2.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn kernel_vs_ring_oracle() {
        for &(r, rp, dz) in &[(1.0, 0.8, 0.5), (1.0, 0.99, 0.02), (0.3, 0.31, -0.005), (2.0, 0.1, 0.4)] {
            let s = axisym_kernel(r, rp, dz).unwrap();
            let o = oracle::kernel_ring(r, rp, dz);
            let scale = o.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
            for a in 0..2 {
                for b in 0..2 {
                    assert!((s[a][b] - o[a][b]).abs() < 1e-10 * scale, "S{a}{b} at ({r},{rp},{dz})");
                }
            }
        }
    }

    #[test]
    fn kernel_log_growth() {
        let s2 = axisym_kernel(1.0, 1.0, 1e-2).unwrap();
        let s3 = axisym_kernel(1.0, 1.0, 1e-3).unwrap();
        let s6 = axisym_kernel(1.0, 1.0, 1e-6).unwrap();
        // Diagonal entries grow by about 2 ln(10) per decade.
        let g1 = s3[1][1] - s2[1][1];
        let g2 = (s6[1][1] - s3[1][1]) / 3.0;
        assert!((g1 - 2.0 * 10f64.ln()).abs() < 0.05);
        assert!((g2 - 2.0 * 10f64.ln()).abs() < 0.01);
        assert!(s6[0][0].is_finite() && s6[0][1].is_finite());
    }

    #[test]
    fn kernel_transpose_pair() {
        let a = axisym_kernel(0.7, 1.3, 0.4).unwrap();
        let b = axisym_kernel(1.3, 0.7, -0.4).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((a[i][j] - b[j][i]).abs() < 1e-13 * (1.0 + a[i][j].abs()));
            }
        }
    }
}

use std::f64::consts::PI;

use proptest::prelude::*;

use membrane::config::{parse_config_str, SimConfig};
use membrane::diagnostics::{area, f_estimate, total_energy};
use membrane::mesh::{build_mesh, graded_map, RefineAt};
use membrane::quadrature::gauss_rule;
use membrane::scenarios::{initial_shape, Scenario};
use membrane::solver::{SimParams, SystemState};
use membrane::special::{axisym_kernel, elliptic_ke};

fn refine() -> impl Strategy<Value = RefineAt> {
    prop_oneof![Just(RefineAt::Start), Just(RefineAt::End), Just(RefineAt::Both)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graded_map_is_monotone_onto_unit_interval(a in 0.0..1.0f64, b in 0.0..1.0f64, eps in 1e-4..1.0f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let (fl, fh) = (graded_map(lo, eps).unwrap(), graded_map(hi, eps).unwrap());
        prop_assert!(fl <= fh);
        prop_assert!((0.0..=1.0).contains(&fl) && (0.0..=1.0).contains(&fh));
    }

    #[test]
    fn mesh_widths_partition_unit_interval(n in 4usize..80, eps in 1e-4..1.0f64, r in refine()) {
        let m = build_mesh(n, eps, r).unwrap();
        let w = m.widths();
        prop_assert_eq!(w.len(), n);
        prop_assert!(w.iter().all(|&h| h > 0.0));
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert_eq!(m.nodes()[0], 0.0);
        prop_assert_eq!(*m.nodes().last().unwrap(), 1.0);
    }

    #[test]
    fn legendre_relation(k in 0.01..0.99f64) {
        let a = elliptic_ke(k).unwrap();
        let b = elliptic_ke((1.0 - k * k).sqrt()).unwrap();
        let lhs = a.e_val * b.k_val + b.e_val * a.k_val - a.k_val * b.k_val;
        prop_assert!((lhs - PI / 2.0).abs() < 1e-12, "{}", lhs);
    }

    #[test]
    fn kernel_reciprocity(r in 0.05..3.0f64, rp in 0.05..3.0f64, dz in -2.0..2.0f64) {
        prop_assume!((r - rp).abs() + dz.abs() > 1e-3);
        let s = axisym_kernel(r, rp, dz).unwrap();
        let t = axisym_kernel(rp, r, -dz).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let scale = s[a][b].abs().max(1.0);
                prop_assert!((s[a][b] - t[b][a]).abs() < 1e-11 * scale, "{} {} {:?} {:?}", a, b, s, t);
            }
        }
    }

    #[test]
    fn gauss_weights_positive_and_sum_to_two(n in 1usize..=32) {
        let g = gauss_rule(n).unwrap();
        prop_assert!(g.weights.iter().all(|&w| w > 0.0));
        prop_assert!((g.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn config_round_trips(
        beta in 0.0..10.0f64,
        gamma_g in -1.0..1.0f64,
        gamma_l in 0.0..10.0f64,
        h0 in -1.0..1.0f64,
        dt in 1e-5..0.1f64,
        n in 4usize..200,
        eps in 1e-4..1.0f64,
        every in 1usize..1000,
    ) {
        let mut c = SimConfig::new("spherical_cap".parse().unwrap());
        c.params = SimParams { beta, gamma_g, gamma_l, h0, dt, ..c.params };
        c.n = n;
        c.epsilon = eps;
        c.snapshot_every = every;
        let back = parse_config_str(&c.to_toml()).unwrap();
        prop_assert_eq!(back.hash(), c.hash());
        prop_assert_eq!(back, c);
    }

    #[test]
    fn energy_parts_add_up(angle in 0.3..3.0f64, gamma_g in -1.0..1.0f64, gamma_l in 0.0..5.0f64, h0 in -1.0..1.0f64) {
        let c = initial_shape(&Scenario::SphericalCap { angle, radius: 1.0 }, 12, 1e-3).unwrap();
        let st = SystemState::initial(c);
        let p = SimParams { gamma_g, gamma_l, h0, ..SimParams::default() };
        let e = total_energy(&st, &p, 4).unwrap();
        prop_assert_eq!(e.total, e.bend + e.gauss + e.line);
        prop_assert!(e.bend >= 0.0);
        prop_assert_eq!(total_energy(&st, &p, 4).unwrap(), e);
    }

    #[test]
    fn cap_area_matches_closed_form(angle in 0.3..3.0f64, radius in 0.2..5.0f64) {
        let sc = Scenario::SphericalCap { angle, radius };
        let c = initial_shape(&sc, 32, 1e-3).unwrap();
        let exact = sc.exact_area().unwrap();
        prop_assert!((area(&c, 6) - exact).abs() < 1e-5 * exact);
    }

    #[test]
    fn f_estimate_is_linear_in_velocity(scale in -5.0..5.0f64) {
        prop_assume!(scale.abs() > 1e-3);
        let c = initial_shape(&Scenario::Annulus { r_inner: 1.0, r_outer: 2.0 }, 8, 1e-3).unwrap();
        let u: Vec<f64> = (0..c.n_dofs()).flat_map(|i| [0.3 / c.xr()[i], 0.0]).collect();
        let f = f_estimate(&c, &u, 4);
        prop_assert!((f - 0.3).abs() < 1e-3);
        let us: Vec<f64> = u.iter().map(|v| v * scale).collect();
        prop_assert!((f_estimate(&c, &us, 4) - scale * f).abs() < 1e-12 * scale.abs().max(1.0));
    }
}

use std::f64::consts::{PI, TAU};

use metachain::landscape::{census, CensusOptions};
use metachain::twist::*;
use metachain::CouplingParams;
use proptest::prelude::*;

fn on_level(c: f64, t: f64) -> PhaseState {
    let b = metachain::elliptic::EllipticBundle::from_energy(c).unwrap();
    let f = metachain::elliptic::jacobi_sn_cn_dn(2.0 * b.big_k * t / PI, b.kappa).unwrap();
    PhaseState::new(b.a * f.sn, (2.0 * c).sqrt() * f.cn * f.dn)
}

/// Points strictly inside the separatrix, away from the centre.
fn inside() -> impl Strategy<Value = PhaseState> {
    (0.05f64..0.95, 0.0f64..TAU).prop_map(|(r, t)| on_level(0.2499 * r, t))
}

proptest! {
    #[test]
    fn t2_inverse_round_trip(x in -1.5f64..1.5, w in -1.5f64..1.5, eps in 0.01f64..1.0) {
        let s = PhaseState::new(x, w);
        let back = map_t2_inverse(map_t2(s, eps), eps);
        prop_assert!((back.x - x).abs() < 1e-12 && (back.w - w).abs() < 1e-12);
    }

    #[test]
    fn t2_is_area_preserving(x in -1.5f64..1.5, w in -1.5f64..1.5, eps in 0.01f64..1.0) {
        prop_assert!((jacobian_t2(PhaseState::new(x, w), eps).determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn t2_jacobian_matches_finite_differences(x in -1.2f64..1.2, w in -1.2f64..1.2, eps in 0.05f64..0.8) {
        let s = PhaseState::new(x, w);
        let j = jacobian_t2(s, eps);
        let h = 1e-6;
        let dx = (map_t2(PhaseState::new(x + h, w), eps), map_t2(PhaseState::new(x - h, w), eps));
        let dw = (map_t2(PhaseState::new(x, w + h), eps), map_t2(PhaseState::new(x, w - h), eps));
        prop_assert!(((dx.0.x - dx.1.x) / (2.0 * h) - j[(0, 0)]).abs() < 1e-7);
        prop_assert!(((dx.0.w - dx.1.w) / (2.0 * h) - j[(1, 0)]).abs() < 1e-7);
        prop_assert!(((dw.0.x - dw.1.x) / (2.0 * h) - j[(0, 1)]).abs() < 1e-7);
        prop_assert!(((dw.0.w - dw.1.w) / (2.0 * h) - j[(1, 1)]).abs() < 1e-7);
    }

    #[test]
    fn t2_is_reversible(x in -1.5f64..1.5, w in -1.5f64..1.5, eps in 0.01f64..1.0) {
        // R∘T₂∘R = T₂⁻¹ with R(x, w) = (x, −w)
        let r = |s: PhaseState| PhaseState::new(s.x, -s.w);
        let lhs = r(map_t2(r(PhaseState::new(x, w)), eps));
        let rhs = map_t2_inverse(PhaseState::new(x, w), eps);
        prop_assert!((lhs.x - rhs.x).abs() < 1e-12 && (lhs.w - rhs.w).abs() < 1e-12);
    }

    #[test]
    fn unscaled_maps_invert(x in -1.5f64..1.5, u in -1.0f64..1.0, gamma in 0.5f64..20.0) {
        let (a, b) = map_t1(x, u, gamma);
        let (x0, u0) = map_t1_inverse(a, b, gamma);
        prop_assert!((x0 - x).abs() < 1e-11 && (u0 - u).abs() < 1e-11);
        let (a, b) = map_original(x, u, gamma);
        let (x0, v0) = map_original_inverse(a, b, gamma);
        prop_assert!((x0 - x).abs() < 1e-11 && (v0 - u).abs() < 1e-11);
    }

    #[test]
    fn action_angle_round_trip(s in inside()) {
        let aa = to_action_angle(s).unwrap();
        prop_assert!(aa.psi >= 0.0 && aa.psi < TAU);
        let back = from_action_angle(aa).unwrap();
        prop_assert!((back.x - s.x).abs() < 1e-9 && (back.w - s.w).abs() < 1e-9, "{s:?} -> {back:?}");
    }

    #[test]
    fn map_t_agrees_with_t2(s in inside(), eps in 0.01f64..0.2) {
        let aa = to_action_angle(s).unwrap();
        let moved = map_t2(s, eps);
        if moved.energy() < 0.2499 {
            let via = from_action_angle(map_t(aa, eps).unwrap()).unwrap();
            prop_assert!((via.x - moved.x).abs() < 1e-9 && (via.w - moved.w).abs() < 1e-9);
        }
    }

    #[test]
    fn energy_is_nearly_conserved(s in inside(), eps in 0.001f64..0.05) {
        // one step changes C by O(ε³)
        let d = (map_t2(s, eps).energy() - s.energy()).abs();
        prop_assert!(d < 2.0 * eps.powi(3));
    }
}

#[test]
fn residue_classes() {
    assert_eq!(classify_residue(-0.1), OrbitClass::Hyperbolic);
    assert_eq!(classify_residue(0.0), OrbitClass::Parabolic);
    assert_eq!(classify_residue(0.5), OrbitClass::Elliptic);
    assert_eq!(classify_residue(1.0), OrbitClass::Parabolic);
    assert_eq!(classify_residue(3.0), OrbitClass::InverseHyperbolic);
}

#[test]
fn frequency_and_action_inverses() {
    for &c in &[0.01, 0.1, 0.2, 0.24] {
        let w = omega_of_c(c).unwrap();
        assert!(w > 0.0 && w < 1.0);
        assert!((c_of_omega(w).unwrap() - c).abs() < 1e-11);
        let i = h_of_c(c).unwrap();
        assert!((c_of_h(i).unwrap() - c).abs() < 1e-11);
        assert!((omega_bar(i).unwrap() - w).abs() < 1e-11);
    }
    assert!((h_of_c(0.25).unwrap() - SEPARATRIX_ACTION).abs() < 1e-12);
    // small oscillations: I ≈ C, Ω ≈ 1 − 3C/4
    let c = 1e-4;
    assert!((h_of_c(c).unwrap() - c).abs() < 1e-7);
    assert!((omega_of_c(c).unwrap() - (1.0 - 0.75 * c)).abs() < 1e-7);
}

#[test]
fn census_points_lift_to_orbits() {
    let opts = CensusOptions { seeds_per_site: 20, seed: 11, ..Default::default() };
    for (n, gt) in [(8, 0.8), (12, 0.2)] {
        let rep = census(n, gt, &opts).unwrap();
        let p = CouplingParams::from_gamma_tilde(n, gt).unwrap();
        for pt in rep.points.iter().filter(|pt| pt.winding.is_some_and(|m| m > 0)) {
            let orbit = match PeriodicOrbit::from_chain(&pt.config, &p) {
                Ok(o) => o,
                // discrete states of large droplets can sit just past the separatrix
                Err(metachain::Error::OutOfSeparatrix { .. }) => continue,
                Err(e) => panic!("{e}"),
            };
            assert_eq!(Some(orbit.m), pt.winding);
            for i in 0..n {
                let next = map_t2(orbit.states[i], p.epsilon);
                let want = orbit.states[(i + 1) % n];
                assert!((next.x - want.x).abs() < 1e-9 && (next.w - want.w).abs() < 1e-9);
            }
            // sign of the residue follows the parity of the index
            if pt.index_unresolved == 0 {
                assert_eq!(orbit.residue > 0.0, pt.index % 2 == 1, "N={n} index {} R={}", pt.index, orbit.residue);
            }
            assert_eq!(orbit.to_chain().unwrap(), pt.config);
        }
    }
}

#[test]
fn found_orbits_are_stationary_chains() {
    for (n, gt) in [(16usize, 0.8), (32, 0.5)] {
        let p = CouplingParams::from_gamma_tilde(n, gt).unwrap();
        let seed = continuum_seed(n, 1, p.epsilon).unwrap();
        let orbit = find_periodic_orbit(n, 1, p.epsilon, seed).unwrap();
        assert_eq!(orbit.rotation_number(), (1, n));
        let x = orbit.to_chain().unwrap();
        let g = metachain::chain::gradient(&x, &p).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-9), "N={n}");
        let want = predicted_action(n, 1, p.epsilon).unwrap();
        let acts = orbit.actions().unwrap();
        let mean = acts.iter().sum::<f64>() / n as f64;
        assert!((mean - want).abs() < 0.05 * want, "N={n}: {mean} vs {want}");
    }
}

#[test]
fn no_orbit_above_threshold() {
    // 2πM/(Nε) ≥ 1 has no rotational orbit
    let eps = 1.0;
    assert!(predicted_action(6, 1, eps).is_err());
    assert!(predicted_action(7, 1, eps).is_ok());
}

#[test]
fn phase_state_serializes_as_pair() {
    let s = PhaseState::new(0.25, -0.5);
    assert_eq!(serde_json::to_string(&s).unwrap(), "[0.25,-0.5]");
    let o = PeriodicOrbit { n: 1, m: 0, residue: 0.5, states: vec![s] };
    let txt = serde_json::to_string(&o).unwrap();
    assert!(txt.contains("\"N\":1") && txt.contains("\"M\":0"));
    assert_eq!(serde_json::from_str::<PeriodicOrbit>(&txt).unwrap(), o);
}

use std::f64::consts::{FRAC_PI_2, PI};

use metachain::elliptic::*;
use proptest::prelude::*;

/// Trapezoidal rule over a full period; spectrally accurate for smooth
/// periodic integrands.
fn periodic_mean(f: impl Fn(f64) -> f64, period: f64, samples: usize) -> f64 {
    (0..samples).map(|i| f(period * i as f64 / samples as f64)).sum::<f64>() / samples as f64
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn k_quadrature(kappa: f64) -> f64 {
    // K = (π/2)·mean over a period of 1/√(1 − κ² sin²θ)
    FRAC_PI_2 * periodic_mean(|t| 1.0 / (1.0 - kappa * kappa * t.sin().powi(2)).sqrt(), PI, 4000)
}

fn e_quadrature(kappa: f64) -> f64 {
    FRAC_PI_2 * periodic_mean(|t| (1.0 - kappa * kappa * t.sin().powi(2)).sqrt(), PI, 4000)
}

#[test]
fn complete_integrals_match_quadrature() {
    for &kappa in &[0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 0.99] {
        let k = ellip_k(kappa).unwrap();
        let e = ellip_e(kappa).unwrap();
        assert!((k - k_quadrature(kappa)).abs() < 1e-12 * k, "K({kappa})");
        assert!((e - e_quadrature(kappa)).abs() < 1e-12, "E({kappa})");
    }
}

#[test]
fn incomplete_integral_matches_quadrature() {
    for &kappa in &[0.2, 0.6, 0.9] {
        for &phi in &[0.3, 1.0, 1.5, 2.5, 4.0] {
            let want = simpson(|t| 1.0 / (1.0 - kappa * kappa * (t as f64).sin().powi(2)).sqrt(), 0.0, phi, 4000);
            let got = ellip_f(phi, kappa).unwrap();
            assert!((got - want).abs() < 1e-11, "F({phi}, {kappa}): {got} vs {want}");
        }
    }
}

#[test]
fn legendre_relation() {
    // E K' + E' K − K K' = π/2
    for &kappa in &[0.1, 0.4, 0.8, 0.95] {
        let kp = complement(kappa);
        let (k, e) = (ellip_k(kappa).unwrap(), ellip_e(kappa).unwrap());
        let (k2, e2) = (ellip_k(kp).unwrap(), ellip_e(kp).unwrap());
        assert!((e * k2 + e2 * k - k * k2 - FRAC_PI_2).abs() < 1e-13);
    }
}

#[test]
fn special_values() {
    assert_eq!(ellip_k(0.0).unwrap(), FRAC_PI_2);
    assert_eq!(ellip_e(0.0).unwrap(), FRAC_PI_2);
    assert!((ellip_e(1.0).unwrap() - 1.0).abs() < 1e-12);
    assert!(ellip_k(1.0).is_err());
    assert!(ellip_k(-0.1).is_err());
    let s = jacobi_sn_cn_dn(0.7, 0.0).unwrap();
    assert!((s.sn - 0.7f64.sin()).abs() < 1e-15 && (s.dn - 1.0).abs() < 1e-15);
}

#[test]
fn nome_from_definition() {
    for &kappa in &[0.3, 0.7, 0.9] {
        let want = (-PI * k_quadrature(complement(kappa)) / k_quadrature(kappa)).exp();
        assert!((elliptic_nome(kappa).unwrap() - want).abs() < 1e-13);
    }
}

#[test]
fn sine_series_reproduces_sn() {
    for &kappa in &[0.3, 0.8, 0.95] {
        let k = ellip_k(kappa).unwrap();
        for i in 0..20 {
            let psi = 0.37 * i as f64;
            let direct = 2.0 * k / PI * jacobi_sn_cn_dn(2.0 * k * psi / PI, kappa).unwrap().sn;
            let series = sn_fourier_series(psi, kappa, 40).unwrap();
            assert!((direct - series).abs() < 1e-12, "κ={kappa} ψ={psi}");
        }
    }
}

#[test]
fn power_coefficients_match_numerical_fourier() {
    for &kappa in &[0.4, 0.85] {
        let t = 2.0 * ellip_k(kappa).unwrap() / PI;
        for k in 1..=3u32 {
            let f = |psi: f64| (t * jacobi_sn_cn_dn(t * psi, kappa).unwrap().sn).powi(2 * k as i32);
            for p in 0..4u32 {
                // period of sn^{2k}(2Kψ/π) in ψ is π
                let want = if p == 0 {
                    periodic_mean(f, PI, 2048)
                } else {
                    2.0 * periodic_mean(|psi| f(psi) * (2.0 * p as f64 * psi).cos(), PI, 2048)
                };
                let got = sn_power_fourier_coeff(k, p, kappa).unwrap();
                assert!((got - want).abs() < 1e-9 * want.abs().max(1.0), "2k={} p={p} κ={kappa}: {got} vs {want}", 2 * k);
            }
        }
    }
    assert!(sn_power_fourier_coeff(4, 1, 0.5).is_err());
}

#[test]
fn bundle_round_trip() {
    for &c in &[0.01, 0.1, 0.2, 0.249] {
        let b = EllipticBundle::from_energy(c).unwrap();
        assert!((b.energy - c).abs() < 1e-14);
        let again = EllipticBundle::from_kappa(b.kappa).unwrap();
        assert!((again.energy - c).abs() < 1e-14);
        assert!((b.a * b.a - 2.0 * b.kappa * b.kappa / (1.0 + b.kappa * b.kappa)).abs() < 1e-14);
    }
    assert!(EllipticBundle::from_energy(0.25).is_err());
}

#[test]
fn battery_passes() {
    let rep = identity_battery(50).unwrap();
    assert!(rep.passed(), "{rep:?}");
}

proptest! {
    #[test]
    fn pythagorean_identities(u in -20.0f64..20.0, kappa in 0.0f64..0.999) {
        let s = jacobi_sn_cn_dn(u, kappa).unwrap();
        prop_assert!((s.sn * s.sn + s.cn * s.cn - 1.0).abs() < 1e-12);
        prop_assert!((s.dn * s.dn + kappa * kappa * s.sn * s.sn - 1.0).abs() < 1e-12);
    }

    #[test]
    fn derivative_of_sn(u in -5.0f64..5.0, kappa in 0.0f64..0.99) {
        let h = 1e-5;
        let d = (jacobi_sn_cn_dn(u + h, kappa).unwrap().sn - jacobi_sn_cn_dn(u - h, kappa).unwrap().sn) / (2.0 * h);
        let s = jacobi_sn_cn_dn(u, kappa).unwrap();
        prop_assert!((d - s.cn * s.dn).abs() < 1e-8);
    }

    #[test]
    fn half_and_full_periods(u in -3.0f64..3.0, kappa in 0.0f64..0.99) {
        let k = ellip_k(kappa).unwrap();
        let a = jacobi_sn_cn_dn(u, kappa).unwrap();
        let b = jacobi_sn_cn_dn(u + 2.0 * k, kappa).unwrap();
        let c = jacobi_sn_cn_dn(u + 4.0 * k, kappa).unwrap();
        prop_assert!((a.sn + b.sn).abs() < 1e-10);
        prop_assert!((a.sn - c.sn).abs() < 1e-10);
        prop_assert!((a.dn - b.dn).abs() < 1e-10);
    }

    #[test]
    fn amplitude_inverts_incomplete_integral(phi in -4.0f64..4.0, kappa in 0.0f64..0.99) {
        let u = ellip_f(phi, kappa).unwrap();
        prop_assert!((jacobi_am(u, kappa).unwrap() - phi).abs() < 1e-10);
    }

    #[test]
    fn e_never_exceeds_k(kappa in 0.0f64..0.999) {
        prop_assert!(ellip_e(kappa).unwrap() <= ellip_k(kappa).unwrap());
    }
}

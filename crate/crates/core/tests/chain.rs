use std::f64::consts::PI;

use metachain::chain::*;
use metachain::precision::{Real, TwoFloat};
use metachain::{ChainConfig, CouplingParams, Error, SymmetryElement};
use proptest::prelude::*;

fn config(n: usize) -> impl Strategy<Value = ChainConfig> {
    prop::collection::vec(-1.6f64..1.6, n).prop_map(|v| ChainConfig::new(v).unwrap())
}

fn chain_and_params() -> impl Strategy<Value = (ChainConfig, CouplingParams)> {
    (2usize..24, 0.02f64..3.0).prop_flat_map(|(n, gt)| (config(n), Just(CouplingParams::from_gamma_tilde(n, gt).unwrap())))
}

fn fd_gradient(x: &ChainConfig, p: &CouplingParams, h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut a = x.as_slice().to_vec();
            let mut b = a.clone();
            a[i] += h;
            b[i] -= h;
            (potential(&ChainConfig::new(a).unwrap(), p).unwrap() - potential(&ChainConfig::new(b).unwrap(), p).unwrap())
                / (2.0 * h)
        })
        .collect()
}

proptest! {
    #[test]
    fn gradient_matches_finite_differences((x, p) in chain_and_params()) {
        let g = gradient(&x, &p).unwrap();
        for (a, b) in g.iter().zip(fd_gradient(&x, &p, 1e-6)) {
            prop_assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn hessian_matches_finite_differences((x, p) in chain_and_params()) {
        let n = x.len();
        let h = hessian(&x, &p).unwrap();
        let step = 1e-6;
        for j in 0..n {
            let mut a = x.as_slice().to_vec();
            let mut b = a.clone();
            a[j] += step;
            b[j] -= step;
            let ga = gradient(&ChainConfig::new(a).unwrap(), &p).unwrap();
            let gb = gradient(&ChainConfig::new(b).unwrap(), &p).unwrap();
            for i in 0..n {
                prop_assert!(((ga[i] - gb[i]) / (2.0 * step) - h[i * n + j]).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn potential_is_group_invariant((x, p) in chain_and_params()) {
        let v = potential(&x, &p).unwrap();
        for g in SymmetryElement::all(x.len()) {
            prop_assert!((potential(&g.apply(&x), &p).unwrap() - v).abs() <= 1e-12 * v.abs().max(1.0));
        }
    }

    #[test]
    fn gradient_is_equivariant((x, p) in chain_and_params()) {
        let g0 = gradient(&x, &p).unwrap();
        for g in SymmetryElement::all(x.len()) {
            let lhs = gradient(&g.apply(&x), &p).unwrap();
            let rhs = g.apply_slice(&g0);
            for (a, b) in lhs.iter().zip(&rhs) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn double_double_potential_agrees((x, p) in chain_and_params()) {
        let xd: Vec<TwoFloat> = x.as_slice().iter().map(|&v| TwoFloat::from_f64(v)).collect();
        let exact = potential_raw(&xd, TwoFloat::from_f64(p.gamma)).to_f64();
        let scale: f64 = x.as_slice().iter().map(|v| v.powi(4) + v * v + p.gamma * 4.0 * v * v).sum::<f64>().max(1.0);
        prop_assert!((potential(&x, &p).unwrap() - exact).abs() <= 1e-14 * scale);
    }

    #[test]
    fn group_laws(n in 2usize..12, a in 0usize..200, b in 0usize..200, c in 0usize..200) {
        let all = SymmetryElement::all(n);
        let (g, h, k) = (all[a % all.len()], all[b % all.len()], all[c % all.len()]);
        prop_assert_eq!(g.compose(h, n).compose(k, n), g.compose(h.compose(k, n), n));
        prop_assert_eq!(g.compose(g.inverse(n), n), SymmetryElement::IDENTITY);
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        // acting with a composition equals acting twice
        prop_assert_eq!(g.compose(h, n).apply_slice(&x), g.apply_slice(&h.apply_slice(&x)));
    }
}

#[test]
fn group_order() {
    for n in 3..10 {
        assert_eq!(SymmetryElement::all(n).len(), 4 * n);
    }
    assert_eq!(SymmetryElement::all(2).len(), 4);
}

#[test]
fn origin_spectrum_closed_form() {
    // Hessian at O: −1 + γ(1 − cos(2πm/N)), m = 0..N−1
    let p = CouplingParams::from_gamma_tilde(10, 0.37).unwrap();
    let mut want: Vec<f64> = (0..10).map(|m| -1.0 + p.gamma * (1.0 - (2.0 * PI * m as f64 / 10.0).cos())).collect();
    want.sort_by(f64::total_cmp);
    let got = hessian_index(&ChainConfig::origin(10), &p, None).unwrap();
    for (a, b) in got.eigenvalues.iter().zip(&want) {
        assert!((a - b).abs() < 1e-12);
    }
    assert_eq!(got.index, 3);
}

#[test]
fn coupling_conversions() {
    let p = CouplingParams::from_gamma_tilde(12, 0.8).unwrap();
    assert!((p.gamma - 0.8 / (2.0 * (PI / 12.0).sin().powi(2))).abs() < 1e-13);
    let q = CouplingParams::from_gamma(12, p.gamma).unwrap();
    assert!((q.gamma_tilde - 0.8).abs() < 1e-14);
    assert!((p.epsilon - (2.0 / p.gamma).sqrt()).abs() < 1e-15);
    assert!(CouplingParams::from_gamma_tilde(1, 0.5).is_err());
    assert!(CouplingParams::from_gamma(8, -1.0).is_err());
}

#[test]
fn bifurcation_values() {
    let g = bifurcation_gammas(12, 3).unwrap();
    assert_eq!(g[0], 1.0);
    let want2 = (1.0 - (PI / 6.0).cos()) / (1.0 - (PI / 3.0).cos());
    assert!((g[1] - want2).abs() < 1e-15);
    assert!(g.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn config_validation_and_serde() {
    assert!(matches!(ChainConfig::new(vec![0.0, f64::NAN]), Err(Error::Domain { .. })));
    let x = ChainConfig::new(vec![0.5, -0.25, 1.0]).unwrap();
    let s = serde_json::to_string(&x).unwrap();
    assert_eq!(s, "[0.5,-0.25,1.0]");
    assert_eq!(serde_json::from_str::<ChainConfig>(&s).unwrap(), x);
    assert!(serde_json::from_str::<ChainConfig>("[]").is_err());
    let p = CouplingParams::from_gamma_tilde(3, 0.5).unwrap();
    assert!(matches!(gradient(&ChainConfig::origin(4), &p), Err(Error::Dimension { .. })));
}

#[test]
fn group_orbit_sizes() {
    let x = ChainConfig::new(vec![1.0, 0.5, 0.2, -0.3, 0.0]).unwrap();
    assert_eq!(group_orbit(&x, 1e-12).len(), 20);
    assert_eq!(group_orbit(&ChainConfig::i_plus(5), 1e-12).len(), 2);
    assert_eq!(group_orbit(&ChainConfig::origin(5), 1e-12).len(), 1);
}

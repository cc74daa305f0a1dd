//! The chain model: configurations, couplings, the potential `V_γ` and its
//! derivatives.
//!
//! ```text
//! V_γ(x) = Σ_i U(x_i) + (γ/4) Σ_i (x_{i+1} − x_i)²,    U(ξ) = ξ⁴/4 − ξ²/2
//! ```
//!
//! with periodic indexing `x_{i+N} = x_i`.

mod symmetry;

use std::f64::consts::PI;
use std::ops::Index;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::precision::Real;

pub use symmetry::{bifurcation_gammas, group_orbit, SymmetryElement};

/// A point in configuration space, serialized as a flat JSON array.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ChainConfig(Vec<f64>);

impl<'de> Deserialize<'de> for ChainConfig {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        ChainConfig::new(v).map_err(serde::de::Error::custom)
    }
}

impl ChainConfig {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::InvalidArgument(format!("chain needs N ≥ 2 sites, got {}", x.len())));
        }
        if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain { what: "chain coordinate", value: *bad });
        }
        Ok(Self(x))
    }

    pub fn uniform(n: usize, value: f64) -> Self {
        Self(vec![value; n.max(2)])
    }

    /// The origin O.
    pub fn origin(n: usize) -> Self {
        Self::uniform(n, 0.0)
    }

    /// I⁺ = (1, …, 1).
    pub fn i_plus(n: usize) -> Self {
        Self::uniform(n, 1.0)
    }

    /// I⁻ = (−1, …, −1).
    pub fn i_minus(n: usize) -> Self {
        Self::uniform(n, -1.0)
    }

    pub(crate) fn from_vec_unchecked(x: Vec<f64>) -> Self {
        Self(x)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Site value with periodic indexing.
    pub fn site(&self, i: isize) -> f64 {
        let n = self.0.len() as isize;
        self.0[i.rem_euclid(n) as usize]
    }

    pub fn sup_distance(&self, other: &ChainConfig) -> f64 {
        sup_distance(&self.0, &other.0)
    }

    pub fn euclidean_distance(&self, other: &ChainConfig) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }

    pub fn amplitude(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Index<usize> for ChainConfig {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub(crate) fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// 1 − cos(2πM/N), evaluated as 2 sin²(πM/N) to keep precision at large N.
pub(crate) fn one_minus_cos(m: usize, n: usize) -> f64 {
    let s = (PI * m as f64 / n as f64).sin();
    2.0 * s * s
}

/// Critical coupling γ₁ = 1/(1 − cos(2π/N)) of the desynchronisation bifurcation.
pub fn gamma_1(n: usize) -> f64 {
    1.0 / one_minus_cos(1, n)
}

/// Model parameters. `gamma_tilde = γ/γ₁`, `epsilon = √(2/γ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingParams {
    #[serde(rename = "N")]
    pub n: usize,
    pub gamma: f64,
    pub gamma_tilde: f64,
    pub epsilon: f64,
}

impl CouplingParams {
    pub fn from_gamma(n: usize, gamma: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("N must be at least 2, got {n}")));
        }
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::Domain { what: "coupling γ", value: gamma });
        }
        Ok(Self {
            n,
            gamma,
            gamma_tilde: gamma * one_minus_cos(1, n),
            epsilon: (2.0 / gamma).sqrt(),
        })
    }

    pub fn from_gamma_tilde(n: usize, gamma_tilde: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("N must be at least 2, got {n}")));
        }
        if !(gamma_tilde.is_finite() && gamma_tilde >= 0.0) {
            return Err(Error::Domain { what: "rescaled coupling γ̃", value: gamma_tilde });
        }
        let gamma = gamma_tilde * gamma_1(n);
        Ok(Self { n, gamma, gamma_tilde, epsilon: (2.0 / gamma).sqrt() })
    }

    fn check(&self, x: &ChainConfig) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::Dimension { expected: self.n, got: x.len() });
        }
        Ok(())
    }
}

/// Local drift f(ξ) = ξ − ξ³ = −U′(ξ).
#[inline]
pub fn drift_local(xi: f64) -> f64 {
    xi - xi * xi * xi
}

#[inline]
fn neighbours(i: usize, n: usize) -> (usize, usize) {
    ((i + n - 1) % n, (i + 1) % n)
}

/// V_γ on a raw slice in any [`Real`] arithmetic.
pub fn potential_raw<T: Real>(x: &[T], gamma: T) -> T {
    let n = x.len();
    let quarter = T::from_f64(0.25);
    let half = T::from_f64(0.5);
    let mut onsite = T::zero();
    let mut bonds = T::zero();
    for i in 0..n {
        let xi = x[i];
        let sq = xi * xi;
        onsite = onsite + quarter * sq * sq - half * sq;
        let d = x[(i + 1) % n] - xi;
        bonds = bonds + d * d;
    }
    onsite + gamma * quarter * bonds
}

/// ∇V_γ on a raw slice, written into `out`.
pub fn gradient_raw<T: Real>(x: &[T], gamma: T, out: &mut [T]) {
    let n = x.len();
    let half_gamma = gamma * T::from_f64(0.5);
    let two = T::from_f64(2.0);
    for i in 0..n {
        let (l, r) = neighbours(i, n);
        let xi = x[i];
        let lap = x[r] - two * xi + x[l];
        out[i] = -(xi - xi * xi * xi) - half_gamma * lap;
    }
}

/// Dense row-major Hessian on a raw slice.
pub fn hessian_raw<T: Real>(x: &[T], gamma: T) -> Vec<T> {
    let n = x.len();
    let mut h = vec![T::zero(); n * n];
    let half_gamma = gamma * T::from_f64(0.5);
    let three = T::from_f64(3.0);
    for i in 0..n {
        let (l, r) = neighbours(i, n);
        h[i * n + i] = three * x[i] * x[i] - T::one() + gamma;
        h[i * n + r] = h[i * n + r] - half_gamma;
        h[i * n + l] = h[i * n + l] - half_gamma;
    }
    h
}

/// The potential V_γ(x).
pub fn potential(x: &ChainConfig, p: &CouplingParams) -> Result<f64> {
    p.check(x)?;
    Ok(potential_raw(x.as_slice(), p.gamma))
}

/// ∇V_γ(x); component i is `−f(x_i) − (γ/2)(x_{i+1} − 2x_i + x_{i−1})`.
pub fn gradient(x: &ChainConfig, p: &CouplingParams) -> Result<Vec<f64>> {
    p.check(x)?;
    let mut g = vec![0.0; x.len()];
    gradient_raw(x.as_slice(), p.gamma, &mut g);
    Ok(g)
}

/// Dense Hessian, row-major `N × N`: diagonal `3x_i² − 1 + γ`, nearest
/// neighbours (including the periodic corner) `−γ/2`.
pub fn hessian(x: &ChainConfig, p: &CouplingParams) -> Result<Vec<f64>> {
    p.check(x)?;
    Ok(hessian_raw(x.as_slice(), p.gamma))
}

/// Result of counting unstable directions at a stationary point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    /// Number of eigenvalues below `−tol`.
    pub index: usize,
    /// Number of eigenvalues in `[−tol, tol]`. Nonzero means the index is
    /// not determined at this tolerance.
    pub degenerate: usize,
    pub tol: f64,
    pub eigenvalues: Vec<f64>,
}

impl IndexReport {
    pub fn is_degenerate(&self) -> bool {
        self.degenerate > 0
    }
}

/// Default eigenvalue tolerance `1e-8 · max(1, ‖H‖)`.
pub fn default_index_tol(h: &[f64], n: usize) -> f64 {
    1e-8 * linalg::norm_inf(h, n).max(1.0)
}

/// Hessian index with an explicit degeneracy count. `tol = None` uses
/// [`default_index_tol`].
pub fn hessian_index(x: &ChainConfig, p: &CouplingParams, tol: Option<f64>) -> Result<IndexReport> {
    let h = hessian(x, p)?;
    let n = x.len();
    let tol = tol.unwrap_or_else(|| default_index_tol(&h, n));
    let eigenvalues = linalg::symmetric_eigenvalues(&h, n);
    let index = eigenvalues.iter().filter(|&&e| e < -tol).count();
    let degenerate = eigenvalues.iter().filter(|&&e| e.abs() <= tol).count();
    Ok(IndexReport { index, degenerate, tol, eigenvalues })
}

/// Closed-form Hessian spectrum at the origin: `−1 + γ(1 − cos(2πq/N))`.
pub fn origin_spectrum(p: &CouplingParams) -> Vec<f64> {
    let mut ev: Vec<f64> = (0..p.n).map(|q| -1.0 + p.gamma * one_minus_cos(q, p.n)).collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, gamma: f64) -> CouplingParams {
        CouplingParams::from_gamma(n, gamma).unwrap()
    }

    #[test]
    fn special_points() {
        for &n in &[2, 5, 8] {
            let p = params(n, 3.0);
            assert_eq!(potential(&ChainConfig::origin(n), &p).unwrap(), 0.0);
            assert!((potential(&ChainConfig::i_plus(n), &p).unwrap() + n as f64 / 4.0).abs() < 1e-15);
            assert!(gradient(&ChainConfig::i_plus(n), &p).unwrap().iter().all(|&g| g == 0.0));
            assert!(gradient(&ChainConfig::origin(n), &p).unwrap().iter().all(|&g| g == 0.0));
            let idx = hessian_index(&ChainConfig::i_minus(n), &p, None).unwrap();
            assert_eq!(idx.index, 0);
            assert!(idx.eigenvalues[0] >= 2.0 - 1e-12);
        }
    }

    #[test]
    fn dimension_mismatch() {
        let p = params(4, 1.0);
        let x = ChainConfig::origin(5);
        assert_eq!(potential(&x, &p), Err(Error::Dimension { expected: 4, got: 5 }));
        assert!(gradient(&x, &p).is_err());
        assert!(hessian(&x, &p).is_err());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(ChainConfig::new(vec![1.0]).is_err());
        assert!(ChainConfig::new(vec![1.0, f64::NAN]).is_err());
        assert!(serde_json::from_str::<ChainConfig>("[1.0]").is_err());
    }

    #[test]
    fn coupling_relations() {
        let p = CouplingParams::from_gamma_tilde(8, 0.8).unwrap();
        assert!((p.gamma * (1.0 - (2.0 * PI / 8.0).cos()) - 0.8).abs() < 1e-14);
        assert!((p.epsilon - (2.0 / p.gamma).sqrt()).abs() < 1e-15);
        let q = CouplingParams::from_gamma(8, p.gamma).unwrap();
        assert!((q.gamma_tilde - 0.8).abs() < 1e-14);
        let json = serde_json::to_value(p).unwrap();
        assert!(json.get("N").is_some() && json.get("gamma_tilde").is_some());
        assert!(CouplingParams::from_gamma(1, 1.0).is_err());
        assert!(CouplingParams::from_gamma(4, -1.0).is_err());
    }

    #[test]
    fn origin_hessian_matches_circulant_spectrum() {
        for &(n, gamma) in &[(6, 0.7), (9, 4.0), (16, 30.0)] {
            let p = params(n, gamma);
            let h = hessian(&ChainConfig::origin(n), &p).unwrap();
            let dense = linalg::symmetric_eigenvalues(&h, n);
            for (a, b) in dense.iter().zip(origin_spectrum(&p)) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn origin_index_across_bifurcations() {
        let n = 12;
        let gm = bifurcation_gammas(n, 3).unwrap();
        // γ̃ > 1: index 1; (γ̃₂, γ̃₁): index 3; (γ̃₃, γ̃₂): index 5
        let probes = [(1.2, 1), (0.5 * (gm[0] + gm[1]), 3), (0.5 * (gm[1] + gm[2]), 5)];
        for (gt, want) in probes {
            let p = CouplingParams::from_gamma_tilde(n, gt).unwrap();
            let rep = hessian_index(&ChainConfig::origin(n), &p, None).unwrap();
            assert_eq!(rep.index, want, "γ̃ = {gt}");
            assert!(!rep.is_degenerate());
            let count = (0..n).filter(|&q| p.gamma * one_minus_cos(q, n) < 1.0).count();
            assert_eq!(rep.index, count);
        }
    }

    #[test]
    fn degenerate_flag_at_bifurcation() {
        let p = CouplingParams::from_gamma_tilde(8, 1.0).unwrap();
        let rep = hessian_index(&ChainConfig::origin(8), &p, None).unwrap();
        assert_eq!(rep.degenerate, 2);
    }
}

//! The symmetry group G_N generated by the rotation R, the mirror S and the
//! sign flip C.

use serde::{Deserialize, Serialize};

use super::{one_minus_cos, sup_distance, ChainConfig};
use crate::error::{Error, Result};

/// The element `C^negated · S^mirrored · R^rotation_power`.
///
/// `R(x₁,…,x_N) = (x₂,…,x_N,x₁)`, `S` reverses the order of the sites and
/// `C` negates every coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SymmetryElement {
    pub rotation_power: usize,
    pub mirrored: bool,
    pub negated: bool,
}

impl SymmetryElement {
    pub const IDENTITY: Self = Self { rotation_power: 0, mirrored: false, negated: false };

    pub fn rotation(power: usize) -> Self {
        Self { rotation_power: power, ..Self::IDENTITY }
    }

    pub fn mirror() -> Self {
        Self { mirrored: true, ..Self::IDENTITY }
    }

    pub fn negation() -> Self {
        Self { negated: true, ..Self::IDENTITY }
    }

    /// All distinct group elements: 4N of them, or 4 when N = 2 (where S = R).
    pub fn all(n: usize) -> Vec<Self> {
        let mirrors: &[bool] = if n == 2 { &[false] } else { &[false, true] };
        let mut out = Vec::with_capacity(4 * n);
        for &negated in &[false, true] {
            for &mirrored in mirrors {
                for r in 0..n {
                    out.push(Self { rotation_power: r, mirrored, negated });
                }
            }
        }
        out
    }

    /// `self · other`, so that `apply(a·b, x) = apply(a, apply(b, x))`.
    pub fn compose(self, other: Self, n: usize) -> Self {
        // S R^r = R^{−r} S
        let rotation_power = if other.mirrored {
            (other.rotation_power + n - self.rotation_power % n) % n
        } else {
            (self.rotation_power + other.rotation_power) % n
        };
        Self {
            rotation_power,
            mirrored: self.mirrored ^ other.mirrored,
            negated: self.negated ^ other.negated,
        }
    }

    pub fn inverse(self, n: usize) -> Self {
        if self.mirrored {
            self
        } else {
            Self { rotation_power: (n - self.rotation_power % n) % n, ..self }
        }
    }

    pub fn is_involution(self, n: usize) -> bool {
        self.compose(self, n) == Self::IDENTITY
    }

    /// Signed-permutation form: `(g·x)_i = sign · x_{source(i)}`.
    #[inline]
    pub fn source(self, i: usize, n: usize) -> usize {
        let r = self.rotation_power % n;
        if self.mirrored {
            (2 * n - 1 - i + r) % n
        } else {
            (i + r) % n
        }
    }

    #[inline]
    pub fn sign(self) -> f64 {
        if self.negated {
            -1.0
        } else {
            1.0
        }
    }

    pub fn apply_slice(self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let s = self.sign();
        (0..n).map(|i| s * x[self.source(i, n)]).collect()
    }

    pub fn apply(self, x: &ChainConfig) -> ChainConfig {
        ChainConfig::from_vec_unchecked(self.apply_slice(x.as_slice()))
    }
}

/// All distinct images of `x` under G_N, deduplicated in sup-norm within
/// `match_tol` (default 1e-7 in the CLI).
pub fn group_orbit(x: &ChainConfig, match_tol: f64) -> Vec<ChainConfig> {
    let mut out: Vec<ChainConfig> = Vec::new();
    for g in SymmetryElement::all(x.len()) {
        let y = g.apply(x);
        if !out.iter().any(|z| sup_distance(z.as_slice(), y.as_slice()) <= match_tol) {
            out.push(y);
        }
    }
    out
}

/// Bifurcation values `γ̃_M = (1 − cos(2π/N)) / (1 − cos(2πM/N))` for
/// `M = 1..=m_max`.
pub fn bifurcation_gammas(n: usize, m_max: usize) -> Result<Vec<f64>> {
    if m_max == 0 || 2 * m_max > n {
        return Err(Error::InvalidArgument(format!(
            "need 2 ≤ 2·M_max ≤ N, got M_max = {m_max}, N = {n}"
        )));
    }
    let base = one_minus_cos(1, n);
    Ok((1..=m_max).map(|m| base / one_minus_cos(m, n)).collect())
}

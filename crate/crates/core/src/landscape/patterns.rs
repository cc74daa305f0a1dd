//! Symmetry classes of the first A and B saddles.
//!
//! With 1-based sites, the class of A (1-saddle) and B (2-saddle) depends on
//! N mod 4:
//!
//! | N      | A                                          | B                                              |
//! |--------|--------------------------------------------|------------------------------------------------|
//! | 4L     | x_{2L+1−j} = x_j, x_{j+2L} = −x_j          | x_{2L} = x_{4L} = 0, x_{2L−j} = x_j, x_{j+2L} = −x_j |
//! | 4L+2   | x_{2L+2−j} = x_j, x_{j+2L+1} = −x_j        | x_{2L+1} = x_{4L+2} = 0, x_{2L+1−j} = x_j, x_{j+2L+1} = −x_j |
//! | 2L+1   | x_N = 0, x_{N−j} = −x_j                    | x_{N−j} = x_j                                   |

use serde::{Deserialize, Serialize};

use crate::chain::SymmetryElement;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SaddleKind {
    A,
    B,
}

impl std::fmt::Display for SaddleKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SaddleKind::A => "A",
            SaddleKind::B => "B",
        })
    }
}

impl std::str::FromStr for SaddleKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "A" | "a" => Ok(SaddleKind::A),
            "B" | "b" => Ok(SaddleKind::B),
            other => Err(format!("unknown saddle kind {other:?}, expected A or B")),
        }
    }
}

/// Largest violation of the class constraints, with `x` in its literal
/// position (no group action applied).
pub fn class_residual(x: &[f64], kind: SaddleKind) -> f64 {
    let n = x.len();
    // 1-based accessor
    let at = |j: usize| x[(j + n - 1) % n];
    let mut worst: f64 = 0.0;
    let mut eq = |a: f64, b: f64| worst = worst.max((a - b).abs());
    if n % 2 == 1 {
        match kind {
            SaddleKind::A => {
                eq(at(n), 0.0);
                for j in 1..n {
                    eq(at(n - j), -at(j));
                }
            }
            SaddleKind::B => {
                for j in 1..n {
                    eq(at(n - j), at(j));
                }
            }
        }
    } else if n % 4 == 0 {
        let l = n / 4;
        match kind {
            SaddleKind::A => {
                for j in 1..=2 * l {
                    eq(at(2 * l + 1 - j), at(j));
                    eq(at(j + 2 * l), -at(j));
                }
            }
            SaddleKind::B => {
                eq(at(2 * l), 0.0);
                eq(at(4 * l), 0.0);
                for j in 1..2 * l {
                    eq(at(2 * l - j), at(j));
                }
                for j in 1..=2 * l {
                    eq(at(j + 2 * l), -at(j));
                }
            }
        }
    } else {
        let l = (n - 2) / 4;
        match kind {
            SaddleKind::A => {
                for j in 1..=2 * l + 1 {
                    eq(at(2 * l + 2 - j), at(j));
                    eq(at(j + 2 * l + 1), -at(j));
                }
            }
            SaddleKind::B => {
                eq(at(2 * l + 1), 0.0);
                eq(at(4 * l + 2), 0.0);
                for j in 1..=2 * l {
                    eq(at(2 * l + 1 - j), at(j));
                }
                for j in 1..=2 * l + 1 {
                    eq(at(j + 2 * l + 1), -at(j));
                }
            }
        }
    }
    worst
}

/// Smallest class residual over all group images of `x`.
pub fn class_distance(x: &[f64], kind: SaddleKind) -> f64 {
    SymmetryElement::all(x.len())
        .into_iter()
        .map(|g| class_residual(&g.apply_slice(x), kind))
        .fold(f64::INFINITY, f64::min)
}

/// True when some group image of `x` has the symmetry class of `kind`.
pub fn has_class(x: &[f64], kind: SaddleKind, tol: f64) -> bool {
    class_distance(x, kind) <= tol
}

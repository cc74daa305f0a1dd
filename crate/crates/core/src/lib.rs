//! Metastable landscape of a periodic chain of N coupled bistable particles.
//!
//! The chain evolves by
//!
//! ```text
//! dx_i = [x_i − x_i³ + (γ/2)(x_{i+1} − 2x_i + x_{i−1})] dt + σ dB_i
//! ```
//!
//! which is the gradient flow of the potential `V_γ` plus noise. This crate
//! computes the stationary points of `V_γ` with their Hessian indices and
//! symmetry orbits, closed-form large-N predictions built from Jacobi
//! elliptic functions, the twist maps whose period-N orbits encode the
//! stationary points, and Monte Carlo estimates of the transition time
//! between the two synchronised minima.
//!
//! Modules:
//!
//! - [`elliptic`]: Jacobi elliptic integrals and functions (modulus κ).
//! - [`chain`]: the potential, its derivatives and the symmetry group G_N.
//! - [`twist`]: area-preserving twist maps, action–angle variables, periodic orbits.
//! - [`landscape`]: stationary-point census and the closed-form predictions.
//! - [`sde`]: Euler–Maruyama transitions and Arrhenius fits.
//!
//! With the default `parallel` feature, multi-start Newton solves and Monte
//! Carlo replicas run on rayon; without it everything runs sequentially and
//! produces identical results.

pub mod chain;
pub mod elliptic;
pub mod error;
pub mod exec;
pub mod landscape;
pub mod linalg;
pub mod precision;
pub mod rng;
pub mod sde;
pub mod twist;

pub use chain::{ChainConfig, CouplingParams, SymmetryElement};
pub use error::{Error, Result};
pub use exec::Execution;

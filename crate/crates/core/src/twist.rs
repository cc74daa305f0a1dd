//! Area-preserving twist maps whose period-N orbits are the stationary
//! chains, together with their action-angle coordinates.
//!
//! A stationary chain `x` lifts to the orbit `(x_n, w_n)` of [`map_t2`] with
//! `w_n = (x_{n+1} − x_{n−1}) / (2ε)`; see [`PeriodicOrbit::from_chain`].

use std::f64::consts::{PI, TAU};

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::chain::{drift_local, ChainConfig, CouplingParams};
use crate::elliptic::{ellip_f, jacobi_sn_cn_dn, EllipticBundle};
use crate::error::{Error, Result};

/// Energy levels at or above this are rejected by the action-angle maps.
pub const SEPARATRIX_GUARD: f64 = 0.2499;

/// `h(1/4) = 2√2/(3π)`, the action of the separatrix.
pub const SEPARATRIX_ACTION: f64 = 2.0 * std::f64::consts::SQRT_2 / (3.0 * PI);

const BISECTION_TOL: f64 = 1e-12;

/// A point `(x, w)` of the scaled map; serialized as `[x, w]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct PhaseState {
    pub x: f64,
    pub w: f64,
}

impl From<[f64; 2]> for PhaseState {
    fn from([x, w]: [f64; 2]) -> Self {
        Self { x, w }
    }
}

impl From<PhaseState> for [f64; 2] {
    fn from(s: PhaseState) -> Self {
        [s.x, s.w]
    }
}

impl PhaseState {
    pub fn new(x: f64, w: f64) -> Self {
        Self { x, w }
    }

    /// The almost conserved quantity `C = (x² + w²)/2 − x⁴/4`.
    pub fn energy(&self) -> f64 {
        energy(self.x, self.w)
    }

    fn dist(&self, other: &PhaseState) -> f64 {
        (self.x - other.x).abs().max((self.w - other.w).abs())
    }
}

/// Angle ψ ∈ [0, 2π) and action I.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionAngleState {
    pub psi: f64,
    #[serde(rename = "I")]
    pub action: f64,
}

pub fn energy(x: f64, w: f64) -> f64 {
    0.5 * (x * x + w * w) - 0.25 * x.powi(4)
}

#[inline]
fn drift_derivative(x: f64) -> f64 {
    1.0 - 3.0 * x * x
}

/// One step of the scaled map T₂.
pub fn map_t2(s: PhaseState, eps: f64) -> PhaseState {
    let fx = drift_local(s.x);
    let x1 = s.x + eps * s.w - 0.5 * eps * eps * fx;
    let w1 = s.w - 0.5 * eps * (fx + drift_local(x1));
    PhaseState { x: x1, w: w1 }
}

/// Inverse of [`map_t2`].
pub fn map_t2_inverse(s: PhaseState, eps: f64) -> PhaseState {
    let fx = drift_local(s.x);
    let x0 = s.x - eps * s.w - 0.5 * eps * eps * fx;
    let w0 = s.w + 0.5 * eps * (fx + drift_local(x0));
    PhaseState { x: x0, w: w0 }
}

/// Jacobian of [`map_t2`] at `s`, row-major.
pub fn jacobian_t2(s: PhaseState, eps: f64) -> Matrix2<f64> {
    let x1 = map_t2(s, eps).x;
    let dx_dx = 1.0 - 0.5 * eps * eps * drift_derivative(s.x);
    let dx_dw = eps;
    let fp1 = drift_derivative(x1);
    let dw_dx = -0.5 * eps * (drift_derivative(s.x) + fp1 * dx_dx);
    let dw_dw = 1.0 - 0.5 * eps * fp1 * dx_dw;
    Matrix2::new(dx_dx, dx_dw, dw_dx, dw_dw)
}

/// One step of T₁ in the unscaled variables `(x, u)`, `u = εw`.
pub fn map_t1(x: f64, u: f64, gamma: f64) -> (f64, f64) {
    let g = 1.0 / gamma;
    let fx = drift_local(x);
    let x1 = x + u - g * fx;
    (x1, u - g * (fx + drift_local(x1)))
}

/// Inverse of [`map_t1`]: the same map with `u` reflected.
pub fn map_t1_inverse(x: f64, u: f64, gamma: f64) -> (f64, f64) {
    let g = 1.0 / gamma;
    let fx = drift_local(x);
    let x0 = x - u - g * fx;
    (x0, u + g * (fx + drift_local(x0)))
}

/// One step of the original map in `(x, v)`, `v_n = x_n − x_{n−1}`.
pub fn map_original(x: f64, v: f64, gamma: f64) -> (f64, f64) {
    let v1 = v - 2.0 * drift_local(x) / gamma;
    (x + v1, v1)
}

pub fn map_original_inverse(x: f64, v: f64, gamma: f64) -> (f64, f64) {
    let x0 = x - v;
    (x0, v + 2.0 * drift_local(x0) / gamma)
}

fn check_energy(c: f64, upper_inclusive: bool) -> Result<()> {
    let ok = c.is_finite() && c >= 0.0 && (c < 0.25 || (upper_inclusive && c == 0.25));
    if ok {
        Ok(())
    } else {
        Err(Error::Domain { what: "energy level C", value: c })
    }
}

/// Frequency `Ω(C) = (b/√2)·π/(2K(κ))`; decreasing from Ω(0) = 1 to Ω(1/4) = 0.
pub fn omega_of_c(c: f64) -> Result<f64> {
    check_energy(c, true)?;
    if c == 0.25 {
        return Ok(0.0);
    }
    let e = EllipticBundle::from_energy(c)?;
    Ok(e.b / std::f64::consts::SQRT_2 * PI / (2.0 * e.big_k))
}

/// Action `h(C) = ∫₀^C dC′/Ω(C′)` in closed form.
pub fn h_of_c(c: f64) -> Result<f64> {
    check_energy(c, true)?;
    if c == 0.25 {
        return Ok(SEPARATRIX_ACTION);
    }
    let e = EllipticBundle::from_energy(c)?;
    let k2 = e.kappa * e.kappa;
    let num = (1.0 + k2) * e.big_e - (1.0 - k2) * e.big_k;
    Ok(4.0 / (3.0 * PI) * num / (1.0 + k2).powf(1.5))
}

fn bisect(mut lo: f64, mut hi: f64, increasing: bool, target: f64, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        let below = f(mid)? < target;
        if below == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `h⁻¹(I)` by bisection, I ∈ [0, h(1/4)].
pub fn c_of_h(action: f64) -> Result<f64> {
    if !(0.0..=SEPARATRIX_ACTION).contains(&action) {
        return Err(Error::Domain { what: "action I", value: action });
    }
    if action == 0.0 {
        return Ok(0.0);
    }
    bisect(0.0, 0.25, true, action, h_of_c)
}

/// `Ω⁻¹(ω)` by bisection, ω ∈ [0, 1].
pub fn c_of_omega(omega: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&omega) {
        return Err(Error::Domain { what: "frequency Ω", value: omega });
    }
    if omega == 1.0 {
        return Ok(0.0);
    }
    bisect(0.0, 0.25, false, omega, omega_of_c)
}

/// `Ω̄(I) = Ω(h⁻¹(I))`.
pub fn omega_bar(action: f64) -> Result<f64> {
    omega_of_c(c_of_h(action)?)
}

/// `Ω̄⁻¹(ω) = h(Ω⁻¹(ω))`.
pub fn omega_bar_inverse(omega: f64) -> Result<f64> {
    h_of_c(c_of_omega(omega)?)
}

/// `(x, w) ↦ (ψ, I)`.
pub fn to_action_angle(s: PhaseState) -> Result<ActionAngleState> {
    let c = s.energy();
    if !(c > 0.0 && c < SEPARATRIX_GUARD) {
        return Err(Error::OutOfSeparatrix { energy: c });
    }
    let e = EllipticBundle::from_energy(c)?;
    let sn = (s.x / e.a).clamp(-1.0, 1.0);
    let dn = (1.0 - e.kappa * e.kappa * sn * sn).sqrt();
    let cn = s.w / ((2.0 * c).sqrt() * dn);
    let am = sn.atan2(cn);
    let u = ellip_f(am, e.kappa)?;
    let psi = (PI * u / (2.0 * e.big_k)).rem_euclid(TAU);
    Ok(ActionAngleState { psi, action: h_of_c(c)? })
}

/// `(ψ, I) ↦ (x, w)`.
pub fn from_action_angle(s: ActionAngleState) -> Result<PhaseState> {
    if !(s.action >= 0.0 && s.action < SEPARATRIX_ACTION) || !s.psi.is_finite() {
        return Err(Error::Domain { what: "action I", value: s.action });
    }
    let c = c_of_h(s.action)?;
    if c >= SEPARATRIX_GUARD {
        return Err(Error::OutOfSeparatrix { energy: c });
    }
    Ok(phase_on_level(c, s.psi)?)
}

fn phase_on_level(c: f64, psi: f64) -> Result<PhaseState> {
    let e = EllipticBundle::from_energy(c)?;
    let f = jacobi_sn_cn_dn(2.0 * e.big_k * psi / PI, e.kappa)?;
    Ok(PhaseState { x: e.a * f.sn, w: (2.0 * c).sqrt() * f.cn * f.dn })
}

/// The map T = Φ∘T₂∘Φ⁻¹ in action-angle variables.
pub fn map_t(s: ActionAngleState, eps: f64) -> Result<ActionAngleState> {
    to_action_angle(map_t2(from_action_angle(s)?, eps))
}

/// Stability class of a periodic orbit from its residue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitClass {
    Hyperbolic,
    Parabolic,
    Elliptic,
    InverseHyperbolic,
}

pub fn classify_residue(r: f64) -> OrbitClass {
    if r < 0.0 {
        OrbitClass::Hyperbolic
    } else if r == 0.0 || r == 1.0 {
        OrbitClass::Parabolic
    } else if r < 1.0 {
        OrbitClass::Elliptic
    } else {
        OrbitClass::InverseHyperbolic
    }
}

/// A period-N orbit of T₂ with winding number M.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub residue: f64,
    pub states: Vec<PhaseState>,
}

impl PeriodicOrbit {
    /// Rotation number ν = M/N as the pair (M, N).
    pub fn rotation_number(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    /// Lifts a stationary chain to its orbit of T₂.
    pub fn from_chain(x: &ChainConfig, p: &CouplingParams) -> Result<Self> {
        if x.len() != p.n {
            return Err(Error::Dimension { expected: p.n, got: x.len() });
        }
        let eps = p.epsilon;
        let n = x.len() as isize;
        let states: Vec<PhaseState> = (0..n)
            .map(|i| PhaseState { x: x.site(i), w: (x.site(i + 1) - x.site(i - 1)) / (2.0 * eps) })
            .collect();
        let m = winding_number(&states)?;
        let mut orbit = Self { n: p.n, m, residue: f64::NAN, states };
        orbit.residue = residue(&orbit, eps)?;
        Ok(orbit)
    }

    /// The chain configuration `(x_1, …, x_N)` carried by the orbit.
    pub fn to_chain(&self) -> Result<ChainConfig> {
        ChainConfig::new(self.states.iter().map(|s| s.x).collect())
    }

    pub fn class(&self) -> OrbitClass {
        classify_residue(self.residue)
    }

    /// Actions `I_n` of the orbit points.
    pub fn actions(&self) -> Result<Vec<f64>> {
        self.states.iter().map(|s| Ok(to_action_angle(*s)?.action)).collect()
    }
}

/// Winding number `M = (1/2π) Σ (ψ_{n+1} − ψ_n mod 2π)` of a closed
/// sequence of states.
pub fn winding_number(states: &[PhaseState]) -> Result<usize> {
    let psi: Vec<f64> = states.iter().map(|s| Ok(to_action_angle(*s)?.psi)).collect::<Result<_>>()?;
    let n = psi.len();
    let total: f64 = (0..n).map(|i| (psi[(i + 1) % n] - psi[i]).rem_euclid(TAU)).sum();
    Ok((total / TAU).round() as usize)
}

/// Action predicted for period-N orbits of winding M: `Ω̄⁻¹(2πM/(Nε))`.
pub fn predicted_action(n: usize, m: usize, eps: f64) -> Result<f64> {
    let omega = TAU * m as f64 / (n as f64 * eps);
    if omega >= 1.0 {
        return Err(Error::NoOrbit { winding: m, value: omega * omega });
    }
    omega_bar_inverse(omega)
}

/// Continuum profile `(x_n, w_n)` at angles `ψ_n = ψ₀ + 2πMn/N` on the
/// predicted action level.
pub fn continuum_orbit(n: usize, m: usize, eps: f64, psi0: f64) -> Result<Vec<PhaseState>> {
    let c = c_of_h(predicted_action(n, m, eps)?)?;
    (0..n).map(|k| phase_on_level(c, psi0 + TAU * (m * k) as f64 / n as f64)).collect()
}

/// Seed for [`find_periodic_orbit`]: the continuum profile at ψ₀ = 0.
pub fn continuum_seed(n: usize, m: usize, eps: f64) -> Result<PhaseState> {
    Ok(continuum_orbit(n, m, eps, 0.0)?[0])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitSearch {
    pub max_iter: usize,
    /// Convergence threshold on `‖T₂^N(s) − s‖∞`.
    pub tol: f64,
    /// Singular values of `DT₂^N − I` below `svd_cut · σ_max` are dropped
    /// from the Newton step.
    pub svd_cut: f64,
    /// Residual accepted when no step along the Newton direction decreases it.
    pub floor: f64,
}

impl Default for OrbitSearch {
    fn default() -> Self {
        Self { max_iter: 60, tol: 1e-12, svd_cut: 1e-9, floor: 1e-9 }
    }
}

fn return_map(s: PhaseState, n: usize, eps: f64) -> (PhaseState, Matrix2<f64>) {
    let mut j = Matrix2::identity();
    let mut cur = s;
    for _ in 0..n {
        j = jacobian_t2(cur, eps) * j;
        cur = map_t2(cur, eps);
    }
    (cur, j)
}

/// Newton search for a period-N orbit of T₂ with winding number M.
pub fn find_periodic_orbit(n: usize, m: usize, eps: f64, seed: PhaseState) -> Result<PeriodicOrbit> {
    find_periodic_orbit_with(n, m, eps, seed, OrbitSearch::default()).map(|(o, _)| o)
}

/// As [`find_periodic_orbit`], also returning the number of Newton steps.
pub fn find_periodic_orbit_with(
    n: usize,
    m: usize,
    eps: f64,
    seed: PhaseState,
    opts: OrbitSearch,
) -> Result<(PeriodicOrbit, usize)> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument(format!("need N, M ≥ 1, got N = {n}, M = {m}")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Domain { what: "ε", value: eps });
    }
    let mut s = seed;
    let mut iterations = 0;
    loop {
        let (image, j) = return_map(s, n, eps);
        let f = nalgebra::Vector2::new(image.x - s.x, image.w - s.w);
        let res = f.amax();
        if !res.is_finite() {
            return Err(Error::NotFound("iterate diverged".into()));
        }
        if res <= opts.tol {
            break;
        }
        if iterations >= opts.max_iter {
            return Err(Error::NotFound(format!("no convergence after {iterations} Newton steps, residual {res:e}")));
        }
        let a = j - Matrix2::identity();
        let svd = a.svd(true, true);
        let smax = svd.singular_values.max();
        let step = svd
            .solve(&f, opts.svd_cut * smax)
            .map_err(|e| Error::NotFound(format!("singular return map: {e}")))?;
        let mut lambda = 1.0;
        let mut next = None;
        for _ in 0..30 {
            let trial = PhaseState { x: s.x - lambda * step[0], w: s.w - lambda * step[1] };
            let ti = return_map(trial, n, eps).0;
            let r = (ti.x - trial.x).abs().max((ti.w - trial.w).abs());
            if r.is_finite() && r < res {
                next = Some(trial);
                break;
            }
            lambda *= 0.5;
        }
        match next {
            Some(t) => s = t,
            // rounding floor of the N-fold return map
            None if res <= opts.floor => break,
            None => return Err(Error::NotFound(format!("line search stalled at residual {res:e}"))),
        }
        iterations += 1;
    }
    if s.energy() < 1e-10 {
        return Err(Error::NotFound("converged to the fixed point at the origin".into()));
    }
    let mut states = Vec::with_capacity(n);
    let mut cur = s;
    for _ in 0..n {
        states.push(cur);
        cur = map_t2(cur, eps);
    }
    let found = winding_number(&states).map_err(|e| Error::NotFound(format!("orbit leaves the bounded region: {e}")))?;
    if found != m {
        return Err(Error::WrongClass { found, expected: m, period: n });
    }
    let mut orbit = PeriodicOrbit { n, m, residue: f64::NAN, states };
    orbit.residue = residue(&orbit, eps)?;
    Ok((orbit, iterations))
}

/// Residue `R = (2 − tr DT₂^N)/4` of a closed orbit.
///
/// `R = −¼ (2/γ)^N det Hess V`, so odd Hessian index gives `R > 0` and even
/// index `R < 0`.
pub fn residue(orbit: &PeriodicOrbit, eps: f64) -> Result<f64> {
    let n = orbit.states.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty orbit".into()));
    }
    let mut worst: f64 = 0.0;
    let mut j = Matrix2::identity();
    for (k, s) in orbit.states.iter().enumerate() {
        let next = map_t2(*s, eps);
        worst = worst.max(next.dist(&orbit.states[(k + 1) % n]));
        j = jacobian_t2(*s, eps) * j;
    }
    if !(worst <= 1e-8) {
        return Err(Error::StaleOrbit { residual: worst });
    }
    Ok((2.0 - j.trace()) / 4.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_points() {
        for &eps in &[0.01, 0.3, 1.0] {
            for x in [-1.0, 0.0, 1.0] {
                assert_eq!(map_t2(PhaseState::new(x, 0.0), eps), PhaseState::new(x, 0.0));
                assert_eq!(map_t1(x, 0.0, 2.0 / (eps * eps)), (x, 0.0));
            }
        }
        assert_eq!(map_original(0.0, 0.0, 3.0), (0.0, 0.0));
    }

    #[test]
    fn inverses() {
        let s = PhaseState::new(0.31, -0.47);
        let back = map_t2_inverse(map_t2(s, 0.2), 0.2);
        assert!(back.dist(&s) < 1e-15);
        let (x, u) = map_t1(0.4, 0.1, 7.0);
        let (x0, u0) = map_t1_inverse(x, u, 7.0);
        assert!((x0 - 0.4).abs() < 1e-15 && (u0 - 0.1).abs() < 1e-15);
        let (x, v) = map_original(0.4, 0.1, 7.0);
        let (x0, v0) = map_original_inverse(x, v, 7.0);
        assert!((x0 - 0.4).abs() < 1e-15 && (v0 - 0.1).abs() < 1e-15);
    }

    #[test]
    fn jacobian_is_unimodular() {
        let j = jacobian_t2(PhaseState::new(0.7, 0.2), 0.4);
        assert!((j.determinant() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn frequency_and_action_endpoints() {
        assert!((omega_of_c(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(h_of_c(0.0).unwrap(), 0.0);
        assert_eq!(h_of_c(0.25).unwrap(), SEPARATRIX_ACTION);
        assert!((h_of_c(0.25 - 1e-12).unwrap() - SEPARATRIX_ACTION).abs() < 1e-6);
        assert!(omega_of_c(0.3).is_err());
        assert!(h_of_c(-0.1).is_err());
    }

    #[test]
    fn turning_point_is_quarter_period() {
        let c = 0.1;
        let e = EllipticBundle::from_energy(c).unwrap();
        let aa = to_action_angle(PhaseState::new(e.a, 0.0)).unwrap();
        assert!((aa.psi - PI / 2.0).abs() < 1e-9);
        let s = from_action_angle(ActionAngleState { psi: 0.0, action: h_of_c(c).unwrap() }).unwrap();
        assert!(s.x.abs() < 1e-12 && (s.w - (2.0 * c).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn separatrix_guard() {
        assert!(matches!(to_action_angle(PhaseState::new(1.0, 0.0)), Err(Error::OutOfSeparatrix { .. })));
        assert!(matches!(to_action_angle(PhaseState::new(0.0, 0.0)), Err(Error::OutOfSeparatrix { .. })));
        assert!(from_action_angle(ActionAngleState { psi: 0.0, action: 1.0 }).is_err());
    }

    #[test]
    fn residue_classes() {
        assert_eq!(classify_residue(-0.1), OrbitClass::Hyperbolic);
        assert_eq!(classify_residue(0.5), OrbitClass::Elliptic);
        assert_eq!(classify_residue(1.5), OrbitClass::InverseHyperbolic);
    }

    #[test]
    fn orbit_json_shape() {
        let o = PeriodicOrbit { n: 2, m: 1, residue: 0.5, states: vec![PhaseState::new(0.1, 0.2), PhaseState::new(-0.1, -0.2)] };
        let v = serde_json::to_value(&o).unwrap();
        assert_eq!(v["states"][1][0], -0.1);
        assert_eq!(v["N"], 2);
        let back: PeriodicOrbit = serde_json::from_value(v).unwrap();
        assert_eq!(back, o);
    }
}

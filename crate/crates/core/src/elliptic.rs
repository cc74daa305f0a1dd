//! Jacobi elliptic integrals and functions.
//!
//! Every function here takes the *modulus* `kappa` (κ), not the parameter
//! `m = κ²` used by many libraries. `ellip_k(0.5)` is K at κ = 0.5, which
//! other packages would call `K(m = 0.25)`.
//!
//! Complete integrals use the arithmetic–geometric mean, the incomplete
//! integral of the first kind uses Carlson's symmetric form `R_F`, and the
//! amplitude `am(u, κ)` is obtained by descending Landen (AGM) recursion.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const AGM_TOL: f64 = 1e-16;
const AGM_MAX_ITER: usize = 64;

fn check_modulus(kappa: f64, allow_one: bool, what: &'static str) -> Result<()> {
    let ok = kappa.is_finite() && kappa >= 0.0 && (kappa < 1.0 || (allow_one && kappa == 1.0));
    if ok {
        Ok(())
    } else {
        Err(Error::Domain { what, value: kappa })
    }
}

/// Complementary modulus √(1−κ²), computed without cancellation.
#[inline]
pub fn complement(kappa: f64) -> f64 {
    ((1.0 - kappa) * (1.0 + kappa)).max(0.0).sqrt()
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() <= AGM_TOL * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    0.5 * (a + b)
}

/// K expressed through the complementary modulus, `K = π / (2·agm(1, κ'))`.
/// Used for `K(√(1−κ²))` in the nome, where forming `√(1−κ'²)` would cancel.
fn k_from_complement(kappa_prime: f64) -> f64 {
    PI / (2.0 * agm(1.0, kappa_prime))
}

/// Complete elliptic integral of the first kind K(κ), κ ∈ [0, 1).
pub fn ellip_k(kappa: f64) -> Result<f64> {
    check_modulus(kappa, false, "ellip_k modulus")?;
    Ok(k_from_complement(complement(kappa)))
}

/// Complete elliptic integral of the second kind E(κ), κ ∈ [0, 1].
pub fn ellip_e(kappa: f64) -> Result<f64> {
    check_modulus(kappa, true, "ellip_e modulus")?;
    if kappa == 1.0 {
        return Ok(1.0);
    }
    if kappa == 0.0 {
        return Ok(FRAC_PI_2);
    }
    let (mut a, mut b) = (1.0, complement(kappa));
    let mut sum = 0.5 * kappa * kappa;
    let mut weight = 0.5;
    for _ in 0..AGM_MAX_ITER {
        let c = 0.5 * (a - b);
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
        weight *= 2.0;
        sum += weight * c * c;
        if c.abs() <= AGM_TOL * a {
            break;
        }
    }
    Ok(PI / (2.0 * a) * (1.0 - sum))
}

/// Carlson's symmetric integral R_F(x, y, z) by duplication.
fn carlson_rf(mut x: f64, mut y: f64, mut z: f64) -> f64 {
    // (3·1e-16)^(-1/6): duplication stops once the fifth-order series is exact.
    const SPREAD: f64 = 396.0;
    let (x0, y0) = (x, y);
    let a0 = (x + y + z) / 3.0;
    let mut mean = a0;
    let mut q = SPREAD * (a0 - x).abs().max((a0 - y).abs()).max((a0 - z).abs());
    let mut scale = 1.0;
    while q > mean.abs() {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * sy + sx * sz + sy * sz;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
        mean = 0.25 * (mean + lambda);
        q *= 0.25;
        scale *= 0.25;
    }
    let dx = (a0 - x0) * scale / mean;
    let dy = (a0 - y0) * scale / mean;
    let dz = -(dx + dy);
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / mean.sqrt()
}

/// Incomplete elliptic integral of the first kind F(φ, κ).
///
/// Odd in φ and quasi-periodic: F(φ + π, κ) = F(φ, κ) + 2K(κ).
pub fn ellip_f(phi: f64, kappa: f64) -> Result<f64> {
    check_modulus(kappa, false, "ellip_f modulus")?;
    if !phi.is_finite() {
        return Err(Error::Domain { what: "ellip_f amplitude", value: phi });
    }
    let turns = (phi / PI).round();
    let reduced = phi - turns * PI;
    let (s, c) = reduced.sin_cos();
    let k2 = kappa * kappa;
    let partial = s * carlson_rf(c * c, (1.0 - k2 * s * s).max(0.0), 1.0);
    if turns == 0.0 {
        Ok(partial)
    } else {
        Ok(2.0 * turns * ellip_k(kappa)? + partial)
    }
}

/// Descending Landen recursion. Returns (am, dn).
fn amplitude_landen(u: f64, kappa: f64) -> (f64, f64) {
    if kappa == 0.0 {
        return (u, 1.0);
    }
    let kp = complement(kappa);
    if kp == 0.0 {
        // κ = 1: sn = tanh, cn = dn = sech.
        let gd = 2.0 * (u / 2.0).tanh().atan();
        return (gd, 1.0 / u.cosh());
    }
    let mut a = [0.0_f64; AGM_MAX_ITER + 1];
    let mut c = [0.0_f64; AGM_MAX_ITER + 1];
    a[0] = 1.0;
    c[0] = kappa;
    let mut b = kp;
    let mut n = 0;
    while c[n].abs() > AGM_TOL * a[n] && n < AGM_MAX_ITER {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
    }
    let mut phi = (2.0_f64).powi(n as i32) * a[n] * u;
    for i in (1..=n).rev() {
        phi = 0.5 * (phi + (c[i] / a[i] * phi.sin()).asin());
    }
    // dn² = cn² + κ′² sn² has no cancellation near the turning point
    let (s, c) = phi.sin_cos();
    let dn = (c * c + kp * kp * s * s).sqrt();
    (phi, dn)
}

/// Jacobi amplitude am(u, κ), the inverse of `u = F(φ, κ)`.
pub fn jacobi_am(u: f64, kappa: f64) -> Result<f64> {
    check_modulus(kappa, true, "jacobi_am modulus")?;
    if !u.is_finite() {
        return Err(Error::Domain { what: "jacobi_am argument", value: u });
    }
    Ok(amplitude_landen(u, kappa).0)
}

/// The triple (sn, cn, dn) at (u, κ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnCnDn {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

/// Jacobi elliptic functions sn, cn, dn.
pub fn jacobi_sn_cn_dn(u: f64, kappa: f64) -> Result<SnCnDn> {
    check_modulus(kappa, true, "jacobi modulus")?;
    if !u.is_finite() {
        return Err(Error::Domain { what: "jacobi argument", value: u });
    }
    let (phi, dn) = amplitude_landen(u, kappa);
    let (sn, cn) = phi.sin_cos();
    Ok(SnCnDn { sn, cn, dn })
}

/// Elliptic nome q(κ) = exp(−π K(√(1−κ²)) / K(κ)).
pub fn elliptic_nome(kappa: f64) -> Result<f64> {
    check_modulus(kappa, false, "elliptic_nome modulus")?;
    if kappa == 0.0 {
        return Ok(0.0);
    }
    // π K(κ')/K(κ) = π agm(1, κ') / agm(1, κ)
    let ratio = agm(1.0, complement(kappa)) / agm(1.0, kappa);
    Ok((-PI * ratio).exp())
}

/// Partial sum with `n_terms` terms of the sine series of
/// `(2K/π)·sn(2Kψ/π, κ)` in powers of the nome.
pub fn sn_fourier_series(psi: f64, kappa: f64, n_terms: usize) -> Result<f64> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::Domain { what: "sn_fourier_series modulus", value: kappa });
    }
    if n_terms == 0 {
        return Err(Error::InvalidArgument("n_terms must be at least 1".into()));
    }
    let q = elliptic_nome(kappa)?;
    let mut sum = 0.0;
    for p in 0..n_terms {
        let odd = (2 * p + 1) as f64;
        let qp = q.powf(odd / 2.0);
        sum += qp / (1.0 - q.powf(odd)) * (odd * psi).sin();
    }
    Ok(4.0 / kappa * sum)
}

/// Coefficient of `cos(2pψ)` in the cosine series of
/// `(2K/π)^{2k} sn^{2k}(2Kψ/π, κ)` for `2k ∈ {2, 4, 6}`.
///
/// For `p ≥ 1` this is `ĉ_{2k,p}·q^p/(1−q^{2p})` with the closed-form `ĉ`.
/// The constant term (`p = 0`) has no closed form here and is obtained by
/// averaging the function over one period with the trapezoidal rule, which
/// converges geometrically for this analytic periodic integrand.
pub fn sn_power_fourier_coeff(k: u32, p: u32, kappa: f64) -> Result<f64> {
    if !(1..=3).contains(&k) {
        return Err(Error::Unsupported(format!("sn power 2k = {} (supported: 2, 4, 6)", 2 * k)));
    }
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(Error::Domain { what: "sn_power_fourier_coeff modulus", value: kappa });
    }
    let big_k = ellip_k(kappa)?;
    let t = 2.0 * big_k / PI;
    if p == 0 {
        const SAMPLES: usize = 1024;
        let mut acc = 0.0;
        for i in 0..SAMPLES {
            let psi = PI * i as f64 / SAMPLES as f64;
            let sn = jacobi_sn_cn_dn(t * psi, kappa)?.sn;
            acc += (t * sn).powi(2 * k as i32);
        }
        return Ok(acc / SAMPLES as f64);
    }
    let q = elliptic_nome(kappa)?;
    let tp = 2.0 * p as f64;
    let k2 = kappa * kappa;
    let t2 = t * t;
    let c_hat = match k {
        1 => -4.0 / k2 * tp,
        2 => 4.0 / (6.0 * k2 * k2) * (tp.powi(3) - 4.0 * tp * (1.0 + k2) * t2),
        _ => {
            -4.0 / (120.0 * k2 * k2 * k2)
                * (tp.powi(5) - 20.0 * tp.powi(3) * (1.0 + k2) * t2
                    + 8.0 * tp * (8.0 + 7.0 * k2 + 8.0 * k2 * k2) * t2 * t2)
        }
    };
    let qp = q.powi(p as i32);
    Ok(c_hat * qp / (1.0 - qp * qp))
}

/// All elliptic quantities attached to one shape parameter κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticBundle {
    pub kappa: f64,
    /// Conserved energy level C = κ²/(1+κ²)².
    #[serde(rename = "C")]
    pub energy: f64,
    /// Amplitude a, a² = 2κ²/(1+κ²).
    pub a: f64,
    /// Outer root b, b² = 2/(1+κ²).
    pub b: f64,
    #[serde(rename = "K")]
    pub big_k: f64,
    #[serde(rename = "E")]
    pub big_e: f64,
    pub nome: f64,
}

impl EllipticBundle {
    pub fn from_kappa(kappa: f64) -> Result<Self> {
        check_modulus(kappa, false, "bundle modulus")?;
        let k2 = kappa * kappa;
        Ok(Self {
            kappa,
            energy: k2 / ((1.0 + k2) * (1.0 + k2)),
            a: (2.0 * k2 / (1.0 + k2)).sqrt(),
            b: (2.0 / (1.0 + k2)).sqrt(),
            big_k: ellip_k(kappa)?,
            big_e: ellip_e(kappa)?,
            nome: elliptic_nome(kappa)?,
        })
    }

    /// Bundle for the energy level C ∈ [0, 1/4).
    pub fn from_energy(energy: f64) -> Result<Self> {
        if !(0.0..0.25).contains(&energy) {
            return Err(Error::Domain { what: "energy level C", value: energy });
        }
        let root = (1.0 - 4.0 * energy).sqrt();
        // a² = 1 − √(1−4C) = 4C / (1 + √(1−4C)) avoids cancellation at small C.
        let a = (4.0 * energy / (1.0 + root)).sqrt();
        let b = (1.0 + root).sqrt();
        let kappa = a / b;
        Ok(Self {
            kappa,
            energy,
            a,
            b,
            big_k: ellip_k(kappa)?,
            big_e: ellip_e(kappa)?,
            nome: elliptic_nome(kappa)?,
        })
    }
}

/// Maximum errors of the identity battery run by `ell-selftest`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelfTestReport {
    pub pythagorean: f64,
    pub dn_identity: f64,
    pub periodicity: f64,
    pub derivative: f64,
    pub am_round_trip: f64,
    pub special_values: f64,
    pub e_le_k_violations: usize,
}

impl SelfTestReport {
    pub fn passed(&self) -> bool {
        self.pythagorean <= 1e-10
            && self.dn_identity <= 1e-10
            && self.periodicity <= 1e-9
            && self.derivative <= 1e-6
            && self.am_round_trip <= 1e-10
            && self.special_values <= 1e-12
            && self.e_le_k_violations == 0
    }
}

/// Runs the identity battery on a `grid × grid` lattice of (u, κ) with
/// κ ∈ [0, 0.999] and u ∈ [−2K, 6K].
pub fn identity_battery(grid: usize) -> Result<SelfTestReport> {
    let grid = grid.max(2);
    let mut rep = SelfTestReport {
        pythagorean: 0.0,
        dn_identity: 0.0,
        periodicity: 0.0,
        derivative: 0.0,
        am_round_trip: 0.0,
        special_values: 0.0,
        e_le_k_violations: 0,
    };
    let h = 1e-5;
    for i in 0..grid {
        let kappa = 0.999 * i as f64 / (grid - 1) as f64;
        let big_k = ellip_k(kappa)?;
        let big_e = ellip_e(kappa)?;
        if big_e > big_k || (kappa > 0.0 && big_e == big_k) {
            rep.e_le_k_violations += 1;
        }
        for j in 0..grid {
            let u = -2.0 * big_k + 8.0 * big_k * j as f64 / (grid - 1) as f64;
            let f = jacobi_sn_cn_dn(u, kappa)?;
            rep.pythagorean = rep.pythagorean.max((f.sn * f.sn + f.cn * f.cn - 1.0).abs());
            rep.dn_identity = rep
                .dn_identity
                .max((f.dn * f.dn + kappa * kappa * f.sn * f.sn - 1.0).abs());
            let shifted = jacobi_sn_cn_dn(u + 4.0 * big_k, kappa)?;
            rep.periodicity = rep.periodicity.max((shifted.sn - f.sn).abs());
            let fp = jacobi_sn_cn_dn(u + h, kappa)?;
            let fm = jacobi_sn_cn_dn(u - h, kappa)?;
            let d_sn = (fp.sn - fm.sn) / (2.0 * h) - f.cn * f.dn;
            let d_cn = (fp.cn - fm.cn) / (2.0 * h) + f.sn * f.dn;
            let d_dn = (fp.dn - fm.dn) / (2.0 * h) + kappa * kappa * f.sn * f.cn;
            rep.derivative = rep.derivative.max(d_sn.abs()).max(d_cn.abs()).max(d_dn.abs());
            let phi = -PI + 3.0 * PI * j as f64 / (grid - 1) as f64;
            let back = jacobi_am(ellip_f(phi, kappa)?, kappa)?;
            rep.am_round_trip = rep.am_round_trip.max((back - phi).abs());
        }
    }
    rep.special_values = (ellip_k(0.0)? - FRAC_PI_2)
        .abs()
        .max((ellip_e(0.0)? - FRAC_PI_2).abs())
        .max((ellip_e(1.0)? - 1.0).abs());
    Ok(rep)
}

//! Newton refinement of stationary points.
//!
//! The A and B saddles lie on a valley whose Hessian eigenvalue along the
//! translation direction decays exponentially in N (≈1e-9 at N = 16,
//! ≈6e-24 at N = 32 for γ̃ = 0.8). Plain `f64` Newton converges somewhere on
//! that valley. Such points are pulled onto the fixed space of a mirror
//! involution, which removes the translation direction, solved there, then
//! polished and index-counted in double-double arithmetic.

use serde::{Deserialize, Serialize};

use crate::chain::{gradient_raw, hessian_raw, potential_raw, sup_distance, ChainConfig, CouplingParams, SymmetryElement};
use crate::linalg;
use crate::precision::{Real, TwoFloat};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Convergence threshold on `‖∇V‖∞`.
    pub grad_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { max_iter: 200, grad_tol: 1e-10 }
    }
}

/// Hessian inertia at a refined point. `unresolved` eigenvalues could not be
/// separated from zero even in double-double arithmetic; the true index is
/// then somewhere in `negative ..= negative + unresolved`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexInfo {
    pub negative: usize,
    pub unresolved: usize,
}

impl IndexInfo {
    pub fn is_resolved(&self) -> bool {
        self.unresolved == 0
    }

    pub fn may_be(&self, k: usize) -> bool {
        (self.negative..=self.negative + self.unresolved).contains(&k)
    }

    pub fn label(&self) -> String {
        if self.unresolved == 0 {
            self.negative.to_string()
        } else {
            format!("{}-{}", self.negative, self.negative + self.unresolved)
        }
    }
}

/// A stationary point with its value, gradient norm and index.
#[derive(Debug, Clone, PartialEq)]
pub struct Refined {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub index: IndexInfo,
    /// Mirror involution whose fixed space the final solve ran in.
    pub symmetry: Option<SymmetryElement>,
}

fn grad_inf(x: &[f64], gamma: f64, buf: &mut [f64]) -> f64 {
    gradient_raw(x, gamma, buf);
    buf.iter().fold(0.0, |m, v| m.max(v.abs()))
}

fn grad_l2(x: &[f64], gamma: f64, buf: &mut [f64]) -> f64 {
    gradient_raw(x, gamma, buf);
    buf.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Damped Newton in the full space with backtracking on `‖∇V‖₂`.
/// Returns the last iterate and whether `‖∇V‖∞ ≤ grad_tol` was reached.
pub fn newton_full(x0: &[f64], gamma: f64, opts: NewtonOptions) -> (Vec<f64>, bool) {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut g = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut norm = grad_l2(&x, gamma, &mut g);
    let mut polish = 0;
    for _ in 0..opts.max_iter {
        if !norm.is_finite() {
            return (x, false);
        }
        if g.iter().fold(0.0_f64, |m, v| m.max(v.abs())) <= opts.grad_tol {
            // a couple of extra steps take the iterate to roundoff level
            polish += 1;
            if polish > 2 || norm == 0.0 {
                return (x, true);
            }
        }
        let mut h = hessian_raw(&x, gamma);
        let mut step = g.clone();
        if linalg::solve(&mut h, n, &mut step).is_none() {
            let mut h = hessian_raw(&x, gamma);
            let shift = 1e-8 * linalg::norm_inf(&h, n).max(1.0);
            for i in 0..n {
                h[i * n + i] += shift;
            }
            step.copy_from_slice(&g);
            if linalg::solve(&mut h, n, &mut step).is_none() {
                return (x, false);
            }
        }
        let cap = step.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut lambda = if cap > 2.0 { 2.0 / cap } else { 1.0 };
        let mut accepted = false;
        let mut trial = x.clone();
        for _ in 0..40 {
            for i in 0..n {
                trial[i] = x[i] - lambda * step[i];
            }
            let t = grad_l2(&trial, gamma, &mut scratch);
            if t < norm {
                accepted = true;
                norm = t;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            let conv = g.iter().fold(0.0_f64, |m, v| m.max(v.abs())) <= opts.grad_tol;
            return (x, conv);
        }
        x.copy_from_slice(&trial);
        gradient_raw(&x, gamma, &mut g);
    }
    let conv = g.iter().fold(0.0_f64, |m, v| m.max(v.abs())) <= opts.grad_tol;
    (x, conv)
}

/// Column of the fixed-space basis of an involution: `e_i + sign·e_j`, or
/// `e_i` alone when `j` is `None`.
#[derive(Debug, Clone, Copy)]
struct Column {
    i: usize,
    j: Option<usize>,
    sign: f64,
}

/// Basis of Fix(g) and the sites forced to zero.
fn fixed_space(g: SymmetryElement, n: usize) -> (Vec<Column>, Vec<usize>) {
    let mut seen = vec![false; n];
    let mut cols = Vec::new();
    let mut zeros = Vec::new();
    let s = g.sign();
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let j = g.source(i, n);
        seen[i] = true;
        seen[j] = true;
        if j == i {
            if s > 0.0 {
                cols.push(Column { i, j: None, sign: 1.0 });
            } else {
                zeros.push(i);
            }
        } else {
            cols.push(Column { i, j: Some(j), sign: s });
        }
    }
    (cols, zeros)
}

/// Orthogonal projection `(x + g·x)/2` onto Fix(g).
pub fn project(x: &[f64], g: SymmetryElement) -> Vec<f64> {
    let gx = g.apply_slice(x);
    x.iter().zip(&gx).map(|(a, b)| 0.5 * (a + b)).collect()
}

/// The mirror involution whose fixed space is closest to `x` in sup-norm.
pub fn nearest_mirror(x: &[f64]) -> (SymmetryElement, f64) {
    let n = x.len();
    let mut best = (SymmetryElement::mirror(), f64::INFINITY);
    for negated in [false, true] {
        for r in 0..n {
            let g = SymmetryElement { rotation_power: r, mirrored: true, negated };
            let d = sup_distance(&g.apply_slice(x), x);
            if d < best.1 {
                best = (g, d);
            }
        }
    }
    best
}

/// One Newton step restricted to Fix(g), in arithmetic `T`. Returns the
/// sup-norm of the step, or `None` if the reduced Hessian is singular.
fn symmetric_step<T: Real>(x: &mut [T], gamma: T, cols: &[Column]) -> Option<f64> {
    let n = x.len();
    let k = cols.len();
    let mut g = vec![T::zero(); n];
    gradient_raw(x, gamma, &mut g);
    let h = hessian_raw(x, gamma);
    let mut rg = vec![T::zero(); k];
    let mut rh = vec![T::zero(); k * k];
    for (a, ca) in cols.iter().enumerate() {
        let sa = T::from_f64(ca.sign);
        rg[a] = match ca.j {
            Some(j) => g[ca.i] + sa * g[j],
            None => g[ca.i],
        };
        for (b, cb) in cols.iter().enumerate() {
            let sb = T::from_f64(cb.sign);
            let mut v = h[ca.i * n + cb.i];
            if let Some(l) = cb.j {
                v = v + sb * h[ca.i * n + l];
            }
            if let Some(j) = ca.j {
                v = v + sa * h[j * n + cb.i];
                if let Some(l) = cb.j {
                    v = v + sa * sb * h[j * n + l];
                }
            }
            rh[a * k + b] = v;
        }
    }
    linalg::solve(&mut rh, k, &mut rg)?;
    let mut size: f64 = 0.0;
    for (a, c) in cols.iter().enumerate() {
        let y = rg[a];
        size = size.max(y.to_f64().abs());
        x[c.i] = x[c.i] - y;
        if let Some(j) = c.j {
            x[j] = x[j] - T::from_f64(c.sign) * y;
        }
    }
    Some(size)
}

/// Newton in Fix(g) from the projection of `x0`, first in `f64`, then
/// polished in double-double. Returns the double-double point.
pub fn newton_symmetric(x0: &[f64], gamma: f64, g: SymmetryElement, opts: NewtonOptions) -> Option<Vec<TwoFloat>> {
    let n = x0.len();
    let (cols, zeros) = fixed_space(g, n);
    let mut x = project(x0, g);
    for &z in &zeros {
        x[z] = 0.0;
    }
    let mut buf = vec![0.0; n];
    let mut converged = false;
    let mut best = grad_inf(&x, gamma, &mut buf);
    for _ in 0..opts.max_iter {
        let prev = x.clone();
        let size = symmetric_step(&mut x, gamma, &cols)?;
        let r = grad_inf(&x, gamma, &mut buf);
        if !r.is_finite() || size > 4.0 {
            return None;
        }
        if r > 10.0 * best && best < 1e-3 {
            // roundoff floor reached
            x = prev;
            converged = best <= opts.grad_tol;
            break;
        }
        best = best.min(r);
        if r <= opts.grad_tol && size < 1e-12 {
            converged = true;
            break;
        }
    }
    if !converged && best > opts.grad_tol {
        return None;
    }
    let mut xd: Vec<TwoFloat> = x.iter().map(|&v| TwoFloat::from_f64(v)).collect();
    let gd = TwoFloat::from_f64(gamma);
    for _ in 0..3 {
        let size = symmetric_step(&mut xd, gd, &cols)?;
        if size < 1e-30 {
            break;
        }
    }
    Some(xd)
}

/// Full-space inertia in double-double at a double-double point.
pub fn inertia_dd(x: &[TwoFloat], gamma: f64) -> IndexInfo {
    let n = x.len();
    let h = hessian_raw(x, TwoFloat::from_f64(gamma));
    let tol = 1e-26 * linalg::norm_inf(&h, n).max(1.0);
    let inr = linalg::inertia(&h, n, tol);
    IndexInfo { negative: inr.negative, unresolved: inr.unresolved }
}

fn f64_index(x: &[f64], gamma: f64) -> IndexInfo {
    let n = x.len();
    let h = hessian_raw(x, gamma);
    let tol = crate::chain::default_index_tol(&h, n);
    let ev = linalg::symmetric_eigenvalues(&h, n);
    IndexInfo {
        negative: ev.iter().filter(|&&e| e < -tol).count(),
        unresolved: ev.iter().filter(|&&e| e.abs() <= tol).count(),
    }
}

fn finish_dd(xd: Vec<TwoFloat>, gamma: f64, g: SymmetryElement) -> Refined {
    let x: Vec<f64> = xd.iter().map(|v| v.to_f64()).collect();
    let mut buf = vec![0.0; x.len()];
    let grad_norm = grad_inf(&x, gamma, &mut buf);
    Refined {
        value: potential_raw(&x, gamma),
        grad_norm,
        index: inertia_dd(&xd, gamma),
        x,
        symmetry: Some(g),
    }
}

/// Refines `x0` within the fixed space of the involution `g`.
pub fn refine_in(x0: &[f64], p: &CouplingParams, g: SymmetryElement, opts: NewtonOptions) -> Option<Refined> {
    if !g.is_involution(x0.len()) {
        return None;
    }
    newton_symmetric(x0, p.gamma, g, opts).map(|xd| finish_dd(xd, p.gamma, g))
}

/// Refines `x0` in the mirror fixed space nearest to it.
pub fn refine_symmetric(x0: &[f64], p: &CouplingParams, opts: NewtonOptions) -> Option<Refined> {
    let (g, _) = nearest_mirror(x0);
    refine_in(x0, p, g, opts)
}

/// Full pipeline for one seed: damped Newton, then a symmetric solve with
/// double-double inertia when the `f64` Hessian is degenerate or the full
/// solve stalls.
pub fn refine(x0: &[f64], p: &CouplingParams, opts: NewtonOptions) -> Option<Refined> {
    let gamma = p.gamma;
    let (x, converged) = newton_full(x0, gamma, opts);
    if x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    if converged {
        let index = f64_index(&x, gamma);
        if index.is_resolved() {
            let mut buf = vec![0.0; x.len()];
            return Some(Refined {
                grad_norm: grad_inf(&x, gamma, &mut buf),
                value: potential_raw(&x, gamma),
                index,
                x,
                symmetry: None,
            });
        }
    }
    let start = if x.iter().all(|v| v.abs() < 10.0) { x } else { x0.to_vec() };
    refine_symmetric(&start, p, opts)
}

/// The point after one more refinement step of the same kind that produced
/// it; used to check that census points are fixed points of the solver.
pub fn newton_step(r: &Refined, p: &CouplingParams) -> Option<Vec<f64>> {
    let n = r.x.len();
    match r.symmetry {
        Some(g) => {
            let (cols, _) = fixed_space(g, n);
            let mut x = r.x.clone();
            symmetric_step(&mut x, p.gamma, &cols)?;
            Some(x)
        }
        None => {
            let mut h = hessian_raw(&r.x, p.gamma);
            let mut g = vec![0.0; n];
            gradient_raw(&r.x, p.gamma, &mut g);
            linalg::solve(&mut h, n, &mut g)?;
            Some(r.x.iter().zip(&g).map(|(a, b)| a - b).collect())
        }
    }
}

impl Refined {
    pub fn config(&self) -> ChainConfig {
        ChainConfig::from_vec_unchecked(self.x.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_space_dimensions() {
        // plain mirror on N = 6: three pairs
        let (c, z) = fixed_space(SymmetryElement::mirror(), 6);
        assert_eq!((c.len(), z.len()), (3, 0));
        // odd N: one fixed site
        let (c, z) = fixed_space(SymmetryElement::mirror(), 5);
        assert_eq!((c.len(), z.len()), (3, 0));
        let neg = SymmetryElement { negated: true, ..SymmetryElement::mirror() };
        let (c, z) = fixed_space(neg, 5);
        assert_eq!((c.len(), z.len()), (2, 1));
    }

    #[test]
    fn projection_is_fixed() {
        let x = [0.3, -0.2, 0.9, 0.1, -0.7];
        for g in SymmetryElement::all(5).into_iter().filter(|g| g.mirrored) {
            let y = project(&x, g);
            assert!(sup_distance(&g.apply_slice(&y), &y) < 1e-15);
        }
    }

    #[test]
    fn special_points_refine_to_themselves() {
        let p = CouplingParams::from_gamma_tilde(8, 0.8).unwrap();
        let r = refine(&[0.9; 8], &p, NewtonOptions::default()).unwrap();
        assert!(r.x.iter().all(|v| (v - 1.0).abs() < 1e-14));
        assert_eq!(r.index, IndexInfo { negative: 0, unresolved: 0 });
        let r = refine(&[0.0; 8], &p, NewtonOptions::default()).unwrap();
        assert_eq!(r.index.negative, 3);
    }
}

//! Stationary points of `V_γ`: closed-form large-N predictions and the
//! multi-start Newton census that checks them.

mod newton;
mod patterns;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{bifurcation_gammas, one_minus_cos, sup_distance, ChainConfig, CouplingParams, SymmetryElement};
use crate::elliptic::{ellip_e, ellip_k, jacobi_sn_cn_dn};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::rng;

pub use newton::{
    inertia_dd, nearest_mirror, newton_full, newton_step, newton_symmetric, project, refine, refine_in,
    refine_symmetric, IndexInfo, NewtonOptions, Refined,
};
pub use patterns::{class_distance, class_residual, has_class, SaddleKind};

fn gammat_of_kappa(kappa: f64) -> Result<f64> {
    let k = ellip_k(kappa)?;
    Ok(PI * PI / (4.0 * k * k * (1.0 + kappa * kappa)))
}

/// The κ ∈ [0, 1) with `γ̃ = π² / (4K(κ)²(1+κ²))`, by bisection.
pub fn kappa_from_gammat(gammat: f64) -> Result<f64> {
    if !(gammat > 0.0 && gammat <= 1.0) {
        return Err(Error::Domain { what: "rescaled coupling γ̃ (need 0 < γ̃ ≤ 1)", value: gammat });
    }
    if gammat == 1.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 1.0 - f64::EPSILON / 2.0;
    if gammat_of_kappa(hi)? > gammat {
        return Err(Error::Domain { what: "rescaled coupling γ̃ (below f64 resolution of κ)", value: gammat });
    }
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if gammat_of_kappa(mid)? > gammat {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn bracket(kappa: f64) -> Result<f64> {
    let k2 = kappa * kappa;
    let big_k = ellip_k(kappa)?;
    let big_e = ellip_e(kappa)?;
    Ok(((2.0 + k2) / (1.0 + k2) - 2.0 * big_e / big_k) / (3.0 * (1.0 + k2)))
}

/// Leading-order `V(A^{(M)})/N` for a winding-M saddle.
pub fn potential_per_site(m: usize, gammat: f64) -> Result<f64> {
    let arg = (m * m) as f64 * gammat;
    if m == 0 {
        return Err(Error::InvalidArgument("winding number must be positive".into()));
    }
    if arg > 1.0 {
        return Err(Error::NoOrbit { winding: m, value: arg });
    }
    Ok(-bracket(kappa_from_gammat(arg)?)?)
}

/// Large-N barrier per site `(V(A) − V(I±))/N`.
pub fn barrier_height(gammat: f64) -> Result<f64> {
    Ok(0.25 - bracket(kappa_from_gammat(gammat)?)?)
}

/// Largest M with `γ̃ < γ̃_M` (0 in the synchronised regime γ̃ ≥ 1).
pub fn window_index(n: usize, gammat: f64) -> usize {
    let base = one_minus_cos(1, n);
    (1..=n / 2).take_while(|&m| gammat < base / one_minus_cos(m, n)).count()
}

/// Distance from γ̃ to the nearest bifurcation value γ̃_M.
pub fn bifurcation_distance(n: usize, gammat: f64) -> f64 {
    bifurcation_gammas(n, n / 2)
        .map(|g| g.iter().map(|v| (v - gammat).abs()).fold(f64::INFINITY, f64::min))
        .unwrap_or(f64::INFINITY)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Predicted `|S| = 3 + Σ_{m ≤ M} 4N/gcd(N, 2m)` in window M.
pub fn predicted_count(n: usize, window: usize) -> usize {
    3 + (1..=window).map(|m| 4 * n / gcd(n, 2 * m)).sum::<usize>()
}

/// Predicted size of the orbit of A^{(m)} (and of B^{(m)}).
pub fn predicted_orbit_size(n: usize, m: usize) -> usize {
    2 * n / gcd(n, 2 * m)
}

/// Closed-form A or B saddle of winding `m`.
///
/// Requires γ̃ < γ̃_m. When `m²γ̃ ≥ 1` (possible at small N, where γ̃_m
/// exceeds 1/m²) the elliptic profile does not exist and the linear mode
/// with amplitude `ρ² = (4/3)(1 − γ̃/γ̃_m)` is returned instead.
pub fn predicted_saddle(n: usize, gammat: f64, kind: SaddleKind, m: usize) -> Result<ChainConfig> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("N must be at least 2, got {n}")));
    }
    if m == 0 || 2 * m > n {
        return Err(Error::InvalidArgument(format!("winding M = {m} outside 1..=N/2 for N = {n}")));
    }
    if !(gammat > 0.0 && gammat.is_finite()) {
        return Err(Error::Domain { what: "rescaled coupling γ̃", value: gammat });
    }
    let gm = one_minus_cos(1, n) / one_minus_cos(m, n);
    if gammat >= gm {
        return Err(Error::Window(format!("γ̃ = {gammat} is not below γ̃_{m} = {gm} for N = {n}")));
    }
    let nf = n as f64;
    let mf = m as f64;
    let phase = |j: f64| -> f64 {
        if n % 2 == 0 && kind == SaddleKind::A {
            mf * (j - 0.5) / nf
        } else {
            mf * j / nf
        }
    };
    let use_cn = n % 2 == 1 && kind == SaddleKind::B;
    let arg = mf * mf * gammat;
    let x: Vec<f64> = if arg < 1.0 {
        let kappa = kappa_from_gammat(arg)?;
        let big_k = ellip_k(kappa)?;
        let a = (2.0 * kappa * kappa / (1.0 + kappa * kappa)).sqrt();
        (1..=n)
            .map(|j| {
                let f = jacobi_sn_cn_dn(4.0 * big_k * phase(j as f64), kappa)?;
                Ok(a * if use_cn { f.cn } else { f.sn })
            })
            .collect::<Result<_>>()?
    } else {
        let rho = (4.0 / 3.0 * (1.0 - gammat / gm)).sqrt();
        (1..=n)
            .map(|j| {
                let t = 2.0 * PI * phase(j as f64);
                rho * if use_cn { t.cos() } else { t.sin() }
            })
            .collect()
    };
    ChainConfig::new(x)
}

/// One entry of the census.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryPoint {
    pub config: ChainConfig,
    pub value: f64,
    /// Number of negative Hessian eigenvalues that were resolved.
    pub index: usize,
    /// Eigenvalues too close to zero to sign; nonzero only for
    /// near-degenerate saddles at large N or exactly at a bifurcation.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub index_unresolved: usize,
    pub orbit_id: usize,
    pub winding: Option<usize>,
    pub grad_norm: f64,
}

fn is_zero(v: &usize) -> bool {
    *v == 0
}

impl StationaryPoint {
    pub fn index_info(&self) -> IndexInfo {
        IndexInfo { negative: self.index, unresolved: self.index_unresolved }
    }
}

/// Winding number M as half the number of cyclic sign changes, ignoring
/// sites within 1e-9 of zero. `None` for sign-definite configurations.
pub fn sign_change_winding(x: &[f64]) -> Option<usize> {
    let signs: Vec<bool> = x.iter().filter(|v| v.abs() > 1e-9).map(|&v| v > 0.0).collect();
    if signs.is_empty() {
        return None;
    }
    let changes = (0..signs.len()).filter(|&i| signs[i] != signs[(i + 1) % signs.len()]).count();
    if changes == 0 {
        None
    } else {
        Some(changes / 2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub gamma_tilde: f64,
    pub gamma: f64,
    /// Window M with γ̃_{M+1} < γ̃ < γ̃_M.
    pub window: usize,
    pub points: Vec<StationaryPoint>,
    /// Keys are the index, or `"lo-hi"` for points whose index could only be
    /// bracketed.
    pub counts_by_index: BTreeMap<String, usize>,
    pub orbit_count: usize,
    pub predicted_total: usize,
    pub matched: bool,
    /// γ̃ lies within the guard band of a bifurcation value.
    pub near_bifurcation: bool,
    pub seeds: usize,
    pub failed_seeds: usize,
    /// Points added as group images of solver output rather than found
    /// directly.
    pub images_added: usize,
    pub diagnostics: Vec<String>,
}

impl CensusReport {
    pub fn count_with_index(&self, k: usize) -> usize {
        self.points.iter().filter(|p| p.index_unresolved == 0 && p.index == k).count()
    }

    pub fn unresolved_count(&self) -> usize {
        self.points.iter().filter(|p| p.index_unresolved > 0).count()
    }

    pub fn params(&self) -> Result<CouplingParams> {
        CouplingParams::from_gamma(self.n, self.gamma)
    }

    /// Members of orbit `id`.
    pub fn orbit(&self, id: usize) -> impl Iterator<Item = &StationaryPoint> {
        self.points.iter().filter(move |p| p.orbit_id == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CensusOptions {
    /// Random seeds per site (total `seeds_per_site · N`).
    pub seeds_per_site: usize,
    pub seed: u64,
    pub execution: Execution,
    pub newton: NewtonOptions,
    pub dedup_tol: f64,
    pub guard_band: f64,
    /// Add the group images of every found point.
    pub close_under_group: bool,
}

impl Default for CensusOptions {
    fn default() -> Self {
        Self {
            seeds_per_site: 50,
            seed: 0,
            execution: Execution::default(),
            newton: NewtonOptions::default(),
            dedup_tol: 1e-6,
            guard_band: 1e-3,
            close_under_group: true,
        }
    }
}

fn push_images(seeds: &mut Vec<Vec<f64>>, x: &ChainConfig) {
    for y in crate::chain::group_orbit(x, 1e-9) {
        seeds.push(y.into_vec());
    }
}

fn build_seeds(n: usize, gammat: f64, window: usize, opts: &CensusOptions) -> Vec<Vec<f64>> {
    let mut seeds: Vec<Vec<f64>> = vec![vec![0.0; n], vec![1.0; n], vec![-1.0; n]];
    let mut templates = Vec::new();
    for m in 1..=window {
        for kind in [SaddleKind::A, SaddleKind::B] {
            if let Ok(x) = predicted_saddle(n, gammat, kind, m) {
                push_images(&mut seeds, &x);
                templates.push(x);
            }
        }
    }
    let total = opts.seeds_per_site * n;
    for k in 0..total {
        let mut r = rng::stream(opts.seed, k as u64);
        let x: Vec<f64> = if k % 2 == 0 && !templates.is_empty() {
            let t = &templates[r.random_range(0..templates.len())];
            let g = SymmetryElement::all(n)[r.random_range(0..SymmetryElement::all(n).len())];
            let amp = t.amplitude().max(0.1);
            g.apply(t).as_slice().iter().map(|v| v + 0.15 * amp * r.random_range(-1.0..1.0)).collect()
        } else {
            (0..n).map(|_| r.random_range(-1.2..1.2)).collect()
        };
        seeds.push(x);
    }
    seeds
}

/// One more Newton step moves the point by at most 1e-11. Flat directions
/// (quartic at a bifurcation) let the gradient pass its tolerance far from
/// the true root; those points fail here. A singular step is accepted.
fn is_solver_fixed_point(r: &Refined, p: &CouplingParams) -> bool {
    match newton_step(r, p) {
        Some(y) => y.iter().all(|v| v.is_finite()) && sup_distance(&y, &r.x) <= 1e-11,
        None => true,
    }
}

/// Multi-start Newton census of the stationary points at `(N, γ̃)`.
pub fn census(n: usize, gammat: f64, opts: &CensusOptions) -> Result<CensusReport> {
    let p = CouplingParams::from_gamma_tilde(n, gammat)?;
    if gammat <= 0.0 {
        return Err(Error::Domain { what: "rescaled coupling γ̃", value: gammat });
    }
    let window = window_index(n, gammat);
    let near_bifurcation = bifurcation_distance(n, gammat) < opts.guard_band;
    let mut diagnostics = Vec::new();
    if near_bifurcation {
        diagnostics.push(format!(
            "γ̃ = {gammat} is within {} of a bifurcation value; indices may be degenerate and the count is not a claim",
            opts.guard_band
        ));
    }
    let seeds = build_seeds(n, gammat, window, opts);
    let newton = opts.newton;
    let results = opts.execution.map(&seeds, |s| refine(s, &p, newton));

    let mut found: Vec<Refined> = Vec::new();
    let mut failed = 0;
    for r in results {
        match r {
            Some(r) if r.grad_norm <= 1e-9 && is_solver_fixed_point(&r, &p) => {
                if !found.iter().any(|f| sup_distance(&f.x, &r.x) <= opts.dedup_tol) {
                    found.push(r);
                }
            }
            _ => failed += 1,
        }
    }
    log::debug!("census N={n} γ̃={gammat}: {} distinct from {} seeds, {failed} failed", found.len(), seeds.len());

    let mut images_added = 0;
    if opts.close_under_group {
        let direct = found.len();
        for k in 0..direct {
            for g in SymmetryElement::all(n) {
                let y = g.apply_slice(&found[k].x);
                if !found.iter().any(|f| sup_distance(&f.x, &y) <= opts.dedup_tol) {
                    let mut img = found[k].clone();
                    img.symmetry = img.symmetry.map(|s| g.compose(s, n).compose(g.inverse(n), n));
                    img.x = y;
                    found.push(img);
                    images_added += 1;
                }
            }
        }
        if images_added > 0 {
            diagnostics.push(format!("{images_added} points added as group images of solver output"));
        }
    }

    // orbit labels
    let mut orbit_of = vec![usize::MAX; found.len()];
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    for i in 0..found.len() {
        if orbit_of[i] != usize::MAX {
            continue;
        }
        let id = orbits.len();
        let images: Vec<Vec<f64>> = SymmetryElement::all(n).into_iter().map(|g| g.apply_slice(&found[i].x)).collect();
        let mut members = Vec::new();
        for j in i..found.len() {
            if orbit_of[j] == usize::MAX && images.iter().any(|y| sup_distance(y, &found[j].x) <= opts.dedup_tol) {
                orbit_of[j] = id;
                members.push(j);
            }
        }
        orbits.push(members);
    }
    // order orbits by value, then by canonical (lexicographically smallest) member
    let canonical = |members: &Vec<usize>| -> Vec<f64> {
        members
            .iter()
            .map(|&j| found[j].x.clone())
            .min_by(|a, b| lex_cmp(a, b))
            .unwrap_or_default()
    };
    let mut order: Vec<(f64, Vec<f64>, usize)> = orbits
        .iter()
        .enumerate()
        .map(|(id, members)| {
            let v = members.iter().map(|&j| found[j].value).fold(f64::INFINITY, f64::min);
            (v, canonical(members), id)
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| lex_cmp(&a.1, &b.1)));
    let mut relabel = vec![0; orbits.len()];
    for (new, (_, _, old)) in order.iter().enumerate() {
        relabel[*old] = new;
    }

    let mut points: Vec<StationaryPoint> = found
        .iter()
        .enumerate()
        .map(|(i, r)| StationaryPoint {
            config: r.config(),
            value: r.value,
            index: r.index.negative,
            index_unresolved: r.index.unresolved,
            orbit_id: relabel[orbit_of[i]],
            winding: sign_change_winding(&r.x),
            grad_norm: r.grad_norm,
        })
        .collect();
    points.sort_by(|a, b| a.orbit_id.cmp(&b.orbit_id).then_with(|| lex_cmp(a.config.as_slice(), b.config.as_slice())));

    let mut counts_by_index = BTreeMap::new();
    for pt in &points {
        *counts_by_index.entry(pt.index_info().label()).or_insert(0) += 1;
    }
    let predicted_total = predicted_count(n, window);
    if points.len() != predicted_total {
        diagnostics.push(format!("found {} stationary points, predicted {predicted_total}", points.len()));
    }
    let unresolved = points.iter().filter(|p| p.index_unresolved > 0).count();
    if unresolved > 0 {
        diagnostics.push(format!("{unresolved} points have Hessian eigenvalues below double-double resolution"));
    }
    Ok(CensusReport {
        n,
        gamma_tilde: gammat,
        gamma: p.gamma,
        window,
        matched: points.len() == predicted_total && !near_bifurcation,
        orbit_count: orbits.len(),
        points,
        counts_by_index,
        predicted_total,
        near_bifurcation,
        seeds: seeds.len(),
        failed_seeds: failed,
        images_added,
        diagnostics,
    })
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > 1e-9 {
            return x.total_cmp(y);
        }
    }
    std::cmp::Ordering::Equal
}

/// One orbit in the structural decomposition of a census.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitSummary {
    pub orbit_id: usize,
    pub label: String,
    pub index: String,
    pub size: usize,
    pub value: f64,
    pub winding: Option<usize>,
    /// Index assigned from the symmetry class when the Hessian could not
    /// resolve it.
    pub index_inferred: bool,
}

/// Structural decomposition `S₀ = {I±}`, `S_{2m−1} = O_{A^{(m)}}`,
/// `S_{2m} = O_{B^{(m)}}`, `S_{2M+1} = {O}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub window: usize,
    pub orbits: Vec<OrbitSummary>,
    /// Symmetry class checks for the winding-1 saddles (label → holds).
    pub symmetry_classes: BTreeMap<String, bool>,
}

/// Verifies the orbit structure of a matched census.
pub fn classify_census(report: &CensusReport) -> Result<Classification> {
    let n = report.n;
    let window = report.window;
    let mut orbits = Vec::new();
    let mut ids: Vec<usize> = report.points.iter().map(|p| p.orbit_id).collect();
    ids.dedup();
    let mut symmetry_classes = BTreeMap::new();
    let mut seen_labels: BTreeMap<String, usize> = BTreeMap::new();
    for id in ids {
        let members: Vec<&StationaryPoint> = report.orbit(id).collect();
        let first = members[0];
        let x = first.config.as_slice();
        let info = first.index_info();
        let amp = first.config.amplitude();
        let (label, index, inferred) = if amp < 1e-9 {
            ("O".to_string(), info, false)
        } else if first.winding.is_none() {
            ("I".to_string(), info, false)
        } else {
            let m = first.winding.unwrap_or(0);
            let tol = 1e-6 * amp.max(1.0);
            let kind = if m == 1 && has_class(x, SaddleKind::A, tol) {
                Some(SaddleKind::A)
            } else if m == 1 && has_class(x, SaddleKind::B, tol) {
                Some(SaddleKind::B)
            } else {
                None
            };
            let mut index = info;
            let mut inferred = false;
            if !info.is_resolved() {
                if let Some(k) = kind {
                    let want = if k == SaddleKind::A { 2 * m - 1 } else { 2 * m };
                    if info.may_be(want) {
                        index = IndexInfo { negative: want, unresolved: 0 };
                        inferred = true;
                    }
                }
            }
            let label = if index.is_resolved() && index.negative == 2 * m - 1 {
                format!("A{m}")
            } else if index.is_resolved() && index.negative == 2 * m {
                format!("B{m}")
            } else {
                return Err(Error::Classification(format!(
                    "orbit {id} with winding {m} has index {} (expected {} or {}): {:?}",
                    info.label(),
                    2 * m - 1,
                    2 * m,
                    x
                )));
            };
            if m == 1 {
                let k = if label == "A1" { SaddleKind::A } else { SaddleKind::B };
                symmetry_classes.insert(label.clone(), kind == Some(k));
            }
            (label, index, inferred)
        };
        *seen_labels.entry(label.clone()).or_insert(0) += 1;
        orbits.push(OrbitSummary {
            orbit_id: id,
            label,
            index: index.label(),
            size: members.len(),
            value: first.value,
            winding: first.winding,
            index_inferred: inferred,
        });
    }
    let check = |cond: bool, what: String| if cond { Ok(()) } else { Err(Error::Classification(what)) };
    for (label, count) in &seen_labels {
        check(*count == 1, format!("{count} distinct orbits labelled {label}"))?;
    }
    let find = |l: &str| orbits.iter().find(|o| o.label == l);
    let i_orbit = find("I").ok_or_else(|| Error::Classification("I± not found".into()))?;
    check(i_orbit.size == 2 && i_orbit.index == "0", format!("S₀ should be {{I+, I−}} with index 0, got {:?}", i_orbit))?;
    let o = find("O").ok_or_else(|| Error::Classification("origin not found".into()))?;
    if !report.near_bifurcation {
        check(o.index == (2 * window + 1).to_string(), format!("origin has index {}, expected {}", o.index, 2 * window + 1))?;
    }
    for m in 1..=window {
        for (prefix, idx) in [("A", 2 * m - 1), ("B", 2 * m)] {
            let label = format!("{prefix}{m}");
            let orb = find(&label).ok_or_else(|| Error::Classification(format!("no orbit {label} (index {idx})")))?;
            let want = predicted_orbit_size(n, m);
            check(orb.size == want, format!("orbit {label} has {} points, expected {want}", orb.size))?;
        }
    }
    check(
        orbits.len() == 2 + 2 * window,
        format!("{} orbits, expected {}", orbits.len(), 2 + 2 * window),
    )?;
    for (label, ok) in &symmetry_classes {
        check(*ok, format!("orbit {label} does not have its tabulated symmetry class"))?;
    }
    Ok(Classification { window, orbits, symmetry_classes })
}

/// `(min V over 1-saddles − V(I±))/N`. Points whose index is only
/// bracketed count as 1-saddles when the bracket contains 1.
pub fn barrier_from_census(report: &CensusReport) -> Result<f64> {
    let n = report.n as f64;
    let v_min = report
        .points
        .iter()
        .filter(|p| p.index_info().may_be(1) && p.config.amplitude() > 1e-9)
        .map(|p| p.value)
        .fold(f64::INFINITY, f64::min);
    if !v_min.is_finite() {
        return Err(Error::InsufficientData("no 1-saddles in census".into()));
    }
    Ok((v_min + n / 4.0) / n)
}

/// One row of the bifurcation diagram: one symmetry orbit at one γ̃.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub gamma_tilde: f64,
    pub branch_id: usize,
    pub index: String,
    pub amplitude: f64,
    #[serde(rename = "V_per_site")]
    pub v_per_site: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanOutcome {
    pub rows: Vec<ScanRow>,
    /// Grid points skipped for lying within the guard band of some γ̃_M.
    pub skipped: Vec<f64>,
}

/// Census on each grid point; one row per orbit.
pub fn bifurcation_scan(n: usize, grid: &[f64], opts: &CensusOptions) -> Result<ScanOutcome> {
    const SKIP_BAND: f64 = 1e-4;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for &gt in grid {
        if !(gt > 0.0 && gt.is_finite()) {
            return Err(Error::Domain { what: "scan grid γ̃", value: gt });
        }
        if bifurcation_distance(n, gt) < SKIP_BAND {
            log::info!("skipping γ̃ = {gt}: within {SKIP_BAND} of a bifurcation value");
            skipped.push(gt);
            continue;
        }
        let rep = census(n, gt, opts)?;
        let mut ids: Vec<usize> = rep.points.iter().map(|p| p.orbit_id).collect();
        ids.dedup();
        for id in ids {
            let first = rep.orbit(id).next().expect("orbit has members");
            rows.push(ScanRow {
                gamma_tilde: gt,
                branch_id: id,
                index: first.index_info().label(),
                amplitude: first.config.amplitude(),
                v_per_site: first.value / n as f64,
            });
        }
    }
    Ok(ScanOutcome { rows, skipped })
}

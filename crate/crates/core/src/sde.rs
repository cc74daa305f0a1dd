//! Euler–Maruyama transitions between the synchronised minima.
//!
//! The diffusion `dx = −∇V_γ(x) dt + σ dB` is integrated with plain
//! Euler–Maruyama. A transition is the first entrance of the Euclidean ball
//! `B(I₊, r)` from `I₋`; along the way the highest-`V` configuration of the
//! final excursion (after the last exit from `B(I₋, R)`) is kept as the
//! passage point. Exponents are fitted from `log E[τ] = a/σ² + b`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::chain::{gradient_raw, potential_raw, sup_distance, ChainConfig, CouplingParams};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::landscape::CensusReport;
use crate::rng::stream_seed;

/// Default hitting-ball radius.
pub const DEFAULT_RADIUS: f64 = 0.25;
/// Radius of the ball around the start whose last exit opens the final excursion.
pub const EXCURSION_RADIUS: f64 = 0.4;

/// Largest stable time step for coupling `γ`.
pub fn max_dt(gamma: f64) -> f64 {
    0.01 / gamma.max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub coupling: CouplingParams,
    pub sigma: f64,
    pub dt: f64,
    /// Hitting-ball radius.
    pub r: f64,
    pub t_max: f64,
    pub rng_seed: u64,
}

impl SimParams {
    pub fn new(coupling: CouplingParams, sigma: f64, dt: f64, r: f64, t_max: f64, rng_seed: u64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain { what: "noise intensity σ", value: sigma });
        }
        if !(dt > 0.0 && dt <= max_dt(coupling.gamma) * (1.0 + 1e-12)) {
            return Err(Error::Domain { what: "time step (must be ≤ 0.01/max(1, γ))", value: dt });
        }
        if !(r > 0.0 && r < 0.5) {
            return Err(Error::Domain { what: "hitting radius r (must lie in (0, 1/2))", value: r });
        }
        if !(t_max > 0.0) {
            return Err(Error::Domain { what: "cutoff time", value: t_max });
        }
        Ok(Self { coupling, sigma, dt, r, t_max, rng_seed })
    }

    /// Largest allowed `dt`, default radius and a budget of 1e8 steps.
    pub fn with_defaults(coupling: CouplingParams, sigma: f64, rng_seed: u64) -> Result<Self> {
        let dt = max_dt(coupling.gamma);
        Self::new(coupling, sigma, dt, DEFAULT_RADIUS, 1e8 * dt, rng_seed)
    }

    pub fn with_sigma(self, sigma: f64) -> Result<Self> {
        Self::new(self.coupling, sigma, self.dt, self.r, self.t_max, self.rng_seed)
    }

    pub fn with_seed(self, rng_seed: u64) -> Self {
        Self { rng_seed, ..self }
    }
}

/// `f(x_i) + (γ/2)Δx_i`, i.e. `−∇V_γ`.
#[inline]
fn drift_into(x: &[f64], gamma: f64, out: &mut [f64]) {
    let n = x.len();
    let half = 0.5 * gamma;
    let mut l = x[n - 1];
    for i in 0..n {
        let xi = x[i];
        let r = if i + 1 < n { x[i + 1] } else { x[0] };
        out[i] = xi - xi * xi * xi + half * (r - 2.0 * xi + l);
        l = xi;
    }
}

/// `V_γ` without index arithmetic in the loop.
#[inline]
fn potential_fast(x: &[f64], gamma: f64) -> f64 {
    let mut prev = x[x.len() - 1];
    let mut onsite = 0.0;
    let mut bonds = 0.0;
    for &xi in x {
        let sq = xi * xi;
        onsite += sq * (0.25 * sq - 0.5);
        let d = xi - prev;
        bonds += d * d;
        prev = xi;
    }
    onsite + 0.25 * gamma * bonds
}

/// Independent standard normals for each site, from one seeded stream.
pub struct NoiseSource {
    rng: ChaCha8Rng,
}

impl NoiseSource {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    #[inline]
    pub fn fill(&mut self, out: &mut [f64]) {
        for z in out.iter_mut() {
            *z = self.rng.sample(StandardNormal);
        }
    }
}

/// One Euler–Maruyama step driven by the given standard normals.
pub fn em_step(x: &ChainConfig, p: &SimParams, noise: &[f64]) -> Result<ChainConfig> {
    let n = x.len();
    if noise.len() != n {
        return Err(Error::Dimension { expected: n, got: noise.len() });
    }
    if p.coupling.n != n {
        return Err(Error::Dimension { expected: p.coupling.n, got: n });
    }
    let mut y = x.as_slice().to_vec();
    let mut buf = vec![0.0; n];
    step_raw(&mut y, &mut buf, p.coupling.gamma, p.dt, p.sigma * p.dt.sqrt(), noise);
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::BlowUp { steps: 1 });
    }
    Ok(ChainConfig::from_vec_unchecked(y))
}

#[inline]
fn step_raw(x: &mut [f64], buf: &mut [f64], gamma: f64, dt: f64, scale: f64, noise: &[f64]) {
    drift_into(x, gamma, buf);
    for i in 0..x.len() {
        x[i] += buf[i] * dt + scale * noise[i];
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// One transition attempt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionSample {
    pub sigma: f64,
    pub seed: u64,
    /// Hitting time `τ₊`; equals `t_max` when censored.
    pub tau: f64,
    pub censored: bool,
    /// Highest-`V` configuration of the final excursion.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passage: Option<ChainConfig>,
    pub passage_value: f64,
    /// Orbit id of the census point nearest (sup-norm) to the passage point.
    pub passed_near: Option<usize>,
}

/// Nearest census point to `x` in sup-norm, as an orbit id.
fn nearest_orbit(x: &[f64], census: &CensusReport) -> Option<usize> {
    census
        .points
        .iter()
        .map(|p| (sup_distance(p.config.as_slice(), x), p.orbit_id))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, id)| id)
}

/// Runs from `start` until the state enters `B(target, r)` or `t_max`.
pub fn first_hitting_time(
    start: &ChainConfig,
    target: &ChainConfig,
    p: &SimParams,
    census: Option<&CensusReport>,
) -> Result<TransitionSample> {
    let n = start.len();
    if target.len() != n {
        return Err(Error::Dimension { expected: n, got: target.len() });
    }
    if p.coupling.n != n {
        return Err(Error::Dimension { expected: p.coupling.n, got: n });
    }
    let r2 = p.r * p.r;
    if dist2(start.as_slice(), target.as_slice()) <= r2 {
        return Err(Error::InvalidArgument("start lies inside the target ball".into()));
    }
    let big_r2 = EXCURSION_RADIUS * EXCURSION_RADIUS;
    let gamma = p.coupling.gamma;
    let scale = p.sigma * p.dt.sqrt();
    let max_steps = (p.t_max / p.dt).ceil() as u64;
    let mut source = NoiseSource::new(p.rng_seed);

    let s = start.as_slice();
    let t = target.as_slice();
    let mut x = s.to_vec();
    let mut buf = vec![0.0; n];
    let mut noise = vec![0.0; n];
    let mut best_v = f64::NEG_INFINITY;
    let mut best_x = x.clone();
    let mut hit = None;

    if cfg!(debug_assertions) {
        let mut g = vec![0.0; n];
        gradient_raw(&x, gamma, &mut g);
        drift_into(&x, gamma, &mut buf);
        debug_assert!(g.iter().zip(&buf).all(|(a, b)| (a + b).abs() <= 1e-12 * (1.0 + a.abs())));
        debug_assert!((potential_raw(&x, gamma) - potential_fast(&x, gamma)).abs() <= 1e-12);
    }

    for k in 1..=max_steps {
        source.fill(&mut noise);
        step_raw(&mut x, &mut buf, gamma, p.dt, scale, &noise);
        if dist2(&x, s) <= big_r2 {
            best_v = f64::NEG_INFINITY;
            continue;
        }
        let v = potential_fast(&x, gamma);
        if !v.is_finite() {
            return Err(Error::BlowUp { steps: k });
        }
        if v > best_v {
            best_v = v;
            best_x.copy_from_slice(&x);
        }
        if dist2(&x, t) <= r2 {
            hit = Some(k);
            break;
        }
    }

    Ok(match hit {
        Some(k) => TransitionSample {
            sigma: p.sigma,
            seed: p.rng_seed,
            tau: k as f64 * p.dt,
            censored: false,
            passed_near: census.and_then(|c| nearest_orbit(&best_x, c)),
            passage: Some(ChainConfig::from_vec_unchecked(best_x)),
            passage_value: best_v,
        },
        None => TransitionSample {
            sigma: p.sigma,
            seed: p.rng_seed,
            tau: p.t_max,
            censored: true,
            passage: None,
            passage_value: f64::NAN,
            passed_near: None,
        },
    })
}

/// Seed of replica `i` at noise level `σ`.
pub fn replica_seed(master: u64, sigma: f64, i: u64) -> u64 {
    stream_seed(stream_seed(master, sigma.to_bits()), i)
}

/// `replicas` independent transitions at `p.sigma`, seeded from `master`.
pub fn run_batch(
    start: &ChainConfig,
    target: &ChainConfig,
    p: &SimParams,
    replicas: usize,
    master: u64,
    census: Option<&CensusReport>,
    exec: Execution,
) -> Result<Vec<TransitionSample>> {
    exec.map_range(replicas, |i| {
        let q = p.with_seed(replica_seed(master, p.sigma, i as u64));
        first_hitting_time(start, target, &q, census)
    })
    .into_iter()
    .collect()
}

/// Per-σ summary of a batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub sigma: f64,
    pub samples: usize,
    pub censored: usize,
    /// Censored-exponential estimate `(Σ τ) / #uncensored`, where censored
    /// samples contribute `t_max`.
    pub mean_tau: f64,
    /// Standard error of `log mean_tau`.
    pub log_se: f64,
}

impl BatchSummary {
    pub fn from_samples(samples: &[TransitionSample]) -> Result<Self> {
        let first = samples.first().ok_or_else(|| Error::InsufficientData("empty batch".into()))?;
        let sigma = first.sigma;
        if samples.iter().any(|s| s.sigma != sigma) {
            return Err(Error::InvalidArgument("batch mixes noise levels".into()));
        }
        let hits: Vec<f64> = samples.iter().filter(|s| !s.censored).map(|s| s.tau).collect();
        let censored = samples.len() - hits.len();
        if hits.is_empty() {
            return Err(Error::InsufficientData(format!("all {} samples censored at σ = {sigma}", samples.len())));
        }
        let total: f64 = samples.iter().map(|s| s.tau).sum();
        let mean_tau = total / hits.len() as f64;
        let k = hits.len() as f64;
        let log_se = if censored == 0 && hits.len() > 1 {
            let m = hits.iter().sum::<f64>() / k;
            let var = hits.iter().map(|t| (t - m) * (t - m)).sum::<f64>() / (k - 1.0);
            (var / k).sqrt() / m
        } else {
            // exponential MLE under censoring
            1.0 / k.sqrt()
        };
        Ok(Self { sigma, samples: samples.len(), censored, mean_tau, log_se })
    }

    pub fn censored_fraction(&self) -> f64 {
        self.censored as f64 / self.samples as f64
    }

    pub fn uncensored(&self) -> usize {
        self.samples - self.censored
    }
}

/// `log E[τ] ≈ slope/σ² + intercept`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrheniusFit {
    pub slope: f64,
    pub slope_se: f64,
    pub intercept: f64,
    pub samples_per_sigma: usize,
    pub sigma_grid: Vec<f64>,
    pub batches: Vec<BatchSummary>,
    /// σ values whose batches were left out of the fit.
    pub excluded: Vec<f64>,
}

/// Batches censored beyond this fraction are excluded from fits.
pub const CENSOR_LIMIT: f64 = 0.1;
/// Uncensored samples a batch needs to enter a fit.
pub const MIN_UNCENSORED: usize = 20;

/// Weighted least squares of `log mean τ` on `1/σ²`.
pub fn arrhenius_fit(batches: &[Vec<TransitionSample>]) -> Result<ArrheniusFit> {
    let mut used = Vec::new();
    let mut all = Vec::new();
    let mut excluded = Vec::new();
    for b in batches {
        let s = match BatchSummary::from_samples(b) {
            Ok(s) => s,
            Err(_) => {
                if let Some(f) = b.first() {
                    excluded.push(f.sigma);
                }
                continue;
            }
        };
        if s.censored_fraction() > CENSOR_LIMIT || s.uncensored() < MIN_UNCENSORED {
            excluded.push(s.sigma);
        } else {
            used.push(s.clone());
        }
        all.push(s);
    }
    if used.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} usable noise levels (need 3 with ≥ {MIN_UNCENSORED} uncensored samples and ≤ {}% censoring)",
            used.len(),
            CENSOR_LIMIT * 100.0
        )));
    }
    let xs: Vec<f64> = used.iter().map(|s| 1.0 / (s.sigma * s.sigma)).collect();
    let ys: Vec<f64> = used.iter().map(|s| s.mean_tau.ln()).collect();
    let ws: Vec<f64> = used.iter().map(|s| 1.0 / (s.log_se * s.log_se).max(1e-300)).collect();
    let sw: f64 = ws.iter().sum();
    let xm = ws.iter().zip(&xs).map(|(w, x)| w * x).sum::<f64>() / sw;
    let ym = ws.iter().zip(&ys).map(|(w, y)| w * y).sum::<f64>() / sw;
    let sxx: f64 = ws.iter().zip(&xs).map(|(w, x)| w * (x - xm) * (x - xm)).sum();
    let sxy: f64 = ws.iter().zip(xs.iter().zip(&ys)).map(|(w, (x, y))| w * (x - xm) * (y - ym)).sum();
    if sxx <= 0.0 {
        return Err(Error::InsufficientData("noise levels are not distinct".into()));
    }
    let slope = sxy / sxx;
    Ok(ArrheniusFit {
        slope,
        slope_se: (1.0 / sxx).sqrt(),
        intercept: ym - slope * xm,
        samples_per_sigma: used.iter().map(|s| s.samples).min().unwrap_or(0),
        sigma_grid: all.iter().map(|s| s.sigma).collect(),
        batches: all,
        excluded,
    })
}

/// Orbit id → number of uncensored transitions whose passage point is
/// nearest to a member of that orbit.
pub fn critical_passage_histogram(samples: &[TransitionSample], census: &CensusReport) -> Result<BTreeMap<usize, usize>> {
    if census.points.is_empty() {
        return Err(Error::InsufficientData("census has no stationary points".into()));
    }
    let mut hist = BTreeMap::new();
    for s in samples.iter().filter(|s| !s.censored) {
        let x = s
            .passage
            .as_ref()
            .ok_or_else(|| Error::InsufficientData(format!("sample with seed {} has no passage point", s.seed)))?;
        if let Some(id) = nearest_orbit(x.as_slice(), census) {
            *hist.entry(id).or_insert(0) += 1;
        }
    }
    Ok(hist)
}

/// How a σ grid is run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOptions {
    pub replicas: usize,
    /// Replicas in the censoring probe at the smallest σ.
    pub probe_replicas: usize,
    pub shift_factor: f64,
    pub max_shifts: usize,
    pub execution: Execution,
}

impl Default for GridOptions {
    fn default() -> Self {
        Self { replicas: 200, probe_replicas: 40, shift_factor: 1.1, max_shifts: 20, execution: Execution::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRun {
    pub requested: Vec<f64>,
    pub grid: Vec<f64>,
    pub shifts: usize,
    pub batches: Vec<Vec<TransitionSample>>,
}

/// Runs the probe in small chunks and stops once the censored count rules
/// out the 10% limit. Returns the censored count in that case.
fn probe_censoring(
    start: &ChainConfig,
    target: &ChainConfig,
    p: &SimParams,
    opts: &GridOptions,
    master: u64,
) -> Result<Option<usize>> {
    let limit = (CENSOR_LIMIT * opts.probe_replicas as f64).floor() as usize;
    let mut censored = 0;
    let mut i = 0;
    while i < opts.probe_replicas {
        let end = (i + PROBE_CHUNK).min(opts.probe_replicas);
        let idx: Vec<u64> = (i as u64..end as u64).collect();
        let chunk = opts.execution.map(&idx, |&k| {
            first_hitting_time(start, target, &p.with_seed(replica_seed(master, p.sigma, k)), None)
        });
        for s in chunk {
            censored += s?.censored as usize;
        }
        if censored > limit {
            return Ok(Some(censored));
        }
        i = end;
    }
    Ok(None)
}

const PROBE_CHUNK: usize = 4;

/// Runs every σ of `grid`, first scaling the whole grid by `shift_factor`
/// until a probe at the smallest σ is censored at most 10% of the time.
pub fn run_grid(
    start: &ChainConfig,
    target: &ChainConfig,
    base: &SimParams,
    grid: &[f64],
    master: u64,
    census: Option<&CensusReport>,
    opts: &GridOptions,
) -> Result<GridRun> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty σ grid".into()));
    }
    let mut current = grid.to_vec();
    let mut shifts = 0;
    loop {
        let smallest = current.iter().copied().fold(f64::INFINITY, f64::min);
        let p = base.with_sigma(smallest)?;
        let censored = probe_censoring(start, target, &p, opts, master)?;
        if censored.is_none() || shifts >= opts.max_shifts {
            break;
        }
        log::info!("σ = {smallest:.4}: more than {:.0}% censored, shifting grid by {}", CENSOR_LIMIT * 100.0, opts.shift_factor);
        current.iter_mut().for_each(|s| *s *= opts.shift_factor);
        shifts += 1;
    }
    let mut batches = Vec::with_capacity(current.len());
    for &sigma in &current {
        let p = base.with_sigma(sigma)?;
        batches.push(run_batch(start, target, &p, opts.replicas, master, census, opts.execution)?);
    }
    Ok(GridRun { requested: grid.to_vec(), grid: current, shifts, batches })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, gt: f64, sigma: f64) -> SimParams {
        SimParams::with_defaults(CouplingParams::from_gamma_tilde(n, gt).unwrap(), sigma, 1).unwrap()
    }

    #[test]
    fn guards() {
        let c = CouplingParams::from_gamma_tilde(4, 0.5).unwrap();
        assert!(SimParams::new(c, 0.3, 0.02, 0.25, 1.0, 0).is_err());
        assert!(SimParams::new(c, 0.3, 0.01, 0.5, 1.0, 0).is_err());
        assert!(SimParams::new(c, 0.0, 0.01, 0.25, 1.0, 0).is_err());
        assert!(SimParams::new(c, 0.3, 0.01, 0.25, 1.0, 0).is_ok());
    }

    #[test]
    fn noiseless_step_keeps_minimum() {
        let p = params(6, 0.7, 0.4);
        let x = ChainConfig::i_plus(6);
        assert_eq!(em_step(&x, &p, &[0.0; 6]).unwrap(), x);
    }

    #[test]
    fn same_seed_same_time() {
        let p = params(4, 1.2, 0.9);
        let a = first_hitting_time(&ChainConfig::i_minus(4), &ChainConfig::i_plus(4), &p, None).unwrap();
        let b = first_hitting_time(&ChainConfig::i_minus(4), &ChainConfig::i_plus(4), &p, None).unwrap();
        assert_eq!(a.tau.to_bits(), b.tau.to_bits());
        assert!(!a.censored);
    }
}

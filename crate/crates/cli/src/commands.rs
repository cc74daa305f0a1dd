use anyhow::{anyhow, bail};
use serde::Serialize;

use metachain::elliptic::identity_battery;
use metachain::landscape::{
    barrier_height, bifurcation_scan, census, classify_census, kappa_from_gammat, predicted_saddle, refine_symmetric,
    CensusOptions, CensusReport, NewtonOptions, SaddleKind,
};
use metachain::sde::{arrhenius_fit, run_grid, GridOptions, SimParams, TransitionSample};
use metachain::{ChainConfig, CouplingParams, Error};

use crate::output::{Format, RunManifest, Sink};
use crate::{Cli, Command, Coupling, EXIT_STATISTICAL, EXIT_USAGE};

pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    fn usage(e: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_USAGE, error: e.into() }
    }

    fn statistical(e: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_STATISTICAL, error: e.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<Error>() {
            Some(
                Error::Domain { .. }
                | Error::Dimension { .. }
                | Error::InvalidArgument(_)
                | Error::Unsupported(_)
                | Error::NoOrbit { .. }
                | Error::Window(_)
                | Error::OutOfSeparatrix { .. },
            ) => EXIT_USAGE,
            Some(_) => EXIT_STATISTICAL,
            None => 1,
        };
        Self { code, error }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

type Outcome = Result<(), Failure>;

/// Parses `a,b,c` or `lo:hi:count` (inclusive, evenly spaced).
pub fn parse_grid(s: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [lo, hi, count] => {
            let lo: f64 = lo.trim().parse()?;
            let hi: f64 = hi.trim().parse()?;
            let count: usize = count.trim().parse()?;
            match count {
                0 => bail!("grid {s:?} has no points"),
                1 => vec![lo],
                _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
            }
        }
        [list] => list.split(',').map(|t| t.trim().parse::<f64>()).collect::<Result<_, _>>()?,
        _ => bail!("grid {s:?} is neither a comma list nor lo:hi:count"),
    };
    if grid.is_empty() || grid.iter().any(|v| !v.is_finite()) {
        bail!("grid {s:?} must contain finite numbers");
    }
    Ok(grid)
}

fn coupling(n: usize, c: Coupling) -> Result<CouplingParams, Failure> {
    let p = match (c.gamma_tilde, c.gamma) {
        (Some(gt), None) => CouplingParams::from_gamma_tilde(n, gt)?,
        (None, Some(g)) => CouplingParams::from_gamma(n, g)?,
        _ => return Err(Failure::usage(anyhow!("give exactly one of --gamma-tilde and --gamma"))),
    };
    Ok(p)
}

fn format(cli: &Cli, default: Format) -> Format {
    if cli.global.json {
        Format::Json
    } else if cli.global.csv {
        Format::Csv
    } else {
        default
    }
}

pub fn run(cli: &Cli) -> Outcome {
    if let Some(t) = cli.global.threads {
        if t == 0 {
            return Err(Failure::usage(anyhow!("--threads must be positive")));
        }
        if !metachain::exec::init_threads(t) {
            log::warn!("thread count {t} ignored (pool already running or built without parallelism)");
        }
    }
    match &cli.command {
        Command::Census { n, coupling: c, seeds } => cmd_census(cli, *n, *c, *seeds),
        Command::BifurcationScan { n, grid, seeds } => cmd_scan(cli, *n, grid, *seeds),
        Command::Barrier { grid } => cmd_barrier(cli, grid),
        Command::Droplet { n, coupling: c, kind, m } => cmd_droplet(cli, *n, *c, *kind, *m),
        Command::Simulate { n, coupling: c, sigma, replicas, t_max, radius, max_shifts } => {
            cmd_simulate(cli, *n, *c, sigma, *replicas, *t_max, *radius, *max_shifts)
        }
        Command::EllSelftest { grid } => cmd_selftest(cli, *grid),
    }
}

#[derive(Serialize)]
struct PointRow {
    orbit_id: usize,
    index: String,
    value: f64,
    winding: Option<usize>,
    grad_norm: f64,
    /// Site values separated by spaces.
    config: String,
}

fn point_rows(r: &CensusReport) -> Vec<PointRow> {
    r.points
        .iter()
        .map(|p| PointRow {
            orbit_id: p.orbit_id,
            index: p.index_info().label(),
            value: p.value,
            winding: p.winding,
            grad_norm: p.grad_norm,
            config: p.config.as_slice().iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(" "),
        })
        .collect()
}

fn cmd_census(cli: &Cli, n: usize, c: Coupling, seeds: usize) -> Outcome {
    let p = coupling(n, c)?;
    let opts = CensusOptions { seeds_per_site: seeds, seed: cli.global.seed, ..CensusOptions::default() };
    let report = census(n, p.gamma_tilde, &opts)?;
    let mut m = RunManifest::new("census", cli.global.seed);
    m.param("N", n).param("gamma_tilde", p.gamma_tilde).param("gamma", p.gamma).param("seeds_per_site", seeds);
    let mut sink = Sink::new(&cli.global.out, m)?;
    let path = match format(cli, Format::Json) {
        Format::Json => sink.json("census.json", &report)?,
        Format::Csv => sink.csv("census.csv", &point_rows(&report))?,
    };
    let class = if report.matched { Some(classify_census(&report)) } else { None };
    if let Some(Ok(cl)) = &class {
        sink.json("classification.json", cl)?;
    }
    sink.finish()?;

    println!("N = {n}, γ̃ = {:.6}, γ = {:.6}, window M = {}", p.gamma_tilde, p.gamma, report.window);
    println!("stationary points: {} (predicted {}), matched = {}", report.points.len(), report.predicted_total, report.matched);
    for (idx, count) in &report.counts_by_index {
        println!("  index {idx}: {count}");
    }
    match &class {
        Some(Ok(cl)) => {
            for o in &cl.orbits {
                println!("  orbit {:>2} {:<3} index {:<3} size {:>3}  V = {:.8}", o.orbit_id, o.label, o.index, o.size, o.value);
            }
        }
        Some(Err(e)) => println!("  classification failed: {e}"),
        None => {}
    }
    for d in &report.diagnostics {
        println!("  note: {d}");
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_scan(cli: &Cli, n: usize, grid: &str, seeds: usize) -> Outcome {
    let grid = parse_grid(grid).map_err(Failure::usage)?;
    let opts = CensusOptions { seeds_per_site: seeds, seed: cli.global.seed, ..CensusOptions::default() };
    let scan = bifurcation_scan(n, &grid, &opts)?;
    let mut m = RunManifest::new("bifurcation-scan", cli.global.seed);
    m.param("N", n).param("grid", &grid).param("seeds_per_site", seeds).param("skipped", &scan.skipped);
    let mut sink = Sink::new(&cli.global.out, m)?;
    let path = sink.table("scan", &scan.rows, format(cli, Format::Csv))?;
    sink.finish()?;
    println!("{} rows over {} grid points", scan.rows.len(), grid.len() - scan.skipped.len());
    for s in &scan.skipped {
        println!("  skipped: {s}");
    }
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct BarrierRow {
    gamma_tilde: f64,
    kappa: f64,
    h: f64,
}

fn cmd_barrier(cli: &Cli, grid: &str) -> Outcome {
    let grid = parse_grid(grid).map_err(Failure::usage)?;
    if let Some(bad) = grid.iter().find(|g| !(**g > 0.0 && **g <= 1.0)) {
        return Err(Error::Domain { what: "barrier grid point (must lie in (0, 1])", value: *bad }.into());
    }
    let rows = grid
        .iter()
        .map(|&gt| Ok(BarrierRow { gamma_tilde: gt, kappa: kappa_from_gammat(gt)?, h: barrier_height(gt)? }))
        .collect::<Result<Vec<_>, Error>>()?;
    let mut m = RunManifest::new("barrier", cli.global.seed);
    m.param("grid", &grid);
    let mut sink = Sink::new(&cli.global.out, m)?;
    let path = sink.table("barrier", &rows, format(cli, Format::Csv))?;
    sink.finish()?;
    println!("{} rows; h ranges over [{:.6}, {:.6}]", rows.len(), rows.iter().map(|r| r.h).fold(f64::INFINITY, f64::min), rows.iter().map(|r| r.h).fold(f64::NEG_INFINITY, f64::max));
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct DropletRow {
    site: usize,
    predicted: f64,
    refined: f64,
}

#[derive(Serialize)]
struct DropletSummary<'a> {
    #[serde(rename = "N")]
    n: usize,
    gamma_tilde: f64,
    kind: SaddleKind,
    m: usize,
    sup_error: f64,
    index: String,
    value: f64,
    rows: &'a [DropletRow],
}

fn cmd_droplet(cli: &Cli, n: usize, c: Coupling, kind: SaddleKind, m: usize) -> Outcome {
    let p = coupling(n, c)?;
    let pred = predicted_saddle(n, p.gamma_tilde, kind, m)?;
    let refined = refine_symmetric(pred.as_slice(), &p, NewtonOptions::default())
        .ok_or_else(|| Failure::statistical(anyhow!("Newton refinement of the predicted profile did not converge")))?;
    let rows: Vec<DropletRow> = pred
        .as_slice()
        .iter()
        .zip(&refined.x)
        .enumerate()
        .map(|(i, (a, b))| DropletRow { site: i + 1, predicted: *a, refined: *b })
        .collect();
    let summary = DropletSummary {
        n,
        gamma_tilde: p.gamma_tilde,
        kind,
        m,
        sup_error: pred.sup_distance(&refined.config()),
        index: refined.index.label(),
        value: refined.value,
        rows: &rows,
    };
    let mut man = RunManifest::new("droplet", cli.global.seed);
    man.param("N", n).param("gamma_tilde", p.gamma_tilde).param("kind", kind).param("M", m);
    let mut sink = Sink::new(&cli.global.out, man)?;
    let path = match format(cli, Format::Csv) {
        Format::Csv => sink.csv("droplet.csv", &rows)?,
        Format::Json => sink.json("droplet.json", &summary)?,
    };
    sink.finish()?;
    println!(
        "{kind}^({m}) at N = {n}, γ̃ = {:.6}: refined index {}, V = {:.10}, sup |refined − predicted| = {:.3e}",
        p.gamma_tilde, summary.index, summary.value, summary.sup_error
    );
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct SampleRow {
    sigma: f64,
    seed: u64,
    tau: f64,
    censored: bool,
    nearest_orbit: Option<usize>,
}

impl From<&TransitionSample> for SampleRow {
    fn from(s: &TransitionSample) -> Self {
        Self { sigma: s.sigma, seed: s.seed, tau: s.tau, censored: s.censored, nearest_orbit: s.passed_near }
    }
}

#[derive(Serialize)]
struct Theory {
    quantity: &'static str,
    value: f64,
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    cli: &Cli,
    n: usize,
    c: Coupling,
    sigma: &str,
    replicas: usize,
    t_max: Option<f64>,
    radius: f64,
    max_shifts: usize,
) -> Outcome {
    let p = coupling(n, c)?;
    let grid = parse_grid(sigma).map_err(Failure::usage)?;
    if replicas == 0 {
        return Err(Failure::usage(anyhow!("--replicas must be positive")));
    }
    let defaults = SimParams::with_defaults(p, grid[0], cli.global.seed)?;
    let base = SimParams::new(p, grid[0], defaults.dt, radius, t_max.unwrap_or(defaults.t_max), cli.global.seed)?;
    let census = census(n, p.gamma_tilde, &CensusOptions { seed: cli.global.seed, ..CensusOptions::default() })?;
    let opts = GridOptions { replicas, max_shifts, ..GridOptions::default() };
    let run = run_grid(&ChainConfig::i_minus(n), &ChainConfig::i_plus(n), &base, &grid, cli.global.seed, Some(&census), &opts)?;

    let mut m = RunManifest::new("simulate", cli.global.seed);
    m.param("N", n)
        .param("gamma_tilde", p.gamma_tilde)
        .param("requested_sigma", &grid)
        .param("sigma", &run.grid)
        .param("grid_shifts", run.shifts)
        .param("replicas", replicas)
        .param("dt", base.dt)
        .param("t_max", base.t_max)
        .param("radius", radius);
    let mut sink = Sink::new(&cli.global.out, m)?;
    let rows: Vec<SampleRow> = run.batches.iter().flatten().map(SampleRow::from).collect();
    let samples_path = sink.table("samples", &rows, format(cli, Format::Csv))?;
    sink.json("census.json", &census)?;

    let theory = if p.gamma_tilde < 1.0 {
        Theory { quantity: "2N·h(γ̃)", value: 2.0 * n as f64 * barrier_height(p.gamma_tilde)? }
    } else {
        Theory { quantity: "N/2", value: n as f64 / 2.0 }
    };
    let uncensored = rows.iter().filter(|r| !r.censored).count();
    if run.shifts > 0 {
        println!("σ grid shifted {} times to {:?}", run.shifts, run.grid);
    }
    if uncensored == 0 {
        sink.finish()?;
        return Err(Failure::statistical(anyhow!(
            "all {} samples censored at t_max = {}; raise --t-max or σ",
            rows.len(),
            base.t_max
        )));
    }
    let fit = match arrhenius_fit(&run.batches) {
        Ok(f) => f,
        Err(e) => {
            sink.finish()?;
            return Err(Failure::statistical(e));
        }
    };
    let rel = (fit.slope - theory.value).abs() / theory.value;
    let fit_json = serde_json::json!({
        "schema_version": crate::output::SCHEMA_VERSION,
        "fit": fit,
        "theory": theory,
        "relative_error": rel,
    });
    let fit_path = sink.json("fit.json", &fit_json)?;
    sink.finish()?;
    for b in &fit.batches {
        println!("  σ = {:.4}: mean τ = {:.4e} ({} censored of {})", b.sigma, b.mean_tau, b.censored, b.samples);
    }
    println!(
        "exponent a = {:.4} ± {:.4}; {} = {:.4}; relative error {:.1}%",
        fit.slope,
        fit.slope_se,
        theory.quantity,
        theory.value,
        rel * 100.0
    );
    println!("wrote {} and {}", samples_path.display(), fit_path.display());
    Ok(())
}

fn cmd_selftest(cli: &Cli, grid: usize) -> Outcome {
    let rep = identity_battery(grid)?;
    let mut m = RunManifest::new("ell-selftest", cli.global.seed);
    m.param("grid", grid);
    let mut sink = Sink::new(&cli.global.out, m)?;
    let path = sink.json("selftest.json", &rep)?;
    sink.finish()?;
    println!("{}", serde_json::to_string_pretty(&rep).map_err(anyhow::Error::from)?);
    println!("wrote {}", path.display());
    if rep.passed() {
        Ok(())
    } else {
        Err(Failure::statistical(anyhow!("elliptic identity battery exceeded its tolerances")))
    }
}

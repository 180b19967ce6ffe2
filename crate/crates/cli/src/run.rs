//! Orchestration of one run: data, prior and posterior draws, estimates, and
//! the files written for them.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use setid::conditional::{
    histogram, marginal_draw, ConditionalPriorSpec, GammaDraw, Histogram, MarginalSampleBatch,
};
use setid::kernel::{derive_seed, substream};
use setid::random_set::{
    credible_region, estimate_coverage, point_estimate_set, CoverageCurve, IntervalSet,
    SetDrawBatch, Source,
};
use setid::scenarios::{
    analytic_coverage_binary, analytic_coverage_toy, binary_point_estimate, PosteriorData,
    Scenario, ScenarioConfig, ScenarioId,
};

use crate::config::RunConfig;
use crate::output::{fmt_num, round_sig, Csv};
use crate::CliError;

/// Seed tags separating the data stream family from the two draw families.
pub const DATA_TAG: u64 = 1;
pub const PRIOR_TAG: u64 = 2;
pub const POSTERIOR_TAG: u64 = 3;

#[derive(Debug, Clone, Serialize)]
pub struct ConfigEcho {
    pub scenario: String,
    pub n: Option<usize>,
    pub n_draws: usize,
    pub seed: u64,
    pub grid: [f64; 3],
    pub family: Option<String>,
    pub alpha: f64,
    pub workers: usize,
    pub bins: usize,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl From<IntervalSet> for Interval {
    fn from(s: IntervalSet) -> Self {
        Interval {
            lo: round_sig(s.lo()),
            hi: round_sig(s.hi()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CredibleSummary {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    pub containment: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SkipCounts {
    pub attempted: usize,
    pub kept: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Skips {
    pub prior: SkipCounts,
    pub posterior: Option<SkipCounts>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RepairSummary {
    pub clipped: bool,
    pub min_eigenvalue_before: f64,
    pub eigen_floor: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaSummary {
    pub family: String,
    pub prior_mean: Option<f64>,
    pub prior_variance: Option<f64>,
    pub posterior_mean: Option<f64>,
    pub posterior_variance: Option<f64>,
    /// `(upper attempt bound, draws)` pairs for the rejection sampler.
    pub prior_attempts: Vec<(u64, usize)>,
    pub posterior_attempts: Vec<(u64, usize)>,
    /// Rejection draws finished by inversion after the budget ran out.
    pub prior_inverted: usize,
    pub posterior_inverted: usize,
    /// Draws outside the histogram range, `[below, above]`.
    pub prior_out_of_range: [usize; 2],
    pub posterior_out_of_range: [usize; 2],
}

/// Closed-form comparisons available for some scenarios.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    pub max_abs_prior_coverage_error: Option<f64>,
    pub max_abs_posterior_coverage_error: Option<f64>,
    pub analytic_point_estimate: Option<Interval>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: usize,
    pub sha256: String,
}

/// Everything recorded in `summary.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: ConfigEcho,
    pub true_set: Option<Interval>,
    /// Batch the estimates below are computed from.
    pub estimates_from: String,
    pub point_estimate: Interval,
    pub credible_region: CredibleSummary,
    pub skips: Skips,
    pub warnings: Vec<String>,
    pub truncation_levels: Vec<usize>,
    pub base_covariance_repair: Option<RepairSummary>,
    pub diagnostics: Diagnostics,
    pub gamma: Option<GammaSummary>,
    pub wall_time_seconds: f64,
    pub output_dir: PathBuf,
    pub manifest: Vec<FileEntry>,
}

/// In-memory results of a run, before anything is written.
#[derive(Debug, Clone)]
pub struct Estimates {
    pub grid: Vec<f64>,
    pub prior: SetDrawBatch,
    pub posterior: Option<SetDrawBatch>,
    pub prior_coverage: CoverageCurve,
    pub posterior_coverage: Option<CoverageCurve>,
    pub prior_gamma: Option<MarginalSampleBatch>,
    pub posterior_gamma: Option<MarginalSampleBatch>,
}

type Draw = Option<(IntervalSet, Option<GammaDraw>)>;

fn draw_family(
    scenario: &Scenario,
    spec: Option<&ConditionalPriorSpec>,
    mode: Source,
    data: Option<&PosteriorData>,
    seed: u64,
    n_draws: usize,
) -> Result<Vec<Draw>, setid::Error> {
    (0..n_draws)
        .into_par_iter()
        .map(|j| {
            let mut rng = substream(seed, j as u64);
            match spec {
                Some(spec) => Ok(marginal_draw(scenario, spec, mode, data, &mut rng)?
                    .map(|(d, g)| (d.set, Some(g)))),
                None => Ok(scenario
                    .draw_set(mode, data, &rng)?
                    .ok()
                    .map(|d| (d.set, None))),
            }
        })
        .collect()
}

fn split(
    id: ScenarioId,
    mode: Source,
    with_gamma: bool,
    draws: Vec<Draw>,
) -> (SetDrawBatch, Option<MarginalSampleBatch>) {
    let gamma = with_gamma.then(|| {
        MarginalSampleBatch::from_outcomes(
            mode,
            draws.iter().map(|d| d.and_then(|(s, g)| g.map(|g| (s, g)))),
        )
    });
    let sets = SetDrawBatch::from_outcomes(
        id.as_str(),
        mode,
        draws.into_iter().map(|d| d.map(|(s, _)| s)),
    );
    (sets, gamma)
}

fn with_context(id: ScenarioId, e: setid::Error) -> CliError {
    CliError::Model {
        scenario: id.as_str(),
        source: e,
    }
}

/// Runs the simulation described by `cfg` without touching the filesystem.
pub fn estimate(
    cfg: &RunConfig,
    scenario: &Scenario,
) -> Result<(Estimates, Option<PosteriorData>), CliError> {
    let id = cfg.scenario;
    let ctx = |e| with_context(id, e);
    let spec = cfg
        .family
        .map(|f| ConditionalPriorSpec::for_scenario(id, f));
    let data = if id.has_data() {
        let d = scenario
            .generate_data(&mut substream(derive_seed(cfg.seed, DATA_TAG), 0))
            .map_err(ctx)?;
        Some(scenario.posterior_data(&d).map_err(ctx)?)
    } else {
        None
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", cfg.workers)))?;
    let (prior_draws, post_draws) = pool
        .install(|| -> Result<_, setid::Error> {
            let prior = draw_family(
                scenario,
                spec.as_ref(),
                Source::Prior,
                None,
                derive_seed(cfg.seed, PRIOR_TAG),
                cfg.n_draws,
            )?;
            let post = match &data {
                Some(d) => Some(draw_family(
                    scenario,
                    spec.as_ref(),
                    Source::Posterior,
                    Some(d),
                    derive_seed(cfg.seed, POSTERIOR_TAG),
                    cfg.n_draws,
                )?),
                None => None,
            };
            Ok((prior, post))
        })
        .map_err(ctx)?;

    let grid = cfg.grid.points().map_err(ctx)?;
    let (prior, prior_gamma) = split(id, Source::Prior, spec.is_some(), prior_draws);
    let (posterior, posterior_gamma) = match post_draws {
        Some(d) => {
            let (b, g) = split(id, Source::Posterior, spec.is_some(), d);
            (Some(b), g)
        }
        None => (None, None),
    };
    let prior_coverage = estimate_coverage(&prior, &grid).map_err(ctx)?;
    let posterior_coverage = posterior
        .as_ref()
        .map(|b| estimate_coverage(b, &grid))
        .transpose()
        .map_err(ctx)?;
    Ok((
        Estimates {
            grid,
            prior,
            posterior,
            prior_coverage,
            posterior_coverage,
            prior_gamma,
            posterior_gamma,
        },
        data,
    ))
}

fn skip_counts(b: &SetDrawBatch) -> SkipCounts {
    SkipCounts {
        attempted: b.attempted(),
        kept: b.len(),
        skipped: b.skipped(),
    }
}

fn max_abs_error(c: &CoverageCurve, f: impl Fn(f64) -> f64) -> f64 {
    c.grid
        .iter()
        .zip(&c.values)
        .map(|(g, v)| (v - f(*g)).abs())
        .fold(0.0, f64::max)
}

fn diagnostics(cfg: &RunConfig, est: &Estimates, data: Option<&PosteriorData>) -> Diagnostics {
    let mut d = Diagnostics::default();
    match cfg.scenario {
        ScenarioId::ToyAnalytic => {
            d.max_abs_prior_coverage_error = Some(round_sig(max_abs_error(
                &est.prior_coverage,
                analytic_coverage_toy,
            )));
        }
        ScenarioId::BinaryMissing => {
            let on_unit = |alpha: [f64; 3]| {
                move |g: f64| {
                    if (0.0..=1.0).contains(&g) {
                        analytic_coverage_binary(g, alpha).unwrap_or(f64::NAN)
                    } else {
                        0.0
                    }
                }
            };
            let prior_alpha = [2.0, 3.0, 1.0];
            d.max_abs_prior_coverage_error = Some(round_sig(max_abs_error(
                &est.prior_coverage,
                on_unit(prior_alpha),
            )));
            if let (Some(PosteriorData::Binary { counts, alpha }), Some(c)) =
                (data, &est.posterior_coverage)
            {
                d.max_abs_posterior_coverage_error =
                    Some(round_sig(max_abs_error(c, on_unit(*alpha))));
                d.analytic_point_estimate = Some(binary_point_estimate(prior_alpha, counts).into());
            }
        }
        _ => {}
    }
    d
}

fn hist_range(cfg: &RunConfig) -> (f64, f64) {
    (cfg.grid.lo, cfg.grid.hi)
}

fn gamma_hist(
    cfg: &RunConfig,
    g: Option<&MarginalSampleBatch>,
) -> Result<Option<Histogram>, setid::Error> {
    g.map(|g| histogram(g.gammas(), cfg.bins, hist_range(cfg)))
        .transpose()
}

/// Renders the CSV files of a run, in manifest order.
pub fn render_files(cfg: &RunConfig, est: &Estimates) -> Result<Vec<(String, String)>, CliError> {
    let ctx = |e| with_context(cfg.scenario, e);
    let mut files = Vec::new();

    let mut cov = Csv::new(&["gamma", "prior_coverage", "posterior_coverage"]);
    for (k, g) in est.grid.iter().enumerate() {
        let post = est
            .posterior_coverage
            .as_ref()
            .map_or(String::new(), |c| fmt_num(c.values[k]));
        cov.row(&[fmt_num(*g), fmt_num(est.prior_coverage.values[k]), post]);
    }
    files.push(("coverage.csv".to_string(), cov.finish()));

    let mut iv = Csv::new(&["draw_index", "source", "lo", "hi"]);
    for b in std::iter::once(&est.prior).chain(est.posterior.as_ref()) {
        for (j, s) in b.draw_indices().iter().zip(b.draws()) {
            iv.row(&[
                j.to_string(),
                b.source().to_string(),
                fmt_num(s.lo()),
                fmt_num(s.hi()),
            ]);
        }
    }
    files.push(("intervals.csv".to_string(), iv.finish()));

    if cfg.family.is_some() {
        let prior = gamma_hist(cfg, est.prior_gamma.as_ref()).map_err(ctx)?;
        let post = gamma_hist(cfg, est.posterior_gamma.as_ref()).map_err(ctx)?;
        let mut h = Csv::new(&["bin_lo", "bin_hi", "prior_count", "posterior_count"]);
        let edges = histogram(&[], cfg.bins, hist_range(cfg)).map_err(ctx)?;
        for k in 0..cfg.bins {
            let (lo, hi) = edges.bin_edges(k);
            let count = |x: &Option<Histogram>| {
                x.as_ref()
                    .map_or(String::new(), |h| h.counts[k].to_string())
            };
            h.row(&[fmt_num(lo), fmt_num(hi), count(&prior), count(&post)]);
        }
        files.push(("gamma_hist.csv".to_string(), h.finish()));
    }
    Ok(files)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn out_of_range(cfg: &RunConfig, g: Option<&MarginalSampleBatch>) -> [usize; 2] {
    match gamma_hist(cfg, g) {
        Ok(Some(h)) => [h.underflow, h.overflow],
        _ => [0, 0],
    }
}

fn opt_round(x: Option<f64>) -> Option<f64> {
    x.map(round_sig)
}

/// Runs the scenario and writes `coverage.csv`, `intervals.csv`,
/// `gamma_hist.csv` (with a prior family) and `summary.json` into
/// [`RunConfig::run_dir`].
pub fn run_scenario(cfg: &RunConfig) -> Result<RunReport, CliError> {
    cfg.validate()?;
    let start = Instant::now();
    let id = cfg.scenario;
    let ctx = |e| with_context(id, e);

    let mut sc = ScenarioConfig::standard(id);
    sc.n = cfg.n;
    sc.grid = cfg.grid;
    let scenario = Scenario::new(sc).map_err(ctx)?;
    let (est, data) = estimate(cfg, &scenario)?;

    // Toy runs have no posterior; their estimates summarise the prior batch.
    let basis = est.posterior.as_ref().unwrap_or(&est.prior);
    let pe = point_estimate_set(basis).map_err(ctx)?;
    let cr = credible_region(basis, cfg.alpha).map_err(ctx)?;

    let files = render_files(cfg, &est)?;
    let dir = cfg.run_dir();
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let mut manifest = Vec::new();
    for (name, text) in &files {
        let path = dir.join(name);
        fs::write(&path, text).map_err(io_err(&path))?;
        manifest.push(FileEntry {
            name: name.clone(),
            bytes: text.len(),
            sha256: hex::encode(Sha256::digest(text.as_bytes())),
        });
    }

    let warnings = std::iter::once(&est.prior)
        .chain(est.posterior.as_ref())
        .filter_map(|b| b.warning().map(str::to_string))
        .collect();
    let gamma = cfg.family.map(|f| {
        let pg = est.prior_gamma.as_ref();
        let qg = est.posterior_gamma.as_ref();
        GammaSummary {
            family: f.to_string(),
            prior_mean: opt_round(pg.and_then(|g| g.mean())),
            prior_variance: opt_round(pg.and_then(|g| g.variance())),
            posterior_mean: opt_round(qg.and_then(|g| g.mean())),
            posterior_variance: opt_round(qg.and_then(|g| g.variance())),
            prior_attempts: pg.map_or(vec![], |g| g.rejection_histogram()),
            posterior_attempts: qg.map_or(vec![], |g| g.rejection_histogram()),
            prior_inverted: pg.map_or(0, |g| g.inverted()),
            posterior_inverted: qg.map_or(0, |g| g.inverted()),
            prior_out_of_range: out_of_range(cfg, pg),
            posterior_out_of_range: out_of_range(cfg, qg),
        }
    });
    let report = RunReport {
        config: ConfigEcho {
            scenario: id.to_string(),
            n: cfg.n,
            n_draws: cfg.n_draws,
            seed: cfg.seed,
            grid: [cfg.grid.lo, cfg.grid.hi, cfg.grid.step],
            family: cfg.family.map(|f| f.to_string()),
            alpha: cfg.alpha,
            workers: cfg.workers,
            bins: cfg.bins,
        },
        true_set: scenario.config().true_set.map(Interval::from),
        estimates_from: basis.source().to_string(),
        point_estimate: pe.into(),
        credible_region: CredibleSummary {
            lo: round_sig(cr.set.lo()),
            hi: round_sig(cr.set.hi()),
            level: cfg.alpha,
            containment: round_sig(cr.containment),
        },
        skips: Skips {
            prior: skip_counts(&est.prior),
            posterior: est.posterior.as_ref().map(skip_counts),
        },
        warnings,
        truncation_levels: scenario.truncation_levels(),
        base_covariance_repair: scenario.base_covariance_repair().map(|r| RepairSummary {
            clipped: r.clipped,
            min_eigenvalue_before: round_sig(r.min_eigenvalue_before),
            eigen_floor: scenario.config().eigen_floor,
        }),
        diagnostics: diagnostics(cfg, &est, data.as_ref()),
        gamma,
        wall_time_seconds: round_sig(start.elapsed().as_secs_f64()),
        output_dir: dir.clone(),
        manifest,
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    let path = dir.join("summary.json");
    fs::write(&path, json + "\n").map_err(io_err(&path))?;
    Ok(report)
}

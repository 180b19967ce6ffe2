//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the
//! process exits non-zero if any fails.

use std::fs;
use std::path::Path;
use std::time::{Duration, Instant};

use setid::conditional::{ks_distance_uniform, marginal_sample, ConditionalPriorSpec, Family};
use setid::dirichlet::stick_breaking;
use setid::kernel::{derive_seed, substream};
use setid::random_set::{
    containment_fraction, credible_region, estimate_capacity, estimate_coverage,
    point_estimate_set, regular_grid, IntervalSet, Source,
};
use setid::scenarios::{
    analytic_capacity_toy, analytic_coverage_binary, analytic_coverage_toy, binary_point_estimate,
    binary_posterior_params, PosteriorData, Scenario, ScenarioConfig, ScenarioId,
};
use setid_cli::config::RunConfig;
use setid_cli::run_scenario;

const SEED: u64 = 20_240_607;

type Check = Result<(bool, String), String>;
type Criterion = (&'static str, fn() -> Check);

fn fail(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn within_time(start: Instant, limit: Duration) -> (bool, String) {
    let t = start.elapsed();
    (
        t < limit,
        format!("{:.2}s < {}s", t.as_secs_f64(), limit.as_secs()),
    )
}

fn posterior_setup(
    id: ScenarioId,
    n: usize,
    seed: u64,
) -> Result<(Scenario, PosteriorData), String> {
    let mut cfg = ScenarioConfig::standard(id);
    cfg.n = Some(n);
    let s = Scenario::new(cfg).map_err(fail)?;
    let d = s
        .generate_data(&mut substream(derive_seed(seed, 1), 0))
        .map_err(fail)?;
    let pd = s.posterior_data(&d).map_err(fail)?;
    Ok((s, pd))
}

fn toy_coverage() -> Check {
    let start = Instant::now();
    let s = Scenario::standard(ScenarioId::ToyAnalytic).map_err(fail)?;
    let b = s
        .draw_batch(Source::Prior, None, derive_seed(SEED, 10), 10_000)
        .map_err(fail)?;
    let grid = regular_grid(0.0, 2.0, 0.05).map_err(fail)?;
    let c = estimate_coverage(&b, &grid).map_err(fail)?;
    let dev = grid
        .iter()
        .zip(&c.values)
        .map(|(g, v)| (v - analytic_coverage_toy(*g)).abs())
        .fold(0.0, f64::max);
    let (fast, time) = within_time(start, Duration::from_secs(1));
    Ok((
        dev <= 0.02 && fast,
        format!("max |MC - exact| = {dev:.4} <= 0.02, {time}"),
    ))
}

fn toy_capacity() -> Check {
    let s = Scenario::standard(ScenarioId::ToyAnalytic).map_err(fail)?;
    let b = s
        .draw_batch(Source::Prior, None, derive_seed(SEED, 20), 10_000)
        .map_err(fail)?;
    let mut rng = substream(derive_seed(SEED, 21), 0);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let lo = -0.5 + 3.0 * rng.uniform();
        let probe = IntervalSet::new(lo, lo + rng.uniform()).map_err(fail)?;
        let mc = estimate_capacity(&b, &probe).map_err(fail)?;
        worst = worst.max((mc - analytic_capacity_toy(&probe)).abs());
    }
    let grid = regular_grid(-0.5, 2.5, 0.05).map_err(fail)?;
    let cov = estimate_coverage(&b, &grid).map_err(fail)?;
    let mut singleton_ok = true;
    for (g, v) in grid.iter().zip(&cov.values) {
        let p = IntervalSet::point(*g);
        singleton_ok &= estimate_capacity(&b, &p).map_err(fail)? == *v;
        singleton_ok &= analytic_capacity_toy(&p) == analytic_coverage_toy(*g);
    }
    Ok((
        worst <= 0.02 && singleton_ok,
        format!("100 probes max |MC - exact| = {worst:.4} <= 0.02, singletons equal coverage: {singleton_ok}"),
    ))
}

fn truncation_law() -> Check {
    let start = Instant::now();
    let runs = 2000;
    let xs = (0..runs)
        .map(|j| {
            stick_breaking(20.0, 100, &mut substream(derive_seed(SEED, 30), j)).map(|s| -s.log_tail)
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(fail)?;
    let n = runs as f64;
    let m = xs.iter().sum::<f64>() / n;
    let se = (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt();
    let (fast, time) = within_time(start, Duration::from_secs(10));
    Ok((
        (m - 5.0).abs() <= 3.0 * se && fast,
        format!(
            "mean -ln(tail) = {m:.4}, |mean - 5| = {:.4} <= 3 SE = {:.4}, {time}",
            (m - 5.0).abs(),
            3.0 * se
        ),
    ))
}

fn interval_censored() -> Check {
    let start = Instant::now();
    let (s, pd) = posterior_setup(ScenarioId::IntervalCensored, 1000, derive_seed(SEED, 40))?;
    let b = s
        .draw_batch(Source::Posterior, Some(&pd), derive_seed(SEED, 41), 1000)
        .map_err(fail)?;
    let grid = s.config().grid.points().map_err(fail)?;
    let c = estimate_coverage(&b, &grid).map_err(fail)?;
    let inner_min = grid
        .iter()
        .zip(&c.values)
        .filter(|(g, _)| (0.5..=4.5).contains(*g))
        .map(|(_, v)| *v)
        .fold(1.0, f64::min);
    let outer_max = grid
        .iter()
        .zip(&c.values)
        .filter(|(g, _)| !(-0.5..=5.5).contains(*g))
        .map(|(_, v)| *v)
        .fold(0.0, f64::max);
    let pe = point_estimate_set(&b).map_err(fail)?;
    let pe_ok = pe.lo().abs() <= 0.15 && (pe.hi() - 5.0).abs() <= 0.15;
    let (fast, time) = within_time(start, Duration::from_secs(10));
    Ok((
        inner_min >= 0.9 && outer_max <= 0.1 && pe_ok && fast,
        format!(
            "min coverage on [0.5,4.5] = {inner_min:.3} >= 0.9, max outside [-0.5,5.5] = {outer_max:.3} <= 0.1, point estimate [{:.4}, {:.4}] vs [0, 5] (tol 0.15), {time}",
            pe.lo(),
            pe.hi()
        ),
    ))
}

fn regression_like(id: ScenarioId, truth: (f64, f64), tol: f64, limit: u64, tag: u64) -> Check {
    let start = Instant::now();
    let (s, pd) = posterior_setup(id, 1000, derive_seed(SEED, tag))?;
    let b = s
        .draw_batch(
            Source::Posterior,
            Some(&pd),
            derive_seed(SEED, tag + 1),
            1000,
        )
        .map_err(fail)?;
    let pe = point_estimate_set(&b).map_err(fail)?;
    let pe_ok = (pe.lo() - truth.0).abs() <= tol && (pe.hi() - truth.1).abs() <= tol;
    let skip = b.skip_rate();
    let repaired = match (id, s.base_covariance_repair()) {
        (ScenarioId::IntervalRegression, Some(r)) => {
            format!(", base covariance repaired: {}", r.clipped)
        }
        _ => String::new(),
    };
    let (fast, time) = within_time(start, Duration::from_secs(limit));
    Ok((
        pe_ok && skip < 0.01 && fast,
        format!(
            "point estimate [{:.4}, {:.4}] vs [{}, {}] (tol {tol}), skip rate {:.2}% < 1%{repaired}, {time}",
            pe.lo(),
            pe.hi(),
            truth.0,
            truth.1,
            100.0 * skip
        ),
    ))
}

fn binary_missing() -> Check {
    let start = Instant::now();
    let prior_alpha = [2.0, 3.0, 1.0];
    let (s, pd) = posterior_setup(ScenarioId::BinaryMissing, 1000, derive_seed(SEED, 70))?;
    let (counts, post_alpha) = match &pd {
        PosteriorData::Binary { counts, alpha } => (*counts, *alpha),
        _ => return Err("binary scenario produced non-binary data".into()),
    };
    let conj_ok = post_alpha == binary_posterior_params(prior_alpha, &counts)
        && post_alpha[0] == 2.0 + counts.n1 as f64
        && post_alpha[1] == 3.0 + counts.n0_obs as f64
        && post_alpha[2] == 1.0 + counts.m as f64
        && post_alpha.iter().sum::<f64>() == 6.0 + 1000.0;

    let grid = regular_grid(0.0, 1.0, 0.01).map_err(fail)?;
    if grid.len() != 101 {
        return Err(format!("grid has {} points", grid.len()));
    }
    let mut worst = [0.0_f64; 2];
    for (k, (mode, alpha, data)) in [
        (Source::Prior, prior_alpha, None),
        (Source::Posterior, post_alpha, Some(&pd)),
    ]
    .into_iter()
    .enumerate()
    {
        let b = s
            .draw_batch(mode, data, derive_seed(SEED, 71 + k as u64), 10_000)
            .map_err(fail)?;
        let c = estimate_coverage(&b, &grid).map_err(fail)?;
        for (g, v) in grid.iter().zip(&c.values) {
            let exact = analytic_coverage_binary(*g, alpha).map_err(fail)?;
            worst[k] = worst[k].max((v - exact).abs());
        }
        if mode == Source::Posterior {
            let pe = point_estimate_set(&b).map_err(fail)?;
            let exact = binary_point_estimate(prior_alpha, &counts);
            let pe_ok = (pe.lo() - 0.4).abs() <= 0.05
                && (pe.hi() - 0.9).abs() <= 0.05
                && (exact.lo() - 0.4).abs() <= 0.05
                && (exact.hi() - 0.9).abs() <= 0.05;
            let (fast, time) = within_time(start, Duration::from_secs(5));
            return Ok((
                worst[0] <= 0.02 && worst[1] <= 0.02 && pe_ok && conj_ok && fast,
                format!(
                    "max |MC - Beta-CDF| prior {:.4}, posterior {:.4} <= 0.02; point estimate MC [{:.4}, {:.4}], closed form [{:.4}, {:.4}] vs [0.4, 0.9] (tol 0.05); conjugacy exact: {conj_ok}; {time}",
                    worst[0],
                    worst[1],
                    pe.lo(),
                    pe.hi(),
                    exact.lo(),
                    exact.hi()
                ),
            ));
        }
    }
    unreachable!()
}

fn credible_regions() -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for (i, id) in ScenarioId::ALL.into_iter().enumerate() {
        let tag = 80 + 3 * i as u64;
        let (s, pd, mode) = if id.has_data() {
            let (s, pd) = posterior_setup(id, 1000, derive_seed(SEED, tag))?;
            (s, Some(pd), Source::Posterior)
        } else {
            (Scenario::standard(id).map_err(fail)?, None, Source::Prior)
        };
        let fit = s
            .draw_batch(mode, pd.as_ref(), derive_seed(SEED, tag + 1), 2000)
            .map_err(fail)?;
        let held = s
            .draw_batch(mode, pd.as_ref(), derive_seed(SEED, tag + 2), 2000)
            .map_err(fail)?;
        let cr = credible_region(&fit, 0.95).map_err(fail)?;
        let frac = containment_fraction(&held, &cr.set).map_err(fail)?;
        ok &= frac >= 0.93;
        parts.push(format!("{id} {frac:.3}"));
    }
    Ok((
        ok,
        format!("held-out containment >= 0.93: {}", parts.join(", ")),
    ))
}

fn marginal_support() -> Check {
    let mut support_ok = true;
    let mut contraction_ok = true;
    let mut parts = Vec::new();
    for (i, id) in ScenarioId::ALL.into_iter().enumerate() {
        let tag = 100 + 10 * i as u64;
        let (s, pd) = if id.has_data() {
            let (s, pd) = posterior_setup(id, 1000, derive_seed(SEED, tag))?;
            (s, Some(pd))
        } else {
            (Scenario::standard(id).map_err(fail)?, None)
        };
        for (k, family) in Family::ALL.into_iter().enumerate() {
            let spec = ConditionalPriorSpec::for_scenario(id, family);
            let seed = derive_seed(SEED, tag + 1 + 2 * k as u64);
            let prior =
                marginal_sample(&s, &spec, Source::Prior, None, 1000, seed).map_err(fail)?;
            support_ok &= prior.support_holds();
            if let Some(pd) = &pd {
                let post = marginal_sample(&s, &spec, Source::Posterior, Some(pd), 1000, seed + 1)
                    .map_err(fail)?;
                support_ok &= post.support_holds();
                if family == Family::III {
                    let (vp, vq) = (
                        prior.variance().unwrap_or(0.0),
                        post.variance().unwrap_or(f64::INFINITY),
                    );
                    contraction_ok &= vq < vp;
                    parts.push(format!("{id} {vq:.3} < {vp:.3}"));
                }
            }
        }
    }
    Ok((
        support_ok && contraction_ok,
        format!(
            "all gamma draws in their intervals: {support_ok}; family III posterior < prior variance: {}",
            parts.join(", ")
        ),
    ))
}

fn asymptotic_exactness() -> Check {
    let spec = ConditionalPriorSpec::for_scenario(ScenarioId::BinaryMissing, Family::III);
    let mut ks = Vec::new();
    for n in [100usize, 1000, 10_000] {
        let (s, pd) = posterior_setup(ScenarioId::BinaryMissing, n, derive_seed(SEED, 140))?;
        let counts = match &pd {
            PosteriorData::Binary { counts, .. } => *counts,
            _ => return Err("binary scenario produced non-binary data".into()),
        };
        let m = marginal_sample(
            &s,
            &spec,
            Source::Posterior,
            Some(&pd),
            200_000,
            derive_seed(SEED, 141),
        )
        .map_err(fail)?;
        let target = binary_point_estimate([2.0, 3.0, 1.0], &counts);
        ks.push(ks_distance_uniform(m.gammas(), &target).map_err(fail)?);
    }
    Ok((
        ks[0] > ks[1] && ks[1] > ks[2],
        format!(
            "KS at n = 100, 1000, 10000: {:.4} > {:.4} > {:.4}",
            ks[0], ks[1], ks[2]
        ),
    ))
}

fn csv_bytes(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut v = Vec::new();
    for e in fs::read_dir(dir).map_err(fail)? {
        let p = e.map_err(fail)?.path();
        if p.extension().is_some_and(|x| x == "csv") {
            v.push((
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).map_err(fail)?,
            ));
        }
    }
    v.sort();
    Ok(v)
}

fn determinism() -> Check {
    let root = std::env::temp_dir().join(format!("setid-acceptance-{}", std::process::id()));
    let mut ok = true;
    let mut files = 0;
    for id in ScenarioId::ALL {
        let mut outputs = Vec::new();
        for (rep, workers) in [(0, 1), (1, 1), (2, 8)] {
            let mut cfg = RunConfig::defaults(id);
            cfg.seed = SEED;
            cfg.family = Some(Family::I);
            cfg.workers = workers;
            cfg.out_dir = root.join(format!("rep{rep}"));
            let report = run_scenario(&cfg).map_err(fail)?;
            outputs.push(csv_bytes(&report.output_dir)?);
        }
        files += outputs[0].len();
        ok &= outputs[0] == outputs[1] && outputs[0] == outputs[2];
    }
    let _ = fs::remove_dir_all(&root);
    Ok((
        ok,
        format!("{files} CSV files identical across repeats and 1 vs 8 workers: {ok}"),
    ))
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("toy analytic coverage", toy_coverage),
        ("toy capacity", toy_capacity),
        ("truncation law", truncation_law),
        ("interval censored", interval_censored),
        ("errors in variables", || {
            regression_like(ScenarioId::ErrorsInVariables, (0.5, 2.0), 0.15, 20, 50)
        }),
        ("interval regression", || {
            regression_like(ScenarioId::IntervalRegression, (2.0, 6.0), 0.4, 30, 60)
        }),
        ("binary missing data", binary_missing),
        ("credible region", credible_regions),
        ("marginal support", marginal_support),
        ("asymptotic exactness", asymptotic_exactness),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (k, (name, check)) in criteria.into_iter().enumerate() {
        let (pass, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failures += usize::from(!pass);
        println!(
            "criterion {:>2} [{name}]: {} ({detail})",
            k + 1,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    if failures > 0 {
        println!("acceptance: {failures} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}

//! Conditional priors for a partially identified parameter γ given the
//! identified set, and the two-stage marginal sampler: draw F, compute its
//! interval, then draw γ from the conditional prior on that interval.

use std::fmt;
use std::str::FromStr;

use crate::error::{param, Error, Result};
use crate::kernel::{sample_beta, sample_truncated_normal, substream, RngStream};
use crate::random_set::{IntervalSet, Source};
use crate::scenarios::{IdentifiedDraw, PosteriorData, Scenario, ScenarioId};

/// Default attempt cap of the family I rejection sampler.
pub const DEFAULT_MAX_REJECTIONS: u64 = 100_000;

/// Width below which an interval is treated as a point.
pub const DEGENERATE_WIDTH: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// N(γ0, τ0²) restricted to the interval by rejection.
    I,
    /// N(μ, σ0²) truncated to the interval, drawn by inversion.
    II,
    /// Uniform on the interval.
    III,
    /// lo + (hi − lo)·Beta(p, q).
    IV,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::I, Family::II, Family::III, Family::IV];

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::I => "I",
            Family::II => "II",
            Family::III => "III",
            Family::IV => "IV",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(Family::I),
            "II" | "2" => Ok(Family::II),
            "III" | "3" => Ok(Family::III),
            "IV" | "4" => Ok(Family::IV),
            _ => param(format!("unknown prior family {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalPriorSpec {
    pub family: Family,
    /// Family I variance.
    pub tau0_sq: f64,
    /// Family II variance.
    pub sigma0_sq: f64,
    /// Family II centre.
    pub mu0: f64,
    /// Family IV shapes.
    pub p: f64,
    pub q: f64,
    /// Family I attempt cap.
    pub max_rejections: u64,
}

impl ConditionalPriorSpec {
    /// Default hyperparameters for scenario `id`.
    pub fn for_scenario(id: ScenarioId, family: Family) -> Self {
        let (p, q) = match id {
            ScenarioId::ToyAnalytic | ScenarioId::IntervalCensored => (2.0, 2.0),
            ScenarioId::ErrorsInVariables
            | ScenarioId::IntervalRegression
            | ScenarioId::BinaryMissing => (1.0, 0.5),
        };
        ConditionalPriorSpec {
            family,
            tau0_sq: 1.0,
            sigma0_sq: 2.0,
            mu0: 0.0,
            p,
            q,
            max_rejections: DEFAULT_MAX_REJECTIONS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                param(format!("{name} must be positive and finite, got {v}"))
            }
        };
        positive("tau0_sq", self.tau0_sq)?;
        positive("sigma0_sq", self.sigma0_sq)?;
        positive("p", self.p)?;
        positive("q", self.q)?;
        if !self.mu0.is_finite() {
            return param("mu0 must be finite");
        }
        if self.max_rejections == 0 {
            return param("max_rejections must be at least one");
        }
        Ok(())
    }
}

/// One γ draw and the number of proposals it took (family I; 1 otherwise,
/// 0 for a degenerate interval).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaDraw {
    pub value: f64,
    pub attempts: u64,
    /// Family I budget ran out on an interval containing γ0 and the draw was
    /// completed by inversion of the same truncated normal.
    pub inverted: bool,
}

/// Draws γ from the conditional prior on `interval`. `gamma0` is the
/// family I centre.
///
/// Family I proposes from N(γ0, τ0²) until a proposal lands in the interval.
/// When the budget runs out and γ0 lies outside the interval the draw fails
/// with [`Error::RejectionBudget`]. When γ0 lies inside, the interval is
/// merely narrow; the accepted law is N(γ0, τ0²) conditioned on the interval,
/// so the draw is finished by inversion and marked `inverted`.
pub fn sample_gamma_given_theta(
    spec: &ConditionalPriorSpec,
    interval: &IntervalSet,
    gamma0: f64,
    rng: &mut RngStream,
) -> Result<GammaDraw> {
    let (lo, hi) = (interval.lo(), interval.hi());
    if !lo.is_finite() || !hi.is_finite() {
        return param(format!("interval {interval} is not finite"));
    }
    if interval.width() < DEGENERATE_WIDTH {
        return Ok(GammaDraw {
            value: interval.midpoint(),
            attempts: 0,
            inverted: false,
        });
    }
    let value = match spec.family {
        Family::I => {
            if !gamma0.is_finite() {
                return param(format!("family I centre {gamma0} is not finite"));
            }
            let sd = spec.tau0_sq.sqrt();
            for attempt in 1..=spec.max_rejections {
                let g = gamma0 + sd * rng.standard_normal();
                if lo <= g && g <= hi {
                    return Ok(GammaDraw {
                        value: g,
                        attempts: attempt,
                        inverted: false,
                    });
                }
            }
            if lo <= gamma0 && gamma0 <= hi {
                let g = sample_truncated_normal(gamma0, spec.tau0_sq, lo, hi, rng)?;
                return Ok(GammaDraw {
                    value: g,
                    attempts: spec.max_rejections,
                    inverted: true,
                });
            }
            return Err(Error::RejectionBudget {
                lo,
                hi,
                gamma0,
                attempts: spec.max_rejections,
            });
        }
        Family::II => sample_truncated_normal(spec.mu0, spec.sigma0_sq, lo, hi, rng)?,
        Family::III => lo + (hi - lo) * rng.uniform(),
        Family::IV => lo + (hi - lo) * sample_beta(spec.p, spec.q, rng)?,
    };
    Ok(GammaDraw {
        value: value.clamp(lo, hi),
        attempts: 1,
        inverted: false,
    })
}

/// γ draws paired with the interval each was drawn on.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalSampleBatch {
    gammas: Vec<f64>,
    intervals: Vec<IntervalSet>,
    attempts: Vec<u64>,
    draw_indices: Vec<usize>,
    source: Source,
    skipped: usize,
    inverted: usize,
}

impl MarginalSampleBatch {
    /// `outcomes[j]` is draw `j`, `None` when its interval was skipped.
    pub fn from_outcomes(
        source: Source,
        outcomes: impl IntoIterator<Item = Option<(IntervalSet, GammaDraw)>>,
    ) -> Self {
        let mut b = MarginalSampleBatch {
            gammas: Vec::new(),
            intervals: Vec::new(),
            attempts: Vec::new(),
            draw_indices: Vec::new(),
            source,
            skipped: 0,
            inverted: 0,
        };
        for (j, o) in outcomes.into_iter().enumerate() {
            match o {
                Some((set, g)) => {
                    b.gammas.push(g.value);
                    b.intervals.push(set);
                    b.attempts.push(g.attempts);
                    b.draw_indices.push(j);
                    b.inverted += usize::from(g.inverted);
                }
                None => b.skipped += 1,
            }
        }
        b
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn intervals(&self) -> &[IntervalSet] {
        &self.intervals
    }

    pub fn attempts(&self) -> &[u64] {
        &self.attempts
    }

    pub fn draw_indices(&self) -> &[usize] {
        &self.draw_indices
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn skipped(&self) -> usize {
        self.skipped
    }

    /// Family I draws finished by inversion after the budget ran out.
    pub fn inverted(&self) -> usize {
        self.inverted
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    /// Whether every γ lies in its own closed interval.
    pub fn support_holds(&self) -> bool {
        self.gammas
            .iter()
            .zip(&self.intervals)
            .all(|(g, s)| s.contains(*g))
    }

    /// Counts of attempts in decades: exactly 1, 2..=10, 11..=100, and so on
    /// up to the cap. Entry `k` is `(upper bound, count)`.
    pub fn rejection_histogram(&self) -> Vec<(u64, usize)> {
        let max = self.attempts.iter().copied().max().unwrap_or(1).max(1);
        let mut bounds = vec![1u64];
        while *bounds.last().unwrap() < max {
            let next = bounds.last().unwrap().saturating_mul(10);
            bounds.push(next);
        }
        let mut counts = vec![0usize; bounds.len()];
        for &a in &self.attempts {
            let k = bounds
                .iter()
                .position(|&b| a <= b)
                .unwrap_or(bounds.len() - 1);
            counts[k] += 1;
        }
        bounds.into_iter().zip(counts).collect()
    }

    pub fn mean(&self) -> Option<f64> {
        (!self.is_empty()).then(|| self.gammas.iter().sum::<f64>() / self.len() as f64)
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> Option<f64> {
        let n = self.len();
        let m = self.mean()?;
        (n > 1).then(|| self.gammas.iter().map(|g| (g - m) * (g - m)).sum::<f64>() / (n - 1) as f64)
    }
}

/// Identified set and γ for one draw. The set comes from the child streams
/// of `rng`; γ is drawn from `rng` itself.
pub fn marginal_draw(
    scenario: &Scenario,
    spec: &ConditionalPriorSpec,
    mode: Source,
    data: Option<&PosteriorData>,
    rng: &mut RngStream,
) -> Result<Option<(IdentifiedDraw, GammaDraw)>> {
    match scenario.draw_set(mode, data, rng)? {
        Ok(d) => {
            let g = sample_gamma_given_theta(spec, &d.set, d.gamma0(), rng)?;
            Ok(Some((d, g)))
        }
        Err(_) => Ok(None),
    }
}

/// `n_draws` marginal draws; draw `j` uses substream `j` of `seed`.
pub fn marginal_sample(
    scenario: &Scenario,
    spec: &ConditionalPriorSpec,
    mode: Source,
    data: Option<&PosteriorData>,
    n_draws: usize,
    seed: u64,
) -> Result<MarginalSampleBatch> {
    spec.validate()?;
    let outcomes = (0..n_draws)
        .map(|j| {
            let mut rng = substream(seed, j as u64);
            marginal_draw(scenario, spec, mode, data, &mut rng).map(|o| o.map(|(d, g)| (d.set, g)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MarginalSampleBatch::from_outcomes(mode, outcomes))
}

/// Equal-width bin counts plus tallies of values below and above the range.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<usize>,
    pub underflow: usize,
    pub overflow: usize,
}

impl Histogram {
    pub fn bin_edges(&self, k: usize) -> (f64, f64) {
        let w = (self.hi - self.lo) / self.counts.len() as f64;
        let a = self.lo + k as f64 * w;
        let b = if k + 1 == self.counts.len() {
            self.hi
        } else {
            a + w
        };
        (a, b)
    }
}

/// Bins are half-open except the last, which includes `hi`.
pub fn histogram(values: &[f64], bins: usize, range: (f64, f64)) -> Result<Histogram> {
    let (lo, hi) = range;
    if bins == 0 {
        return param("histogram needs at least one bin");
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return param(format!("histogram range [{lo}, {hi}] is empty"));
    }
    let mut h = Histogram {
        lo,
        hi,
        counts: vec![0; bins],
        underflow: 0,
        overflow: 0,
    };
    let scale = bins as f64 / (hi - lo);
    for &v in values {
        if v < lo {
            h.underflow += 1;
        } else if v > hi || v.is_nan() {
            h.overflow += 1;
        } else {
            let k = (((v - lo) * scale) as usize).min(bins - 1);
            h.counts[k] += 1;
        }
    }
    Ok(h)
}

/// Kolmogorov–Smirnov distance between the empirical law of `values` and
/// the uniform distribution on `interval`.
pub fn ks_distance_uniform(values: &[f64], interval: &IntervalSet) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut xs = values.to_vec();
    xs.sort_by(f64::total_cmp);
    let (lo, w) = (interval.lo(), interval.width());
    let cdf = |x: f64| {
        if w <= 0.0 {
            if x >= lo {
                1.0
            } else {
                0.0
            }
        } else {
            ((x - lo) / w).clamp(0.0, 1.0)
        }
    };
    let n = xs.len() as f64;
    let mut d = 0.0_f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

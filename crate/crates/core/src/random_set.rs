//! Monte Carlo functionals of random interval identified sets.

use std::fmt;

use crate::error::{param, Error, Result};

/// Skip fraction above which a batch carries a warning.
pub const SKIP_WARNING_RATE: f64 = 0.05;

/// Closed interval [lo, hi] with lo ≤ hi.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalSet {
    lo: f64,
    hi: f64,
}

impl IntervalSet {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return param(format!("interval bounds out of order: [{lo}, {hi}]"));
        }
        Ok(IntervalSet { lo, hi })
    }

    pub fn point(x: f64) -> Self {
        IntervalSet { lo: x, hi: x }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_set(&self, other: &IntervalSet) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersects(&self, other: &IntervalSet) -> bool {
        self.lo <= other.hi && self.hi >= other.lo
    }
}

impl fmt::Display for IntervalSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Source {
    Prior,
    Posterior,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::Prior => "prior",
            Source::Posterior => "posterior",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Identified-set draws from one prior or posterior, with skip accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct SetDrawBatch {
    draws: Vec<IntervalSet>,
    draw_indices: Vec<usize>,
    source: Source,
    skipped: usize,
    scenario_id: String,
    warning: Option<String>,
}

impl SetDrawBatch {
    /// `outcomes[j]` is draw `j`, `None` when the scenario rejected it.
    pub fn from_outcomes(
        scenario_id: impl Into<String>,
        source: Source,
        outcomes: impl IntoIterator<Item = Option<IntervalSet>>,
    ) -> Self {
        let mut draws = Vec::new();
        let mut draw_indices = Vec::new();
        let mut skipped = 0;
        for (j, o) in outcomes.into_iter().enumerate() {
            match o {
                Some(set) => {
                    draws.push(set);
                    draw_indices.push(j);
                }
                None => skipped += 1,
            }
        }
        let scenario_id = scenario_id.into();
        let total = skipped + draws.len();
        let warning = (total > 0 && skipped as f64 / total as f64 > SKIP_WARNING_RATE).then(|| {
            format!(
                "{scenario_id} {source}: {skipped} of {total} draws skipped ({:.1}%)",
                100.0 * skipped as f64 / total as f64
            )
        });
        SetDrawBatch {
            draws,
            draw_indices,
            source,
            skipped,
            scenario_id,
            warning,
        }
    }

    pub fn from_sets(
        scenario_id: impl Into<String>,
        source: Source,
        sets: Vec<IntervalSet>,
    ) -> Self {
        Self::from_outcomes(scenario_id, source, sets.into_iter().map(Some))
    }

    pub fn draws(&self) -> &[IntervalSet] {
        &self.draws
    }

    /// Original draw index of each kept draw.
    pub fn draw_indices(&self) -> &[usize] {
        &self.draw_indices
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn skipped(&self) -> usize {
        self.skipped
    }

    pub fn attempted(&self) -> usize {
        self.skipped + self.draws.len()
    }

    pub fn skip_rate(&self) -> f64 {
        if self.attempted() == 0 {
            0.0
        } else {
            self.skipped as f64 / self.attempted() as f64
        }
    }

    pub fn scenario_id(&self) -> &str {
        &self.scenario_id
    }

    pub fn warning(&self) -> Option<&str> {
        self.warning.as_deref()
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    fn require_nonempty(&self) -> Result<()> {
        if self.draws.is_empty() {
            Err(Error::EmptyBatch)
        } else {
            Ok(())
        }
    }
}

/// Estimated coverage function on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageCurve {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub mc_draws: usize,
}

/// Evenly spaced grid from `lo` to `hi` (inclusive when it lands on a step).
///
/// Points are rounded to 10 decimals so that e.g. −3 + 60·0.05 is exactly 0.
pub fn regular_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return param(format!("bad grid specification {lo}:{hi}:{step}"));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|k| ((lo + k as f64 * step) * 1e10).round() / 1e10)
        .collect())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return param("grid is empty");
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) {
        return param("grid must be strictly increasing");
    }
    Ok(())
}

/// Fraction of draws containing each grid point.
pub fn estimate_coverage(batch: &SetDrawBatch, grid: &[f64]) -> Result<CoverageCurve> {
    batch.require_nonempty()?;
    check_grid(grid)?;
    let n = batch.draws.len() as f64;
    let values = grid
        .iter()
        .map(|&g| batch.draws.iter().filter(|s| s.contains(g)).count() as f64 / n)
        .collect();
    Ok(CoverageCurve {
        grid: grid.to_vec(),
        values,
        mc_draws: batch.draws.len(),
    })
}

/// Fraction of draws hitting the closed probe interval.
pub fn estimate_capacity(batch: &SetDrawBatch, probe: &IntervalSet) -> Result<f64> {
    batch.require_nonempty()?;
    let hits = batch.draws.iter().filter(|s| s.intersects(probe)).count();
    Ok(hits as f64 / batch.draws.len() as f64)
}

/// Credible region together with its in-sample containment fraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CredibleRegion {
    pub set: IntervalSet,
    pub containment: f64,
}

/// Fraction of draws lying entirely inside `region`.
pub fn containment_fraction(batch: &SetDrawBatch, region: &IntervalSet) -> Result<f64> {
    batch.require_nonempty()?;
    let inside = batch
        .draws
        .iter()
        .filter(|s| region.contains_set(s))
        .count();
    Ok(inside as f64 / batch.draws.len() as f64)
}

/// Interval C with P(Γ ⊂ C) ≥ alpha under the batch's empirical law.
///
/// Starts from the (1 − alpha)/2 order statistic of the lower bounds and the
/// matching upper order statistic of the upper bounds, then steps both
/// outward one order statistic at a time until the containment target is met.
pub fn credible_region(batch: &SetDrawBatch, alpha: f64) -> Result<CredibleRegion> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return param(format!("credible level {alpha} outside (0, 1]"));
    }
    batch.require_nonempty()?;
    let n = batch.draws.len();
    let mut los: Vec<f64> = batch.draws.iter().map(|s| s.lo).collect();
    let mut his: Vec<f64> = batch.draws.iter().map(|s| s.hi).collect();
    los.sort_by(f64::total_cmp);
    his.sort_by(f64::total_cmp);

    let tail = (1.0 - alpha) / 2.0;
    let mut k = ((tail * n as f64).floor() as usize).min(n - 1);
    loop {
        let set =
            IntervalSet::new(los[k], his[n - 1 - k]).unwrap_or_else(|_| IntervalSet::point(los[k]));
        let containment = containment_fraction(batch, &set)?;
        if containment >= alpha || k == 0 {
            return Ok(CredibleRegion { set, containment });
        }
        k -= 1;
    }
}

/// [mean of lower bounds, mean of upper bounds].
pub fn point_estimate_set(batch: &SetDrawBatch) -> Result<IntervalSet> {
    batch.require_nonempty()?;
    let n = batch.draws.len() as f64;
    let lo = batch.draws.iter().map(|s| s.lo).sum::<f64>() / n;
    let hi = batch.draws.iter().map(|s| s.hi).sum::<f64>() / n;
    if lo > hi {
        return Err(Error::DegenerateEstimate { lo, hi });
    }
    IntervalSet::new(lo, hi)
}

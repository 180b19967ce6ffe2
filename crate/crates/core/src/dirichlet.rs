//! Truncated stick-breaking draws of Dirichlet-process priors and posteriors.
//!
//! A prior draw F ~ Dir(n0, F0) is represented by K atoms ξ_j ~ F0 with
//! weights α_j = v_j ∏_{k<j} (1 − v_k), v_k ~ Be(1, n0), renormalized over
//! the first K sticks. A posterior draw given data x_1..x_n mixes such a
//! prior draw with Dirichlet(1, …, 1) weights on the data points:
//!
//! F = (1 − ρ) Σ α_j δ_{ξ_j} + ρ Σ β_i δ_{x_i},   ρ ~ Be(n, n0).

use crate::error::{param, Error, Result};
use crate::kernel::{gamma_quantile, sample_beta, sample_flat_dirichlet, MvNormal, RngStream};

/// A distribution that can seed Dirichlet-process atoms.
pub trait BaseMeasure: Send + Sync {
    fn dim(&self) -> usize;

    /// Writes one draw into `out` (length `dim()`).
    fn sample_into(&self, rng: &mut RngStream, out: &mut [f64]);
}

/// Univariate N(mean, var).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnivariateNormal {
    pub mean: f64,
    pub var: f64,
}

impl UnivariateNormal {
    pub fn new(mean: f64, var: f64) -> Result<Self> {
        if !(var > 0.0) || !var.is_finite() || !mean.is_finite() {
            return param(format!(
                "normal base measure needs positive variance, got {var}"
            ));
        }
        Ok(UnivariateNormal { mean, var })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        crate::kernel::normal_cdf((x - self.mean) / self.var.sqrt())
    }
}

impl BaseMeasure for UnivariateNormal {
    fn dim(&self) -> usize {
        1
    }

    fn sample_into(&self, rng: &mut RngStream, out: &mut [f64]) {
        out[0] = self.mean + self.var.sqrt() * rng.standard_normal();
    }
}

impl BaseMeasure for MvNormal {
    fn dim(&self) -> usize {
        MvNormal::dim(self)
    }

    fn sample_into(&self, rng: &mut RngStream, out: &mut [f64]) {
        MvNormal::sample_into(self, rng, out)
    }
}

/// Finite weighted-atom probability measure on R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    atoms: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// `atoms` is row-major, `dim` coordinates per atom. Weights are
    /// normalized to sum to one.
    pub fn new(dim: usize, atoms: Vec<f64>, mut weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return param("atom dimension must be at least one");
        }
        if weights.is_empty() || atoms.len() != dim * weights.len() {
            return param(format!(
                "{} coordinates do not match {} atoms of dimension {dim}",
                atoms.len(),
                weights.len()
            ));
        }
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return param("weights must be finite and nonnegative");
        }
        crate::kernel::sampling::normalize_in_place(&mut weights)?;
        Ok(DiscreteMeasure {
            dim,
            atoms,
            weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atom(&self, i: usize) -> &[f64] {
        &self.atoms[i * self.dim..(i + 1) * self.dim]
    }

    pub fn atoms(&self) -> impl Iterator<Item = &[f64]> {
        self.atoms.chunks_exact(self.dim)
    }

    /// ∫ h dF.
    pub fn expectation(&self, h: impl Fn(&[f64]) -> f64) -> f64 {
        expectation(self, h)
    }

    pub fn covariance(&self, i: usize, j: usize) -> Result<f64> {
        covariance(self, i, j)
    }
}

/// Weighted average of `h` over the atoms of `m`.
pub fn expectation(m: &DiscreteMeasure, h: impl Fn(&[f64]) -> f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, &w) in m.atoms().zip(&m.weights) {
        num += w * h(x);
        den += w;
    }
    num / den
}

/// Population covariance of coordinates `i` and `j` under `m`.
pub fn covariance(m: &DiscreteMeasure, i: usize, j: usize) -> Result<f64> {
    if i >= m.dim || j >= m.dim {
        return param(format!(
            "coordinate ({i}, {j}) out of range for dimension {}",
            m.dim
        ));
    }
    let mi = expectation(m, |x| x[i]);
    let mj = expectation(m, |x| x[j]);
    // centered form is stabler than E[xy] − E[x]E[y]
    Ok(expectation(m, |x| (x[i] - mi) * (x[j] - mj)))
}

/// How many sticks to keep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TruncationPolicy {
    Fixed(usize),
    /// Keep enough sticks that the discarded mass exceeds `eps` with
    /// probability at most `delta`.
    Adaptive {
        eps: f64,
        delta: f64,
    },
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy::Adaptive {
            eps: 1e-3,
            delta: 0.01,
        }
    }
}

impl TruncationPolicy {
    pub fn level(&self, n0: f64) -> Result<usize> {
        match *self {
            TruncationPolicy::Fixed(k) if k >= 1 => Ok(k),
            TruncationPolicy::Fixed(k) => {
                param(format!("fixed truncation level must be ≥ 1, got {k}"))
            }
            TruncationPolicy::Adaptive { eps, delta } => choose_truncation_level(n0, eps, delta),
        }
    }
}

/// Smallest K such that P(Σ_{j>K} α_j > eps) ≤ delta.
///
/// The discarded mass ε satisfies −ln ε ~ Gamma(K, rate n0), so the condition
/// reads: the `delta` quantile of Gamma(K, n0) is at least −ln(eps).
pub fn choose_truncation_level(n0: f64, eps: f64, delta: f64) -> Result<usize> {
    if !(n0 > 0.0) || !n0.is_finite() {
        return param(format!("concentration n0 must be positive, got {n0}"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return param(format!("eps must lie in (0, 1), got {eps}"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return param(format!("delta must lie in (0, 1), got {delta}"));
    }
    let target = -eps.ln();
    let ok = |k: usize| -> Result<bool> { Ok(gamma_quantile(delta, k as f64, n0)? >= target) };

    let mut hi = 1usize;
    while !ok(hi)? {
        hi = hi
            .checked_mul(2)
            .ok_or_else(|| Error::Parameter("truncation level overflow".into()))?;
        if hi > 1 << 40 {
            return param(format!(
                "no feasible truncation level for n0={n0}, eps={eps}"
            ));
        }
    }
    let mut lo = hi / 2; // infeasible, or zero
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// First K stick-breaking weights before renormalization.
#[derive(Debug, Clone)]
pub struct Sticks {
    pub weights: Vec<f64>,
    /// ln of the discarded mass Σ_{j>K} α_j = ∏_{k≤K} (1 − v_k).
    pub log_tail: f64,
}

pub fn stick_breaking(n0: f64, k: usize, rng: &mut RngStream) -> Result<Sticks> {
    if k == 0 {
        return param("truncation level must be at least one");
    }
    let mut weights = Vec::with_capacity(k);
    let mut log_remaining = 0.0_f64;
    for _ in 0..k {
        let v = sample_beta(1.0, n0, rng)?;
        weights.push(v * log_remaining.exp());
        log_remaining += (-v).ln_1p();
    }
    Ok(Sticks {
        weights,
        log_tail: log_remaining,
    })
}

/// Concentration, base measure and truncation of a Dirichlet process.
#[derive(Debug, Clone)]
pub struct DirichletProcessSpec<B> {
    n0: f64,
    base: B,
    truncation: TruncationPolicy,
    level: usize,
}

impl<B: BaseMeasure> DirichletProcessSpec<B> {
    pub fn new(n0: f64, base: B, truncation: TruncationPolicy) -> Result<Self> {
        if !(n0 > 0.0) || !n0.is_finite() {
            return param(format!("concentration n0 must be positive, got {n0}"));
        }
        let level = truncation.level(n0)?;
        Ok(DirichletProcessSpec {
            n0,
            base,
            truncation,
            level,
        })
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    pub fn base(&self) -> &B {
        &self.base
    }

    pub fn truncation(&self) -> TruncationPolicy {
        self.truncation
    }

    /// Resolved number of prior atoms K.
    pub fn truncation_level(&self) -> usize {
        self.level
    }

    fn prior_atoms(&self, rng: &mut RngStream) -> Vec<f64> {
        let d = self.base.dim();
        let mut atoms = vec![0.0; d * self.level];
        for chunk in atoms.chunks_exact_mut(d) {
            self.base.sample_into(rng, chunk);
        }
        atoms
    }
}

/// Observed points x_1..x_n in R^d, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Observations {
    dim: usize,
    values: Vec<f64>,
}

impl Observations {
    pub fn new(dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 || !values.len().is_multiple_of(dim) {
            return param(format!(
                "{} values cannot be split into points of dimension {dim}",
                values.len()
            ));
        }
        Ok(Observations { dim, values })
    }

    pub fn univariate(values: Vec<f64>) -> Self {
        Observations { dim: 1, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }
}

/// One draw from Dir(n0, F0) truncated at K sticks.
pub fn draw_prior<B: BaseMeasure>(
    spec: &DirichletProcessSpec<B>,
    rng: &mut RngStream,
) -> Result<DiscreteMeasure> {
    let sticks = stick_breaking(spec.n0, spec.level, rng)?;
    let atoms = spec.prior_atoms(rng);
    DiscreteMeasure::new(spec.base.dim(), atoms, sticks.weights)
}

/// One draw from the posterior Dir(n0 + n, (n0 F0 + n F_n)/(n0 + n)).
///
/// The returned measure lists the K prior atoms first, then the n data points
/// in input order (repeated values stay separate atoms).
pub fn draw_posterior<B: BaseMeasure>(
    spec: &DirichletProcessSpec<B>,
    data: &Observations,
    rng: &mut RngStream,
) -> Result<DiscreteMeasure> {
    if data.is_empty() {
        return param("posterior draw needs at least one observation; use draw_prior");
    }
    if data.dim != spec.base.dim() {
        return param(format!(
            "data dimension {} differs from base measure dimension {}",
            data.dim,
            spec.base.dim()
        ));
    }
    let n = data.len();
    let rho = sample_beta(n as f64, spec.n0, rng)?;
    let beta = sample_flat_dirichlet(n, rng)?;
    let sticks = stick_breaking(spec.n0, spec.level, rng)?;
    let atoms_prior = spec.prior_atoms(rng);

    let stick_total: f64 = sticks.weights.iter().sum();
    let mut weights = Vec::with_capacity(spec.level + n);
    weights.extend(sticks.weights.iter().map(|w| (1.0 - rho) * w / stick_total));
    weights.extend(beta.iter().map(|b| rho * b));

    let mut atoms = atoms_prior;
    atoms.extend_from_slice(&data.values);
    DiscreteMeasure::new(data.dim, atoms, weights)
}

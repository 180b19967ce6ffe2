//! The five partially identified models: configuration, data generation and
//! the map from a drawn distribution to its identified interval.
//!
//! | id                    | identified set                                  |
//! |-----------------------|-------------------------------------------------|
//! | `toy_analytic`        | [θ1, θ2], θ1 ~ U[0,1], θ2 ~ U[1,2]              |
//! | `interval_censored`   | [E_F1(Y1), E_F2(Y2)], independent DPs           |
//! | `errors_in_variables` | between σyz/σzz and σyy/σyz under one joint DP  |
//! | `interval_regression` | [E_F(Y1 Z), E_F(Y2 Z)] / E_F(Z X)               |
//! | `binary_missing`      | [p11, p11 + p̃·0], (p11, p01, p̃·0) ~ Dirichlet  |

mod data;
mod oracles;

use std::fmt;
use std::str::FromStr;

pub use data::{
    count_binary, count_binary_dataset, BinaryCounts, Dataset, BINARY_P_D, BINARY_P_Y,
    CENSORED_VAR, CENSORED_Y1_MEAN, CENSORED_Y2_MEAN, EIV_GAMMA, REGRESSION_LOWER_SLOPE,
    REGRESSION_NOISE_VAR, REGRESSION_UPPER_SLOPE,
};
pub use oracles::{
    analytic_capacity_toy, analytic_coverage_binary, analytic_coverage_toy, binary_point_estimate,
    binary_posterior_params,
};

use crate::dirichlet::{
    covariance, draw_posterior, draw_prior, expectation, DirichletProcessSpec, DiscreteMeasure,
    Observations, TruncationPolicy, UnivariateNormal,
};
use crate::error::{param, Error, Result};
use crate::kernel::{
    psd_repair, sample_dirichlet, substream, MvNormal, PsdRepair, RngStream, SymMatrix,
};
use crate::random_set::{regular_grid, IntervalSet, SetDrawBatch, Source};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioId {
    ToyAnalytic,
    IntervalCensored,
    ErrorsInVariables,
    IntervalRegression,
    BinaryMissing,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 5] = [
        ScenarioId::ToyAnalytic,
        ScenarioId::IntervalCensored,
        ScenarioId::ErrorsInVariables,
        ScenarioId::IntervalRegression,
        ScenarioId::BinaryMissing,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioId::ToyAnalytic => "toy_analytic",
            ScenarioId::IntervalCensored => "interval_censored",
            ScenarioId::ErrorsInVariables => "errors_in_variables",
            ScenarioId::IntervalRegression => "interval_regression",
            ScenarioId::BinaryMissing => "binary_missing",
        }
    }

    /// Column names of the simulated data (empty for the toy model).
    pub fn observables(&self) -> &'static [&'static str] {
        match self {
            ScenarioId::ToyAnalytic => &[],
            ScenarioId::IntervalCensored => &["y1", "y2"],
            ScenarioId::ErrorsInVariables => &["y", "z"],
            ScenarioId::IntervalRegression => &["y1", "y2", "x", "z"],
            ScenarioId::BinaryMissing => &["yd", "d"],
        }
    }

    pub fn has_data(&self) -> bool {
        !self.observables().is_empty()
    }

    pub fn description(&self) -> &'static str {
        match self {
            ScenarioId::ToyAnalytic => "parametric toy prior, theta1 ~ U[0,1], theta2 ~ U[1,2]",
            ScenarioId::IntervalCensored => {
                "interval-censored mean, two independent Dirichlet processes"
            }
            ScenarioId::ErrorsInVariables => "linear regression with a mismeasured regressor",
            ScenarioId::IntervalRegression => "interval regression with a positive instrument",
            ScenarioId::BinaryMissing => "binary outcome with missing data, Dirichlet-multinomial",
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ScenarioId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Parameter(format!("unknown scenario {s:?}")))
    }
}

/// Evaluation grid `lo, lo + step, …, hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn points(&self) -> Result<Vec<f64>> {
        regular_grid(self.lo, self.hi, self.step)
    }
}

/// Prior hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorHyper {
    /// Fixed uniform priors of the toy model.
    Uniforms,
    /// Independent Dir(n0_i, F0_i) priors for Y1 and Y2.
    IndependentNormals {
        n0: [f64; 2],
        base: [UnivariateNormal; 2],
    },
    /// One Dir(n0, N(mean, cov)) prior on the joint distribution.
    JointNormal {
        n0: f64,
        mean: Vec<f64>,
        cov: SymMatrix,
    },
    /// Dir(alpha) on (p11, p01, p̃·0).
    Dirichlet { alpha: [f64; 3] },
}

/// Everything needed to simulate one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub id: ScenarioId,
    /// Sample size; `None` for the toy model, which has no data.
    pub n: Option<usize>,
    pub hyper: PriorHyper,
    pub truncation: TruncationPolicy,
    /// Eigenvalue floor used when a base covariance is not positive definite.
    pub eigen_floor: f64,
    pub grid: GridSpec,
    /// Identified set of the data-generating process.
    pub true_set: Option<IntervalSet>,
}

pub const DEFAULT_SAMPLE_SIZE: usize = 1000;
pub const DEFAULT_GRID_STEP: f64 = 0.05;

/// Base covariance of the interval-regression prior on (y1, y2, x, z). Not
/// positive semidefinite as stated; it is repaired before use.
pub fn interval_regression_base_cov() -> SymMatrix {
    SymMatrix::from_rows(&[
        vec![0.1, 0.0, 0.2, 1.5],
        vec![0.0, 0.1, 0.2, 3.0],
        vec![0.2, 0.2, 0.1, 0.5],
        vec![1.5, 3.0, 0.5, 0.1],
    ])
    .expect("constant matrix is symmetric")
}

fn interval(lo: f64, hi: f64) -> IntervalSet {
    IntervalSet::new(lo, hi).expect("constant interval is ordered")
}

impl ScenarioConfig {
    /// Default configuration of scenario `id`.
    pub fn standard(id: ScenarioId) -> Self {
        let grid = |lo, hi| GridSpec {
            lo,
            hi,
            step: DEFAULT_GRID_STEP,
        };
        let n = id.has_data().then_some(DEFAULT_SAMPLE_SIZE);
        let (hyper, grid, true_set) = match id {
            ScenarioId::ToyAnalytic => (PriorHyper::Uniforms, grid(0.0, 2.5), None),
            ScenarioId::IntervalCensored => (
                PriorHyper::IndependentNormals {
                    n0: [10.0, 20.0],
                    base: [
                        UnivariateNormal {
                            mean: 0.0,
                            var: 1.0,
                        },
                        UnivariateNormal {
                            mean: 10.0,
                            var: 1.0,
                        },
                    ],
                },
                grid(-3.0, 12.0),
                Some(interval(0.0, 5.0)),
            ),
            ScenarioId::ErrorsInVariables => (
                PriorHyper::JointNormal {
                    n0: 20.0,
                    mean: vec![0.0, 0.0],
                    cov: SymMatrix::from_rows(&[vec![2.0, 0.9], vec![0.9, 2.0]])
                        .expect("constant matrix is symmetric"),
                },
                grid(0.0, 3.0),
                Some(interval(0.5, 2.0)),
            ),
            ScenarioId::IntervalRegression => (
                PriorHyper::JointNormal {
                    n0: 20.0,
                    mean: vec![0.0, 4.0, 0.0, 0.5],
                    cov: interval_regression_base_cov(),
                },
                grid(-1.0, 20.0),
                Some(interval(2.0, 6.0)),
            ),
            ScenarioId::BinaryMissing => (
                PriorHyper::Dirichlet {
                    alpha: [2.0, 3.0, 1.0],
                },
                grid(0.0, 1.0),
                Some(interval(
                    BINARY_P_Y * BINARY_P_D,
                    BINARY_P_Y * BINARY_P_D + (1.0 - BINARY_P_D),
                )),
            ),
        };
        ScenarioConfig {
            id,
            n,
            hyper,
            truncation: TruncationPolicy::default(),
            eigen_floor: crate::kernel::DEFAULT_EIGEN_FLOOR,
            grid,
            true_set,
        }
    }
}

/// Why a draw produced no identified set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    /// σyz ≤ 0 in the errors-in-variables model.
    NonPositiveCovariance,
    /// E_F(ZX) ≤ 0 in the interval regression.
    NonPositiveInstrumentMoment,
    /// Lower functional above the upper one.
    InvertedBounds,
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SkipReason::NonPositiveCovariance => "non-positive cov(y, z)",
            SkipReason::NonPositiveInstrumentMoment => "non-positive E(zx)",
            SkipReason::InvertedBounds => "inverted bounds",
        })
    }
}

/// An identified interval together with the moments the conditional priors
/// are centred on: γ0 = (anchors[0] + anchors[1]) / (2 · scale).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentifiedDraw {
    pub set: IntervalSet,
    pub anchors: [f64; 2],
    pub scale: f64,
}

impl IdentifiedDraw {
    fn plain(lo: f64, hi: f64) -> Option<Self> {
        let set = IntervalSet::new(lo, hi).ok()?;
        Some(IdentifiedDraw {
            set,
            anchors: [lo, hi],
            scale: 1.0,
        })
    }

    pub fn gamma0(&self) -> f64 {
        (self.anchors[0] + self.anchors[1]) / (2.0 * self.scale)
    }
}

pub type SetOutcome = std::result::Result<IdentifiedDraw, SkipReason>;

/// [E_F1(Y1), E_F2(Y2)]; inverted draws are skipped.
pub fn interval_censored_bounds(f1: &DiscreteMeasure, f2: &DiscreteMeasure) -> SetOutcome {
    let e1 = expectation(f1, |x| x[0]);
    let e2 = expectation(f2, |x| x[0]);
    IdentifiedDraw::plain(e1, e2).ok_or(SkipReason::InvertedBounds)
}

/// [min, max] of σyz/σzz and σyy/σyz for atoms (y, z).
pub fn errors_in_variables_bounds(f: &DiscreteMeasure) -> SetOutcome {
    let syy = covariance(f, 0, 0).expect("two-dimensional atoms");
    let syz = covariance(f, 0, 1).expect("two-dimensional atoms");
    let szz = covariance(f, 1, 1).expect("two-dimensional atoms");
    if !(syz > 0.0) {
        return Err(SkipReason::NonPositiveCovariance);
    }
    let forward = syz / szz;
    let reverse = syy / syz;
    IdentifiedDraw::plain(forward.min(reverse), forward.max(reverse))
        .ok_or(SkipReason::InvertedBounds)
}

/// [E(Y1 Z), E(Y2 Z)] / E(Z X) for atoms (y1, y2, x, z), raw moments.
pub fn interval_regression_bounds(f: &DiscreteMeasure) -> SetOutcome {
    let ezx = expectation(f, |w| w[3] * w[2]);
    if !(ezx > 0.0) {
        return Err(SkipReason::NonPositiveInstrumentMoment);
    }
    let e1 = expectation(f, |w| w[0] * w[3]);
    let e2 = expectation(f, |w| w[1] * w[3]);
    let set = IntervalSet::new(e1 / ezx, e2 / ezx).map_err(|_| SkipReason::InvertedBounds)?;
    Ok(IdentifiedDraw {
        set,
        anchors: [e1, e2],
        scale: ezx,
    })
}

/// [p11, p11 + p̃·0] from (p11, p01, p̃·0).
pub fn binary_bounds(p: [f64; 3]) -> SetOutcome {
    let hi = (p[0] + p[2]).min(1.0);
    IdentifiedDraw::plain(p[0], hi).ok_or(SkipReason::InvertedBounds)
}

/// Data reshaped for posterior draws.
#[derive(Debug, Clone)]
pub enum PosteriorData {
    Censored {
        y1: Observations,
        y2: Observations,
    },
    Joint(Observations),
    Binary {
        counts: BinaryCounts,
        alpha: [f64; 3],
    },
}

#[derive(Debug, Clone)]
enum Model {
    Toy,
    Censored([DirichletProcessSpec<UnivariateNormal>; 2]),
    Joint(DirichletProcessSpec<MvNormal>),
    Binary([f64; 3]),
}

/// A validated, ready-to-sample scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    config: ScenarioConfig,
    model: Model,
    repair: Option<PsdRepair>,
}

impl Scenario {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        if config.id.has_data() != config.n.is_some() {
            return param(match config.n {
                Some(_) => format!("scenario {} takes no data", config.id),
                None => format!("scenario {} needs a sample size", config.id),
            });
        }
        if config.n == Some(0) {
            return param("sample size must be at least one");
        }
        config.grid.points()?;
        let mut repair = None;
        let model = match (&config.id, &config.hyper) {
            (ScenarioId::ToyAnalytic, PriorHyper::Uniforms) => Model::Toy,
            (ScenarioId::IntervalCensored, PriorHyper::IndependentNormals { n0, base }) => {
                Model::Censored([
                    DirichletProcessSpec::new(
                        n0[0],
                        UnivariateNormal::new(base[0].mean, base[0].var)?,
                        config.truncation,
                    )?,
                    DirichletProcessSpec::new(
                        n0[1],
                        UnivariateNormal::new(base[1].mean, base[1].var)?,
                        config.truncation,
                    )?,
                ])
            }
            (
                ScenarioId::ErrorsInVariables | ScenarioId::IntervalRegression,
                PriorHyper::JointNormal { n0, mean, cov },
            ) => {
                let want = if config.id == ScenarioId::ErrorsInVariables {
                    2
                } else {
                    4
                };
                if mean.len() != want {
                    return param(format!(
                        "{} needs a {want}-dimensional base measure",
                        config.id
                    ));
                }
                let fixed = psd_repair(cov, config.eigen_floor)?;
                let base = MvNormal::new(mean, &fixed.matrix)?;
                repair = Some(fixed);
                Model::Joint(DirichletProcessSpec::new(*n0, base, config.truncation)?)
            }
            (ScenarioId::BinaryMissing, PriorHyper::Dirichlet { alpha }) => {
                if alpha.iter().any(|a| !(*a > 0.0)) {
                    return param("Dirichlet parameters must be positive");
                }
                Model::Binary(*alpha)
            }
            (id, h) => return param(format!("hyperparameters {h:?} do not fit scenario {id}")),
        };
        Ok(Scenario {
            config,
            model,
            repair,
        })
    }

    pub fn standard(id: ScenarioId) -> Result<Self> {
        Scenario::new(ScenarioConfig::standard(id))
    }

    pub fn id(&self) -> ScenarioId {
        self.config.id
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    /// Result of the eigenvalue repair of a joint base covariance.
    pub fn base_covariance_repair(&self) -> Option<&PsdRepair> {
        self.repair.as_ref()
    }

    /// Atoms kept per Dirichlet-process draw (per process).
    pub fn truncation_levels(&self) -> Vec<usize> {
        match &self.model {
            Model::Censored(dps) => dps.iter().map(|d| d.truncation_level()).collect(),
            Model::Joint(dp) => vec![dp.truncation_level()],
            _ => vec![],
        }
    }

    pub fn generate_data(&self, rng: &mut RngStream) -> Result<Dataset> {
        match self.config.n {
            Some(n) => data::generate(self.config.id, n, rng),
            None => Err(Error::NoData(self.config.id.as_str())),
        }
    }

    pub fn posterior_data(&self, dataset: &Dataset) -> Result<PosteriorData> {
        if dataset.scenario() != self.config.id {
            return Err(Error::Dataset(format!(
                "dataset belongs to {}, not {}",
                dataset.scenario(),
                self.config.id
            )));
        }
        if dataset.is_empty() {
            return Err(Error::Dataset("dataset has no rows".into()));
        }
        Ok(match &self.model {
            Model::Toy => return Err(Error::NoData(self.config.id.as_str())),
            Model::Censored(_) => PosteriorData::Censored {
                y1: Observations::univariate(dataset.column("y1").expect("y1 column")),
                y2: Observations::univariate(dataset.column("y2").expect("y2 column")),
            },
            Model::Joint(_) => PosteriorData::Joint(Observations::new(
                dataset.ncols(),
                dataset.values().to_vec(),
            )?),
            Model::Binary(alpha) => {
                let counts = count_binary_dataset(dataset)?;
                PosteriorData::Binary {
                    counts,
                    alpha: binary_posterior_params(*alpha, &counts),
                }
            }
        })
    }

    /// One identified-set draw from the prior, or from the posterior given
    /// `data`.
    ///
    /// Distribution draws use child streams of `rng` (0 and 1), so `rng`
    /// itself stays free for whatever the caller draws next.
    pub fn draw_set(
        &self,
        mode: Source,
        data: Option<&PosteriorData>,
        rng: &RngStream,
    ) -> Result<SetOutcome> {
        let data = match mode {
            Source::Prior => None,
            Source::Posterior => Some(data.ok_or_else(|| {
                Error::Parameter(format!(
                    "posterior draw for {} needs a dataset",
                    self.config.id
                ))
            })?),
        };
        let mut r0 = rng.child(0);
        match (&self.model, data) {
            (Model::Toy, None) => {
                let t1 = r0.uniform();
                let t2 = 1.0 + r0.uniform();
                Ok(IdentifiedDraw::plain(t1, t2).ok_or(SkipReason::InvertedBounds))
            }
            (Model::Toy, Some(_)) => Err(Error::NoData(self.config.id.as_str())),
            (Model::Censored([dp1, dp2]), d) => {
                let mut r1 = rng.child(1);
                let (f1, f2) = match d {
                    None => (draw_prior(dp1, &mut r0)?, draw_prior(dp2, &mut r1)?),
                    Some(PosteriorData::Censored { y1, y2 }) => (
                        draw_posterior(dp1, y1, &mut r0)?,
                        draw_posterior(dp2, y2, &mut r1)?,
                    ),
                    Some(_) => return param("posterior data does not match scenario"),
                };
                Ok(interval_censored_bounds(&f1, &f2))
            }
            (Model::Joint(dp), d) => {
                let f = match d {
                    None => draw_prior(dp, &mut r0)?,
                    Some(PosteriorData::Joint(obs)) => draw_posterior(dp, obs, &mut r0)?,
                    Some(_) => return param("posterior data does not match scenario"),
                };
                Ok(match self.config.id {
                    ScenarioId::ErrorsInVariables => errors_in_variables_bounds(&f),
                    _ => interval_regression_bounds(&f),
                })
            }
            (Model::Binary(alpha), d) => {
                let a = match d {
                    None => *alpha,
                    Some(PosteriorData::Binary { alpha, .. }) => *alpha,
                    Some(_) => return param("posterior data does not match scenario"),
                };
                let p = sample_dirichlet(&a, &mut r0)?;
                Ok(binary_bounds([p[0], p[1], p[2]]))
            }
        }
    }

    /// `n_draws` identified sets, draw `j` taken from substream `j` of `seed`.
    pub fn draw_batch(
        &self,
        mode: Source,
        data: Option<&PosteriorData>,
        seed: u64,
        n_draws: usize,
    ) -> Result<SetDrawBatch> {
        let outcomes = (0..n_draws)
            .map(|j| {
                self.draw_set(mode, data, &substream(seed, j as u64))
                    .map(|o| o.ok().map(|d| d.set))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SetDrawBatch::from_outcomes(
            self.id().as_str(),
            mode,
            outcomes,
        ))
    }
}

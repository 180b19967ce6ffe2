//! Run configuration: command-line flags layered over an optional flat
//! `key = value` file, layered over the per-scenario defaults.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use setid::conditional::Family;
use setid::scenarios::{GridSpec, ScenarioConfig, ScenarioId};

use crate::CliError;

pub const DEFAULT_DRAWS: usize = 1000;
pub const DEFAULT_ALPHA: f64 = 0.95;
pub const DEFAULT_BINS: usize = 40;
pub const DEFAULT_OUT_DIR: &str = "runs";

#[derive(Debug, Parser)]
#[command(
    name = "setid",
    version,
    about = "Bayesian inference for partially identified models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one scenario and write CSV/JSON results.
    Run(RunArgs),
    /// List the available scenarios and their defaults.
    ListScenarios,
    /// Print closed-form coverage or capacity values.
    Oracle(OracleArgs),
}

#[derive(Debug, Default, Clone, Args)]
pub struct RunArgs {
    /// Flat `key = value` configuration file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub scenario: Option<String>,
    /// Sample size of the simulated dataset.
    #[arg(long)]
    pub n: Option<String>,
    /// Monte Carlo draws from the prior and from the posterior.
    #[arg(long = "draws", alias = "n-draws")]
    pub n_draws: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Evaluation grid as `lo:hi:step`.
    #[arg(long)]
    pub grid: Option<String>,
    /// Conditional prior family for γ: I, II, III or IV.
    #[arg(long)]
    pub family: Option<String>,
    /// Credible level.
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<String>,
    /// Histogram bins for γ draws.
    #[arg(long)]
    pub bins: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    /// `toy_analytic` or `binary_missing`.
    #[arg(long)]
    pub scenario: String,
    /// Points at which to evaluate the coverage function.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub gamma: Vec<f64>,
    /// Probe interval `lo:hi` for the toy capacity functional.
    #[arg(long, allow_hyphen_values = true)]
    pub probe: Vec<String>,
    /// Dirichlet parameters (binary scenario), default 2,3,1.
    #[arg(long, value_delimiter = ',')]
    pub dirichlet: Option<Vec<f64>>,
    /// Observed counts `n1,n0,m`; turns the prior parameters into posterior ones.
    #[arg(long, value_delimiter = ',')]
    pub counts: Option<Vec<u64>>,
}

/// Fully resolved run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: ScenarioId,
    pub n: Option<usize>,
    pub n_draws: usize,
    pub seed: u64,
    pub grid: GridSpec,
    pub family: Option<Family>,
    pub alpha: f64,
    pub out_dir: PathBuf,
    pub workers: usize,
    pub bins: usize,
}

impl RunConfig {
    pub fn defaults(scenario: ScenarioId) -> Self {
        let sc = ScenarioConfig::standard(scenario);
        RunConfig {
            scenario,
            n: sc.n,
            n_draws: DEFAULT_DRAWS,
            seed: 0,
            grid: sc.grid,
            family: None,
            alpha: DEFAULT_ALPHA,
            out_dir: PathBuf::from(DEFAULT_OUT_DIR),
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            bins: DEFAULT_BINS,
        }
    }

    /// `<out_dir>/<scenario>_seed<seed>`.
    pub fn run_dir(&self) -> PathBuf {
        self.out_dir
            .join(format!("{}_seed{}", self.scenario, self.seed))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.n == Some(0) {
            return usage("n must be at least 1");
        }
        if self.scenario.has_data() != self.n.is_some() {
            return usage(format!("scenario {} takes no data", self.scenario));
        }
        if self.n_draws == 0 {
            return usage("draws must be at least 1");
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return usage(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if self.workers == 0 {
            return usage("workers must be at least 1");
        }
        if self.bins == 0 {
            return usage("bins must be at least 1");
        }
        self.grid
            .points()
            .map_err(|e| CliError::Usage(format!("grid: {e}")))?;
        Ok(())
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T, CliError> {
    raw.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("malformed value {raw:?} for {key}")))
}

pub fn parse_grid(raw: &str) -> Result<GridSpec, CliError> {
    let parts: Vec<&str> = raw.split([':', ',']).collect();
    if parts.len() != 3 {
        return usage(format!("malformed grid {raw:?}; expected lo:hi:step"));
    }
    Ok(GridSpec {
        lo: parse_value("grid", parts[0])?,
        hi: parse_value("grid", parts[1])?,
        step: parse_value("grid", parts[2])?,
    })
}

/// Reads `key = value` lines; blank lines and `#` comments are ignored.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "config line {}: expected key = value, got {line:?}",
                i + 1
            ))
        })?;
        let key = k.trim().replace('-', "_");
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return usage(format!("config key {key:?} given twice"));
        }
    }
    Ok(out)
}

const KEYS: [&str; 11] = [
    "scenario", "n", "n_draws", "draws", "seed", "grid", "family", "alpha", "out_dir", "workers",
    "bins",
];

/// Merges file values and flags (flags win) over the scenario defaults.
pub fn resolve(args: &RunArgs) -> Result<RunConfig, CliError> {
    let mut map = match &args.config {
        Some(path) => read_config(path)?,
        None => BTreeMap::new(),
    };
    if let Some(k) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return usage(format!("unknown config key {k:?}"));
    }
    if map.contains_key("draws") && map.contains_key("n_draws") {
        return usage("config gives both draws and n_draws");
    }
    if let Some(v) = map.remove("draws") {
        map.insert("n_draws".into(), v);
    }
    let mut set = |key: &str, flag: &Option<String>| {
        if let Some(v) = flag {
            map.insert(key.to_string(), v.clone());
        }
    };
    set("scenario", &args.scenario);
    set("n", &args.n);
    set("n_draws", &args.n_draws);
    set("seed", &args.seed);
    set("grid", &args.grid);
    set("family", &args.family);
    set("alpha", &args.alpha);
    set("workers", &args.workers);
    set("bins", &args.bins);
    if let Some(dir) = &args.out_dir {
        map.insert("out_dir".into(), dir.to_string_lossy().into_owned());
    }

    let scenario: ScenarioId = match map.get("scenario") {
        Some(s) => s
            .parse()
            .map_err(|_| CliError::Usage(format!("unknown scenario {s:?}")))?,
        None => return usage("missing --scenario"),
    };
    let mut cfg = RunConfig::defaults(scenario);
    if let Some(v) = map.get("n") {
        if !scenario.has_data() {
            return usage(format!("scenario {scenario} takes no data (got n = {v})"));
        }
        cfg.n = Some(parse_value("n", v)?);
    }
    if let Some(v) = map.get("n_draws") {
        cfg.n_draws = parse_value("draws", v)?;
    }
    if let Some(v) = map.get("seed") {
        cfg.seed = parse_value("seed", v)?;
    }
    if let Some(v) = map.get("grid") {
        cfg.grid = parse_grid(v)?;
    }
    if let Some(v) = map.get("family") {
        cfg.family = Some(
            v.parse()
                .map_err(|_| CliError::Usage(format!("unknown prior family {v:?}")))?,
        );
    }
    if let Some(v) = map.get("alpha") {
        cfg.alpha = parse_value("alpha", v)?;
    }
    if let Some(v) = map.get("out_dir") {
        cfg.out_dir = PathBuf::from(v);
    }
    if let Some(v) = map.get("workers") {
        cfg.workers = parse_value("workers", v)?;
    }
    if let Some(v) = map.get("bins") {
        cfg.bins = parse_value("bins", v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn read_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_file(&text)
}

/// Parses a full command line (`setid run …`) into a [`RunConfig`].
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
    match cli.command {
        Command::Run(args) => resolve(&args),
        _ => usage("expected the run command"),
    }
}

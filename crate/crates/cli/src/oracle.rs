//! Closed-form coverage and capacity values for the toy and binary models.

use setid::random_set::IntervalSet;
use setid::scenarios::{
    analytic_capacity_toy, analytic_coverage_binary, analytic_coverage_toy,
    binary_posterior_params, BinaryCounts, ScenarioId,
};

use crate::config::OracleArgs;
use crate::output::{fmt_num, Csv};
use crate::CliError;

pub const DEFAULT_BINARY_DIRICHLET: [f64; 3] = [2.0, 3.0, 1.0];

fn parse_probe(raw: &str) -> Result<IntervalSet, CliError> {
    let bad = || CliError::Usage(format!("malformed probe {raw:?}; expected lo:hi"));
    let (a, b) = raw.split_once(':').ok_or_else(bad)?;
    let lo: f64 = a.trim().parse().map_err(|_| bad())?;
    let hi: f64 = b.trim().parse().map_err(|_| bad())?;
    IntervalSet::new(lo, hi).map_err(|_| bad())
}

/// CSV text with one row per requested point or probe.
pub fn oracle_table(args: &OracleArgs) -> Result<String, CliError> {
    let id: ScenarioId = args
        .scenario
        .parse()
        .map_err(|_| CliError::Usage(format!("unknown scenario {:?}", args.scenario)))?;
    if args.gamma.is_empty() && args.probe.is_empty() {
        return Err(CliError::Usage(
            "give --gamma points or --probe intervals".into(),
        ));
    }
    match id {
        ScenarioId::ToyAnalytic => {
            if args.dirichlet.is_some() || args.counts.is_some() {
                return Err(CliError::Usage(
                    "toy_analytic takes no Dirichlet parameters or counts".into(),
                ));
            }
            let mut csv = Csv::new(&["kind", "lo", "hi", "value"]);
            for &g in &args.gamma {
                csv.row(&[
                    "coverage".into(),
                    fmt_num(g),
                    fmt_num(g),
                    fmt_num(analytic_coverage_toy(g)),
                ]);
            }
            for p in &args.probe {
                let k = parse_probe(p)?;
                csv.row(&[
                    "capacity".into(),
                    fmt_num(k.lo()),
                    fmt_num(k.hi()),
                    fmt_num(analytic_capacity_toy(&k)),
                ]);
            }
            Ok(csv.finish())
        }
        ScenarioId::BinaryMissing => {
            if !args.probe.is_empty() {
                return Err(CliError::Usage(
                    "binary_missing supports --gamma only".into(),
                ));
            }
            let alpha = match &args.dirichlet {
                None => DEFAULT_BINARY_DIRICHLET,
                Some(v) if v.len() == 3 => [v[0], v[1], v[2]],
                Some(v) => {
                    return Err(CliError::Usage(format!(
                        "expected 3 Dirichlet parameters, got {}",
                        v.len()
                    )))
                }
            };
            let alpha = match &args.counts {
                None => alpha,
                Some(c) if c.len() == 3 => binary_posterior_params(
                    alpha,
                    &BinaryCounts {
                        n1: c[0],
                        n0_obs: c[1],
                        m: c[2],
                    },
                ),
                Some(c) => {
                    return Err(CliError::Usage(format!(
                        "expected 3 counts, got {}",
                        c.len()
                    )))
                }
            };
            let mut csv = Csv::new(&["gamma", "coverage"]);
            for &g in &args.gamma {
                let v = analytic_coverage_binary(g, alpha).map_err(|e| CliError::Model {
                    scenario: id.as_str(),
                    source: e,
                })?;
                csv.row(&[fmt_num(g), fmt_num(v)]);
            }
            Ok(csv.finish())
        }
        other => Err(CliError::Usage(format!(
            "no closed-form oracle for {other}; use toy_analytic or binary_missing"
        ))),
    }
}

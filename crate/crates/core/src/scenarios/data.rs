//! Simulated datasets and their CSV form.

use std::fmt::Write as _;

use super::ScenarioId;
use crate::error::{Error, Result};
use crate::kernel::RngStream;

/// Rows of one scenario's observable variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    scenario: ScenarioId,
    values: Vec<f64>,
}

impl Dataset {
    /// `values` is row-major with `scenario.observables().len()` columns.
    pub fn new(scenario: ScenarioId, values: Vec<f64>) -> Result<Self> {
        let ncols = scenario.observables().len();
        if ncols == 0 {
            return Err(Error::NoData(scenario.as_str()));
        }
        if !values.len().is_multiple_of(ncols) {
            return Err(Error::Dataset(format!(
                "{} values do not form rows of {ncols} columns",
                values.len()
            )));
        }
        Ok(Dataset { scenario, values })
    }

    pub fn scenario(&self) -> ScenarioId {
        self.scenario
    }

    pub fn columns(&self) -> &'static [&'static str] {
        self.scenario.observables()
    }

    pub fn ncols(&self) -> usize {
        self.columns().len()
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.ncols();
        &self.values[i * c..(i + 1) * c]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.ncols())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns().iter().position(|c| *c == name)?;
        Some(self.rows().map(|r| r[k]).collect())
    }

    /// Header row naming the observables, then one line per row. Values are
    /// written in shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns().join(",");
        out.push('\n');
        for r in self.rows() {
            let line: Vec<String> = r.iter().map(|v| format!("{v:?}")).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    pub fn from_csv(scenario: ScenarioId, text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Dataset("missing header row".into()))?;
        let expected = scenario.observables().join(",");
        if header.trim() != expected {
            return Err(Error::Dataset(format!(
                "header {header:?} does not match {expected:?}"
            )));
        }
        let ncols = scenario.observables().len();
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != ncols {
                return Err(Error::Dataset(format!(
                    "row {} has {} fields, expected {ncols}",
                    i + 1,
                    fields.len()
                )));
            }
            for f in fields {
                let v: f64 = f
                    .trim()
                    .parse()
                    .map_err(|_| Error::Dataset(format!("row {}: cannot parse {f:?}", i + 1)))?;
                values.push(v);
            }
        }
        Dataset::new(scenario, values)
    }
}

// Data-generating process constants. N(a, b) is mean a, variance b.
pub const CENSORED_Y1_MEAN: f64 = 0.0;
pub const CENSORED_Y2_MEAN: f64 = 5.0;
pub const CENSORED_VAR: f64 = 0.1;
pub const EIV_GAMMA: f64 = 1.0;
pub const REGRESSION_LOWER_SLOPE: f64 = 2.0;
pub const REGRESSION_UPPER_SLOPE: f64 = 6.0;
pub const REGRESSION_NOISE_VAR: f64 = 0.1;
pub const BINARY_P_Y: f64 = 0.8;
pub const BINARY_P_D: f64 = 0.5;

pub(super) fn generate(scenario: ScenarioId, n: usize, rng: &mut RngStream) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::Parameter("sample size must be at least one".into()));
    }
    let sd = CENSORED_VAR.sqrt();
    let mut values = Vec::with_capacity(n * scenario.observables().len());
    match scenario {
        ScenarioId::ToyAnalytic => return Err(Error::NoData(scenario.as_str())),
        ScenarioId::IntervalCensored => {
            for _ in 0..n {
                values.push(CENSORED_Y1_MEAN + sd * rng.standard_normal());
                values.push(CENSORED_Y2_MEAN + sd * rng.standard_normal());
            }
        }
        ScenarioId::ErrorsInVariables => {
            for _ in 0..n {
                let xi = rng.standard_normal();
                let u = rng.standard_normal();
                let v = rng.standard_normal();
                values.push(EIV_GAMMA * xi + u);
                values.push(xi + v);
            }
        }
        ScenarioId::IntervalRegression => {
            let noise = REGRESSION_NOISE_VAR.sqrt();
            for _ in 0..n {
                let z = rng.uniform();
                let x = z + rng.standard_normal();
                let y1 = REGRESSION_LOWER_SLOPE * x + noise * rng.standard_normal();
                let y2 = REGRESSION_UPPER_SLOPE * x + noise * rng.standard_normal();
                values.extend_from_slice(&[y1, y2, x, z]);
            }
        }
        ScenarioId::BinaryMissing => {
            for _ in 0..n {
                let y = (rng.uniform() < BINARY_P_Y) as u8 as f64;
                let d = (rng.uniform() < BINARY_P_D) as u8 as f64;
                values.push(y * d);
                values.push(d);
            }
        }
    }
    Dataset::new(scenario, values)
}

/// Counts of observed ones, observed zeros and missing outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BinaryCounts {
    pub n1: u64,
    pub n0_obs: u64,
    pub m: u64,
}

impl BinaryCounts {
    pub fn total(&self) -> u64 {
        self.n1 + self.n0_obs + self.m
    }
}

/// Tallies masked pairs (y·d, d).
pub fn count_binary(rows: &[[f64; 2]]) -> Result<BinaryCounts> {
    let mut c = BinaryCounts {
        n1: 0,
        n0_obs: 0,
        m: 0,
    };
    for (i, &[yd, d]) in rows.iter().enumerate() {
        match (yd, d) {
            (1.0, 1.0) => c.n1 += 1,
            (0.0, 1.0) => c.n0_obs += 1,
            (0.0, 0.0) => c.m += 1,
            _ => {
                return Err(Error::Dataset(format!(
                    "row {i}: ({yd}, {d}) is not a masked binary pair"
                )))
            }
        }
    }
    Ok(c)
}

/// [`count_binary`] over a `binary_missing` dataset.
pub fn count_binary_dataset(data: &Dataset) -> Result<BinaryCounts> {
    if data.scenario() != ScenarioId::BinaryMissing {
        return Err(Error::Dataset(format!(
            "expected a binary_missing dataset, got {}",
            data.scenario()
        )));
    }
    let rows: Vec<[f64; 2]> = data.rows().map(|r| [r[0], r[1]]).collect();
    count_binary(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::substream;

    #[test]
    fn counts_small_examples() {
        let c = count_binary(&[[1.0, 1.0], [0.0, 1.0], [0.0, 0.0]]).unwrap();
        assert_eq!(
            c,
            BinaryCounts {
                n1: 1,
                n0_obs: 1,
                m: 1
            }
        );
        let ones = count_binary(&[[1.0, 1.0]; 7]).unwrap();
        assert_eq!(
            ones,
            BinaryCounts {
                n1: 7,
                n0_obs: 0,
                m: 0
            }
        );
    }

    #[test]
    fn counts_reject_malformed_rows() {
        assert!(count_binary(&[[1.0, 0.0]]).is_err());
        assert!(count_binary(&[[0.5, 1.0]]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let mut rng = substream(11, 0);
        let data = generate(ScenarioId::IntervalRegression, 25, &mut rng).unwrap();
        let text = data.to_csv();
        assert!(text.starts_with("y1,y2,x,z\n"));
        let back = Dataset::from_csv(ScenarioId::IntervalRegression, &text).unwrap();
        assert_eq!(back, data);
    }

    #[test]
    fn csv_rejects_wrong_header_and_ragged_rows() {
        assert!(Dataset::from_csv(ScenarioId::BinaryMissing, "y,z\n1,1\n").is_err());
        assert!(Dataset::from_csv(ScenarioId::BinaryMissing, "yd,d\n1\n").is_err());
        assert!(Dataset::from_csv(ScenarioId::BinaryMissing, "yd,d\n1,x\n").is_err());
    }

    #[test]
    fn toy_has_no_data() {
        let mut rng = substream(11, 1);
        assert!(matches!(
            generate(ScenarioId::ToyAnalytic, 10, &mut rng),
            Err(Error::NoData(_))
        ));
    }
}

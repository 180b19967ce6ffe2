//! Command-line driver: configuration, orchestration and serialization of
//! simulation runs.

pub mod config;
pub mod oracle;
pub mod output;
pub mod run;

use std::path::PathBuf;

pub use config::{parse_config, resolve, Cli, Command, RunConfig};
pub use oracle::oracle_table;
pub use run::{run_scenario, RunReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),

    #[error("{scenario}: {source}")]
    Model {
        scenario: &'static str,
        #[source]
        source: setid::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Process exit status: 2 for usage errors, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

/// Text of the `list-scenarios` verb.
pub fn scenario_listing() -> String {
    use setid::scenarios::{ScenarioConfig, ScenarioId};
    let mut out = String::new();
    for id in ScenarioId::ALL {
        let c = ScenarioConfig::standard(id);
        let n = c.n.map_or("-".to_string(), |n| n.to_string());
        let truth = c.true_set.map_or("-".to_string(), |s| s.to_string());
        out.push_str(&format!(
            "{:<20} n={:<5} grid={}:{}:{} true_set={}  {}\n",
            id.as_str(),
            n,
            c.grid.lo,
            c.grid.hi,
            c.grid.step,
            truth,
            id.description()
        ));
    }
    out
}

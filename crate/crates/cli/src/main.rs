use std::process::ExitCode;

use clap::Parser;
use setid_cli::{oracle_table, resolve, run_scenario, scenario_listing, Cli, CliError, Command};

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run(args) => {
            let cfg = resolve(&args)?;
            let report = run_scenario(&cfg)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            println!(
                "{}: point estimate [{}, {}], {}% credible region [{}, {}] -> {}",
                report.config.scenario,
                report.point_estimate.lo,
                report.point_estimate.hi,
                100.0 * cfg.alpha,
                report.credible_region.lo,
                report.credible_region.hi,
                report.output_dir.display()
            );
        }
        Command::ListScenarios => print!("{}", scenario_listing()),
        Command::Oracle(args) => print!("{}", oracle_table(&args)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("setid: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

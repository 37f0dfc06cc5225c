use std::process::ExitCode;

use clap::Parser;
use eposit_cli::args::{Cli, Command};
use eposit_cli::bench::format_report;
use eposit_cli::{cmd_bench, cmd_plot, cmd_simulate, cmd_solve, exit_code, CliError};

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Simulate(args) => {
            let out = cmd_simulate(&args)?;
            if out.failed > 0 {
                eprintln!("warning: {} frame(s) could not be solved and were skipped", out.failed);
            }
            println!("wrote {} rows to {}", out.solved, out.results.display());
            Ok(exit_code::OK)
        }
        Command::Solve(args) => {
            let out = cmd_solve(&args)?;
            print!("{}", out.report());
            Ok(if out.estimate.converged { exit_code::OK } else { exit_code::NOT_CONVERGED })
        }
        Command::Bench(args) => {
            let report = cmd_bench(&args)?;
            print!("{}", format_report(&report));
            Ok(exit_code::OK)
        }
        Command::Plot(args) => {
            let path = cmd_plot(&args)?;
            println!("wrote {}", path.display());
            Ok(exit_code::OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = run(cli).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}

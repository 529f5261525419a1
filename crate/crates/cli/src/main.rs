use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use attrisk::{Params, Simulation};
use attrisk_cli::{
    cmd_estimate, cmd_exact_bias, cmd_min_controls, cmd_simulate, cmd_table1, parse_dataset,
    render_estimates, CliError, OutputFormat,
};
use clap::{Args, Parser, Subcommand};

/// Small-sample corrected attributable risk for case-control studies.
#[derive(Debug, Parser)]
#[command(name = "attrisk", version)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Table, global = true)]
    output: OutputFormat,

    /// Decimal places for reported numbers.
    #[arg(long, default_value_t = 4, global = true)]
    precision: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Exposure probability among cases.
    #[arg(long)]
    q: f64,
    /// Exposure probability among controls.
    #[arg(long)]
    p: f64,
    /// Number of cases.
    #[arg(long)]
    m: u64,
    /// Number of controls.
    #[arg(long)]
    n: u64,
}

impl ModelArgs {
    fn params(&self) -> Result<Params, CliError> {
        Ok(Params::new(self.q, self.p, self.m, self.n)?)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-stratum attributable risk and odds ratios from a count file.
    Estimate {
        /// Comma-separated counts, one stratum per line ('-' for stdin).
        file: PathBuf,
    },
    /// Exact bias of both estimators on the 4x4 (q, p) grid with m = n = 10.
    Table1,
    /// Exact bias of both estimators by enumeration, with the closed form.
    ExactBias(ModelArgs),
    /// Monte Carlo bias and variance, checked against the exact values.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// Number of replications.
        #[arg(long)]
        reps: u64,
        /// Seed for the counter-based generator.
        #[arg(long)]
        seed: u64,
        /// Drop draws with no unexposed controls instead of applying the fallback.
        #[arg(long)]
        condition_d_nonzero: bool,
    },
    /// Fewest controls for which the corrected estimator's bias is below tol.
    MinControls {
        #[arg(long)]
        q: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0.005)]
        tol: f64,
    },
}

fn run(cli: &Cli) -> Result<String, CliError> {
    let (format, precision) = (cli.output, cli.precision);
    match &cli.command {
        Command::Estimate { file } => {
            let dataset = if file.as_os_str() == "-" {
                parse_dataset(io::stdin().lock())?
            } else {
                parse_dataset(File::open(file)?)?
            };
            let rows = cmd_estimate(&dataset);
            let mut stderr = io::stderr().lock();
            for row in &rows {
                for warning in &row.warnings {
                    writeln!(stderr, "warning: stratum '{}': {warning}", row.label)?;
                }
            }
            Ok(render_estimates(&rows, format, precision))
        }
        Command::Table1 => Ok(cmd_table1()?.render(format, precision)),
        Command::ExactBias(model) => Ok(cmd_exact_bias(model.params()?)?.render(format, precision)),
        Command::Simulate {
            model,
            reps,
            seed,
            condition_d_nonzero,
        } => {
            let config = Simulation::new(model.params()?, *reps, *seed, *condition_d_nonzero)?;
            Ok(cmd_simulate(&config)?.render(format, precision))
        }
        Command::MinControls { q, p, tol } => {
            Ok(cmd_min_controls(*q, *p, *tol)?.render(format, precision))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sib_core::experiments::{
    cmd_check, cmd_estimate_c0, cmd_order_test, cmd_run, cmd_sweep_eps, cmd_sweep_n, CommandOutcome,
    ExitStatus, RunConfig,
};

/// Simulator and verification harness for the Schrödinger–improved-Boussinesq
/// system and its Zakharov limit.
#[derive(Parser, Debug)]
#[command(name = "sib", version)]
struct Cli {
    /// TOML configuration; defaults describe the standard preset.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding `run.output`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Suppress the summary on stdout.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate once and write series.csv.
    Run,
    /// Compare runs with decreasing ε against the ε = 0 reference.
    SweepEps {
        /// Comma-separated ε values, overriding `sweep.eps_list`.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
    },
    /// Compare Yosida-regularized runs against the original system.
    SweepN {
        /// Comma-separated Yosida indices, overriding `sweep.n_list`.
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<u64>>,
    },
    /// Check the symbol inequalities and operator identities.
    Check {
        /// Corrupt the Yosida symbol to exercise the failure path.
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Estimate the sharp Gagliardo–Nirenberg constant and write c0.json.
    EstimateC0,
    /// Measure the convergence order of the splitting.
    OrderTest {
        /// Comma-separated time steps, overriding `sweep.dt_list`.
        #[arg(long, value_delimiter = ',')]
        dt: Option<Vec<f64>>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let mut config = match &cli.config {
        Some(path) => match RunConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(ExitStatus::InvalidConfig.code() as u8);
            }
        },
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        config.run.output = out.clone();
    }
    let out = config.run.output.clone();
    let outcome: CommandOutcome = match cli.command {
        Command::Run => cmd_run(&config, &out),
        Command::SweepEps { eps } => cmd_sweep_eps(&config, eps.as_deref(), &out),
        Command::SweepN { n } => cmd_sweep_n(&config, n.as_deref(), &out),
        Command::Check { inject_fault } => {
            config.check.inject_fault |= inject_fault;
            cmd_check(&config, &out)
        }
        Command::EstimateC0 => cmd_estimate_c0(&config, &out),
        Command::OrderTest { dt } => cmd_order_test(&config, dt.as_deref(), &out),
    };
    for line in &outcome.lines {
        if outcome.status == ExitStatus::Pass {
            if !cli.quiet {
                println!("{line}");
            }
        } else {
            eprintln!("{line}");
        }
    }
    ExitCode::from(outcome.code() as u8)
}

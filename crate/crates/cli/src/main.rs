//! `genmean` command-line tool.
//!
//! Exit codes: 0 on success, 1 for invalid input or I/O failures, 2 when the
//! numerics broke down. Failures print a one-line JSON object to stderr.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use genmean::{Method, Setting};

use crate::commands::RunArgs;
use crate::config::Config;

#[derive(Parser)]
#[command(
    name = "genmean",
    version,
    about = "Learned multiplex-graph aggregation for node classification"
)]
struct Cli {
    /// JSON configuration; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Table2,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic multiplex instance.
    Synth {
        #[arg(long)]
        setting: Setting,
        #[arg(long)]
        std: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a method on a graph and classify its unlabeled nodes.
    Run {
        /// MULTI, BINOM, MIN, GEOM, ARIT, HARM, MAX or LAYER<k>.
        #[arg(long)]
        method: Option<Method>,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        /// Ground-truth classes for every node; enables accuracy.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Accuracy grid over the synthetic settings with APR and AR summaries.
    Bench {
        #[arg(long, value_enum, default_value = "table2")]
        suite: Suite,
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Wall-clock time of one method as the graph grows.
    Scaling {
        #[arg(long, value_delimiter = ',', default_value = "1200,2400,4800")]
        sizes: Vec<usize>,
        #[arg(long, default_value = "BINOM")]
        method: Method,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        repeats: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn dispatch(cli: Cli) -> genmean::Result<()> {
    let config = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Synth {
            setting,
            std,
            seed,
            out,
        } => commands::cmd_synth(setting, std, seed, &out, &config),
        Command::Run {
            method,
            graph,
            labels,
            truth,
            seed,
            out,
        } => commands::cmd_run(
            &RunArgs {
                method,
                graph,
                labels,
                truth,
                seed,
                out,
            },
            &config,
        ),
        Command::Bench {
            suite: Suite::Table2,
            samples,
            seed,
            out,
        } => commands::cmd_bench(samples, seed, &out, &config),
        Command::Scaling {
            sizes,
            method,
            seed,
            repeats,
            out,
        } => commands::cmd_scaling(sizes, method, seed, repeats, &out, &config),
    }
}

fn report(kind: &str, message: &str, code: u8) -> ExitCode {
    let body = serde_json::json!({ "error": kind, "message": message, "exit_code": code });
    eprintln!("{body}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            return report("usage", &e.to_string(), 1);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let code = if e.is_numeric() { 2 } else { 1 };
            report(e.kind(), &e.to_string(), code)
        }
    }
}

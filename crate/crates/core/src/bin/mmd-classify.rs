use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mmd_classify::cli::{self, ClassifyArgs, ExponentsArgs, SimulateArgs};
use mmd_classify::{Case, TestKind};

#[derive(Parser)]
#[command(name = "mmd-classify", version, about = "MMD-based classification of data streams under distribution uncertainty")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TestArg {
    Fixed,
    Sequential,
    TwoPhase,
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    Simple,
    General,
}

#[derive(Subcommand)]
enum Command {
    /// Run every experiment in a config and write CSVs and a manifest.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, env = "MMD_CLASSIFY_WORKERS")]
        workers: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Leave the wall-time column empty so outputs are byte-identical across runs.
        #[arg(long)]
        no_timing: bool,
        /// Run only the named experiments.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
    },
    /// Print cluster distances and achievable exponents for a config.
    Exponents {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Comma-separated uncertainty sizes.
        #[arg(long, value_delimiter = ',')]
        delta_sweep: Vec<f64>,
    },
    /// Classify sequences stored as CSV columns x, y1..yM and print the verdict as JSON.
    Classify {
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        ys: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "fixed")]
        test: TestArg,
        #[arg(long, value_enum, default_value = "simple")]
        case: CaseArg,
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        lambda1: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        lambda2: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        lambda3: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long = "n0", default_value_t = 3)]
        n0: usize,
        #[arg(long = "k", default_value_t = 2)]
        k: usize,
        #[arg(long)]
        tau_max: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        sigma0: f64,
    },
}

fn main() -> ExitCode {
    let parsed = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { cli::EXIT_INVALID as u8 } else { 0 });
        }
    };
    let (mut out, mut err) = (io::stdout().lock(), io::stderr().lock());
    let code = match parsed.command {
        Command::Simulate {
            config,
            out: dir,
            workers,
            seed,
            trials,
            no_timing,
            only,
        } => cli::cmd_simulate(
            &SimulateArgs {
                config,
                out: dir,
                workers: workers.unwrap_or_else(cli::default_workers),
                seed,
                trials,
                timing: !no_timing,
                only,
            },
            &mut err,
        ),
        Command::Exponents { config, csv, delta_sweep } => {
            cli::cmd_exponents(&ExponentsArgs { config, csv, delta_sweep }, &mut out, &mut err)
        }
        Command::Classify {
            x,
            ys,
            test,
            case,
            lambda,
            lambda1,
            lambda2,
            lambda3,
            alpha,
            n,
            n0,
            k,
            tau_max,
            sigma0,
        } => cli::cmd_classify(
            &ClassifyArgs {
                x,
                ys,
                test: match test {
                    TestArg::Fixed => TestKind::Fixed,
                    TestArg::Sequential => TestKind::Sequential,
                    TestArg::TwoPhase => TestKind::TwoPhase,
                },
                case: match case {
                    CaseArg::Simple => Case::Simple,
                    CaseArg::General => Case::General,
                },
                lambda,
                lambda1,
                lambda2,
                lambda3,
                alpha,
                n,
                n0,
                k,
                tau_max,
                sigma0,
            },
            &mut out,
            &mut err,
        ),
    };
    ExitCode::from(code as u8)
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use degenelab::config::{load_config, Command, Format, Overrides};
use degenelab::pipeline::run;

/// Solver and certificate runs for degenerate elliptic problems.
#[derive(Parser, Debug)]
#[command(name = "degenelab", version, allow_negative_numbers = true)]
struct Cli {
    command: Command,
    /// JSON configuration document.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Degeneracy exponent.
    #[arg(long)]
    gamma: Option<f64>,
    /// Element count (finest level for `mms`).
    #[arg(long = "n-elems")]
    n_elems: Option<usize>,
    /// Seed of the randomized suites.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("DEGENELAB_LOG", "error")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let overrides = Overrides {
        command: Some(cli.command),
        gamma: cli.gamma,
        elements: cli.n_elems,
        seed: cli.seed,
        output_dir: cli.out,
        format: cli.format,
    };
    let outcome = load_config(cli.config.as_deref(), &overrides)
        .map_err(degenelab::Error::from)
        .and_then(|c| run(&c));
    match outcome {
        Ok(o) => ExitCode::from(o.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

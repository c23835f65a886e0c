//! `errbound eval|sweep|zzlb [flags] <spec-file|example:NAME> [params] [bounds]`

mod commands;
mod error;
mod specfile;
mod tokens;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::{Axis, ZzlbOptions};
use crate::error::{CliError, CliResult};
use crate::specfile::Loaded;

#[derive(Parser)]
#[command(name = "errbound", version, about = "Bounds on the minimum error probability of Bayesian hypothesis tests")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the requested bounds, one CSV row each.
    Eval(Common),
    /// Evaluate bounds over a grid of one variable.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// p, q, lambda2, alpha or posterior.
        #[arg(long)]
        axis: String,
        /// Grid as lo:hi:n.
        #[arg(long)]
        grid: String,
    },
    /// Ziv-Zakai MSE bound with an exact-map (default), b1 or b2 provider.
    Zzlb {
        #[command(flatten)]
        common: Common,
        /// Explicit h grid as lo:hi:n; by default h runs over the prior window.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, default_value_t = 0.1)]
        h_step: f64,
        #[arg(long, default_value_t = 0.1)]
        phi_step: f64,
    },
}

#[derive(Args)]
struct Common {
    /// Monte Carlo seed.
    #[arg(long)]
    seed: Option<u64>,
    /// exact, quadrature or monte-carlo.
    #[arg(long)]
    method: Option<String>,
    /// Absolute and relative quadrature tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Spec file path or example:NAME.
    spec: String,
    /// Example parameters (key=value) followed by bounds, e.g. `lambda2=1 b1 p=2 map`.
    #[arg(allow_hyphen_values = true)]
    tokens: Vec<String>,
}

impl Common {
    fn load(&self) -> CliResult<Loaded> {
        let mut loaded = specfile::load(&self.spec, &self.tokens)?;
        if let Some(m) = &self.method {
            loaded.config.method = m.parse().map_err(|e: errbound::Error| CliError::usage(e.to_string()))?;
        }
        if let Some(t) = self.tol {
            loaded.config.abs_tol = t;
            loaded.config.rel_tol = t;
        }
        if let Some(s) = self.seed {
            loaded.config.seed = s;
        }
        loaded.config.validate().map_err(|e| CliError::usage(e.to_string()))?;
        Ok(loaded)
    }

    fn output(&self) -> CliResult<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Eval(common) => {
            let loaded = common.load()?;
            let mut out = common.output()?;
            let r = commands::eval(&loaded, &mut out);
            out.flush()?;
            r
        }
        Command::Sweep { common, axis, grid } => {
            let axis = Axis::parse(&axis)?;
            let grid = commands::parse_grid(&grid)?;
            let loaded = common.load()?;
            let mut out = common.output()?;
            let r = commands::sweep(&loaded, axis, &grid, &mut out, &mut io::stderr());
            out.flush()?;
            r
        }
        Command::Zzlb {
            common,
            grid,
            h_step,
            phi_step,
        } => {
            let h_grid = grid.as_deref().map(commands::parse_grid).transpose()?;
            let loaded = common.load()?;
            let mut out = common.output()?;
            let r = commands::zzlb(
                &loaded,
                &ZzlbOptions {
                    h_grid,
                    h_step,
                    phi_step,
                },
                &mut out,
            );
            out.flush()?;
            r
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! `gnlab`: rearrangements, norms and Gagliardo–Nirenberg experiments from
//! the command line.
//!
//! Exit codes: 0 pass, 1 mathematical failure or falsification, 2 usage or
//! configuration error. `GN_THREADS` caps the worker threads.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::Mode;

#[derive(Parser)]
#[command(
    name = "gnlab",
    version,
    about = "Gagliardo–Nirenberg inequalities in rearrangement-invariant spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Grid on which a family string is sampled.
#[derive(Args, Clone)]
struct GridArgs {
    /// Space dimension (1 to 3).
    #[arg(long, default_value_t = 1)]
    dim: usize,
    /// Cells per axis.
    #[arg(long, default_value_t = 512)]
    res: usize,
    /// Half-width of the box; fitted to the support when omitted.
    #[arg(long)]
    half_width: Option<f64>,
}

/// Three spaces and the derivative orders `j < k`.
#[derive(Args, Clone)]
struct TripleArgs {
    #[arg(long, default_value = "Lp:2")]
    x: String,
    #[arg(long, default_value = "Lp:2")]
    y: String,
    #[arg(long, default_value = "Lp:2")]
    z: String,
    #[arg(long, default_value_t = 1)]
    j: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Print `u*` and `u**` of a grid function.
    ///
    /// CSV columns: t, u_star, u_double_star. The t values are log-spaced
    /// over (1e-3, 1e2) times the measure of the support.
    Rearrange {
        /// Built-in family, e.g. `chi:1.0`, `sa_bump:k=2`, `gauss:r=1`.
        #[arg(long, conflicts_with = "input")]
        family: Option<String>,
        /// Grid function as JSON (the serde form of `GridFunction`).
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 64)]
        t_samples: usize,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verifier from a JSON config and write report.json, report.txt
    /// and curve.csv.
    ///
    /// curve.csv has columns s, best_constant for the verifiers and
    /// s, analytic_lhs, analytic_rhs, analytic_ratio, empirical_ratio for
    /// falsify.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the mode of the config.
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Emit one experiment as CSV.
    ///
    /// riesz-herz: family, t, u_double_star, mu_star, ratio.
    /// gnnc: t, phi_x, phi_y, phi_z, ratio.
    /// mazya: family, res, sup_ratio, sup_ratio_refined, relative_change.
    /// best-constant: s, best_constant (needs --config).
    /// falsify: s, analytic_lhs, analytic_rhs, analytic_ratio, empirical_ratio.
    Scan {
        #[arg(long, value_enum)]
        what: ScanKind,
        /// Family strings; repeat the flag for several.
        #[arg(long)]
        family: Vec<String>,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        triple: TripleArgs,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Lower and upper dilation and point count for falsify.
        #[arg(long, num_args = 3, value_names = ["MIN", "MAX", "COUNT"])]
        s: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hölder factorization checks.
    Holder {
        #[command(subcommand)]
        which: HolderCommand,
    },
    /// Validate a Young function and estimate its upper index.
    YoungCheck {
        /// Young function string, e.g. `pow:2`, `plog:2,1`, `comp:pow:2:1.5`.
        young: String,
    },
}

#[derive(Subcommand)]
enum HolderCommand {
    /// Factor `L^{P,p} = L^{R,r}·L^{Q,q}` and saturate on random step functions.
    Lorentz {
        #[arg(long = "big-p")]
        big_p: f64,
        #[arg(long)]
        p: f64,
        #[arg(long = "big-r")]
        big_r: f64,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check the factorization conditions for Young functions `A`, `B`, `C`.
    Orlicz {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long)]
        c: String,
        #[arg(long, default_value_t = 64)]
        pairs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScanKind {
    RieszHerz,
    Gnnc,
    Mazya,
    BestConstant,
    Falsify,
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("GN_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| anyhow::anyhow!("GN_THREADS must be a positive integer, got `{v}`"))?;
        if n == 0 {
            anyhow::bail!("GN_THREADS must be a positive integer, got 0");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    configure_threads()?;
    match cli.command {
        Command::Rearrange {
            family,
            input,
            grid,
            t_samples,
            out,
        } => commands::rearrange(family, input, &grid, t_samples, out),
        Command::Verify { config, mode, out_dir } => commands::verify(&config, mode, &out_dir),
        Command::Scan {
            what,
            family,
            grid,
            triple,
            config,
            s,
            out,
        } => commands::scan(what, &family, &grid, &triple, config.as_deref(), s, out),
        Command::Holder { which } => match which {
            HolderCommand::Lorentz {
                big_p,
                p,
                big_r,
                r,
                samples,
                seed,
            } => commands::holder_lorentz(big_p, p, big_r, r, samples, seed),
            HolderCommand::Orlicz { a, b, c, pairs, seed } => commands::holder_orlicz(&a, &b, &c, pairs, seed),
        },
        Command::YoungCheck { young } => commands::young_check(&young),
    }
}

/// A closed stdout (`gnlab ... | head`) is not an error.
fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        c.downcast_ref::<std::io::Error>()
            .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe)
            || c.downcast_ref::<csv::Error>().is_some_and(
                |c| matches!(c.kind(), csv::ErrorKind::Io(io) if io.kind() == std::io::ErrorKind::BrokenPipe),
            )
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

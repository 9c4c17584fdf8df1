use clap::{Parser, Subcommand, ValueEnum};
use ibl_cli::report::render;
use ibl_cli::{
    cmd_cdp, cmd_classify, cmd_domain, cmd_geometric, cmd_solve, cmd_verify, load, parse_cdp, CliError, Convention,
    VerifyOptions,
};
use ibl_core::gaussian::SolveOptions;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "ibl", version, about = "Inverse Brascamp-Lieb data: cases, constants, domains and checks")]
struct Cli {
    /// How the kernel block is read: `pi` for exp(-pi <x,Qx>), `half` for
    /// exp(-<x,Mx>/2).
    #[arg(long, value_enum, default_value_t = KernelConvention::Pi, global = true)]
    kernel_convention: KernelConvention,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelConvention {
    Pi,
    Half,
}

#[derive(clap::Args)]
struct SolveArgs {
    /// Stationarity tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    /// Random starts when the objective is not known to be concave.
    #[arg(long, default_value_t = 20)]
    multistart: usize,
}

impl SolveArgs {
    fn options(&self) -> SolveOptions {
        SolveOptions { tol_stat: self.tol, max_iter: self.max_iter, multistart: self.multistart, ..Default::default() }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Case of the datum and the splitting of its kernel.
    Classify { file: PathBuf },
    /// Best constant over centered Gaussians.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Whether the exponents lie in the positivity domain.
    Domain { file: PathBuf },
    /// Quadrature, grid search and random probes against the solver.
    Verify {
        file: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
        /// Quadrature points per axis.
        #[arg(long)]
        grid: Option<usize>,
        /// Half-width of the quadrature box.
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long, default_value_t = 200)]
        probes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Whether the datum is in geometric position.
    Geometric { file: PathBuf },
    /// Covariance criterion for a Gaussian vector split into blocks.
    Cdp {
        file: PathBuf,
        #[command(flatten)]
        solve: SolveArgs,
    },
}

fn run(cli: Cli) -> Result<serde_json::Value, CliError> {
    let convention = match cli.kernel_convention {
        KernelConvention::Pi => Convention::Pi,
        KernelConvention::Half => Convention::Half,
    };
    let read = |p: &PathBuf| std::fs::read_to_string(p).map_err(CliError::from);
    match &cli.command {
        Command::Classify { file } => cmd_classify(&load(&read(file)?, convention)?),
        Command::Solve { file, solve } => cmd_solve(&load(&read(file)?, convention)?, &solve.options()),
        Command::Domain { file } => cmd_domain(&load(&read(file)?, convention)?),
        Command::Verify { file, solve, grid, radius, probes, seed } => {
            let v = VerifyOptions { grid: *grid, radius: *radius, probes: *probes, seed: *seed };
            cmd_verify(&load(&read(file)?, convention)?, &solve.options(), &v)
        }
        Command::Geometric { file } => cmd_geometric(&load(&read(file)?, convention)?),
        Command::Cdp { file, solve } => cmd_cdp(&parse_cdp(&read(file)?)?, &solve.options()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(v) => {
            print!("{}", render(&v));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

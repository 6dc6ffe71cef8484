//! Command-line driver: mesh generation and analysis, nonlinear solves, and
//! monotonicity certification with machine-readable JSON reports.
//!
//! Exit codes: `mesh` returns 0 for an admissible mesh, 2 for an
//! inadmissible one; `certify` returns the verdict (0 certified, 3 oracle
//! only, 4 not certified, 5 refuted); `oracle` returns 0 monotone, 5 not;
//! every command returns 1 on error.

mod commands;
mod config;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "monofem",
    version,
    about = "P1 assembly, Picard solves, and monotone-matrix certification \
             for quasilinear diffusion-reaction problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or load a mesh, analyze admissibility, optionally save it.
    Mesh(commands::MeshArgs),
    /// Solve the problem with source f1 and report the iteration trace.
    Solve(commands::SolveArgs),
    /// Solve for f1 and f2, certify the linearized matrix, and check the
    /// comparison ordering.
    Certify(commands::CertifyArgs),
    /// Dense-inverse monotonicity check of the linearized matrix.
    Oracle(commands::OracleArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Mesh(args) => commands::cmd_mesh(&args),
        Command::Solve(args) => commands::cmd_solve(&args),
        Command::Certify(args) => commands::cmd_certify(&args),
        Command::Oracle(args) => commands::cmd_oracle(&args),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}

//! `bergcheck`: run the expansion pipelines and identity checks from spec files.
//!
//! Exit status: 0 when every check holds, 1 when a check fails or a
//! computation breaks down, 2 for bad flags or spec files.

mod commands;
mod render;
mod specfile;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Failure, Format, Report};
use specfile::{SpecFile, Truncation};

#[derive(Parser)]
#[command(name = "bergcheck", version, about = "Exact checks of Bergman potential expansions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Total z-degree kept (overrides `dz` in the spec file).
    #[arg(long, global = true)]
    dz: Option<u32>,
    /// Total degree in the perturbation symbols (overrides `dc`).
    #[arg(long, global = true)]
    dc: Option<u32>,
    /// Largest section order (overrides `dp`).
    #[arg(long, global = true)]
    dp: Option<u32>,
    /// Output format; tables default to CSV, documents to JSON.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Compare every closed-form identity with brute-force enumeration.
    VerifyIdentities {
        /// Largest |L| in the sweep.
        #[arg(long)]
        max_order: Option<u32>,
        /// Corrupt one closed-form value (exercises the failure path).
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Expand K_m for a potential and judge every coefficient.
    BergmanExpand {
        spec: PathBuf,
        /// Also run the combinatorial route and compare entrywise.
        #[arg(long)]
        cross_check: bool,
    },
    /// Bring a potential jet to normal coordinates.
    Bochner { spec: PathBuf },
    /// Convergence table for a rotation-invariant metric on CP¹.
    Cp1 {
        spec: PathBuf,
        /// Values of m, e.g. `16,32,64` or `1..20`.
        #[arg(long)]
        m_list: String,
        /// Compare with the local expansion near the origin (perturbed model).
        #[arg(long)]
        cross_check: bool,
    },
}

fn read_spec(path: &Path) -> Result<SpecFile, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    SpecFile::parse(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    let truncation = Truncation { dz: cli.dz, dc: cli.dc, dp: cli.dp };
    match &cli.command {
        Command::VerifyIdentities { max_order, inject_fault } => {
            Ok(commands::verify_identities(*max_order, *inject_fault, cli.format.unwrap_or(Format::Json)))
        }
        Command::BergmanExpand { spec, cross_check } => {
            commands::bergman_expand(&read_spec(spec)?, truncation, *cross_check, cli.format.unwrap_or(Format::Json))
        }
        Command::Bochner { spec } => commands::bochner(&read_spec(spec)?, truncation, cli.format.unwrap_or(Format::Json)),
        Command::Cp1 { spec, m_list, cross_check } => {
            let m_list = commands::parse_m_list(m_list)?;
            commands::cp1(&read_spec(spec)?, &m_list, *cross_check, cli.format.unwrap_or(Format::Csv))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code());
        }
    };
    let written = match &cli.out {
        Some(path) => std::fs::write(path, &report.body).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(report.body.as_bytes()).map_err(|e| e.to_string())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    for note in &report.notes {
        eprintln!("{note}");
    }
    if report.problems.is_empty() {
        ExitCode::SUCCESS
    } else {
        for p in &report.problems {
            eprintln!("FAIL {p}");
        }
        ExitCode::from(1)
    }
}

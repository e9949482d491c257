mod commands;
mod input;
mod json;

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "anigauss", version, about = "Anisotropic Gaussian mass, perimeter and Ehrhard symmetrization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gaussian mass of a set.
    Measure(SetArgs),
    /// Gaussian perimeter of a set.
    Perimeter(SetArgs),
    /// Unnormalized barycenter ∫_E x dγ_A.
    Barycenter(SetArgs),
    /// Symmetrize a set along a direction and audit the result.
    Symmetrize(SymmetrizeArgs),
    /// Compare a set's perimeter with the isoperimetric bound.
    IsoCheck(IsoArgs),
    /// Check the quantile growth of an ε-enlargement.
    EnlargeCheck(EnlargeArgs),
    /// Thin-column scan showing perimeter increase off the eigenspaces.
    Counterexample(CounterexampleArgs),
    /// Check that the boundary-slope gradient vanishes exactly on eigenvectors.
    DirectionAudit(AuditArgs),
    /// Monte-Carlo and raster cross-checks of the quadrature.
    Oracle(OracleArgs),
}

#[derive(Args)]
pub struct Quadrature {
    /// Relative tolerance of the adaptive quadrature.
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// Gaussian tail mass allowed outside the integration region.
    #[arg(long)]
    pub tail_tol: Option<f64>,
}

#[derive(Args)]
pub struct SetArgs {
    /// JSON file {"matrix": [[…], …]} with a symmetric positive definite A.
    #[arg(long)]
    pub matrix: PathBuf,
    /// JSON set description (halfspace, polytope, box or subgraph).
    #[arg(long)]
    pub set: PathBuf,
    #[command(flatten)]
    pub quad: Quadrature,
    /// Report file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SymmetrizeArgs {
    #[command(flatten)]
    pub set: SetArgs,
    /// Symmetrization direction, e.g. "0.6,0.8" (normalized on input).
    #[arg(long)]
    pub direction: String,
    /// Grid nodes per base axis.
    #[arg(long, default_value_t = 257)]
    pub grid: usize,
    /// Height profile CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args)]
pub struct IsoArgs {
    #[command(flatten)]
    pub set: SetArgs,
    /// Deficit-versus-mass CSV for the half-space family.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args)]
pub struct EnlargeArgs {
    #[command(flatten)]
    pub set: SetArgs,
    #[arg(long)]
    pub epsilon: f64,
}

#[derive(Args)]
pub struct CounterexampleArgs {
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 0.5)]
    pub b: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Strictly decreasing column half-widths.
    #[arg(long, default_value = "0.2,0.1,0.05,0.025")]
    pub alphas: String,
    #[arg(long, default_value_t = 257)]
    pub grid: usize,
    #[command(flatten)]
    pub quad: Quadrature,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Slope table CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args)]
pub struct AuditArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    /// Audit a single direction instead of the eigenvector sweep.
    #[arg(long)]
    pub direction: Option<String>,
    /// Angles per pair of eigenvectors in the sweep.
    #[arg(long, default_value_t = 32)]
    pub samples: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// One row per audited direction.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub set: SetArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    /// Raster cells per axis for the planar perimeter.
    #[arg(long, default_value_t = 1024)]
    pub resolution: usize,
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("ANISO_THREADS") else { return Ok(()) };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| format!("ANISO_THREADS must be a positive integer, got \"{v}\""))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn write(path: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let (result, out, csv) = match &cli.command {
        Command::Measure(a) => (commands::measure(a), &a.out, &None),
        Command::Perimeter(a) => (commands::perimeter_report(a), &a.out, &None),
        Command::Barycenter(a) => (commands::barycenter(a), &a.out, &None),
        Command::Symmetrize(a) => (commands::symmetrize(a), &a.set.out, &a.csv),
        Command::IsoCheck(a) => (commands::iso_check(a), &a.set.out, &a.csv),
        Command::EnlargeCheck(a) => (commands::enlarge_check(a), &a.set.out, &None),
        Command::Counterexample(a) => (commands::counterexample(a), &a.out, &a.csv),
        Command::DirectionAudit(a) => (commands::direction_audit(a), &a.out, &a.csv),
        Command::Oracle(a) => (commands::oracle(a), &a.set.out, &None),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = write(out, &outcome.report.render()) {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if let (Some(path), Some(text)) = (csv, &outcome.csv) {
        if let Err(e) = write(&Some(path.clone()), text) {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match outcome.violation {
        Some(msg) => {
            eprintln!("VIOLATION: {msg}");
            ExitCode::from(2)
        }
        None => ExitCode::SUCCESS,
    }
}

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use jjbus::cli::{self, error_line, parse_config, Overrides, RunConfig};
use jjbus::Error;

/// Low-energy spectra of a large Josephson junction coupled to a charge
/// qubit, exactly and in the harmonic approximation.
#[derive(Parser)]
#[command(name = "jjbus", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact levels at one Bloch offset plus variational estimates
    Spectrum(CommonArgs),
    /// Charge-basis amplitudes of the lowest well states
    Wavefunctions(CommonArgs),
    /// Band energies swept over the Bloch offset
    Bands(CommonArgs),
    /// Deviation of exact levels from the harmonic ladder
    Compare(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Config file with `key = value` lines (t, t_prime, n_max, k, k_count,
    /// m_count, frac)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Josephson coupling over charging energy
    #[arg(long)]
    t: Option<f64>,
    /// Qubit coupling over charging energy
    #[arg(long)]
    t_prime: Option<f64>,
    /// Charge cutoff (defaults to ceil(4 sqrt(t)))
    #[arg(long)]
    n_max: Option<u32>,
    /// Number of Bloch offsets sampled by `bands`
    #[arg(long)]
    k_count: Option<usize>,
    /// Number of levels / doublets / bands reported
    #[arg(long)]
    m_count: Option<usize>,
    /// Deviation threshold in units of the level spacing
    #[arg(long)]
    frac: Option<f64>,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn resolve(args: &CommonArgs) -> Result<RunConfig, Error> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| {
            Error::Usage(format!("cannot read config file {}: {e}", path.display()))
        })?,
        None => String::new(),
    };
    let overrides = Overrides {
        t: args.t,
        t_prime: args.t_prime,
        n_max: args.n_max,
        k_count: args.k_count,
        m_count: args.m_count,
        frac: args.frac,
    };
    parse_config(&text, &overrides)
}

fn run(command: &Command) -> Result<&'static str, Error> {
    match command {
        Command::Spectrum(a) => cli::cmd_spectrum(&resolve(a)?, &a.out).map(|_| "spectrum"),
        Command::Wavefunctions(a) => {
            cli::cmd_wavefunctions(&resolve(a)?, &a.out).map(|_| "wavefunctions")
        }
        Command::Bands(a) => cli::cmd_bands(&resolve(a)?, &a.out).map(|_| "bands"),
        Command::Compare(a) => cli::cmd_compare(&resolve(a)?, &a.out).map(|_| "compare"),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            let usage = Error::Usage(e.to_string());
            eprintln!("{}", error_line(&usage));
            return ExitCode::from(2);
        }
    };

    let start = Instant::now();
    match run(&cli.command) {
        Ok(name) => {
            // timing goes to stderr so the written artifacts stay
            // byte-reproducible
            eprintln!("{name} finished in {:.1} ms", start.elapsed().as_secs_f64() * 1e3);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("{}", error_line(&e));
            match e {
                Error::Usage(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

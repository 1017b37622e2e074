use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use johnson_search::commands::{
    check_marked, cmd_simulate, cmd_spectrum, cmd_sweep, cmd_validate, exit_code, Format, SimulateOptions,
};
use johnson_search::oracle::DEFAULT_TOLERANCE;
use johnson_search::reports::write_atomic;
use johnson_search::{Engine, Result, WalkError};

#[derive(Parser)]
#[command(name = "johnson-search", version, about = "Coined quantum-walk search on Johnson graphs J(n,k)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Full,
    Reduced,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form spectrum, intersection numbers, and run time.
    Spectrum {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Success-probability time series from the full or reduced engine.
    Simulate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, value_enum, default_value = "reduced")]
        engine: EngineArg,
        /// Number of steps; defaults to twice the run time.
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        stride: u64,
        /// Marked vertex as 1-based elements, e.g. `1,2`. Defaults to {1..k}.
        #[arg(long)]
        marked: Option<String>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Lift the default arc-count ceiling of the full engine.
        #[arg(long)]
        force_capacity: bool,
    },
    /// Success probability at the run time for several n (reduced engine).
    Sweep {
        #[arg(long)]
        k: usize,
        /// Comma-separated list of n.
        #[arg(long = "n", value_delimiter = ',', required = true, num_args = 1..)]
        n_list: Vec<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dense brute-force certification of a small instance.
    Validate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn emit(out: Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(&path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Spectrum { n, k, format, out } => emit(out, &cmd_spectrum(n, k, format.into())?)?,
        Command::Simulate {
            n,
            k,
            engine,
            steps,
            stride,
            marked,
            format,
            out,
            force_capacity,
        } => {
            let engine = match engine {
                EngineArg::Full => Engine::Full,
                EngineArg::Reduced => Engine::Reduced,
            };
            if let (Engine::Reduced, Some(m)) = (engine, &marked) {
                check_marked(n, k, m)?;
            }
            let report = cmd_simulate(&SimulateOptions {
                n,
                k,
                engine,
                steps,
                marked,
                stride,
                force_capacity,
            })?;
            let text = match Format::from(format) {
                Format::Csv => report.to_csv(),
                Format::Json => report.to_json()?,
            };
            emit(out, &text)?;
        }
        Command::Sweep { k, n_list, format, out } => {
            let report = cmd_sweep(k, &n_list)?;
            let text = match Format::from(format) {
                Format::Csv => report.to_csv(),
                Format::Json => report.to_json()?,
            };
            emit(out, &text)?;
        }
        Command::Validate { n, k, tol, out } => {
            let cert = cmd_validate(n, k, tol)?;
            emit(out, &cert.to_json()?)?;
            if !cert.passed {
                for c in cert.failed_checks() {
                    eprintln!("check failed: {} = {:e} > {:e}", c.name, c.value, c.tolerance);
                }
                return Ok(1);
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            if matches!(err, WalkError::Capacity { what: "full arc-space state", .. }) {
                eprintln!("hint: use --engine reduced, which handles any n");
            }
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use tate_diffusion::kernel::Mode;
use tate_diffusion_cli::{
    cmd_heat, cmd_invert, cmd_simulate, cmd_skeleton, cmd_spectrum, cmd_verify, CliError, CommonArgs, Format,
    InitialCondition, InvertOptions, RunConfig,
};

#[derive(Parser)]
#[command(name = "tatediff", version, about = "Theta-kernel diffusion on Tate curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Circle matrix, Laplacian and spectrum as JSON
    Spectrum(CommonArgs),
    /// Heat flow from per-circle values or a step-function file
    Heat {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated value per circle
        #[arg(long, value_delimiter = ',', conflicts_with = "initial_file")]
        initial: Option<Vec<f64>>,
        /// JSON: a list of circle values or {"resolution", "circles"}
        #[arg(long)]
        initial_file: Option<PathBuf>,
    },
    /// Sample paths as CSV, with a JSON occupation summary
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Summary path; defaults to the CSV path with `.summary.json`
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Recover v(q) from the degree eigenvalues of a spectrum artifact
    Invert {
        /// Spectrum JSON; `-` reads stdin
        #[arg(long, default_value = "-")]
        input: String,
        #[arg(long, default_value_t = 12)]
        vq_max: i64,
        #[arg(long, default_value_t = tate_diffusion::hearing::DEFAULT_TOLERANCE)]
        tol: f64,
        #[arg(long, value_parser = |s: &str| s.parse::<Mode>())]
        mode: Option<Mode>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Model, kernel and spectral checks with exact discrepancies
    Verify(CommonArgs),
    /// Skeleton measures, potentials and spectrum
    Skeleton(CommonArgs),
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn json_only(run: &RunConfig) -> Result<(), CliError> {
    if run.format == Format::Csv {
        return Err(CliError::Usage("this command only writes JSON".into()));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum(args) => {
            let run = RunConfig::from_args(&args)?;
            json_only(&run)?;
            emit(run.out.as_deref(), &json(&cmd_spectrum(&run)?))
        }
        Command::Heat { common, initial, initial_file } => {
            let run = RunConfig::from_args(&common)?;
            let init = match (initial, initial_file) {
                (Some(v), _) => InitialCondition::Radial(v),
                (None, Some(p)) => InitialCondition::from_file(&p)?,
                (None, None) => InitialCondition::default_for(run.vq),
            };
            let rep = cmd_heat(&run, &init)?;
            let text = match run.format {
                Format::Json => json(&rep),
                Format::Csv => rep.to_csv(),
            };
            emit(run.out.as_deref(), &text)
        }
        Command::Simulate { common, summary } => {
            let run = RunConfig::from_args(&common)?;
            let (csv, sum) = cmd_simulate(&run)?;
            emit(run.out.as_deref(), &csv)?;
            let side = summary.or_else(|| run.out.as_ref().map(|p| p.with_extension("summary.json")));
            match side {
                Some(p) => emit(Some(&p), &json(&sum)),
                None => Ok(()),
            }
        }
        Command::Invert { input, vq_max, tol, mode, out } => {
            let text = if input == "-" {
                let mut s = String::new();
                io::stdin().read_to_string(&mut s)?;
                s
            } else {
                fs::read_to_string(&input).map_err(|e| CliError::Usage(format!("{input}: {e}")))?
            };
            let rep = cmd_invert(&text, InvertOptions { vq_max, tol, mode })?;
            emit(out.as_deref(), &json(&rep))
        }
        Command::Verify(args) => {
            let run = RunConfig::from_args(&args)?;
            json_only(&run)?;
            let rep = cmd_verify(&run)?;
            emit(run.out.as_deref(), &json(&rep))?;
            if rep.hard_passed {
                Ok(())
            } else {
                Err(CliError::Verification("hard checks failed".into()))
            }
        }
        Command::Skeleton(args) => {
            let run = RunConfig::from_args(&args)?;
            json_only(&run)?;
            emit(run.out.as_deref(), &json(&cmd_skeleton(&run)?))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tatediff: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use csym_cli::{build_example, parse_spec, run_command, CliError, Command, ExampleParams, Flags};

#[derive(Parser)]
#[command(name = "csym", version, about = "Conjugations, C-symmetric relations and their C-self-adjoint extensions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// C-symmetry, C-self-adjointness and the domain criterion
    Check(RunArgs),
    /// Deficiency spaces of the doubled operator
    Deficiency(RunArgs),
    /// One C-self-adjoint extension (canonical, or from --param)
    Extend(RunArgs),
    /// Brute-force search for extensions with parameter recovery
    Enumerate(RunArgs),
    /// Polar decomposition, conjugation covariance and CJT factorization
    Polar(RunArgs),
    /// Takagi factorization
    Takagi(RunArgs),
    /// Block power formulas and norm identities
    Powers(RunArgs),
    /// Every applicable check
    VerifyAll(RunArgs),
    /// Write a built-in example problem as JSON
    Example(ExampleArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Problem file (JSON)
    spec: PathBuf,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    budget: Option<usize>,
    /// Extension parameter file: {"kind": "unitary" | "onb" | "conjugation", "matrix": rows}
    #[arg(long)]
    param: Option<PathBuf>,
    #[arg(long)]
    swap: bool,
    #[arg(long)]
    max_power: Option<usize>,
    /// Write the report here instead of stdout
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct ExampleArgs {
    /// race_schrodinger, fd_derivative_minimal, random_csym or zero_on_subspace
    name: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_out(path: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, format!("{text}\n")).map_err(|e| CliError::Io {
            path: p.display().to_string(),
            message: e.to_string(),
        }),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let (cmd, args) = match cli.cmd {
        Cmd::Example(e) => {
            let spec = build_example(
                &e.name,
                ExampleParams {
                    n: e.n,
                    h: e.h,
                    seed: e.seed,
                },
            )?;
            let text = csym_cli::spec::pretty_json(&spec.to_json());
            write_out(e.out.as_ref(), &text)?;
            return Ok(0);
        }
        Cmd::Check(a) => (Command::Check, a),
        Cmd::Deficiency(a) => (Command::Deficiency, a),
        Cmd::Extend(a) => (Command::Extend, a),
        Cmd::Enumerate(a) => (Command::Enumerate, a),
        Cmd::Polar(a) => (Command::Polar, a),
        Cmd::Takagi(a) => (Command::Takagi, a),
        Cmd::Powers(a) => (Command::Powers, a),
        Cmd::VerifyAll(a) => (Command::VerifyAll, a),
    };
    let spec = parse_spec(&args.spec)?;
    let flags = Flags {
        tol: args.tol,
        seed: args.seed,
        budget: args.budget,
        param: args.param,
        swap: args.swap,
        max_power: args.max_power,
    };
    let report = run_command(cmd, &spec, &flags)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for f in report.failures() {
        eprintln!("failed: {} (residual {:.3e}) {}", f.key, f.residual, f.note);
    }
    write_out(args.json.as_ref(), &report.to_pretty())?;
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! `eqkit`: law sweeps, derived iteration, type checking, monitored runs and
//! the λ_trace translation from the command line.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod algebra;
mod program;

/// Exit statuses.
pub const OK: u8 = 0;
pub const USAGE: u8 = 1;
pub const REJECTED: u8 = 2;
pub const UNSAFE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "eqkit", version, about = "Sequential effect systems over effect quantales")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the effect quantale laws of a system.
    Laws(LawsArgs),
    /// Print the derived iteration table of a system.
    Star(StarArgs),
    /// Type a program.
    Check(ProgramArgs),
    /// Type, run and monitor a program.
    Run(RunArgs),
    /// Translate a λ_trace program into the core calculus.
    Translate(TranslateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Algebra {
    Atomicity,
    Crit,
    AtomicityCrit,
    Lockset,
    Deadlock,
    Regex,
    History,
    KaRegex,
    Count,
    Lift,
    Trivial,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum System {
    Lockatom,
    LockatomFaulty,
    Atomicity,
    Crit,
    History,
    KaRegex,
}

#[derive(Args, Debug)]
struct Common {
    /// Comma-separated event or lock names.
    #[arg(long, value_delimiter = ',', default_value = "a,b,c")]
    alphabet: Vec<String>,
    /// Emit JSON on stdout.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
pub struct LawsArgs {
    #[arg(long)]
    system: Algebra,
    /// Enumerate every witness tuple instead of sampling.
    #[arg(long, conflicts_with = "samples")]
    exhaustive: bool,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, env = "EQ_SEED", default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
pub struct StarArgs {
    #[arg(long)]
    system: Algebra,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
pub struct ProgramArgs {
    #[arg(long)]
    system: System,
    /// Program file.
    #[arg(required_unless_present = "expr", conflicts_with = "expr")]
    file: Option<PathBuf>,
    /// Inline program text.
    #[arg(long, short)]
    expr: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    program: ProgramArgs,
    #[arg(long, default_value_t = eqkit_lang::runtime::DEFAULT_FUEL)]
    fuel: usize,
    /// Re-type the residual program after every step.
    #[arg(long)]
    audit: bool,
    /// Run without typing the program first. Any stuck or failed primitive
    /// step is then reported as a violation.
    #[arg(long, conflicts_with = "audit")]
    unchecked: bool,
}

#[derive(Args, Debug)]
pub struct TranslateArgs {
    #[arg(required_unless_present = "expr", conflicts_with = "expr")]
    file: Option<PathBuf>,
    #[arg(long, short)]
    expr: Option<String>,
    /// Comma-separated events; defaults to the constants the program emits.
    #[arg(long, value_delimiter = ',')]
    alphabet: Option<Vec<String>>,
    #[arg(long)]
    json: bool,
}

/// A failure that ends the command with a message and an exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub msg: String,
}

impl Failure {
    pub fn usage(msg: impl Into<String>) -> Self {
        Failure { code: USAGE, msg: msg.into() }
    }

    pub fn rejected(msg: impl Into<String>) -> Self {
        Failure { code: REJECTED, msg: msg.into() }
    }
}

pub fn read_input(file: &Option<PathBuf>, expr: &Option<String>) -> Result<String, Failure> {
    match (file, expr) {
        (_, Some(e)) => Ok(e.clone()),
        (Some(p), None) => std::fs::read_to_string(p).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
        (None, None) => Err(Failure::usage("no program given")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { OK });
        }
    };
    let result = match &cli.command {
        Command::Laws(a) => algebra::laws(a),
        Command::Star(a) => algebra::star(a),
        Command::Check(a) => program::check(a),
        Command::Run(a) => program::run(a),
        Command::Translate(a) => program::translate(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

//! `coresolve`: run queries under SLD, structural, CoLP and co-S
//! resolution, check programs, validate loop answers and enumerate
//! bounded least models.

mod commands;
mod repl;

use std::io::Write;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};
use coresolve::productivity::DEFAULT_BOUND;

use commands::{EngineMode, Outcome, RunConfig, TraceFormat, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "coresolve", version, about = "Coinductive structural resolution for logic programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct RunArgs {
    /// Engine: sld, s (structural), colp, cos (restricted co-S).
    #[arg(long, value_enum, default_value = "cos")]
    mode: EngineMode,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_steps: u64,
    /// Bound on consecutive rewriting steps.
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    max_rewrite: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    max_answers: u64,
    /// Also print circular answers unfolded to this depth.
    #[arg(long, default_value_t = 0)]
    unfold_depth: usize,
    /// Select the longest-waiting atom instead of the leftmost.
    #[arg(long)]
    fair: bool,
    #[arg(long, value_enum, default_value = "off")]
    trace: TraceFormat,
    /// Refuse co-S runs on programs failing the static checks.
    #[arg(long)]
    strict: bool,
}

impl RunArgs {
    fn config(&self) -> RunConfig {
        RunConfig {
            mode: self.mode,
            max_steps: self.max_steps as usize,
            max_rewrite: self.max_rewrite as usize,
            max_answers: self.max_answers as usize,
            unfold_depth: self.unfold_depth,
            fair: self.fair,
            trace: self.trace,
            strict: self.strict,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a query (defaults to the file's `% query:` line).
    Run {
        file: String,
        #[arg(short, long)]
        query: Option<String>,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Static checks: universality and productivity.
    #[command(group(ArgGroup::new("which").multiple(true)))]
    Check {
        file: String,
        #[arg(long, group = "which")]
        universal: bool,
        #[arg(long, group = "which")]
        productive: bool,
        /// Rewriting bound for the productivity search.
        #[arg(long, default_value_t = DEFAULT_BOUND, requires = "productive")]
        bound: usize,
    },
    /// Compare a co-S answer against unrolled S-derivations.
    Validate {
        file: String,
        #[arg(short, long)]
        query: Option<String>,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long)]
        rounds: Option<usize>,
        /// Emit the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Enumerate the least Herbrand model up to an argument depth cap.
    Oracle {
        file: String,
        #[arg(long, default_value_t = 4)]
        cap: usize,
    },
    /// Interactive queries against a program.
    Repl {
        file: String,
        #[command(flatten)]
        args: RunArgs,
    },
}

fn emit(o: Outcome) -> ExitCode {
    print!("{}", o.out);
    eprint!("{}", o.err);
    let _ = std::io::stdout().flush();
    ExitCode::from(o.code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let file = match &cli.command {
        Command::Run { file, .. }
        | Command::Check { file, .. }
        | Command::Validate { file, .. }
        | Command::Oracle { file, .. }
        | Command::Repl { file, .. } => file.clone(),
    };
    let session = match commands::load(&file) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match cli.command {
        Command::Run { query, args, .. } => emit(commands::run(&session, query.as_deref(), &args.config())),
        Command::Check { universal, productive, bound, .. } => emit(commands::check(&session, universal, productive, bound)),
        Command::Validate { query, depth, rounds, json, .. } => {
            emit(commands::validate(&session, query.as_deref(), depth, rounds, json))
        }
        Command::Oracle { cap, .. } => emit(commands::oracle(&session, cap)),
        Command::Repl { args, .. } => match repl::repl(&session, args.config()) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_USAGE)
            }
        },
    }
}

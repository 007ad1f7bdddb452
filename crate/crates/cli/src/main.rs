use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use valnet_cli::runner::{Output, Session, SessionOptions};
use valnet_cli::{parse, repl, validate};

/// Uncertainty propagation in valuation networks.
#[derive(Parser)]
#[command(name = "valnet", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a network document and print query tables.
    Run {
        file: PathBuf,
        /// Initial active calculus (a `calculus` statement overrides it).
        #[arg(long)]
        calculus: Option<String>,
        /// Render results unnormalized unless a statement says otherwise.
        #[arg(long)]
        unnormalized: bool,
        /// Cross-check every propagation against the global-evaluation
        /// oracle.
        #[arg(long)]
        oracle_check: bool,
    },
    /// Execute a document, then read statements interactively.
    Repl { file: PathBuf },
    /// Parse a document and check the compiled Markov tree; no propagation.
    Validate { file: PathBuf },
}

// Exit codes: 0 ok, 1 statement error, 2 parse error.
const EXIT_STATEMENT: u8 = 1;
const EXIT_PARSE: u8 = 2;

fn load(path: &PathBuf) -> Result<String, ExitCode> {
    fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_STATEMENT)
    })
}

fn parse_file(path: &PathBuf) -> Result<valnet_cli::NetworkDocument, ExitCode> {
    let text = load(path)?;
    parse(&text).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        ExitCode::from(EXIT_PARSE)
    })
}

fn print_outputs(outputs: &[Output]) {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for o in outputs {
        match o {
            Output::Table(t) => {
                let _ = write!(out, "{t}");
                let _ = writeln!(out);
            }
            Output::Note(n) => {
                let _ = writeln!(out, "{n}");
            }
            Output::Diagnostic(d) => eprintln!("{d}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            file,
            calculus,
            unnormalized,
            oracle_check,
        } => {
            let doc = match parse_file(&file) {
                Ok(doc) => doc,
                Err(code) => return code,
            };
            let mut session = Session::with_builtins(SessionOptions {
                unnormalized,
                oracle_check,
            });
            if let Some(name) = calculus {
                if let Err(e) = session.select_calculus(&name) {
                    eprintln!("{e}");
                    return ExitCode::from(EXIT_STATEMENT);
                }
            }
            match session.run_document(&doc) {
                Ok(outputs) => {
                    print_outputs(&outputs);
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("{}: {e}", file.display());
                    ExitCode::from(EXIT_STATEMENT)
                }
            }
        }
        Command::Repl { file } => {
            let doc = match parse_file(&file) {
                Ok(doc) => doc,
                Err(code) => return code,
            };
            let mut session = Session::with_builtins(SessionOptions::default());
            let loaded = match session.run_document(&doc) {
                Ok(outputs) => {
                    print_outputs(&outputs);
                    true
                }
                Err(e) => {
                    eprintln!("{}: {e}", file.display());
                    false
                }
            };
            let stdin = io::stdin();
            let clean = match repl::run(
                &mut session,
                stdin.lock(),
                io::stdout().lock(),
                io::stderr().lock(),
            ) {
                Ok(clean) => clean,
                Err(e) => {
                    eprintln!("i/o error: {e}");
                    return ExitCode::from(EXIT_STATEMENT);
                }
            };
            if loaded && clean {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_STATEMENT)
            }
        }
        Command::Validate { file } => {
            let doc = match parse_file(&file) {
                Ok(doc) => doc,
                Err(code) => return code,
            };
            let mut session = Session::with_builtins(SessionOptions::default());
            match validate::validate_document(&mut session, &doc) {
                Ok(checks) => {
                    let mut ok = true;
                    for (i, check) in checks.iter().enumerate() {
                        if check.report.is_valid() {
                            println!(
                                "check {}: {} clusters under `{}`: valid",
                                i + 1,
                                check.clusters,
                                check.calculus
                            );
                        } else {
                            ok = false;
                            println!(
                                "check {}: {} clusters under `{}`: {}",
                                i + 1,
                                check.clusters,
                                check.calculus,
                                check.report
                            );
                        }
                    }
                    if ok {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(EXIT_STATEMENT)
                    }
                }
                Err(e) => {
                    eprintln!("{}: {e}", file.display());
                    ExitCode::from(EXIT_STATEMENT)
                }
            }
        }
    }
}

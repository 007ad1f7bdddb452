//! Line-oriented interactive loop: statements are parsed and executed one
//! line at a time; errors are reported without ending the session.

use std::io::{BufRead, Write};

use crate::parse::parse;
use crate::runner::{Output, Session};

/// Runs the loop until EOF or `exit`/`quit`. Returns true when every
/// executed statement succeeded.
pub fn run<R: BufRead, W: Write, E: Write>(
    session: &mut Session,
    input: R,
    mut out: W,
    mut err: E,
) -> std::io::Result<bool> {
    let mut clean = true;
    write!(err, "> ")?;
    err.flush()?;
    for line in input.lines() {
        let line = line?;
        let trimmed = line.trim();
        if matches!(trimmed, "exit" | "quit") {
            break;
        }
        if !trimmed.is_empty() {
            match parse(&line) {
                Ok(doc) => {
                    for (stmt, _) in &doc.statements {
                        match session.execute(stmt) {
                            Ok(outputs) => {
                                for o in outputs {
                                    match o {
                                        Output::Table(t) => write!(out, "{t}")?,
                                        Output::Note(n) => writeln!(out, "{n}")?,
                                        Output::Diagnostic(d) => writeln!(err, "{d}")?,
                                    }
                                }
                                out.flush()?;
                            }
                            Err(e) => {
                                clean = false;
                                writeln!(err, "{e}")?;
                                break;
                            }
                        }
                    }
                }
                Err(e) => {
                    clean = false;
                    writeln!(err, "{e}")?;
                }
            }
        }
        write!(err, "> ")?;
        err.flush()?;
    }
    writeln!(err)?;
    Ok(clean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::SessionOptions;

    #[test]
    fn errors_do_not_end_the_session() {
        let mut session = Session::with_builtins(SessionOptions::default());
        let input = "calculus probability\nvar X { a b }\nquery X\npropagate\nquery X\n";
        let mut out = Vec::new();
        let mut err = Vec::new();
        let clean = run(&mut session, input.as_bytes(), &mut out, &mut err).unwrap();
        assert!(!clean); // the early query was stale
        let printed = String::from_utf8(out).unwrap();
        assert!(printed.contains("0.500"), "{printed}");
        let errors = String::from_utf8(err).unwrap();
        assert!(errors.contains("stale result"), "{errors}");
    }
}

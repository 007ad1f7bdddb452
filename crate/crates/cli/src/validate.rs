//! `validate` mode: parse a document and check that the compiled Markov tree
//! is valid, without computing any messages.

use valnet_core::{probability, Calculus, MarkovTree, ValidationReport};

use crate::ast::{NetworkDocument, Statement};
use crate::runner::{ExecError, Session};

/// One tree check (per `propagate` statement, plus a final one when the
/// document has none).
#[derive(Debug)]
pub struct TreeCheck {
    pub calculus: String,
    pub clusters: usize,
    pub report: ValidationReport,
}

/// Executes the declarations of a document and validates the Markov tree at
/// every `propagate` point. Queries are skipped.
pub fn validate_document(
    session: &mut Session,
    doc: &NetworkDocument,
) -> Result<Vec<TreeCheck>, ExecError> {
    let mut checks = Vec::new();
    let mut saw_propagate = false;
    for (stmt, location) in &doc.statements {
        let outcome = match stmt {
            Statement::Propagate { .. } => {
                saw_propagate = true;
                checks.push(check_tree(session));
                Ok(vec![])
            }
            Statement::Query { .. } => Ok(vec![]),
            other => session.execute(other),
        };
        if let Err(mut e) = outcome {
            e.location = e.location.or(Some(*location));
            return Err(e);
        }
    }
    if !saw_propagate {
        checks.push(check_tree(session));
    }
    Ok(checks)
}

fn check_tree(session: &Session) -> TreeCheck {
    // attachment singletons depend on the calculus; fall back to probability
    // for purely structural documents
    let fallback: Calculus = probability();
    let calc = session
        .active_calculus()
        .map(|c| c.as_ref())
        .unwrap_or(&fallback);
    let hypergraph = session.system().hypergraph(calc);
    let tree = MarkovTree::build(&hypergraph);
    TreeCheck {
        calculus: calc.name().to_string(),
        clusters: tree.clusters().len(),
        report: tree.validate(&hypergraph),
    }
}

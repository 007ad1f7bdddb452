//! Statement execution against a valuation system.

use std::fmt;
use std::sync::Arc;

use valnet_core::{
    global_evaluate, propagate_system, Calculus, CalculusRegistry, Configuration, MassValuation,
    OracleBounds, PointKind, PointValuation, PropagateOptions, PropagationResult, Scope, Valuation,
    ValuationKind, ValuationSystem, Variable,
};

use crate::ast::{DenseValue, FocalSpec, Location, MassEntry, NetworkDocument, Statement};
use crate::render::{render, Footer};

/// A statement failure with its source location.
#[derive(Debug, Clone)]
pub struct ExecError {
    pub location: Option<Location>,
    pub message: String,
}

impl fmt::Display for ExecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.location {
            Some(loc) => write!(f, "error at {loc}: {}", self.message),
            None => write!(f, "error: {}", self.message),
        }
    }
}

impl std::error::Error for ExecError {}

fn err_here(message: impl fmt::Display) -> ExecError {
    ExecError {
        location: None,
        message: message.to_string(),
    }
}

/// Session options, mirroring the CLI flags.
#[derive(Debug, Clone, Default)]
pub struct SessionOptions {
    /// Render unnormalized results unless a `propagate` statement overrides.
    pub unnormalized: bool,
    /// Cross-check every propagation against the global-evaluation oracle.
    pub oracle_check: bool,
}

/// What a statement printed.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    /// A rendered marginal table (already newline-terminated). Result data;
    /// belongs on standard output.
    Table(String),
    /// A one-line note standing in for a table (e.g. a degenerate marginal).
    /// Result data; belongs on standard output.
    Note(String),
    /// A per-propagation diagnostic; belongs on standard error.
    Diagnostic(String),
}

/// An interpreter for network documents: holds the structural model, the
/// calculus registry, the active calculus and the last propagation result.
pub struct Session {
    registry: CalculusRegistry,
    system: ValuationSystem,
    active: Option<Arc<Calculus>>,
    options: SessionOptions,
    last: Option<LastRun>,
    dirty: bool,
}

struct LastRun {
    calculus: Arc<Calculus>,
    result: PropagationResult,
}

impl Session {
    pub fn new(registry: CalculusRegistry, options: SessionOptions) -> Session {
        Session {
            registry,
            system: ValuationSystem::new(),
            active: None,
            options,
            last: None,
            dirty: true,
        }
    }

    pub fn with_builtins(options: SessionOptions) -> Session {
        Session::new(CalculusRegistry::with_builtins(), options)
    }

    pub fn system(&self) -> &ValuationSystem {
        &self.system
    }

    pub fn active_calculus(&self) -> Option<&Arc<Calculus>> {
        self.active.as_ref()
    }

    pub fn last_result(&self) -> Option<&PropagationResult> {
        self.last.as_ref().map(|l| &l.result)
    }

    /// Selects the active calculus without touching the structural model.
    pub fn select_calculus(&mut self, name: &str) -> Result<(), ExecError> {
        let calc = self.registry.get(name).map_err(err_here)?.clone();
        if self.active.as_ref().map(|c| c.name()) != Some(calc.name()) {
            self.dirty = true;
        }
        self.active = Some(calc);
        Ok(())
    }

    fn active(&self) -> Result<&Arc<Calculus>, ExecError> {
        self.active
            .as_ref()
            .ok_or_else(|| err_here("no calculus selected; add a `calculus` statement"))
    }

    /// Executes one statement, returning whatever it printed.
    pub fn execute(&mut self, statement: &Statement) -> Result<Vec<Output>, ExecError> {
        match statement {
            Statement::Calculus(name) => {
                self.select_calculus(name)?;
                Ok(vec![])
            }
            Statement::Var { name, frame } => {
                self.system
                    .add_variable(name, frame.iter().cloned())
                    .map_err(err_here)?;
                self.dirty = true;
                Ok(vec![])
            }
            Statement::Rel { name, variables } => {
                self.system
                    .add_relation(name, variables.iter().map(|s| s.as_str()))
                    .map_err(err_here)?;
                self.dirty = true;
                Ok(vec![])
            }
            Statement::DenseVal {
                target,
                calculus,
                values,
            } => {
                let calc = self.registry.get(calculus).map_err(err_here)?.clone();
                let valuation = self.build_dense(target, &calc, values)?;
                self.system
                    .attach(target, &calc, valuation)
                    .map_err(err_here)?;
                self.dirty = true;
                Ok(vec![])
            }
            Statement::MassVal {
                target,
                calculus,
                entries,
            } => {
                let calc = self.registry.get(calculus).map_err(err_here)?.clone();
                let valuation = self.build_mass(target, &calc, entries)?;
                self.system
                    .attach(target, &calc, valuation)
                    .map_err(err_here)?;
                self.dirty = true;
                Ok(vec![])
            }
            Statement::Observe { variable, value } => {
                self.system.observe(variable, value).map_err(err_here)?;
                self.dirty = true;
                Ok(vec![])
            }
            Statement::Retract { variable } => {
                self.system.retract(variable).map_err(err_here)?;
                self.dirty = true;
                Ok(vec![])
            }
            Statement::Propagate { unnormalized } => {
                let calc = self.active()?.clone();
                let options = PropagateOptions {
                    unnormalized: unnormalized.unwrap_or(self.options.unnormalized),
                    ..Default::default()
                };
                let result = propagate_system(&self.system, &calc, &options).map_err(err_here)?;
                if self.options.oracle_check {
                    let oracle = global_evaluate(
                        &self.system,
                        &calc,
                        options.unnormalized,
                        &OracleBounds::default(),
                    )
                    .map_err(err_here)?;
                    valnet_core::check::results_match(&result, &oracle, &calc, 1e-9)
                        .map_err(|msg| err_here(format!("oracle check failed: {msg}")))?;
                }
                let notes = result
                    .diagnostics()
                    .iter()
                    .map(|d| {
                        Output::Diagnostic(format!(
                            "diagnostic: degenerate marginal for {}: {:?}",
                            d.variable, d.degeneracy
                        ))
                    })
                    .collect();
                self.last = Some(LastRun {
                    calculus: calc,
                    result,
                });
                self.dirty = false;
                Ok(notes)
            }
            Statement::Query { variable } => {
                let output = self.query(variable)?;
                Ok(vec![output])
            }
            Statement::Reset => {
                self.system.clear_attachments();
                self.system.clear_observations();
                self.last = None;
                self.dirty = true;
                Ok(vec![])
            }
        }
    }

    /// Renders a variable's marginal from the last propagation.
    pub fn query(&self, variable: &str) -> Result<Output, ExecError> {
        let active = self.active()?;
        let last = self.last.as_ref().filter(|_| !self.dirty).ok_or_else(|| {
            err_here(format!(
                "stale result: `query {variable}` needs a `propagate` after the last model change"
            ))
        })?;
        if last.calculus.name() != active.name() {
            return Err(err_here(format!(
                "stale result: last propagation used calculus `{}`",
                last.calculus.name()
            )));
        }
        let raw = last.result.raw_marginal(variable).map_err(err_here)?;
        let footer = if last.result.is_normalized() {
            None
        } else {
            match raw {
                Valuation::Point(p) if p.kind() == PointKind::Boolean => None,
                Valuation::Point(p) if p.kind() == PointKind::Possibility => {
                    Some(Footer::Total(p.max()))
                }
                Valuation::Point(p) => Some(Footer::Total(p.total())),
                Valuation::Mass(m) => Some(Footer::Conflict(m.conflict())),
            }
        };
        match last.result.marginal(variable, &last.calculus) {
            Ok(readout) => Ok(Output::Table(render(&readout, footer))),
            Err(valnet_core::Error::DegenerateValuation(detail)) => Ok(Output::Note(format!(
                "{variable}: degenerate marginal ({detail})"
            ))),
            Err(e) => Err(err_here(e)),
        }
    }

    fn target_declared_vars(&self, target: &str) -> Result<Vec<Arc<Variable>>, ExecError> {
        if let Ok(rel) = self.system.relation(target) {
            Ok(rel.declared_vars().to_vec())
        } else if let Ok(var) = self.system.variable(target) {
            Ok(vec![var.clone()])
        } else {
            Err(err_here(valnet_core::Error::UnknownTarget(
                target.to_string(),
            )))
        }
    }

    fn build_dense(
        &self,
        target: &str,
        calc: &Calculus,
        values: &[DenseValue],
    ) -> Result<Valuation, ExecError> {
        let kind = match calc.kind() {
            ValuationKind::Point(kind) => kind,
            ValuationKind::Mass => {
                return Err(err_here(format!(
                    "calculus `{}` takes focal-set valuations, not dense tables",
                    calc.name()
                )))
            }
        };
        if kind != PointKind::Boolean {
            if let Some(bad) = values.iter().find(|v| v.is_truth()) {
                return Err(err_here(format!("truth value `{bad}` in a {kind} table")));
            }
        }
        let declared = self.target_declared_vars(target)?;
        let table: Vec<f64> = values.iter().map(DenseValue::as_f64).collect();
        let v = PointValuation::from_table_in_order(&declared, kind, &table).map_err(err_here)?;
        Ok(v.into())
    }

    fn build_mass(
        &self,
        target: &str,
        calc: &Calculus,
        entries: &[MassEntry],
    ) -> Result<Valuation, ExecError> {
        if calc.kind() != ValuationKind::Mass {
            return Err(err_here(format!(
                "calculus `{}` takes dense tables, not focal-set valuations",
                calc.name()
            )));
        }
        let declared = self.target_declared_vars(target)?;
        let scope = Scope::new(declared.iter().cloned()).map_err(err_here)?;
        let mut focal: Vec<(valnet_core::ConfigSet, f64)> = Vec::new();
        let mut assigned = 0.0;
        for entry in entries {
            assigned += entry.mass;
            let set = match &entry.set {
                FocalSpec::Full => valnet_core::ConfigSet::full(&scope),
                FocalSpec::Configs(tuples) => {
                    let configs = tuples
                        .iter()
                        .map(|t| {
                            let values: Vec<&str> = t.iter().map(|s| s.as_str()).collect();
                            Configuration::from_values_in_order(&declared, &values)
                        })
                        .collect::<valnet_core::Result<Vec<_>>>()
                        .map_err(err_here)?;
                    valnet_core::ConfigSet::new(scope.clone(), configs).map_err(err_here)?
                }
            };
            focal.push((set, entry.mass));
        }
        if assigned > 1.0 + 1e-9 {
            return Err(err_here(format!("focal masses sum to {assigned}, above 1")));
        }
        // leftover mass goes to the whole configuration set
        let leftover = 1.0 - assigned;
        if leftover > 1e-12 {
            focal.push((valnet_core::ConfigSet::full(&scope), leftover));
        }
        let v = MassValuation::new(scope, focal, 0.0).map_err(err_here)?;
        Ok(v.into())
    }

    /// Runs a whole document, stopping at the first failing statement.
    pub fn run_document(&mut self, doc: &NetworkDocument) -> Result<Vec<Output>, ExecError> {
        let mut outputs = Vec::new();
        for (stmt, location) in &doc.statements {
            match self.execute(stmt) {
                Ok(mut out) => outputs.append(&mut out),
                Err(mut e) => {
                    e.location = e.location.or(Some(*location));
                    return Err(e);
                }
            }
        }
        Ok(outputs)
    }
}

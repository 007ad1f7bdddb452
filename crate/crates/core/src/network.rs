//! Valuation systems: the structural model (variables and relations) plus
//! per-calculus quantitative attachments and observations.
//!
//! Structure is declared once and shared by every calculus; only the attached
//! valuations differ. Compiling a system for one calculus yields a hypergraph
//! with one hyperedge per relation scope plus singleton hyperedges for
//! variables carrying an attachment or an observation.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::calculi::{Calculus, Valuation};
use crate::error::{Error, Result};
use crate::frames::{Scope, Variable};

/// A named hyperedge of the structural model, remembering the variable order
/// it was declared with (dense table input follows that order).
#[derive(Debug, Clone)]
pub struct Relation {
    name: String,
    declared: Vec<Arc<Variable>>,
    scope: Scope,
}

impl Relation {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn declared_vars(&self) -> &[Arc<Variable>] {
        &self.declared
    }
}

/// Variables, relations, attached valuations and observations: the knowledge
/// base a propagation run compiles from.
#[derive(Debug, Clone, Default)]
pub struct ValuationSystem {
    variables: BTreeMap<String, Arc<Variable>>,
    relations: BTreeMap<String, Relation>,
    attached: BTreeMap<(String, String), Valuation>, // (target, calculus)
    observations: BTreeMap<String, usize>,
}

impl ValuationSystem {
    pub fn new() -> ValuationSystem {
        ValuationSystem::default()
    }

    pub fn add_variable<S: Into<String>, I: IntoIterator<Item = S>>(
        &mut self,
        name: impl Into<String>,
        frame: I,
    ) -> Result<Arc<Variable>> {
        let name = name.into();
        if self.variables.contains_key(&name) || self.relations.contains_key(&name) {
            return Err(Error::DuplicateName(name));
        }
        let var = Variable::new(name.clone(), frame)?;
        self.variables.insert(name, var.clone());
        Ok(var)
    }

    pub fn add_relation<S: AsRef<str>, I: IntoIterator<Item = S>>(
        &mut self,
        name: impl Into<String>,
        variables: I,
    ) -> Result<&Relation> {
        let name = name.into();
        if self.variables.contains_key(&name) || self.relations.contains_key(&name) {
            return Err(Error::DuplicateName(name));
        }
        let mut declared = Vec::new();
        for v in variables {
            let var = self.variable(v.as_ref())?.clone();
            if declared
                .iter()
                .any(|d: &Arc<Variable>| d.name() == var.name())
            {
                return Err(Error::DuplicateName(format!(
                    "variable `{}` repeated in relation `{name}`",
                    var.name()
                )));
            }
            declared.push(var);
        }
        if declared.is_empty() {
            return Err(Error::InvalidValuation(format!(
                "relation `{name}` must span at least one variable"
            )));
        }
        let scope = Scope::new(declared.iter().cloned())?;
        let relation = Relation {
            name: name.clone(),
            declared,
            scope,
        };
        self.relations.insert(name.clone(), relation);
        Ok(&self.relations[&name])
    }

    pub fn variable(&self, name: &str) -> Result<&Arc<Variable>> {
        self.variables
            .get(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn relation(&self, name: &str) -> Result<&Relation> {
        self.relations
            .get(name)
            .ok_or_else(|| Error::UnknownTarget(name.to_string()))
    }

    pub fn variables(&self) -> impl Iterator<Item = &Arc<Variable>> {
        self.variables.values()
    }

    pub fn relations(&self) -> impl Iterator<Item = &Relation> {
        self.relations.values()
    }

    /// Scope a valuation attached to `target` must carry: the relation scope,
    /// or the singleton scope of a variable.
    pub fn target_scope(&self, target: &str) -> Result<Scope> {
        if let Some(rel) = self.relations.get(target) {
            Ok(rel.scope().clone())
        } else if let Some(var) = self.variables.get(target) {
            Ok(Scope::singleton(var.clone()))
        } else {
            Err(Error::UnknownTarget(target.to_string()))
        }
    }

    /// Attaches a valuation to a variable or relation under one calculus,
    /// replacing any previous attachment for that pair. Other calculi are
    /// untouched.
    pub fn attach(
        &mut self,
        target: &str,
        calculus: &Calculus,
        valuation: Valuation,
    ) -> Result<()> {
        let scope = self.target_scope(target)?;
        if valuation.kind() != calculus.kind() {
            return Err(Error::KindMismatch {
                expected: calculus.kind().to_string(),
                found: valuation.kind().to_string(),
            });
        }
        if valuation.scope() != &scope {
            return Err(Error::ScopeMismatch(format!(
                "valuation over {} attached to `{target}` with scope {scope}",
                valuation.scope()
            )));
        }
        self.attached
            .insert((target.to_string(), calculus.name().to_string()), valuation);
        Ok(())
    }

    pub fn attachment(&self, target: &str, calculus: &str) -> Option<&Valuation> {
        self.attached
            .get(&(target.to_string(), calculus.to_string()))
    }

    /// Drops every attachment, for all calculi. Structure is untouched.
    pub fn clear_attachments(&mut self) {
        self.attached.clear();
    }

    /// Records an observation; last write wins per variable.
    pub fn observe(&mut self, variable: &str, value: &str) -> Result<()> {
        let var = self.variable(variable)?;
        let index = var.value_index(value)?;
        self.observations.insert(variable.to_string(), index);
        Ok(())
    }

    /// Clears an observation; clearing an unobserved variable is a no-op.
    pub fn retract(&mut self, variable: &str) -> Result<()> {
        self.variable(variable)?;
        self.observations.remove(variable);
        Ok(())
    }

    pub fn clear_observations(&mut self) {
        self.observations.clear();
    }

    pub fn observation(&self, variable: &str) -> Option<&str> {
        let index = self.observations.get(variable)?;
        Some(self.variables[variable].frame()[*index].as_str())
    }

    pub fn observations(&self) -> impl Iterator<Item = (&str, &str)> {
        self.observations
            .iter()
            .map(|(name, idx)| (name.as_str(), self.variables[name].frame()[*idx].as_str()))
    }

    /// Compiles the hypergraph for one calculus: every relation scope is a
    /// hyperedge, and every variable with an attachment under this calculus
    /// or an observation contributes a singleton hyperedge. Hyperedges
    /// sharing a scope merge, keeping all their sources.
    pub fn hypergraph(&self, calculus: &Calculus) -> Hypergraph {
        let mut edges: Vec<Hyperedge> = Vec::new();
        let mut push =
            |scope: Scope, source: EdgeSource| match edges.iter_mut().find(|e| e.scope == scope) {
                Some(e) => e.sources.push(source),
                None => edges.push(Hyperedge {
                    scope,
                    sources: vec![source],
                }),
            };
        for rel in self.relations.values() {
            push(rel.scope.clone(), EdgeSource::Relation(rel.name.clone()));
        }
        for (name, var) in &self.variables {
            if self
                .attached
                .contains_key(&(name.clone(), calculus.name().to_string()))
            {
                push(
                    Scope::singleton(var.clone()),
                    EdgeSource::Variable(name.clone()),
                );
            }
            if self.observations.contains_key(name) {
                push(
                    Scope::singleton(var.clone()),
                    EdgeSource::Observation(name.clone()),
                );
            }
        }
        edges.sort_by(|a, b| a.scope.cmp_key(&b.scope));
        Hypergraph {
            nodes: self.variables.values().cloned().collect(),
            edges,
        }
    }
}

/// Where a hyperedge's valuation comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EdgeSource {
    /// A relation: its attachment under the active calculus, or the default
    /// relation valuation.
    Relation(String),
    /// A variable's attachment under the active calculus.
    Variable(String),
    /// An observation, materialized as a certainty valuation.
    Observation(String),
}

/// A scope carrying knowledge, with the sources feeding it.
#[derive(Debug, Clone)]
pub struct Hyperedge {
    scope: Scope,
    sources: Vec<EdgeSource>,
}

impl Hyperedge {
    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn sources(&self) -> &[EdgeSource] {
        &self.sources
    }

    pub fn label(&self) -> String {
        self.scope.to_string()
    }
}

/// Variables as nodes, valuation-bearing scopes as hyperedges, deterministic
/// edge order.
#[derive(Debug, Clone)]
pub struct Hypergraph {
    nodes: Vec<Arc<Variable>>,
    edges: Vec<Hyperedge>,
}

impl Hypergraph {
    pub fn from_scopes<I: IntoIterator<Item = Scope>>(
        nodes: Vec<Arc<Variable>>,
        scopes: I,
    ) -> Hypergraph {
        let mut edges: Vec<Hyperedge> = Vec::new();
        for scope in scopes {
            if !edges.iter().any(|e| e.scope == scope) {
                edges.push(Hyperedge {
                    scope,
                    sources: Vec::new(),
                });
            }
        }
        edges.sort_by(|a, b| a.scope.cmp_key(&b.scope));
        Hypergraph { nodes, edges }
    }

    pub fn nodes(&self) -> &[Arc<Variable>] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Hyperedge] {
        &self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

//! Uncertainty calculi: valuation representations and the pluggable operator
//! bundle that interprets them.
//!
//! A calculus packages combination, marginalization, the two default
//! valuations, normalization and a post-propagation hook, plus a readout that
//! turns a single-variable marginal into display rows. Four interpretations
//! ship built in (probability, belief functions, Boolean, possibility) and
//! user bundles register alongside them.

mod builtins;
mod mass;
mod point;

pub use builtins::{belief, boolean, possibility, probability};
pub use mass::MassValuation;
pub use point::{PointKind, PointValuation};

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::frames::{Configuration, Scope, Variable};

/// A valuation: the uncertainty-bearing object attached to a scope.
#[derive(Debug, Clone, PartialEq)]
pub enum Valuation {
    Point(PointValuation),
    Mass(MassValuation),
}

impl Valuation {
    pub fn scope(&self) -> &Scope {
        match self {
            Valuation::Point(v) => v.scope(),
            Valuation::Mass(v) => v.scope(),
        }
    }

    pub fn kind(&self) -> ValuationKind {
        match self {
            Valuation::Point(v) => ValuationKind::Point(v.kind()),
            Valuation::Mass(_) => ValuationKind::Mass,
        }
    }

    pub fn as_point(&self) -> Result<&PointValuation> {
        match self {
            Valuation::Point(v) => Ok(v),
            Valuation::Mass(_) => Err(Error::KindMismatch {
                expected: "point table".to_string(),
                found: "mass".to_string(),
            }),
        }
    }

    pub fn as_mass(&self) -> Result<&MassValuation> {
        match self {
            Valuation::Mass(v) => Ok(v),
            Valuation::Point(v) => Err(Error::KindMismatch {
                expected: "mass".to_string(),
                found: v.kind().to_string(),
            }),
        }
    }
}

impl From<PointValuation> for Valuation {
    fn from(v: PointValuation) -> Valuation {
        Valuation::Point(v)
    }
}

impl From<MassValuation> for Valuation {
    fn from(v: MassValuation) -> Valuation {
        Valuation::Mass(v)
    }
}

/// The representation a calculus works on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValuationKind {
    Point(PointKind),
    Mass,
}

impl fmt::Display for ValuationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValuationKind::Point(k) => write!(f, "{k}"),
            ValuationKind::Mass => write!(f, "mass"),
        }
    }
}

/// Whether a default valuation is being built for a variable or a relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Variable,
    Relation,
}

/// One cell of a marginal readout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Number(f64),
    Truth(bool),
}

impl Cell {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            Cell::Number(v) => Some(*v),
            Cell::Truth(_) => None,
        }
    }

    pub fn as_truth(&self) -> Option<bool> {
        match self {
            Cell::Truth(t) => Some(*t),
            Cell::Number(_) => None,
        }
    }
}

/// One row of a marginal readout: a frame value with its display cells.
#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutRow {
    pub value: String,
    pub cells: Vec<Cell>,
}

/// The per-variable result presentation: one row per frame value, with
/// calculus-appropriate columns (`p`, `bel`/`pl`, `N`/`Π`, `truth`).
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalReadout {
    pub variable: Arc<Variable>,
    pub columns: Vec<String>,
    pub rows: Vec<ReadoutRow>,
}

impl MarginalReadout {
    pub fn row(&self, value: &str) -> Option<&ReadoutRow> {
        self.rows.iter().find(|r| r.value == value)
    }

    /// Numeric cell by frame value and column label.
    pub fn number(&self, value: &str, column: &str) -> Option<f64> {
        let col = self.columns.iter().position(|c| c == column)?;
        self.row(value)?.cells.get(col)?.as_number()
    }

    pub fn truth(&self, value: &str) -> Option<bool> {
        self.row(value)?.cells.first()?.as_truth()
    }
}

type CombineFn = Arc<dyn Fn(&Valuation, &Valuation) -> Result<Valuation> + Send + Sync>;
type MarginalizeFn = Arc<dyn Fn(&Valuation, &Scope) -> Result<Valuation> + Send + Sync>;
type DefaultFn = Arc<dyn Fn(&Scope) -> Result<Valuation> + Send + Sync>;
type NormalizeFn = Arc<dyn Fn(&Valuation) -> Result<Valuation> + Send + Sync>;
type ReadoutFn = Arc<dyn Fn(&Valuation) -> Result<MarginalReadout> + Send + Sync>;

/// An operator bundle interpreting valuations under one uncertainty theory.
///
/// Instances are immutable and cheaply cloneable; all operators are pure.
#[derive(Clone)]
pub struct Calculus {
    name: String,
    kind: ValuationKind,
    combine: CombineFn,
    marginalize: MarginalizeFn,
    default_variable: DefaultFn,
    default_relation: DefaultFn,
    normalize: NormalizeFn,
    post_propagate: NormalizeFn,
    readout: ReadoutFn,
}

impl fmt::Debug for Calculus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Calculus")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .finish()
    }
}

impl Calculus {
    pub fn builder(name: impl Into<String>, kind: ValuationKind) -> CalculusBuilder {
        CalculusBuilder {
            name: name.into(),
            kind,
            combine: None,
            marginalize: None,
            default_variable: None,
            default_relation: None,
            normalize: None,
            post_propagate: None,
            readout: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ValuationKind {
        self.kind
    }

    fn check_kind(&self, v: &Valuation) -> Result<()> {
        if v.kind() != self.kind {
            return Err(Error::KindMismatch {
                expected: self.kind.to_string(),
                found: v.kind().to_string(),
            });
        }
        Ok(())
    }

    /// Combination onto the union of the operand scopes.
    pub fn combine(&self, a: &Valuation, b: &Valuation) -> Result<Valuation> {
        self.check_kind(a)?;
        self.check_kind(b)?;
        (self.combine)(a, b)
    }

    /// Marginalization onto a sub-scope of the operand.
    pub fn marginalize(&self, v: &Valuation, target: &Scope) -> Result<Valuation> {
        self.check_kind(v)?;
        (self.marginalize)(v, target)
    }

    pub fn default_valuation(&self, scope: &Scope, role: Role) -> Result<Valuation> {
        match role {
            Role::Variable => (self.default_variable)(scope),
            Role::Relation => (self.default_relation)(scope),
        }
    }

    pub fn normalize(&self, v: &Valuation) -> Result<Valuation> {
        self.check_kind(v)?;
        (self.normalize)(v)
    }

    /// Housekeeping hook applied to marginals after propagation.
    pub fn post_propagate(&self, v: &Valuation) -> Result<Valuation> {
        self.check_kind(v)?;
        (self.post_propagate)(v)
    }

    /// Presentation of a single-variable marginal.
    pub fn readout(&self, v: &Valuation) -> Result<MarginalReadout> {
        self.check_kind(v)?;
        if v.scope().len() != 1 {
            return Err(Error::ScopeNotSingleton(v.scope().to_string()));
        }
        (self.readout)(v)
    }

    /// Certainty valuation encoding an observation, derived from the
    /// valuation kind: an indicator table for point calculi, a singleton
    /// focal set for mass calculi.
    pub fn certainty(&self, config: &Configuration) -> Valuation {
        match self.kind {
            ValuationKind::Point(kind) => PointValuation::certainty(kind, config).into(),
            ValuationKind::Mass => MassValuation::certainty(config).into(),
        }
    }
}

/// Builder collecting the specialization functions; `build` rejects bundles
/// with a missing function.
pub struct CalculusBuilder {
    name: String,
    kind: ValuationKind,
    combine: Option<CombineFn>,
    marginalize: Option<MarginalizeFn>,
    default_variable: Option<DefaultFn>,
    default_relation: Option<DefaultFn>,
    normalize: Option<NormalizeFn>,
    post_propagate: Option<NormalizeFn>,
    readout: Option<ReadoutFn>,
}

impl CalculusBuilder {
    pub fn combine(
        mut self,
        f: impl Fn(&Valuation, &Valuation) -> Result<Valuation> + Send + Sync + 'static,
    ) -> Self {
        self.combine = Some(Arc::new(f));
        self
    }

    pub fn marginalize(
        mut self,
        f: impl Fn(&Valuation, &Scope) -> Result<Valuation> + Send + Sync + 'static,
    ) -> Self {
        self.marginalize = Some(Arc::new(f));
        self
    }

    pub fn default_variable(
        mut self,
        f: impl Fn(&Scope) -> Result<Valuation> + Send + Sync + 'static,
    ) -> Self {
        self.default_variable = Some(Arc::new(f));
        self
    }

    pub fn default_relation(
        mut self,
        f: impl Fn(&Scope) -> Result<Valuation> + Send + Sync + 'static,
    ) -> Self {
        self.default_relation = Some(Arc::new(f));
        self
    }

    pub fn normalize(
        mut self,
        f: impl Fn(&Valuation) -> Result<Valuation> + Send + Sync + 'static,
    ) -> Self {
        self.normalize = Some(Arc::new(f));
        self
    }

    /// Optional; identity when unset.
    pub fn post_propagate(
        mut self,
        f: impl Fn(&Valuation) -> Result<Valuation> + Send + Sync + 'static,
    ) -> Self {
        self.post_propagate = Some(Arc::new(f));
        self
    }

    /// Optional; a verbatim rendering of the marginal when unset.
    pub fn readout(
        mut self,
        f: impl Fn(&Valuation) -> Result<MarginalReadout> + Send + Sync + 'static,
    ) -> Self {
        self.readout = Some(Arc::new(f));
        self
    }

    pub fn build(self) -> Result<Calculus> {
        let kind = self.kind;
        Ok(Calculus {
            name: self.name,
            kind,
            combine: self.combine.ok_or(Error::MissingFunction("combine"))?,
            marginalize: self
                .marginalize
                .ok_or(Error::MissingFunction("marginalize"))?,
            default_variable: self
                .default_variable
                .ok_or(Error::MissingFunction("default_variable_valuation"))?,
            default_relation: self
                .default_relation
                .ok_or(Error::MissingFunction("default_relation_valuation"))?,
            normalize: self.normalize.ok_or(Error::MissingFunction("normalize"))?,
            post_propagate: self
                .post_propagate
                .unwrap_or_else(|| Arc::new(|v: &Valuation| Ok(v.clone()))),
            readout: self.readout.unwrap_or_else(|| Arc::new(verbatim_readout)),
        })
    }
}

/// Fallback readout: raw values under a single `value` column (or `truth`
/// for Boolean tables), `bel`/`pl` for mass marginals.
fn verbatim_readout(v: &Valuation) -> Result<MarginalReadout> {
    let variable = v.scope().vars()[0].clone();
    match v {
        Valuation::Point(p) => {
            let boolean = p.kind() == PointKind::Boolean;
            let rows = variable
                .frame()
                .iter()
                .zip(p.table())
                .map(|(value, x)| ReadoutRow {
                    value: value.clone(),
                    cells: vec![if boolean {
                        Cell::Truth(*x == 1.0)
                    } else {
                        Cell::Number(*x)
                    }],
                })
                .collect();
            Ok(MarginalReadout {
                variable,
                columns: vec![if boolean { "truth" } else { "value" }.to_string()],
                rows,
            })
        }
        Valuation::Mass(m) => builtins::mass_readout(m),
    }
}

/// Named calculi available to a session. Registration is a single-writer
/// setup phase; lookups share the registered bundles.
#[derive(Debug, Clone, Default)]
pub struct CalculusRegistry {
    map: BTreeMap<String, Arc<Calculus>>,
}

impl CalculusRegistry {
    pub fn new() -> CalculusRegistry {
        CalculusRegistry::default()
    }

    /// Registry preloaded with the four built-in calculi.
    pub fn with_builtins() -> CalculusRegistry {
        let mut reg = CalculusRegistry::new();
        for calc in [probability(), belief(), boolean(), possibility()] {
            reg.register(calc).expect("built-ins have distinct names");
        }
        reg
    }

    pub fn register(&mut self, calculus: Calculus) -> Result<()> {
        if self.map.contains_key(calculus.name()) {
            return Err(Error::DuplicateCalculus(calculus.name().to_string()));
        }
        self.map
            .insert(calculus.name().to_string(), Arc::new(calculus));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Arc<Calculus>> {
        self.map
            .get(name)
            .ok_or_else(|| Error::UnknownCalculus(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(|s| s.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builder_rejects_missing_functions() {
        let err = Calculus::builder("broken", ValuationKind::Point(PointKind::Probability))
            .marginalize(|v, s| Ok(v.as_point()?.marginalize_with(s, |a, b| a + b)?.into()))
            .default_variable(|s| Ok(PointValuation::uniform(s.clone()).into()))
            .default_relation(|s| Ok(PointValuation::uniform(s.clone()).into()))
            .normalize(|v| Ok(v.clone()))
            .build()
            .unwrap_err();
        assert!(matches!(err, Error::MissingFunction("combine")));
    }

    #[test]
    fn registry_rejects_duplicates() {
        let mut reg = CalculusRegistry::with_builtins();
        assert!(reg.get("probability").is_ok());
        assert!(reg.get("belief").is_ok());
        assert!(reg.get("boolean").is_ok());
        assert!(reg.get("possibility").is_ok());
        assert!(matches!(
            reg.register(probability()),
            Err(Error::DuplicateCalculus(_))
        ));
        assert!(matches!(reg.get("fuzzy"), Err(Error::UnknownCalculus(_))));
    }

    #[test]
    fn calculus_rejects_foreign_valuations() {
        let prob = probability();
        let scope = Scope::new([crate::frames::Variable::new("X", ["a", "b"]).unwrap()]).unwrap();
        let mass: Valuation = MassValuation::vacuous(&scope).into();
        assert!(matches!(
            prob.normalize(&mass),
            Err(Error::KindMismatch { .. })
        ));
    }
}

//! Dense point valuations: one scalar per configuration of a scope.
//!
//! Probability, possibility and Boolean knowledge all live in this shape;
//! only the per-entry range differs. Boolean truth is stored as 0.0/1.0 so
//! that all three share the same data-parallel kernels.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::frames::{Configuration, RankInjection, RankProjection, Scope, Variable};

/// Entry interpretation of a dense table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PointKind {
    /// Non-negative reals; unnormalized probability mass.
    Probability,
    /// Reals in `[0,1]`.
    Possibility,
    /// Truth values, stored as exactly 0.0 or 1.0.
    Boolean,
}

impl PointKind {
    fn check_entry(self, v: f64) -> bool {
        match self {
            PointKind::Probability => v.is_finite() && v >= 0.0,
            PointKind::Possibility => v.is_finite() && (0.0..=1.0).contains(&v),
            PointKind::Boolean => v == 0.0 || v == 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PointKind::Probability => "probability",
            PointKind::Possibility => "possibility",
            PointKind::Boolean => "boolean",
        }
    }
}

impl fmt::Display for PointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A dense mapping from every configuration of a scope to a scalar, stored
/// row-major over the canonical scope order.
#[derive(Debug, Clone, PartialEq)]
pub struct PointValuation {
    scope: Scope,
    kind: PointKind,
    table: Vec<f64>,
}

impl PointValuation {
    pub fn new(scope: Scope, kind: PointKind, table: Vec<f64>) -> Result<PointValuation> {
        let expected = scope.config_count();
        if table.len() != expected {
            return Err(Error::InvalidValuation(format!(
                "table of {} entries for scope {} with {} configurations",
                table.len(),
                scope,
                expected
            )));
        }
        if let Some(bad) = table.iter().find(|v| !kind.check_entry(**v)) {
            return Err(Error::InvalidValuation(format!(
                "entry {bad} out of range for a {kind} table"
            )));
        }
        Ok(PointValuation { scope, kind, table })
    }

    /// Builds a valuation from a table laid out row-major over an arbitrary
    /// variable order (e.g. a relation's declared order), permuting into the
    /// canonical scope order.
    pub fn from_table_in_order(
        vars: &[Arc<Variable>],
        kind: PointKind,
        values: &[f64],
    ) -> Result<PointValuation> {
        let scope = Scope::new(vars.iter().cloned())?;
        if scope.len() != vars.len() {
            return Err(Error::DuplicateName(
                "repeated variable in table order".to_string(),
            ));
        }
        let count = scope.config_count();
        if values.len() != count {
            return Err(Error::InvalidValuation(format!(
                "table of {} entries for scope {} with {count} configurations",
                values.len(),
                scope
            )));
        }
        // Strides of the declared layout.
        let mut declared = vec![1usize; vars.len()];
        for i in (0..vars.len().saturating_sub(1)).rev() {
            declared[i] = declared[i + 1] * vars[i + 1].frame_size();
        }
        let canonical = scope.strides();
        let table = (0..count)
            .map(|rank| {
                let declared_rank: usize = vars
                    .iter()
                    .zip(&declared)
                    .map(|(v, ds)| {
                        let ci = scope.index_of(v.name()).expect("var in own scope");
                        ((rank / canonical[ci]) % v.frame_size()) * ds
                    })
                    .sum();
                values[declared_rank]
            })
            .collect();
        PointValuation::new(scope, kind, table)
    }

    pub fn constant(scope: Scope, kind: PointKind, value: f64) -> Result<PointValuation> {
        let count = scope.config_count();
        PointValuation::new(scope, kind, vec![value; count])
    }

    /// Uniform probability table: every configuration gets `1/|W|`.
    pub fn uniform(scope: Scope) -> PointValuation {
        let count = scope.config_count();
        let v = 1.0 / count as f64;
        PointValuation {
            scope,
            kind: PointKind::Probability,
            table: vec![v; count],
        }
    }

    /// Certainty on one configuration: 1 (true) there, 0 (false) elsewhere.
    pub fn certainty(kind: PointKind, config: &Configuration) -> PointValuation {
        let scope = config.scope().clone();
        let mut table = vec![0.0; scope.config_count()];
        table[config.rank()] = 1.0;
        PointValuation { scope, kind, table }
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn kind(&self) -> PointKind {
        self.kind
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    pub fn value_at(&self, config: &Configuration) -> Result<f64> {
        Ok(self.table[self.scope.rank_of(config)?])
    }

    pub fn total(&self) -> f64 {
        self.table.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.table.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> PointValuation {
        PointValuation {
            scope: self.scope.clone(),
            kind: self.kind,
            table: self.table.iter().map(|v| f(*v)).collect(),
        }
    }

    /// Pointwise combination onto the union scope: the entry at `x` is
    /// `f(self(x↓g), other(x↓h))`.
    pub fn combine_with(
        &self,
        other: &PointValuation,
        f: impl Fn(f64, f64) -> f64 + Sync + Send,
    ) -> Result<PointValuation> {
        self.combine_with_mode(other, f, ExecMode::Auto)
    }

    #[doc(hidden)]
    pub fn combine_with_mode(
        &self,
        other: &PointValuation,
        f: impl Fn(f64, f64) -> f64 + Sync + Send,
        mode: ExecMode,
    ) -> Result<PointValuation> {
        if self.kind != other.kind {
            return Err(Error::KindMismatch {
                expected: self.kind.to_string(),
                found: other.kind.to_string(),
            });
        }
        let union = self.scope.union(&other.scope)?;
        let pg = RankProjection::new(&union, &self.scope);
        let ph = RankProjection::new(&union, &other.scope);
        let table = exec::fill(union.config_count(), mode, |rank| {
            f(self.table[pg.apply(rank)], other.table[ph.apply(rank)])
        });
        Ok(PointValuation {
            scope: union,
            kind: self.kind,
            table,
        })
    }

    /// Reduces onto a sub-scope: the entry at `x` folds `f` over the values
    /// of every extension of `x`, in row-major order of the dropped
    /// variables.
    pub fn marginalize_with(
        &self,
        target: &Scope,
        f: impl Fn(f64, f64) -> f64 + Sync + Send,
    ) -> Result<PointValuation> {
        self.marginalize_with_mode(target, f, ExecMode::Auto)
    }

    #[doc(hidden)]
    pub fn marginalize_with_mode(
        &self,
        target: &Scope,
        f: impl Fn(f64, f64) -> f64 + Sync + Send,
        mode: ExecMode,
    ) -> Result<PointValuation> {
        if !target.is_subset_of(&self.scope) {
            return Err(Error::ScopeMismatch(format!(
                "cannot marginalize {} onto {}",
                self.scope, target
            )));
        }
        let injection = RankInjection::new(target, &self.scope);
        let extras = injection.extra_count();
        let table = exec::fill(target.config_count(), mode, |t| {
            let mut acc = self.table[injection.apply(t, 0)];
            for extra in 1..extras {
                acc = f(acc, self.table[injection.apply(t, extra)]);
            }
            acc
        });
        Ok(PointValuation {
            scope: target.clone(),
            kind: self.kind,
            table,
        })
    }

    /// Rescales so entries sum to 1; errors when the total is zero.
    pub fn normalized_by_total(&self) -> Result<PointValuation> {
        let total = self.total();
        if total == 0.0 {
            return Err(Error::DegenerateValuation(format!(
                "{} table over {} sums to zero",
                self.kind, self.scope
            )));
        }
        Ok(self.map(|v| v / total))
    }

    /// Rescales so the maximum entry is 1; errors when the maximum is zero.
    pub fn normalized_by_max(&self) -> Result<PointValuation> {
        let max = self.max();
        if max == 0.0 {
            return Err(Error::DegenerateValuation(format!(
                "{} table over {} is identically zero",
                self.kind, self.scope
            )));
        }
        Ok(self.map(|v| v / max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn var(name: &str, frame: &[&str]) -> Arc<Variable> {
        Variable::new(name, frame.iter().copied()).unwrap()
    }

    fn washing_probability() -> PointValuation {
        // Declared order (Philco, Dress); rows Philco, columns Dress.
        let philco = var("Philco", &["ok", "out"]);
        let dress = var("Dress", &["B", "W", "P"]);
        PointValuation::from_table_in_order(
            &[philco, dress],
            PointKind::Probability,
            &[1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 0.2, 0.1, 0.2],
        )
        .unwrap()
    }

    #[test]
    fn table_length_is_validated() {
        let scope = Scope::new([var("X", &["a", "b"])]).unwrap();
        assert!(PointValuation::new(scope, PointKind::Probability, vec![0.5]).is_err());
    }

    #[test]
    fn entry_ranges_are_validated() {
        let scope = Scope::new([var("X", &["a", "b"])]).unwrap();
        assert!(
            PointValuation::new(scope.clone(), PointKind::Probability, vec![-0.1, 0.5]).is_err()
        );
        assert!(
            PointValuation::new(scope.clone(), PointKind::Possibility, vec![1.5, 0.5]).is_err()
        );
        assert!(PointValuation::new(scope, PointKind::Boolean, vec![0.5, 1.0]).is_err());
    }

    #[test]
    fn from_table_in_order_permutes_into_canonical_layout() {
        let w = washing_probability();
        // Canonical order (Dress, Philco), row-major: (B,ok),(B,out),(W,ok),...
        let g = w.scope().clone();
        let at = |dress: &str, philco: &str| {
            w.value_at(&Configuration::from_values(&g, &[dress, philco]).unwrap())
                .unwrap()
        };
        assert_eq!(at("B", "out"), 0.2);
        assert_eq!(at("W", "out"), 0.1);
        assert_eq!(at("W", "ok"), 1.0 / 6.0);
    }

    #[test]
    fn combine_projects_both_operands() {
        let w = washing_probability();
        let speech = var("Speech", &["uttered", "unuttered"]);
        let dress = var("Dress", &["B", "W", "P"]);
        let coherence = PointValuation::from_table_in_order(
            &[speech, dress],
            PointKind::Probability,
            &[0.025, 0.025, 0.45, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0],
        )
        .unwrap();
        let joint = w.combine_with(&coherence, |a, b| a * b).unwrap();
        assert_eq!(joint.scope().len(), 3);
        let x = Configuration::from_values(joint.scope(), &["B", "out", "uttered"]).unwrap();
        assert!((joint.value_at(&x).unwrap() - 0.005).abs() < 1e-12);
    }

    #[test]
    fn marginalize_sums_rows() {
        let w = washing_probability();
        let philco_scope = Scope::new([var("Philco", &["ok", "out"])]).unwrap();
        let m = w.marginalize_with(&philco_scope, |a, b| a + b).unwrap();
        let out = Configuration::from_values(&philco_scope, &["out"]).unwrap();
        assert!((m.value_at(&out).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn marginalize_identity_when_scope_unchanged() {
        let w = washing_probability();
        let same = w.marginalize_with(w.scope(), |a, b| a + b).unwrap();
        assert_eq!(same.table(), w.table());
    }

    #[test]
    fn possibility_sup_over_rows() {
        let philco = var("Philco", &["ok", "out"]);
        let dress = var("Dress", &["B", "W", "P"]);
        let pi = PointValuation::from_table_in_order(
            &[philco.clone(), dress],
            PointKind::Possibility,
            &[1.0, 1.0, 1.0, 1.0, 0.2, 1.0],
        )
        .unwrap();
        let target = Scope::new([philco]).unwrap();
        let m = pi.marginalize_with(&target, f64::max).unwrap();
        let out = Configuration::from_values(&target, &["out"]).unwrap();
        assert_eq!(m.value_at(&out).unwrap(), 1.0);
    }

    #[test]
    fn normalization_by_total_and_max() {
        let scope = Scope::new([var("Dress", &["B", "W", "P"])]).unwrap();
        let p = PointValuation::new(
            scope.clone(),
            PointKind::Probability,
            vec![0.005, 0.0025, 0.09],
        )
        .unwrap();
        let n = p.normalized_by_total().unwrap();
        assert!((n.table()[0] - 0.005 / 0.0975).abs() < 1e-12);
        assert!((n.table()[2] - 0.09 / 0.0975).abs() < 1e-12);

        let pi = PointValuation::new(scope.clone(), PointKind::Possibility, vec![0.1, 0.1, 1.0])
            .unwrap();
        assert_eq!(pi.normalized_by_max().unwrap().table(), pi.table());

        let zero = PointValuation::new(scope.clone(), PointKind::Probability, vec![0.0, 0.0, 0.0])
            .unwrap();
        assert!(matches!(
            zero.normalized_by_total(),
            Err(Error::DegenerateValuation(_))
        ));
        let impossible =
            PointValuation::new(scope, PointKind::Possibility, vec![0.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            impossible.normalized_by_max(),
            Err(Error::DegenerateValuation(_))
        ));
    }
}

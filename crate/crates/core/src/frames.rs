//! Variables, frames, scopes and configurations.
//!
//! A variable ranges over a finite, ordered frame of symbolic values. A scope
//! is a canonically ordered set of variables, and a configuration is one cell
//! of the Cartesian product of the frames in a scope. Dense valuations index
//! that product in row-major order over the canonical (lexicographic by
//! variable name) scope order, which keeps every table layout deterministic.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A named variable with a finite frame of distinct values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable {
    name: String,
    frame: Vec<String>,
}

impl Variable {
    pub fn new<S: Into<String>, I: IntoIterator<Item = S>>(
        name: impl Into<String>,
        frame: I,
    ) -> Result<Arc<Variable>> {
        let name = name.into();
        let frame: Vec<String> = frame.into_iter().map(Into::into).collect();
        if frame.is_empty() {
            return Err(Error::EmptyFrame(name));
        }
        for (i, v) in frame.iter().enumerate() {
            if frame[..i].contains(v) {
                return Err(Error::DuplicateFrameValue(name, v.clone()));
            }
        }
        Ok(Arc::new(Variable { name, frame }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Frame values in declaration order.
    pub fn frame(&self) -> &[String] {
        &self.frame
    }

    pub fn frame_size(&self) -> usize {
        self.frame.len()
    }

    pub fn value_index(&self, value: &str) -> Result<usize> {
        self.frame
            .iter()
            .position(|v| v == value)
            .ok_or_else(|| Error::UnknownValue {
                variable: self.name.clone(),
                value: value.to_string(),
            })
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// An ordered set of variables, canonically sorted by name.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Scope {
    vars: Arc<[Arc<Variable>]>,
}

impl Scope {
    /// Builds a scope from any iterable of variables. Input order is
    /// irrelevant; the result is sorted by name. The same variable may appear
    /// twice, but two distinct variables sharing a name are rejected.
    pub fn new<I: IntoIterator<Item = Arc<Variable>>>(vars: I) -> Result<Scope> {
        let mut vars: Vec<Arc<Variable>> = vars.into_iter().collect();
        vars.sort_by(|a, b| a.name().cmp(b.name()));
        let mut out: Vec<Arc<Variable>> = Vec::with_capacity(vars.len());
        for v in vars {
            match out.last() {
                Some(prev) if prev.name() == v.name() => {
                    if prev.frame() != v.frame() {
                        return Err(Error::FrameMismatch(v.name().to_string()));
                    }
                }
                _ => out.push(v),
            }
        }
        Ok(Scope { vars: out.into() })
    }

    pub fn empty() -> Scope {
        Scope {
            vars: Arc::from([]),
        }
    }

    pub fn singleton(var: Arc<Variable>) -> Scope {
        Scope {
            vars: Arc::from([var]),
        }
    }

    /// Variables in canonical order.
    pub fn vars(&self) -> &[Arc<Variable>] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index_of(name).is_some()
    }

    /// Position of a variable in the canonical order.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.binary_search_by(|v| v.name().cmp(name)).ok()
    }

    pub fn var(&self, name: &str) -> Option<&Arc<Variable>> {
        self.index_of(name).map(|i| &self.vars[i])
    }

    pub fn is_subset_of(&self, other: &Scope) -> bool {
        self.vars.iter().all(|v| match other.var(v.name()) {
            Some(o) => o.frame() == v.frame(),
            None => false,
        })
    }

    pub fn union(&self, other: &Scope) -> Result<Scope> {
        for v in other.vars() {
            if let Some(mine) = self.var(v.name()) {
                if mine.frame() != v.frame() {
                    return Err(Error::FrameMismatch(v.name().to_string()));
                }
            }
        }
        Scope::new(self.vars.iter().chain(other.vars.iter()).cloned())
    }

    /// Variables present in both scopes (matched by name and frame).
    pub fn intersection(&self, other: &Scope) -> Scope {
        let vars = self
            .vars
            .iter()
            .filter(|v| other.var(v.name()).is_some_and(|o| o.frame() == v.frame()))
            .cloned();
        Scope {
            vars: vars.collect(),
        }
    }

    /// Variables of `self` not present in `other`.
    pub fn difference(&self, other: &Scope) -> Scope {
        let vars = self
            .vars
            .iter()
            .filter(|v| !other.contains(v.name()))
            .cloned();
        Scope {
            vars: vars.collect(),
        }
    }

    /// Number of configurations, i.e. the product of the frame sizes. The
    /// empty scope has exactly one (empty) configuration.
    pub fn config_count(&self) -> usize {
        self.checked_config_count()
            .expect("configuration count overflows usize")
    }

    pub fn checked_config_count(&self) -> Option<usize> {
        self.vars
            .iter()
            .try_fold(1usize, |acc, v| acc.checked_mul(v.frame_size()))
    }

    /// Row-major strides over the canonical order: the first variable varies
    /// slowest, the last varies fastest.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.vars.len()];
        for i in (0..self.vars.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.vars[i + 1].frame_size();
        }
        strides
    }

    /// All configurations in row-major order; deterministic and duplicate-free.
    pub fn configurations(&self) -> impl Iterator<Item = Configuration> + '_ {
        (0..self.config_count()).map(move |rank| self.config_at(rank))
    }

    pub fn config_at(&self, rank: usize) -> Configuration {
        debug_assert!(rank < self.config_count());
        let strides = self.strides();
        let indices = self
            .vars
            .iter()
            .zip(&strides)
            .map(|(v, s)| (rank / s) % v.frame_size())
            .collect();
        Configuration {
            scope: self.clone(),
            indices,
        }
    }

    pub fn rank_of(&self, config: &Configuration) -> Result<usize> {
        if config.scope() != self {
            return Err(Error::ScopeMismatch(format!(
                "configuration over {} ranked against {}",
                config.scope(),
                self
            )));
        }
        let strides = self.strides();
        Ok(config
            .indices
            .iter()
            .zip(&strides)
            .map(|(i, s)| i * s)
            .sum())
    }

    /// Deterministic ordering key: compares variable name sequences.
    pub fn cmp_key(&self, other: &Scope) -> Ordering {
        let a = self.vars.iter().map(|v| v.name());
        let b = other.vars.iter().map(|v| v.name());
        a.cmp(b)
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.vars.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", v.name())?;
        }
        write!(f, "}}")
    }
}

/// One cell of a scope's configuration space: a frame-value index per
/// variable, aligned with the scope's canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration {
    scope: Scope,
    indices: Vec<usize>,
}

impl Configuration {
    pub fn new(scope: Scope, indices: Vec<usize>) -> Result<Configuration> {
        if indices.len() != scope.len() {
            return Err(Error::ScopeMismatch(format!(
                "{} indices for scope {} of size {}",
                indices.len(),
                scope,
                scope.len()
            )));
        }
        for (i, v) in indices.iter().zip(scope.vars()) {
            if *i >= v.frame_size() {
                return Err(Error::UnknownValue {
                    variable: v.name().to_string(),
                    value: format!("#{i}"),
                });
            }
        }
        Ok(Configuration { scope, indices })
    }

    /// Builds a configuration from value names given in canonical scope order.
    pub fn from_values(scope: &Scope, values: &[&str]) -> Result<Configuration> {
        if values.len() != scope.len() {
            return Err(Error::ScopeMismatch(format!(
                "{} values for scope {} of size {}",
                values.len(),
                scope,
                scope.len()
            )));
        }
        let indices = scope
            .vars()
            .iter()
            .zip(values)
            .map(|(v, s)| v.value_index(s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Configuration {
            scope: scope.clone(),
            indices,
        })
    }

    /// Builds a configuration from value names aligned with an arbitrary
    /// variable order, reordering into the canonical scope internally.
    pub fn from_values_in_order(vars: &[Arc<Variable>], values: &[&str]) -> Result<Configuration> {
        if values.len() != vars.len() {
            return Err(Error::ScopeMismatch(format!(
                "{} values for {} variables",
                values.len(),
                vars.len()
            )));
        }
        let scope = Scope::new(vars.iter().cloned())?;
        if scope.len() != vars.len() {
            return Err(Error::DuplicateName(
                "repeated variable in configuration".to_string(),
            ));
        }
        let mut indices = vec![0usize; scope.len()];
        for (v, s) in vars.iter().zip(values) {
            let pos = scope.index_of(v.name()).expect("var in own scope");
            indices[pos] = v.value_index(s)?;
        }
        Ok(Configuration { scope, indices })
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Value names in canonical scope order.
    pub fn values(&self) -> Vec<&str> {
        self.scope
            .vars()
            .iter()
            .zip(&self.indices)
            .map(|(v, i)| v.frame()[*i].as_str())
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.scope.rank_of(self).expect("own scope")
    }

    /// Drops the coordinates of variables outside `target`.
    pub fn project(&self, target: &Scope) -> Result<Configuration> {
        if !target.is_subset_of(&self.scope) {
            return Err(Error::ScopeMismatch(format!(
                "cannot project {} onto {}",
                self.scope, target
            )));
        }
        let indices = target
            .vars()
            .iter()
            .map(|v| {
                let pos = self.scope.index_of(v.name()).expect("subset");
                self.indices[pos]
            })
            .collect();
        Ok(Configuration {
            scope: target.clone(),
            indices,
        })
    }

    /// Pairs the configuration with every configuration of the missing
    /// variables: the set of all `y` over `target` with `y↓self = self`.
    pub fn extend(&self, target: &Scope) -> Result<ConfigSet> {
        if !self.scope.is_subset_of(target) {
            return Err(Error::ScopeMismatch(format!(
                "cannot extend {} onto {}",
                self.scope, target
            )));
        }
        let injection = RankInjection::new(&self.scope, target);
        let own = self.rank();
        let ranks = (0..injection.extra_count())
            .map(|extra| injection.apply(own, extra))
            .collect();
        ConfigSet::from_sorted_candidates(target.clone(), ranks)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.values().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// A finite set of configurations over one scope, stored as sorted row-major
/// ranks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConfigSet {
    scope: Scope,
    ranks: Vec<usize>,
}

impl ConfigSet {
    pub fn new<I: IntoIterator<Item = Configuration>>(
        scope: Scope,
        members: I,
    ) -> Result<ConfigSet> {
        let mut ranks = Vec::new();
        for c in members {
            if c.scope() != &scope {
                return Err(Error::ScopeMismatch(format!(
                    "configuration over {} in set over {}",
                    c.scope(),
                    scope
                )));
            }
            ranks.push(c.rank());
        }
        Self::from_sorted_candidates(scope, ranks)
    }

    /// Builds a set directly from row-major ranks.
    pub fn from_ranks(scope: Scope, ranks: Vec<usize>) -> Result<ConfigSet> {
        let count = scope.config_count();
        if let Some(r) = ranks.iter().find(|r| **r >= count) {
            return Err(Error::InvalidValuation(format!(
                "rank {r} out of range for scope {scope}"
            )));
        }
        Self::from_sorted_candidates(scope, ranks)
    }

    fn from_sorted_candidates(scope: Scope, mut ranks: Vec<usize>) -> Result<ConfigSet> {
        ranks.sort_unstable();
        ranks.dedup();
        Ok(ConfigSet { scope, ranks })
    }

    /// The full configuration space of a scope.
    pub fn full(scope: &Scope) -> ConfigSet {
        ConfigSet {
            ranks: (0..scope.config_count()).collect(),
            scope: scope.clone(),
        }
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.ranks.len() == self.scope.config_count()
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn contains(&self, config: &Configuration) -> bool {
        config.scope() == &self.scope && self.ranks.binary_search(&config.rank()).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = Configuration> + '_ {
        self.ranks.iter().map(|r| self.scope.config_at(*r))
    }

    /// Pointwise projection; duplicates collapse.
    pub fn project(&self, target: &Scope) -> Result<ConfigSet> {
        if !target.is_subset_of(&self.scope) {
            return Err(Error::ScopeMismatch(format!(
                "cannot project {} onto {}",
                self.scope, target
            )));
        }
        let proj = RankProjection::new(&self.scope, target);
        let ranks = self.ranks.iter().map(|r| proj.apply(*r)).collect();
        Self::from_sorted_candidates(target.clone(), ranks)
    }

    /// Cylinder extension: every configuration of `target` projecting into
    /// this set.
    pub fn extend_to(&self, target: &Scope) -> Result<ConfigSet> {
        if !self.scope.is_subset_of(target) {
            return Err(Error::ScopeMismatch(format!(
                "cannot extend {} onto {}",
                self.scope, target
            )));
        }
        let injection = RankInjection::new(&self.scope, target);
        let mut ranks = Vec::with_capacity(self.ranks.len() * injection.extra_count());
        for own in &self.ranks {
            for extra in 0..injection.extra_count() {
                ranks.push(injection.apply(*own, extra));
            }
        }
        Self::from_sorted_candidates(target.clone(), ranks)
    }

    pub fn intersect(&self, other: &ConfigSet) -> Result<ConfigSet> {
        if self.scope != other.scope {
            return Err(Error::ScopeMismatch(format!(
                "intersection of sets over {} and {}",
                self.scope, other.scope
            )));
        }
        let mut ranks = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.ranks.len() && j < other.ranks.len() {
            match self.ranks[i].cmp(&other.ranks[j]) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    ranks.push(self.ranks[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        Ok(ConfigSet {
            scope: self.scope.clone(),
            ranks,
        })
    }
}

impl fmt::Display for ConfigSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, c) in self.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

/// Maps row-major ranks of a source scope onto ranks of a sub-scope by
/// dropping coordinates.
pub(crate) struct RankProjection {
    terms: Vec<(usize, usize, usize)>, // (src stride, frame size, dst stride)
}

impl RankProjection {
    /// `target` must be a subset of `source`.
    pub(crate) fn new(source: &Scope, target: &Scope) -> RankProjection {
        let src_strides = source.strides();
        let dst_strides = target.strides();
        let terms = target
            .vars()
            .iter()
            .enumerate()
            .map(|(di, v)| {
                let si = source.index_of(v.name()).expect("target subset of source");
                (src_strides[si], v.frame_size(), dst_strides[di])
            })
            .collect();
        RankProjection { terms }
    }

    #[inline]
    pub(crate) fn apply(&self, rank: usize) -> usize {
        self.terms
            .iter()
            .map(|(src, size, dst)| ((rank / src) % size) * dst)
            .sum()
    }
}

/// Composes a rank over a sub-scope with a rank over the complementary
/// variables into a rank over the full scope.
pub(crate) struct RankInjection {
    own_terms: Vec<(usize, usize, usize)>, // (own stride, size, target stride)
    extra_terms: Vec<(usize, usize, usize)>, // (extra stride, size, target stride)
    extra_count: usize,
}

impl RankInjection {
    /// `source` must be a subset of `target`; the "extra" space ranges over
    /// `target − source` in its own row-major order.
    pub(crate) fn new(source: &Scope, target: &Scope) -> RankInjection {
        let extra = target.difference(source);
        let tgt_strides = target.strides();
        let own_strides = source.strides();
        let extra_strides = extra.strides();
        let own_terms = source
            .vars()
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let ti = target.index_of(v.name()).expect("source subset of target");
                (own_strides[i], v.frame_size(), tgt_strides[ti])
            })
            .collect();
        let extra_terms = extra
            .vars()
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let ti = target.index_of(v.name()).expect("difference within target");
                (extra_strides[i], v.frame_size(), tgt_strides[ti])
            })
            .collect();
        RankInjection {
            own_terms,
            extra_terms,
            extra_count: extra.config_count(),
        }
    }

    pub(crate) fn extra_count(&self) -> usize {
        self.extra_count
    }

    #[inline]
    pub(crate) fn apply(&self, own: usize, extra: usize) -> usize {
        let a: usize = self
            .own_terms
            .iter()
            .map(|(src, size, dst)| ((own / src) % size) * dst)
            .sum();
        let b: usize = self
            .extra_terms
            .iter()
            .map(|(src, size, dst)| ((extra / src) % size) * dst)
            .sum();
        a + b
    }
}

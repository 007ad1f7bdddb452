//! Sparse mass valuations: basic probability assignments over sets of
//! configurations.
//!
//! Focal sets are stored as sorted row-major rank vectors keyed in a
//! `BTreeMap`, so iteration order (and therefore floating-point accumulation
//! order) is deterministic. Mass falling on the empty intersection during
//! combination lives in a dedicated `conflict` field rather than a focal set;
//! it behaves like mass on the empty set, so combination stays associative
//! and marginalization carries it through unchanged.

use std::collections::BTreeMap;
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::frames::{ConfigSet, Configuration, RankProjection, Scope};

/// A basic probability assignment: non-empty focal sets with non-negative
/// masses, plus conflict mass.
#[derive(Debug, Clone, PartialEq)]
pub struct MassValuation {
    scope: Scope,
    focal: BTreeMap<Vec<usize>, f64>,
    conflict: f64,
}

impl MassValuation {
    /// Builds a bpa from focal sets. Empty focal sets are rejected, zero
    /// masses are dropped, duplicate sets are merged by summing.
    pub fn new<I: IntoIterator<Item = (ConfigSet, f64)>>(
        scope: Scope,
        focal: I,
        conflict: f64,
    ) -> Result<MassValuation> {
        if !(conflict >= 0.0 && conflict.is_finite()) {
            return Err(Error::InvalidValuation(format!(
                "conflict mass {conflict} is not a non-negative real"
            )));
        }
        let mut map: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        for (set, mass) in focal {
            if set.scope() != &scope {
                return Err(Error::ScopeMismatch(format!(
                    "focal set over {} in a bpa over {}",
                    set.scope(),
                    scope
                )));
            }
            if set.is_empty() {
                return Err(Error::InvalidValuation(
                    "focal sets must be non-empty".to_string(),
                ));
            }
            if !(mass >= 0.0 && mass.is_finite()) {
                return Err(Error::InvalidValuation(format!(
                    "focal mass {mass} is not a non-negative real"
                )));
            }
            if mass > 0.0 {
                *map.entry(set.ranks().to_vec()).or_insert(0.0) += mass;
            }
        }
        Ok(MassValuation {
            scope,
            focal: map,
            conflict,
        })
    }

    /// Total ignorance: mass 1 on the full configuration set.
    pub fn vacuous(scope: &Scope) -> MassValuation {
        let mut focal = BTreeMap::new();
        focal.insert(ConfigSet::full(scope).ranks().to_vec(), 1.0);
        MassValuation {
            scope: scope.clone(),
            focal,
            conflict: 0.0,
        }
    }

    /// Certainty: mass 1 on a single configuration.
    pub fn certainty(config: &Configuration) -> MassValuation {
        let mut focal = BTreeMap::new();
        focal.insert(vec![config.rank()], 1.0);
        MassValuation {
            scope: config.scope().clone(),
            focal,
            conflict: 0.0,
        }
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn focal_count(&self) -> usize {
        self.focal.len()
    }

    /// Focal sets with their masses, in deterministic order.
    pub fn focal(&self) -> impl Iterator<Item = (ConfigSet, f64)> + '_ {
        self.focal.iter().map(|(ranks, mass)| {
            (
                ConfigSet::from_ranks(self.scope.clone(), ranks.clone())
                    .expect("stored ranks valid"),
                *mass,
            )
        })
    }

    pub fn mass_of(&self, set: &ConfigSet) -> f64 {
        if set.scope() != &self.scope {
            return 0.0;
        }
        self.focal.get(set.ranks()).copied().unwrap_or(0.0)
    }

    pub fn conflict(&self) -> f64 {
        self.conflict
    }

    pub fn focal_sum(&self) -> f64 {
        self.focal.values().sum()
    }

    /// Unnormalized Dempster combination onto the union scope: every focal
    /// pair is cylinder-extended, intersected, and its mass product
    /// accumulated on the intersection (on `conflict` when empty).
    pub fn combine(&self, other: &MassValuation) -> Result<MassValuation> {
        self.combine_mode(other, ExecMode::Auto)
    }

    #[doc(hidden)]
    pub fn combine_mode(&self, other: &MassValuation, mode: ExecMode) -> Result<MassValuation> {
        let union = self.scope.union(&other.scope)?;
        let sep = self.scope.intersection(&other.scope);

        // Intersections are computed by joining members that agree on the
        // shared variables instead of materializing cylinder extensions:
        // distinct member pairs always compose to distinct union ranks.
        let proj_self = RankProjection::new(&self.scope, &sep);
        let proj_other = RankProjection::new(&other.scope, &sep);
        let compose = UnionComposer::new(&self.scope, &other.scope, &union);

        let ours: Vec<(&Vec<usize>, f64)> = self.focal.iter().map(|(k, m)| (k, *m)).collect();
        let theirs: Vec<GroupedFocal<'_>> = other
            .focal
            .iter()
            .map(|(k, m)| {
                let mut by_sep: HashMap<usize, Vec<usize>> = HashMap::new();
                for z in k.iter() {
                    by_sep.entry(proj_other.apply(*z)).or_default().push(*z);
                }
                (k, *m, by_sep)
            })
            .collect();

        let pairs = ours.len() * theirs.len();
        let (focal, pair_conflict) = exec::chunked_sweep(
            pairs,
            mode,
            |range| {
                let mut focal: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
                let mut conflict = 0.0;
                for p in range {
                    let (a_ranks, a_mass) = ours[p / theirs.len()];
                    let (_, b_mass, by_sep) = &theirs[p % theirs.len()];
                    let mut members = Vec::new();
                    for x in a_ranks.iter() {
                        if let Some(zs) = by_sep.get(&proj_self.apply(*x)) {
                            for z in zs {
                                members.push(compose.apply(*x, *z));
                            }
                        }
                    }
                    let product = a_mass * b_mass;
                    if members.is_empty() {
                        conflict += product;
                    } else {
                        members.sort_unstable();
                        *focal.entry(members).or_insert(0.0) += product;
                    }
                }
                (focal, conflict)
            },
            |(mut focal, conflict), (part_focal, part_conflict)| {
                for (k, m) in part_focal {
                    *focal.entry(k).or_insert(0.0) += m;
                }
                (focal, conflict + part_conflict)
            },
            (BTreeMap::new(), 0.0),
        );

        // Conflict behaves as mass on the empty set: it clashes with
        // everything, including the other operand's conflict.
        let conflict = pair_conflict
            + self.conflict * (other.focal_sum() + other.conflict)
            + self.focal_sum() * other.conflict;

        Ok(MassValuation {
            scope: union,
            focal,
            conflict,
        })
    }

    /// Projects every focal set and merges the masses of sets sharing a
    /// projection; conflict is carried through unchanged.
    pub fn marginalize(&self, target: &Scope) -> Result<MassValuation> {
        self.marginalize_mode(target, ExecMode::Auto)
    }

    #[doc(hidden)]
    pub fn marginalize_mode(&self, target: &Scope, mode: ExecMode) -> Result<MassValuation> {
        if !target.is_subset_of(&self.scope) {
            return Err(Error::ScopeMismatch(format!(
                "cannot marginalize {} onto {}",
                self.scope, target
            )));
        }
        let proj = RankProjection::new(&self.scope, target);
        let entries: Vec<(&Vec<usize>, f64)> = self.focal.iter().map(|(k, m)| (k, *m)).collect();
        let focal = exec::chunked_sweep(
            entries.len(),
            mode,
            |range| {
                let mut focal: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
                for i in range {
                    let (ranks, mass) = entries[i];
                    let mut projected: Vec<usize> = ranks.iter().map(|r| proj.apply(*r)).collect();
                    projected.sort_unstable();
                    projected.dedup();
                    *focal.entry(projected).or_insert(0.0) += mass;
                }
                focal
            },
            |mut acc: BTreeMap<Vec<usize>, f64>, part| {
                for (k, m) in part {
                    *acc.entry(k).or_insert(0.0) += m;
                }
                acc
            },
            BTreeMap::new(),
        );
        Ok(MassValuation {
            scope: target.clone(),
            focal,
            conflict: self.conflict,
        })
    }

    /// Discards conflict and rescales focal masses to sum 1.
    pub fn normalized(&self) -> Result<MassValuation> {
        let total = self.focal_sum();
        if total == 0.0 {
            return Err(Error::DegenerateValuation(format!(
                "bpa over {} has no focal mass (conflict {})",
                self.scope, self.conflict
            )));
        }
        Ok(MassValuation {
            scope: self.scope.clone(),
            focal: self
                .focal
                .iter()
                .map(|(k, m)| (k.clone(), m / total))
                .collect(),
            conflict: 0.0,
        })
    }
}

impl fmt::Display for MassValuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bpa over {} [", self.scope)?;
        for (i, (set, mass)) in self.focal().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{set}:{mass}")?;
        }
        write!(f, "; conflict {}]", self.conflict)
    }
}

/// A focal set of the right-hand operand with its members grouped by their
/// projection onto the shared variables.
type GroupedFocal<'a> = (&'a Vec<usize>, f64, HashMap<usize, Vec<usize>>);

/// Composes a member rank over `g` with a member rank over `h` into a rank
/// over `g ∪ h`, taking shared coordinates from the first operand.
struct UnionComposer {
    from_self: Vec<(usize, usize, usize)>,
    from_other: Vec<(usize, usize, usize)>,
}

impl UnionComposer {
    fn new(own: &Scope, other: &Scope, union: &Scope) -> UnionComposer {
        let union_strides = union.strides();
        let own_strides = own.strides();
        let other_strides = other.strides();
        let from_self = own
            .vars()
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let u = union.index_of(v.name()).expect("own var in union");
                (own_strides[i], v.frame_size(), union_strides[u])
            })
            .collect();
        let from_other = other
            .vars()
            .iter()
            .enumerate()
            .filter(|(_, v)| !own.contains(v.name()))
            .map(|(i, v)| {
                let u = union.index_of(v.name()).expect("other var in union");
                (other_strides[i], v.frame_size(), union_strides[u])
            })
            .collect();
        UnionComposer {
            from_self,
            from_other,
        }
    }

    #[inline]
    fn apply(&self, own: usize, other: usize) -> usize {
        let a: usize = self
            .from_self
            .iter()
            .map(|(src, size, dst)| ((own / src) % size) * dst)
            .sum();
        let b: usize = self
            .from_other
            .iter()
            .map(|(src, size, dst)| ((other / src) % size) * dst)
            .sum();
        a + b
    }
}

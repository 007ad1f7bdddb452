//! The four built-in calculi.

use super::{
    Calculus, Cell, MarginalReadout, MassValuation, PointKind, PointValuation, ReadoutRow,
    ValuationKind,
};
use crate::error::Result;

/// Probability: tables combine by product and marginalize by summation; the
/// default is the uniform distribution; normalization rescales to total 1.
pub fn probability() -> Calculus {
    Calculus::builder("probability", ValuationKind::Point(PointKind::Probability))
        .combine(|a, b| {
            Ok(a.as_point()?
                .combine_with(b.as_point()?, |x, y| x * y)?
                .into())
        })
        .marginalize(|v, target| {
            Ok(v.as_point()?
                .marginalize_with(target, |acc, x| acc + x)?
                .into())
        })
        .default_variable(|scope| Ok(PointValuation::uniform(scope.clone()).into()))
        .default_relation(|scope| Ok(PointValuation::uniform(scope.clone()).into()))
        .normalize(|v| Ok(v.as_point()?.normalized_by_total()?.into()))
        .readout(|v| {
            let p = v.as_point()?;
            let variable = p.scope().vars()[0].clone();
            let rows = variable
                .frame()
                .iter()
                .zip(p.table())
                .map(|(value, x)| ReadoutRow {
                    value: value.clone(),
                    cells: vec![Cell::Number(*x)],
                })
                .collect();
            Ok(MarginalReadout {
                variable,
                columns: vec!["p".to_string()],
                rows,
            })
        })
        .build()
        .expect("complete bundle")
}

/// Belief functions: bpas combine by the unnormalized Dempster rule and
/// marginalize by projecting focal sets; the default is the vacuous bpa;
/// normalization discards conflict. Readout shows `bel`/`pl` per frame value.
pub fn belief() -> Calculus {
    Calculus::builder("belief", ValuationKind::Mass)
        .combine(|a, b| Ok(a.as_mass()?.combine(b.as_mass()?)?.into()))
        .marginalize(|v, target| Ok(v.as_mass()?.marginalize(target)?.into()))
        .default_variable(|scope| Ok(MassValuation::vacuous(scope).into()))
        .default_relation(|scope| Ok(MassValuation::vacuous(scope).into()))
        .normalize(|v| Ok(v.as_mass()?.normalized()?.into()))
        .readout(|v| mass_readout(v.as_mass()?))
        .build()
        .expect("complete bundle")
}

/// Boolean: truth tables combine by conjunction and marginalize
/// existentially; the default holds every configuration admissible. No
/// normalization is defined, so `normalize` is the identity.
pub fn boolean() -> Calculus {
    Calculus::builder("boolean", ValuationKind::Point(PointKind::Boolean))
        .combine(|a, b| {
            Ok(a.as_point()?
                .combine_with(
                    b.as_point()?,
                    |x, y| {
                        if x == 1.0 && y == 1.0 {
                            1.0
                        } else {
                            0.0
                        }
                    },
                )?
                .into())
        })
        .marginalize(|v, target| Ok(v.as_point()?.marginalize_with(target, f64::max)?.into()))
        .default_variable(|scope| {
            Ok(PointValuation::constant(scope.clone(), PointKind::Boolean, 1.0)?.into())
        })
        .default_relation(|scope| {
            Ok(PointValuation::constant(scope.clone(), PointKind::Boolean, 1.0)?.into())
        })
        .normalize(|v| Ok(v.clone()))
        .readout(|v| {
            let p = v.as_point()?;
            let variable = p.scope().vars()[0].clone();
            let rows = variable
                .frame()
                .iter()
                .zip(p.table())
                .map(|(value, x)| ReadoutRow {
                    value: value.clone(),
                    cells: vec![Cell::Truth(*x == 1.0)],
                })
                .collect();
            Ok(MarginalReadout {
                variable,
                columns: vec!["truth".to_string()],
                rows,
            })
        })
        .build()
        .expect("complete bundle")
}

/// Possibility: distributions combine by minimum and marginalize by
/// supremum; the default holds every configuration fully possible;
/// normalization rescales the maximum to 1. Readout shows necessity and
/// possibility per frame value.
pub fn possibility() -> Calculus {
    Calculus::builder("possibility", ValuationKind::Point(PointKind::Possibility))
        .combine(|a, b| Ok(a.as_point()?.combine_with(b.as_point()?, f64::min)?.into()))
        .marginalize(|v, target| Ok(v.as_point()?.marginalize_with(target, f64::max)?.into()))
        .default_variable(|scope| {
            Ok(PointValuation::constant(scope.clone(), PointKind::Possibility, 1.0)?.into())
        })
        .default_relation(|scope| {
            Ok(PointValuation::constant(scope.clone(), PointKind::Possibility, 1.0)?.into())
        })
        .normalize(|v| Ok(v.as_point()?.normalized_by_max()?.into()))
        .readout(|v| {
            let p = v.as_point()?;
            let variable = p.scope().vars()[0].clone();
            let table = p.table();
            let rows = variable
                .frame()
                .iter()
                .enumerate()
                .map(|(i, value)| {
                    // N(x) = 1 - Π(not x), with Π(not x) the best competitor.
                    let competitor = table
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, v)| *v)
                        .fold(0.0, f64::max);
                    ReadoutRow {
                        value: value.clone(),
                        cells: vec![Cell::Number(1.0 - competitor), Cell::Number(table[i])],
                    }
                })
                .collect();
            Ok(MarginalReadout {
                variable,
                columns: vec!["N".to_string(), "Π".to_string()],
                rows,
            })
        })
        .build()
        .expect("complete bundle")
}

/// `bel`/`pl` rows of a single-variable bpa: `bel({x})` is the mass of the
/// singleton `{x}`, `pl({x})` sums the masses of focal sets containing `x`.
pub(super) fn mass_readout(m: &MassValuation) -> Result<MarginalReadout> {
    let variable = m.scope().vars()[0].clone();
    let n = variable.frame_size();
    let mut bel = vec![0.0; n];
    let mut pl = vec![0.0; n];
    for (set, mass) in m.focal() {
        let ranks = set.ranks();
        if ranks.len() == 1 {
            bel[ranks[0]] += mass;
        }
        for r in ranks {
            pl[*r] += mass;
        }
    }
    let rows = variable
        .frame()
        .iter()
        .enumerate()
        .map(|(i, value)| ReadoutRow {
            value: value.clone(),
            cells: vec![Cell::Number(bel[i]), Cell::Number(pl[i])],
        })
        .collect();
    Ok(MarginalReadout {
        variable,
        columns: vec!["bel".to_string(), "pl".to_string()],
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculi::Valuation;
    use crate::frames::{ConfigSet, Configuration, Scope, Variable};

    fn dress_scope() -> Scope {
        Scope::new([Variable::new("Dress", ["B", "W", "P"]).unwrap()]).unwrap()
    }

    #[test]
    fn probability_readout_is_verbatim() {
        let scope = dress_scope();
        let v: Valuation = PointValuation::new(scope, PointKind::Probability, vec![0.4, 0.2, 0.4])
            .unwrap()
            .into();
        let r = probability().readout(&v).unwrap();
        assert_eq!(r.columns, ["p"]);
        assert_eq!(r.number("B", "p"), Some(0.4));
        assert_eq!(r.number("W", "p"), Some(0.2));
    }

    #[test]
    fn belief_readout_bel_and_pl() {
        let scope = dress_scope();
        let p = ConfigSet::new(
            scope.clone(),
            [Configuration::from_values(&scope, &["P"]).unwrap()],
        )
        .unwrap();
        let bp = ConfigSet::new(
            scope.clone(),
            [
                Configuration::from_values(&scope, &["B"]).unwrap(),
                Configuration::from_values(&scope, &["P"]).unwrap(),
            ],
        )
        .unwrap();
        let v: Valuation = MassValuation::new(
            scope.clone(),
            [(p, 0.9), (bp, 0.08), (ConfigSet::full(&scope), 0.02)],
            0.0,
        )
        .unwrap()
        .into();
        let r = belief().readout(&v).unwrap();
        assert!((r.number("P", "bel").unwrap() - 0.9).abs() < 1e-12);
        assert!((r.number("P", "pl").unwrap() - 1.0).abs() < 1e-12);
        assert!((r.number("W", "pl").unwrap() - 0.02).abs() < 1e-12);
        assert!((r.number("B", "pl").unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(r.number("B", "bel"), Some(0.0));
    }

    #[test]
    fn possibility_readout_necessity() {
        let scope = dress_scope();
        let v: Valuation = PointValuation::new(scope, PointKind::Possibility, vec![1.0, 0.2, 1.0])
            .unwrap()
            .into();
        let r = possibility().readout(&v).unwrap();
        assert_eq!(r.number("W", "Π"), Some(0.2));
        assert_eq!(r.number("W", "N"), Some(0.0));
        assert_eq!(r.number("B", "N"), Some(0.0)); // competitor P still at 1
    }

    #[test]
    fn boolean_combination_is_conjunction() {
        let scope = dress_scope();
        let calc = boolean();
        let f: Valuation =
            PointValuation::new(scope.clone(), PointKind::Boolean, vec![0.0, 0.0, 1.0])
                .unwrap()
                .into();
        let t: Valuation = PointValuation::new(scope, PointKind::Boolean, vec![1.0, 0.0, 1.0])
            .unwrap()
            .into();
        let c = calc.combine(&f, &t).unwrap();
        assert_eq!(c.as_point().unwrap().table(), [0.0, 0.0, 1.0]);
        // normalization is the identity
        assert_eq!(calc.normalize(&c).unwrap(), c);
    }

    #[test]
    fn defaults_per_calculus() {
        let scope = Scope::new([
            Variable::new("Philco", ["ok", "out"]).unwrap(),
            Variable::new("Dress", ["B", "W", "P"]).unwrap(),
        ])
        .unwrap();
        let p = probability()
            .default_valuation(&scope, super::super::Role::Relation)
            .unwrap();
        for v in p.as_point().unwrap().table() {
            assert!((v - 1.0 / 6.0).abs() < 1e-12);
        }
        let m = belief()
            .default_valuation(&scope, super::super::Role::Variable)
            .unwrap();
        let m = m.as_mass().unwrap();
        assert_eq!(m.focal_count(), 1);
        assert!((m.mass_of(&ConfigSet::full(&scope)) - 1.0).abs() < 1e-12);
        let pi = possibility()
            .default_valuation(&scope, super::super::Role::Relation)
            .unwrap();
        assert!(pi.as_point().unwrap().table().iter().all(|v| *v == 1.0));
        let t = boolean()
            .default_valuation(&scope, super::super::Role::Relation)
            .unwrap();
        assert!(t.as_point().unwrap().table().iter().all(|v| *v == 1.0));
    }
}

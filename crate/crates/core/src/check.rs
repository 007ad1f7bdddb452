//! Randomized checking support: generators for scopes, valuations and whole
//! systems, the local-computation axiom suite, and result comparators.
//!
//! The axiom suite runs against any calculus bundle, built-in or
//! user-registered. Everything here is seeded and deterministic.

use std::fmt;
use std::sync::Arc;

use rand::prelude::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::calculi::{
    Calculus, MassValuation, PointKind, PointValuation, Valuation, ValuationKind,
};
use crate::error::Result;
use crate::frames::{ConfigSet, Scope, Variable};
use crate::network::ValuationSystem;
use crate::propagation::PropagationResult;

/// A failed axiom instance, with enough detail to reproduce it.
#[derive(Debug, Clone)]
pub struct AxiomFailure {
    pub axiom: &'static str,
    pub calculus: String,
    pub detail: String,
}

impl fmt::Display for AxiomFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "axiom {} failed for calculus `{}`: {}",
            self.axiom, self.calculus, self.detail
        )
    }
}

/// A shared pool of small variables (frames of 1–`max_frame` values) for
/// random scopes.
pub fn variable_pool(rng: &mut impl Rng, count: usize, max_frame: usize) -> Vec<Arc<Variable>> {
    (0..count)
        .map(|i| {
            let name = format!("{}", (b'A' + i as u8) as char);
            let size = rng.gen_range(1..=max_frame.max(1));
            let frame: Vec<String> = (0..size).map(|j| format!("v{j}")).collect();
            Variable::new(name, frame).expect("generated frames are valid")
        })
        .collect()
}

/// Non-empty scope over up to `max_vars` distinct pool variables.
pub fn random_scope(rng: &mut impl Rng, pool: &[Arc<Variable>], max_vars: usize) -> Scope {
    let k = rng.gen_range(1..=max_vars.min(pool.len()).max(1));
    let mut picks: Vec<Arc<Variable>> = pool.to_vec();
    picks.shuffle(rng);
    Scope::new(picks.into_iter().take(k)).expect("pool vars are distinct")
}

/// A random valuation of the calculus's kind on the given scope. Point
/// entries stay strictly positive so that randomized systems do not
/// accidentally degenerate; mass valuations occasionally carry conflict.
pub fn random_valuation(calculus: &Calculus, scope: &Scope, rng: &mut impl Rng) -> Valuation {
    match calculus.kind() {
        ValuationKind::Point(kind) => {
            let count = scope.config_count();
            let table: Vec<f64> = match kind {
                PointKind::Probability => (0..count).map(|_| rng.gen_range(0.05..1.0)).collect(),
                PointKind::Possibility => (0..count)
                    .map(|_| {
                        if rng.gen_bool(0.2) {
                            1.0
                        } else {
                            rng.gen_range(0.05..1.0)
                        }
                    })
                    .collect(),
                PointKind::Boolean => (0..count)
                    .map(|_| if rng.gen_bool(0.7) { 1.0 } else { 0.0 })
                    .collect(),
            };
            PointValuation::new(scope.clone(), kind, table)
                .expect("generated entries in range")
                .into()
        }
        ValuationKind::Mass => {
            let count = scope.config_count();
            let sets = rng.gen_range(1..=4usize);
            let mut focal = Vec::new();
            for _ in 0..sets {
                let mut ranks: Vec<usize> = (0..count).filter(|_| rng.gen_bool(0.5)).collect();
                if ranks.is_empty() {
                    ranks.push(rng.gen_range(0..count));
                }
                let set = ConfigSet::from_ranks(scope.clone(), ranks).expect("ranks in range");
                focal.push((set, rng.gen_range(0.1..1.0)));
            }
            let conflict = if rng.gen_bool(0.2) {
                rng.gen_range(0.05..0.5)
            } else {
                0.0
            };
            MassValuation::new(scope.clone(), focal, conflict)
                .expect("generated bpa is valid")
                .into()
        }
    }
}

/// Per-entry comparison; `tolerance` 0 demands exact equality.
pub fn valuations_close(a: &Valuation, b: &Valuation, tolerance: f64) -> bool {
    match (a, b) {
        (Valuation::Point(x), Valuation::Point(y)) => {
            x.scope() == y.scope()
                && x.table()
                    .iter()
                    .zip(y.table())
                    .all(|(p, q)| (p - q).abs() <= tolerance)
        }
        (Valuation::Mass(x), Valuation::Mass(y)) => {
            if x.scope() != y.scope() || (x.conflict() - y.conflict()).abs() > tolerance {
                return false;
            }
            let keys: std::collections::BTreeSet<Vec<usize>> = x
                .focal()
                .map(|(s, _)| s.ranks().to_vec())
                .chain(y.focal().map(|(s, _)| s.ranks().to_vec()))
                .collect();
            keys.iter().all(|k| {
                let set = ConfigSet::from_ranks(x.scope().clone(), k.clone()).expect("valid ranks");
                (x.mass_of(&set) - y.mass_of(&set)).abs() <= tolerance
            })
        }
        _ => false,
    }
}

fn check_close(
    axiom: &'static str,
    calculus: &Calculus,
    left: &Valuation,
    right: &Valuation,
    tolerance: f64,
    context: &str,
) -> std::result::Result<(), AxiomFailure> {
    if valuations_close(left, right, tolerance) {
        Ok(())
    } else {
        Err(AxiomFailure {
            axiom,
            calculus: calculus.name().to_string(),
            detail: format!("{context}: {left:?} != {right:?}"),
        })
    }
}

/// A1: commutativity and associativity of combination.
pub fn check_a1(
    calculus: &Calculus,
    rng: &mut impl Rng,
    instances: usize,
    tolerance: f64,
) -> std::result::Result<(), AxiomFailure> {
    for i in 0..instances {
        let pool = variable_pool(rng, 3, 3);
        let g = random_valuation(calculus, &random_scope(rng, &pool, 3), rng);
        let h = random_valuation(calculus, &random_scope(rng, &pool, 3), rng);
        let k = random_valuation(calculus, &random_scope(rng, &pool, 3), rng);
        let op = |a: &Valuation, b: &Valuation| calculus.combine(a, b).expect("same kind");
        check_close(
            "A1 (commutativity)",
            calculus,
            &op(&g, &h),
            &op(&h, &g),
            tolerance,
            &format!("instance {i}"),
        )?;
        check_close(
            "A1 (associativity)",
            calculus,
            &op(&g, &op(&h, &k)),
            &op(&op(&g, &h), &k),
            tolerance,
            &format!("instance {i}"),
        )?;
    }
    Ok(())
}

/// A2: consonance of marginalization, `(G↓h)↓k = G↓k` for `k ⊆ h ⊆ g`.
pub fn check_a2(
    calculus: &Calculus,
    rng: &mut impl Rng,
    instances: usize,
    tolerance: f64,
) -> std::result::Result<(), AxiomFailure> {
    for i in 0..instances {
        let pool = variable_pool(rng, 3, 3);
        let g_scope = random_scope(rng, &pool, 3);
        let h_scope = sub_scope(rng, &g_scope);
        let k_scope = sub_scope(rng, &h_scope);
        let g = random_valuation(calculus, &g_scope, rng);
        let via_h = calculus
            .marginalize(
                &calculus.marginalize(&g, &h_scope).expect("h within g"),
                &k_scope,
            )
            .expect("k within h");
        let direct = calculus.marginalize(&g, &k_scope).expect("k within g");
        check_close(
            "A2 (consonance)",
            calculus,
            &via_h,
            &direct,
            tolerance,
            &format!("instance {i}: {g_scope} -> {h_scope} -> {k_scope}"),
        )?;
    }
    Ok(())
}

/// A3: distributivity of marginalization over combination,
/// `(G⊗H)↓g = G ⊗ (H↓g∩h)`.
pub fn check_a3(
    calculus: &Calculus,
    rng: &mut impl Rng,
    instances: usize,
    tolerance: f64,
) -> std::result::Result<(), AxiomFailure> {
    for i in 0..instances {
        let pool = variable_pool(rng, 3, 3);
        let g_scope = random_scope(rng, &pool, 3);
        let h_scope = random_scope(rng, &pool, 3);
        let g = random_valuation(calculus, &g_scope, rng);
        let h = random_valuation(calculus, &h_scope, rng);
        let left = calculus
            .marginalize(&calculus.combine(&g, &h).expect("same kind"), &g_scope)
            .expect("g within union");
        let sep = g_scope.intersection(&h_scope);
        let right = calculus
            .combine(&g, &calculus.marginalize(&h, &sep).expect("sep within h"))
            .expect("same kind");
        check_close(
            "A3 (distributivity)",
            calculus,
            &left,
            &right,
            tolerance,
            &format!("instance {i}: g={g_scope} h={h_scope}"),
        )?;
    }
    Ok(())
}

/// Runs A1–A3, `instances` randomized cases each.
pub fn check_axioms(
    calculus: &Calculus,
    seed: u64,
    instances: usize,
    tolerance: f64,
) -> std::result::Result<(), AxiomFailure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    check_a1(calculus, &mut rng, instances, tolerance)?;
    check_a2(calculus, &mut rng, instances, tolerance)?;
    check_a3(calculus, &mut rng, instances, tolerance)?;
    Ok(())
}

/// Tolerance under which a built-in calculus is expected to satisfy the
/// axioms: exact for Boolean and possibility (min/max arithmetic), 1e-9
/// otherwise.
pub fn expected_tolerance(calculus: &Calculus) -> f64 {
    match calculus.kind() {
        ValuationKind::Point(PointKind::Boolean) | ValuationKind::Point(PointKind::Possibility) => {
            0.0
        }
        _ => 1e-9,
    }
}

fn sub_scope(rng: &mut impl Rng, scope: &Scope) -> Scope {
    let vars: Vec<Arc<Variable>> = scope
        .vars()
        .iter()
        .filter(|_| rng.gen_bool(0.6))
        .cloned()
        .collect();
    Scope::new(vars).expect("subset of a valid scope")
}

/// Random hypergraph over up to `max_vars` binary variables, for tree-build
/// checks.
pub fn random_hypergraph(rng: &mut impl Rng, max_vars: usize) -> crate::network::Hypergraph {
    let n_vars = rng.gen_range(1..=max_vars);
    let vars: Vec<Arc<Variable>> = (0..n_vars)
        .map(|i| Variable::new(format!("{}", (b'A' + i as u8) as char), ["0", "1"]).expect("valid"))
        .collect();
    let n_edges = rng.gen_range(1..=max_vars);
    let scopes: Vec<Scope> = (0..n_edges)
        .map(|_| {
            let k = rng.gen_range(1..=4usize.min(n_vars));
            let mut picks = vars.clone();
            picks.shuffle(rng);
            Scope::new(picks.into_iter().take(k)).expect("distinct vars")
        })
        .collect();
    crate::network::Hypergraph::from_scopes(vars, scopes)
}

/// Shape of randomized test systems.
#[derive(Debug, Clone)]
pub struct SystemShape {
    pub max_vars: usize,
    pub max_frame: usize,
    pub max_relations: usize,
    pub max_relation_vars: usize,
    pub attach_prob: f64,
    pub var_attach_prob: f64,
    pub observe_prob: f64,
}

impl Default for SystemShape {
    fn default() -> SystemShape {
        SystemShape {
            max_vars: 5,
            max_frame: 3,
            max_relations: 4,
            max_relation_vars: 3,
            attach_prob: 0.75,
            var_attach_prob: 0.2,
            observe_prob: 0.25,
        }
    }
}

/// Random structural model: variables, relations and observations (no
/// valuations; those are per calculus).
pub fn random_system(rng: &mut impl Rng, shape: &SystemShape) -> ValuationSystem {
    let mut sys = ValuationSystem::new();
    let n_vars = rng.gen_range(1..=shape.max_vars);
    let mut names = Vec::new();
    for i in 0..n_vars {
        let name = format!("{}", (b'A' + i as u8) as char);
        let size = rng.gen_range(1..=shape.max_frame);
        let frame: Vec<String> = (0..size).map(|j| format!("v{j}")).collect();
        sys.add_variable(&name, frame).expect("fresh names");
        names.push(name);
    }
    let n_rels = rng.gen_range(0..=shape.max_relations);
    for r in 0..n_rels {
        let k = rng.gen_range(1..=shape.max_relation_vars.min(n_vars));
        let mut picks = names.clone();
        picks.shuffle(rng);
        sys.add_relation(format!("rel{r}"), picks.iter().take(k).map(|s| s.as_str()))
            .expect("fresh names and known variables");
    }
    for name in &names {
        if rng.gen_bool(shape.observe_prob) {
            let var = sys.variable(name).expect("added above").clone();
            let value = var.frame()[rng.gen_range(0..var.frame_size())].clone();
            sys.observe(name, &value).expect("value from frame");
        }
    }
    sys
}

/// Attaches random valuations to relations (and occasionally variables)
/// under one calculus. Structure and other calculi are untouched.
pub fn randomize_attachments(
    system: &mut ValuationSystem,
    calculus: &Calculus,
    rng: &mut impl Rng,
    shape: &SystemShape,
) -> Result<()> {
    let relations: Vec<(String, Scope)> = system
        .relations()
        .map(|r| (r.name().to_string(), r.scope().clone()))
        .collect();
    for (name, scope) in relations {
        if rng.gen_bool(shape.attach_prob) {
            let v = random_valuation(calculus, &scope, rng);
            system.attach(&name, calculus, v)?;
        }
    }
    let variables: Vec<Arc<Variable>> = system.variables().cloned().collect();
    for var in variables {
        if rng.gen_bool(shape.var_attach_prob) {
            let scope = Scope::singleton(var.clone());
            let v = random_valuation(calculus, &scope, rng);
            system.attach(var.name(), calculus, v)?;
        }
    }
    Ok(())
}

/// Compares two propagation results variable by variable on normalized
/// marginals; degenerate marginals must be degenerate on both sides.
pub fn results_match(
    a: &PropagationResult,
    b: &PropagationResult,
    calculus: &Calculus,
    tolerance: f64,
) -> std::result::Result<(), String> {
    let vars_a: Vec<&str> = a.variables().collect();
    let vars_b: Vec<&str> = b.variables().collect();
    if vars_a != vars_b {
        return Err(format!("variable sets differ: {vars_a:?} vs {vars_b:?}"));
    }
    for var in vars_a {
        match (
            a.normalized_marginal(var, calculus),
            b.normalized_marginal(var, calculus),
        ) {
            (Ok(x), Ok(y)) => {
                if !valuations_close(&x, &y, tolerance) {
                    return Err(format!("marginal of `{var}` differs: {x:?} vs {y:?}"));
                }
            }
            (Err(_), Err(_)) => {} // degenerate on both sides
            (x, y) => {
                return Err(format!(
                    "degeneracy mismatch for `{var}`: {:?} vs {:?}",
                    x.err(),
                    y.err()
                ))
            }
        }
    }
    Ok(())
}

/// Exact equality of raw marginals, for schedule-independence checks.
pub fn raw_results_identical(a: &PropagationResult, b: &PropagationResult) -> bool {
    let vars_a: Vec<&str> = a.variables().collect();
    let vars_b: Vec<&str> = b.variables().collect();
    vars_a == vars_b
        && vars_a.iter().all(|v| {
            valuations_close(
                a.raw_marginal(v).expect("listed"),
                b.raw_marginal(v).expect("listed"),
                0.0,
            )
        })
}

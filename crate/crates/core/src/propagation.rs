//! Message passing on the Markov tree, marginal extraction, and the
//! brute-force global oracle.
//!
//! Propagation computes both messages of every tree edge: a message from
//! cluster `i` to `j` combines `i`'s potential with every incoming message
//! except `j`'s and marginalizes onto the separator. The schedule only fixes
//! *when* messages are computed, never what they combine, so any valid
//! schedule (and any root) yields identical marginals. Messages and
//! potentials stay unnormalized throughout; normalization happens once at
//! readout.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::calculi::{Calculus, MarginalReadout, Role, Valuation};
use crate::error::{Error, Result};
use crate::frames::{Configuration, Scope};
use crate::network::{EdgeSource, Hyperedge, ValuationSystem};
use crate::tree::MarkovTree;

/// A cluster's combined local knowledge: every hyperedge assigned to the
/// cluster, padded with the calculus default when the cluster is not fully
/// covered.
#[derive(Debug, Clone)]
pub struct NodePotential {
    pub cluster: Scope,
    pub valuation: Valuation,
}

/// Degenerate-marginal conditions, reported as data rather than faults.
#[derive(Debug, Clone, PartialEq)]
pub enum Degeneracy {
    /// Probability or possibility marginal identically zero.
    AllZero,
    /// Boolean marginal with no admissible value.
    AllFalse,
    /// Mass marginal with no focal sets; all mass is conflict.
    TotalConflict { conflict: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub variable: String,
    pub degeneracy: Degeneracy,
}

/// Per-variable marginals of one propagation run. Marginals are stored raw;
/// the `normalized` flag drives readout.
#[derive(Debug, Clone)]
pub struct PropagationResult {
    marginals: BTreeMap<String, Valuation>,
    normalized: bool,
    diagnostics: Vec<Diagnostic>,
}

impl PropagationResult {
    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.marginals.keys().map(|s| s.as_str())
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }

    /// The unnormalized marginal valuation of a variable.
    pub fn raw_marginal(&self, variable: &str) -> Result<&Valuation> {
        self.marginals
            .get(variable)
            .ok_or_else(|| Error::UnknownVariable(variable.to_string()))
    }

    /// Post-propagation marginal with normalization applied, regardless of
    /// the run's readout flag.
    pub fn normalized_marginal(&self, variable: &str, calculus: &Calculus) -> Result<Valuation> {
        let v = calculus.post_propagate(self.raw_marginal(variable)?)?;
        calculus.normalize(&v)
    }

    /// Applies the calculus's post-propagation hook and readout, honoring the
    /// normalized flag.
    pub fn marginal(&self, variable: &str, calculus: &Calculus) -> Result<MarginalReadout> {
        let v = calculus.post_propagate(self.raw_marginal(variable)?)?;
        let v = if self.normalized {
            calculus.normalize(&v)?
        } else {
            v
        };
        calculus.readout(&v)
    }
}

/// How a propagation run is driven.
#[derive(Debug, Clone, Default)]
pub struct PropagateOptions {
    /// Normalize marginals at readout. Defaults to true.
    pub unnormalized: bool,
    /// Message schedule; the deterministic two-phase schedule when unset.
    pub schedule: Option<Schedule>,
}

/// A message-computation preference order. Any schedule yields identical
/// results; this only exists to pin determinism and to let tests drive
/// propagation from arbitrary roots and shuffled orders.
#[derive(Debug, Clone)]
pub struct Schedule {
    preference: Vec<usize>, // directed message ids: 2*edge + direction
}

impl Schedule {
    /// Two-phase schedule: collect toward each component's lexicographically
    /// least cluster, then distribute back.
    pub fn default_for(tree: &MarkovTree) -> Schedule {
        Schedule::two_phase(tree, None)
    }

    /// Two-phase schedule rooted at the given cluster (its component only;
    /// other components use their default root).
    pub fn rooted_at(tree: &MarkovTree, root: usize) -> Schedule {
        Schedule::two_phase(tree, Some(root))
    }

    /// Random valid order, deterministic per seed.
    pub fn shuffled(tree: &MarkovTree, seed: u64) -> Schedule {
        let mut preference: Vec<usize> = (0..2 * tree.edges().len()).collect();
        preference.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Schedule { preference }
    }

    fn two_phase(tree: &MarkovTree, preferred_root: Option<usize>) -> Schedule {
        let n = tree.clusters().len();
        let mut component = vec![usize::MAX; n];
        let mut upward = Vec::new();
        let mut downward = Vec::new();
        for start in 0..n {
            if component[start] != usize::MAX {
                continue;
            }
            // the component root: the preferred root if it lives here, else
            // the least cluster index (this scan starts from it)
            let mut members = Vec::new();
            let mut stack = vec![start];
            component[start] = start;
            while let Some(c) = stack.pop() {
                members.push(c);
                for (nb, _) in tree.neighbors(c) {
                    if component[*nb] == usize::MAX {
                        component[*nb] = start;
                        stack.push(*nb);
                    }
                }
            }
            let root = match preferred_root {
                Some(r) if members.contains(&r) => r,
                _ => start,
            };
            // orient edges toward the root
            let mut parent = vec![usize::MAX; n];
            let mut order = vec![root];
            let mut i = 0;
            while i < order.len() {
                let c = order[i];
                i += 1;
                for (nb, _) in tree.neighbors(c) {
                    if *nb != parent[c]
                        && component[*nb] == start
                        && parent[*nb] == usize::MAX
                        && *nb != root
                    {
                        parent[*nb] = c;
                        order.push(*nb);
                    }
                }
            }
            // collect: child -> parent, deepest first; distribute: reverse
            for c in order.iter().rev() {
                if parent[*c] != usize::MAX {
                    upward.push(message_id(tree, *c, parent[*c]));
                }
            }
            for c in order.iter() {
                if parent[*c] != usize::MAX {
                    downward.push(message_id(tree, parent[*c], *c));
                }
            }
        }
        upward.extend(downward);
        Schedule { preference: upward }
    }
}

fn message_id(tree: &MarkovTree, from: usize, to: usize) -> usize {
    let (_, edge) = tree
        .neighbors(from)
        .iter()
        .find(|(nb, _)| *nb == to)
        .copied()
        .expect("adjacent clusters");
    2 * edge + usize::from(tree.edges()[edge].a != from)
}

fn message_endpoints(tree: &MarkovTree, id: usize) -> (usize, usize) {
    let e = &tree.edges()[id / 2];
    if id.is_multiple_of(2) {
        (e.a, e.b)
    } else {
        (e.b, e.a)
    }
}

/// Combines each hyperedge's valuation (attached, observed, or default) into
/// one containing cluster; uncovered clusters (or uncovered parts of a
/// cluster's scope) take the calculus default.
pub fn assign_potentials(
    tree: &MarkovTree,
    system: &ValuationSystem,
    calculus: &Calculus,
) -> Result<Vec<NodePotential>> {
    let hypergraph = system.hypergraph(calculus);
    let mut slots: Vec<Option<Valuation>> = vec![None; tree.clusters().len()];
    for (edge, valuation) in edge_valuations(system, calculus)? {
        let c = tree
            .containing_cluster(edge.scope())
            .ok_or_else(|| Error::NoContainingCluster(edge.label()))?;
        slots[c] = Some(match slots[c].take() {
            Some(acc) => calculus.combine(&acc, &valuation)?,
            None => valuation,
        });
    }
    debug_assert_eq!(hypergraph.edges().len(), tree.assignment().len());

    tree.clusters()
        .iter()
        .zip(slots)
        .map(|(cluster, slot)| {
            let role = if cluster.len() == 1 {
                Role::Variable
            } else {
                Role::Relation
            };
            let valuation = match slot {
                Some(v) if v.scope() == cluster => v,
                Some(v) => calculus.combine(&v, &calculus.default_valuation(cluster, role)?)?,
                None => calculus.default_valuation(cluster, role)?,
            };
            Ok(NodePotential {
                cluster: cluster.clone(),
                valuation,
            })
        })
        .collect()
}

/// The valuation carried by each hyperedge: attachments and observations
/// combined, or the default relation valuation for bare relations.
pub fn edge_valuations(
    system: &ValuationSystem,
    calculus: &Calculus,
) -> Result<Vec<(Hyperedge, Valuation)>> {
    let hypergraph = system.hypergraph(calculus);
    let mut out = Vec::with_capacity(hypergraph.edges().len());
    for edge in hypergraph.edges() {
        let mut acc: Option<Valuation> = None;
        for source in edge.sources() {
            let v = match source {
                EdgeSource::Relation(name) => match system.attachment(name, calculus.name()) {
                    Some(v) => v.clone(),
                    None => calculus.default_valuation(edge.scope(), Role::Relation)?,
                },
                EdgeSource::Variable(name) => system
                    .attachment(name, calculus.name())
                    .expect("variable hyperedges exist only for attachments")
                    .clone(),
                EdgeSource::Observation(name) => {
                    let var = system.variable(name)?;
                    let value = system.observation(name).expect("observation recorded");
                    let config =
                        Configuration::from_values(&Scope::singleton(var.clone()), &[value])?;
                    calculus.certainty(&config)
                }
            };
            acc = Some(match acc {
                Some(acc) => calculus.combine(&acc, &v)?,
                None => v,
            });
        }
        out.push((
            edge.clone(),
            acc.expect("hyperedges carry at least one source"),
        ));
    }
    Ok(out)
}

/// Two-phase Shenoy–Shafer propagation: computes both messages of every tree
/// edge, then reads one marginal per variable from its lowest-index home
/// cluster.
pub fn propagate(
    tree: &MarkovTree,
    potentials: &[NodePotential],
    calculus: &Calculus,
    options: &PropagateOptions,
) -> Result<PropagationResult> {
    if potentials.len() != tree.clusters().len() {
        return Err(Error::InvalidValuation(format!(
            "{} potentials for {} clusters",
            potentials.len(),
            tree.clusters().len()
        )));
    }
    let beliefs = cluster_beliefs(tree, potentials, calculus, options)?;

    let mut vars: BTreeMap<String, usize> = BTreeMap::new();
    for (i, cluster) in tree.clusters().iter().enumerate() {
        for v in cluster.vars() {
            vars.entry(v.name().to_string()).or_insert(i);
        }
    }

    let mut marginals = BTreeMap::new();
    for (name, home) in vars {
        let var = tree.clusters()[home]
            .var(&name)
            .expect("home cluster contains the variable")
            .clone();
        let marginal = calculus.marginalize(&beliefs[home], &Scope::singleton(var))?;
        marginals.insert(name, marginal);
    }

    let diagnostics = diagnose(&marginals);
    Ok(PropagationResult {
        marginals,
        normalized: !options.unnormalized,
        diagnostics,
    })
}

/// Every cluster's local belief: its potential combined with all incoming
/// messages. Marginalizing a belief to any variable of its cluster gives
/// that variable's (unnormalized) marginal.
pub fn cluster_beliefs(
    tree: &MarkovTree,
    potentials: &[NodePotential],
    calculus: &Calculus,
    options: &PropagateOptions,
) -> Result<Vec<Valuation>> {
    let schedule = match &options.schedule {
        Some(s) => s.clone(),
        None => Schedule::default_for(tree),
    };
    let messages = run_schedule(tree, potentials, calculus, &schedule)?;
    (0..tree.clusters().len())
        .map(|c| {
            let mut acc = potentials[c].valuation.clone();
            for (nb, edge) in tree.neighbors(c) {
                let id = 2 * edge + usize::from(tree.edges()[*edge].a != *nb);
                let msg = messages[id].as_ref().expect("all messages computed");
                acc = calculus.combine(&acc, msg)?;
            }
            Ok(acc)
        })
        .collect()
}

fn run_schedule(
    tree: &MarkovTree,
    potentials: &[NodePotential],
    calculus: &Calculus,
    schedule: &Schedule,
) -> Result<Vec<Option<Valuation>>> {
    let total = 2 * tree.edges().len();
    let mut preference = schedule.preference.clone();
    preference.retain(|id| *id < total);
    let mut seen = vec![false; total];
    for id in &preference {
        seen[*id] = true;
    }
    // tolerate partial preference lists: remaining ids appended in order
    preference.extend((0..total).filter(|id| !seen[*id]));

    let mut messages: Vec<Option<Valuation>> = vec![None; total];
    let mut done = 0;
    while done < total {
        let mut progressed = false;
        for &id in &preference {
            if messages[id].is_some() {
                continue;
            }
            if !message_ready(tree, &messages, id) {
                continue;
            }
            let (from, to) = message_endpoints(tree, id);
            let mut acc = potentials[from].valuation.clone();
            for (nb, edge) in tree.neighbors(from) {
                if *nb == to {
                    continue;
                }
                let incoming = 2 * edge + usize::from(tree.edges()[*edge].a != *nb);
                let msg = messages[incoming].as_ref().expect("checked ready");
                acc = calculus.combine(&acc, msg)?;
            }
            let separator = &tree.edges()[id / 2].separator;
            messages[id] = Some(calculus.marginalize(&acc, separator)?);
            done += 1;
            progressed = true;
            break;
        }
        if !progressed {
            return Err(Error::InvalidValuation(
                "message schedule cannot progress; tree is not a forest".to_string(),
            ));
        }
    }
    Ok(messages)
}

fn message_ready(tree: &MarkovTree, messages: &[Option<Valuation>], id: usize) -> bool {
    let (from, to) = message_endpoints(tree, id);
    tree.neighbors(from).iter().all(|(nb, edge)| {
        if *nb == to {
            return true;
        }
        let incoming = 2 * edge + usize::from(tree.edges()[*edge].a != *nb);
        messages[incoming].is_some()
    })
}

fn diagnose(marginals: &BTreeMap<String, Valuation>) -> Vec<Diagnostic> {
    use crate::calculi::PointKind;
    let mut out = Vec::new();
    for (name, v) in marginals {
        let degeneracy = match v {
            Valuation::Point(p) => match p.kind() {
                PointKind::Boolean => (p.max() == 0.0).then_some(Degeneracy::AllFalse),
                _ => (p.max() == 0.0).then_some(Degeneracy::AllZero),
            },
            Valuation::Mass(m) => (m.focal_count() == 0).then(|| Degeneracy::TotalConflict {
                conflict: m.conflict(),
            }),
        };
        if let Some(degeneracy) = degeneracy {
            out.push(Diagnostic {
                variable: name.clone(),
                degeneracy,
            });
        }
    }
    out
}

/// Compiles and propagates a system in one call: hypergraph, Markov tree,
/// potentials, messages.
pub fn propagate_system(
    system: &ValuationSystem,
    calculus: &Calculus,
    options: &PropagateOptions,
) -> Result<PropagationResult> {
    let hypergraph = system.hypergraph(calculus);
    if hypergraph.is_empty() {
        return Ok(PropagationResult {
            marginals: BTreeMap::new(),
            normalized: !options.unnormalized,
            diagnostics: Vec::new(),
        });
    }
    let tree = MarkovTree::build(&hypergraph);
    let potentials = assign_potentials(&tree, system, calculus)?;
    propagate(&tree, &potentials, calculus, options)
}

/// Cost guards for the direct global evaluation.
#[derive(Debug, Clone)]
pub struct OracleBounds {
    /// Maximum size of the joint configuration space.
    pub max_configs: usize,
    /// Maximum focal-set count of any intermediate mass valuation.
    pub max_focal_sets: usize,
}

impl Default for OracleBounds {
    fn default() -> OracleBounds {
        OracleBounds {
            max_configs: 1_000_000,
            max_focal_sets: 10_000,
        }
    }
}

/// The direct method: combines the hyperedge valuations of each connected
/// component into one global valuation and marginalizes it to the
/// component's variables. Exponential in the component size; usable at desk
/// scale and as the correctness oracle for `propagate`. Components are
/// evaluated independently, mirroring tree propagation, so a contradictory
/// component cannot poison unrelated variables.
pub fn global_evaluate(
    system: &ValuationSystem,
    calculus: &Calculus,
    unnormalized: bool,
    bounds: &OracleBounds,
) -> Result<PropagationResult> {
    let edge_vals = edge_valuations(system, calculus)?;

    // connected components over shared variables
    let mut component_of: BTreeMap<String, usize> = BTreeMap::new();
    let mut components: Vec<Vec<usize>> = Vec::new(); // edge indices
    for (i, (edge, _)) in edge_vals.iter().enumerate() {
        let mut target: Option<usize> = None;
        for v in edge.scope().vars() {
            if let Some(c) = component_of.get(v.name()) {
                target = Some(match target {
                    Some(t) if t != *c => {
                        // merge component c into t
                        let moved = std::mem::take(&mut components[*c]);
                        for e in &moved {
                            for var in edge_vals[*e].0.scope().vars() {
                                component_of.insert(var.name().to_string(), t);
                            }
                        }
                        components[t].extend(moved);
                        t
                    }
                    Some(t) => t,
                    None => *c,
                });
            }
        }
        let t = target.unwrap_or_else(|| {
            components.push(Vec::new());
            components.len() - 1
        });
        components[t].push(i);
        for v in edge.scope().vars() {
            component_of.insert(v.name().to_string(), t);
        }
    }

    let mut marginals = BTreeMap::new();
    for member_edges in components.iter().filter(|c| !c.is_empty()) {
        let mut joint = edge_vals[member_edges[0]].0.scope().clone();
        for e in &member_edges[1..] {
            joint = joint.union(edge_vals[*e].0.scope())?;
        }
        let count = joint.checked_config_count().unwrap_or(usize::MAX);
        if count > bounds.max_configs {
            return Err(Error::OracleBoundExceeded(format!(
                "joint space {joint} has {count} configurations (limit {})",
                bounds.max_configs
            )));
        }

        let mut global: Option<Valuation> = None;
        for e in member_edges {
            let v = &edge_vals[*e].1;
            global = Some(match global {
                Some(acc) => calculus.combine(&acc, v)?,
                None => v.clone(),
            });
            if let Some(Valuation::Mass(m)) = &global {
                if m.focal_count() > bounds.max_focal_sets {
                    return Err(Error::OracleBoundExceeded(format!(
                        "intermediate bpa holds {} focal sets (limit {})",
                        m.focal_count(),
                        bounds.max_focal_sets
                    )));
                }
            }
        }
        let global = global.expect("non-empty component");
        for var in global.scope().vars() {
            let marginal = calculus.marginalize(&global, &Scope::singleton(var.clone()))?;
            marginals.insert(var.name().to_string(), marginal);
        }
    }

    // isolated variables: nothing to combine, the default is the marginal
    for var in system.variables() {
        if !marginals.contains_key(var.name()) {
            let singleton = Scope::singleton(var.clone());
            marginals.insert(
                var.name().to_string(),
                calculus.default_valuation(&singleton, Role::Variable)?,
            );
        }
    }

    let diagnostics = diagnose(&marginals);
    Ok(PropagationResult {
        marginals,
        normalized: !unnormalized,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculi::{
        belief, boolean, possibility, probability, MassValuation, PointKind, PointValuation,
    };
    use crate::frames::ConfigSet;

    fn wardrobe() -> ValuationSystem {
        let mut sys = ValuationSystem::new();
        sys.add_variable("Dress", ["B", "W", "P"]).unwrap();
        sys.add_variable("Philco", ["ok", "out"]).unwrap();
        sys.add_variable("Speech", ["uttered", "unuttered"])
            .unwrap();
        sys.add_relation("washing", ["Philco", "Dress"]).unwrap();
        sys.add_relation("coherence", ["Speech", "Dress"]).unwrap();
        sys
    }

    fn attach_probability_washing(sys: &mut ValuationSystem) {
        let calc = probability();
        let v = PointValuation::from_table_in_order(
            sys.relation("washing").unwrap().declared_vars(),
            PointKind::Probability,
            &[1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0, 0.2, 0.1, 0.2],
        )
        .unwrap();
        sys.attach("washing", &calc, v.into()).unwrap();
    }

    fn attach_probability_coherence(sys: &mut ValuationSystem) {
        let calc = probability();
        let v = PointValuation::from_table_in_order(
            sys.relation("coherence").unwrap().declared_vars(),
            PointKind::Probability,
            &[0.025, 0.025, 0.45, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 6.0],
        )
        .unwrap();
        sys.attach("coherence", &calc, v.into()).unwrap();
    }

    fn dress_numbers(result: &PropagationResult, calc: &Calculus, col: &str) -> [f64; 3] {
        let r = result.marginal("Dress", calc).unwrap();
        ["B", "W", "P"].map(|v| r.number(v, col).unwrap())
    }

    #[test]
    fn probability_states_match_published_marginals() {
        let calc = probability();
        let mut sys = wardrobe();

        // state 0: defaults only
        let r0 = propagate_system(&sys, &calc, &PropagateOptions::default()).unwrap();
        for p in dress_numbers(&r0, &calc, "p") {
            assert!((p - 1.0 / 3.0).abs() < 1e-9);
        }

        // state 1: washing table + Philco out
        attach_probability_washing(&mut sys);
        sys.observe("Philco", "out").unwrap();
        let r1 = propagate_system(&sys, &calc, &PropagateOptions::default()).unwrap();
        let [b, w, p] = dress_numbers(&r1, &calc, "p");
        assert!((b - 0.4).abs() < 1e-9);
        assert!((w - 0.2).abs() < 1e-9);
        assert!((p - 0.4).abs() < 1e-9);

        // state 2: coherence table + Speech uttered
        attach_probability_coherence(&mut sys);
        sys.observe("Speech", "uttered").unwrap();
        let r2 = propagate_system(&sys, &calc, &PropagateOptions::default()).unwrap();
        let [b, w, p] = dress_numbers(&r2, &calc, "p");
        assert!((b - 0.005 / 0.0975).abs() < 1e-9);
        assert!((w - 0.0025 / 0.0975).abs() < 1e-9);
        assert!((p - 0.09 / 0.0975).abs() < 1e-9);

        // unnormalized run exposes the pre-normalization table
        let raw = propagate_system(
            &sys,
            &calc,
            &PropagateOptions {
                unnormalized: true,
                ..Default::default()
            },
        )
        .unwrap();
        let total = raw
            .raw_marginal("Dress")
            .unwrap()
            .as_point()
            .unwrap()
            .total();
        assert!((total - 0.0975).abs() < 1e-9);

        // retraction restores the prior states
        sys.retract("Speech").unwrap();
        sys.retract("Philco").unwrap();
        sys.clear_attachments();
        let back = propagate_system(&sys, &calc, &PropagateOptions::default()).unwrap();
        for p in dress_numbers(&back, &calc, "p") {
            assert!((p - 1.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn belief_states_match_published_bel_pl() {
        let calc = belief();
        let mut sys = wardrobe();

        let r0 = propagate_system(&sys, &calc, &PropagateOptions::default()).unwrap();
        let m0 = r0.marginal("Dress", &calc).unwrap();
        for v in ["B", "W", "P"] {
            assert_eq!(m0.number(v, "bel"), Some(0.0));
            assert!((m0.number(v, "pl").unwrap() - 1.0).abs() < 1e-12);
        }

        // washing bpa: 0.8 on "ok keeps all, out excludes W", rest to the frame
        let washing_scope = sys.relation("washing").unwrap().scope().clone();
        let focal = ConfigSet::new(
            washing_scope.clone(),
            [
                ("B", "ok"),
                ("W", "ok"),
                ("P", "ok"),
                ("B", "out"),
                ("P", "out"),
            ]
            .iter()
            .map(|(d, ph)| Configuration::from_values(&washing_scope, &[d, ph]).unwrap()),
        )
        .unwrap();
        let bpa = MassValuation::new(
            washing_scope.clone(),
            [(focal, 0.8), (ConfigSet::full(&washing_scope), 0.2)],
            0.0,
        )
        .unwrap();
        sys.attach("washing", &calc, bpa.into()).unwrap();
        sys.observe("Philco", "out").unwrap();

        let r1 = propagate_system(&sys, &calc, &PropagateOptions::default()).unwrap();
        let m1 = r1.marginal("Dress", &calc).unwrap();
        assert!((m1.number("W", "pl").unwrap() - 0.2).abs() < 1e-9);
        assert!((m1.number("B", "pl").unwrap() - 1.0).abs() < 1e-9);
        assert!((m1.number("P", "pl").unwrap() - 1.0).abs() < 1e-9);
        for v in ["B", "W", "P"] {
            assert_eq!(m1.number(v, "bel"), Some(0.0));
        }

        // coherence bpa: 0.9 on "uttered implies P", rest to the frame
        let coherence_scope = sys.relation("coherence").unwrap().scope().clone();
        let focal = ConfigSet::new(
            coherence_scope.clone(),
            [
                ("P", "uttered"),
                ("B", "unuttered"),
                ("W", "unuttered"),
                ("P", "unuttered"),
            ]
            .iter()
            .map(|(d, s)| Configuration::from_values(&coherence_scope, &[d, s]).unwrap()),
        )
        .unwrap();
        let bpa = MassValuation::new(
            coherence_scope.clone(),
            [(focal, 0.9), (ConfigSet::full(&coherence_scope), 0.1)],
            0.0,
        )
        .unwrap();
        sys.attach("coherence", &calc, bpa.into()).unwrap();
        sys.observe("Speech", "uttered").unwrap();

        let r2 = propagate_system(&sys, &calc, &PropagateOptions::default()).unwrap();
        let m2 = r2.marginal("Dress", &calc).unwrap();
        assert!((m2.number("P", "bel").unwrap() - 0.9).abs() < 1e-9);
        assert!((m2.number("P", "pl").unwrap() - 1.0).abs() < 1e-9);
        assert!((m2.number("B", "pl").unwrap() - 0.1).abs() < 1e-9);
        assert!((m2.number("W", "pl").unwrap() - 0.02).abs() < 1e-9);
    }

    #[test]
    fn possibility_states_match_published_distributions() {
        let calc = possibility();
        let mut sys = wardrobe();

        let washing = PointValuation::from_table_in_order(
            sys.relation("washing").unwrap().declared_vars(),
            PointKind::Possibility,
            &[1.0, 1.0, 1.0, 1.0, 0.2, 1.0],
        )
        .unwrap();
        sys.attach("washing", &calc, washing.into()).unwrap();
        sys.observe("Philco", "out").unwrap();
        let r1 = propagate_system(&sys, &calc, &PropagateOptions::default()).unwrap();
        let m1 = r1.marginal("Dress", &calc).unwrap();
        assert_eq!(m1.number("B", "Π"), Some(1.0));
        assert_eq!(m1.number("W", "Π"), Some(0.2));
        assert_eq!(m1.number("P", "Π"), Some(1.0));
        assert_eq!(m1.number("W", "N"), Some(0.0));

        let coherence = PointValuation::from_table_in_order(
            sys.relation("coherence").unwrap().declared_vars(),
            PointKind::Possibility,
            &[0.1, 0.1, 1.0, 1.0, 1.0, 1.0],
        )
        .unwrap();
        sys.attach("coherence", &calc, coherence.into()).unwrap();
        sys.observe("Speech", "uttered").unwrap();
        let r2 = propagate_system(&sys, &calc, &PropagateOptions::default()).unwrap();
        let m2 = r2.marginal("Dress", &calc).unwrap();
        assert_eq!(m2.number("B", "Π"), Some(0.1));
        assert_eq!(m2.number("W", "Π"), Some(0.1));
        assert_eq!(m2.number("P", "Π"), Some(1.0));
    }

    #[test]
    fn boolean_states_match_published_truth_tables() {
        let calc = boolean();
        let mut sys = wardrobe();

        let washing = PointValuation::from_table_in_order(
            sys.relation("washing").unwrap().declared_vars(),
            PointKind::Boolean,
            &[1.0, 1.0, 1.0, 1.0, 0.0, 1.0],
        )
        .unwrap();
        sys.attach("washing", &calc, washing.into()).unwrap();
        sys.observe("Philco", "out").unwrap();
        let r1 = propagate_system(&sys, &calc, &PropagateOptions::default()).unwrap();
        let m1 = r1.marginal("Dress", &calc).unwrap();
        assert_eq!(m1.truth("B"), Some(true));
        assert_eq!(m1.truth("W"), Some(false));
        assert_eq!(m1.truth("P"), Some(true));

        let coherence = PointValuation::from_table_in_order(
            sys.relation("coherence").unwrap().declared_vars(),
            PointKind::Boolean,
            &[0.0, 0.0, 1.0, 1.0, 1.0, 1.0],
        )
        .unwrap();
        sys.attach("coherence", &calc, coherence.into()).unwrap();
        sys.observe("Speech", "uttered").unwrap();
        let r2 = propagate_system(&sys, &calc, &PropagateOptions::default()).unwrap();
        let m2 = r2.marginal("Dress", &calc).unwrap();
        assert_eq!(m2.truth("B"), Some(false));
        assert_eq!(m2.truth("W"), Some(false));
        assert_eq!(m2.truth("P"), Some(true));
    }

    #[test]
    fn oracle_matches_engine_on_the_example() {
        let calc = probability();
        let mut sys = wardrobe();
        attach_probability_washing(&mut sys);
        attach_probability_coherence(&mut sys);
        sys.observe("Philco", "out").unwrap();
        sys.observe("Speech", "uttered").unwrap();

        let engine = propagate_system(&sys, &calc, &PropagateOptions::default()).unwrap();
        let oracle = global_evaluate(&sys, &calc, false, &OracleBounds::default()).unwrap();
        for var in ["Dress", "Philco", "Speech"] {
            let a = engine.normalized_marginal(var, &calc).unwrap();
            let b = oracle.normalized_marginal(var, &calc).unwrap();
            let (a, b) = (a.as_point().unwrap(), b.as_point().unwrap());
            for (x, y) in a.table().iter().zip(b.table()) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn contradictory_evidence_is_diagnosed_not_failed() {
        let calc = boolean();
        let mut sys = ValuationSystem::new();
        sys.add_variable("X", ["a", "b"]).unwrap();
        sys.add_relation("veto", ["X"]).unwrap();
        let none = PointValuation::new(
            Scope::singleton(sys.variable("X").unwrap().clone()),
            PointKind::Boolean,
            vec![0.0, 1.0],
        )
        .unwrap();
        sys.attach("veto", &calc, none.into()).unwrap();
        sys.observe("X", "a").unwrap();
        let r = propagate_system(&sys, &calc, &PropagateOptions::default()).unwrap();
        assert_eq!(
            r.diagnostics(),
            &[Diagnostic {
                variable: "X".to_string(),
                degeneracy: Degeneracy::AllFalse
            }]
        );
    }

    #[test]
    fn single_variable_system_marginal_is_attachment() {
        let calc = probability();
        let mut sys = ValuationSystem::new();
        sys.add_variable("X", ["a", "b"]).unwrap();
        let v = PointValuation::new(
            Scope::singleton(sys.variable("X").unwrap().clone()),
            PointKind::Probability,
            vec![3.0, 1.0],
        )
        .unwrap();
        sys.attach("X", &calc, v.into()).unwrap();
        let r = global_evaluate(&sys, &calc, false, &OracleBounds::default()).unwrap();
        let m = r.marginal("X", &calc).unwrap();
        assert!((m.number("a", "p").unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn relations_sharing_a_scope_combine_into_one_potential() {
        let calc = probability();
        let mut sys = ValuationSystem::new();
        sys.add_variable("X", ["a", "b"]).unwrap();
        sys.add_variable("Y", ["c", "d"]).unwrap();
        sys.add_relation("first", ["X", "Y"]).unwrap();
        sys.add_relation("second", ["Y", "X"]).unwrap();
        let scope = sys.relation("first").unwrap().scope().clone();
        let f = PointValuation::new(
            scope.clone(),
            PointKind::Probability,
            vec![0.5, 0.1, 0.2, 0.2],
        )
        .unwrap();
        let g = PointValuation::new(
            scope.clone(),
            PointKind::Probability,
            vec![0.3, 0.3, 0.1, 0.3],
        )
        .unwrap();
        sys.attach("first", &calc, f.into()).unwrap();
        sys.attach("second", &calc, g.into()).unwrap();

        // both relations share one hyperedge and one cluster
        let hg = sys.hypergraph(&calc);
        assert_eq!(hg.edges().len(), 1);
        let tree = MarkovTree::build(&hg);
        let potentials = assign_potentials(&tree, &sys, &calc).unwrap();
        assert_eq!(potentials.len(), 1);
        let table = potentials[0].valuation.as_point().unwrap().table();
        assert!((table[0] - 0.15).abs() < 1e-12);

        let engine = propagate(&tree, &potentials, &calc, &PropagateOptions::default()).unwrap();
        let oracle = global_evaluate(&sys, &calc, false, &OracleBounds::default()).unwrap();
        for var in ["X", "Y"] {
            let a = engine.normalized_marginal(var, &calc).unwrap();
            let b = oracle.normalized_marginal(var, &calc).unwrap();
            assert!(crate::check::valuations_close(&a, &b, 1e-12));
        }
    }

    #[test]
    fn oracle_bound_is_enforced() {
        let calc = probability();
        let mut sys = ValuationSystem::new();
        for i in 0..8 {
            sys.add_variable(format!("V{i}"), ["a", "b", "c", "d", "e", "f"])
                .unwrap();
        }
        let names: Vec<String> = (0..8).map(|i| format!("V{i}")).collect();
        for i in 0..7 {
            sys.add_relation(format!("r{i}"), [names[i].as_str(), names[i + 1].as_str()])
                .unwrap();
        }
        // 6^8 > 1e6
        assert!(matches!(
            global_evaluate(&sys, &calc, false, &OracleBounds::default()),
            Err(Error::OracleBoundExceeded(_))
        ));
    }

    #[test]
    fn tree_from_another_model_is_rejected() {
        let calc = probability();
        let mut small = ValuationSystem::new();
        small.add_variable("X", ["a", "b"]).unwrap();
        let tree = MarkovTree::build(&small.hypergraph(&calc));

        let mut bigger = ValuationSystem::new();
        bigger.add_variable("X", ["a", "b"]).unwrap();
        bigger.add_variable("Y", ["a", "b"]).unwrap();
        bigger.add_relation("r", ["X", "Y"]).unwrap();
        assert!(matches!(
            assign_potentials(&tree, &bigger, &calc),
            Err(Error::NoContainingCluster(_))
        ));
    }

    #[test]
    fn readout_requires_a_single_variable_scope() {
        let calc = probability();
        let scope = Scope::new([
            crate::frames::Variable::new("X", ["a", "b"]).unwrap(),
            crate::frames::Variable::new("Y", ["a"]).unwrap(),
        ])
        .unwrap();
        let v: Valuation = PointValuation::uniform(scope).into();
        assert!(matches!(calc.readout(&v), Err(Error::ScopeNotSingleton(_))));
    }
}

//! Markov trees: clustering a hypergraph into a tree of variable clusters
//! that supports local propagation.
//!
//! Construction triangulates by variable elimination with the min-fill
//! heuristic (ties broken by min-degree, then variable name), merges subsumed
//! elimination cliques, and connects clusters by a maximum-weight spanning
//! forest over separator sizes with lexicographic tie-breaks. Every step is
//! deterministic, so rebuilt trees are identical.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::frames::{Scope, Variable};
use crate::network::Hypergraph;

/// An edge of the Markov tree, with the separator between its endpoints.
#[derive(Debug, Clone)]
pub struct TreeEdge {
    pub a: usize,
    pub b: usize,
    pub separator: Scope,
}

/// A tree (forest, for disconnected models) of variable clusters.
#[derive(Debug, Clone)]
pub struct MarkovTree {
    clusters: Vec<Scope>,
    edges: Vec<TreeEdge>,
    neighbors: Vec<Vec<(usize, usize)>>, // per cluster: (neighbor cluster, edge index)
    assignment: Vec<usize>,              // hyperedge index -> cluster index
}

impl MarkovTree {
    /// Clusters the hypergraph into a valid Markov tree. Every variable ends
    /// up in at least one cluster; isolated variables get singleton clusters.
    pub fn build(hypergraph: &Hypergraph) -> MarkovTree {
        let cliques = eliminate(hypergraph);
        let mut clusters = merge_subsumed(cliques);
        clusters.sort();

        let by_name: BTreeMap<&str, &Arc<Variable>> =
            hypergraph.nodes().iter().map(|v| (v.name(), v)).collect();
        let scopes: Vec<Scope> = clusters
            .iter()
            .map(|names| {
                Scope::new(names.iter().map(|n| (*by_name[n.as_str()]).clone()))
                    .expect("cluster vars come from one system")
            })
            .collect();

        let edges = spanning_forest(&scopes);
        let mut neighbors = vec![Vec::new(); scopes.len()];
        for (i, e) in edges.iter().enumerate() {
            neighbors[e.a].push((e.b, i));
            neighbors[e.b].push((e.a, i));
        }
        for n in &mut neighbors {
            n.sort_unstable();
        }

        let assignment = hypergraph
            .edges()
            .iter()
            .map(|edge| {
                containing_cluster(&scopes, edge.scope())
                    .expect("elimination cliques cover every hyperedge")
            })
            .collect();

        MarkovTree {
            clusters: scopes,
            edges,
            neighbors,
            assignment,
        }
    }

    pub fn clusters(&self) -> &[Scope] {
        &self.clusters
    }

    pub fn edges(&self) -> &[TreeEdge] {
        &self.edges
    }

    /// Neighbors of a cluster in ascending cluster order.
    pub fn neighbors(&self, cluster: usize) -> &[(usize, usize)] {
        &self.neighbors[cluster]
    }

    /// Cluster each hyperedge of the originating hypergraph was assigned to.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Smallest cluster containing the scope, ties by index.
    pub fn containing_cluster(&self, scope: &Scope) -> Option<usize> {
        containing_cluster(&self.clusters, scope)
    }

    pub fn clusters_containing(&self, variable: &str) -> Vec<usize> {
        (0..self.clusters.len())
            .filter(|i| self.clusters[*i].contains(variable))
            .collect()
    }

    /// Checks the Markov-tree properties against a hypergraph. Violations are
    /// reported as data, not errors.
    pub fn validate(&self, hypergraph: &Hypergraph) -> ValidationReport {
        let mut violations = Vec::new();

        // acyclicity
        let mut dsu = DisjointSet::new(self.clusters.len());
        for e in &self.edges {
            if !dsu.union(e.a, e.b) {
                violations.push(Violation::Cycle { a: e.a, b: e.b });
            }
        }

        // separators match endpoint intersections
        for (i, e) in self.edges.iter().enumerate() {
            let expected = self.clusters[e.a].intersection(&self.clusters[e.b]);
            if e.separator != expected {
                violations.push(Violation::BadSeparator { edge: i });
            }
        }

        // running intersection: clusters containing a variable form a
        // connected subtree
        for var in hypergraph.nodes() {
            let holders = self.clusters_containing(var.name());
            if holders.is_empty() {
                violations.push(Violation::MissingVariable {
                    variable: var.name().to_string(),
                });
                continue;
            }
            let mut seen: BTreeSet<usize> = BTreeSet::new();
            let mut stack = vec![holders[0]];
            seen.insert(holders[0]);
            while let Some(c) = stack.pop() {
                for (n, _) in &self.neighbors[c] {
                    if self.clusters[*n].contains(var.name()) && seen.insert(*n) {
                        stack.push(*n);
                    }
                }
            }
            if holders.iter().any(|h| !seen.contains(h)) {
                violations.push(Violation::RunningIntersection {
                    variable: var.name().to_string(),
                });
            }
        }

        // hyperedge coverage: through the stored assignment when this tree
        // was built for the hypergraph, by containment search otherwise
        let check_assignment = self.assignment.len() == hypergraph.edges().len();
        for (i, edge) in hypergraph.edges().iter().enumerate() {
            let covered = if check_assignment {
                self.assignment
                    .get(i)
                    .and_then(|c| self.clusters.get(*c))
                    .is_some_and(|c| edge.scope().is_subset_of(c))
            } else {
                containing_cluster(&self.clusters, edge.scope()).is_some()
            };
            if !covered {
                violations.push(Violation::UncoveredHyperedge {
                    label: edge.label(),
                });
            }
        }

        ValidationReport { violations }
    }
}

/// Hand-construction hook for validation tests.
impl MarkovTree {
    pub fn from_parts(clusters: Vec<Scope>, edges: Vec<(usize, usize)>) -> MarkovTree {
        let edges: Vec<TreeEdge> = edges
            .into_iter()
            .map(|(a, b)| TreeEdge {
                separator: clusters[a].intersection(&clusters[b]),
                a,
                b,
            })
            .collect();
        let mut neighbors = vec![Vec::new(); clusters.len()];
        for (i, e) in edges.iter().enumerate() {
            neighbors[e.a].push((e.b, i));
            neighbors[e.b].push((e.a, i));
        }
        for n in &mut neighbors {
            n.sort_unstable();
        }
        MarkovTree {
            clusters,
            edges,
            neighbors,
            assignment: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Cycle { a: usize, b: usize },
    BadSeparator { edge: usize },
    RunningIntersection { variable: String },
    MissingVariable { variable: String },
    UncoveredHyperedge { label: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Cycle { a, b } => write!(f, "edge {a}-{b} closes a cycle"),
            Violation::BadSeparator { edge } => {
                write!(
                    f,
                    "separator of edge {edge} is not the cluster intersection"
                )
            }
            Violation::RunningIntersection { variable } => {
                write!(f, "clusters containing `{variable}` are not connected")
            }
            Violation::MissingVariable { variable } => {
                write!(f, "variable `{variable}` appears in no cluster")
            }
            Violation::UncoveredHyperedge { label } => {
                write!(f, "hyperedge {label} has no containing cluster")
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[Violation] {
        &self.violations
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            write!(f, "valid Markov tree")
        } else {
            writeln!(f, "{} violation(s):", self.violations.len())?;
            for v in &self.violations {
                writeln!(f, "  - {v}")?;
            }
            Ok(())
        }
    }
}

fn containing_cluster(clusters: &[Scope], scope: &Scope) -> Option<usize> {
    (0..clusters.len())
        .filter(|i| scope.is_subset_of(&clusters[*i]))
        .min_by_key(|i| (clusters[*i].len(), *i))
}

/// Min-fill variable elimination over the hypergraph's primal graph.
fn eliminate(hypergraph: &Hypergraph) -> Vec<BTreeSet<String>> {
    let mut adjacency: BTreeMap<String, BTreeSet<String>> = hypergraph
        .nodes()
        .iter()
        .map(|v| (v.name().to_string(), BTreeSet::new()))
        .collect();
    for edge in hypergraph.edges() {
        let names: Vec<&str> = edge.scope().vars().iter().map(|v| v.name()).collect();
        for (i, a) in names.iter().enumerate() {
            for b in &names[i + 1..] {
                adjacency.get_mut(*a).unwrap().insert(b.to_string());
                adjacency.get_mut(*b).unwrap().insert(a.to_string());
            }
        }
    }

    let fill_of = |adjacency: &BTreeMap<String, BTreeSet<String>>, v: &str| -> usize {
        let nbrs: Vec<&String> = adjacency[v].iter().collect();
        let mut fill = 0;
        for (i, a) in nbrs.iter().enumerate() {
            for b in &nbrs[i + 1..] {
                if !adjacency[*a].contains(*b) {
                    fill += 1;
                }
            }
        }
        fill
    };

    let mut cliques = Vec::new();
    while !adjacency.is_empty() {
        // min fill, then min degree, then name: BTreeMap iteration is sorted,
        // so strictly-less keeps the lexicographically least.
        let chosen = adjacency
            .keys()
            .map(|v| (fill_of(&adjacency, v), adjacency[v].len(), v.clone()))
            .min()
            .map(|(_, _, v)| v)
            .expect("non-empty adjacency");

        let nbrs: BTreeSet<String> = adjacency[&chosen].clone();
        let mut clique = nbrs.clone();
        clique.insert(chosen.clone());
        cliques.push(clique);

        // connect the neighborhood, then remove the eliminated variable
        let nbr_list: Vec<&String> = nbrs.iter().collect();
        for (i, a) in nbr_list.iter().enumerate() {
            for b in &nbr_list[i + 1..] {
                adjacency.get_mut(*a).unwrap().insert((*b).clone());
                adjacency.get_mut(*b).unwrap().insert((*a).clone());
            }
        }
        adjacency.remove(&chosen);
        for set in adjacency.values_mut() {
            set.remove(&chosen);
        }
    }
    cliques
}

/// Drops elimination cliques subsumed by an earlier one (a later clique never
/// subsumes an earlier one: each clique contains its eliminated variable,
/// absent from all later cliques).
fn merge_subsumed(cliques: Vec<BTreeSet<String>>) -> Vec<BTreeSet<String>> {
    let mut kept: Vec<BTreeSet<String>> = Vec::new();
    for clique in cliques {
        if !kept.iter().any(|k| clique.is_subset(k)) {
            kept.push(clique);
        }
    }
    kept
}

/// Maximum-weight spanning forest over separator sizes; only edges with a
/// non-empty separator are candidates, so disconnected components stay
/// separate trees.
fn spanning_forest(clusters: &[Scope]) -> Vec<TreeEdge> {
    let mut candidates = Vec::new();
    for a in 0..clusters.len() {
        for b in a + 1..clusters.len() {
            let separator = clusters[a].intersection(&clusters[b]);
            if !separator.is_empty() {
                candidates.push((separator.len(), a, b, separator));
            }
        }
    }
    // weight descending, then (a, b) ascending: clusters are sorted, so the
    // tie-break is lexicographic.
    candidates.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut dsu = DisjointSet::new(clusters.len());
    let mut edges = Vec::new();
    for (_, a, b, separator) in candidates {
        if dsu.union(a, b) {
            edges.push(TreeEdge { a, b, separator });
        }
    }
    edges
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> DisjointSet {
        DisjointSet {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

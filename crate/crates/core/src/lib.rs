//! Calculus-generic uncertainty propagation in valuation networks.
//!
//! Knowledge is modelled as a valuation system: variables with finite frames,
//! relations linking them, and per-calculus valuations attached to those
//! scopes. Evaluation compiles the system into a Markov tree and runs local
//! (Shenoy–Shafer style) message passing, producing one marginal per
//! variable. Four uncertainty calculi ship built in — probability, belief
//! functions, Boolean constraints and possibility — and user-defined operator
//! bundles register alongside them; the same structural model serves all of
//! them.
//!
//! The dense kernels are data-parallel; build with the default `parallel`
//! feature for rayon execution, or without it for the sequential fallback.

pub mod calculi;
pub mod check;
pub mod error;
pub mod exec;
pub mod frames;
pub mod network;
pub mod propagation;
pub mod tree;

pub use calculi::{
    belief, boolean, possibility, probability, Calculus, CalculusBuilder, CalculusRegistry, Cell,
    MarginalReadout, MassValuation, PointKind, PointValuation, ReadoutRow, Role, Valuation,
    ValuationKind,
};
pub use error::{Error, Result};
pub use frames::{ConfigSet, Configuration, Scope, Variable};
pub use network::{EdgeSource, Hyperedge, Hypergraph, Relation, ValuationSystem};
pub use propagation::{
    assign_potentials, edge_valuations, global_evaluate, propagate, propagate_system, Degeneracy,
    Diagnostic, NodePotential, OracleBounds, PropagateOptions, PropagationResult, Schedule,
};
pub use tree::{MarkovTree, ValidationReport, Violation};

//! Metrics on the state spaces of finite-dimensional order-unit spaces.
//!
//! A Lipschitz seminorm `L` on observables induces the metric
//! `ρ_L(μ, ν) = sup{ |μ(a) − ν(a)| : L(a) ≤ 1 }` on states. This crate builds
//! the seminorm families of interest (commutators with a Dirac operator,
//! Lipschitz constants for graph costs and metric tables, the resistance
//! seminorm, and the quotient norm), computes `ρ_L` and the dual norm `L′`
//! exactly by linear programming or to a certified tolerance by cutting
//! planes, and provides predicate suites for the lattice, Leibniz and
//! norm-characterization properties of the resulting metrics.

pub mod linalg;
pub mod metric_engine;
pub mod properties;
pub mod recovery;
pub mod resistance;
pub mod sampling;
pub mod seminorms;
pub mod spaces;

pub use linalg::{HermMatrix, LinalgError, SymMatrix};
pub use metric_engine::{
    dual_norm, metric_table, monge_kantorovich, radius, state_metric, trace_distance,
    CertifiedValue, EngineError, MetricTable, Radius, Transport, DEFAULT_TOL,
};
pub use seminorms::{
    dirac_from_cost, eval, lattice_join, separation_oracle, unit_ball_constraints, ConductanceGraph,
    CostGraph, Cut, DiracOperator, Edge, Representation, SeminormError, SeminormSpec, UnitBall,
};
pub use spaces::{
    difference, pair, point_state, quotient_norm, CommObservable, DensityState, FiniteSpace, Functional,
    MatObservable, Observable, ProbState, Shape, SpaceError, State, ZeroSumFunctional,
};

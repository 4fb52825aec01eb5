//! Simulator and library for layered multicast over directed acyclic
//! networks with random linear network coding.
//!
//! The pipeline per trial: generate (or load) a unit-capacity DAG with one
//! source and a receiver set ([`netgraph`]), propagate layer requests from
//! the receivers toward the source ([`pushback`]), generate coding vectors
//! top-down and determine what each node can decode ([`codeassign`]), and
//! aggregate per-receiver outcomes into the two experiment metrics
//! ([`harness`]). Routing and per-layer coding baselines live in
//! [`baselines`]; coefficient arithmetic in [`gf`].

pub mod baselines;
pub mod codeassign;
pub mod gf;
pub mod harness;
pub mod netgraph;
pub mod pushback;

pub use gf::{Field, FieldSpec};
pub use harness::{Scheme, Topology, TrialConfig, TrialResult};
pub use netgraph::{GenParams, LayeredDag};
pub use pushback::{Criterion, Schedule};

//! Stochastic rewriting of undirected multigraphs.
//!
//! Graphs, their categorical constructions, nested application conditions,
//! DPO and SqPO rewriting, the rule algebra with its canonical
//! representation, moment ODE derivation and exact stochastic simulation.
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod algebra;
pub mod canon;
pub mod condition;
pub mod constructions;
pub mod error;
pub mod graph;
pub mod matching;
pub mod model;
pub mod ode;
pub mod poly;
pub mod rule;
pub mod ssa;
pub mod verify;

pub use canon::{canonical, canonical_key, Canonical, GraphKey};
pub use error::{ConditionError, GraphError, ModelError, RuleError};
pub use graph::{Cospan, Edge, Graph, Label, Morphism, Span, TypeGraph, TypedGraph};

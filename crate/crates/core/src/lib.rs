//! Online exploration of cycles, tadpoles and n-tadpoles by teams of agents,
//! with exact offline optima and adversarial instance generators.

pub mod adversaries;
pub mod engine;
pub mod geometry;
pub mod graph;
pub mod harness;
pub mod offline;
pub mod rational;
pub mod strategies;

pub use geometry::{cycle_geometry, CycleGeometry, Midpoint};
pub use graph::{build_cycle, build_n_tadpole, build_tadpole, GraphError, Shape, WeightedGraph};
pub use rational::{q, Rational};

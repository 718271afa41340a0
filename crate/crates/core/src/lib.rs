//! Distributed conductance testing in the CONGEST model.
//!
//! * [`graph`], [`metrics`], [`generate`], [`edgelist`]: port-numbered graphs
//!   and exact combinatorial quantities.
//! * [`spectral`]: dense ground truth for the lazy random walk.
//! * [`sim`]: a synchronous message-passing engine with per-edge bit
//!   accounting.
//! * [`protocols`]: BFS election, tree aggregation, distributed random walks,
//!   the conductance tester and unknown-size exploration.

pub mod edgelist;
pub mod error;
pub mod generate;
pub mod graph;
pub mod metrics;
pub mod protocols;
pub mod sim;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{CutStats, Graph, Port, VertexId, VertexSet};

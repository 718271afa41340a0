//! Synchronous CONGEST-style message passing with per-edge bit accounting.

mod engine;
mod message;
pub mod wire;

pub use engine::{
    decide, write_traces, Budget, CongestionMode, EdgeBits, RoundTrace, SimConfig,
    SimulationResult, Simulator, VertexInit, VertexProgram, Violation,
};
pub use message::{message_bits, Inbox, Message, Outbox};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::VertexId;

/// Independent per-vertex stream: the global seed selects the key, the
/// vertex id selects the ChaCha stream.
pub fn vertex_rng(seed: u64, vertex: VertexId) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(vertex as u64);
    rng
}

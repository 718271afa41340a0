//! Distributed protocols built on the simulator.

pub mod config;
pub mod explore;
pub mod tester;
pub mod tree;
pub mod walk;

pub use config::{log_add_exp, AcceptThreshold, RejectThreshold, Schedule, TesterConfig, WalkMode};
pub use explore::{unknown_size_explore, ExploreOutcome, ExploreResult};
pub use tester::{run_tester, sample_starts, test_conductance, RejectReason, TestVerdict, TesterRun};
pub use tree::{aggregate_sum, bfs_elect, AggValue, BfsState};
pub use walk::{discrepancy_from_estimates, random_walk_phase, WalkParams, WalkPhaseResult};

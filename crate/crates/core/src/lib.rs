//! Foraging ecosystem with linearly genetically-programmed agents.
//!
//! Agents live on a toroidal landscape of renewing resources and run small
//! programs of look, move and reproduce instructions under a per-cycle
//! instruction budget. There is no fitness function: programs spread only by
//! keeping their carriers alive long enough to reproduce.

pub mod engine;
pub mod expcli;
pub mod genome;
pub mod landscape;
pub mod metrics;
pub mod rng;

pub use engine::{run, Agent, Effect, MutationMode, Observer, RunError, SimConfig, World};
pub use genome::{Direction, Genome, GenomeError, Instruction, Program, RegisterFile};
pub use landscape::{AgentId, Landscape, Position};

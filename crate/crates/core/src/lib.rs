//! Sampling-based adversarial search under the microscope.
//!
//! UCT and depth-limited minimax over a common [`game::Game`] interface, with
//! synthetic binary trees that hide winning strategies at chosen depths,
//! closed-form convergence models, a node-budgeted tournament harness, and
//! move-ranking / soft-trap analysis.

pub mod analysis;
pub mod error;
pub mod experiments;
pub mod game;
pub mod minimax;
pub mod ranking;
pub mod rng;
pub mod synthetic;
pub mod tournament;
pub mod traps;
pub mod uct;

pub use error::{Error, Result};

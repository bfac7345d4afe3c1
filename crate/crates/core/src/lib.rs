//! Elephant random walks with restricted memory.

pub mod analytic;
pub mod engine;
pub mod error;
pub mod model;
pub mod numeric;
pub mod oracle;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use model::{MemorySpec, Step, StepMultiplier, WalkParams};

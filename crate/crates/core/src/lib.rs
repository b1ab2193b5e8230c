//! Runtime hazard monitoring, buffer-gated control takeover and IDM-based
//! hazard mitigation around a deterministic 2D driving simulator.

pub mod error;
pub mod gate;
pub mod geometry;
pub mod mitigator;
pub mod monitor;
pub mod prediction;
pub mod scenario;
pub mod sim;
pub mod trajectory;
pub mod world;

pub use error::{ArgusError, Result};

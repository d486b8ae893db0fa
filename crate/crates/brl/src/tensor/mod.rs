//! Minimal reverse-mode differentiable computation.
//!
//! Multilayer perceptrons with flat parameter storage, a per-step Wengert
//! tape for gradients, an Adam optimizer, and the binary checkpoint format.
//! All math is f64; checkpoints serialize parameters as little-endian f32.

mod adam;
mod checkpoint;
mod mlp;
mod param;
mod tape;

pub use adam::AdamState;
pub use checkpoint::{read_networks, write_networks};
pub use mlp::{Activation, Mlp};
pub use param::ParamVector;
pub use tape::{NetId, NodeId, Tape};

//! Batch reinforcement-learning workbench.
//!
//! Two strictly separated phases: task-agnostic exploration writes an
//! immutable transition dataset to disk, and offline learners train task
//! policies from that file alone, with zero further environment
//! interaction. Everything is seeded and deterministic end to end.

pub mod dataset;
pub mod envs;
pub mod error;
pub mod explore;
pub mod harness;
pub mod offline;
pub mod tensor;

pub use error::{Error, Result};

/// The one RNG used everywhere. ChaCha8 is seedable, portable, and fast;
/// identical seeds give bit-identical streams on every platform.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Build the workbench RNG from a seed.
pub fn rng_from_seed(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}

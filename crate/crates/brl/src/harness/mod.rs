//! Experiment orchestration: configs, the two-phase pipeline, evaluation,
//! coverage reporting, and CSV/SVG emission.

mod cli;
mod config;
pub mod csvio;
mod eval;
pub mod report;
mod run;

pub use cli::cli_main;
pub use config::{ExperimentConfig, Hyper, Phase};
pub use eval::{evaluate, EvalReport};
pub use report::emit_report;
pub use run::{default_loss_csv, run, sidecar_path, PolicySidecar};

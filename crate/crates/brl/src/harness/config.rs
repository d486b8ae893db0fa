use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::explore::ExploreHyper;
use crate::offline::OfflineHyper;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Explore,
    Train,
    Eval,
    Coverage,
    Report,
}

/// Every tunable across both phases, JSON-overridable as one document.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyper {
    pub explore: ExploreHyper,
    pub offline: OfflineHyper,
}

/// Full seeded description of one run. CLI flags override file values.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub phase: Phase,
    pub env: Option<String>,
    pub method: Option<String>,
    pub algo: Option<String>,
    pub steps: u64,
    pub seed: u64,
    pub reward: Option<String>,
    pub episodes: u32,
    pub bins: usize,
    pub max_episode_steps: Option<u32>,
    pub dataset: Option<PathBuf>,
    pub policy: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    /// Report inputs.
    pub inputs: Vec<PathBuf>,
    pub hyper: Hyper,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            phase: Phase::Explore,
            env: None,
            method: None,
            algo: None,
            steps: 0,
            seed: 0,
            reward: None,
            episodes: 20,
            bins: 20,
            max_episode_steps: None,
            dataset: None,
            policy: None,
            out: None,
            csv: None,
            inputs: Vec::new(),
            hyper: Hyper::default(),
        }
    }
}

/// The semantic identity of a run: everything that changes results,
/// nothing that only changes where files land.
#[derive(Serialize)]
struct HashedView<'a> {
    phase: Phase,
    env: &'a Option<String>,
    method: &'a Option<String>,
    algo: &'a Option<String>,
    steps: u64,
    seed: u64,
    reward: &'a Option<String>,
    episodes: u32,
    bins: usize,
    max_episode_steps: &'a Option<u32>,
    hyper: &'a Hyper,
}

impl ExperimentConfig {
    /// Hex SHA-256 over the semantic fields (paths excluded, so reruns in
    /// different directories produce identical artifacts).
    pub fn config_hash(&self) -> String {
        let view = HashedView {
            phase: self.phase,
            env: &self.env,
            method: &self.method,
            algo: &self.algo,
            steps: self.steps,
            seed: self.seed,
            reward: &self.reward,
            episodes: self.episodes,
            bins: self.bins,
            max_episode_steps: &self.max_episode_steps,
            hyper: &self.hyper,
        };
        let json = serde_json::to_string(&view).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        let mut hex = String::with_capacity(16);
        for b in &digest[..8] {
            hex.push_str(&format!("{b:02x}"));
        }
        hex
    }
}

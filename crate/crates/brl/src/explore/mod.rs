//! Task-agnostic exploration: five methods behind one Explorer contract,
//! driven by `collect` to produce a fixed-size dataset with no task
//! knowledge.

pub mod diayn;
pub mod gep;
pub mod linear;
pub mod policy;
pub mod rnd;
pub mod sac;
pub mod sse;

mod explorers;

pub use diayn::{DiaynConfig, SkillEnsemble};
pub use explorers::{
    make_explorer, DiaynExplorer, ExploreHyper, GepExplorer, RandomPoliciesExplorer, RndExplorer,
    SseExplorer,
};
pub use gep::{gep_sample_goal, gep_select_and_perturb, GepConfig, GepMemory};
pub use linear::{LinearPolicy, RandomPoliciesConfig};
pub use policy::{SquashSpec, StochasticPolicy};
pub use rnd::{RndConfig, RndModule};
pub use sac::{SacConfig, SacLearner, SacLosses};
pub use sse::{
    draw_rollout_noise, intrinsic_pred_error_reward, RolloutNoise, SseConfig, SseModels,
};

use crate::dataset::{Dataset, DatasetMeta, Transition};
use crate::envs::Environment;
use crate::error::{Error, Result};
use crate::Rng;

/// A task-agnostic exploration agent: acts, observes its own transitions,
/// and may learn online. Episode boundaries are signalled explicitly.
pub trait Explorer {
    fn name(&self) -> &'static str;

    /// Called at every episode start with the reset observation.
    fn begin_episode(&mut self, obs: &[f64], rng: &mut Rng) -> Result<()>;

    fn act(&mut self, obs: &[f64], rng: &mut Rng) -> Result<Vec<f64>>;

    /// Sees every transition in order; learning updates happen here.
    fn observe(&mut self, transition: &Transition, rng: &mut Rng) -> Result<()>;

    /// Called when an episode terminates (not at a mid-episode cutoff).
    fn end_episode(&mut self, rng: &mut Rng) -> Result<()>;
}

/// Discounted return Σ γ^t (1−D_t) r_t with binary done masks.
pub fn discounted_return(rewards: &[f64], dones: &[bool], gamma: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(Error::Config(format!(
            "discount factor must lie in [0,1), got {gamma}"
        )));
    }
    if rewards.len() != dones.len() {
        return Err(Error::InputShape(format!(
            "{} rewards vs {} done flags",
            rewards.len(),
            dones.len()
        )));
    }
    let mut acc = 0.0;
    let mut discount = 1.0;
    for (r, d) in rewards.iter().zip(dones) {
        if !d {
            acc += discount * r;
        }
        discount *= gamma;
    }
    Ok(acc)
}

/// Runs the act/observe loop with episode resets until exactly
/// `total_steps` transitions are gathered. Deterministic given the rng
/// state and the explorer's initialization.
pub fn collect(
    explorer: &mut dyn Explorer,
    env: &mut dyn Environment,
    total_steps: u64,
    seed: u64,
    config_hash: &str,
    rng: &mut Rng,
) -> Result<Dataset> {
    if total_steps < 1 {
        return Err(Error::Usage("collect requires total_steps >= 1".to_string()));
    }
    let spec = env.spec().clone();
    let mut dataset = Dataset::new(DatasetMeta {
        env: spec.name.to_string(),
        method: explorer.name().to_string(),
        seed,
        obs_dim: spec.obs_dim,
        act_dim: spec.act_dim,
        config_hash: config_hash.to_string(),
    });

    let mut obs = env.reset();
    explorer.begin_episode(&obs, rng)?;
    for _ in 0..total_steps {
        let action = explorer.act(&obs, rng)?;
        let step = env.step(&action)?;
        let transition = Transition {
            obs: obs.clone(),
            action,
            next_obs: step.obs.clone(),
            done: step.done,
            timeout: step.timeout,
        };
        explorer.observe(&transition, rng)?;
        dataset.push(transition)?;
        if step.done {
            explorer.end_episode(rng)?;
            obs = env.reset();
            explorer.begin_episode(&obs, rng)?;
        } else {
            obs = step.obs;
        }
    }
    Ok(dataset)
}

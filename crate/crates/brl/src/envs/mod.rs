//! Deterministic continuous-control environments and the task-reward
//! registry. Rewards exist only for offline training and evaluation;
//! exploration never sees them.

mod pendulum;
mod planar_arm;
mod point_mass;
mod reward;

pub use pendulum::Pendulum;
pub use planar_arm::{forward_kinematics, PlanarArm, ARM_JOINTS, ARM_LINK_LEN};
pub use point_mass::PointMass2D;
pub use reward::TaskReward;

use crate::error::{Error, Result};

/// Static description of an environment.
#[derive(Debug, Clone)]
pub struct EnvSpec {
    pub name: &'static str,
    pub obs_dim: usize,
    pub act_dim: usize,
    pub action_low: Vec<f64>,
    pub action_high: Vec<f64>,
    pub max_episode_steps: u32,
    pub dt: f64,
}

/// One environment step: the new observation plus termination flags.
/// `timeout` implies `done`; a failure termination has `timeout == false`.
#[derive(Debug, Clone)]
pub struct Step {
    pub obs: Vec<f64>,
    pub done: bool,
    pub timeout: bool,
}

pub trait Environment {
    fn spec(&self) -> &EnvSpec;

    /// Deterministic start; step count back to 0.
    fn reset(&mut self) -> Vec<f64>;

    /// Clips the action to bounds, advances the dynamics, and reports
    /// termination. Non-finite actions and length mismatches are errors.
    fn step(&mut self, action: &[f64]) -> Result<Step>;

    /// Lifetime count of `step` calls, for the offline-training
    /// no-interaction check.
    fn steps_taken(&self) -> u64;

    /// Declared per-dimension observation bounds (coverage binning).
    fn obs_bounds(&self) -> (Vec<f64>, Vec<f64>);
}

/// Instantiates an environment by registry name.
pub fn make_env(name: &str, max_episode_steps: Option<u32>) -> Result<Box<dyn Environment>> {
    match name {
        "pointmass" => Ok(Box::new(PointMass2D::new(max_episode_steps))),
        "pendulum" => Ok(Box::new(Pendulum::new(max_episode_steps))),
        "planararm" => Ok(Box::new(PlanarArm::new(max_episode_steps))),
        _ => Err(Error::Config(format!(
            "unknown environment '{name}' (expected pointmass | pendulum | planararm)"
        ))),
    }
}

pub(crate) fn validate_action(spec: &EnvSpec, action: &[f64]) -> Result<Vec<f64>> {
    if action.len() != spec.act_dim {
        return Err(Error::InputShape(format!(
            "{}: action length {} != act_dim {}",
            spec.name,
            action.len(),
            spec.act_dim
        )));
    }
    if action.iter().any(|a| !a.is_finite()) {
        return Err(Error::InputShape(format!(
            "{}: non-finite action component",
            spec.name
        )));
    }
    Ok(action
        .iter()
        .zip(spec.action_low.iter().zip(&spec.action_high))
        .map(|(a, (lo, hi))| a.clamp(*lo, *hi))
        .collect())
}

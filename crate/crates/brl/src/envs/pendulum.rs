use super::{validate_action, EnvSpec, Environment, Step};
use crate::error::Result;

const DT: f64 = 0.05;
const GRAVITY: f64 = 9.8;
const LENGTH: f64 = 1.0;
const MASS: f64 = 1.0;
const MAX_SPEED: f64 = 8.0;
const MAX_TORQUE: f64 = 2.0;

/// Torque-controlled pendulum, semi-implicit Euler. Observation
/// (cos θ, sin θ, θ̇); starts hanging down at θ = π.
pub struct Pendulum {
    spec: EnvSpec,
    theta: f64,
    theta_dot: f64,
    step_count: u32,
    lifetime_steps: u64,
}

impl Pendulum {
    pub fn new(max_episode_steps: Option<u32>) -> Self {
        Self {
            spec: EnvSpec {
                name: "pendulum",
                obs_dim: 3,
                act_dim: 1,
                action_low: vec![-MAX_TORQUE],
                action_high: vec![MAX_TORQUE],
                max_episode_steps: max_episode_steps.unwrap_or(200),
                dt: DT,
            },
            theta: std::f64::consts::PI,
            theta_dot: 0.0,
            step_count: 0,
            lifetime_steps: 0,
        }
    }

    fn obs(&self) -> Vec<f64> {
        vec![self.theta.cos(), self.theta.sin(), self.theta_dot]
    }

    /// Mechanical energy, for the integration-quality test.
    pub fn energy(&self) -> f64 {
        0.5 * MASS * LENGTH * LENGTH * self.theta_dot * self.theta_dot
            - MASS * GRAVITY * LENGTH * self.theta.cos()
    }
}

impl Environment for Pendulum {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self) -> Vec<f64> {
        self.theta = std::f64::consts::PI;
        self.theta_dot = 0.0;
        self.step_count = 0;
        self.obs()
    }

    fn step(&mut self, action: &[f64]) -> Result<Step> {
        let a = validate_action(&self.spec, action)?;
        self.lifetime_steps += 1;
        let accel = -(GRAVITY / LENGTH) * self.theta.sin() + a[0] / (MASS * LENGTH * LENGTH);
        self.theta_dot = (self.theta_dot + accel * DT).clamp(-MAX_SPEED, MAX_SPEED);
        self.theta += self.theta_dot * DT;
        self.step_count += 1;
        let timeout = self.step_count >= self.spec.max_episode_steps;
        Ok(Step {
            obs: self.obs(),
            done: timeout,
            timeout,
        })
    }

    fn steps_taken(&self) -> u64 {
        self.lifetime_steps
    }

    fn obs_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![-1.0, -1.0, -MAX_SPEED], vec![1.0, 1.0, MAX_SPEED])
    }
}

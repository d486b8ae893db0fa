use super::{validate_action, EnvSpec, Environment, Step};
use crate::error::{Error, Result};

pub const ARM_JOINTS: usize = 7;
pub const ARM_LINK_LEN: f64 = 0.2;

const DT: f64 = 0.05;
const VEL_LIMIT: f64 = 0.5;
const JOINT_LIMIT: f64 = 2.8;

/// Planar 7-joint arm under velocity control, the desk-scale stand-in for
/// the physical robot. Observation = [7 joint angles, 7 joint velocities];
/// the velocity half reports the last commanded (clipped) velocity.
/// Exceeding ±2.8 rad on any joint is a failure termination.
pub struct PlanarArm {
    spec: EnvSpec,
    angles: [f64; ARM_JOINTS],
    last_cmd: [f64; ARM_JOINTS],
    step_count: u32,
    lifetime_steps: u64,
}

impl PlanarArm {
    pub fn new(max_episode_steps: Option<u32>) -> Self {
        Self {
            spec: EnvSpec {
                name: "planararm",
                obs_dim: 2 * ARM_JOINTS,
                act_dim: ARM_JOINTS,
                action_low: vec![-VEL_LIMIT; ARM_JOINTS],
                action_high: vec![VEL_LIMIT; ARM_JOINTS],
                max_episode_steps: max_episode_steps.unwrap_or(200),
                dt: DT,
            },
            angles: [0.0; ARM_JOINTS],
            last_cmd: [0.0; ARM_JOINTS],
            step_count: 0,
            lifetime_steps: 0,
        }
    }

    fn obs(&self) -> Vec<f64> {
        let mut o = Vec::with_capacity(2 * ARM_JOINTS);
        o.extend_from_slice(&self.angles);
        o.extend_from_slice(&self.last_cmd);
        o
    }
}

impl Environment for PlanarArm {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self) -> Vec<f64> {
        self.angles = [0.0; ARM_JOINTS];
        self.last_cmd = [0.0; ARM_JOINTS];
        self.step_count = 0;
        self.obs()
    }

    fn step(&mut self, action: &[f64]) -> Result<Step> {
        let a = validate_action(&self.spec, action)?;
        self.lifetime_steps += 1;
        for j in 0..ARM_JOINTS {
            self.angles[j] += a[j] * DT;
            self.last_cmd[j] = a[j];
        }
        self.step_count += 1;
        let violated = self.angles.iter().any(|t| t.abs() > JOINT_LIMIT);
        let timeout = !violated && self.step_count >= self.spec.max_episode_steps;
        Ok(Step {
            obs: self.obs(),
            done: violated || timeout,
            timeout,
        })
    }

    fn steps_taken(&self) -> u64 {
        self.lifetime_steps
    }

    fn obs_bounds(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![-JOINT_LIMIT; ARM_JOINTS];
        lo.extend(vec![-VEL_LIMIT; ARM_JOINTS]);
        let mut hi = vec![JOINT_LIMIT; ARM_JOINTS];
        hi.extend(vec![VEL_LIMIT; ARM_JOINTS]);
        (lo, hi)
    }
}

/// Tooltip position of the planar chain:
/// Σ_k L·(cos Σ_{j≤k} θ_j, sin Σ_{j≤k} θ_j).
pub fn forward_kinematics(angles: &[f64]) -> Result<[f64; 2]> {
    if angles.len() != ARM_JOINTS {
        return Err(Error::InputShape(format!(
            "forward kinematics expects {ARM_JOINTS} angles, got {}",
            angles.len()
        )));
    }
    let mut cum = 0.0;
    let mut x = 0.0;
    let mut y = 0.0;
    for &t in angles {
        cum += t;
        x += ARM_LINK_LEN * cum.cos();
        y += ARM_LINK_LEN * cum.sin();
    }
    Ok([x, y])
}

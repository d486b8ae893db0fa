use super::{validate_action, EnvSpec, Environment, Step};
use crate::error::Result;

const DT: f64 = 0.05;
const POS_LIMIT: f64 = 2.0;
const VEL_LIMIT: f64 = 1.0;

/// 2-D point mass under acceleration control. Walls at ±2 clamp position
/// and zero the normal velocity. Observation (px, py, vx, vy).
pub struct PointMass2D {
    spec: EnvSpec,
    pos: [f64; 2],
    vel: [f64; 2],
    step_count: u32,
    lifetime_steps: u64,
}

impl PointMass2D {
    pub fn new(max_episode_steps: Option<u32>) -> Self {
        Self {
            spec: EnvSpec {
                name: "pointmass",
                obs_dim: 4,
                act_dim: 2,
                action_low: vec![-1.0, -1.0],
                action_high: vec![1.0, 1.0],
                max_episode_steps: max_episode_steps.unwrap_or(200),
                dt: DT,
            },
            pos: [0.0; 2],
            vel: [0.0; 2],
            step_count: 0,
            lifetime_steps: 0,
        }
    }

    fn obs(&self) -> Vec<f64> {
        vec![self.pos[0], self.pos[1], self.vel[0], self.vel[1]]
    }
}

impl Environment for PointMass2D {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self) -> Vec<f64> {
        self.pos = [0.0; 2];
        self.vel = [0.0; 2];
        self.step_count = 0;
        self.obs()
    }

    fn step(&mut self, action: &[f64]) -> Result<Step> {
        let a = validate_action(&self.spec, action)?;
        self.lifetime_steps += 1;
        for d in 0..2 {
            self.vel[d] = (self.vel[d] + a[d] * DT).clamp(-VEL_LIMIT, VEL_LIMIT);
            self.pos[d] += self.vel[d] * DT;
            if self.pos[d] > POS_LIMIT {
                self.pos[d] = POS_LIMIT;
                self.vel[d] = 0.0;
            } else if self.pos[d] < -POS_LIMIT {
                self.pos[d] = -POS_LIMIT;
                self.vel[d] = 0.0;
            }
        }
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
        (
            vec![-POS_LIMIT, -POS_LIMIT, -VEL_LIMIT, -VEL_LIMIT],
            vec![POS_LIMIT, POS_LIMIT, VEL_LIMIT, VEL_LIMIT],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reset_is_the_origin() {
        let mut env = PointMass2D::new(None);
        assert_eq!(env.reset(), vec![0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn one_step_from_rest_matches_hand_integration() {
        // v = clip(0 + 1*0.05) = 0.05, p = 0 + 0.05*0.05 = 0.0025.
        let mut env = PointMass2D::new(None);
        env.reset();
        let s = env.step(&[1.0, 0.0]).unwrap();
        assert!((s.obs[0] - 0.0025).abs() < 1e-15);
        assert_eq!(s.obs[1], 0.0);
        assert!((s.obs[2] - 0.05).abs() < 1e-15);
        assert_eq!(s.obs[3], 0.0);
    }

    #[test]
    fn walls_clamp_position_and_zero_velocity() {
        let mut env = PointMass2D::new(Some(10_000));
        env.reset();
        for _ in 0..1000 {
            env.step(&[1.0, 0.0]).unwrap();
        }
        let s = env.step(&[1.0, 0.0]).unwrap();
        assert_eq!(s.obs[0], 2.0);
        assert_eq!(s.obs[2], 0.0);
    }

    #[test]
    fn timeout_fires_exactly_at_the_limit() {
        let mut env = PointMass2D::new(Some(3));
        env.reset();
        for i in 1..=3 {
            let s = env.step(&[0.0, 0.0]).unwrap();
            assert_eq!(s.done, i == 3);
            assert_eq!(s.timeout, i == 3);
        }
    }
}

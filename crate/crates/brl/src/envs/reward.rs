use super::planar_arm::forward_kinematics;
use crate::error::{Error, Result};

/// State-dependent task reward, applied to observations only at offline
/// training and evaluation time. Pure and stateless.
#[derive(Debug, Clone, PartialEq)]
pub enum TaskReward {
    /// −‖p − goal‖ on PointMass2D.
    PointGoal { goal: [f64; 2] },
    /// cos θ on Pendulum.
    Upright,
    /// −‖fk(θ) − target‖ on PlanarArm.
    TooltipReach { target: [f64; 2] },
    /// Forward velocity vx on PointMass2D.
    Velocity,
}

impl TaskReward {
    /// Parses the CLI syntax `name:param,param`, e.g. `point-goal:0,0`.
    pub fn parse(s: &str) -> Result<Self> {
        let (name, params) = match s.split_once(':') {
            Some((n, p)) => (n, Some(p)),
            None => (s, None),
        };
        let parse_pair = |p: Option<&str>| -> Result<[f64; 2]> {
            let p = p.ok_or_else(|| {
                Error::Config(format!("reward '{name}' needs two parameters, e.g. {name}:0,0"))
            })?;
            let parts: Vec<&str> = p.split(',').collect();
            if parts.len() != 2 {
                return Err(Error::Config(format!(
                    "reward '{name}' needs exactly two parameters, got '{p}'"
                )));
            }
            let x: f64 = parts[0]
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad reward parameter '{}'", parts[0])))?;
            let y: f64 = parts[1]
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad reward parameter '{}'", parts[1])))?;
            Ok([x, y])
        };
        match name {
            "point-goal" => Ok(TaskReward::PointGoal {
                goal: parse_pair(params)?,
            }),
            "upright" => Ok(TaskReward::Upright),
            "tooltip-reach" => Ok(TaskReward::TooltipReach {
                target: parse_pair(params)?,
            }),
            "velocity" => Ok(TaskReward::Velocity),
            _ => Err(Error::Config(format!(
                "unknown reward '{name}' (expected point-goal | upright | tooltip-reach | velocity)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TaskReward::PointGoal { .. } => "point-goal",
            TaskReward::Upright => "upright",
            TaskReward::TooltipReach { .. } => "tooltip-reach",
            TaskReward::Velocity => "velocity",
        }
    }

    /// Canonical `name:params` string (the parseable inverse of `parse`).
    pub fn spec_string(&self) -> String {
        match self {
            TaskReward::PointGoal { goal } => format!("point-goal:{},{}", goal[0], goal[1]),
            TaskReward::Upright => "upright".to_string(),
            TaskReward::TooltipReach { target } => {
                format!("tooltip-reach:{},{}", target[0], target[1])
            }
            TaskReward::Velocity => "velocity".to_string(),
        }
    }

    /// Environment this reward is defined on.
    pub fn env_name(&self) -> &'static str {
        match self {
            TaskReward::PointGoal { .. } | TaskReward::Velocity => "pointmass",
            TaskReward::Upright => "pendulum",
            TaskReward::TooltipReach { .. } => "planararm",
        }
    }

    fn expected_obs_dim(&self) -> usize {
        match self {
            TaskReward::PointGoal { .. } | TaskReward::Velocity => 4,
            TaskReward::Upright => 3,
            TaskReward::TooltipReach { .. } => 14,
        }
    }

    /// Pure observation → reward map.
    pub fn eval(&self, obs: &[f64]) -> Result<f64> {
        if obs.len() != self.expected_obs_dim() {
            return Err(Error::InputShape(format!(
                "reward '{}' expects observations of length {}, got {}",
                self.name(),
                self.expected_obs_dim(),
                obs.len()
            )));
        }
        Ok(match self {
            TaskReward::PointGoal { goal } => {
                -((obs[0] - goal[0]).powi(2) + (obs[1] - goal[1]).powi(2)).sqrt()
            }
            TaskReward::Upright => obs[0],
            TaskReward::TooltipReach { target } => {
                let tip = forward_kinematics(&obs[..7])?;
                -((tip[0] - target[0]).powi(2) + (tip[1] - target[1]).powi(2)).sqrt()
            }
            TaskReward::Velocity => obs[2],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_goal_at_goal_is_zero() {
        let r = TaskReward::parse("point-goal:0,0").unwrap();
        assert_eq!(r.eval(&[0.0, 0.0, 0.3, -0.4]).unwrap(), 0.0);
    }

    #[test]
    fn point_goal_is_negative_distance() {
        let r = TaskReward::parse("point-goal:0,0").unwrap();
        assert!((r.eval(&[3.0, 4.0, 0.0, 0.0]).unwrap() + 5.0).abs() < 1e-12);
    }

    #[test]
    fn upright_at_zero_angle_is_one() {
        let r = TaskReward::Upright;
        assert_eq!(r.eval(&[1.0, 0.0, 0.0]).unwrap(), 1.0);
    }

    #[test]
    fn tooltip_reach_at_target_is_zero() {
        let home_tip = forward_kinematics(&[0.0; 7]).unwrap();
        let r = TaskReward::TooltipReach { target: home_tip };
        let obs = vec![0.0; 14];
        assert_eq!(r.eval(&obs).unwrap(), 0.0);
    }

    #[test]
    fn unknown_reward_is_a_config_error() {
        assert!(matches!(
            TaskReward::parse("lasers:1,2"),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn spec_string_round_trips() {
        for s in ["point-goal:1,1", "upright", "tooltip-reach:0.7,0.7", "velocity"] {
            let r = TaskReward::parse(s).unwrap();
            assert_eq!(TaskReward::parse(&r.spec_string()).unwrap(), r);
        }
    }
}

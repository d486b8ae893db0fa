use crate::envs::{forward_kinematics, Environment, TaskReward};
use crate::error::{Error, Result};
use crate::offline::OfflinePolicy;
use crate::rng_from_seed;

/// Evaluation summary: per-episode undiscounted returns, and for the
/// planar arm the closest tooltip distance seen in each episode.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub returns: Vec<f64>,
    pub closest_distances: Option<Vec<f64>>,
    pub mean_return: f64,
    pub std_return: f64,
}

impl EvalReport {
    fn from_returns(returns: Vec<f64>, closest: Option<Vec<f64>>) -> Self {
        let n = returns.len() as f64;
        let mean = returns.iter().sum::<f64>() / n;
        let var = returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / n;
        Self {
            mean_return: mean,
            std_return: var.sqrt(),
            returns,
            closest_distances: closest,
        }
    }
}

/// Runs deterministic evaluation episodes, scoring each step's reward at
/// the reached observation. For tooltip-reach on the planar arm the
/// trajectory scan includes the reset pose.
pub fn evaluate(
    policy: &OfflinePolicy,
    env: &mut dyn Environment,
    reward: &TaskReward,
    episodes: u32,
    seed: u64,
) -> Result<EvalReport> {
    if episodes == 0 {
        return Err(Error::Usage("evaluation needs at least one episode".to_string()));
    }
    if reward.env_name() != env.spec().name {
        return Err(Error::Config(format!(
            "reward '{}' is defined on '{}', not '{}'",
            reward.name(),
            reward.env_name(),
            env.spec().name
        )));
    }
    let arm_target = match reward {
        TaskReward::TooltipReach { target } => Some(*target),
        _ => None,
    };
    let mut rng = rng_from_seed(seed);
    let mut returns = Vec::with_capacity(episodes as usize);
    let mut closest = arm_target.map(|_| Vec::with_capacity(episodes as usize));

    for _ in 0..episodes {
        let mut obs = env.reset();
        let mut ep_return = 0.0;
        let mut min_dist = arm_target
            .map(|t| tooltip_distance(&obs, &t))
            .transpose()?;
        loop {
            let action = policy.act(&obs, &mut rng)?;
            let step = env.step(&action)?;
            ep_return += reward.eval(&step.obs)?;
            if let (Some(t), Some(d)) = (arm_target.as_ref(), min_dist.as_mut()) {
                *d = d.min(tooltip_distance(&step.obs, t)?);
            }
            obs = step.obs;
            if step.done {
                break;
            }
        }
        returns.push(ep_return);
        if let (Some(list), Some(d)) = (closest.as_mut(), min_dist) {
            list.push(d);
        }
    }
    Ok(EvalReport::from_returns(returns, closest))
}

fn tooltip_distance(obs: &[f64], target: &[f64; 2]) -> Result<f64> {
    let tip = forward_kinematics(&obs[..7])?;
    Ok(((tip[0] - target[0]).powi(2) + (tip[1] - target[1]).powi(2)).sqrt())
}

//! Diversity Is All You Need: an ensemble of max-entropy skills, each
//! rewarded with the log-probability a shared discriminator assigns to it
//! at the states it visits.

use serde::{Deserialize, Serialize};

use super::sac::{SacConfig, SacLearner};
use crate::dataset::{LabeledBatch, Transition};
use crate::error::{Error, Result};
use crate::tensor::{Activation, AdamState, Mlp, Tape};
use crate::Rng;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DiaynConfig {
    pub n_skills: usize,
    pub disc_hidden: Vec<usize>,
    pub disc_lr: f64,
    pub sac: SacConfig,
}

impl Default for DiaynConfig {
    fn default() -> Self {
        Self {
            n_skills: 8,
            disc_hidden: vec![32, 32],
            disc_lr: 1e-3,
            sac: SacConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DiaynLosses {
    pub discriminator: f64,
    pub mean_critic: f64,
    pub mean_policy: f64,
}

pub struct SkillEnsemble {
    pub skills: Vec<SacLearner>,
    discriminator: Mlp,
    disc_adam: AdamState,
    n_skills: usize,
}

impl SkillEnsemble {
    pub fn new(obs_dim: usize, low: &[f64], high: &[f64], cfg: &DiaynConfig, rng: &mut Rng) -> Self {
        assert!(cfg.n_skills >= 1);
        let mut dims = vec![obs_dim];
        dims.extend_from_slice(&cfg.disc_hidden);
        dims.push(cfg.n_skills);
        let discriminator = Mlp::new(&dims, Activation::Softmax, rng);
        let disc_adam = AdamState::new(discriminator.params().len(), cfg.disc_lr);
        let skills = (0..cfg.n_skills)
            .map(|_| SacLearner::new(obs_dim, low, high, cfg.sac.clone(), rng))
            .collect();
        Self {
            skills,
            discriminator,
            disc_adam,
            n_skills: cfg.n_skills,
        }
    }

    pub fn n_skills(&self) -> usize {
        self.n_skills
    }

    pub fn discriminator(&self) -> &Mlp {
        &self.discriminator
    }

    pub fn discriminator_mut(&mut self) -> &mut Mlp {
        &mut self.discriminator
    }

    /// log P(skill | x): the log of the discriminator's softmax output for
    /// the skill. Always ≤ 0.
    pub fn reward(&self, skill: usize, x: &[f64]) -> Result<f64> {
        if skill >= self.n_skills {
            return Err(Error::Config(format!(
                "skill {skill} out of range (n_skills = {})",
                self.n_skills
            )));
        }
        let p = self.discriminator.forward(x)?;
        Ok(p[skill].max(1e-12).ln().min(0.0))
    }

    /// One cross-entropy step on (state, skill) pairs. Returns the loss.
    pub fn discriminator_update(&mut self, batch: &[(Vec<f64>, usize)]) -> Result<f64> {
        assert!(!batch.is_empty());
        let loss_val;
        {
            let mut tape = Tape::new();
            let dn = tape.register(&mut self.discriminator);
            let mut total = tape.scalar_input(0.0);
            for (x, skill) in batch {
                let xi = tape.input(x);
                let probs = tape.apply(dn, xi);
                let p = tape.pick(probs, *skill);
                let lp = tape.ln(p);
                total = tape.add(total, lp);
            }
            let loss = tape.scale(total, -1.0 / batch.len() as f64);
            loss_val = tape.scalar(loss);
            tape.backward(loss)?;
        }
        self.disc_adam.apply(self.discriminator.params_mut())?;
        Ok(loss_val)
    }

    /// Full DIAYN step: one discriminator update on the batch, then one
    /// max-entropy actor-critic step for every skill that has entries,
    /// each on its own sub-batch only. Rewards come from the current
    /// discriminator at the next observation.
    pub fn update(&mut self, batch: &[(Transition, usize)], rng: &mut Rng) -> Result<DiaynLosses> {
        assert!(!batch.is_empty());
        let disc_batch: Vec<(Vec<f64>, usize)> = batch
            .iter()
            .map(|(t, k)| (t.next_obs.clone(), *k))
            .collect();
        let disc_loss = self.discriminator_update(&disc_batch)?;

        let mut critic_sum = 0.0;
        let mut policy_sum = 0.0;
        let mut updated = 0;
        for k in 0..self.n_skills {
            let sub: Vec<&Transition> = batch
                .iter()
                .filter(|(_, skill)| *skill == k)
                .map(|(t, _)| t)
                .collect();
            if sub.is_empty() {
                continue;
            }
            let mut lb = LabeledBatch {
                obs: Vec::with_capacity(sub.len()),
                action: Vec::with_capacity(sub.len()),
                reward: Vec::with_capacity(sub.len()),
                next_obs: Vec::with_capacity(sub.len()),
                not_done: Vec::with_capacity(sub.len()),
            };
            for t in sub {
                lb.obs.push(t.obs.clone());
                lb.action.push(t.action.clone());
                lb.reward.push(self.reward(k, &t.next_obs)?);
                lb.next_obs.push(t.next_obs.clone());
                lb.not_done
                    .push(if t.done && !t.timeout { 0.0 } else { 1.0 });
            }
            let losses = self.skills[k].update(&lb, rng)?;
            critic_sum += losses.critic;
            policy_sum += losses.policy;
            updated += 1;
        }
        let n = updated.max(1) as f64;
        Ok(DiaynLosses {
            discriminator: disc_loss,
            mean_critic: critic_sum / n,
            mean_policy: policy_sum / n,
        })
    }
}

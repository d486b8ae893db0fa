//! Shared max-entropy actor-critic learner (the policy trainer behind the
//! RND and DIAYN explorers). Twin critics bootstrap from their minimum
//! with an entropy bonus; the policy ascends min-Q minus entropy cost.

use serde::{Deserialize, Serialize};

use super::policy::StochasticPolicy;
use crate::dataset::LabeledBatch;
use crate::error::Result;
use crate::tensor::{Activation, AdamState, Mlp, Tape};
use crate::Rng;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SacConfig {
    pub gamma: f64,
    pub tau: f64,
    /// Fixed entropy weight.
    pub alpha: f64,
    pub lr: f64,
    pub batch_size: usize,
    pub hidden: Vec<usize>,
    /// Minimum buffered transitions before updates start.
    pub warmup: usize,
}

impl Default for SacConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            tau: 0.005,
            alpha: 0.2,
            lr: 3e-4,
            batch_size: 256,
            hidden: vec![32, 32],
            warmup: 500,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SacLosses {
    pub critic: f64,
    pub policy: f64,
}

pub struct SacLearner {
    pub policy: StochasticPolicy,
    q1: Mlp,
    q2: Mlp,
    q1_target: Mlp,
    q2_target: Mlp,
    adam_policy: AdamState,
    adam_q1: AdamState,
    adam_q2: AdamState,
    cfg: SacConfig,
}

impl SacLearner {
    pub fn new(obs_dim: usize, low: &[f64], high: &[f64], cfg: SacConfig, rng: &mut Rng) -> Self {
        let act_dim = low.len();
        let mut qdims = vec![obs_dim + act_dim];
        qdims.extend_from_slice(&cfg.hidden);
        qdims.push(1);
        let policy = StochasticPolicy::new(obs_dim, &cfg.hidden, low, high, rng);
        let q1 = Mlp::new(&qdims, Activation::Identity, rng);
        let q2 = Mlp::new(&qdims, Activation::Identity, rng);
        let q1_target = q1.clone();
        let q2_target = q2.clone();
        let adam_policy = AdamState::new(policy.net().params().len(), cfg.lr);
        let adam_q1 = AdamState::new(q1.params().len(), cfg.lr);
        let adam_q2 = AdamState::new(q2.params().len(), cfg.lr);
        Self {
            policy,
            q1,
            q2,
            q1_target,
            q2_target,
            adam_policy,
            adam_q1,
            adam_q2,
            cfg,
        }
    }

    pub fn cfg(&self) -> &SacConfig {
        &self.cfg
    }

    pub fn critics(&self) -> (&Mlp, &Mlp) {
        (&self.q1, &self.q2)
    }

    pub fn critic_value(&self, obs: &[f64], action: &[f64]) -> Result<f64> {
        let mut input = obs.to_vec();
        input.extend_from_slice(action);
        Ok(self.q1.forward(&input)?[0].min(self.q2.forward(&input)?[0]))
    }

    /// One critic regression step plus one policy step plus a polyak blend.
    /// Rewards in the batch are the caller's intrinsic rewards, recomputed
    /// at update time.
    pub fn update(&mut self, batch: &LabeledBatch, rng: &mut Rng) -> Result<SacLosses> {
        let b = batch.len();
        assert!(b > 0, "sac update requires a non-empty batch");

        // Targets: r + γ·not_done·(min Q'(x',a') − α·log p(a'|x')).
        let mut targets = Vec::with_capacity(b);
        for i in 0..b {
            let x2 = &batch.next_obs[i];
            let (a2, logp2) = self.policy.sample(x2, rng)?;
            let mut input = x2.clone();
            input.extend_from_slice(&a2);
            let q1 = self.q1_target.forward(&input)?[0];
            let q2 = self.q2_target.forward(&input)?[0];
            let soft = q1.min(q2) - self.cfg.alpha * logp2;
            targets.push(batch.reward[i] + self.cfg.gamma * batch.not_done[i] * soft);
        }

        // Critic regression on both nets in one tape.
        let critic_loss;
        {
            let mut tape = Tape::new();
            let q1n = tape.register(&mut self.q1);
            let q2n = tape.register(&mut self.q2);
            let mut total = tape.scalar_input(0.0);
            for i in 0..b {
                let mut input = batch.obs[i].clone();
                input.extend_from_slice(&batch.action[i]);
                let x = tape.input(&input);
                let p1 = tape.apply(q1n, x);
                let p2 = tape.apply(q2n, x);
                let e1 = tape.sq_err(p1, &[targets[i]]);
                let e2 = tape.sq_err(p2, &[targets[i]]);
                let e = tape.add(e1, e2);
                total = tape.add(total, e);
            }
            let loss = tape.scale(total, 1.0 / (2.0 * b as f64));
            critic_loss = tape.scalar(loss);
            tape.backward(loss)?;
        }
        self.adam_q1.apply(self.q1.params_mut())?;
        self.adam_q2.apply(self.q2.params_mut())?;

        // Policy: ascend min Q(x, a~π) − α·log p.
        let policy_loss;
        {
            let squash = self.policy.squash().clone();
            let alpha = self.cfg.alpha;
            let act_dim = squash.act_dim();
            use rand_distr::StandardNormal;
            use rand::Rng as _;
            let eps_draws: Vec<Vec<f64>> = (0..b)
                .map(|_| (0..act_dim).map(|_| rng.sample(StandardNormal)).collect())
                .collect();

            let mut tape = Tape::new();
            let pn = tape.register(self.policy.net_mut());
            let q1n = tape.register(&mut self.q1);
            let q2n = tape.register(&mut self.q2);
            let mut total = tape.scalar_input(0.0);
            for i in 0..b {
                let x = tape.input(&batch.obs[i]);
                let (a, logp) = squash.tape_sample(&mut tape, pn, x, &eps_draws[i]);
                let xa = tape.concat(x, a);
                let v1 = tape.apply(q1n, xa);
                let v2 = tape.apply(q2n, xa);
                let qmin = if tape.value(v1)[0] <= tape.value(v2)[0] {
                    v1
                } else {
                    v2
                };
                let ent_cost = tape.scale(logp, alpha);
                let term = tape.sub(ent_cost, qmin);
                total = tape.add(total, term);
            }
            let loss = tape.scale(total, 1.0 / b as f64);
            policy_loss = tape.scalar(loss);
            tape.backward(loss)?;
        }
        self.adam_policy.apply(self.policy.net_mut().params_mut())?;

        self.q1_target.polyak_from(&self.q1, self.cfg.tau);
        self.q2_target.polyak_from(&self.q2, self.cfg.tau);

        Ok(SacLosses {
            critic: critic_loss,
            policy: policy_loss,
        })
    }
}

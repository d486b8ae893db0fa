//! Self-Supervised Exploration: a pair of forward models trained on
//! disjoint minibatch halves, a termination predictor, and a stochastic
//! policy trained by backpropagating through imagined model rollouts that
//! score model disagreement plus entropy.

use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::policy::StochasticPolicy;
use crate::dataset::Transition;
use crate::error::{Error, Result};
use crate::tensor::{Activation, AdamState, Mlp, Tape};
use crate::Rng;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SseConfig {
    /// Imagined rollout length.
    pub horizon: usize,
    pub gamma: f64,
    pub hidden: Vec<usize>,
    pub model_lr: f64,
    pub done_lr: f64,
    pub policy_lr: f64,
    pub batch_size: usize,
    pub warmup: usize,
    /// Start states per policy rollout step (capped by the batch).
    pub rollout_starts: usize,
}

impl Default for SseConfig {
    fn default() -> Self {
        Self {
            horizon: 5,
            gamma: 0.99,
            hidden: vec![32, 32],
            model_lr: 1e-3,
            done_lr: 1e-3,
            policy_lr: 3e-4,
            batch_size: 128,
            warmup: 500,
            rollout_starts: 16,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SseLosses {
    pub model1: f64,
    pub model2: f64,
    pub done_bce: f64,
    pub rollout_value: f64,
}

/// Per-(start, step, action-dim) standard-normal draws for a rollout, so
/// the same plan can be replayed for gradient checks.
pub type RolloutNoise = Vec<Vec<Vec<f64>>>;

pub fn draw_rollout_noise(
    n_starts: usize,
    horizon: usize,
    act_dim: usize,
    rng: &mut Rng,
) -> RolloutNoise {
    use rand::Rng as _;
    (0..n_starts)
        .map(|_| {
            (0..horizon)
                .map(|_| (0..act_dim).map(|_| rng.sample(StandardNormal)).collect())
                .collect()
        })
        .collect()
}

pub struct SseModels {
    pub f1: Mlp,
    pub f2: Mlp,
    pub f_done: Mlp,
    pub policy: StochasticPolicy,
    adam_f1: AdamState,
    adam_f2: AdamState,
    adam_done: AdamState,
    adam_policy: AdamState,
    pub horizon: usize,
    pub gamma: f64,
}

impl SseModels {
    pub fn new(obs_dim: usize, low: &[f64], high: &[f64], cfg: &SseConfig, rng: &mut Rng) -> Self {
        assert!(cfg.horizon >= 1, "rollout horizon must be >= 1");
        assert!((0.0..1.0).contains(&cfg.gamma));
        let act_dim = low.len();
        let mut fdims = vec![obs_dim + act_dim];
        fdims.extend_from_slice(&cfg.hidden);
        fdims.push(obs_dim);
        let mut ddims = vec![obs_dim];
        ddims.extend_from_slice(&cfg.hidden);
        ddims.push(1);
        // Independent initial parameters for the pair.
        let f1 = Mlp::new(&fdims, Activation::Identity, rng);
        let f2 = Mlp::new(&fdims, Activation::Identity, rng);
        let f_done = Mlp::new(&ddims, Activation::Sigmoid, rng);
        let policy = StochasticPolicy::new(obs_dim, &cfg.hidden, low, high, rng);
        Self {
            adam_f1: AdamState::new(f1.params().len(), cfg.model_lr),
            adam_f2: AdamState::new(f2.params().len(), cfg.model_lr),
            adam_done: AdamState::new(f_done.params().len(), cfg.done_lr),
            adam_policy: AdamState::new(policy.net().params().len(), cfg.policy_lr),
            f1,
            f2,
            f_done,
            policy,
            horizon: cfg.horizon,
            gamma: cfg.gamma,
        }
    }

    /// Model-disagreement reward ‖f1(x,a) − f2(x,a)‖. Symmetric in the
    /// pair, non-negative, zero iff the predictions coincide.
    pub fn reward(&self, x: &[f64], a: &[f64]) -> Result<f64> {
        let mut input = x.to_vec();
        input.extend_from_slice(a);
        let p1 = self.f1.forward(&input)?;
        let p2 = self.f2.forward(&input)?;
        Ok(p1
            .iter()
            .zip(&p2)
            .map(|(u, v)| (u - v) * (u - v))
            .sum::<f64>()
            .sqrt())
    }

    /// The rollout objective V: for each start, roll the policy through
    /// the mean model for `horizon` steps, discounting by γ^t and a
    /// survival product Π(1 − f_done), scoring disagreement minus log
    /// probability. Plain-math evaluation (no gradients).
    pub fn rollout_value(&self, starts: &[Vec<f64>], noise: &RolloutNoise) -> Result<f64> {
        if starts.is_empty() {
            return Err(Error::InputShape("rollout needs at least one start".into()));
        }
        let squash = self.policy.squash().clone();
        let act_dim = squash.act_dim();
        let mut total = 0.0;
        for (b, x0) in starts.iter().enumerate() {
            let mut x = x0.clone();
            let mut survival = 1.0;
            let mut v = 0.0;
            for t in 0..self.horizon {
                let d = self.f_done.forward(&x)?[0];
                survival *= 1.0 - d;
                let out = self.policy.net().forward(&x)?;
                let mut action = vec![0.0; act_dim];
                let mut logp = 0.0;
                for k in 0..act_dim {
                    let mu = out[k];
                    let logstd = out[act_dim + k]
                        .clamp(super::policy::LOG_STD_MIN, super::policy::LOG_STD_MAX);
                    let eps = noise[b][t][k];
                    let raw = mu + logstd.exp() * eps;
                    let tv = raw.tanh();
                    action[k] = squash.center[k] + squash.half[k] * tv;
                    logp += -0.5 * eps * eps
                        - 0.918_938_533_204_672_7
                        - squash.half[k].ln()
                        - logstd
                        - (1.0 - tv * tv + 1e-6).ln();
                }
                let mut input = x.clone();
                input.extend_from_slice(&action);
                let p1 = self.f1.forward(&input)?;
                let p2 = self.f2.forward(&input)?;
                let r = p1
                    .iter()
                    .zip(&p2)
                    .map(|(u, v)| (u - v) * (u - v))
                    .sum::<f64>()
                    .sqrt();
                v += self.gamma.powi(t as i32) * survival * (r - logp);
                x = p1.iter().zip(&p2).map(|(u, v)| 0.5 * (u + v)).collect();
            }
            total += v;
        }
        if !total.is_finite() {
            return Err(Error::Divergence {
                step: 0,
                what: "non-finite rollout value".to_string(),
            });
        }
        Ok(total / starts.len() as f64)
    }

    /// Rollout value and its gradient with respect to the policy
    /// parameters (backprop through the imagined trajectory). The
    /// gradient is left in the policy net's grad buffer.
    pub fn rollout_grad(&mut self, starts: &[Vec<f64>], noise: &RolloutNoise) -> Result<f64> {
        if starts.is_empty() {
            return Err(Error::InputShape("rollout needs at least one start".into()));
        }
        let squash = self.policy.squash().clone();
        let horizon = self.horizon;
        let gamma = self.gamma;

        let mut tape = Tape::new();
        let pn = tape.register(self.policy.net_mut());
        let f1n = tape.register(&mut self.f1);
        let f2n = tape.register(&mut self.f2);
        let dn = tape.register(&mut self.f_done);
        let mut total = tape.scalar_input(0.0);
        for (b, x0) in starts.iter().enumerate() {
            let mut x = tape.input(x0);
            let mut survival = tape.scalar_input(1.0);
            for t in 0..horizon {
                let d = tape.apply(dn, x);
                let neg_d = tape.scale(d, -1.0);
                let alive = tape.add_const(neg_d, 1.0);
                survival = tape.mul(survival, alive);
                let (a, logp) = squash.tape_sample(&mut tape, pn, x, &noise[b][t]);
                let xa = tape.concat(x, a);
                let p1 = tape.apply(f1n, xa);
                let p2 = tape.apply(f2n, xa);
                let diff = tape.sub(p1, p2);
                let r = tape.norm(diff);
                let gain = tape.sub(r, logp);
                let masked = tape.mul(gain, survival);
                let term = tape.scale(masked, gamma.powi(t as i32));
                total = tape.add(total, term);
                let sum = tape.add(p1, p2);
                x = tape.scale(sum, 0.5);
            }
        }
        let v = tape.scale(total, 1.0 / starts.len() as f64);
        let value = tape.scalar(v);
        // Ascend: backprop from −V so the grad buffer holds d(−V)/dθ.
        let loss = tape.scale(v, -1.0);
        tape.backward(loss)?;
        Ok(value)
    }

    /// One SSE training step: each forward model regresses its half of
    /// the batch, the termination model takes a BCE step on
    /// failure-done labels, and the policy ascends the rollout value
    /// from batch states.
    pub fn update(
        &mut self,
        batch: &[Transition],
        rollout_starts: usize,
        rng: &mut Rng,
    ) -> Result<SseLosses> {
        assert!(!batch.is_empty());
        let half = batch.len() / 2;
        let (h1, h2) = batch.split_at(half.max(1).min(batch.len()));

        let (model1, model2);
        {
            let mut tape = Tape::new();
            let f1n = tape.register(&mut self.f1);
            let f2n = tape.register(&mut self.f2);
            let mut l1 = tape.scalar_input(0.0);
            for t in h1 {
                let mut input = t.obs.clone();
                input.extend_from_slice(&t.action);
                let x = tape.input(&input);
                let p = tape.apply(f1n, x);
                let e = tape.sq_err(p, &t.next_obs);
                l1 = tape.add(l1, e);
            }
            let loss1 = tape.scale(l1, 1.0 / h1.len().max(1) as f64);
            let mut l2 = tape.scalar_input(0.0);
            for t in h2 {
                let mut input = t.obs.clone();
                input.extend_from_slice(&t.action);
                let x = tape.input(&input);
                let p = tape.apply(f2n, x);
                let e = tape.sq_err(p, &t.next_obs);
                l2 = tape.add(l2, e);
            }
            let loss2 = tape.scale(l2, 1.0 / h2.len().max(1) as f64);
            model1 = tape.scalar(loss1);
            model2 = tape.scalar(loss2);
            let loss = tape.add(loss1, loss2);
            tape.backward(loss)?;
        }
        self.adam_f1.apply(self.f1.params_mut())?;
        self.adam_f2.apply(self.f2.params_mut())?;

        let done_bce = self.done_update(batch)?;

        let n_starts = rollout_starts.min(batch.len()).max(1);
        let starts: Vec<Vec<f64>> = batch[..n_starts].iter().map(|t| t.obs.clone()).collect();
        let act_dim = self.policy.act_dim();
        let noise = draw_rollout_noise(n_starts, self.horizon, act_dim, rng);
        let value = self.rollout_grad(&starts, &noise)?;
        self.adam_policy.apply(self.policy.net_mut().params_mut())?;

        Ok(SseLosses {
            model1,
            model2,
            done_bce,
            rollout_value: value,
        })
    }

    /// Binary cross-entropy step for the termination model on
    /// failure-done labels (timeouts are not environment terminations).
    pub fn done_update(&mut self, batch: &[Transition]) -> Result<f64> {
        let loss_val;
        {
            let mut tape = Tape::new();
            let dn = tape.register(&mut self.f_done);
            let mut total = tape.scalar_input(0.0);
            for t in batch {
                let x = tape.input(&t.next_obs);
                let p = tape.apply(dn, x);
                let y = (t.done && !t.timeout) as u8 as f64;
                // −[y ln p + (1−y) ln(1−p)]
                let ln_p = tape.ln(p);
                let neg_p = tape.scale(p, -1.0);
                let one_minus = tape.add_const(neg_p, 1.0);
                let ln_1mp = tape.ln(one_minus);
                let a = tape.scale(ln_p, y);
                let b = tape.scale(ln_1mp, 1.0 - y);
                let s = tape.add(a, b);
                total = tape.add(total, s);
            }
            let loss = tape.scale(total, -1.0 / batch.len() as f64);
            loss_val = tape.scalar(loss);
            tape.backward(loss)?;
        }
        self.adam_done.apply(self.f_done.params_mut())?;
        Ok(loss_val)
    }
}

/// One-step prediction-error reward ‖x' − model(x,a)‖ — the reference
/// intrinsic signal SSE's disagreement proxy replaces.
pub fn intrinsic_pred_error_reward(
    model: &Mlp,
    x: &[f64],
    a: &[f64],
    next_x: &[f64],
) -> Result<f64> {
    let mut input = x.to_vec();
    input.extend_from_slice(a);
    let pred = model.forward(&input)?;
    if pred.len() != next_x.len() {
        return Err(Error::InputShape(format!(
            "model predicts {} dims, next state has {}",
            pred.len(),
            next_x.len()
        )));
    }
    Ok(pred
        .iter()
        .zip(next_x)
        .map(|(p, t)| (p - t) * (p - t))
        .sum::<f64>()
        .sqrt())
}

//! Squashed-Gaussian stochastic policy.
//!
//! The net emits per-dimension mean and log-std; samples are squashed by
//! tanh and mapped affinely into the action bounds. Log-probabilities
//! include the tanh and affine corrections.

use rand_distr::StandardNormal;

use crate::error::Result;
use crate::tensor::{Activation, Mlp, NetId, NodeId, Tape};
use crate::Rng;

pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 2.0;
const SQUASH_EPS: f64 = 1e-6;
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_7;

/// Per-dimension affine map from tanh output to action bounds.
#[derive(Debug, Clone)]
pub struct SquashSpec {
    pub center: Vec<f64>,
    pub half: Vec<f64>,
}

impl SquashSpec {
    pub fn from_bounds(low: &[f64], high: &[f64]) -> Self {
        assert_eq!(low.len(), high.len());
        assert!(low.iter().zip(high).all(|(l, h)| l < h));
        Self {
            center: low.iter().zip(high).map(|(l, h)| 0.5 * (l + h)).collect(),
            half: low.iter().zip(high).map(|(l, h)| 0.5 * (h - l)).collect(),
        }
    }

    pub fn act_dim(&self) -> usize {
        self.center.len()
    }

    /// Differentiable reparameterized sample on the tape. `eps` holds one
    /// standard-normal draw per action dimension. Returns (action, log-prob).
    pub fn tape_sample(
        &self,
        tape: &mut Tape,
        net: NetId,
        obs: NodeId,
        eps: &[f64],
    ) -> (NodeId, NodeId) {
        let a = self.act_dim();
        debug_assert_eq!(eps.len(), a);
        let out = tape.apply(net, obs);
        let mu = tape.slice(out, 0, a);
        let logstd_raw = tape.slice(out, a, a);
        let logstd = tape.clamp(logstd_raw, LOG_STD_MIN, LOG_STD_MAX);
        let std = tape.exp(logstd);
        let noise = tape.input(eps);
        let sigma_eps = tape.mul(std, noise);
        let raw = tape.add(mu, sigma_eps);
        let t = tape.tanh(raw);
        let scaled = tape.mul_const_vec(t, &self.half);
        let action = tape.add_const_vec(scaled, &self.center);

        // log p(a) = Σ −½ε² − ½ln2π − ln(half) − logstd − ln(1 − tanh² + eps)
        let const_part: Vec<f64> = eps
            .iter()
            .zip(&self.half)
            .map(|(e, h)| -0.5 * e * e - HALF_LN_2PI - h.ln())
            .collect();
        let base = tape.input(&const_part);
        let v1 = tape.sub(base, logstd);
        let t2 = tape.mul(t, t);
        let neg_t2 = tape.scale(t2, -1.0);
        let one_minus = tape.add_const(neg_t2, 1.0 + SQUASH_EPS);
        let corr = tape.ln(one_minus);
        let v = tape.sub(v1, corr);
        let logp = tape.sum(v);
        (action, logp)
    }
}

#[derive(Debug, Clone)]
pub struct StochasticPolicy {
    net: Mlp,
    squash: SquashSpec,
}

impl StochasticPolicy {
    pub fn new(
        obs_dim: usize,
        hidden: &[usize],
        low: &[f64],
        high: &[f64],
        rng: &mut Rng,
    ) -> Self {
        let act_dim = low.len();
        let mut dims = vec![obs_dim];
        dims.extend_from_slice(hidden);
        dims.push(2 * act_dim);
        Self {
            net: Mlp::new(&dims, Activation::Identity, rng),
            squash: SquashSpec::from_bounds(low, high),
        }
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn net_mut(&mut self) -> &mut Mlp {
        &mut self.net
    }

    pub fn squash(&self) -> &SquashSpec {
        &self.squash
    }

    pub fn act_dim(&self) -> usize {
        self.squash.act_dim()
    }

    fn mean_logstd(&self, obs: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let out = self.net.forward(obs)?;
        let a = self.act_dim();
        let mu = out[..a].to_vec();
        let logstd = out[a..]
            .iter()
            .map(|v| v.clamp(LOG_STD_MIN, LOG_STD_MAX))
            .collect();
        Ok((mu, logstd))
    }

    /// Reparameterized sample with its log-probability.
    pub fn sample(&self, obs: &[f64], rng: &mut Rng) -> Result<(Vec<f64>, f64)> {
        use rand::Rng as _;
        let (mu, logstd) = self.mean_logstd(obs)?;
        let a = self.act_dim();
        let mut action = vec![0.0; a];
        let mut logp = 0.0;
        for d in 0..a {
            let eps: f64 = rng.sample(StandardNormal);
            let raw = mu[d] + logstd[d].exp() * eps;
            let t = raw.tanh();
            let lo = self.squash.center[d] - self.squash.half[d];
            let hi = self.squash.center[d] + self.squash.half[d];
            action[d] = (self.squash.center[d] + self.squash.half[d] * t).clamp(lo, hi);
            logp += -0.5 * eps * eps - HALF_LN_2PI - self.squash.half[d].ln()
                - logstd[d]
                - (1.0 - t * t + SQUASH_EPS).ln();
        }
        Ok((action, logp))
    }

    /// Deterministic action at the distribution mean.
    pub fn mean_action(&self, obs: &[f64]) -> Result<Vec<f64>> {
        let (mu, _) = self.mean_logstd(obs)?;
        Ok(mu
            .iter()
            .enumerate()
            .map(|(d, m)| {
                let t = m.tanh();
                let lo = self.squash.center[d] - self.squash.half[d];
                let hi = self.squash.center[d] + self.squash.half[d];
                (self.squash.center[d] + self.squash.half[d] * t).clamp(lo, hi)
            })
            .collect())
    }

    /// Log-density of an arbitrary in-bounds action.
    pub fn log_prob(&self, obs: &[f64], action: &[f64]) -> Result<f64> {
        let (mu, logstd) = self.mean_logstd(obs)?;
        let mut logp = 0.0;
        for d in 0..self.act_dim() {
            let t = ((action[d] - self.squash.center[d]) / self.squash.half[d])
                .clamp(-1.0 + 1e-9, 1.0 - 1e-9);
            let raw = t.atanh();
            let z = (raw - mu[d]) / logstd[d].exp();
            logp += -0.5 * z * z - HALF_LN_2PI - self.squash.half[d].ln()
                - logstd[d]
                - (1.0 - t * t + SQUASH_EPS).ln();
        }
        Ok(logp)
    }
}

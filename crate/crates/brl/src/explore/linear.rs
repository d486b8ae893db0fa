//! Randomized linear policies: the simplest baseline redraws a fresh
//! affine map every episode.

use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::Rng;

/// Affine state→action map; actions clip to the environment bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearPolicy {
    /// act_dim × obs_dim, row-major.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    obs_dim: usize,
    act_dim: usize,
}

impl LinearPolicy {
    pub fn zeros(obs_dim: usize, act_dim: usize) -> Self {
        Self {
            w: vec![0.0; act_dim * obs_dim],
            b: vec![0.0; act_dim],
            obs_dim,
            act_dim,
        }
    }

    /// Entries i.i.d. Gaussian with the given standard deviation.
    pub fn random(obs_dim: usize, act_dim: usize, sigma: f64, rng: &mut Rng) -> Self {
        use rand::Rng as _;
        let mut p = Self::zeros(obs_dim, act_dim);
        for w in p.w.iter_mut().chain(p.b.iter_mut()) {
            *w = sigma * rng.sample::<f64, _>(StandardNormal);
        }
        p
    }

    /// Returns a copy with i.i.d. Gaussian noise added to every entry.
    pub fn perturbed(&self, sigma: f64, rng: &mut Rng) -> Self {
        use rand::Rng as _;
        let mut p = self.clone();
        for w in p.w.iter_mut().chain(p.b.iter_mut()) {
            *w += sigma * rng.sample::<f64, _>(StandardNormal);
        }
        p
    }

    /// clip(W·x + b, bounds).
    pub fn act(&self, obs: &[f64], low: &[f64], high: &[f64]) -> Vec<f64> {
        debug_assert_eq!(obs.len(), self.obs_dim);
        (0..self.act_dim)
            .map(|o| {
                let mut acc = self.b[o];
                for (w, x) in self.w[o * self.obs_dim..(o + 1) * self.obs_dim]
                    .iter()
                    .zip(obs)
                {
                    acc += w * x;
                }
                acc.clamp(low[o], high[o])
            })
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RandomPoliciesConfig {
    /// Init scale for each episode's fresh policy.
    pub sigma_init: f64,
}

impl Default for RandomPoliciesConfig {
    fn default() -> Self {
        Self { sigma_init: 1.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng_from_seed;

    #[test]
    fn zero_policy_acts_zero() {
        let p = LinearPolicy::zeros(3, 2);
        assert_eq!(p.act(&[5.0, -2.0, 0.1], &[-1.0, -1.0], &[1.0, 1.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn identity_weights_clip_to_bounds() {
        let mut p = LinearPolicy::zeros(2, 2);
        p.w[0] = 1.0;
        p.w[3] = 1.0;
        let a = p.act(&[1.0, 1.0], &[-0.5, -0.5], &[0.5, 0.5]);
        assert_eq!(a, vec![0.5, 0.5]);
    }

    #[test]
    fn redraws_differ_but_are_reproducible() {
        let mut r1 = rng_from_seed(6);
        let a1 = LinearPolicy::random(2, 1, 1.0, &mut r1);
        let b1 = LinearPolicy::random(2, 1, 1.0, &mut r1);
        assert_ne!(a1, b1);

        let mut r2 = rng_from_seed(6);
        let a2 = LinearPolicy::random(2, 1, 1.0, &mut r2);
        let b2 = LinearPolicy::random(2, 1, 1.0, &mut r2);
        assert_eq!(a1, a2);
        assert_eq!(b1, b2);
    }
}

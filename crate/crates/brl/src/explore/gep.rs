//! Goal Exploration Process: bootstrap with randomized linear policies,
//! then repeatedly sample a goal state, find the memory entry whose
//! trajectory descriptor (element-wise state mean) is nearest, and replay
//! a noise-perturbed copy of its policy.

use serde::{Deserialize, Serialize};

use super::linear::LinearPolicy;
use crate::error::{Error, Result};
use crate::Rng;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GepConfig {
    /// Bootstrap episodes with fresh random policies before goal sampling.
    pub bootstrap_target: usize,
    pub sigma_init: f64,
    pub sigma_perturb: f64,
}

impl Default for GepConfig {
    fn default() -> Self {
        Self {
            bootstrap_target: 50,
            sigma_init: 1.0,
            sigma_perturb: 0.1,
        }
    }
}

/// Append-only memory of (policy, trajectory descriptor) pairs.
#[derive(Debug, Clone)]
pub struct GepMemory {
    entries: Vec<(LinearPolicy, Vec<f64>)>,
    pub bootstrap_target: usize,
}

impl GepMemory {
    pub fn new(bootstrap_target: usize) -> Self {
        Self {
            entries: Vec::new(),
            bootstrap_target,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn push(&mut self, policy: LinearPolicy, descriptor: Vec<f64>) {
        self.entries.push((policy, descriptor));
    }

    pub fn descriptors(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.iter().map(|(_, d)| d.as_slice())
    }

    pub fn bootstrapped(&self) -> bool {
        self.entries.len() >= self.bootstrap_target
    }

    /// Index of the entry whose descriptor is nearest the goal
    /// (Euclidean); ties break to the lowest index.
    pub fn nearest(&self, goal: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, (_, d)) in self.entries.iter().enumerate() {
            let dist2: f64 = d.iter().zip(goal).map(|(a, b)| (a - b) * (a - b)).sum();
            match best {
                Some((_, bd)) if dist2 >= bd => {}
                _ => best = Some((i, dist2)),
            }
        }
        best.map(|(i, _)| i)
    }
}

/// Nearest-descriptor selection plus Gaussian perturbation of the stored
/// policy. Errors if called before the bootstrap phase completes.
pub fn gep_select_and_perturb(
    memory: &GepMemory,
    goal: &[f64],
    sigma_perturb: f64,
    rng: &mut Rng,
) -> Result<LinearPolicy> {
    if !memory.bootstrapped() {
        return Err(Error::Phase(format!(
            "GEP selection requires {} bootstrap entries, memory has {}",
            memory.bootstrap_target,
            memory.len()
        )));
    }
    let idx = memory.nearest(goal).expect("bootstrapped memory is non-empty");
    Ok(memory.entries[idx].0.perturbed(sigma_perturb, rng))
}

/// Uniform goal sample within the observed per-dimension state bounds.
/// A collapsed dimension returns its single value.
pub fn gep_sample_goal(lo: &[f64], hi: &[f64], rng: &mut Rng) -> Vec<f64> {
    use rand::Rng as _;
    lo.iter()
        .zip(hi)
        .map(|(l, h)| if h > l { rng.random_range(*l..*h) } else { *l })
        .collect()
}

/// Running per-dimension min/max over every state seen.
#[derive(Debug, Clone)]
pub struct RunningBounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl RunningBounds {
    pub fn new(dim: usize) -> Self {
        Self {
            lo: vec![f64::INFINITY; dim],
            hi: vec![f64::NEG_INFINITY; dim],
        }
    }

    pub fn update(&mut self, x: &[f64]) {
        for (d, v) in x.iter().enumerate() {
            self.lo[d] = self.lo[d].min(*v);
            self.hi[d] = self.hi[d].max(*v);
        }
    }
}

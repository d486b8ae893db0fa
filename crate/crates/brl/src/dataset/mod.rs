//! Immutable transition datasets: collection, bit-exact serialization,
//! uniform batch sampling, retroactive reward relabeling, and the
//! state-coverage diagnostic.

mod coverage;
mod io;

pub use coverage::{coverage, Coverage, PairHistogram};
pub use io::{dataset_read, dataset_write, DatasetSidecar};

use rand::Rng as _;

use crate::envs::TaskReward;
use crate::error::{Error, Result};
use crate::Rng;

/// One (observation, action, next-observation) tuple plus termination
/// flags. `timeout` distinguishes episode-limit cuts from failures;
/// `timeout` implies `done`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub obs: Vec<f64>,
    pub action: Vec<f64>,
    pub next_obs: Vec<f64>,
    pub done: bool,
    pub timeout: bool,
}

/// Provenance carried in the sidecar of every dataset file.
#[derive(Debug, Clone)]
pub struct DatasetMeta {
    pub env: String,
    pub method: String,
    pub seed: u64,
    pub obs_dim: usize,
    pub act_dim: usize,
    pub config_hash: String,
}

/// Ordered transition sequence. Append-only while exploring, immutable
/// once written to disk.
#[derive(Debug, Clone)]
pub struct Dataset {
    meta: DatasetMeta,
    transitions: Vec<Transition>,
}

impl Dataset {
    pub fn new(meta: DatasetMeta) -> Self {
        Self {
            meta,
            transitions: Vec::new(),
        }
    }

    pub fn meta(&self) -> &DatasetMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn get(&self, i: usize) -> &Transition {
        &self.transitions[i]
    }

    /// Appends one transition, validating dimensions against the metadata.
    pub fn push(&mut self, t: Transition) -> Result<()> {
        if t.obs.len() != self.meta.obs_dim
            || t.next_obs.len() != self.meta.obs_dim
            || t.action.len() != self.meta.act_dim
        {
            return Err(Error::Corruption(format!(
                "transition dims (obs {}, act {}, next {}) do not match dataset ({}, {})",
                t.obs.len(),
                t.action.len(),
                t.next_obs.len(),
                self.meta.obs_dim,
                self.meta.act_dim
            )));
        }
        self.transitions.push(t);
        Ok(())
    }
}

/// Uniform i.i.d. index sample over the dataset.
pub fn sample_batch(dataset: &Dataset, batch_size: usize, rng: &mut Rng) -> Result<Vec<usize>> {
    if dataset.is_empty() {
        return Err(Error::Usage("cannot sample from an empty dataset".to_string()));
    }
    if batch_size == 0 {
        return Err(Error::Usage("batch_size must be >= 1".to_string()));
    }
    let n = dataset.len();
    Ok((0..batch_size).map(|_| rng.random_range(0..n)).collect())
}

/// A relabeled minibatch: task rewards computed from next observations,
/// `not_done` masking only failure terminations (timeouts bootstrap).
#[derive(Debug, Clone)]
pub struct LabeledBatch {
    pub obs: Vec<Vec<f64>>,
    pub action: Vec<Vec<f64>>,
    pub reward: Vec<f64>,
    pub next_obs: Vec<Vec<f64>>,
    pub not_done: Vec<f64>,
}

impl LabeledBatch {
    pub fn len(&self) -> usize {
        self.reward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reward.is_empty()
    }
}

/// Checks the reward's environment against the dataset provenance and
/// labels batches on demand.
pub struct Relabeler<'a> {
    dataset: &'a Dataset,
    reward: &'a TaskReward,
}

impl<'a> Relabeler<'a> {
    pub fn new(dataset: &'a Dataset, reward: &'a TaskReward) -> Result<Self> {
        if dataset.meta().env != reward.env_name() {
            return Err(Error::Config(format!(
                "reward '{}' is defined on '{}' but the dataset came from '{}'",
                reward.name(),
                reward.env_name(),
                dataset.meta().env
            )));
        }
        Ok(Self { dataset, reward })
    }

    /// Labels the transitions at the given indices.
    pub fn batch(&self, indices: &[usize]) -> Result<LabeledBatch> {
        let mut out = LabeledBatch {
            obs: Vec::with_capacity(indices.len()),
            action: Vec::with_capacity(indices.len()),
            reward: Vec::with_capacity(indices.len()),
            next_obs: Vec::with_capacity(indices.len()),
            not_done: Vec::with_capacity(indices.len()),
        };
        for &i in indices {
            let t = self.dataset.get(i);
            out.obs.push(t.obs.clone());
            out.action.push(t.action.clone());
            out.reward.push(self.reward.eval(&t.next_obs)?);
            out.next_obs.push(t.next_obs.clone());
            out.not_done.push(if t.done && !t.timeout { 0.0 } else { 1.0 });
        }
        Ok(out)
    }

    /// Sequential full pass in fixed-size chunks (last chunk may be short).
    pub fn stream(&self, batch_size: usize) -> impl Iterator<Item = Result<LabeledBatch>> + '_ {
        let n = self.dataset.len();
        (0..n.div_ceil(batch_size)).map(move |c| {
            let start = c * batch_size;
            let end = (start + batch_size).min(n);
            let idx: Vec<usize> = (start..end).collect();
            self.batch(&idx)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn toy_dataset(env: &str, obs_dim: usize, act_dim: usize) -> Dataset {
        Dataset::new(DatasetMeta {
            env: env.to_string(),
            method: "test".to_string(),
            seed: 0,
            obs_dim,
            act_dim,
            config_hash: "deadbeef".to_string(),
        })
    }

    fn pm_transition(next: [f64; 4], done: bool, timeout: bool) -> Transition {
        Transition {
            obs: vec![0.0; 4],
            action: vec![0.0; 2],
            next_obs: next.to_vec(),
            done,
            timeout,
        }
    }

    #[test]
    fn sampling_a_singleton_always_returns_zero() {
        let mut ds = toy_dataset("pointmass", 4, 2);
        ds.push(pm_transition([0.0; 4], false, false)).unwrap();
        let mut rng = crate::rng_from_seed(0);
        let idx = sample_batch(&ds, 16, &mut rng).unwrap();
        assert!(idx.iter().all(|i| *i == 0));
    }

    #[test]
    fn sampling_is_deterministic_given_the_seed() {
        let mut ds = toy_dataset("pointmass", 4, 2);
        for i in 0..100 {
            ds.push(pm_transition([i as f64, 0.0, 0.0, 0.0], false, false))
                .unwrap();
        }
        let a = sample_batch(&ds, 10, &mut crate::rng_from_seed(3)).unwrap();
        let b = sample_batch(&ds, 10, &mut crate::rng_from_seed(3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sampling_empty_dataset_is_a_usage_error() {
        let ds = toy_dataset("pointmass", 4, 2);
        let mut rng = crate::rng_from_seed(0);
        assert!(matches!(
            sample_batch(&ds, 1, &mut rng),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn sample_frequencies_match_binomial_statistics() {
        // 1e6 draws over n=10000: mean 100, sd ~10; all counts within 5σ.
        let mut ds = toy_dataset("pointmass", 4, 2);
        for _ in 0..10_000 {
            ds.push(pm_transition([0.0; 4], false, false)).unwrap();
        }
        let mut rng = crate::rng_from_seed(123);
        let mut counts = vec![0u32; 10_000];
        for _ in 0..100 {
            for i in sample_batch(&ds, 10_000, &mut rng).unwrap() {
                counts[i] += 1;
            }
        }
        let p: f64 = 1.0 / 10_000.0;
        let draws: f64 = 1_000_000.0;
        let mean = draws * p;
        let sd = (draws * p * (1.0 - p)).sqrt();
        for (i, c) in counts.iter().enumerate() {
            assert!(
                (*c as f64 - mean).abs() <= 5.0 * sd,
                "index {i} drawn {c} times (mean {mean:.1}, sd {sd:.2})"
            );
        }
    }

    #[test]
    fn relabel_computes_rewards_from_next_obs() {
        let mut ds = toy_dataset("pointmass", 4, 2);
        ds.push(pm_transition([3.0, 4.0, 0.0, 0.0], false, false))
            .unwrap();
        let reward = TaskReward::PointGoal { goal: [0.0, 0.0] };
        let rl = Relabeler::new(&ds, &reward).unwrap();
        let batch = rl.batch(&[0]).unwrap();
        assert!((batch.reward[0] + 5.0).abs() < 1e-12);
        assert_eq!(batch.not_done[0], 1.0);
    }

    #[test]
    fn only_failures_clear_the_bootstrap_mask() {
        let mut ds = toy_dataset("pointmass", 4, 2);
        ds.push(pm_transition([0.0; 4], true, false)).unwrap(); // failure
        ds.push(pm_transition([0.0; 4], true, true)).unwrap(); // timeout
        ds.push(pm_transition([0.0; 4], false, false)).unwrap();
        let reward = TaskReward::PointGoal { goal: [0.0, 0.0] };
        let rl = Relabeler::new(&ds, &reward).unwrap();
        let batch = rl.batch(&[0, 1, 2]).unwrap();
        assert_eq!(batch.not_done, vec![0.0, 1.0, 1.0]);
    }

    #[test]
    fn env_mismatch_is_a_config_error() {
        let ds = toy_dataset("pendulum", 3, 1);
        let reward = TaskReward::PointGoal { goal: [0.0, 0.0] };
        assert!(matches!(
            Relabeler::new(&ds, &reward),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn two_relabelings_share_identical_transition_arrays() {
        let mut ds = toy_dataset("pointmass", 4, 2);
        for i in 0..10 {
            ds.push(pm_transition([i as f64, 1.0, 0.5, -0.5], false, false))
                .unwrap();
        }
        let ra = TaskReward::PointGoal { goal: [1.0, 1.0] };
        let rb = TaskReward::Velocity;
        let idx: Vec<usize> = (0..10).collect();
        let a = Relabeler::new(&ds, &ra).unwrap().batch(&idx).unwrap();
        let b = Relabeler::new(&ds, &rb).unwrap().batch(&idx).unwrap();
        assert_eq!(a.obs, b.obs);
        assert_eq!(a.action, b.action);
        assert_eq!(a.next_obs, b.next_obs);
        assert_ne!(a.reward, b.reward);
    }

    #[test]
    fn zero_reward_labels_everything_zero() {
        // point-goal at the exact next_obs position gives reward 0.
        let mut ds = toy_dataset("pointmass", 4, 2);
        for _ in 0..5 {
            ds.push(pm_transition([2.0, -1.0, 0.0, 0.0], false, false))
                .unwrap();
        }
        let reward = TaskReward::PointGoal { goal: [2.0, -1.0] };
        let rl = Relabeler::new(&ds, &reward).unwrap();
        for batch in rl.stream(2) {
            let batch = batch.unwrap();
            assert!(batch.reward.iter().all(|r| *r == 0.0));
        }
    }
}

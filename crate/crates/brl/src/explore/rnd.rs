//! Random Network Distillation: a frozen random teacher encodes
//! observations; a student is regressed onto the teacher's embeddings and
//! the residual norm is the novelty reward.

use serde::{Deserialize, Serialize};

use super::sac::SacConfig;
use crate::error::Result;
use crate::tensor::{Activation, AdamState, Mlp, Tape};
use crate::Rng;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RndConfig {
    pub embed_dim: usize,
    pub hidden: Vec<usize>,
    /// Student learning rate.
    pub lr: f64,
    pub sac: SacConfig,
}

impl Default for RndConfig {
    fn default() -> Self {
        Self {
            embed_dim: 32,
            hidden: vec![32, 32],
            lr: 1e-3,
            sac: SacConfig::default(),
        }
    }
}

pub struct RndModule {
    teacher: Mlp,
    student: Mlp,
    adam: AdamState,
}

impl RndModule {
    pub fn new(obs_dim: usize, cfg: &RndConfig, rng: &mut Rng) -> Self {
        let mut dims = vec![obs_dim];
        dims.extend_from_slice(&cfg.hidden);
        dims.push(cfg.embed_dim);
        let teacher = Mlp::new(&dims, Activation::Identity, rng);
        let student = Mlp::new(&dims, Activation::Identity, rng);
        let adam = AdamState::new(student.params().len(), cfg.lr);
        Self {
            teacher,
            student,
            adam,
        }
    }

    /// Builds a module around explicit teacher/student networks
    /// (shapes must match).
    pub fn with_networks(teacher: Mlp, student: Mlp, lr: f64) -> Self {
        assert_eq!(teacher.layer_dims(), student.layer_dims());
        let adam = AdamState::new(student.params().len(), lr);
        Self {
            teacher,
            student,
            adam,
        }
    }

    pub fn teacher(&self) -> &Mlp {
        &self.teacher
    }

    pub fn student(&self) -> &Mlp {
        &self.student
    }

    /// Test hook: a student that exactly mirrors the teacher.
    pub fn copy_teacher_into_student(&mut self) {
        self.student.copy_params_from(&self.teacher);
    }

    /// ‖teacher(x) − student(x)‖, the novelty reward. Always ≥ 0.
    pub fn reward(&self, x: &[f64]) -> Result<f64> {
        let t = self.teacher.forward(x)?;
        let s = self.student.forward(x)?;
        Ok(t.iter()
            .zip(&s)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt())
    }

    /// One Adam step on the mean squared embedding error
    /// (1/B)·Σ‖teacher(x) − student(x)‖². Returns the loss; the teacher
    /// is never touched.
    pub fn update(&mut self, batch_obs: &[Vec<f64>]) -> Result<f64> {
        assert!(!batch_obs.is_empty(), "rnd update requires a non-empty batch");
        let targets: Vec<Vec<f64>> = batch_obs
            .iter()
            .map(|x| self.teacher.forward(x))
            .collect::<Result<_>>()?;
        let loss_val;
        {
            let mut tape = Tape::new();
            let sn = tape.register(&mut self.student);
            let mut total = tape.scalar_input(0.0);
            for (x, t) in batch_obs.iter().zip(&targets) {
                let xi = tape.input(x);
                let emb = tape.apply(sn, xi);
                let e = tape.sq_err(emb, t);
                total = tape.add(total, e);
            }
            let loss = tape.scale(total, 1.0 / batch_obs.len() as f64);
            loss_val = tape.scalar(loss);
            tape.backward(loss)?;
        }
        self.adam.apply(self.student.params_mut())?;
        Ok(loss_val)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng_from_seed;

    #[test]
    fn copied_student_has_zero_reward_everywhere() {
        let mut rng = rng_from_seed(1);
        let mut m = RndModule::new(3, &RndConfig::default(), &mut rng);
        m.copy_teacher_into_student();
        use rand::Rng as _;
        for _ in 0..20 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            assert_eq!(m.reward(&x).unwrap(), 0.0);
        }
    }

    #[test]
    fn perturbed_student_has_positive_reward() {
        let mut rng = rng_from_seed(2);
        let mut m = RndModule::new(3, &RndConfig::default(), &mut rng);
        m.copy_teacher_into_student();
        m.student.params_mut().values_mut()[0] += 0.5;
        assert!(m.reward(&[1.0, -1.0, 0.5]).unwrap() > 0.0);
    }

    #[test]
    fn pinned_embeddings_give_norm_rewards() {
        // teacher ≡ (3,4), student ≡ (0,0) → reward 5 (3-4-5 triangle);
        // teacher ≡ (1,0), student ≡ 0 → reward 1.
        let mut rng = rng_from_seed(3);
        let cfg = RndConfig {
            embed_dim: 2,
            hidden: vec![4],
            ..RndConfig::default()
        };
        let mut m = RndModule::new(2, &cfg, &mut rng);
        for v in m.teacher.params_mut().values_mut().iter_mut() {
            *v = 0.0;
        }
        for v in m.student.params_mut().values_mut().iter_mut() {
            *v = 0.0;
        }
        let b_off = m.teacher.bias_offset(m.teacher.n_layers() - 1);
        m.teacher.params_mut().values_mut()[b_off] = 3.0;
        m.teacher.params_mut().values_mut()[b_off + 1] = 4.0;
        assert!((m.reward(&[0.0, 0.0]).unwrap() - 5.0).abs() < 1e-12);

        m.teacher.params_mut().values_mut()[b_off] = 1.0;
        m.teacher.params_mut().values_mut()[b_off + 1] = 0.0;
        assert!((m.reward(&[0.7, -0.3]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn update_loss_equals_mean_squared_reward() {
        let mut rng = rng_from_seed(4);
        let mut m = RndModule::new(3, &RndConfig::default(), &mut rng);
        use rand::Rng as _;
        let batch: Vec<Vec<f64>> = (0..8)
            .map(|_| (0..3).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let expect: f64 = batch
            .iter()
            .map(|x| m.reward(x).unwrap().powi(2))
            .sum::<f64>()
            / batch.len() as f64;
        let loss = m.update(&batch).unwrap();
        assert!((loss - expect).abs() < 1e-10, "{loss} vs {expect}");
    }

    #[test]
    fn teacher_is_frozen_through_updates() {
        let mut rng = rng_from_seed(5);
        let mut m = RndModule::new(2, &RndConfig::default(), &mut rng);
        let before = m.teacher.params().values().to_vec();
        let batch = vec![vec![0.5, -0.5]; 4];
        for _ in 0..50 {
            m.update(&batch).unwrap();
        }
        assert_eq!(m.teacher.params().values(), &before[..]);
    }

    #[test]
    fn training_on_one_observation_collapses_its_reward() {
        // The intrinsic-signal convergence contract: 200 updates on a
        // fixed observation drop its reward below 10% of the start.
        let mut rng = rng_from_seed(6);
        let mut m = RndModule::new(4, &RndConfig::default(), &mut rng);
        let x = vec![0.3, -1.2, 0.8, 0.0];
        let initial = m.reward(&x).unwrap();
        for _ in 0..200 {
            m.update(std::slice::from_ref(&x)).unwrap();
        }
        let after = m.reward(&x).unwrap();
        assert!(
            after < 0.1 * initial,
            "reward {initial} only fell to {after} after 200 updates"
        );
    }
}

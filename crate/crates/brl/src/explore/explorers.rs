//! The five exploration methods as Explorer implementations, plus the
//! registry that builds them by name.

use serde::{Deserialize, Serialize};

use super::diayn::{DiaynConfig, SkillEnsemble};
use super::gep::{gep_sample_goal, gep_select_and_perturb, GepConfig, GepMemory, RunningBounds};
use super::linear::{LinearPolicy, RandomPoliciesConfig};
use super::rnd::{RndConfig, RndModule};
use super::sac::SacLearner;
use super::sse::{SseConfig, SseModels};
use super::Explorer;
use crate::dataset::{LabeledBatch, Transition};
use crate::envs::EnvSpec;
use crate::error::{Error, Result};
use crate::Rng;

/// All exploration hyperparameters, JSON-overridable.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ExploreHyper {
    pub random: RandomPoliciesConfig,
    pub gep: GepConfig,
    pub rnd: RndConfig,
    pub diayn: DiaynConfig,
    pub sse: SseConfig,
}

/// Builds an explorer by CLI method name.
pub fn make_explorer(
    method: &str,
    spec: &EnvSpec,
    hyper: &ExploreHyper,
    rng: &mut Rng,
) -> Result<Box<dyn Explorer>> {
    Ok(match method {
        "random" => Box::new(RandomPoliciesExplorer::new(spec, hyper.random.clone())),
        "gep" => Box::new(GepExplorer::new(spec, hyper.gep.clone())),
        "rnd" => Box::new(RndExplorer::new(spec, hyper.rnd.clone(), rng)),
        "diayn" => Box::new(DiaynExplorer::new(spec, hyper.diayn.clone(), rng)),
        "sse" => Box::new(SseExplorer::new(spec, hyper.sse.clone(), rng)),
        _ => {
            return Err(Error::Config(format!(
                "unknown exploration method '{method}' (expected random | gep | rnd | diayn | sse)"
            )))
        }
    })
}

fn uniform_indices(len: usize, batch: usize, rng: &mut Rng) -> Vec<usize> {
    use rand::Rng as _;
    (0..batch).map(|_| rng.random_range(0..len)).collect()
}

// ---------------------------------------------------------------------
// Random Policies: a fresh random linear policy every episode.

pub struct RandomPoliciesExplorer {
    cfg: RandomPoliciesConfig,
    obs_dim: usize,
    act_dim: usize,
    low: Vec<f64>,
    high: Vec<f64>,
    policy: LinearPolicy,
}

impl RandomPoliciesExplorer {
    pub fn new(spec: &EnvSpec, cfg: RandomPoliciesConfig) -> Self {
        Self {
            cfg,
            obs_dim: spec.obs_dim,
            act_dim: spec.act_dim,
            low: spec.action_low.clone(),
            high: spec.action_high.clone(),
            policy: LinearPolicy::zeros(spec.obs_dim, spec.act_dim),
        }
    }
}

impl Explorer for RandomPoliciesExplorer {
    fn name(&self) -> &'static str {
        "random"
    }

    fn begin_episode(&mut self, _obs: &[f64], rng: &mut Rng) -> Result<()> {
        self.policy = LinearPolicy::random(self.obs_dim, self.act_dim, self.cfg.sigma_init, rng);
        Ok(())
    }

    fn act(&mut self, obs: &[f64], _rng: &mut Rng) -> Result<Vec<f64>> {
        Ok(self.policy.act(obs, &self.low, &self.high))
    }

    fn observe(&mut self, _transition: &Transition, _rng: &mut Rng) -> Result<()> {
        Ok(())
    }

    fn end_episode(&mut self, _rng: &mut Rng) -> Result<()> {
        Ok(())
    }
}

// ---------------------------------------------------------------------
// GEP: bootstrap with random policies, then goal-directed perturbation.

pub struct GepExplorer {
    cfg: GepConfig,
    obs_dim: usize,
    act_dim: usize,
    low: Vec<f64>,
    high: Vec<f64>,
    memory: GepMemory,
    bounds: RunningBounds,
    policy: LinearPolicy,
    traj_sum: Vec<f64>,
    traj_count: usize,
}

impl GepExplorer {
    pub fn new(spec: &EnvSpec, cfg: GepConfig) -> Self {
        Self {
            obs_dim: spec.obs_dim,
            act_dim: spec.act_dim,
            low: spec.action_low.clone(),
            high: spec.action_high.clone(),
            memory: GepMemory::new(cfg.bootstrap_target),
            bounds: RunningBounds::new(spec.obs_dim),
            policy: LinearPolicy::zeros(spec.obs_dim, spec.act_dim),
            traj_sum: vec![0.0; spec.obs_dim],
            traj_count: 0,
            cfg,
        }
    }

    pub fn memory(&self) -> &GepMemory {
        &self.memory
    }

    fn see_state(&mut self, obs: &[f64]) {
        self.bounds.update(obs);
        for (s, v) in self.traj_sum.iter_mut().zip(obs) {
            *s += v;
        }
        self.traj_count += 1;
    }
}

impl Explorer for GepExplorer {
    fn name(&self) -> &'static str {
        "gep"
    }

    fn begin_episode(&mut self, obs: &[f64], rng: &mut Rng) -> Result<()> {
        self.policy = if self.memory.bootstrapped() {
            let goal = gep_sample_goal(&self.bounds.lo, &self.bounds.hi, rng);
            gep_select_and_perturb(&self.memory, &goal, self.cfg.sigma_perturb, rng)?
        } else {
            LinearPolicy::random(self.obs_dim, self.act_dim, self.cfg.sigma_init, rng)
        };
        self.traj_sum.fill(0.0);
        self.traj_count = 0;
        self.see_state(obs);
        Ok(())
    }

    fn act(&mut self, obs: &[f64], _rng: &mut Rng) -> Result<Vec<f64>> {
        Ok(self.policy.act(obs, &self.low, &self.high))
    }

    fn observe(&mut self, transition: &Transition, _rng: &mut Rng) -> Result<()> {
        self.see_state(&transition.next_obs);
        Ok(())
    }

    fn end_episode(&mut self, _rng: &mut Rng) -> Result<()> {
        let descriptor: Vec<f64> = self
            .traj_sum
            .iter()
            .map(|s| s / self.traj_count as f64)
            .collect();
        self.memory.push(self.policy.clone(), descriptor);
        Ok(())
    }
}

// ---------------------------------------------------------------------
// RND: SAC policy on the student's embedding-error reward.

pub struct RndExplorer {
    cfg: RndConfig,
    module: RndModule,
    sac: SacLearner,
    buffer: Vec<Transition>,
}

impl RndExplorer {
    pub fn new(spec: &EnvSpec, cfg: RndConfig, rng: &mut Rng) -> Self {
        let module = RndModule::new(spec.obs_dim, &cfg, rng);
        let sac = SacLearner::new(
            spec.obs_dim,
            &spec.action_low,
            &spec.action_high,
            cfg.sac.clone(),
            rng,
        );
        Self {
            cfg,
            module,
            sac,
            buffer: Vec::new(),
        }
    }

    pub fn module(&self) -> &RndModule {
        &self.module
    }
}

impl Explorer for RndExplorer {
    fn name(&self) -> &'static str {
        "rnd"
    }

    fn begin_episode(&mut self, _obs: &[f64], _rng: &mut Rng) -> Result<()> {
        Ok(())
    }

    fn act(&mut self, obs: &[f64], rng: &mut Rng) -> Result<Vec<f64>> {
        Ok(self.sac.policy.sample(obs, rng)?.0)
    }

    fn observe(&mut self, transition: &Transition, rng: &mut Rng) -> Result<()> {
        self.buffer.push(transition.clone());
        if self.buffer.len() < self.cfg.sac.warmup.max(1) {
            return Ok(());
        }
        let idx = uniform_indices(self.buffer.len(), self.cfg.sac.batch_size, rng);
        let mut batch = LabeledBatch {
            obs: Vec::with_capacity(idx.len()),
            action: Vec::with_capacity(idx.len()),
            reward: Vec::with_capacity(idx.len()),
            next_obs: Vec::with_capacity(idx.len()),
            not_done: Vec::with_capacity(idx.len()),
        };
        for &i in &idx {
            let t = &self.buffer[i];
            batch.obs.push(t.obs.clone());
            batch.action.push(t.action.clone());
            // Nonstationary novelty reward, recomputed from the current
            // student at the state the step reached.
            batch.reward.push(self.module.reward(&t.next_obs)?);
            batch.next_obs.push(t.next_obs.clone());
            batch
                .not_done
                .push(if t.done && !t.timeout { 0.0 } else { 1.0 });
        }
        self.sac.update(&batch, rng)?;
        self.module.update(&batch.next_obs)?;
        Ok(())
    }

    fn end_episode(&mut self, _rng: &mut Rng) -> Result<()> {
        Ok(())
    }
}

// ---------------------------------------------------------------------
// DIAYN: skills rotate per episode; all transitions pool into the
// dataset while the ensemble learns from its own labeled buffer.

pub struct DiaynExplorer {
    cfg: DiaynConfig,
    ensemble: SkillEnsemble,
    buffer: Vec<(Transition, usize)>,
    current_skill: usize,
    episodes_started: usize,
}

impl DiaynExplorer {
    pub fn new(spec: &EnvSpec, cfg: DiaynConfig, rng: &mut Rng) -> Self {
        let ensemble = SkillEnsemble::new(
            spec.obs_dim,
            &spec.action_low,
            &spec.action_high,
            &cfg,
            rng,
        );
        Self {
            cfg,
            ensemble,
            buffer: Vec::new(),
            current_skill: 0,
            episodes_started: 0,
        }
    }

    pub fn ensemble(&self) -> &SkillEnsemble {
        &self.ensemble
    }
}

impl Explorer for DiaynExplorer {
    fn name(&self) -> &'static str {
        "diayn"
    }

    fn begin_episode(&mut self, _obs: &[f64], _rng: &mut Rng) -> Result<()> {
        self.current_skill = self.episodes_started % self.ensemble.n_skills();
        self.episodes_started += 1;
        Ok(())
    }

    fn act(&mut self, obs: &[f64], rng: &mut Rng) -> Result<Vec<f64>> {
        Ok(self.ensemble.skills[self.current_skill]
            .policy
            .sample(obs, rng)?
            .0)
    }

    fn observe(&mut self, transition: &Transition, rng: &mut Rng) -> Result<()> {
        self.buffer.push((transition.clone(), self.current_skill));
        if self.buffer.len() < self.cfg.sac.warmup.max(1) {
            return Ok(());
        }
        let idx = uniform_indices(self.buffer.len(), self.cfg.sac.batch_size, rng);
        let batch: Vec<(Transition, usize)> =
            idx.iter().map(|&i| self.buffer[i].clone()).collect();
        self.ensemble.update(&batch, rng)?;
        Ok(())
    }

    fn end_episode(&mut self, _rng: &mut Rng) -> Result<()> {
        Ok(())
    }
}

// ---------------------------------------------------------------------
// SSE: disagreement-seeking policy trained through imagined rollouts.

pub struct SseExplorer {
    cfg: SseConfig,
    models: SseModels,
    buffer: Vec<Transition>,
}

impl SseExplorer {
    pub fn new(spec: &EnvSpec, cfg: SseConfig, rng: &mut Rng) -> Self {
        let models = SseModels::new(
            spec.obs_dim,
            &spec.action_low,
            &spec.action_high,
            &cfg,
            rng,
        );
        Self {
            cfg,
            models,
            buffer: Vec::new(),
        }
    }

    pub fn models(&self) -> &SseModels {
        &self.models
    }
}

impl Explorer for SseExplorer {
    fn name(&self) -> &'static str {
        "sse"
    }

    fn begin_episode(&mut self, _obs: &[f64], _rng: &mut Rng) -> Result<()> {
        Ok(())
    }

    fn act(&mut self, obs: &[f64], rng: &mut Rng) -> Result<Vec<f64>> {
        Ok(self.models.policy.sample(obs, rng)?.0)
    }

    fn observe(&mut self, transition: &Transition, rng: &mut Rng) -> Result<()> {
        self.buffer.push(transition.clone());
        if self.buffer.len() < self.cfg.warmup.max(1) {
            return Ok(());
        }
        let idx = uniform_indices(self.buffer.len(), self.cfg.batch_size, rng);
        let batch: Vec<Transition> = idx.iter().map(|&i| self.buffer[i].clone()).collect();
        self.models.update(&batch, self.cfg.rollout_starts, rng)?;
        Ok(())
    }

    fn end_episode(&mut self, _rng: &mut Rng) -> Result<()> {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::make_env;
    use crate::explore::collect;
    use crate::rng_from_seed;

    #[test]
    fn unknown_method_is_a_config_error() {
        let env = make_env("pointmass", None).unwrap();
        let mut rng = rng_from_seed(0);
        assert!(matches!(
            make_explorer("curiosity", env.spec(), &ExploreHyper::default(), &mut rng),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn collect_produces_exactly_the_requested_length() {
        let mut env = make_env("pointmass", Some(50)).unwrap();
        let mut rng = rng_from_seed(7);
        let mut ex =
            make_explorer("random", env.spec(), &ExploreHyper::default(), &mut rng).unwrap();
        let ds = collect(ex.as_mut(), env.as_mut(), 120, 7, "hash", &mut rng).unwrap();
        assert_eq!(ds.len(), 120);
        assert_eq!(ds.meta().method, "random");
        assert_eq!(ds.meta().env, "pointmass");
    }

    #[test]
    fn collect_is_bit_deterministic() {
        let run = || {
            let mut env = make_env("planararm", Some(40)).unwrap();
            let mut rng = rng_from_seed(42);
            let mut ex =
                make_explorer("gep", env.spec(), &ExploreHyper::default(), &mut rng).unwrap();
            collect(ex.as_mut(), env.as_mut(), 300, 42, "h", &mut rng).unwrap()
        };
        let a = run();
        let b = run();
        for (ta, tb) in a.transitions().iter().zip(b.transitions()) {
            assert_eq!(ta, tb);
        }
    }

    #[test]
    fn random_explorer_redraws_each_episode() {
        let env = make_env("pointmass", Some(10)).unwrap();
        let mut rng = rng_from_seed(1);
        let mut ex = RandomPoliciesExplorer::new(env.spec(), RandomPoliciesConfig::default());
        ex.begin_episode(&[0.0; 4], &mut rng).unwrap();
        let p1 = ex.policy.clone();
        ex.begin_episode(&[0.0; 4], &mut rng).unwrap();
        let p2 = ex.policy.clone();
        assert_ne!(p1, p2);
        // Within an episode the map is fixed by construction (no redraw in act).
        let a1 = ex.act(&[0.1, 0.2, 0.0, 0.0], &mut rng).unwrap();
        let a2 = ex.act(&[0.1, 0.2, 0.0, 0.0], &mut rng).unwrap();
        assert_eq!(a1, a2);
    }

    #[test]
    fn gep_memory_grows_only_at_episode_ends() {
        let mut env = make_env("pointmass", Some(20)).unwrap();
        let mut rng = rng_from_seed(3);
        let mut ex = GepExplorer::new(env.spec(), GepConfig::default());
        let ds = collect(&mut ex, env.as_mut(), 205, 3, "h", &mut rng).unwrap();
        assert_eq!(ds.len(), 205);
        // 205 steps at 20 steps/episode = 10 finished episodes.
        assert_eq!(ex.memory().len(), 10);
    }

    #[test]
    fn gep_switches_to_goal_phase_after_bootstrap() {
        let mut env = make_env("pointmass", Some(5)).unwrap();
        let mut rng = rng_from_seed(4);
        let cfg = GepConfig {
            bootstrap_target: 3,
            ..GepConfig::default()
        };
        let mut ex = GepExplorer::new(env.spec(), cfg);
        // 4 finished episodes: 3 bootstrap + 1 goal-directed.
        collect(&mut ex, env.as_mut(), 20, 4, "h", &mut rng).unwrap();
        assert_eq!(ex.memory().len(), 4);
    }

    #[test]
    fn learned_explorers_run_their_update_paths() {
        // Small horizon + small warmup so every learner actually updates.
        for method in ["rnd", "diayn", "sse"] {
            let mut env = make_env("pointmass", Some(25)).unwrap();
            let mut rng = rng_from_seed(11);
            let mut hyper = ExploreHyper::default();
            hyper.rnd.sac.warmup = 30;
            hyper.rnd.sac.batch_size = 16;
            hyper.rnd.sac.hidden = vec![8];
            hyper.rnd.hidden = vec![8];
            hyper.diayn.sac.warmup = 30;
            hyper.diayn.sac.batch_size = 16;
            hyper.diayn.sac.hidden = vec![8];
            hyper.diayn.disc_hidden = vec![8];
            hyper.diayn.n_skills = 3;
            hyper.sse.warmup = 30;
            hyper.sse.batch_size = 16;
            hyper.sse.hidden = vec![8];
            hyper.sse.rollout_starts = 4;
            hyper.sse.horizon = 2;
            let mut ex = make_explorer(method, env.spec(), &hyper, &mut rng).unwrap();
            let ds = collect(ex.as_mut(), env.as_mut(), 60, 11, "h", &mut rng).unwrap();
            assert_eq!(ds.len(), 60, "{method}");
        }
    }
}

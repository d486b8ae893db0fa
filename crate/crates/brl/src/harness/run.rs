//! Phase dispatch shared by the CLI and the C API.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, Phase};
use super::csvio::write_csv;
use super::eval::evaluate;
use super::report::emit_report;
use crate::dataset::{coverage, dataset_read, dataset_write};
use crate::envs::{make_env, TaskReward};
use crate::error::{Error, Result};
use crate::explore::{collect, make_explorer};
use crate::offline::{train_offline, Algo, OfflineHyper, OfflinePolicy};
use crate::rng_from_seed;

/// Sidecar JSON written next to every policy checkpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolicySidecar {
    pub algorithm: String,
    pub env: String,
    pub reward: String,
    pub seed: u64,
    pub steps: u64,
    pub dataset_hash: String,
    pub config_hash: String,
    pub hyper: OfflineHyper,
    pub created_utc: u64,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut os = path.as_os_str().to_owned();
    os.push(".json");
    PathBuf::from(os)
}

fn require<'a, T>(field: &'a Option<T>, name: &str) -> Result<&'a T> {
    field
        .as_ref()
        .ok_or_else(|| Error::Usage(format!("missing required option --{name}")))
}

/// Runs one experiment phase to completion.
pub fn run(config: &ExperimentConfig) -> Result<()> {
    match config.phase {
        Phase::Explore => run_explore(config),
        Phase::Train => run_train(config),
        Phase::Eval => run_eval(config),
        Phase::Coverage => run_coverage(config),
        Phase::Report => run_report(config),
    }
}

fn run_explore(config: &ExperimentConfig) -> Result<()> {
    let env_name = require(&config.env, "env")?;
    let method = require(&config.method, "method")?;
    let out = require(&config.out, "out")?;
    if config.steps < 1 {
        return Err(Error::Usage("explore needs --steps >= 1".to_string()));
    }
    let hash = config.config_hash();
    let mut rng = rng_from_seed(config.seed);
    let mut env = make_env(env_name, config.max_episode_steps)?;
    let mut explorer = make_explorer(method, env.spec(), &config.hyper.explore, &mut rng)?;
    let ds = collect(
        explorer.as_mut(),
        env.as_mut(),
        config.steps,
        config.seed,
        &hash,
        &mut rng,
    )?;
    dataset_write(&ds, out)?;
    Ok(())
}

fn file_hash(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    let mut hex = String::with_capacity(16);
    for b in &digest[..8] {
        hex.push_str(&format!("{b:02x}"));
    }
    Ok(hex)
}

/// Default loss-CSV path: `policy.brlp` → `policy.loss.csv`.
pub fn default_loss_csv(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("train");
    out.with_file_name(format!("{stem}.loss.csv"))
}

fn run_train(config: &ExperimentConfig) -> Result<()> {
    let dataset_path = require(&config.dataset, "dataset")?;
    let algo = Algo::parse(require(&config.algo, "algo")?)?;
    let reward = TaskReward::parse(require(&config.reward, "reward")?)?;
    let out = require(&config.out, "out")?;

    let dataset = dataset_read(dataset_path)?;
    let (policy, log) = train_offline(
        &dataset,
        &reward,
        algo,
        config.steps,
        config.seed,
        &config.hyper.offline,
    )?;
    policy.save(out)?;

    let hash = config.config_hash();
    let sidecar = PolicySidecar {
        algorithm: algo.name().to_string(),
        env: dataset.meta().env.clone(),
        reward: reward.spec_string(),
        seed: config.seed,
        steps: config.steps,
        dataset_hash: file_hash(dataset_path)?,
        config_hash: hash.clone(),
        hyper: config.hyper.offline.clone(),
        created_utc: now_utc(),
    };
    std::fs::write(
        sidecar_path(out),
        serde_json::to_string_pretty(&sidecar)?,
    )?;

    let csv_path = config.csv.clone().unwrap_or_else(|| default_loss_csv(out));
    let rows: Vec<Vec<Option<f64>>> = log
        .iter()
        .map(|r| {
            vec![
                Some(r.step as f64),
                Some(r.critic_loss),
                Some(r.actor_loss),
                Some(r.aux_loss),
            ]
        })
        .collect();
    write_csv(
        &csv_path,
        &[
            ("env", &dataset.meta().env),
            ("reward", &reward.spec_string()),
            ("algo", algo.name()),
            ("config_hash", &hash),
        ],
        &["step", "critic_loss", "actor_loss", "aux_loss"],
        &rows,
    )?;
    Ok(())
}

fn run_eval(config: &ExperimentConfig) -> Result<()> {
    let policy_path = require(&config.policy, "policy")?;
    let env_name = require(&config.env, "env")?;
    let csv_path = require(&config.csv, "csv")?;

    let sidecar: Option<PolicySidecar> = std::fs::read_to_string(sidecar_path(policy_path))
        .ok()
        .map(|s| serde_json::from_str(&s))
        .transpose()?;

    let algo = match (&config.algo, &sidecar) {
        (Some(a), _) => Algo::parse(a)?,
        (None, Some(sc)) => Algo::parse(&sc.algorithm)?,
        (None, None) => {
            return Err(Error::Usage(
                "policy sidecar missing; pass --algo explicitly".to_string(),
            ))
        }
    };
    let reward = match (&config.reward, &sidecar) {
        (Some(r), _) => TaskReward::parse(r)?,
        (None, Some(sc)) => TaskReward::parse(&sc.reward)?,
        (None, None) => {
            return Err(Error::Usage(
                "policy sidecar missing; pass --reward explicitly".to_string(),
            ))
        }
    };
    let hyper = sidecar
        .as_ref()
        .map(|sc| sc.hyper.clone())
        .unwrap_or_else(|| config.hyper.offline.clone());

    let mut env = make_env(env_name, config.max_episode_steps)?;
    let spec = env.spec().clone();
    let policy = OfflinePolicy::load(
        policy_path,
        algo,
        &spec.action_low,
        &spec.action_high,
        &hyper,
    )?;
    let report = evaluate(&policy, env.as_mut(), &reward, config.episodes, config.seed)?;

    let rows: Vec<Vec<Option<f64>>> = report
        .returns
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![
                Some(i as f64),
                Some(*r),
                report.closest_distances.as_ref().map(|d| d[i]),
            ]
        })
        .collect();
    write_csv(
        csv_path,
        &[
            ("env", spec.name),
            ("reward", &reward.spec_string()),
            ("algo", algo.name()),
            ("config_hash", &config.config_hash()),
        ],
        &["episode", "return", "closest_distance"],
        &rows,
    )?;
    Ok(())
}

fn run_coverage(config: &ExperimentConfig) -> Result<()> {
    let dataset_path = require(&config.dataset, "dataset")?;
    let csv_path = require(&config.csv, "csv")?;
    let dataset = dataset_read(dataset_path)?;
    if dataset.meta().env.is_empty() {
        return Err(Error::Config(
            "dataset has no sidecar; coverage needs the environment's observation bounds"
                .to_string(),
        ));
    }
    let env = make_env(&dataset.meta().env, None)?;
    let bounds = env.obs_bounds();
    let cov = coverage(&dataset, config.bins, &bounds)?;

    let dims_list: Vec<String> = cov
        .histograms
        .iter()
        .map(|h| {
            h.dims
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join("-")
        })
        .collect();
    let mut rows = Vec::new();
    for (hist_idx, h) in cov.histograms.iter().enumerate() {
        for (bin, count) in h.counts.iter().enumerate() {
            if *count > 0 {
                rows.push(vec![
                    Some(hist_idx as f64),
                    Some(bin as f64),
                    Some(*count as f64),
                ]);
            }
        }
    }
    write_csv(
        csv_path,
        &[
            ("env", &dataset.meta().env),
            ("method", &dataset.meta().method),
            ("config_hash", &config.config_hash()),
            ("bins", &cov.bins_per_dim.to_string()),
            ("occupied", &format!("{}", cov.occupied)),
            ("total", &cov.total_points.to_string()),
            ("hist_dims", &dims_list.join(";")),
        ],
        &["hist", "bin", "count"],
        &rows,
    )?;
    Ok(())
}

fn run_report(config: &ExperimentConfig) -> Result<()> {
    let out = require(&config.out, "out")?;
    if config.inputs.is_empty() {
        return Err(Error::Usage("report needs at least one input CSV".to_string()));
    }
    emit_report(&config.inputs, out)?;
    Ok(())
}

fn now_utc() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

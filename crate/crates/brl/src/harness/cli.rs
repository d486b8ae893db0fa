//! Command-line interface. Flags override `--config` file values; the
//! BRL_SEED environment variable is the default-seed fallback. `--seeds`
//! fans a run out into independent per-seed child processes.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::config::{ExperimentConfig, Phase};
use super::run::run;
use crate::error::{Error, Result};

#[derive(Parser)]
#[command(
    name = "brl",
    version,
    about = "Batch RL workbench: explore task-agnostically, train offline"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run an exploration method and write an immutable dataset.
    Explore(ExploreArgs),
    /// Train a policy offline from a dataset and a task reward.
    Train(TrainArgs),
    /// Evaluate a policy checkpoint in its environment.
    Eval(EvalArgs),
    /// Coverage diagnostic over a dataset's observations.
    Coverage(CoverageArgs),
    /// Render CSV results as SVG charts.
    Report(ReportArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// JSON experiment config; explicit flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated seed list; launches one child process per seed
    /// with `.s<seed>` inserted into output paths.
    #[arg(long)]
    seeds: Option<String>,
    /// Parallel child processes when --seeds is given.
    #[arg(long, default_value_t = 2)]
    jobs: usize,
}

#[derive(Args)]
struct ExploreArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    env: Option<String>,
    /// random | gep | rnd | diayn | sse
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    max_episode_steps: Option<u32>,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// td3 | bcq
    #[arg(long)]
    algo: Option<String>,
    /// Task reward as name:params, e.g. point-goal:0,0
    #[arg(long)]
    reward: Option<String>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Loss log path (default: <out stem>.loss.csv)
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    policy: Option<PathBuf>,
    #[arg(long)]
    env: Option<String>,
    #[arg(long)]
    episodes: Option<u32>,
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Override the reward recorded in the policy sidecar.
    #[arg(long)]
    reward: Option<String>,
    /// Override the algorithm recorded in the policy sidecar.
    #[arg(long)]
    algo: Option<String>,
    #[arg(long)]
    max_episode_steps: Option<u32>,
}

#[derive(Args)]
struct CoverageArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    bins: Option<usize>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Input CSVs (several files are aggregated as seeds).
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

/// Loads the config file (if any) and resolves the seed precedence:
/// --seed flag, then the file's "seed" key, then BRL_SEED, then 0.
fn base_config(common: &CommonArgs, phase: Phase) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::default();
    let mut file_has_seed = false;
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        file_has_seed = value.get("seed").is_some();
        config = serde_json::from_value(value)?;
    }
    config.phase = phase;
    if let Some(seed) = common.seed {
        config.seed = seed;
    } else if !file_has_seed {
        if let Ok(s) = std::env::var("BRL_SEED") {
            config.seed = s.parse::<u64>().map_err(|_| {
                Error::Usage(format!("BRL_SEED must be an unsigned integer, got '{s}'"))
            })?;
        }
    }
    Ok(config)
}

fn build_config(cmd: &Cmd) -> Result<ExperimentConfig> {
    Ok(match cmd {
        Cmd::Explore(a) => {
            let mut c = base_config(&a.common, Phase::Explore)?;
            merge(&mut c.env, &a.env);
            merge(&mut c.method, &a.method);
            if let Some(s) = a.steps {
                c.steps = s;
            }
            merge(&mut c.out, &a.out);
            merge(&mut c.max_episode_steps, &a.max_episode_steps);
            c
        }
        Cmd::Train(a) => {
            let mut c = base_config(&a.common, Phase::Train)?;
            merge(&mut c.dataset, &a.dataset);
            merge(&mut c.algo, &a.algo);
            merge(&mut c.reward, &a.reward);
            if let Some(s) = a.steps {
                c.steps = s;
            }
            merge(&mut c.out, &a.out);
            merge(&mut c.csv, &a.csv);
            c
        }
        Cmd::Eval(a) => {
            let mut c = base_config(&a.common, Phase::Eval)?;
            merge(&mut c.policy, &a.policy);
            merge(&mut c.env, &a.env);
            if let Some(e) = a.episodes {
                c.episodes = e;
            }
            merge(&mut c.csv, &a.csv);
            merge(&mut c.reward, &a.reward);
            merge(&mut c.algo, &a.algo);
            merge(&mut c.max_episode_steps, &a.max_episode_steps);
            c
        }
        Cmd::Coverage(a) => {
            let mut c = base_config(&a.common, Phase::Coverage)?;
            merge(&mut c.dataset, &a.dataset);
            if let Some(b) = a.bins {
                c.bins = b;
            }
            merge(&mut c.csv, &a.csv);
            c
        }
        Cmd::Report(a) => {
            let mut c = base_config(&a.common, Phase::Report)?;
            merge(&mut c.out, &a.out);
            if !a.inputs.is_empty() {
                c.inputs = a.inputs.clone();
            }
            c
        }
    })
}

fn merge<T: Clone>(slot: &mut Option<T>, flag: &Option<T>) {
    if flag.is_some() {
        *slot = flag.clone();
    }
}

fn common_of(cmd: &Cmd) -> &CommonArgs {
    match cmd {
        Cmd::Explore(a) => &a.common,
        Cmd::Train(a) => &a.common,
        Cmd::Eval(a) => &a.common,
        Cmd::Coverage(a) => &a.common,
        Cmd::Report(a) => &a.common,
    }
}

/// Inserts `.s<seed>` before the extension: `d.brl` → `d.s7.brl`.
fn seed_suffixed(path: &Path, seed: u64) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    match path.extension().and_then(|s| s.to_str()) {
        Some(ext) => path.with_file_name(format!("{stem}.s{seed}.{ext}")),
        None => path.with_file_name(format!("{stem}.s{seed}")),
    }
}

fn fan_out(config: &ExperimentConfig, seeds: &[u64], jobs: usize) -> Result<()> {
    let exe = std::env::current_exe()?;
    let phase_name = match config.phase {
        Phase::Explore => "explore",
        Phase::Train => "train",
        Phase::Eval => "eval",
        Phase::Coverage => "coverage",
        Phase::Report => "report",
    };
    let mut pending: Vec<(u64, PathBuf)> = Vec::new();
    for &seed in seeds {
        let mut child_config = config.clone();
        child_config.seed = seed;
        if let Some(out) = &config.out {
            child_config.out = Some(seed_suffixed(out, seed));
        }
        if let Some(csv) = &config.csv {
            child_config.csv = Some(seed_suffixed(csv, seed));
        }
        let dir = std::env::temp_dir();
        let cfg_path = dir.join(format!("brl-fanout-{}-{seed}.json", std::process::id()));
        std::fs::write(&cfg_path, serde_json::to_string_pretty(&child_config)?)?;
        pending.push((seed, cfg_path));
    }

    let mut failures = Vec::new();
    for chunk in pending.chunks(jobs.max(1)) {
        let mut children = Vec::new();
        for (seed, cfg_path) in chunk {
            let child = std::process::Command::new(&exe)
                .arg(phase_name)
                .arg("--config")
                .arg(cfg_path)
                .spawn()?;
            children.push((*seed, child));
        }
        for (seed, mut child) in children {
            let status = child.wait()?;
            if !status.success() {
                failures.push(seed);
            }
        }
    }
    for (_, cfg_path) in &pending {
        let _ = std::fs::remove_file(cfg_path);
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Error::Config(format!("seed runs failed: {failures:?}")))
    }
}

/// Entry point behind `main`; returns the process exit code.
pub fn cli_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own message; exit code 2 on usage errors.
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = (|| -> Result<()> {
        let config = build_config(&cli.cmd)?;
        let common = common_of(&cli.cmd);
        if let Some(seeds) = &common.seeds {
            let seeds: Vec<u64> = seeds
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<u64>()
                        .map_err(|_| Error::Usage(format!("bad seed '{s}' in --seeds")))
                })
                .collect::<Result<_>>()?;
            if seeds.is_empty() {
                return Err(Error::Usage("--seeds needs at least one seed".to_string()));
            }
            fan_out(&config, &seeds, common.jobs)
        } else {
            run(&config)
        }
    })();
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("brl: {e}");
            e.exit_code()
        }
    }
}

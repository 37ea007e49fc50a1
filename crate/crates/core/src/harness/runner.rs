//! Seeded execution of configured experiments.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::environment::ContextualEnv;
use crate::error::Result;
use crate::evaluation::{simple_regret, EvalMode};
use crate::policies::{AlgParams, AlgState, Variant};

const ENV_STREAM: u64 = 0;
const ALG_STREAM: u64 = 1;
const EVAL_STREAM: u64 = 2;

#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub t: usize,
    pub simple_regret: f64,
    pub stderr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub algo: Variant,
    pub run_id: usize,
    pub rows: Vec<EvalRow>,
    pub rounds_to_threshold: Option<usize>,
    pub final_theta: Vec<f64>,
    /// Pulls per action index.
    pub pull_counts: Vec<usize>,
}

/// Rounds at which the policy is evaluated: `0`, every `every` rounds, and `T`.
pub fn eval_schedule(horizon: usize, every: usize) -> Vec<usize> {
    let mut ts: Vec<usize> = (0..=horizon).step_by(every.max(1)).collect();
    if ts.last() != Some(&horizon) {
        ts.push(horizon);
    }
    ts
}

/// First checkpoint from which the regret stays below `threshold` for the
/// rest of the run.
pub fn sustained_crossing(rows: &[EvalRow], threshold: f64) -> Option<usize> {
    let mut first = None;
    for r in rows.iter().rev() {
        if r.simple_regret < threshold {
            first = Some(r.t);
        } else {
            break;
        }
    }
    first
}

/// Independent random stream `stream` of run `run` under `seed`.
pub fn run_rng(seed: u64, run: usize, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(run as u64));
    rng.set_stream(stream);
    rng
}

/// Options for a single simulated run.
#[derive(Debug, Clone)]
pub struct RunSpec<'a> {
    pub env: &'a ContextualEnv,
    pub algo: Variant,
    pub params: AlgParams,
    pub horizon: usize,
    pub schedule: &'a [usize],
    pub eval_mode: EvalMode,
    pub threshold: Option<f64>,
    pub seed: u64,
    pub run_id: usize,
}

/// Runs one seeded simulation, returning the regret trace and final state.
pub fn run_single(spec: &RunSpec<'_>) -> Result<(RunResult, AlgState)> {
    let env = spec.env;
    let mut state = AlgState::new(
        spec.algo,
        env.dim(),
        spec.params.clone(),
        env.reward_model().is_logistic(),
    )?;
    let mut env_rng = run_rng(spec.seed, spec.run_id, ENV_STREAM);
    let mut alg_rng = run_rng(spec.seed, spec.run_id, ALG_STREAM);
    let eval_rng = run_rng(spec.seed, spec.run_id, EVAL_STREAM);
    let mut rows = Vec::with_capacity(spec.schedule.len());
    let mut pulls: Vec<usize> = Vec::new();
    let mut next_eval = 0;
    let mut theta = vec![0.0; env.dim()];
    for t in 0..=spec.horizon {
        while next_eval < spec.schedule.len() && spec.schedule[next_eval] == t {
            let snap = state.finalize()?;
            let est = simple_regret(&snap, env, spec.eval_mode, &mut eval_rng.clone())?;
            rows.push(EvalRow {
                t,
                simple_regret: est.value,
                stderr: est.stderr(),
            });
            theta = snap.theta_out;
            next_eval += 1;
        }
        if t == spec.horizon {
            break;
        }
        let (_, features) = env.sample_round(&mut env_rng);
        let a = state.select(&features, &mut alg_rng)?;
        let reward = env.sample_reward(&features[a], &mut env_rng);
        state.observe(a, &features[a], reward)?;
        if pulls.len() < features.len() {
            pulls.resize(features.len(), 0);
        }
        pulls[a] += 1;
    }
    let rounds_to_threshold = spec.threshold.and_then(|th| sustained_crossing(&rows, th));
    Ok((
        RunResult {
            algo: spec.algo,
            run_id: spec.run_id,
            rows,
            rounds_to_threshold,
            final_theta: theta,
            pull_counts: pulls,
        },
        state,
    ))
}

/// Runs every configured algorithm for `runs` seeds; results are ordered by
/// algorithm (as configured) and then by run index.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<RunResult>> {
    cfg.validate()?;
    let env = cfg.build_env()?;
    let schedule = eval_schedule(cfg.horizon, cfg.cadence());
    let mode = cfg.eval_mode_for(&env);
    let params = cfg.alg_params(&env);
    let mut out = Vec::with_capacity(cfg.algos.len() * cfg.runs);
    for &algo in &cfg.algos {
        let results: Vec<Result<RunResult>> = (0..cfg.runs)
            .into_par_iter()
            .map(|run_id| {
                let spec = RunSpec {
                    env: &env,
                    algo,
                    params: params.clone(),
                    horizon: cfg.horizon,
                    schedule: &schedule,
                    eval_mode: mode,
                    threshold: cfg.threshold,
                    seed: cfg.seed,
                    run_id,
                };
                run_single(&spec).map(|(r, _)| r)
            })
            .collect();
        for r in results {
            out.push(r?);
        }
    }
    Ok(out)
}

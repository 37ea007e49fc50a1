//! Flat `key = value` experiment configuration.

use std::path::{Path, PathBuf};

use crate::environment::{
    build_linear_orthogonal_env, build_logistic_noisy_env, Context, ContextualEnv, RewardModel,
};
use crate::error::{io_err, BanditError, Result};
use crate::evaluation::{EvalMode, DEFAULT_MC_SAMPLES};
use crate::policies::{AlgParams, Variant};

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentKind {
    LinearOrthogonal,
    LogisticNoisy,
    CustomFile(PathBuf),
}

/// How regret is evaluated at each checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalSetting {
    /// Exact on finite environments, Monte Carlo otherwise.
    Auto,
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub algos: Vec<Variant>,
    pub d: usize,
    pub k: usize,
    pub m: f64,
    pub scale: f64,
    pub horizon: usize,
    pub runs: usize,
    pub seed: u64,
    pub delta: f64,
    pub lambda: f64,
    pub s_bound: Option<f64>,
    pub eval_mode: EvalSetting,
    pub mc_samples: usize,
    pub eval_every: Option<usize>,
    pub threshold: Option<f64>,
    pub fast_thats: bool,
    pub radius_override: Option<f64>,
    pub out_csv: PathBuf,
    pub out_plot: Option<PathBuf>,
    pub log_y: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentKind::LinearOrthogonal,
            algos: vec![Variant::SimpleLinTs],
            d: 8,
            k: 128,
            m: 2.0,
            scale: 5.0,
            horizon: 1500,
            runs: 100,
            seed: 0,
            delta: 0.05,
            lambda: 1.0,
            s_bound: None,
            eval_mode: EvalSetting::Auto,
            mc_samples: DEFAULT_MC_SAMPLES,
            eval_every: None,
            threshold: None,
            fast_thats: false,
            radius_override: None,
            out_csv: PathBuf::from("results.csv"),
            out_plot: None,
            log_y: false,
        }
    }
}

fn config_err(msg: impl Into<String>) -> BanditError {
    BanditError::Config(msg.into())
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| config_err(format!("`{key}`: cannot parse `{value}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(config_err(format!("`{key}`: expected a boolean, got `{value}`"))),
    }
}

fn optional(value: &str) -> Option<&str> {
    match value.to_ascii_lowercase().as_str() {
        "" | "none" => None,
        _ => Some(value),
    }
}

impl ExperimentConfig {
    /// Parses a whole configuration text on top of the defaults.
    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_err(format!("line {}: expected `key = value`", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| config_err(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let mut cfg = Self::parse_str(&text)?;
        if let ExperimentKind::CustomFile(p) = &cfg.experiment {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    cfg.experiment = ExperimentKind::CustomFile(dir.join(p));
                }
            }
        }
        Ok(cfg)
    }

    /// Sets one key; used both by the file parser and by command-line overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let k = key.to_ascii_lowercase();
        match k.as_str() {
            "experiment" => {
                self.experiment = match value.to_ascii_lowercase().as_str() {
                    "linear_orthogonal" => ExperimentKind::LinearOrthogonal,
                    "logistic_noisy" => ExperimentKind::LogisticNoisy,
                    "custom_file" => match &self.experiment {
                        ExperimentKind::CustomFile(p) => ExperimentKind::CustomFile(p.clone()),
                        _ => ExperimentKind::CustomFile(PathBuf::new()),
                    },
                    other => return Err(config_err(format!("unknown experiment `{other}`"))),
                }
            }
            "env_file" => self.experiment = ExperimentKind::CustomFile(PathBuf::from(value)),
            "algo" | "algos" => {
                self.algos = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(str::parse)
                    .collect::<Result<Vec<Variant>>>()?;
            }
            "d" => self.d = parse_num(key, value)?,
            "k" => self.k = parse_num(key, value)?,
            "m" => self.m = parse_num(key, value)?,
            "scale" => self.scale = parse_num(key, value)?,
            "t" | "horizon" => self.horizon = parse_num(key, value)?,
            "runs" => self.runs = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "delta" => self.delta = parse_num(key, value)?,
            "lambda" => self.lambda = parse_num(key, value)?,
            "s_bound" => self.s_bound = optional(value).map(|v| parse_num(key, v)).transpose()?,
            "eval_mode" => {
                self.eval_mode = match value.to_ascii_lowercase().as_str() {
                    "auto" => EvalSetting::Auto,
                    "exact" => EvalSetting::Exact,
                    "mc" | "monte_carlo" | "montecarlo" => EvalSetting::MonteCarlo,
                    other => return Err(config_err(format!("unknown eval_mode `{other}`"))),
                }
            }
            "mc_samples" => self.mc_samples = parse_num(key, value)?,
            "eval_every" => self.eval_every = optional(value).map(|v| parse_num(key, v)).transpose()?,
            "threshold" => self.threshold = optional(value).map(|v| parse_num(key, v)).transpose()?,
            "fast_thats" => self.fast_thats = parse_bool(key, value)?,
            "radius" | "radius_override" => {
                self.radius_override = optional(value).map(|v| parse_num(key, v)).transpose()?
            }
            "out_csv" | "out" => self.out_csv = PathBuf::from(value),
            "out_plot" | "plot" => self.out_plot = optional(value).map(PathBuf::from),
            "log_y" => self.log_y = parse_bool(key, value)?,
            _ => return Err(config_err(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.algos.is_empty() {
            return Err(config_err("no algorithm given"));
        }
        if self.runs == 0 {
            return Err(config_err("runs must be >= 1"));
        }
        if self.eval_every == Some(0) {
            return Err(config_err("eval_every must be >= 1"));
        }
        if self.mc_samples == 0 {
            return Err(config_err("mc_samples must be >= 1"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(config_err(format!("delta must lie in (0,1), got {}", self.delta)));
        }
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(config_err(format!("lambda must be > 0, got {}", self.lambda)));
        }
        if let Some(s) = self.s_bound {
            if !(s > 0.0) || !s.is_finite() {
                return Err(config_err(format!("s_bound must be > 0, got {s}")));
            }
        }
        if let Some(th) = self.threshold {
            if !th.is_finite() {
                return Err(config_err("threshold must be finite"));
            }
        }
        if let Some(r) = self.radius_override {
            if !(r >= 0.0) || !r.is_finite() {
                return Err(config_err(format!("radius must be >= 0, got {r}")));
            }
        }
        if let ExperimentKind::CustomFile(p) = &self.experiment {
            if p.as_os_str().is_empty() {
                return Err(config_err("custom_file experiment needs `env_file`"));
            }
        }
        let env = self.build_env()?;
        if self.eval_mode == EvalSetting::Exact && !env.is_finite() {
            return Err(config_err("exact evaluation needs a finite-context environment"));
        }
        if !env.reward_model().is_logistic() {
            if let Some(v) = self.algos.iter().find(|v| v.is_logistic()) {
                return Err(config_err(format!("{v} needs a logistic environment")));
            }
        }
        Ok(())
    }

    pub fn build_env(&self) -> Result<ContextualEnv> {
        match &self.experiment {
            ExperimentKind::LinearOrthogonal => build_linear_orthogonal_env(self.d, self.k, self.scale),
            ExperimentKind::LogisticNoisy => build_logistic_noisy_env(self.d, self.m),
            ExperimentKind::CustomFile(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
                parse_env_file(&text)
            }
        }
    }

    /// Evaluation cadence, `max(1, T/100)` unless configured.
    pub fn cadence(&self) -> usize {
        self.eval_every.unwrap_or((self.horizon / 100).max(1))
    }

    pub fn eval_mode_for(&self, env: &ContextualEnv) -> EvalMode {
        match self.eval_mode {
            EvalSetting::Exact => EvalMode::Exact,
            EvalSetting::Auto if env.is_finite() => EvalMode::Exact,
            _ => EvalMode::MonteCarlo {
                samples: self.mc_samples,
            },
        }
    }

    pub fn alg_params(&self, env: &ContextualEnv) -> AlgParams {
        AlgParams {
            lambda: self.lambda,
            s: self.s_bound.unwrap_or_else(|| env.s_bound()),
            delta: self.delta,
            horizon: self.horizon.max(1),
            fast_thats: self.fast_thats,
            radius_override: self.radius_override,
            ..AlgParams::default()
        }
    }
}

fn parse_vector(text: &str) -> Result<Vec<f64>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_num("vector", s))
        .collect()
}

/// Parses a finite-context environment description.
///
/// ```text
/// reward = logistic          # or: linear
/// noise_std = 1.0            # linear only
/// theta_star = 1.0, -0.5
/// s_bound = 3                # optional
/// context = 0.5 ; 1 0 | 0 1  # probability ; arm | arm | ...
/// ```
pub fn parse_env_file(text: &str) -> Result<ContextualEnv> {
    let mut reward = None;
    let mut noise_std = 1.0;
    let mut theta = None;
    let mut s_bound = None;
    let mut dim = None;
    let mut contexts = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let at = |e: BanditError| config_err(format!("env line {}: {e}", lineno + 1));
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| config_err(format!("env line {}: expected `key = value`", lineno + 1)))?;
        let (key, value) = (key.trim().to_ascii_lowercase(), value.trim());
        match key.as_str() {
            "dim" => dim = Some(parse_num::<usize>("dim", value).map_err(at)?),
            "reward" => {
                reward = Some(match value.to_ascii_lowercase().as_str() {
                    "linear" => false,
                    "logistic" => true,
                    other => return Err(config_err(format!("env line {}: unknown reward `{other}`", lineno + 1))),
                })
            }
            "noise_std" => noise_std = parse_num("noise_std", value).map_err(at)?,
            "theta_star" => theta = Some(parse_vector(value).map_err(at)?),
            "s_bound" => s_bound = Some(parse_num("s_bound", value).map_err(at)?),
            "context" => {
                let (p, arms) = value.split_once(';').ok_or_else(|| {
                    config_err(format!("env line {}: expected `probability ; arms`", lineno + 1))
                })?;
                let probability = parse_num("probability", p.trim()).map_err(at)?;
                let arms = arms
                    .split('|')
                    .map(parse_vector)
                    .collect::<Result<Vec<_>>>()
                    .map_err(at)?;
                contexts.push(Context { probability, arms });
            }
            other => return Err(config_err(format!("env line {}: unknown key `{other}`", lineno + 1))),
        }
    }
    let theta = theta.ok_or_else(|| config_err("env file lacks `theta_star`"))?;
    if let Some(d) = dim {
        if d != theta.len() {
            return Err(BanditError::DimensionMismatch {
                expected: d,
                actual: theta.len(),
            });
        }
    }
    let model = match reward {
        Some(true) => RewardModel::Logistic,
        Some(false) => RewardModel::Linear { noise_std },
        None => return Err(config_err("env file lacks `reward`")),
    };
    ContextualEnv::finite(theta, model, contexts, s_bound)
}

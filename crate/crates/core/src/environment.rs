//! Contextual bandit environments.
//!
//! An environment pairs a context distribution (finite list or a generative
//! sampler) with a reward model around a hidden parameter `θ*`. Two builders
//! reproduce the synthetic benchmarks: the orthogonal-arm linear environment
//! and the noisy-arm logistic environment.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, BanditError, Result};
use crate::mathkit::{argmax_first, dot, norm, sigmoid};

const NORM_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RewardModel {
    /// `X = φᵀθ* + noise_std·N(0,1)`.
    Linear { noise_std: f64 },
    /// `X ~ Bernoulli(μ(φᵀθ*))`.
    Logistic,
}

impl RewardModel {
    pub fn is_logistic(&self) -> bool {
        matches!(self, RewardModel::Logistic)
    }
}

/// One context of a finite context distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Context {
    pub probability: f64,
    pub arms: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ContextSource {
    Finite(Vec<Context>),
    /// Arm 0 is `e₁`; the other `arms_per_round − 1` arms are fresh uniform
    /// unit vectors orthogonal to `e₁`, redrawn every round.
    OrthogonalArms { arms_per_round: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContextHandle {
    Finite(usize),
    /// Generative contexts never repeat and carry no identity.
    Fresh,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundObservation {
    pub context: ContextHandle,
    pub features: Vec<Vec<f64>>,
    pub chosen: usize,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContextualEnv {
    dim: usize,
    theta_star: Vec<f64>,
    reward_model: RewardModel,
    source: ContextSource,
    s_bound: f64,
}

impl ContextualEnv {
    /// Builds a finite-context environment. `s_bound` defaults to `‖θ*‖ + 1`.
    pub fn finite(
        theta_star: Vec<f64>,
        reward_model: RewardModel,
        contexts: Vec<Context>,
        s_bound: Option<f64>,
    ) -> Result<Self> {
        Self::new(theta_star, reward_model, ContextSource::Finite(contexts), s_bound)
    }

    pub fn new(
        theta_star: Vec<f64>,
        reward_model: RewardModel,
        source: ContextSource,
        s_bound: Option<f64>,
    ) -> Result<Self> {
        let s_bound = s_bound.unwrap_or_else(|| norm(&theta_star) + 1.0);
        let env = Self {
            dim: theta_star.len(),
            theta_star,
            reward_model,
            source,
            s_bound,
        };
        env.audit()?;
        Ok(env)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn theta_star(&self) -> &[f64] {
        &self.theta_star
    }

    pub fn reward_model(&self) -> RewardModel {
        self.reward_model
    }

    pub fn source(&self) -> &ContextSource {
        &self.source
    }

    pub fn s_bound(&self) -> f64 {
        self.s_bound
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.source, ContextSource::Finite(_))
    }

    pub fn contexts(&self) -> Option<&[Context]> {
        match &self.source {
            ContextSource::Finite(c) => Some(c),
            ContextSource::OrthogonalArms { .. } => None,
        }
    }

    /// Checks the feature-norm, parameter-norm and probability invariants.
    pub fn audit(&self) -> Result<()> {
        let fail = |m: String| Err(BanditError::Audit(m));
        if self.dim == 0 {
            return fail("dimension must be positive".into());
        }
        if self.theta_star.iter().any(|v| !v.is_finite()) {
            return fail("theta_star has non-finite entries".into());
        }
        if !(self.s_bound > 0.0) || !self.s_bound.is_finite() {
            return fail(format!("s_bound must be positive, got {}", self.s_bound));
        }
        if norm(&self.theta_star) > self.s_bound + NORM_SLACK {
            return fail(format!(
                "‖θ*‖ = {} exceeds s_bound {}",
                norm(&self.theta_star),
                self.s_bound
            ));
        }
        if let RewardModel::Linear { noise_std } = self.reward_model {
            if !(noise_std >= 0.0) || !noise_std.is_finite() {
                return fail(format!("noise_std must be >= 0, got {noise_std}"));
            }
        }
        match &self.source {
            ContextSource::Finite(contexts) => {
                if contexts.is_empty() {
                    return fail("no contexts".into());
                }
                let mut total = 0.0;
                for (s, ctx) in contexts.iter().enumerate() {
                    if !(ctx.probability >= 0.0) || !ctx.probability.is_finite() {
                        return fail(format!("context {s} has probability {}", ctx.probability));
                    }
                    total += ctx.probability;
                    if ctx.arms.is_empty() {
                        return fail(format!("context {s} offers no action"));
                    }
                    for (a, phi) in ctx.arms.iter().enumerate() {
                        if phi.len() != self.dim {
                            return fail(format!(
                                "context {s} arm {a} has dimension {}, expected {}",
                                phi.len(),
                                self.dim
                            ));
                        }
                        if norm(phi) > 1.0 + NORM_SLACK {
                            return fail(format!("context {s} arm {a} has norm {}", norm(phi)));
                        }
                    }
                }
                if (total - 1.0).abs() > 1e-12 {
                    return fail(format!("context probabilities sum to {total}"));
                }
            }
            ContextSource::OrthogonalArms { arms_per_round } => {
                if self.dim < 2 {
                    return fail("orthogonal arms need d >= 2".into());
                }
                if *arms_per_round < 1 {
                    return fail("arms_per_round must be >= 1".into());
                }
            }
        }
        Ok(())
    }

    /// Draws a context and its action feature list.
    pub fn sample_round<R: Rng + ?Sized>(&self, rng: &mut R) -> (ContextHandle, Vec<Vec<f64>>) {
        match &self.source {
            ContextSource::Finite(contexts) => {
                let i = if contexts.len() == 1 {
                    0
                } else {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let mut pick = contexts.len() - 1;
                    for (i, c) in contexts.iter().enumerate() {
                        acc += c.probability;
                        if u < acc {
                            pick = i;
                            break;
                        }
                    }
                    pick
                };
                (ContextHandle::Finite(i), contexts[i].arms.clone())
            }
            ContextSource::OrthogonalArms { arms_per_round } => {
                let mut arms = Vec::with_capacity(*arms_per_round);
                let mut first = vec![0.0; self.dim];
                first[0] = 1.0;
                arms.push(first);
                for _ in 1..*arms_per_round {
                    arms.push(orthogonal_unit(self.dim, rng));
                }
                (ContextHandle::Fresh, arms)
            }
        }
    }

    /// Expected reward of a feature vector.
    pub fn mean_reward(&self, feature: &[f64]) -> f64 {
        let z = dot(feature, &self.theta_star);
        match self.reward_model {
            RewardModel::Linear { .. } => z,
            RewardModel::Logistic => sigmoid(z),
        }
    }

    pub fn sample_reward<R: Rng + ?Sized>(&self, feature: &[f64], rng: &mut R) -> f64 {
        let z = dot(feature, &self.theta_star);
        match self.reward_model {
            RewardModel::Linear { noise_std } => {
                if noise_std == 0.0 {
                    z
                } else {
                    let g: f64 = rng.sample(StandardNormal);
                    z + noise_std * g
                }
            }
            RewardModel::Logistic => {
                if rng.random::<f64>() < sigmoid(z) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Index of the best action, lowest index on ties.
    pub fn optimal_action(&self, features: &[Vec<f64>]) -> Option<usize> {
        argmax_first(features.iter().map(|f| dot(f, &self.theta_star)))
    }
}

/// Uniform unit vector orthogonal to `e₁`: a Gaussian with its first
/// coordinate removed, normalized; resampled on a (measure-zero) zero draw.
fn orthogonal_unit<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        v[0] = 0.0;
        let n = norm(&v);
        if n > 1e-12 {
            v.iter_mut().for_each(|x| *x /= n);
            return v;
        }
    }
}

/// Orthogonal-arm linear environment: `θ* = scale·e₁`, arm 0 is `e₁`, the
/// other `k − 1` arms are uniform on the unit sphere orthogonal to `e₁`, and
/// rewards carry Gaussian noise with standard deviation `‖θ*‖`.
pub fn build_linear_orthogonal_env(d: usize, k: usize, scale: f64) -> Result<ContextualEnv> {
    if d < 2 {
        return Err(invalid("d", "orthogonal-arm environment needs d >= 2"));
    }
    if k < 2 {
        return Err(invalid("K", "need at least two arms per round"));
    }
    if !scale.is_finite() {
        return Err(BanditError::NonFinite("scale"));
    }
    let mut theta = vec![0.0; d];
    theta[0] = scale;
    ContextualEnv::new(
        theta,
        RewardModel::Linear {
            noise_std: scale.abs(),
        },
        ContextSource::OrthogonalArms { arms_per_round: k },
        None,
    )
}

/// Noisy-arm logistic environment with a single context. Arms are
/// `−e₁ … −e_{d−1}` (indices `0..d−1`), then `+0.3·e_d` (index `d−1`) and
/// `−0.3·e_d` (index `d`); `θ* = (M, …, M, 1)`.
pub fn build_logistic_noisy_env(d: usize, m: f64) -> Result<ContextualEnv> {
    if d < 2 {
        return Err(invalid("d", "logistic noisy environment needs d >= 2"));
    }
    if !m.is_finite() {
        return Err(BanditError::NonFinite("M"));
    }
    let mut arms = Vec::with_capacity(d + 1);
    for i in 0..d - 1 {
        let mut a = vec![0.0; d];
        a[i] = -1.0;
        arms.push(a);
    }
    for sign in [1.0, -1.0] {
        let mut a = vec![0.0; d];
        a[d - 1] = 0.3 * sign;
        arms.push(a);
    }
    let mut theta = vec![m; d];
    theta[d - 1] = 1.0;
    ContextualEnv::finite(
        theta,
        RewardModel::Logistic,
        vec![Context {
            probability: 1.0,
            arms,
        }],
        None,
    )
}

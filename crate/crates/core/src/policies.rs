//! Pure-exploration policies as per-round steppers.
//!
//! Every variant exposes the same loop: [`AlgState::select`] picks an action
//! from the current feature list, [`AlgState::observe`] feeds back the reward,
//! and [`AlgState::finalize`] produces the greedy output policy at any time.
//!
//! The action rules themselves are pure functions (`*_choose`) so that they
//! can be driven with injected parameter samples.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::confidence::{beta_t, ConfidenceRegion, RadiusParams};
use crate::error::{invalid, BanditError, Result};
use crate::estimation::{fit_constrained_mle, fit_mle, rls_from_design, Dataset, FitOptions};
use crate::linalg::PdMatrix;
use crate::mathkit::{argmax_first, check_dim, dot, norm, sigmoid_slope};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    MuLin,
    SimpleLinTs,
    MuLog,
    Thats,
    Uniform,
    CumuLinTs,
}

impl Variant {
    pub const ALL: [Variant; 6] = [
        Variant::MuLin,
        Variant::SimpleLinTs,
        Variant::MuLog,
        Variant::Thats,
        Variant::Uniform,
        Variant::CumuLinTs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::MuLin => "mulin",
            Variant::SimpleLinTs => "simplelints",
            Variant::MuLog => "mulog",
            Variant::Thats => "thats",
            Variant::Uniform => "uniform",
            Variant::CumuLinTs => "cumulints",
        }
    }

    /// Variants that need binary rewards and maintain loss-level regions.
    pub fn is_logistic(self) -> bool {
        matches!(self, Variant::MuLog | Variant::Thats)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = BanditError;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace(['-', '_'], "");
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == key)
            .ok_or_else(|| invalid("algo", format!("unknown algorithm `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgParams {
    pub lambda: f64,
    pub s: f64,
    pub delta: f64,
    pub horizon: usize,
    /// Use the global MLE for `θ̄` and the ball projection of the sample for `θ′`.
    pub fast_thats: bool,
    /// Replaces the theoretical level `β_t²` (and `2β_t²`) when set.
    pub radius_override: Option<f64>,
    pub solver_tol: f64,
}

impl Default for AlgParams {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            s: 1.0,
            delta: 0.05,
            horizon: 1,
            fast_thats: false,
            radius_override: None,
            solver_tol: 1e-9,
        }
    }
}

impl AlgParams {
    fn validate(&self, dim: usize) -> Result<RadiusParams> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(invalid("lambda", format!("must be > 0, got {}", self.lambda)));
        }
        if let Some(r) = self.radius_override {
            if !(r >= 0.0) || !r.is_finite() {
                return Err(invalid("radius_override", format!("must be >= 0, got {r}")));
            }
        }
        if !(self.solver_tol >= 0.0) {
            return Err(invalid("solver_tol", "must be >= 0"));
        }
        RadiusParams::new(dim, self.s, self.horizon.max(1), self.delta)
    }
}

/// Greedy output policy `s ↦ argmax_a φ(s,a)ᵀθ_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicySnapshot {
    pub theta_out: Vec<f64>,
}

impl PolicySnapshot {
    pub fn new(theta_out: Vec<f64>) -> Self {
        Self { theta_out }
    }

    pub fn act(&self, features: &[Vec<f64>]) -> Result<usize> {
        greedy_choose(features, &self.theta_out)
    }
}

/// Per-round diagnostics kept by every stepper.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub action: usize,
    /// `‖φ_t‖²` in the inverse of the unit-weight design before the update.
    pub potential: f64,
    /// Weight used in the curvature-weighted design, when the variant keeps one.
    pub weight: Option<f64>,
}

/// `μ̇(φᵀθ)‖φ‖_{L⁻¹}`.
pub fn uncertainty(features: &[f64], theta: &[f64], l: &PdMatrix) -> Result<f64> {
    check_dim(l.dim(), features.len())?;
    check_dim(l.dim(), theta.len())?;
    Ok(sigmoid_slope(dot(features, theta)) * l.inv_norm(features)?)
}

fn nonempty(features: &[Vec<f64>]) -> Result<()> {
    if features.is_empty() {
        return Err(BanditError::EmptyActionSet);
    }
    Ok(())
}

fn choose_by<F>(features: &[Vec<f64>], dim: usize, mut score: F) -> Result<usize>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    nonempty(features)?;
    let mut scores = Vec::with_capacity(features.len());
    for phi in features {
        check_dim(dim, phi.len())?;
        scores.push(score(phi)?);
    }
    Ok(argmax_first(scores).expect("nonempty"))
}

/// `argmax_a ‖φ_a‖_{V⁻¹}`.
pub fn mulin_choose(v: &PdMatrix, features: &[Vec<f64>]) -> Result<usize> {
    choose_by(features, v.dim(), |phi| v.quad_form_inv(phi))
}

/// `argmax_a |φ_aᵀθ̃|`.
pub fn abs_score_choose(features: &[Vec<f64>], theta_tilde: &[f64]) -> Result<usize> {
    choose_by(features, theta_tilde.len(), |phi| Ok(dot(phi, theta_tilde).abs()))
}

/// `argmax_a φ_aᵀθ`.
pub fn greedy_choose(features: &[Vec<f64>], theta: &[f64]) -> Result<usize> {
    choose_by(features, theta.len(), |phi| Ok(dot(phi, theta)))
}

/// `argmax_a μ̇(φ_aᵀθ̄)|φ_aᵀθ̃|`.
pub fn thats_choose(features: &[Vec<f64>], theta_bar: &[f64], theta_tilde: &[f64]) -> Result<usize> {
    check_dim(theta_bar.len(), theta_tilde.len())?;
    choose_by(features, theta_bar.len(), |phi| {
        Ok(sigmoid_slope(dot(phi, theta_bar)) * dot(phi, theta_tilde).abs())
    })
}

/// Joint choice `argmax_{a, θ ∈ region} μ̇(φ_aᵀθ)‖φ_a‖_{L⁻¹}`.
///
/// For each action the inner maximum is attained where `|φ_aᵀθ|` is smallest.
pub fn mulog_choose(
    region: &ConfidenceRegion,
    data: &Dataset,
    l: &PdMatrix,
    features: &[Vec<f64>],
    tol: f64,
) -> Result<(usize, Vec<f64>)> {
    nonempty(features)?;
    let mut best: Option<(usize, f64, Vec<f64>)> = None;
    for (a, phi) in features.iter().enumerate() {
        check_dim(l.dim(), phi.len())?;
        let (theta, _) = region.min_abs_linear(data, phi, tol)?;
        let u = uncertainty(phi, &theta, l)?;
        if best.as_ref().is_none_or(|(_, b, _)| u > *b) {
            best = Some((a, u, theta));
        }
    }
    let (a, _, theta) = best.expect("nonempty");
    Ok((a, theta))
}

fn project_ball(theta: &[f64], s: f64) -> Vec<f64> {
    let n = norm(theta);
    if n <= s {
        theta.to_vec()
    } else {
        theta.iter().map(|t| t * s / n).collect()
    }
}

#[derive(Debug, Clone)]
enum Pending {
    None,
    MuLog,
    Thats {
        theta_bar: Vec<f64>,
        theta_tilde: Vec<f64>,
    },
}

/// State of one run of one algorithm.
#[derive(Debug, Clone)]
pub struct AlgState {
    variant: Variant,
    params: AlgParams,
    radius: RadiusParams,
    dim: usize,
    logistic_rewards: bool,
    data: Dataset,
    /// `V_t` for linear variants, `L_t` for curvature-weighted ones.
    design: PdMatrix,
    /// Unit-weight `V_t`, kept by every variant.
    gram: PdMatrix,
    response: Vec<f64>,
    region: Option<ConfidenceRegion>,
    centers: Vec<Vec<f64>>,
    warm: Option<Vec<f64>>,
    pending: Pending,
    history: Vec<RoundRecord>,
}

impl AlgState {
    /// `logistic_rewards` selects the estimator used by linear variants when
    /// producing their output policy.
    pub fn new(variant: Variant, dim: usize, params: AlgParams, logistic_rewards: bool) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "must be >= 1"));
        }
        let radius = params.validate(dim)?;
        if variant.is_logistic() && !logistic_rewards {
            return Err(invalid(
                "algo",
                format!("{variant} requires binary (logistic) rewards"),
            ));
        }
        let design = PdMatrix::scaled_identity(params.lambda, dim)?;
        let region = if variant.is_logistic() {
            Some(ConfidenceRegion::new(dim, params.s, params.lambda)?)
        } else {
            None
        };
        Ok(Self {
            variant,
            radius,
            dim,
            logistic_rewards,
            data: Dataset::new(dim),
            gram: design.clone(),
            design,
            response: vec![0.0; dim],
            region,
            centers: Vec::new(),
            warm: None,
            pending: Pending::None,
            history: Vec::new(),
            params,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn params(&self) -> &AlgParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of completed rounds.
    pub fn round(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn design(&self) -> &PdMatrix {
        &self.design
    }

    pub fn gram(&self) -> &PdMatrix {
        &self.gram
    }

    pub fn region(&self) -> Option<&ConfidenceRegion> {
        self.region.as_ref()
    }

    /// Centers `θ̂_i` (or `θ̄_i`) appended so far, one per round.
    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn history(&self) -> &[RoundRecord] {
        &self.history
    }

    /// Level of the loss constraint for round `t` (1-based).
    fn level(&self, t: usize, factor: f64) -> f64 {
        match self.params.radius_override {
            Some(r) => factor * r,
            None => {
                let b = beta_t(t, &self.radius);
                factor * b * b
            }
        }
    }

    fn fit_options(&self) -> FitOptions {
        FitOptions::default()
    }

    fn mle(&self) -> Result<Vec<f64>> {
        Ok(fit_mle(&self.data, self.params.lambda, &self.fit_options(), self.warm.as_deref())?.theta)
    }

    fn theta_bar(&self) -> Result<Vec<f64>> {
        if self.params.fast_thats {
            return self.mle();
        }
        Ok(fit_constrained_mle(
            &self.data,
            self.params.lambda,
            self.params.s,
            &self.fit_options(),
            self.warm.as_deref(),
        )?
        .theta)
    }

    fn rls(&self) -> Result<Vec<f64>> {
        Ok(rls_from_design(&self.gram, &self.response)?.theta)
    }

    /// Picks the action for the current round.
    pub fn select<R: Rng + ?Sized>(&mut self, features: &[Vec<f64>], rng: &mut R) -> Result<usize> {
        nonempty(features)?;
        for phi in features {
            check_dim(self.dim, phi.len())?;
        }
        let t = self.data.len() + 1;
        match self.variant {
            Variant::MuLin => mulin_choose(&self.design, features),
            Variant::SimpleLinTs => {
                let tilde = self.design.sample_inverse_gaussian(rng);
                abs_score_choose(features, &tilde)
            }
            Variant::Uniform => Ok(rng.random_range(0..features.len())),
            Variant::CumuLinTs => {
                let center = self.rls()?;
                let noise = self.design.sample_inverse_gaussian(rng);
                let tilde: Vec<f64> = center.iter().zip(&noise).map(|(a, b)| a + b).collect();
                greedy_choose(features, &tilde)
            }
            Variant::MuLog => {
                if !matches!(self.pending, Pending::MuLog) {
                    let center = self.mle()?;
                    let level = self.level(t, 1.0);
                    let region = self.region.as_mut().expect("logistic variant has a region");
                    region.push(&self.data, t - 1, &center, level)?;
                    self.warm = Some(center.clone());
                    self.centers.push(center);
                    self.pending = Pending::MuLog;
                }
                let region = self.region.as_ref().expect("logistic variant has a region");
                let (a, _) = mulog_choose(region, &self.data, &self.design, features, self.params.solver_tol)?;
                Ok(a)
            }
            Variant::Thats => {
                let theta_bar = match &self.pending {
                    Pending::Thats { theta_bar, .. } => theta_bar.clone(),
                    _ => {
                        let bar = self.theta_bar()?;
                        let level = self.level(t, 2.0);
                        let region = self.region.as_mut().expect("logistic variant has a region");
                        region.push(&self.data, t - 1, &bar, level)?;
                        self.warm = Some(bar.clone());
                        self.centers.push(bar.clone());
                        bar
                    }
                };
                let tilde = self.design.sample_inverse_gaussian(rng);
                let a = thats_choose(features, &theta_bar, &tilde)?;
                self.pending = Pending::Thats {
                    theta_bar,
                    theta_tilde: tilde,
                };
                Ok(a)
            }
        }
    }

    /// Records the reward for the feature that was played.
    pub fn observe(&mut self, action: usize, feature: &[f64], reward: f64) -> Result<()> {
        check_dim(self.dim, feature.len())?;
        if !reward.is_finite() {
            return Err(BanditError::NonFinite("reward"));
        }
        if self.variant.is_logistic() && reward != 0.0 && reward != 1.0 {
            return Err(BanditError::NonBinaryReward(reward));
        }
        let potential = self.gram.quad_form_inv(feature)?;
        let weight = match self.variant {
            Variant::MuLog => {
                if !matches!(self.pending, Pending::MuLog) {
                    return Err(invalid("observe", "called before select"));
                }
                let region = self.region.as_ref().expect("logistic variant has a region");
                let (theta_prime, _) =
                    region.maximize_abs_linear(&self.data, feature, self.params.solver_tol)?;
                Some(sigmoid_slope(dot(feature, &theta_prime)))
            }
            Variant::Thats => {
                let (theta_bar, theta_tilde) = match &self.pending {
                    Pending::Thats {
                        theta_bar,
                        theta_tilde,
                    } => (theta_bar.clone(), theta_tilde.clone()),
                    _ => return Err(invalid("observe", "called before select")),
                };
                let theta_prime = if self.params.fast_thats {
                    project_ball(&theta_tilde, self.params.s)
                } else {
                    let t = self.data.len() + 1;
                    let mut single = ConfidenceRegion::new(self.dim, self.params.s, self.params.lambda)?;
                    single.push(&self.data, t - 1, &theta_bar, self.level(t, 2.0))?;
                    single
                        .maximize_abs_linear(&self.data, feature, self.params.solver_tol)?
                        .0
                };
                Some(sigmoid_slope(dot(feature, &theta_prime)))
            }
            _ => None,
        };
        self.data.push(feature, reward)?;
        self.gram.rank_one_update(1.0, feature)?;
        for (r, p) in self.response.iter_mut().zip(feature) {
            *r += reward * p;
        }
        match weight {
            Some(w) => self.design.rank_one_update(w, feature)?,
            None => self.design = self.gram.clone(),
        }
        self.pending = Pending::None;
        self.history.push(RoundRecord {
            action,
            potential,
            weight,
        });
        Ok(())
    }

    /// Output policy after the rounds observed so far.
    ///
    /// Linear variants use least squares on linear rewards and the logistic MLE
    /// on binary ones. The region-based variants refresh their region with the
    /// current data and return the projection of the fresh center onto it.
    pub fn finalize(&self) -> Result<PolicySnapshot> {
        let theta = match self.variant {
            Variant::MuLog | Variant::Thats => {
                let t = self.data.len() + 1;
                let (center, factor) = if self.variant == Variant::MuLog {
                    (self.mle()?, 1.0)
                } else {
                    (self.theta_bar()?, 2.0)
                };
                let mut region = self.region.clone().expect("logistic variant has a region");
                if matches!(self.pending, Pending::None) {
                    region.push(&self.data, t - 1, &center, self.level(t, factor))?;
                }
                region.project(&self.data, &center, self.params.solver_tol)?
            }
            _ if self.logistic_rewards => self.mle()?,
            _ => self.rls()?,
        };
        Ok(PolicySnapshot::new(theta))
    }
}

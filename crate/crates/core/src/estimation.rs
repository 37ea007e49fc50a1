//! Loss functions and estimators over a trajectory of `(feature, reward)` pairs.
//!
//! The regularized logistic loss is
//!
//! ```text
//! ℒ(θ) = (λ/2)‖θ‖² + Σᵢ [ log(1 + e^{zᵢ}) − xᵢ zᵢ ],   zᵢ = φᵢᵀθ
//! ```
//!
//! so that its gradient is `λθ + Σ (μ(zᵢ) − xᵢ) φᵢ` and its Hessian is
//! `λI + Σ μ̇(zᵢ) φᵢφᵢᵀ`.

use crate::error::{invalid, BanditError, Result};
use crate::linalg::PdMatrix;
use crate::mathkit::{check_dim, dot, norm, sigmoid, sigmoid_slope, softplus};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    dim: usize,
    /// Row-major, one feature per row.
    features: Vec<f64>,
    rewards: Vec<f64>,
    all_binary: bool,
}

impl Dataset {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            features: Vec::new(),
            rewards: Vec::new(),
            all_binary: true,
        }
    }

    pub fn from_pairs(dim: usize, pairs: &[(Vec<f64>, f64)]) -> Result<Self> {
        let mut data = Self::new(dim);
        for (phi, x) in pairs {
            data.push(phi, *x)?;
        }
        Ok(data)
    }

    pub fn push(&mut self, feature: &[f64], reward: f64) -> Result<()> {
        check_dim(self.dim, feature.len())?;
        if !reward.is_finite() || feature.iter().any(|v| !v.is_finite()) {
            return Err(BanditError::NonFinite("observation"));
        }
        if norm(feature) > 1.0 + 1e-9 {
            return Err(invalid("feature", format!("norm {} exceeds 1", norm(feature))));
        }
        self.features.extend_from_slice(feature);
        self.rewards.push(reward);
        self.all_binary &= reward == 0.0 || reward == 1.0;
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn feature(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn reward(&self, i: usize) -> f64 {
        self.rewards[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.features
            .chunks_exact(self.dim.max(1))
            .zip(self.rewards.iter().copied())
    }

    pub(crate) fn check_binary(&self) -> Result<()> {
        if self.all_binary {
            return Ok(());
        }
        let bad = self
            .rewards
            .iter()
            .copied()
            .find(|&x| x != 0.0 && x != 1.0)
            .unwrap_or(f64::NAN);
        Err(BanditError::NonBinaryReward(bad))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub theta: Vec<f64>,
    /// Gradient norm, or projected-gradient norm for ball-constrained fits.
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 100,
        }
    }
}

fn check_inputs(theta: &[f64], data: &Dataset, lambda: f64) -> Result<()> {
    check_dim(data.dim(), theta.len())?;
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(invalid("lambda", format!("must be > 0, got {lambda}")));
    }
    data.check_binary()
}

/// Loss over the first `n` observations; no validation.
pub(crate) fn loss_prefix(theta: &[f64], data: &Dataset, n: usize, lambda: f64) -> f64 {
    let mut s = 0.5 * lambda * dot(theta, theta);
    for (phi, x) in data.iter().take(n) {
        let z = dot(phi, theta);
        s += softplus(z) - x * z;
    }
    s
}

fn grad_prefix(theta: &[f64], data: &Dataset, n: usize, lambda: f64) -> Vec<f64> {
    let mut g: Vec<f64> = theta.iter().map(|t| lambda * t).collect();
    for (phi, x) in data.iter().take(n) {
        let r = sigmoid(dot(phi, theta)) - x;
        for (gj, pj) in g.iter_mut().zip(phi) {
            *gj += r * pj;
        }
    }
    g
}

/// Dense row-major Hessian over the first `n` observations.
pub(crate) fn hessian_entries(theta: &[f64], data: &Dataset, n: usize, lambda: f64) -> Vec<f64> {
    let d = theta.len();
    let mut h = vec![0.0; d * d];
    for (phi, _) in data.iter().take(n) {
        let w = sigmoid_slope(dot(phi, theta));
        for i in 0..d {
            let wi = w * phi[i];
            if wi == 0.0 {
                continue;
            }
            for j in 0..=i {
                h[i * d + j] += wi * phi[j];
            }
        }
    }
    for i in 0..d {
        h[i * d + i] += lambda;
        for j in 0..i {
            h[j * d + i] = h[i * d + j];
        }
    }
    h
}

/// Regularized logistic negative log-likelihood.
pub fn logistic_loss(theta: &[f64], data: &Dataset, lambda: f64) -> Result<f64> {
    check_inputs(theta, data, lambda)?;
    Ok(loss_prefix(theta, data, data.len(), lambda))
}

pub fn logistic_grad(theta: &[f64], data: &Dataset, lambda: f64) -> Result<Vec<f64>> {
    check_inputs(theta, data, lambda)?;
    Ok(grad_prefix(theta, data, data.len(), lambda))
}

pub fn logistic_hessian(theta: &[f64], data: &Dataset, lambda: f64) -> Result<PdMatrix> {
    check_inputs(theta, data, lambda)?;
    PdMatrix::from_dense(theta.len(), hessian_entries(theta, data, data.len(), lambda))
}

/// Regularized least squares `θ̂ = V⁻¹ Σ xᵢφᵢ` with `V = λI + Σ φᵢφᵢᵀ`.
pub fn fit_rls(data: &Dataset, lambda: f64) -> Result<FitResult> {
    let d = data.dim();
    let mut v = PdMatrix::scaled_identity(lambda, d)?;
    let mut b = vec![0.0; d];
    for (phi, x) in data.iter() {
        v.rank_one_update(1.0, phi)?;
        for (bj, pj) in b.iter_mut().zip(phi) {
            *bj += x * pj;
        }
    }
    rls_from_design(&v, &b)
}

/// RLS from an already accumulated design matrix and response vector.
pub fn rls_from_design(v: &PdMatrix, b: &[f64]) -> Result<FitResult> {
    let theta = v.solve(b)?;
    let d = v.dim();
    let residual: f64 = (0..d)
        .map(|i| {
            let r: f64 = (0..d).map(|j| v.get(i, j) * theta[j]).sum::<f64>() - b[i];
            r * r
        })
        .sum::<f64>()
        .sqrt();
    Ok(FitResult {
        theta,
        grad_norm: residual,
        iterations: 1,
        converged: true,
    })
}

/// Unconstrained regularized MLE by damped Newton.
pub fn fit_mle(
    data: &Dataset,
    lambda: f64,
    opts: &FitOptions,
    warm_start: Option<&[f64]>,
) -> Result<FitResult> {
    let d = data.dim();
    let theta0 = warm_start.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; d]);
    check_inputs(&theta0, data, lambda)?;
    Ok(newton(data, data.len(), lambda, 0.0, theta0, opts))
}

/// Newton's method on `ℒ(θ) + ridge‖θ‖²` over the first `n` observations.
fn newton(
    data: &Dataset,
    n: usize,
    lambda: f64,
    ridge: f64,
    mut theta: Vec<f64>,
    opts: &FitOptions,
) -> FitResult {
    let d = theta.len();
    let eff = lambda + 2.0 * ridge;
    let f = |t: &[f64]| loss_prefix(t, data, n, eff);
    let mut value = f(&theta);
    let mut grad = grad_prefix(&theta, data, n, eff);
    let mut gnorm = norm(&grad);
    let mut it = 0;
    while gnorm > opts.tol && it < opts.max_iter {
        it += 1;
        let h = match PdMatrix::from_dense(d, hessian_entries(&theta, data, n, eff)) {
            Ok(h) => h,
            Err(_) => break,
        };
        let step: Vec<f64> = h.solve(&grad).unwrap().iter().map(|s| -s).collect();
        let slope = dot(&grad, &step);
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let cand: Vec<f64> = theta.iter().zip(&step).map(|(t, s)| t + alpha * s).collect();
            let cv = f(&cand);
            let armijo = cv <= value + 1e-4 * alpha * slope;
            // near the optimum the loss is flat to rounding; accept full steps
            // that reduce the gradient instead
            let flat = alpha == 1.0 && cv <= value + 1e-12 * (1.0 + value.abs());
            if armijo || flat {
                let cg = grad_prefix(&cand, data, n, eff);
                let cgn = norm(&cg);
                if armijo || cgn < gnorm {
                    theta = cand;
                    value = cv;
                    grad = cg;
                    gnorm = cgn;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    FitResult {
        theta,
        grad_norm: gnorm,
        iterations: it,
        converged: gnorm <= opts.tol,
    }
}

fn project_ball(theta: &[f64], s: f64) -> Vec<f64> {
    let n = norm(theta);
    if n <= s {
        theta.to_vec()
    } else {
        theta.iter().map(|t| t * s / n).collect()
    }
}

/// Norm of the projected-gradient residual `θ − P_S(θ − ∇ℒ(θ))`.
pub fn projected_gradient_norm(theta: &[f64], data: &Dataset, n: usize, lambda: f64, s: f64) -> f64 {
    let g = grad_prefix(theta, data, n, lambda);
    let moved: Vec<f64> = theta.iter().zip(&g).map(|(t, gi)| t - gi).collect();
    let p = project_ball(&moved, s);
    theta.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Logistic MLE over the ball `‖θ‖ ≤ S`.
///
/// When the unconstrained MLE lies outside the ball the solution sits on the
/// boundary and satisfies `∇ℒ(θ) + 2ηθ = 0` for some `η > 0`. The multiplier
/// is found by a safeguarded Newton iteration on `1/‖θ(η)‖ − 1/S`, each
/// `θ(η)` being a Newton solve of the strongly convex penalized loss, and the
/// final point is projected onto the sphere.
pub fn fit_constrained_mle(
    data: &Dataset,
    lambda: f64,
    s: f64,
    opts: &FitOptions,
    warm_start: Option<&[f64]>,
) -> Result<FitResult> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(invalid("S", format!("radius must be > 0, got {s}")));
    }
    let free = fit_mle(data, lambda, opts, warm_start)?;
    if norm(&free.theta) <= s {
        return Ok(free);
    }
    constrained_on_boundary(data, data.len(), lambda, s, opts, free)
}

fn constrained_on_boundary(
    data: &Dataset,
    n: usize,
    lambda: f64,
    s: f64,
    opts: &FitOptions,
    free: FitResult,
) -> Result<FitResult> {
    let d = data.dim();
    let inner = FitOptions {
        tol: opts.tol * 1e-2,
        max_iter: opts.max_iter,
    };
    // bracket [lo, hi] on η with ‖θ(lo)‖ > S ≥ ‖θ(hi)‖
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut theta = free.theta.clone();
    let mut total_iter = free.iterations;
    loop {
        let fit = newton(data, n, lambda, hi, theta.clone(), &inner);
        total_iter += fit.iterations;
        if norm(&fit.theta) <= s {
            break;
        }
        lo = hi;
        theta = fit.theta;
        hi *= 4.0;
        if hi > 1e12 {
            return Err(BanditError::SolverFailure("multiplier bracket diverged".into()));
        }
    }
    let mut eta = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fit = newton(data, n, lambda, eta, theta.clone(), &inner);
        total_iter += fit.iterations;
        theta = fit.theta;
        let tn = norm(&theta);
        if (tn - s).abs() <= 1e-13 * s {
            break;
        }
        if tn > s {
            lo = eta;
        } else {
            hi = eta;
        }
        // dθ/dη = −(H + 2ηI)⁻¹ 2θ ;  d(1/‖θ‖)/dη = −θᵀ dθ/dη / ‖θ‖³
        let mut next = 0.5 * (lo + hi);
        if let Ok(h) = PdMatrix::from_dense(d, hessian_entries(&theta, data, n, lambda + 2.0 * eta)) {
            let two_theta: Vec<f64> = theta.iter().map(|t| 2.0 * t).collect();
            let q = h.solve(&two_theta)?;
            let deriv = dot(&theta, &q) / (tn * tn * tn);
            if deriv > 0.0 {
                let cand = eta - (1.0 / tn - 1.0 / s) / deriv;
                if cand > lo && cand < hi {
                    next = cand;
                }
            }
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
        eta = next;
    }
    let theta = project_ball(&theta, s);
    let pg = projected_gradient_norm(&theta, data, n, lambda, s);
    Ok(FitResult {
        theta,
        grad_norm: pg,
        iterations: total_iter,
        converged: pg <= opts.tol,
    })
}

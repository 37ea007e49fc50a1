//! Confidence radii and loss-level confidence regions.
//!
//! The radii follow the self-concordant logistic analysis:
//!
//! ```text
//! λ_T  = 1 ∨ (2d/S) log(e√(1 + T/4d) ∨ 1/δ)
//! ρ_t  = (1/2 + S)√λ_T + (4d/√λ_T) log(e√(1 + t/4d) ∨ 1/δ)
//! β_t  = ρ_t + ρ_t²/√λ_T
//! γ_t  = (4 + 4S)ρ_t + √(8S + 8) β_t
//! τ_t  = √λ‖θ*‖ + √(2 log(1/δ) + d log(1 + t/(dλ)))
//! ```
//!
//! Regions are intersections of sublevel sets `ℒ_i(θ) − ℒ_i(θ∘) ≤ r_i` of the
//! regularized logistic loss with the ball `‖θ‖ ≤ S`; see [`region`].

mod region;
mod solver;

pub use region::{ConfidenceRegion, LossLevelConstraint};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusParams {
    pub d: usize,
    pub s: f64,
    pub horizon: usize,
    pub delta: f64,
}

impl RadiusParams {
    pub fn new(d: usize, s: f64, horizon: usize, delta: f64) -> Result<Self> {
        if d == 0 {
            return Err(invalid("d", "must be >= 1"));
        }
        if !(s > 0.0) || !s.is_finite() {
            return Err(invalid("S", format!("must be > 0, got {s}")));
        }
        if horizon == 0 {
            return Err(invalid("T", "must be >= 1"));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(invalid("delta", format!("must lie in (0,1), got {delta}")));
        }
        Ok(Self {
            d,
            s,
            horizon,
            delta,
        })
    }

    fn log_term(&self, t: f64) -> f64 {
        let d = self.d as f64;
        let a = std::f64::consts::E * (1.0 + t / (4.0 * d)).sqrt();
        a.max(1.0 / self.delta).ln()
    }
}

pub fn lambda_t(p: &RadiusParams) -> f64 {
    let d = p.d as f64;
    (2.0 * d / p.s * p.log_term(p.horizon as f64)).max(1.0)
}

pub fn rho_t(t: usize, p: &RadiusParams) -> f64 {
    let lt = lambda_t(p).sqrt();
    (0.5 + p.s) * lt + 4.0 * p.d as f64 / lt * p.log_term(t as f64)
}

pub fn beta_t(t: usize, p: &RadiusParams) -> f64 {
    let rho = rho_t(t, p);
    beta_from(rho, lambda_t(p))
}

/// `ρ + ρ²/√λ_T` for given `ρ` and `λ_T`.
pub fn beta_from(rho: f64, lambda_big: f64) -> f64 {
    rho + rho * rho / lambda_big.sqrt()
}

/// Ellipsoidal least-squares radius; used as a scalar diagnostic only.
pub fn tau_t(t: usize, lambda: f64, theta_norm: f64, p: &RadiusParams) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(invalid("lambda", format!("must be > 0, got {lambda}")));
    }
    Ok(tau_raw(t, lambda, theta_norm, p.d, p.delta))
}

pub(crate) fn tau_raw(t: usize, lambda: f64, theta_norm: f64, d: usize, delta: f64) -> f64 {
    let d = d as f64;
    lambda.sqrt() * theta_norm
        + (2.0 * (1.0 / delta).ln() + d * (1.0 + t as f64 / (d * lambda)).ln()).sqrt()
}

pub fn gamma_t(t: usize, p: &RadiusParams) -> f64 {
    gamma_from(rho_t(t, p), beta_t(t, p), p.s)
}

pub(crate) fn gamma_from(rho: f64, beta: f64, s: f64) -> f64 {
    (4.0 + 4.0 * s) * rho + (8.0 * s + 8.0).sqrt() * beta
}

/// Width bound for regions centered at the ball-constrained MLE: `2γ_t`.
pub fn gamma_t_constrained(t: usize, p: &RadiusParams) -> f64 {
    2.0 * gamma_t(t, p)
}

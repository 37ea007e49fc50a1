//! Simple-regret evaluation and checkable diagnostic bounds.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::environment::{ContextSource, ContextualEnv};
use crate::error::{invalid, BanditError, Result};
use crate::mathkit::{check_dim, dot, norm, sigmoid};
use crate::policies::PolicySnapshot;

/// Default number of sampled contexts for Monte Carlo evaluation.
pub const DEFAULT_MC_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Exact,
    MonteCarlo { samples: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EstimateKind {
    Exact,
    MonteCarlo { samples: usize, stderr: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretEstimate {
    pub value: f64,
    pub kind: EstimateKind,
}

impl RegretEstimate {
    pub fn stderr(&self) -> Option<f64> {
        match self.kind {
            EstimateKind::Exact => None,
            EstimateKind::MonteCarlo { stderr, .. } => Some(stderr),
        }
    }
}

fn context_regret(env: &ContextualEnv, policy: &PolicySnapshot, arms: &[Vec<f64>]) -> Result<f64> {
    let chosen = policy.act(arms)?;
    let best = arms
        .iter()
        .map(|a| env.mean_reward(a))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok((best - env.mean_reward(&arms[chosen])).max(0.0))
}

/// `𝔖ℜ(π) = Σ_s ν(s)[max_a m(s,a) − m(s,π(s))]`, exactly or by sampling contexts.
pub fn simple_regret<R: Rng + ?Sized>(
    policy: &PolicySnapshot,
    env: &ContextualEnv,
    mode: EvalMode,
    rng: &mut R,
) -> Result<RegretEstimate> {
    check_dim(env.dim(), policy.theta_out.len())?;
    match mode {
        EvalMode::Exact => {
            let contexts = env.contexts().ok_or(BanditError::GenerativeEnvironment)?;
            let mut value = 0.0;
            for c in contexts {
                if c.probability > 0.0 {
                    value += c.probability * context_regret(env, policy, &c.arms)?;
                }
            }
            Ok(RegretEstimate {
                value,
                kind: EstimateKind::Exact,
            })
        }
        EvalMode::MonteCarlo { samples } => {
            if samples == 0 {
                return Err(invalid("samples", "must be >= 1"));
            }
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            for _ in 0..samples {
                let (_, arms) = env.sample_round(rng);
                let r = context_regret(env, policy, &arms)?;
                sum += r;
                sum_sq += r * r;
            }
            let n = samples as f64;
            let mean = sum / n;
            let var = if samples > 1 {
                ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
            } else {
                0.0
            };
            Ok(RegretEstimate {
                value: mean,
                kind: EstimateKind::MonteCarlo {
                    samples,
                    stderr: (var / n).sqrt(),
                },
            })
        }
    }
}

fn prediction_error<F>(theta: &[f64], env: &ContextualEnv, link: F) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    check_dim(env.dim(), theta.len())?;
    let contexts = match env.source() {
        ContextSource::Finite(c) => c,
        _ => return Err(BanditError::GenerativeEnvironment),
    };
    let star = env.theta_star();
    Ok(contexts
        .iter()
        .map(|c| {
            let worst = c
                .arms
                .iter()
                .map(|a| (link(dot(a, star)) - link(dot(a, theta))).abs())
                .fold(0.0, f64::max);
            c.probability * worst
        })
        .sum())
}

/// `∫ max_a |φᵀ(θ* − θ)| ν(ds)` over a finite context distribution.
pub fn d_lin(theta: &[f64], env: &ContextualEnv) -> Result<f64> {
    prediction_error(theta, env, |z| z)
}

/// `∫ max_a |μ(φᵀθ*) − μ(φᵀθ)| ν(ds)` over a finite context distribution.
pub fn d_log(theta: &[f64], env: &ContextualEnv) -> Result<f64> {
    prediction_error(theta, env, sigmoid)
}

/// Elliptical potential bound `2d max(1, A²/λ) log(1 + nA²/(dλ))`.
pub fn epl_bound(n: usize, d: usize, lambda: f64, a: f64) -> Result<f64> {
    if d == 0 || !(lambda > 0.0) || !(a > 0.0) {
        return Err(invalid("epl_bound", "d, lambda and A must be positive"));
    }
    let d = d as f64;
    let a2 = a * a;
    Ok(2.0 * d * f64::max(1.0, a2 / lambda) * (n as f64 * a2 / (d * lambda)).ln_1p())
}

/// Reversed Bernstein bound `(4√(log(2 log T / δ)) + √Σx)²`.
pub fn reverse_bernstein_bound(sum_x: f64, horizon: f64, delta: f64) -> Result<f64> {
    if !(horizon >= 2.0) {
        return Err(invalid("T", format!("must be >= 2, got {horizon}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", format!("must lie in (0,1), got {delta}")));
    }
    if !(sum_x >= 0.0) {
        return Err(invalid("sum_x", format!("must be >= 0, got {sum_x}")));
    }
    let inner = (2.0 * horizon.ln() / delta).ln();
    let root = 4.0 * inner.max(0.0).sqrt() + sum_x.sqrt();
    Ok(root * root)
}

/// Monte Carlo moments of `⟨Z, e₁⟩` for `Z` uniform on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereMoments {
    pub mean_abs: f64,
    pub mean_sq: f64,
    pub abs_stderr: f64,
    pub sq_stderr: f64,
}

pub fn sphere_projection_check<R: Rng + ?Sized>(d: usize, samples: usize, rng: &mut R) -> Result<SphereMoments> {
    if d == 0 {
        return Err(invalid("d", "must be >= 1"));
    }
    if samples < 2 {
        return Err(invalid("samples", "need at least two samples"));
    }
    let mut x = vec![0.0; d];
    let (mut s1, mut s1q, mut s2, mut s2q) = (0.0, 0.0, 0.0, 0.0);
    let mut drawn = 0;
    while drawn < samples {
        for v in x.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        let n = norm(&x);
        if n == 0.0 {
            continue;
        }
        let p = x[0] / n;
        let a = p.abs();
        let q = p * p;
        s1 += a;
        s1q += a * a;
        s2 += q;
        s2q += q * q;
        drawn += 1;
    }
    let n = samples as f64;
    let stderr = |s: f64, sq: f64| {
        let m = s / n;
        (((sq - n * m * m) / (n - 1.0)).max(0.0) / n).sqrt()
    };
    Ok(SphereMoments {
        mean_abs: s1 / n,
        mean_sq: s2 / n,
        abs_stderr: stderr(s1, s1q),
        sq_stderr: stderr(s2, s2q),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{build_logistic_noisy_env, Context, ContextualEnv, RewardModel};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_arm_env() -> ContextualEnv {
        ContextualEnv::finite(
            vec![1.0, 0.0],
            RewardModel::Linear { noise_std: 1.0 },
            vec![Context {
                probability: 1.0,
                arms: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            }],
            None,
        )
        .unwrap()
    }

    #[test]
    fn exact_regret_examples() {
        let env = two_arm_env();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let good = PolicySnapshot::new(vec![1.0, 0.0]);
        let bad = PolicySnapshot::new(vec![0.0, 1.0]);
        assert_eq!(simple_regret(&good, &env, EvalMode::Exact, &mut rng).unwrap().value, 0.0);
        let r = simple_regret(&bad, &env, EvalMode::Exact, &mut rng).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.stderr(), None);
    }

    #[test]
    fn noisy_env_second_arm_gap() {
        let env = build_logistic_noisy_env(4, 2.0).unwrap();
        let mut theta = vec![0.0; 4];
        theta[3] = -1.0;
        let p = PolicySnapshot::new(theta);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = simple_regret(&p, &env, EvalMode::Exact, &mut rng).unwrap().value;
        assert!((r - (sigmoid(0.3) - sigmoid(-0.3))).abs() < 1e-12);
        assert!((r - 0.1488).abs() < 1e-4);
    }

    #[test]
    fn monte_carlo_on_finite_env() {
        let env = two_arm_env();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let bad = PolicySnapshot::new(vec![0.0, 1.0]);
        let r = simple_regret(&bad, &env, EvalMode::MonteCarlo { samples: 100 }, &mut rng).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.stderr(), Some(0.0));
    }

    #[test]
    fn generative_env_rejects_exact() {
        let env = crate::environment::build_linear_orthogonal_env(3, 4, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = PolicySnapshot::new(vec![1.0, 0.0, 0.0]);
        assert_eq!(
            simple_regret(&p, &env, EvalMode::Exact, &mut rng),
            Err(BanditError::GenerativeEnvironment)
        );
        assert!(d_lin(&[0.0; 3], &env).is_err());
        let r = simple_regret(&p, &env, EvalMode::MonteCarlo { samples: 1000 }, &mut rng).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn prediction_error_examples() {
        let single = ContextualEnv::finite(
            vec![1.0, 0.0],
            RewardModel::Linear { noise_std: 1.0 },
            vec![Context {
                probability: 1.0,
                arms: vec![vec![1.0, 0.0]],
            }],
            None,
        )
        .unwrap();
        assert_eq!(d_lin(&[1.0, 0.0], &single).unwrap(), 0.0);
        assert_eq!(d_lin(&[0.0, 0.0], &single).unwrap(), 1.0);
        assert_eq!(d_log(&[1.0, 0.0], &single).unwrap(), 0.0);
        assert!(d_log(&[-50.0, 3.0], &single).unwrap() <= 1.0);
    }

    #[test]
    fn epl_examples() {
        assert!((epl_bound(1, 1, 1.0, 1.0).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-15);
        assert_eq!(epl_bound(0, 3, 1.0, 1.0).unwrap(), 0.0);
        assert!(epl_bound(1, 0, 1.0, 1.0).is_err());
    }

    #[test]
    fn reverse_bernstein_examples() {
        let e2 = std::f64::consts::E.powi(2);
        let b = reverse_bernstein_bound(0.0, e2, 0.4).unwrap();
        assert!((b - 16.0 * 10f64.ln()).abs() < 1e-9);
        assert!((b - 36.84).abs() < 0.01);
        for x in [0.0, 1.0, 17.5, 400.0] {
            assert!(reverse_bernstein_bound(x, 100.0, 0.1).unwrap() >= x);
        }
        assert!(reverse_bernstein_bound(1.0, 1.5, 0.1).is_err());
    }

    #[test]
    fn sphere_in_one_dimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = sphere_projection_check(1, 1000, &mut rng).unwrap();
        assert_eq!(m.mean_abs, 1.0);
        assert_eq!(m.mean_sq, 1.0);
    }

    #[test]
    fn sphere_moments_d10() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = sphere_projection_check(10, 200_000, &mut rng).unwrap();
        assert!((m.mean_sq - 0.1).abs() < 0.002);
        assert!(m.mean_abs >= (2.0 / (10.0 * std::f64::consts::PI)).sqrt() - 3.0 * m.abs_stderr);
    }
}

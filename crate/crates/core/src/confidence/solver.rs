//! Log-barrier interior-point Newton method for small smooth convex programs.

use crate::error::{BanditError, Result};
use crate::linalg::cholesky;
use crate::mathkit::dot;

/// Value, gradient and (optionally) dense row-major Hessian of a smooth function.
#[derive(Debug, Clone)]
pub(crate) struct Eval {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Option<Vec<f64>>,
}

/// `minimize f(x)` subject to `g_j(x) ≤ 0`.
pub(crate) trait Program {
    fn dim(&self) -> usize;
    fn objective(&self, x: &[f64]) -> Eval;
    fn constraint_values(&self, x: &[f64]) -> Vec<f64>;
    fn constraints(&self, x: &[f64]) -> Vec<Eval>;
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct BarrierOptions {
    /// Target duality gap `m/t`.
    pub gap: f64,
    pub t0: f64,
    pub growth: f64,
    pub max_newton: usize,
}

impl BarrierOptions {
    pub fn with_gap(gap: f64, t0: f64) -> Self {
        Self {
            gap,
            t0,
            growth: 16.0,
            max_newton: 2000,
        }
    }
}

fn barrier_value(t: f64, f: f64, g: &[f64]) -> f64 {
    let mut v = t * f;
    for &gj in g {
        if gj >= 0.0 {
            return f64::INFINITY;
        }
        v -= (-gj).ln();
    }
    v
}

fn solve_spd(n: usize, h: &mut [f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let scale = (0..n).map(|i| h[i * n + i].abs()).fold(0.0, f64::max).max(1e-300);
    let mut jitter = 0.0;
    for _ in 0..12 {
        let mut a = h.to_vec();
        for i in 0..n {
            a[i * n + i] += jitter;
        }
        if let Ok(l) = cholesky(n, &a) {
            let mut y = rhs.to_vec();
            for i in 0..n {
                let mut s = y[i];
                for k in 0..i {
                    s -= l[i * n + k] * y[k];
                }
                y[i] = s / l[i * n + i];
            }
            for i in (0..n).rev() {
                let mut s = y[i];
                for k in i + 1..n {
                    s -= l[k * n + i] * y[k];
                }
                y[i] = s / l[i * n + i];
            }
            if y.iter().all(|v| v.is_finite()) {
                return Ok(y);
            }
        }
        jitter = if jitter == 0.0 { 1e-14 * scale } else { jitter * 100.0 };
    }
    Err(BanditError::SolverFailure(
        "barrier Newton system is singular".into(),
    ))
}

/// Runs the barrier method from a strictly feasible `x0`.
///
/// `stop` is consulted after every Newton step and ends the run early when
/// it returns `true`.
pub(crate) fn barrier_minimize<P: Program>(
    p: &P,
    x0: Vec<f64>,
    opts: BarrierOptions,
    stop: impl Fn(&[f64]) -> bool,
) -> Result<Vec<f64>> {
    let n = p.dim();
    let mut x = x0;
    let g0 = p.constraint_values(&x);
    if g0.iter().any(|&g| !(g < 0.0)) {
        return Err(BanditError::SolverFailure(
            "barrier start is not strictly feasible".into(),
        ));
    }
    let m = g0.len().max(1) as f64;
    let mut t = opts.t0;
    let mut steps = 0usize;
    loop {
        // centering
        loop {
            let obj = p.objective(&x);
            let cons = p.constraints(&x);
            let mut grad: Vec<f64> = obj.grad.iter().map(|v| t * v).collect();
            let mut hess = match &obj.hess {
                Some(h) => h.iter().map(|v| t * v).collect(),
                None => vec![0.0; n * n],
            };
            let mut gvals = Vec::with_capacity(cons.len());
            for c in &cons {
                let inv = 1.0 / (-c.value);
                gvals.push(c.value);
                for i in 0..n {
                    grad[i] += inv * c.grad[i];
                    let gi = inv * inv * c.grad[i];
                    for j in 0..n {
                        hess[i * n + j] += gi * c.grad[j];
                    }
                }
                if let Some(h) = &c.hess {
                    for (hv, cv) in hess.iter_mut().zip(h) {
                        *hv += inv * cv;
                    }
                }
            }
            let neg: Vec<f64> = grad.iter().map(|v| -v).collect();
            let step = solve_spd(n, &mut hess, &neg)?;
            let decrement = -dot(&grad, &step);
            let negligible = step
                .iter()
                .zip(&x)
                .all(|(dx, xi)| dx.abs() <= 1e-14 * (1.0 + xi.abs()));
            if !(decrement > 2e-10) || negligible {
                break;
            }
            steps += 1;
            if steps > opts.max_newton {
                return Err(BanditError::SolverFailure(format!(
                    "barrier method exceeded {} Newton steps",
                    opts.max_newton
                )));
            }
            let phi0 = barrier_value(t, obj.value, &gvals);
            let mut s = 1.0;
            let mut accepted = false;
            while s > 1e-16 {
                let trial: Vec<f64> = x.iter().zip(&step).map(|(a, b)| a + s * b).collect();
                let gt = p.constraint_values(&trial);
                if gt.iter().all(|&g| g < 0.0) {
                    let phi = barrier_value(t, p.objective(&trial).value, &gt);
                    if phi <= phi0 - 0.25 * s * decrement && trial != x {
                        x = trial;
                        accepted = true;
                        break;
                    }
                }
                s *= 0.5;
            }
            if !accepted {
                break;
            }
            if stop(&x) {
                return Ok(x);
            }
        }
        if stop(&x) || m / t <= opts.gap {
            return Ok(x);
        }
        t *= opts.growth;
    }
}

//! Intersections of logistic-loss sublevel sets with a Euclidean ball.
//!
//! Each constraint `i` reads `ℒ_{n_i}(θ) − ℒ_{n_i}(θ∘_i) ≤ r_i`, where `ℒ_n` is
//! the regularized loss over the first `n` observations of a shared
//! [`Dataset`]. Linear objectives and projections over the region are solved
//! by constraint generation: start from the ball-only optimum, add the most
//! violated loss constraint, re-solve the small working problem with a
//! log-barrier method, and repeat until every constraint holds.

use super::solver::{barrier_minimize, BarrierOptions, Eval, Program};
use crate::error::{invalid, BanditError, Result};
use crate::estimation::Dataset;
use crate::mathkit::{check_dim, dot, norm, sigmoid, sigmoid_slope, softplus};

const DEFAULT_CUT_LIMIT: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct LossLevelConstraint {
    prefix_len: usize,
    center: Vec<f64>,
    center_value: f64,
    radius: f64,
    redundant: bool,
}

impl LossLevelConstraint {
    /// Number of leading observations the loss is taken over.
    pub fn prefix_len(&self) -> usize {
        self.prefix_len
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// `ℒ_{n}(θ∘)` at the center.
    pub fn center_value(&self) -> f64 {
        self.center_value
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// True when the level exceeds the loss everywhere on the ball.
    pub fn is_redundant(&self) -> bool {
        self.redundant
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceRegion {
    dim: usize,
    ball_radius: f64,
    lambda: f64,
    constraints: Vec<LossLevelConstraint>,
    cut_limit: usize,
}

#[derive(Debug, Clone, Copy)]
enum Objective<'a> {
    Linear(&'a [f64]),
    Proximal(&'a [f64]),
}

impl Objective<'_> {
    fn eval(&self, x: &[f64]) -> Eval {
        match *self {
            Objective::Linear(c) => Eval {
                value: dot(c, x),
                grad: c.to_vec(),
                hess: None,
            },
            Objective::Proximal(p) => {
                let diff: Vec<f64> = x.iter().zip(p).map(|(a, b)| a - b).collect();
                let d = x.len();
                let mut h = vec![0.0; d * d];
                for i in 0..d {
                    h[i * d + i] = 1.0;
                }
                Eval {
                    value: 0.5 * dot(&diff, &diff),
                    grad: diff,
                    hess: Some(h),
                }
            }
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Objective::Linear(c) if c.iter().all(|v| *v == 0.0))
    }
}

/// Loss at several prefix lengths from a single pass over the data.
fn prefix_losses(
    data: &Dataset,
    theta: &[f64],
    lambda: f64,
    prefixes: &[usize],
    derivs: bool,
) -> Vec<Eval> {
    let d = theta.len();
    let mut order: Vec<usize> = (0..prefixes.len()).collect();
    order.sort_by_key(|&k| prefixes[k]);
    let max_n = prefixes.iter().copied().max().unwrap_or(0);
    let reg = 0.5 * lambda * dot(theta, theta);
    let mut sum = 0.0;
    let mut grad = vec![0.0; if derivs { d } else { 0 }];
    let mut hess = vec![0.0; if derivs { d * d } else { 0 }];
    let mut out: Vec<Option<Eval>> = vec![None; prefixes.len()];
    let mut pos = 0;
    for k in 0..=max_n {
        while pos < order.len() && prefixes[order[pos]] == k {
            let e = if derivs {
                let g: Vec<f64> = theta
                    .iter()
                    .zip(&grad)
                    .map(|(t, a)| lambda * t + a)
                    .collect();
                let mut h = vec![0.0; d * d];
                for i in 0..d {
                    for j in 0..=i {
                        h[i * d + j] = hess[i * d + j];
                        h[j * d + i] = hess[i * d + j];
                    }
                    h[i * d + i] += lambda;
                }
                Eval {
                    value: reg + sum,
                    grad: g,
                    hess: Some(h),
                }
            } else {
                Eval {
                    value: reg + sum,
                    grad: Vec::new(),
                    hess: None,
                }
            };
            out[order[pos]] = Some(e);
            pos += 1;
        }
        if k == max_n {
            break;
        }
        let phi = data.feature(k);
        let x = data.reward(k);
        let z = dot(phi, theta);
        sum += softplus(z) - x * z;
        if derivs {
            let r = sigmoid(z) - x;
            let w = sigmoid_slope(z);
            for i in 0..d {
                grad[i] += r * phi[i];
                let wi = w * phi[i];
                for j in 0..=i {
                    hess[i * d + j] += wi * phi[j];
                }
            }
        }
    }
    out.into_iter()
        .map(|e| e.expect("every prefix is reached"))
        .collect()
}

impl ConfidenceRegion {
    /// The ball `‖θ‖ ≤ ball_radius` with no loss constraints yet.
    pub fn new(dim: usize, ball_radius: f64, lambda: f64) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "must be >= 1"));
        }
        if !(ball_radius > 0.0) || !ball_radius.is_finite() {
            return Err(invalid("S", format!("must be > 0, got {ball_radius}")));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(invalid("lambda", format!("must be > 0, got {lambda}")));
        }
        Ok(Self {
            dim,
            ball_radius,
            lambda,
            constraints: Vec::new(),
            cut_limit: DEFAULT_CUT_LIMIT,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ball_radius(&self) -> f64 {
        self.ball_radius
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn constraints(&self) -> &[LossLevelConstraint] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Maximum number of loss constraints the solver may add before giving up.
    pub fn set_cut_limit(&mut self, limit: usize) {
        self.cut_limit = limit;
    }

    fn check_data(&self, data: &Dataset) -> Result<()> {
        check_dim(self.dim, data.dim())?;
        data.check_binary()
    }

    /// Appends `ℒ_{n}(θ) − ℒ_{n}(center) ≤ radius` over the first `prefix_len`
    /// observations of `data`.
    pub fn push(
        &mut self,
        data: &Dataset,
        prefix_len: usize,
        center: &[f64],
        radius: f64,
    ) -> Result<()> {
        self.check_data(data)?;
        check_dim(self.dim, center.len())?;
        if prefix_len > data.len() {
            return Err(invalid(
                "prefix_len",
                format!("{prefix_len} exceeds {} observations", data.len()),
            ));
        }
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(invalid("radius", format!("must be >= 0, got {radius}")));
        }
        if center.iter().any(|v| !v.is_finite()) {
            return Err(BanditError::NonFinite("region center"));
        }
        let center_value = prefix_losses(data, center, self.lambda, &[prefix_len], false)[0].value;
        let s = self.ball_radius;
        let ceiling = 0.5 * self.lambda * s * s
            + (0..prefix_len)
                .map(|k| softplus(s * norm(data.feature(k))))
                .sum::<f64>();
        self.constraints.push(LossLevelConstraint {
            prefix_len,
            center: center.to_vec(),
            center_value,
            radius,
            redundant: center_value + radius >= ceiling,
        });
        Ok(())
    }

    fn constraint_slack(&self, data: &Dataset, theta: &[f64], idx: &[usize], derivs: bool) -> Vec<Eval> {
        let prefixes: Vec<usize> = idx.iter().map(|&i| self.constraints[i].prefix_len).collect();
        let mut evals = prefix_losses(data, theta, self.lambda, &prefixes, derivs);
        for (e, &i) in evals.iter_mut().zip(idx) {
            let c = &self.constraints[i];
            e.value = (e.value - c.center_value) - c.radius;
        }
        evals
    }

    fn check_query(&self, data: &Dataset, theta: &[f64]) -> Result<()> {
        self.check_data(data)?;
        check_dim(self.dim, theta.len())?;
        if let Some(n) = self.constraints.iter().map(|c| c.prefix_len).max() {
            if n > data.len() {
                return Err(invalid(
                    "data",
                    format!("region needs {n} observations, got {}", data.len()),
                ));
            }
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(BanditError::NonFinite("region query point"));
        }
        Ok(())
    }

    /// `ℒ_{n_i}(θ) − ℒ_{n_i}(θ∘_i) − r_i` for every constraint.
    pub fn violations(&self, data: &Dataset, theta: &[f64]) -> Result<Vec<f64>> {
        self.check_query(data, theta)?;
        let idx: Vec<usize> = (0..self.constraints.len()).collect();
        Ok(self
            .constraint_slack(data, theta, &idx, false)
            .into_iter()
            .map(|e| e.value)
            .collect())
    }

    pub fn contains(&self, data: &Dataset, theta: &[f64], tol: f64) -> Result<bool> {
        self.check_query(data, theta)?;
        if norm(theta) > self.ball_radius + tol {
            return Ok(false);
        }
        Ok(self.most_violated(data, theta, &[]).is_none_or(|(_, v)| v <= tol))
    }

    fn most_violated(&self, data: &Dataset, theta: &[f64], skip: &[usize]) -> Option<(usize, f64)> {
        let idx: Vec<usize> = (0..self.constraints.len())
            .filter(|&i| !self.constraints[i].redundant && !skip.contains(&i))
            .collect();
        if idx.is_empty() {
            return None;
        }
        let vals = self.constraint_slack(data, theta, &idx, false);
        idx.iter()
            .zip(&vals)
            .map(|(&i, e)| (i, e.value))
            .fold(None, |best: Option<(usize, f64)>, (i, v)| match best {
                Some((_, b)) if b >= v => best,
                _ => Some((i, v)),
            })
    }

    fn ball_optimum(&self, objective: Objective<'_>) -> Vec<f64> {
        let s = self.ball_radius;
        match objective {
            Objective::Linear(c) => {
                let n = norm(c);
                if n == 0.0 {
                    vec![0.0; self.dim]
                } else {
                    c.iter().map(|v| -s * v / n).collect()
                }
            }
            Objective::Proximal(p) => {
                let n = norm(p);
                if n <= s {
                    p.to_vec()
                } else {
                    p.iter().map(|v| s * v / n).collect()
                }
            }
        }
    }

    fn solve(&self, data: &Dataset, objective: Objective<'_>, tol: f64) -> Result<Vec<f64>> {
        if !(tol >= 0.0) {
            return Err(invalid("tol", format!("must be >= 0, got {tol}")));
        }
        let mut x = self.ball_optimum(objective);
        let mut working: Vec<usize> = Vec::new();
        loop {
            let worst = match self.most_violated(data, &x, &[]) {
                Some((i, v)) if v > tol => i,
                _ => return Ok(x),
            };
            if working.contains(&worst) {
                return Err(BanditError::SolverFailure(
                    "working constraint violated after re-solve".into(),
                ));
            }
            if working.len() >= self.cut_limit {
                return Err(BanditError::FeasibilityNotCertified(self.cut_limit));
            }
            working.push(worst);
            x = self.solve_working(data, &working, objective, &x)?;
        }
    }

    fn solve_working(
        &self,
        data: &Dataset,
        working: &[usize],
        objective: Objective<'_>,
        previous: &[f64],
    ) -> Result<Vec<f64>> {
        let program = Working {
            region: self,
            data,
            idx: working,
            objective,
        };
        let start = self.strictly_feasible_start(&program, previous)?;
        if objective.is_zero() {
            return Ok(start);
        }
        let s = self.ball_radius;
        let (gap, scale) = match objective {
            Objective::Linear(c) => {
                let scale = 1.0 + norm(c) * s;
                (1e-6 * scale, scale)
            }
            Objective::Proximal(_) => (1e-11 * (1.0 + s * s), 1.0 + s * s),
        };
        let m = (working.len() + 1) as f64;
        barrier_minimize(&program, start, BarrierOptions::with_gap(gap, m / scale), |_| false)
    }

    fn strictly_feasible_start(&self, program: &Working<'_>, guess: &[f64]) -> Result<Vec<f64>> {
        let mut candidates: Vec<Vec<f64>> = vec![guess.to_vec()];
        for &i in program.idx.iter().rev() {
            let c = &self.constraints[i].center;
            let n = norm(c);
            let shrink = if n >= self.ball_radius { 0.999 * self.ball_radius / n } else { 1.0 };
            candidates.push(c.iter().map(|v| v * shrink).collect());
        }
        let mut best: Option<(Vec<f64>, f64)> = None;
        for cand in candidates {
            let worst = program
                .constraint_values(&cand)
                .into_iter()
                .fold(f64::NEG_INFINITY, f64::max);
            if worst < 0.0 {
                return Ok(cand);
            }
            if best.as_ref().is_none_or(|(_, b)| worst < *b) {
                best = Some((cand, worst));
            }
        }
        let (theta0, worst) = best.expect("at least one candidate");
        let phase = PhaseOne { inner: program };
        let mut x0 = theta0;
        let slack0 = worst + 1.0 + worst.abs() * 0.1;
        x0.push(slack0);
        let d = self.dim;
        let x = barrier_minimize(
            &phase,
            x0,
            BarrierOptions::with_gap(1e-10, (program.idx.len() + 1) as f64 / slack0.abs().max(1.0)),
            |x| x[d] < 0.0,
        )?;
        if x[d] < 0.0 {
            let theta = x[..d].to_vec();
            if program.constraint_values(&theta).iter().all(|&g| g < 0.0) {
                return Ok(theta);
            }
        }
        Err(BanditError::EmptyRegion(x[d]))
    }

    /// `argmin cᵀθ` over the region, returned with its value.
    pub fn minimize_linear(&self, data: &Dataset, c: &[f64], tol: f64) -> Result<(Vec<f64>, f64)> {
        check_dim(self.dim, c.len())?;
        self.check_query(data, c)?;
        let theta = self.solve(data, Objective::Linear(c), tol)?;
        let value = dot(c, &theta);
        Ok((theta, value))
    }

    /// `argmax |cᵀθ|` over the region; ties prefer the maximizer of `+cᵀθ`.
    pub fn maximize_abs_linear(&self, data: &Dataset, c: &[f64], tol: f64) -> Result<(Vec<f64>, f64)> {
        let (lo_theta, lo) = self.minimize_linear(data, c, tol)?;
        let neg: Vec<f64> = c.iter().map(|v| -v).collect();
        let (hi_theta, neg_hi) = self.minimize_linear(data, &neg, tol)?;
        let hi = -neg_hi;
        if hi.abs() >= lo.abs() {
            Ok((hi_theta, hi.abs()))
        } else {
            Ok((lo_theta, lo.abs()))
        }
    }

    /// `argmin |cᵀθ|` over the region.
    ///
    /// When the region straddles the hyperplane `cᵀθ = 0` the returned point is
    /// a convex combination of the two extreme points that lies on it.
    pub fn min_abs_linear(&self, data: &Dataset, c: &[f64], tol: f64) -> Result<(Vec<f64>, f64)> {
        let (lo_theta, lo) = self.minimize_linear(data, c, tol)?;
        let neg: Vec<f64> = c.iter().map(|v| -v).collect();
        let (hi_theta, neg_hi) = self.minimize_linear(data, &neg, tol)?;
        let hi = -neg_hi;
        if lo >= 0.0 {
            return Ok((lo_theta, lo));
        }
        if hi <= 0.0 {
            return Ok((hi_theta, -hi));
        }
        let alpha = hi / (hi - lo);
        let theta = lo_theta
            .iter()
            .zip(&hi_theta)
            .map(|(a, b)| alpha * a + (1.0 - alpha) * b)
            .collect();
        Ok((theta, 0.0))
    }

    /// Euclidean projection of `point` onto the region.
    pub fn project(&self, data: &Dataset, point: &[f64], tol: f64) -> Result<Vec<f64>> {
        self.check_query(data, point)?;
        self.solve(data, Objective::Proximal(point), tol)
    }
}

struct Working<'a> {
    region: &'a ConfidenceRegion,
    data: &'a Dataset,
    idx: &'a [usize],
    objective: Objective<'a>,
}

impl Working<'_> {
    fn ball(&self, x: &[f64], derivs: bool) -> Eval {
        let s = self.region.ball_radius;
        let d = x.len();
        let value = (dot(x, x) - s * s) / (2.0 * s);
        if !derivs {
            return Eval {
                value,
                grad: Vec::new(),
                hess: None,
            };
        }
        let mut h = vec![0.0; d * d];
        for i in 0..d {
            h[i * d + i] = 1.0 / s;
        }
        Eval {
            value,
            grad: x.iter().map(|v| v / s).collect(),
            hess: Some(h),
        }
    }
}

impl Program for Working<'_> {
    fn dim(&self) -> usize {
        self.region.dim
    }

    fn objective(&self, x: &[f64]) -> Eval {
        self.objective.eval(x)
    }

    fn constraint_values(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![self.ball(x, false).value];
        out.extend(
            self.region
                .constraint_slack(self.data, x, self.idx, false)
                .into_iter()
                .map(|e| e.value),
        );
        out
    }

    fn constraints(&self, x: &[f64]) -> Vec<Eval> {
        let mut out = vec![self.ball(x, true)];
        out.extend(self.region.constraint_slack(self.data, x, self.idx, true));
        out
    }
}

/// Minimizes a common slack `s` with `g_j(θ) ≤ s`; a negative optimum gives a
/// strictly feasible point of the working problem.
struct PhaseOne<'a, 'b> {
    inner: &'b Working<'a>,
}

impl Program for PhaseOne<'_, '_> {
    fn dim(&self) -> usize {
        self.inner.dim() + 1
    }

    fn objective(&self, x: &[f64]) -> Eval {
        let n = x.len();
        let mut grad = vec![0.0; n];
        grad[n - 1] = 1.0;
        Eval {
            value: x[n - 1],
            grad,
            hess: None,
        }
    }

    fn constraint_values(&self, x: &[f64]) -> Vec<f64> {
        let (theta, s) = x.split_at(x.len() - 1);
        self.inner
            .constraint_values(theta)
            .into_iter()
            .map(|g| g - s[0])
            .collect()
    }

    fn constraints(&self, x: &[f64]) -> Vec<Eval> {
        let n = x.len();
        let d = n - 1;
        let (theta, s) = x.split_at(d);
        self.inner
            .constraints(theta)
            .into_iter()
            .map(|e| {
                let mut grad = e.grad.clone();
                grad.push(-1.0);
                let hess = e.hess.map(|h| {
                    let mut big = vec![0.0; n * n];
                    for i in 0..d {
                        big[i * n..i * n + d].copy_from_slice(&h[i * d..i * d + d]);
                    }
                    big
                });
                Eval {
                    value: e.value - s[0],
                    grad,
                    hess,
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{fit_mle, FitOptions};

    fn toy_data() -> Dataset {
        let pairs = vec![
            (vec![1.0, 0.0], 1.0),
            (vec![0.0, 1.0], 0.0),
            (vec![0.6, 0.8], 1.0),
            (vec![-0.8, 0.6], 0.0),
            (vec![0.6, -0.8], 1.0),
            (vec![1.0, 0.0], 0.0),
        ];
        Dataset::from_pairs(2, &pairs).unwrap()
    }

    fn toy_region(data: &Dataset, radius: f64) -> ConfidenceRegion {
        let mut region = ConfidenceRegion::new(2, 6.0, 1.0).unwrap();
        let fit = fit_mle(data, 1.0, &FitOptions::default(), None).unwrap();
        region.push(data, data.len(), &fit.theta, radius).unwrap();
        region
    }

    fn grid_oracle(region: &ConfidenceRegion, data: &Dataset, c: &[f64], n: usize) -> f64 {
        let s = region.ball_radius();
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in 0..n {
                let th = [
                    -s + 2.0 * s * i as f64 / (n - 1) as f64,
                    -s + 2.0 * s * j as f64 / (n - 1) as f64,
                ];
                if region.contains(data, &th, 0.0).unwrap() {
                    best = best.min(dot(c, &th));
                }
            }
        }
        best
    }

    #[test]
    fn ball_only_closed_form() {
        let data = Dataset::new(3);
        let region = ConfidenceRegion::new(3, 2.0, 1.0).unwrap();
        let (theta, v) = region.minimize_linear(&data, &[3.0, 0.0, 4.0], 1e-9).unwrap();
        assert!((v + 10.0).abs() < 1e-12);
        assert!((theta[0] + 1.2).abs() < 1e-12);
        let (_, v) = region.maximize_abs_linear(&data, &[3.0, 0.0, 4.0], 1e-9).unwrap();
        assert!((v - 10.0).abs() < 1e-12);
        let p = region.project(&data, &[0.0, 4.0, 0.0], 1e-9).unwrap();
        assert!((p[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn center_has_exact_zero_excess() {
        let data = toy_data();
        let region = toy_region(&data, 0.5);
        let c = region.constraints()[0].center().to_vec();
        assert_eq!(region.violations(&data, &c).unwrap()[0], -0.5);
        assert!(region.contains(&data, &c, 0.0).unwrap());
    }

    #[test]
    fn linear_min_matches_grid() {
        let data = toy_data();
        let region = toy_region(&data, 1.0);
        for c in [[1.0, 0.0], [0.3, -0.9], [-1.0, 1.0]] {
            let (theta, v) = region.minimize_linear(&data, &c, 1e-9).unwrap();
            assert!(region.contains(&data, &theta, 1e-9).unwrap());
            let grid = grid_oracle(&region, &data, &c, 400);
            let spacing = 12.0 / 399.0;
            assert!(v <= grid + 1e-6);
            assert!(grid - v <= norm(&c) * spacing * 2.0);
        }
    }

    #[test]
    fn projection_is_feasible_and_closer_than_center() {
        let data = toy_data();
        let region = toy_region(&data, 0.3);
        let p = [5.0, 5.0];
        let q = region.project(&data, &p, 1e-9).unwrap();
        assert!(region.contains(&data, &q, 1e-9).unwrap());
        let center = region.constraints()[0].center();
        let dq = norm(&[q[0] - p[0], q[1] - p[1]]);
        let dc = norm(&[center[0] - p[0], center[1] - p[1]]);
        assert!(dq <= dc);
        // points inside are left alone
        let inner = region.project(&data, center, 1e-9).unwrap();
        assert!(norm(&[inner[0] - center[0], inner[1] - center[1]]) < 1e-12);
    }

    #[test]
    fn straddling_hyperplane_gives_zero() {
        let data = toy_data();
        let region = toy_region(&data, 2.0);
        let (theta, v) = region.min_abs_linear(&data, &[1.0, 1.0], 1e-9).unwrap();
        assert_eq!(v, 0.0);
        assert!((theta[0] + theta[1]).abs() < 1e-6);
        let empty = ConfidenceRegion::new(2, 1.0, 1.0).unwrap();
        let (theta, v) = empty.min_abs_linear(&Dataset::new(2), &[0.0, 1.0], 1e-9).unwrap();
        assert_eq!(v, 0.0);
        assert!(norm(&theta) < 1e-12);
    }

    #[test]
    fn disjoint_constraints_report_empty() {
        // a tight level around the origin on the empty prefix and a tight
        // level around the full-data fit, which sits far out along e1
        let pairs: Vec<(Vec<f64>, f64)> = (0..20).map(|_| (vec![1.0, 0.0], 1.0)).collect();
        let data = Dataset::from_pairs(2, &pairs).unwrap();
        let fit = fit_mle(&data, 1.0, &FitOptions::default(), None).unwrap();
        assert!(fit.theta[0] > 2.0);
        let mut region = ConfidenceRegion::new(2, 6.0, 1.0).unwrap();
        region.push(&data, 0, &[0.0, 0.0], 0.1).unwrap();
        region.push(&data, data.len(), &fit.theta, 0.1).unwrap();
        let err = region.minimize_linear(&data, &[1.0, 0.0], 1e-9).unwrap_err();
        assert!(matches!(err, BanditError::EmptyRegion(_)));
    }

    #[test]
    fn cut_limit_is_enforced() {
        let data = toy_data();
        let mut region = toy_region(&data, 0.5);
        region.set_cut_limit(0);
        let err = region.minimize_linear(&data, &[1.0, 0.0], 1e-9).unwrap_err();
        assert_eq!(err, BanditError::FeasibilityNotCertified(0));
    }

    #[test]
    fn redundant_levels_are_flagged() {
        let data = toy_data();
        let mut region = ConfidenceRegion::new(2, 1.0, 1.0).unwrap();
        region.push(&data, 3, &[0.0, 0.0], 1e6).unwrap();
        region.push(&data, 3, &[0.0, 0.0], 0.01).unwrap();
        assert!(region.constraints()[0].is_redundant());
        assert!(!region.constraints()[1].is_redundant());
    }

    #[test]
    fn prefix_losses_match_direct_sum() {
        let data = toy_data();
        let theta = [0.4, -1.3];
        let evals = prefix_losses(&data, &theta, 2.0, &[6, 0, 3], true);
        for (e, n) in evals.iter().zip([6, 0, 3]) {
            let direct = crate::estimation::loss_prefix(&theta, &data, n, 2.0);
            assert!((e.value - direct).abs() < 1e-12);
            let h = crate::estimation::hessian_entries(&theta, &data, n, 2.0);
            for (a, b) in e.hess.as_ref().unwrap().iter().zip(&h) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let data = toy_data();
        let mut region = ConfidenceRegion::new(2, 1.0, 1.0).unwrap();
        assert!(region.push(&data, 10, &[0.0, 0.0], 1.0).is_err());
        assert!(region.push(&data, 2, &[0.0], 1.0).is_err());
        assert!(region.push(&data, 2, &[0.0, 0.0], -1.0).is_err());
        assert!(ConfidenceRegion::new(2, 0.0, 1.0).is_err());
        region.push(&data, 6, &[0.0, 0.0], 1.0).unwrap();
        let short = Dataset::from_pairs(2, &[(vec![1.0, 0.0], 1.0)]).unwrap();
        assert!(region.contains(&short, &[0.0, 0.0], 0.0).is_err());
    }
}

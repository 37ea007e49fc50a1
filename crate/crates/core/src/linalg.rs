//! Symmetric positive-definite matrices with an incrementally maintained
//! Cholesky factor.
//!
//! `PdMatrix` backs the design matrix `λI + Σ φφᵀ`, the loss Hessian and the
//! slope-weighted surrogate `λI + Σ μ̇(φᵀθ′) φφᵀ`. Every query goes through the
//! lower-triangular factor; the inverse is never formed.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, BanditError, Result};
use crate::mathkit::check_dim;

/// Relative residual above which an incremental factor update is discarded
/// and the factor is recomputed from scratch.
const REFACTOR_RESIDUAL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct PdMatrix {
    dim: usize,
    /// Full symmetric matrix, row-major.
    entries: Vec<f64>,
    /// Lower-triangular Cholesky factor, row-major (upper part zero).
    factor: Vec<f64>,
    refactorizations: usize,
}

impl PdMatrix {
    pub fn scaled_identity(lambda: f64, d: usize) -> Result<Self> {
        if !lambda.is_finite() || lambda <= 0.0 {
            return Err(invalid("lambda", format!("must be finite and > 0, got {lambda}")));
        }
        if d == 0 {
            return Err(invalid("d", "dimension must be at least 1"));
        }
        let mut entries = vec![0.0; d * d];
        let mut factor = vec![0.0; d * d];
        let root = lambda.sqrt();
        for i in 0..d {
            entries[i * d + i] = lambda;
            factor[i * d + i] = root;
        }
        Ok(Self {
            dim: d,
            entries,
            factor,
            refactorizations: 0,
        })
    }

    /// Factorizes a dense row-major matrix. The input is symmetrized first;
    /// asymmetry beyond `1e-12` relative is rejected.
    pub fn from_dense(d: usize, mut entries: Vec<f64>) -> Result<Self> {
        check_dim(d * d, entries.len())?;
        for i in 0..d {
            for j in 0..i {
                let (a, b) = (entries[i * d + j], entries[j * d + i]);
                if (a - b).abs() > 1e-12 * (1.0 + a.abs().max(b.abs())) {
                    return Err(invalid("entries", format!("not symmetric at ({i},{j})")));
                }
                let m = 0.5 * (a + b);
                entries[i * d + j] = m;
                entries[j * d + i] = m;
            }
        }
        let factor = cholesky(d, &entries)?;
        Ok(Self {
            dim: d,
            entries,
            factor,
            refactorizations: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn factor(&self) -> &[f64] {
        &self.factor
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    /// Number of times the incremental update fell back to a full factorization.
    pub fn refactorizations(&self) -> usize {
        self.refactorizations
    }

    pub fn min_pivot(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.factor[i * self.dim + i])
            .fold(f64::INFINITY, f64::min)
    }

    /// `M ← M + weight·xxᵀ`, refreshing the factor with an O(d²) rank-one
    /// Cholesky update.
    pub fn rank_one_update(&mut self, weight: f64, x: &[f64]) -> Result<()> {
        check_dim(self.dim, x.len())?;
        if !weight.is_finite() || weight < 0.0 {
            return Err(invalid("weight", format!("must be finite and >= 0, got {weight}")));
        }
        if weight == 0.0 || x.iter().all(|&v| v == 0.0) {
            return Ok(());
        }
        let d = self.dim;
        for i in 0..d {
            for j in 0..d {
                self.entries[i * d + j] += weight * x[i] * x[j];
            }
        }
        let root = weight.sqrt();
        let mut w: Vec<f64> = x.iter().map(|v| v * root).collect();
        let l = &mut self.factor;
        for k in 0..d {
            let lkk = l[k * d + k];
            let r = lkk.hypot(w[k]);
            let c = r / lkk;
            let s = w[k] / lkk;
            l[k * d + k] = r;
            for i in (k + 1)..d {
                let lik = (l[i * d + k] + s * w[i]) / c;
                w[i] = c * w[i] - s * lik;
                l[i * d + k] = lik;
            }
        }
        if self.factor_residual(x) > REFACTOR_RESIDUAL {
            self.factor = cholesky(d, &self.entries)?;
            self.refactorizations += 1;
        }
        Ok(())
    }

    /// Non-mutating variant of [`rank_one_update`](Self::rank_one_update).
    pub fn with_rank_one(&self, weight: f64, x: &[f64]) -> Result<Self> {
        let mut out = self.clone();
        out.rank_one_update(weight, x)?;
        Ok(out)
    }

    /// Relative mismatch between `L Lᵀ x` and `M x` on a probe vector.
    fn factor_residual(&self, x: &[f64]) -> f64 {
        let d = self.dim;
        let l = &self.factor;
        let mut ltx = vec![0.0; d];
        for (j, out) in ltx.iter_mut().enumerate() {
            *out = (j..d).map(|i| l[i * d + j] * x[i]).sum();
        }
        let mut diff = 0.0;
        let mut scale = 0.0;
        for i in 0..d {
            let llt: f64 = (0..=i).map(|j| l[i * d + j] * ltx[j]).sum();
            let mx: f64 = (0..d).map(|j| self.entries[i * d + j] * x[j]).sum();
            diff += (llt - mx) * (llt - mx);
            scale += mx * mx;
        }
        (diff / scale.max(f64::MIN_POSITIVE)).sqrt()
    }

    /// Solves `L y = b`.
    fn forward(&self, b: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let l = &self.factor;
        let mut y = vec![0.0; d];
        for i in 0..d {
            let s: f64 = (0..i).map(|j| l[i * d + j] * y[j]).sum();
            y[i] = (b[i] - s) / l[i * d + i];
        }
        y
    }

    /// Solves `Lᵀ x = y`.
    fn backward(&self, y: &[f64]) -> Vec<f64> {
        let d = self.dim;
        let l = &self.factor;
        let mut x = vec![0.0; d];
        for i in (0..d).rev() {
            let s: f64 = ((i + 1)..d).map(|j| l[j * d + i] * x[j]).sum();
            x[i] = (y[i] - s) / l[i * d + i];
        }
        x
    }

    /// `xᵀ M⁻¹ x`, i.e. `‖x‖²` in the inverse norm.
    pub fn quad_form_inv(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        let y = self.forward(x);
        Ok(y.iter().map(|v| v * v).sum())
    }

    /// `‖x‖_{M⁻¹}`.
    pub fn inv_norm(&self, x: &[f64]) -> Result<f64> {
        Ok(self.quad_form_inv(x)?.sqrt())
    }

    /// `M⁻¹ b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, b.len())?;
        Ok(self.backward(&self.forward(b)))
    }

    /// Maps a standard normal vector `g` to `L⁻ᵀ g`, whose covariance is `M⁻¹`.
    pub fn inverse_gaussian_from(&self, g: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, g.len())?;
        Ok(self.backward(g))
    }

    /// Draws `θ ~ N(0, M⁻¹)`.
    pub fn sample_inverse_gaussian<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let g: Vec<f64> = (0..self.dim).map(|_| rng.sample(StandardNormal)).collect();
        self.backward(&g)
    }
}

/// Dense Cholesky factorization of a row-major symmetric matrix.
pub fn cholesky(d: usize, a: &[f64]) -> Result<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for j in 0..d {
        let mut diag = a[j * d + j];
        for k in 0..j {
            diag -= l[j * d + k] * l[j * d + k];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return Err(BanditError::NotPositiveDefinite {
                pivot: j,
                value: diag,
            });
        }
        let ljj = diag.sqrt();
        l[j * d + j] = ljj;
        for i in (j + 1)..d {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            l[i * d + j] = s / ljj;
        }
    }
    Ok(l)
}

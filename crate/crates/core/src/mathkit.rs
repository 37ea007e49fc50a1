//! Sigmoid link primitives, instance constants and small vector helpers.

use crate::error::{invalid, BanditError, Result};

/// The sigmoid and its first two derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkEval {
    pub value: f64,
    pub slope: f64,
    pub curvature: f64,
}

/// Evaluates `μ(z) = 1/(1+e^{-z})` with its slope and curvature.
///
/// Uses the `exp(-|z|)` branch so that large `|z|` never overflows.
pub fn sigmoid_eval(z: f64) -> Result<LinkEval> {
    if !z.is_finite() {
        return Err(BanditError::NonFinite("sigmoid argument"));
    }
    let value = sigmoid(z);
    let slope = value * (1.0 - value);
    Ok(LinkEval {
        value,
        slope,
        curvature: slope * (1.0 - 2.0 * value),
    })
}

#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `μ̇(z)`, computed symmetrically so it is exact for both signs.
#[inline]
pub fn sigmoid_slope(z: f64) -> f64 {
    let e = (-z.abs()).exp();
    e / ((1.0 + e) * (1.0 + e))
}

/// `log(1 + e^z)` without overflow.
#[inline]
pub fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Worst-case inverse slope `sup_{|z| ≤ S} 1/μ̇(z) = 2 + e^S + e^{-S}`.
pub fn kappa(s: f64) -> Result<f64> {
    if !s.is_finite() {
        return Err(BanditError::NonFinite("kappa radius"));
    }
    if s < 0.0 {
        return Err(invalid("S", format!("radius must be nonnegative, got {s}")));
    }
    Ok(2.0 + s.exp() + (-s).exp())
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Index of the largest score; ties go to the lowest index.
pub fn argmax_first<I: IntoIterator<Item = f64>>(scores: I) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.into_iter().enumerate() {
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i)
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(BanditError::DimensionMismatch { expected, actual });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn symmetry_point() {
        let e = sigmoid_eval(0.0).unwrap();
        assert_eq!(e.value, 0.5);
        assert_eq!(e.slope, 0.25);
        assert_eq!(e.curvature, 0.0);
    }

    #[test]
    fn sigmoid_reflection() {
        for z in [0.1, 1.0, 3.7, 25.0, 800.0] {
            let a = sigmoid_eval(z).unwrap().value;
            let b = sigmoid_eval(-z).unwrap().value;
            assert_relative_eq!(a + b, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn value_at_one() {
        let e = sigmoid_eval(1.0).unwrap();
        let expected = 1.0 / (1.0 + (-1.0f64).exp());
        assert_relative_eq!(e.value, expected, epsilon = 1e-15);
        assert!((e.slope - expected * (1.0 - expected)).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(sigmoid_eval(f64::NAN).is_err());
        assert!(sigmoid_eval(f64::INFINITY).is_err());
    }

    #[test]
    fn no_overflow_far_out() {
        let e = sigmoid_eval(-750.0).unwrap();
        assert!(e.value >= 0.0 && e.value.is_finite());
        let e = sigmoid_eval(750.0).unwrap();
        assert_eq!(e.value, 1.0);
    }

    #[test]
    fn link_grid_invariants() {
        let n = 10_000;
        for k in 0..n {
            let z = -30.0 + 60.0 * k as f64 / (n - 1) as f64;
            let e = sigmoid_eval(z).unwrap();
            assert!((e.slope - e.value * (1.0 - e.value)).abs() <= 1e-10);
            assert!(e.curvature.abs() <= e.slope + 1e-10);
            assert!(e.slope <= 0.25 + 1e-12);
            if z.abs() > 1e-3 {
                assert!(e.slope < 0.25 - 1e-12);
            }
            assert!((sigmoid_slope(z) - e.slope).abs() <= 1e-15);
        }
    }

    #[test]
    fn kappa_values() {
        assert_relative_eq!(kappa(0.0).unwrap(), 4.0);
        let e = std::f64::consts::E;
        assert_relative_eq!(kappa(1.0).unwrap(), 2.0 + e + 1.0 / e, epsilon = 1e-14);
        assert!(kappa(2.0).unwrap() > kappa(1.0).unwrap());
        assert!(kappa(-0.1).is_err());
    }

    #[test]
    fn kappa_dominates_grid() {
        // grid search of 1/μ̇ over |z| ≤ S
        for s in [0.0, 0.5, 1.0, 3.0] {
            let k = kappa(s).unwrap();
            let mut grid_max: f64 = 0.0;
            for i in 0..=2000 {
                let z = -s + 2.0 * s * i as f64 / 2000.0;
                let v = 1.0 / sigmoid_slope(z);
                assert!(k >= v * (1.0 - 1e-12));
                grid_max = grid_max.max(v);
            }
            assert_relative_eq!(k, grid_max, max_relative = 1e-12);
        }
    }

    #[test]
    fn softplus_matches_naive() {
        for z in [-20.0, -1.0, 0.0, 0.5, 10.0] {
            assert_relative_eq!(softplus(z), (1.0 + f64::exp(z)).ln(), max_relative = 1e-12);
        }
        assert_relative_eq!(softplus(1000.0), 1000.0);
    }

    #[test]
    fn argmax_ties_lowest() {
        assert_eq!(argmax_first([1.0, 3.0, 3.0, 2.0]), Some(1));
        assert_eq!(argmax_first(Vec::<f64>::new()), None);
    }
}

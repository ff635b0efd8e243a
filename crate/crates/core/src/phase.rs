//! Periodic decision variables: wrapping and a-posteriori mutation vectors.

use alloc::vec::Vec;
use core::f64::consts::TAU;

#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

use crate::covariance::CovarianceModel;

/// Boundary treatment for periodic variables living on `[0, period)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WrapPolicy {
    Unbounded,
    /// Resample offspring that leave the box. Never-evaluated rejects do not
    /// consume budget.
    Reject {
        period: f64,
    },
    /// Fold offspring back with `mod period` and rebuild their mutation
    /// vectors.
    Wrap {
        period: f64,
    },
}

impl WrapPolicy {
    pub fn wrap_2pi() -> Self {
        WrapPolicy::Wrap { period: TAU }
    }

    pub fn reject_2pi() -> Self {
        WrapPolicy::Reject { period: TAU }
    }

    pub fn period(&self) -> Option<f64> {
        match *self {
            WrapPolicy::Unbounded => None,
            WrapPolicy::Reject { period } | WrapPolicy::Wrap { period } => Some(period),
        }
    }
}

/// Maximum resampling attempts per generation and offspring under
/// [`WrapPolicy::Reject`].
pub const REJECT_ATTEMPTS_PER_OFFSPRING: usize = 100;

/// Maps `v` into `[0, period)`.
#[inline]
pub fn wrap_scalar(v: f64, period: f64) -> f64 {
    let r = v - period * (v / period).floor();
    // rounding can land exactly on `period` for tiny negative inputs
    if r >= period || r < 0.0 {
        0.0
    } else {
        r
    }
}

pub fn wrap(phi: &[f64], period: f64) -> Vec<f64> {
    phi.iter().map(|&v| wrap_scalar(v, period)).collect()
}

pub fn in_box(x: &[f64], period: f64) -> bool {
    x.iter().all(|&v| (0.0..period).contains(&v))
}

/// Distance on the circle of circumference `period`.
pub fn torus_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = wrap_scalar(a - b, period);
    d.min(period - d)
}

/// Result of [`posterior_mutation`].
#[derive(Clone, Debug)]
pub struct PosteriorMutation {
    pub z: Vec<f64>,
    /// Smallest covariance eigenvalue used in the inversion.
    pub lambda_min: f64,
}

/// Reconstructs the standard-normal vector that maps `old_parent` onto the
/// wrapped point: `z = Λ^{-1/2} Rᵀ (x − parent) / σ`.
pub fn posterior_mutation(
    x_wrapped: &[f64],
    old_parent: &[f64],
    sigma: f64,
    cov: &CovarianceModel,
) -> PosteriorMutation {
    debug_assert!(!cov.is_dirty());
    let step: Vec<f64> = x_wrapped
        .iter()
        .zip(old_parent)
        .map(|(x, m)| (x - m) / sigma)
        .collect();
    PosteriorMutation {
        z: cov.inverse_transform(&step),
        lambda_min: cov.lambda_min(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::covariance::Regime;
    use crate::linalg::Matrix;
    use proptest::prelude::*;

    #[test]
    fn wrap_examples() {
        assert!((wrap_scalar(7.0, TAU) - 0.716_814_692_820_413_5).abs() < 1e-12);
        assert!((wrap_scalar(-0.5, TAU) - 5.783_185_307_179_586).abs() < 1e-12);
        assert_eq!(wrap_scalar(3.0, TAU), 3.0);
        assert_eq!(wrap_scalar(-1e-18, TAU), 0.0);
    }

    #[test]
    fn posterior_without_wrap_is_identity() {
        let c = Matrix::from_row_major(2, alloc::vec![2.0, 0.4, 0.4, 0.5]).unwrap();
        let cov = CovarianceModel::from_matrix(c, Regime::Full).unwrap();
        let z = [0.7, -1.1];
        let parent = [1.0, 2.0];
        let y = cov.transform(&z);
        let x: Vec<f64> = parent.iter().zip(&y).map(|(m, yi)| m + 0.3 * yi).collect();
        let post = posterior_mutation(&x, &parent, 0.3, &cov);
        for (a, b) in post.z.iter().zip(&z) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn posterior_identity_covariance_example() {
        let cov = CovarianceModel::identity(2, Regime::Full);
        let raw = [0.5, 6.0 + TAU];
        let x = wrap(&raw, TAU);
        let post = posterior_mutation(&x, &[0.0, 0.0], 1.0, &cov);
        assert!((post.z[0] - 0.5).abs() < 1e-12);
        assert!((post.z[1] - 6.0).abs() < 1e-12);
        assert_eq!(post.lambda_min, 1.0);
    }

    proptest! {
        #[test]
        fn wrap_is_idempotent_and_in_range(v in -1e3f64..1e3) {
            let w = wrap_scalar(v, TAU);
            prop_assert!((0.0..TAU).contains(&w));
            prop_assert_eq!(wrap_scalar(w, TAU), w);
            prop_assert!(torus_distance(w, v, TAU) < 1e-9);
        }

        #[test]
        fn wrap_does_not_increase_torus_distance(a in -50f64..50.0, b in -50f64..50.0) {
            let d_raw = torus_distance(a, b, TAU);
            let d_wrapped = torus_distance(wrap_scalar(a, TAU), wrap_scalar(b, TAU), TAU);
            prop_assert!(d_wrapped <= d_raw + 1e-9);
        }

        #[test]
        fn forward_backward_consistency(
            entries in proptest::collection::vec(-1.0f64..1.0, 9),
            zs in proptest::collection::vec(-3.0f64..3.0, 3),
            parent in proptest::collection::vec(0.0f64..TAU, 3),
            sigma in 0.05f64..3.0,
        ) {
            let b = Matrix::from_row_major(3, entries).unwrap();
            let mut c = b.matmul(&b.transpose());
            for i in 0..3 { c[(i, i)] += 0.05; }
            let cov = CovarianceModel::from_matrix(c, Regime::Full).unwrap();
            let y = cov.transform(&zs);
            let raw: Vec<f64> = parent.iter().zip(&y).map(|(m, yi)| m + sigma * yi).collect();
            let x = wrap(&raw, TAU);
            let post = posterior_mutation(&x, &parent, sigma, &cov);
            let y_post = cov.transform(&post.z);
            for ((m, yp), xw) in parent.iter().zip(&y_post).zip(&x) {
                let rec = m + sigma * yp;
                prop_assert!((rec - xw).abs() <= 1e-10 * xw.abs().max(1.0));
            }
        }
    }
}

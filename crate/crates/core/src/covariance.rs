//! Mutation covariance in the three canonical regimes, with its cached
//! eigendecomposition `C = R Λ Rᵀ`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

use crate::linalg::{Matrix, SymmetricEigen};
use crate::{Error, Result};

/// Eigenvalues are never allowed below this value.
pub const EIGEN_FLOOR: f64 = 1e-300;

/// Covariance structure of the kernel: `I`, `diag(λ_i)` or full `R Λ Rᵀ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Isotropic,
    Diagonal,
    Full,
}

#[derive(Clone, Debug)]
pub struct CovarianceModel {
    regime: Regime,
    matrix: Matrix,
    rotation: Matrix,
    eigenvalues: Vec<f64>,
    sqrt_eigenvalues: Vec<f64>,
    dirty: bool,
}

impl CovarianceModel {
    pub fn identity(n: usize, regime: Regime) -> Self {
        Self {
            regime,
            matrix: Matrix::identity(n),
            rotation: Matrix::identity(n),
            eigenvalues: vec![1.0; n],
            sqrt_eigenvalues: vec![1.0; n],
            dirty: false,
        }
    }

    /// Wraps an explicit symmetric matrix. The regime constraint is checked
    /// and the eigendecomposition computed.
    pub fn from_matrix(matrix: Matrix, regime: Regime) -> Result<Self> {
        let n = matrix.dim();
        match regime {
            Regime::Isotropic => {
                if matrix != Matrix::identity(n) {
                    return Err(crate::invalid("isotropic covariance must be the identity"));
                }
            }
            Regime::Diagonal => {
                let off_diag = (0..n).any(|i| (0..n).any(|j| i != j && matrix[(i, j)] != 0.0));
                if off_diag {
                    return Err(crate::invalid(
                        "diagonal covariance has off-diagonal entries",
                    ));
                }
            }
            Regime::Full => {}
        }
        let scale = matrix.frobenius_norm().max(f64::MIN_POSITIVE);
        if matrix.max_asymmetry() > 1e-12 * scale {
            return Err(crate::invalid("covariance matrix is not symmetric"));
        }
        let mut model = Self {
            regime,
            matrix,
            rotation: Matrix::identity(n),
            eigenvalues: vec![1.0; n],
            sqrt_eigenvalues: vec![1.0; n],
            dirty: true,
        };
        model.refresh_eigen()?;
        Ok(model)
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Orthonormal eigenvector matrix `R`; column `k` pairs with
    /// `eigenvalues()[k]`.
    pub fn rotation(&self) -> &Matrix {
        &self.rotation
    }

    /// Eigenvalues, nonincreasing.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn is_dirty(&self) -> bool {
        self.dirty
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(1.0)
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(1.0)
    }

    /// `λ_max / λ_min`.
    pub fn condition(&self) -> f64 {
        self.lambda_max() / self.lambda_min()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    /// `y = R Λ^{1/2} z`.
    pub fn transform(&self, z: &[f64]) -> Vec<f64> {
        match self.regime {
            Regime::Isotropic => z.to_vec(),
            Regime::Diagonal | Regime::Full => {
                let scaled: Vec<f64> = z
                    .iter()
                    .zip(&self.sqrt_eigenvalues)
                    .map(|(zi, s)| zi * s)
                    .collect();
                self.rotation.mul_vec(&scaled)
            }
        }
    }

    /// `z = Λ^{-1/2} Rᵀ y`, the inverse of [`transform`](Self::transform).
    pub fn inverse_transform(&self, y: &[f64]) -> Vec<f64> {
        match self.regime {
            Regime::Isotropic => y.to_vec(),
            Regime::Diagonal | Regime::Full => {
                let mut z = self.rotation.tr_mul_vec(y);
                z.iter_mut()
                    .zip(&self.sqrt_eigenvalues)
                    .for_each(|(zi, s)| *zi /= s);
                z
            }
        }
    }

    /// `R z`, i.e. `C^{-1/2} y` for `y = R Λ^{1/2} z`.
    pub fn rotate(&self, z: &[f64]) -> Vec<f64> {
        match self.regime {
            Regime::Isotropic => z.to_vec(),
            Regime::Diagonal | Regime::Full => self.rotation.mul_vec(z),
        }
    }

    /// Covariance update
    /// `C ← (1 − c) C + c·s·p pᵀ + c·(1 − s)·Σ w_i y_i y_iᵀ`
    /// where `s` is the rank-one share. The separable regime keeps only the
    /// diagonal; the isotropic regime never changes. Marks the
    /// decomposition stale.
    pub fn adapt(
        &mut self,
        path: &[f64],
        selected: &[&[f64]],
        weights: &[f64],
        c_cov: f64,
        rank_one_share: f64,
    ) {
        let n = self.dim();
        let c1 = c_cov * rank_one_share;
        let cmu = c_cov * (1.0 - rank_one_share);
        match self.regime {
            Regime::Isotropic => return,
            Regime::Diagonal => {
                for i in 0..n {
                    let rank_mu: f64 = selected
                        .iter()
                        .zip(weights)
                        .map(|(y, w)| w * y[i] * y[i])
                        .sum();
                    let v = &mut self.matrix[(i, i)];
                    *v = (1.0 - c_cov) * *v + c1 * path[i] * path[i] + cmu * rank_mu;
                }
            }
            Regime::Full => {
                if c_cov == 0.0 {
                    return;
                }
                self.matrix.scale(1.0 - c_cov);
                if c1 != 0.0 {
                    self.matrix.add_outer(c1, path, path);
                }
                if cmu != 0.0 {
                    for (y, w) in selected.iter().zip(weights) {
                        self.matrix.add_outer(cmu * w, y, y);
                    }
                }
                self.matrix.symmetrize();
            }
        }
        self.dirty = true;
    }

    /// Recomputes `R` and `Λ`. Eigenvalues below [`EIGEN_FLOOR`] are raised
    /// to it, in which case `C` is rebuilt as `R Λ Rᵀ`.
    pub fn refresh_eigen(&mut self) -> Result<()> {
        let n = self.dim();
        match self.regime {
            Regime::Isotropic => {
                self.eigenvalues = vec![1.0; n];
            }
            Regime::Diagonal => {
                let diag = self.matrix.diagonal();
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]).then(i.cmp(&j)));
                self.rotation = Matrix::from_fn(n, |i, k| if order[k] == i { 1.0 } else { 0.0 });
                self.eigenvalues = order.iter().map(|&i| diag[i]).collect();
                if self.eigenvalues.iter().any(|v| !v.is_finite()) {
                    return Err(Error::EigenFailure {
                        dim: n,
                        diagonal_ratio: f64::NAN,
                    });
                }
                for (k, &i) in order.iter().enumerate() {
                    if self.eigenvalues[k] < EIGEN_FLOOR {
                        self.eigenvalues[k] = EIGEN_FLOOR;
                        self.matrix[(i, i)] = EIGEN_FLOOR;
                    }
                }
            }
            Regime::Full => {
                let eig = SymmetricEigen::new(&self.matrix)?;
                self.rotation = eig.vectors;
                self.eigenvalues = eig.values;
                if self.eigenvalues.iter().any(|&v| v < EIGEN_FLOOR) {
                    self.eigenvalues
                        .iter_mut()
                        .for_each(|v| *v = v.max(EIGEN_FLOOR));
                    self.matrix = Matrix::from_spectrum(&self.rotation, &self.eigenvalues);
                }
            }
        }
        self.sqrt_eigenvalues = self.eigenvalues.iter().map(|v| v.sqrt()).collect();
        self.dirty = false;
        Ok(())
    }

    /// Relative Frobenius error of `R Λ Rᵀ` against the stored matrix.
    pub fn reconstruction_error(&self) -> f64 {
        let rec = Matrix::from_spectrum(&self.rotation, &self.eigenvalues);
        rec.sub(&self.matrix).frobenius_norm() / self.matrix.frobenius_norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_learning_limit_keeps_matrix() {
        let c = Matrix::from_row_major(2, alloc::vec![2.0, 0.3, 0.3, 1.0]).unwrap();
        let mut cov = CovarianceModel::from_matrix(c.clone(), Regime::Full).unwrap();
        let y = [1.0, -2.0];
        cov.adapt(&[0.5, 0.5], &[&y], &[1.0], 0.0, 0.5);
        assert_eq!(cov.matrix(), &c);
    }

    #[test]
    fn full_replacement_hits_the_floor() {
        let mut cov = CovarianceModel::identity(2, Regime::Full);
        let y = [1.0, 0.0];
        cov.adapt(&[0.0, 0.0], &[&y], &[1.0], 1.0, 0.0);
        assert_eq!(cov.matrix()[(1, 1)], 0.0);
        cov.refresh_eigen().unwrap();
        assert_eq!(cov.eigenvalues(), &[1.0, EIGEN_FLOOR]);
        assert!(cov.matrix()[(1, 1)] >= EIGEN_FLOOR);
        assert!((cov.matrix()[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_regime_stays_diagonal() {
        let mut cov = CovarianceModel::identity(3, Regime::Diagonal);
        let y1 = [1.0, 2.0, -1.0];
        let y2 = [0.5, -0.1, 3.0];
        cov.adapt(&[1.0, -1.0, 0.5], &[&y1, &y2], &[0.6, 0.4], 0.3, 0.2);
        cov.refresh_eigen().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(cov.matrix()[(i, j)], 0.0);
                }
            }
        }
        assert!(cov.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
        assert!(cov.reconstruction_error() < 1e-15);
    }

    #[test]
    fn isotropic_regime_never_changes() {
        let mut cov = CovarianceModel::identity(3, Regime::Isotropic);
        let y = [3.0, 1.0, 2.0];
        cov.adapt(&y, &[&y], &[1.0], 0.5, 0.5);
        cov.refresh_eigen().unwrap();
        assert_eq!(cov.matrix(), &Matrix::identity(3));
    }

    #[test]
    fn diagonal_input_spectrum() {
        let cov =
            CovarianceModel::from_matrix(Matrix::from_diagonal(&[1.0, 4.0]), Regime::Diagonal)
                .unwrap();
        assert_eq!(cov.eigenvalues(), &[4.0, 1.0]);
        let y = cov.transform(&[1.0, 1.0]);
        assert_eq!(y, alloc::vec![1.0, 2.0]);
    }

    #[test]
    fn transform_round_trip() {
        let c = Matrix::from_row_major(
            3,
            alloc::vec![2.0, 0.5, 0.1, 0.5, 1.5, -0.2, 0.1, -0.2, 0.7],
        )
        .unwrap();
        let cov = CovarianceModel::from_matrix(c, Regime::Full).unwrap();
        let z = [0.3, -1.2, 2.0];
        let back = cov.inverse_transform(&cov.transform(&z));
        for (a, b) in z.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_asymmetric_and_regime_violations() {
        let asym = Matrix::from_row_major(2, alloc::vec![1.0, 0.2, 0.0, 1.0]).unwrap();
        assert!(CovarianceModel::from_matrix(asym, Regime::Full).is_err());
        let full = Matrix::from_row_major(2, alloc::vec![1.0, 0.2, 0.2, 1.0]).unwrap();
        assert!(CovarianceModel::from_matrix(full.clone(), Regime::Diagonal).is_err());
        assert!(CovarianceModel::from_matrix(full, Regime::Isotropic).is_err());
    }
}

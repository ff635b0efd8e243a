//! Objective functions with known optima and analytic Hessians.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::linalg::{dot, Matrix};
use crate::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Minimize,
    Maximize,
}

impl Orientation {
    /// Converts a value in this orientation into the kernels' minimisation
    /// convention.
    #[inline]
    pub fn to_minimization(self, v: f64) -> f64 {
        match self {
            Orientation::Minimize => v,
            Orientation::Maximize => -v,
        }
    }
}

/// An objective function `f: ℝⁿ → ℝ`, possibly evaluated under input noise.
///
/// `value` is the noiseless function in its natural orientation;
/// `evaluate` is what a search actually observes. Implementations must be
/// immutable so that evaluations can run concurrently on independent
/// noise streams.
pub trait Landscape: Sync {
    fn name(&self) -> &str;
    fn dim(&self) -> usize;
    fn orientation(&self) -> Orientation;
    fn value(&self, x: &[f64]) -> f64;

    fn evaluate(&self, x: &[f64], _noise: &mut dyn RngCore) -> f64 {
        self.value(x)
    }

    /// Standard deviation of the additive Gaussian input noise.
    fn input_noise(&self) -> f64 {
        0.0
    }

    /// Hessian at the optimum in the natural orientation.
    fn analytic_hessian(&self) -> Option<Matrix> {
        None
    }

    fn optimum(&self) -> Option<Vec<f64>> {
        None
    }

    /// Hessian converted to the minimisation convention (negated for
    /// maximisation landscapes).
    fn minimization_hessian(&self) -> Option<Matrix> {
        let mut h = self.analytic_hessian()?;
        if self.orientation() == Orientation::Maximize {
            h.scale(-1.0);
        }
        Some(h)
    }
}

/// `x + N(0, eps² I)`. With `eps == 0` the input is returned untouched and
/// no randomness is consumed.
pub fn perturb(x: &[f64], eps: f64, rng: &mut dyn RngCore) -> Vec<f64> {
    if eps == 0.0 {
        return x.to_vec();
    }
    x.iter()
        .map(|&v| {
            let n: f64 = StandardNormal.sample(rng);
            v + eps * n
        })
        .collect()
}

fn check_noise(eps: f64) -> Result<()> {
    if eps >= 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(invalid("input noise must be finite and nonnegative"))
    }
}

/// `f(x) = Σ x_i²`.
#[derive(Clone, Debug)]
pub struct Sphere {
    n: usize,
    noise: f64,
}

impl Sphere {
    pub fn new(n: usize, noise: f64) -> Result<Self> {
        if n == 0 {
            return Err(invalid("sphere dimension must be positive"));
        }
        check_noise(noise)?;
        Ok(Self { n, noise })
    }
}

impl Landscape for Sphere {
    fn name(&self) -> &str {
        "sphere"
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn orientation(&self) -> Orientation {
        Orientation::Minimize
    }
    fn value(&self, x: &[f64]) -> f64 {
        dot(x, x)
    }
    fn evaluate(&self, x: &[f64], noise: &mut dyn RngCore) -> f64 {
        let xn = perturb(x, self.noise, noise);
        dot(&xn, &xn)
    }
    fn input_noise(&self) -> f64 {
        self.noise
    }
    fn analytic_hessian(&self) -> Option<Matrix> {
        Some(Matrix::from_diagonal(&vec![2.0; self.n]))
    }
    fn optimum(&self) -> Option<Vec<f64>> {
        Some(vec![0.0; self.n])
    }
}

/// Parameters of the separable ellipse.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EllipseSpec {
    pub n: usize,
    /// Condition number `ξ`.
    pub condition: f64,
    /// Input-noise standard deviation `ε_x`.
    pub noise: f64,
}

/// Noisy separable ellipse `f(x) = Σ ξ^{(i−1)/(n−1)} (x_i + N_i(0, ε_x²))²`.
#[derive(Clone, Debug)]
pub struct Ellipse {
    spec: EllipseSpec,
    coefficients: Vec<f64>,
}

impl Ellipse {
    pub fn new(spec: EllipseSpec) -> Result<Self> {
        if spec.n == 0 {
            return Err(invalid("ellipse dimension must be positive"));
        }
        if !(spec.condition >= 1.0 && spec.condition.is_finite()) {
            return Err(invalid("ellipse condition number must be >= 1"));
        }
        check_noise(spec.noise)?;
        Ok(Self {
            spec,
            coefficients: ellipse_coefficients(spec.n, spec.condition),
        })
    }

    pub fn spec(&self) -> EllipseSpec {
        self.spec
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }
}

/// `ξ^{(i−1)/(n−1)}` for `i = 1..n` (all ones when `n == 1`).
pub fn ellipse_coefficients(n: usize, condition: f64) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| condition.powf(i as f64 / (n - 1) as f64))
        .collect()
}

fn weighted_square_sum(coeff: &[f64], x: &[f64]) -> f64 {
    coeff.iter().zip(x).map(|(a, v)| a * v * v).sum()
}

impl Landscape for Ellipse {
    fn name(&self) -> &str {
        "ellipse"
    }
    fn dim(&self) -> usize {
        self.spec.n
    }
    fn orientation(&self) -> Orientation {
        Orientation::Minimize
    }
    fn value(&self, x: &[f64]) -> f64 {
        weighted_square_sum(&self.coefficients, x)
    }
    fn evaluate(&self, x: &[f64], noise: &mut dyn RngCore) -> f64 {
        weighted_square_sum(&self.coefficients, &perturb(x, self.spec.noise, noise))
    }
    fn input_noise(&self) -> f64 {
        self.spec.noise
    }
    fn analytic_hessian(&self) -> Option<Matrix> {
        let diag: Vec<f64> = self.coefficients.iter().map(|a| 2.0 * a).collect();
        Some(Matrix::from_diagonal(&diag))
    }
    fn optimum(&self) -> Option<Vec<f64>> {
        Some(vec![0.0; self.spec.n])
    }
}

/// Parameters of the rotated rank-deficient quadratic.
#[derive(Clone, Debug, PartialEq)]
pub struct RankDeficientSpec {
    pub n: usize,
    /// Positive curvatures of the `r = spectrum.len()` sensitive directions.
    pub spectrum: Vec<f64>,
    /// Seed of the random orthonormal rotation; `None` means `Q = I`.
    pub rotation_seed: Option<u64>,
    pub noise: f64,
}

/// `f(x) = (Qx̃)ᵀ diag(s_1..s_r, 0..0) (Qx̃)` with `x̃ = x + N(0, ε_x² I)`.
#[derive(Clone, Debug)]
pub struct RankDeficientQuadratic {
    spec: RankDeficientSpec,
    rotation: Matrix,
}

impl RankDeficientQuadratic {
    pub fn new(spec: RankDeficientSpec) -> Result<Self> {
        let r = spec.spectrum.len();
        if spec.n == 0 || r == 0 || r > spec.n {
            return Err(invalid("rank must satisfy 1 <= r <= n"));
        }
        if spec.spectrum.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(invalid("rank-deficient spectrum must be positive"));
        }
        check_noise(spec.noise)?;
        let rotation = match spec.rotation_seed {
            Some(seed) => random_orthonormal(spec.n, seed),
            None => Matrix::identity(spec.n),
        };
        Ok(Self { spec, rotation })
    }

    pub fn spec(&self) -> &RankDeficientSpec {
        &self.spec
    }

    /// `Q`; its first `r` rows span the sensitive subspace.
    pub fn rotation(&self) -> &Matrix {
        &self.rotation
    }

    pub fn rank(&self) -> usize {
        self.spec.spectrum.len()
    }

    /// Orthonormal basis of the sensitive subspace (rows `0..r` of `Q`).
    pub fn sensitive_basis(&self) -> Vec<Vec<f64>> {
        (0..self.rank())
            .map(|i| self.rotation.row(i).to_vec())
            .collect()
    }

    fn quad(&self, x: &[f64]) -> f64 {
        self.spec
            .spectrum
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let u = dot(self.rotation.row(i), x);
                s * u * u
            })
            .sum()
    }
}

impl Landscape for RankDeficientQuadratic {
    fn name(&self) -> &str {
        "rankdef"
    }
    fn dim(&self) -> usize {
        self.spec.n
    }
    fn orientation(&self) -> Orientation {
        Orientation::Minimize
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.quad(x)
    }
    fn evaluate(&self, x: &[f64], noise: &mut dyn RngCore) -> f64 {
        self.quad(&perturb(x, self.spec.noise, noise))
    }
    fn input_noise(&self) -> f64 {
        self.spec.noise
    }
    fn analytic_hessian(&self) -> Option<Matrix> {
        let n = self.spec.n;
        let mut h = Matrix::zeros(n);
        for (i, s) in self.spec.spectrum.iter().enumerate() {
            let q = self.rotation.row(i);
            h.add_outer(2.0 * s, q, q);
        }
        h.symmetrize();
        Some(h)
    }
    fn optimum(&self) -> Option<Vec<f64>> {
        Some(vec![0.0; self.spec.n])
    }
}

/// Haar-distributed orthonormal matrix from modified Gram–Schmidt on a
/// Gaussian matrix.
pub fn random_orthonormal(n: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| normal.sample(&mut rng)).collect())
        .collect();
    for i in 0..n {
        for j in 0..i {
            let (done, rest) = rows.split_at_mut(i);
            let p = dot(&done[j], &rest[0]);
            rest[0]
                .iter_mut()
                .zip(&done[j])
                .for_each(|(a, b)| *a -= p * b);
        }
        let nrm = dot(&rows[i], &rows[i]).sqrt();
        if nrm < 1e-12 {
            // degenerate draw; replace with a fresh vector and retry
            rows[i] = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            for j in 0..i {
                let (done, rest) = rows.split_at_mut(i);
                let p = dot(&done[j], &rest[0]);
                rest[0]
                    .iter_mut()
                    .zip(&done[j])
                    .for_each(|(a, b)| *a -= p * b);
            }
        }
        let nrm = dot(&rows[i], &rows[i]).sqrt();
        rows[i].iter_mut().for_each(|a| *a /= nrm);
    }
    Matrix::from_fn(n, |i, j| rows[i][j])
}

/// Checks `x.len()` against a landscape.
pub fn check_dim(landscape: &dyn Landscape, x: &[f64]) -> Result<()> {
    if x.len() == landscape.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: landscape.dim(),
            found: x.len(),
        })
    }
}

//! Pixelated spectral-phase pulse shaper and the simulated second-harmonic
//! yield `∫|E(t)|⁴ dt`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI, TAU};

use num_complex::Complex64;
#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;
use rand::RngCore;

use crate::landscape::{perturb, Landscape, Orientation};
use crate::linalg::Matrix;
use crate::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseSpec {
    /// Spectral pixels `m`.
    pub pixels: usize,
    /// Spectral FWHM `Δ`; the grid spans `[−1.5Δ, 1.5Δ]`.
    pub fwhm: f64,
    /// Pixels tied to one decision variable.
    pub group: usize,
    /// Time samples per Nyquist interval.
    pub oversampling: usize,
    pub padding: usize,
}

impl Default for PulseSpec {
    fn default() -> Self {
        Self {
            pixels: 80,
            fwhm: 1.0,
            group: 1,
            oversampling: 8,
            padding: 4,
        }
    }
}

impl PulseSpec {
    pub fn validate(&self) -> Result<()> {
        if self.pixels < 2 {
            return Err(invalid("pulse needs at least two pixels"));
        }
        if self.group == 0 || !self.pixels.is_multiple_of(self.group) {
            return Err(invalid("group size must divide the pixel count"));
        }
        if !(self.fwhm > 0.0 && self.fwhm.is_finite()) {
            return Err(invalid("spectral FWHM must be positive"));
        }
        if self.oversampling == 0 || self.padding == 0 {
            return Err(invalid("oversampling and padding must be positive"));
        }
        Ok(())
    }

    pub fn decision_dim(&self) -> usize {
        self.pixels / self.group
    }

    pub fn spacing(&self) -> f64 {
        3.0 * self.fwhm / (self.pixels - 1) as f64
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let d = self.spacing();
        (0..self.pixels)
            .map(|j| -1.5 * self.fwhm + j as f64 * d)
            .collect()
    }

    /// Gaussian exponent `a` in `A(ω) = exp(−a ω²)`.
    pub fn gaussian_rate(&self) -> f64 {
        2.0 * LN_2 / (self.fwhm * self.fwhm)
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        let a = self.gaussian_rate();
        self.frequencies()
            .iter()
            .map(|w| (-a * w * w).exp())
            .collect()
    }

    /// Period of the synthesised field, `2π/Δω`.
    pub fn period(&self) -> f64 {
        TAU / self.spacing()
    }

    pub fn time_samples(&self) -> usize {
        self.oversampling * self.padding * self.pixels
    }

    /// One phase per pixel from one phase per decision variable.
    pub fn expand(&self, phi: &[f64]) -> Vec<f64> {
        debug_assert_eq!(phi.len(), self.decision_dim());
        (0..self.pixels).map(|j| phi[j / self.group]).collect()
    }

    fn spectral_field(&self, phi: &[f64]) -> Vec<Complex64> {
        self.amplitudes()
            .iter()
            .zip(self.expand(phi))
            .map(|(&a, p)| Complex64::from_polar(a, p))
            .collect()
    }
}

/// Envelope samples over one period.
#[derive(Clone, Debug)]
pub struct FieldSamples {
    pub times: Vec<f64>,
    pub values: Vec<Complex64>,
    pub dt: f64,
}

impl FieldSamples {
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|e| e.norm_sqr()).sum::<f64>() * self.dt
    }
}

/// `E(t) = (Δω/√2π) Σ_j A_j e^{iφ_j} e^{−iω_j t}`.
pub fn field_at(phi: &[f64], spec: &PulseSpec, t: f64) -> Complex64 {
    let scale = spec.spacing() / TAU.sqrt();
    spec.spectral_field(phi)
        .iter()
        .zip(spec.frequencies())
        .map(|(e, w)| e * Complex64::from_polar(1.0, -w * t))
        .sum::<Complex64>()
        * scale
}

/// Samples the complex envelope on `[−T/2, T/2)` by direct synthesis.
pub fn synthesize_field(phi: &[f64], spec: &PulseSpec) -> FieldSamples {
    let m = spec.time_samples();
    let period = spec.period();
    let dt = period / m as f64;
    let omegas = spec.frequencies();
    let spectral = spec.spectral_field(phi);
    let scale = spec.spacing() / TAU.sqrt();
    let times: Vec<f64> = (0..m).map(|k| -0.5 * period + k as f64 * dt).collect();
    let values = times
        .iter()
        .map(|&t| {
            spectral
                .iter()
                .zip(&omegas)
                .map(|(e, w)| e * Complex64::from_polar(1.0, -w * t))
                .sum::<Complex64>()
                * scale
        })
        .collect();
    FieldSamples { times, values, dt }
}

/// `Σ_s |Σ_{j+k=s} E_j E_k|²`, proportional to `∫|E|⁴` over one period.
fn autoconvolution_power(field: &[Complex64]) -> f64 {
    let m = field.len();
    let mut c = vec![Complex64::new(0.0, 0.0); 2 * m - 1];
    for (j, ej) in field.iter().enumerate() {
        for (k, ek) in field.iter().enumerate() {
            c[j + k] += ej * ek;
        }
    }
    c.iter().map(|v| v.norm_sqr()).sum()
}

/// Second-harmonic yield normalised to the transform-limited pulse.
pub fn shg_eval(phi: &[f64], spec: &PulseSpec) -> f64 {
    let zero = vec![0.0; spec.decision_dim()];
    autoconvolution_power(&spec.spectral_field(phi))
        / autoconvolution_power(&spec.spectral_field(&zero))
}

/// Same yield by time-domain quadrature of `|E|⁴`, for cross-checks.
pub fn shg_eval_time_domain(phi: &[f64], spec: &PulseSpec) -> f64 {
    let quartic = |f: &FieldSamples| {
        f.values
            .iter()
            .map(|e| e.norm_sqr() * e.norm_sqr())
            .sum::<f64>()
            * f.dt
    };
    let zero = vec![0.0; spec.decision_dim()];
    quartic(&synthesize_field(phi, spec)) / quartic(&synthesize_field(&zero, spec))
}

/// Closed-form Hessian of the normalised yield at flat phase, in the
/// maximisation sign, on the decision variables.
pub fn shg_analytic_hessian(spec: &PulseSpec) -> Matrix {
    let a = spec.gaussian_rate();
    let dw = spec.spacing();
    let w = spec.frequencies();
    let amp = spec.amplitudes();
    let j0 = PI / (2.0 * a) * (PI / a).sqrt();
    let k_pair = (PI / (2.0 * a)).sqrt();
    let k_diag = PI / (a * 3f64.sqrt());
    let m = spec.pixels;
    let pixel = Matrix::from_fn(m, |j, k| {
        let aa = amp[j] * amp[k];
        let sum = w[j] + w[k];
        let diff = w[j] - w[k];
        let t2 = -4.0 * k_pair * aa * (-a * sum * sum / 2.0).exp();
        let t3 = 8.0 * k_pair * aa * (-a * diff * diff / 2.0).exp();
        let mut h = dw * dw * (t2 + t3);
        if j == k {
            h += dw * (-4.0 * k_diag * amp[j] * (-a * w[j] * w[j] / 3.0).exp());
        }
        h / j0
    });
    let g = spec.group;
    Matrix::from_fn(spec.decision_dim(), |p, q| {
        let mut s = 0.0;
        for j in p * g..(p + 1) * g {
            for k in q * g..(q + 1) * g {
                s += pixel[(j, k)];
            }
        }
        s
    })
}

/// Simulated SHG yield over pixel phases, maximised, with optional Gaussian
/// phase noise.
#[derive(Clone, Debug)]
pub struct Shg {
    spec: PulseSpec,
    noise: f64,
    reference: f64,
}

impl Shg {
    pub fn new(spec: PulseSpec, noise: f64) -> Result<Self> {
        spec.validate()?;
        if !(noise >= 0.0 && noise.is_finite()) {
            return Err(invalid("noise level must be nonnegative"));
        }
        let zero = vec![0.0; spec.decision_dim()];
        let reference = autoconvolution_power(&spec.spectral_field(&zero));
        Ok(Self {
            spec,
            noise,
            reference,
        })
    }

    pub fn spec(&self) -> &PulseSpec {
        &self.spec
    }
}

impl Landscape for Shg {
    fn name(&self) -> &str {
        "shg"
    }
    fn dim(&self) -> usize {
        self.spec.decision_dim()
    }
    fn orientation(&self) -> Orientation {
        Orientation::Maximize
    }
    fn value(&self, x: &[f64]) -> f64 {
        autoconvolution_power(&self.spec.spectral_field(x)) / self.reference
    }
    fn evaluate(&self, x: &[f64], noise: &mut dyn RngCore) -> f64 {
        if self.noise > 0.0 {
            self.value(&perturb(x, self.noise, noise))
        } else {
            self.value(x)
        }
    }
    fn input_noise(&self) -> f64 {
        self.noise
    }
    fn analytic_hessian(&self) -> Option<Matrix> {
        Some(shg_analytic_hessian(&self.spec))
    }
    fn optimum(&self) -> Option<Vec<f64>> {
        Some(vec![0.0; self.dim()])
    }
}

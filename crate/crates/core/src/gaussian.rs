//! Closed-form complex Gaussian integrals over the initial position
//! distribution and the averaged Bloch vector they produce.

use num_complex::Complex64;

use crate::error::{require_finite, Error, Result};
use crate::model::{wave_numbers, GaussianMoments, ModelParams, OscillatorInit, WaveNumbers};

/// Below this value of `|a|η` the quadratic phase is dropped.
pub const QUADRATIC_PHASE_CUTOFF: f64 = 1e-12;

/// Arguments of `I[a, b, c] = ∫ dy p(y) exp(i a y² + i b y + i c)` with
/// `p(y) = (πη)^{-1/2} exp[−(y − q)²/η]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianIntegralArgs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub eta: f64,
    pub q: f64,
}

impl GaussianIntegralArgs {
    pub fn new(a: f64, b: f64, c: f64, eta: f64, q: f64) -> Result<Self> {
        let args = Self { a, b, c, eta, q };
        args.validate()?;
        Ok(args)
    }

    fn validate(&self) -> Result<()> {
        require_finite("a", self.a)?;
        require_finite("b", self.b)?;
        require_finite("c", self.c)?;
        require_finite("q", self.q)?;
        require_finite("eta", self.eta)?;
        if self.eta <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "eta",
                reason: format!("Gaussian width must be positive, got {}", self.eta),
            });
        }
        Ok(())
    }
}

/// Closed form of `I[a, b, c]`.
///
/// Uses `(1 − iaη)^{-1/2} exp[(iaq² + ibq − ηb²/4)/(1 − iaη) + ic]`, which has
/// no `1/a` terms. `1 − iaη` lies in the right half plane, so the principal
/// square root is continuous in `a`.
pub fn gaussian_i(args: &GaussianIntegralArgs) -> Result<Complex64> {
    args.validate()?;
    Ok(integral(args.a, args.b, args.c, args.eta, args.q))
}

#[inline]
pub(crate) fn integral(a: f64, b: f64, c: f64, eta: f64, q: f64) -> Complex64 {
    if (a * eta).abs() < QUADRATIC_PHASE_CUTOFF {
        let damping = -0.25 * eta * b * b;
        return Complex64::from_polar(damping.exp(), b * q + c);
    }
    let denom = Complex64::new(1.0, -a * eta);
    let numer = Complex64::new(-0.25 * eta * b * b, a * q * q + b * q);
    let exponent = numer / denom + Complex64::new(0.0, c);
    exponent.exp() / denom.sqrt()
}

/// Averaged Bloch direction `μ⃗` with its norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuVector {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
}

impl MuVector {
    pub fn new(mu1: f64, mu2: f64, mu3: f64) -> Self {
        Self { mu1, mu2, mu3 }
    }

    pub fn norm(&self) -> f64 {
        (self.mu1 * self.mu1 + self.mu2 * self.mu2 + self.mu3 * self.mu3).sqrt()
    }

    pub fn max_abs_diff(&self, other: &MuVector) -> f64 {
        (self.mu1 - other.mu1)
            .abs()
            .max((self.mu2 - other.mu2).abs())
            .max((self.mu3 - other.mu3).abs())
    }
}

/// Interference terms that vanish at late times when `Δ̃, g̃ > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayTerms {
    pub d12: Complex64,
    pub d3: Complex64,
}

fn decay_from(wn: &WaveNumbers, m: &GaussianMoments) -> DecayTerms {
    let i = |a: f64, b: f64, c: f64| integral(a, b, c, m.eta, m.q);
    let WaveNumbers {
        k_minus,
        k_plus,
        delta_k,
        k,
        k0,
    } = *wn;
    let d12 = 0.5 * (i(-k, k_minus, -k0) + i(k, k_minus, k0) - i(-k, k_plus, -k0) - i(k, k_plus, k0));
    // Gaussian average of c₃ term by term.
    let d3 = 0.5 * (i(k, -0.5 * delta_k, k0) - i(k, 0.5 * delta_k, k0));
    DecayTerms { d12, d3 }
}

pub fn decay_terms(params: &ModelParams, init: &OscillatorInit, tau: f64) -> Result<DecayTerms> {
    let tau = require_finite("tau", tau)?;
    let m = init.moments(params)?;
    let wn = wave_numbers(params.g_tilde(), params.delta_tilde(), tau, init.phi());
    Ok(decay_from(&wn, &m))
}

/// Non-decaying part `I[0, k₋, 0] + I[0, k₊, 0]`.
pub(crate) fn stationary_sum(wn: &WaveNumbers, m: &GaussianMoments) -> Complex64 {
    integral(0.0, wn.k_minus, 0.0, m.eta, m.q) + integral(0.0, wn.k_plus, 0.0, m.eta, m.q)
}

pub fn mu_components(params: &ModelParams, init: &OscillatorInit, tau: f64) -> Result<MuVector> {
    let tau = require_finite("tau", tau)?;
    let m = init.moments(params)?;
    let wn = wave_numbers(params.g_tilde(), params.delta_tilde(), tau, init.phi());
    let d = decay_from(&wn, &m);
    let s = stationary_sum(&wn, &m) + d.d12;
    Ok(MuVector::new(0.5 * s.re, 0.5 * s.im, d.d3.re))
}

/// `|I[a, ·, ·]| ≤ (1 + a²η²)^{-1/4}`.
pub fn decay_envelope(k: f64, eta: f64) -> f64 {
    (1.0 + k * k * eta * eta).powf(-0.25)
}

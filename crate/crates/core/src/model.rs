//! Model parameters, the oscillator's initial Gaussian state, and the
//! high-frequency (Floquet) propagator of a single environment qubit.
//!
//! Units follow the Hamiltonian `P²/2M + MΩ²X²/2 − (Δ/2)σx + g X σz` with
//! ħ = 1. The qubit is driven along the classical trajectory
//! `X(t) = X₀ cos(Ωt + φ)`, and everything downstream is expressed through the
//! dimensionless time `τ = Ωt`, the instantaneous coupling `ξ = g X₀ / Ω` and
//! the reduced tunnelling `Δ̃ = Δ / 2Ω`.

use std::f64::consts::{FRAC_PI_3, PI};

use num_complex::Complex64;

use crate::error::{require_finite, Error, Result};

/// Hamiltonian constants of the oscillator–qubit model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    mass: f64,
    omega: f64,
    delta: f64,
    g: f64,
}

impl ModelParams {
    pub fn new(mass: f64, omega: f64, delta: f64, g: f64) -> Result<Self> {
        let mass = require_finite("M", mass)?;
        let omega = require_finite("Omega", omega)?;
        let delta = require_finite("Delta", delta)?;
        let g = require_finite("g", g)?;
        if mass <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "M",
                reason: format!("mass must be positive, got {mass}"),
            });
        }
        if omega <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "Omega",
                reason: format!("frequency must be positive, got {omega}"),
            });
        }
        if delta < 0.0 {
            return Err(Error::InvalidParameter {
                name: "Delta",
                reason: format!("tunnelling energy must be non-negative, got {delta}"),
            });
        }
        Ok(Self {
            mass,
            omega,
            delta,
            g,
        })
    }

    /// Builds the parameters from the rescaled coupling `g̃ = g/Ω`.
    pub fn with_g_tilde(mass: f64, omega: f64, delta: f64, g_tilde: f64) -> Result<Self> {
        let g_tilde = require_finite("g_tilde", g_tilde)?;
        Self::new(mass, omega, delta, g_tilde * omega)
    }

    /// `M = 1, Ω = 5, Δ = 1, g̃ = 1/2`, the shared reference setting.
    pub fn baseline() -> Self {
        Self {
            mass: 1.0,
            omega: 5.0,
            delta: 1.0,
            g: 2.5,
        }
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn g_tilde(&self) -> f64 {
        self.g / self.omega
    }

    pub fn delta_tilde(&self) -> f64 {
        self.delta / (2.0 * self.omega)
    }

    /// Same model at a different frequency, holding `M`, `Δ` and `g̃` fixed.
    pub fn with_omega_fixed_g_tilde(&self, omega: f64) -> Result<Self> {
        Self::with_g_tilde(self.mass, omega, self.delta, self.g_tilde())
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(self.mass, self.omega, delta, self.g)
    }
}

/// Dimensionless variables at a given initial position and time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dimensionless {
    pub tau: f64,
    pub xi: f64,
    pub g_tilde: f64,
    pub delta_tilde: f64,
}

pub fn dimensionless(params: &ModelParams, x0: f64, t: f64) -> Dimensionless {
    Dimensionless {
        tau: params.omega * t,
        xi: params.g * x0 / params.omega,
        g_tilde: params.g_tilde(),
        delta_tilde: params.delta_tilde(),
    }
}

/// Displaced squeezed oscillator state `D(α)S(ζ)|0⟩` with `α = |α|e^{iφ}`,
/// `ζ = r e^{iθ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillatorInit {
    alpha_abs: f64,
    phi: f64,
    r: f64,
    theta: f64,
}

/// Mean and width of the initial position distribution
/// `p(X₀) = (πη)^{-1/2} exp[−(X₀ − q)²/η]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianMoments {
    pub eta: f64,
    pub q: f64,
    pub q0: f64,
}

impl OscillatorInit {
    pub fn new(alpha_abs: f64, phi: f64, r: f64, theta: f64) -> Result<Self> {
        let alpha_abs = require_finite("alpha_abs", alpha_abs)?;
        let phi = require_finite("phi", phi)?;
        let r = require_finite("r", r)?;
        let theta = require_finite("theta", theta)?;
        if alpha_abs < 0.0 {
            return Err(Error::InvalidParameter {
                name: "alpha_abs",
                reason: format!("displacement magnitude must be non-negative, got {alpha_abs}"),
            });
        }
        if r < 0.0 {
            return Err(Error::InvalidParameter {
                name: "r",
                reason: format!("squeezing magnitude must be non-negative, got {r}"),
            });
        }
        Ok(Self {
            alpha_abs,
            phi,
            r,
            theta,
        })
    }

    /// `|α| = 1, φ = π/3, r = 1, θ = 0`.
    pub fn baseline() -> Self {
        Self {
            alpha_abs: 1.0,
            phi: FRAC_PI_3,
            r: 1.0,
            theta: 0.0,
        }
    }

    pub fn alpha_abs(&self) -> f64 {
        self.alpha_abs
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn with_phi(&self, phi: f64) -> Result<Self> {
        Self::new(self.alpha_abs, phi, self.r, self.theta)
    }

    /// Position moments at `t = 0`.
    ///
    /// `cosh 2r + cos θ sinh 2r` is evaluated as
    /// `e^{2r} cos²(θ/2) + e^{−2r} sin²(θ/2)`, which stays positive for
    /// strong squeezing near `θ = π`.
    pub fn moments(&self, params: &ModelParams) -> Result<GaussianMoments> {
        let m_omega = params.mass * params.omega;
        let (s, c) = (0.5 * self.theta).sin_cos();
        let spread = (2.0 * self.r).exp() * c * c + (-2.0 * self.r).exp() * s * s;
        let eta = spread / m_omega;
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "eta",
                reason: format!("position variance parameter must be positive and finite, got {eta}"),
            });
        }
        let q0 = (2.0 / m_omega).sqrt() * self.alpha_abs;
        Ok(GaussianMoments {
            eta,
            q: q0 * self.phi.cos(),
            q0,
        })
    }
}

/// Initial position density of the oscillator.
pub fn initial_position_pdf(init: &OscillatorInit, params: &ModelParams, x0: f64) -> Result<f64> {
    let m = init.moments(params)?;
    Ok(gaussian_density(m.eta, m.q, x0))
}

pub(crate) fn gaussian_density(eta: f64, q: f64, x0: f64) -> f64 {
    let d = x0 - q;
    (-(d * d) / eta).exp() / (PI * eta).sqrt()
}

/// Thermal state of `−(Δ/2)σx` at inverse temperature `β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalEnv {
    beta: f64,
    delta: f64,
}

impl ThermalEnv {
    pub fn new(beta: f64, delta: f64) -> Result<Self> {
        let beta = require_finite("beta", beta)?;
        let delta = require_finite("Delta", delta)?;
        if beta < 0.0 {
            return Err(Error::InvalidParameter {
                name: "beta",
                reason: format!("inverse temperature must be non-negative, got {beta}"),
            });
        }
        if delta < 0.0 {
            return Err(Error::InvalidParameter {
                name: "Delta",
                reason: format!("tunnelling energy must be non-negative, got {delta}"),
            });
        }
        Ok(Self { beta, delta })
    }

    pub fn for_model(beta: f64, params: &ModelParams) -> Result<Self> {
        Self::new(beta, params.delta())
    }

    /// Environment whose Bloch excess equals `excess` (with `Δ = 1`).
    pub fn with_excess(excess: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&excess) {
            return Err(Error::InvalidParameter {
                name: "E",
                reason: format!("Bloch excess must lie in [0, 1), got {excess}"),
            });
        }
        Self::new(2.0 * excess.atanh(), 1.0)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `E(β) = tanh(βΔ/2)`.
    pub fn excess(&self) -> f64 {
        (0.5 * self.beta * self.delta).tanh()
    }

    /// `1 − E(β) = 2 / (1 + e^{βΔ})`, free of cancellation at low temperature.
    pub fn one_minus_excess(&self) -> f64 {
        let x = self.beta * self.delta;
        let e = (-x).exp();
        2.0 * e / (1.0 + e)
    }
}

/// `U = U₀ I + i(U₁σx + U₂σy + U₃σz)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochUnitary {
    pub u0: f64,
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
}

impl BlochUnitary {
    pub const IDENTITY: Self = Self {
        u0: 1.0,
        u1: 0.0,
        u2: 0.0,
        u3: 0.0,
    };

    pub fn norm_sq(&self) -> f64 {
        self.u0 * self.u0 + self.u1 * self.u1 + self.u2 * self.u2 + self.u3 * self.u3
    }
}

/// Qubit state `(I + a·σ)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitBloch {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
}

impl QubitBloch {
    pub fn length(&self) -> f64 {
        (self.a1 * self.a1 + self.a2 * self.a2 + self.a3 * self.a3).sqrt()
    }
}

/// Generators of the truncated high-frequency expansion at one phase argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloquetGenerators {
    /// Coefficient of σx in `H_F t`, i.e. `−Δ̃(1 − ξ²)τ`.
    pub hf_coeff: f64,
    /// Coefficient of σz in the kick operator `K`, i.e. `ξ sin τ`.
    pub kick_amp: f64,
}

pub fn floquet_generators(xi: f64, delta_tilde: f64, tau: f64) -> FloquetGenerators {
    FloquetGenerators {
        hf_coeff: -delta_tilde * (1.0 - xi * xi) * tau,
        kick_amp: xi * tau.sin(),
    }
}

/// Bloch components of `e^{−iK(τ+φ)} e^{−iH_F t} e^{iK(φ)}`, with the kick
/// operator kept to first order in `ξ` and `H_F` to second order.
pub fn floquet_bloch(xi: f64, delta_tilde: f64, tau: f64, phi: f64) -> BlochUnitary {
    let s1 = (tau + phi).sin();
    let s0 = phi.sin();
    let minus = xi * (s1 - s0);
    let plus = xi * (s1 + s0);
    let (sin_rot, cos_rot) = (delta_tilde * (1.0 - xi * xi) * tau).sin_cos();
    let (sin_minus, cos_minus) = minus.sin_cos();
    let (sin_plus, cos_plus) = plus.sin_cos();
    BlochUnitary {
        u0: cos_minus * cos_rot,
        u1: cos_plus * sin_rot,
        u2: sin_plus * sin_rot,
        u3: -sin_minus * cos_rot,
    }
}

/// Conjugates the thermal state `(I + Eσx)/2` by `u`.
pub fn evolve_thermal(u: &BlochUnitary, env: &ThermalEnv) -> QubitBloch {
    let e = env.excess();
    QubitBloch {
        a1: e * (2.0 * u.u0 * u.u0 + 2.0 * u.u1 * u.u1 - 1.0),
        a2: 2.0 * e * (u.u1 * u.u2 - u.u0 * u.u3),
        a3: 2.0 * e * (u.u0 * u.u2 + u.u1 * u.u3),
    }
}

/// Phase-space wave numbers of the averaged Bloch components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveNumbers {
    pub k_minus: f64,
    pub k_plus: f64,
    pub delta_k: f64,
    /// Coefficient of `X₀²`; `−2g̃²τΔ̃`.
    pub k: f64,
    /// Constant phase; `2τΔ̃`.
    pub k0: f64,
}

pub fn wave_numbers(g_tilde: f64, delta_tilde: f64, tau: f64, phi: f64) -> WaveNumbers {
    let s1 = (tau + phi).sin();
    let s0 = phi.sin();
    WaveNumbers {
        k_minus: 2.0 * g_tilde * (s1 - s0),
        k_plus: 2.0 * g_tilde * (s1 + s0),
        delta_k: 4.0 * g_tilde * s0,
        k: -2.0 * g_tilde * g_tilde * tau * delta_tilde,
        k0: 2.0 * tau * delta_tilde,
    }
}

/// Complex exponential sums whose real/imaginary parts give the Bloch vector
/// of the evolved state divided by `E(β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialForms {
    pub c12: Complex64,
    pub c3: Complex64,
}

pub fn exponential_forms(wn: &WaveNumbers, x0: f64) -> ExponentialForms {
    let phase = |arg: f64| Complex64::from_polar(1.0, arg);
    let quad = wn.k * x0 * x0 + wn.k0;
    let lm = wn.k_minus * x0;
    let lp = wn.k_plus * x0;
    let c12 = 0.25
        * (2.0 * phase(lm) + 2.0 * phase(lp) + phase(lm - quad) + phase(lm + quad)
            - phase(lp - quad)
            - phase(lp + quad));
    let half = 0.5 * wn.delta_k * x0;
    let c3 = 0.5 * (phase(-half + quad) - phase(half + quad));
    ExponentialForms { c12, c3 }
}

/// Evolved Bloch vector of one environment qubit for initial position `x0`.
pub fn conditional_state(
    params: &ModelParams,
    init: &OscillatorInit,
    env: &ThermalEnv,
    x0: f64,
    tau: f64,
) -> QubitBloch {
    let xi = params.g_tilde() * x0;
    let u = floquet_bloch(xi, params.delta_tilde(), tau, init.phi());
    evolve_thermal(&u, env)
}

/// `|ξ|` at the `3σ` edge of the initial position distribution, where
/// `σ = √(η/2)`.
pub fn edge_coupling(params: &ModelParams, init: &OscillatorInit) -> Result<f64> {
    let m = init.moments(params)?;
    let edge = m.q.abs() + 3.0 * (0.5 * m.eta).sqrt();
    Ok((params.g_tilde() * edge).abs())
}

pub const EDGE_COUPLING_LIMIT: f64 = 0.5;

/// Logs a warning when the small-coupling expansion is stretched, returning
/// whether it was.
pub fn check_coupling_regime(params: &ModelParams, init: &OscillatorInit) -> Result<bool> {
    let xi_edge = edge_coupling(params, init)?;
    let stretched = xi_edge > EDGE_COUPLING_LIMIT;
    if stretched {
        log::warn!(
            "|xi| = {xi_edge:.3} at the 3-sigma edge of p(X0) exceeds {EDGE_COUPLING_LIMIT}; \
             the truncated Floquet propagator is outside its small-coupling regime"
        );
    }
    Ok(stretched)
}

//! Entropies and the Holevo quantity of the single-qubit ensemble
//! `{p(X₀), ρ_{X₀}(τ)}`.
//!
//! All entropies are in bits. The average state is `(I + E μ⃗·σ⃗)/2`, so every
//! quantity here is a function of `μ = |μ⃗|` and the Bloch excess `E(β)`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{require_finite, Error, Result};
use crate::gaussian::{mu_components, stationary_sum};
use crate::model::{wave_numbers, ModelParams, OscillatorInit, ThermalEnv};

/// Slack allowed on probabilities and `μ` before they count as out of range.
pub const DOMAIN_SLACK: f64 = 1e-12;

/// Default tolerance on `|ψ − π|` for [`maximization_condition`].
pub const PSI_TOLERANCE: f64 = 1e-9;

fn neg_xlog2x(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Shannon entropy of `((1 + x)/2, (1 − x)/2)` given `x` and a separately
/// computed `1 − x`.
fn split_entropy(x: f64, one_minus_x: f64) -> f64 {
    neg_xlog2x(0.5 * (1.0 + x)) + neg_xlog2x(0.5 * one_minus_x)
}

pub fn binary_entropy(p: f64) -> Result<f64> {
    let p = require_finite("p", p)?;
    if !(-DOMAIN_SLACK..=1.0 + DOMAIN_SLACK).contains(&p) {
        return Err(Error::Domain {
            what: "binary entropy",
            reason: format!("probability {p} outside [0, 1]"),
        });
    }
    let p = p.clamp(0.0, 1.0);
    Ok(neg_xlog2x(p) + neg_xlog2x(1.0 - p))
}

fn check_unit_interval(what: &'static str, x: f64) -> Result<(f64, bool)> {
    if !x.is_finite() || !(-DOMAIN_SLACK..=1.0 + DOMAIN_SLACK).contains(&x) {
        return Err(Error::Domain {
            what,
            reason: format!("{x} outside [0, 1]"),
        });
    }
    let clamped = x.clamp(0.0, 1.0);
    Ok((clamped, clamped != x))
}

/// `S(ρ̄) = H((1 + μE)/2)`.
pub fn entropy_avg_state(mu: f64, excess: f64) -> Result<f64> {
    let (mu, _) = check_unit_interval("average-state entropy (mu)", mu)?;
    let (e, _) = check_unit_interval("average-state entropy (E)", excess)?;
    let x = mu * e;
    Ok(split_entropy(x, 1.0 - x))
}

/// Entropy split of one point of the ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolevoResult {
    /// `S(ρ̄)` in bits.
    pub s_avg: f64,
    /// Ensemble-averaged entropy, equal to the thermal entropy.
    pub s_bar: f64,
    pub chi: f64,
    pub mu: f64,
    /// `μ` was pulled back into `[0, 1]` from rounding noise.
    pub mu_clamped: bool,
}

pub fn holevo_chi(mu: f64, env: &ThermalEnv) -> Result<HolevoResult> {
    let (mu_c, mu_clamped) = check_unit_interval("Holevo quantity (mu)", mu)?;
    if mu_clamped {
        log::debug!("clamped mu = {mu:e} into [0, 1]");
    }
    let e = env.excess();
    let one_minus_e = env.one_minus_excess();
    let s_bar = split_entropy(e, one_minus_e);
    let s_avg = split_entropy(mu_c * e, (1.0 - mu_c) + mu_c * one_minus_e);
    Ok(HolevoResult {
        s_avg,
        s_bar,
        chi: s_avg - s_bar,
        mu: mu_c,
        mu_clamped,
    })
}

/// Upper bound `χ_M(β) = 1 − H((1 + E)/2)`, reached when `μ = 0`.
pub fn chi_max(env: &ThermalEnv) -> f64 {
    1.0 - split_entropy(env.excess(), env.one_minus_excess())
}

fn check_grid(taus: &[f64]) -> Result<()> {
    for (i, t) in taus.iter().enumerate() {
        require_finite("tau", *t)?;
        if i > 0 && *t < taus[i - 1] {
            return Err(Error::InvalidParameter {
                name: "tau_grid",
                reason: format!("grid must be ascending (index {i}: {} < {})", t, taus[i - 1]),
            });
        }
    }
    Ok(())
}

pub fn chi_timeseries(
    params: &ModelParams,
    init: &OscillatorInit,
    env: &ThermalEnv,
    taus: &[f64],
) -> Result<Vec<HolevoResult>> {
    check_grid(taus)?;
    init.moments(params)?;
    taus.par_iter()
        .map(|&tau| holevo_chi(mu_components(params, init, tau)?.norm(), env))
        .collect()
}

/// Late-time norm of `μ⃗` once the interference terms are dropped.
pub fn mu_infinity(params: &ModelParams, init: &OscillatorInit, tau: f64) -> Result<f64> {
    let tau = require_finite("tau", tau)?;
    let m = init.moments(params)?;
    let wn = wave_numbers(params.g_tilde(), params.delta_tilde(), tau, init.phi());
    let (km2, kp2) = (wn.k_minus * wn.k_minus, wn.k_plus * wn.k_plus);
    let psi = mismatch_phase(params, init)?;
    let sum = (-0.5 * m.eta * km2).exp()
        + (-0.5 * m.eta * kp2).exp()
        + 2.0 * (-0.25 * m.eta * (km2 + kp2)).exp() * psi.cos();
    Ok(0.5 * sum.max(0.0).sqrt())
}

/// Same quantity evaluated as `|I[0,k₋,0] + I[0,k₊,0]| / 2`.
pub fn mu_infinity_from_integrals(params: &ModelParams, init: &OscillatorInit, tau: f64) -> Result<f64> {
    let tau = require_finite("tau", tau)?;
    let m = init.moments(params)?;
    let wn = wave_numbers(params.g_tilde(), params.delta_tilde(), tau, init.phi());
    Ok(0.5 * stationary_sum(&wn, &m).norm())
}

/// `cos(g̃ q₀ sin 2φ)`. Not a bound on `μ∞` in general (it can be negative),
/// see [`cosine_bound_holds`].
pub fn mu_infinity_cosine_bound(params: &ModelParams, init: &OscillatorInit) -> Result<f64> {
    Ok((0.5 * mismatch_phase(params, init)?).cos())
}

/// Whether `μ∞(τ) ≤ cos(g̃ q₀ sin 2φ)` holds at this point.
pub fn cosine_bound_holds(params: &ModelParams, init: &OscillatorInit, tau: f64) -> Result<bool> {
    let holds = mu_infinity(params, init, tau)? <= mu_infinity_cosine_bound(params, init)? + DOMAIN_SLACK;
    if !holds {
        log::debug!("mu_infinity exceeds cos(g~ q0 sin 2phi) at tau = {tau}");
    }
    Ok(holds)
}

pub fn chi_infinity(params: &ModelParams, init: &OscillatorInit, env: &ThermalEnv, tau: f64) -> Result<f64> {
    Ok(holevo_chi(mu_infinity(params, init, tau)?, env)?.chi)
}

/// Quadratic short-time growth coefficients of `χ(τ) ≈ Λ τ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShortTimeCoeff {
    /// Form carrying `cos²(2 q g̃ sin φ)`.
    pub lambda: f64,
    /// Form with the bracket `1 − (1 − 4Δ̃²) sin²φ`.
    pub lambda_simplified: f64,
}

/// Largest `βΔ` for which `1 − E(β)` is still representable.
pub fn max_beta_delta() -> f64 {
    // 2e^{-x}/(1+e^{-x}) underflows once e^{-x} drops below the smallest subnormal.
    -(f64::MIN_POSITIVE * f64::EPSILON).ln()
}

pub fn short_time_lambda(params: &ModelParams, init: &OscillatorInit, env: &ThermalEnv) -> Result<ShortTimeCoeff> {
    let e = env.excess();
    let one_minus_e = env.one_minus_excess();
    if one_minus_e <= 0.0 {
        return Err(Error::Domain {
            what: "short-time coefficient",
            reason: format!(
                "1 - E(beta) underflows for beta*Delta = {} (limit {:.1})",
                env.beta() * env.delta(),
                max_beta_delta()
            ),
        });
    }
    let m = init.moments(params)?;
    let (gt, dt) = (params.g_tilde(), params.delta_tilde());
    let (sin_phi, cos_phi) = init.phi().sin_cos();
    let prefactor = 0.5 * e * e * ((1.0 + e) / one_minus_e).log2() * m.eta * m.eta * gt * gt;
    let interference = (2.0 * m.q * gt * sin_phi).cos();
    let bracket = cos_phi * cos_phi + 4.0 * dt * dt * sin_phi * sin_phi * interference * interference;
    let bracket_simplified = 1.0 - (1.0 - 4.0 * dt * dt) * sin_phi * sin_phi;
    Ok(ShortTimeCoeff {
        lambda: prefactor * bracket,
        lambda_simplified: prefactor * bracket_simplified,
    })
}

/// `ψ = 2 g̃ q₀ sin 2φ`, the relative phase of the two stationary terms.
pub fn mismatch_phase(params: &ModelParams, init: &OscillatorInit) -> Result<f64> {
    let m = init.moments(params)?;
    Ok(2.0 * params.g_tilde() * m.q0 * (2.0 * init.phi()).sin())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxCondition {
    pub psi: f64,
    pub satisfied: bool,
}

/// Checks `ψ = π`, the antiparallel configuration that drives `μ∞` to its
/// minimum.
pub fn maximization_condition(params: &ModelParams, init: &OscillatorInit, tolerance: f64) -> Result<MaxCondition> {
    let psi = mismatch_phase(params, init)?;
    Ok(MaxCondition {
        psi,
        satisfied: (psi - PI).abs() <= tolerance,
    })
}

/// Oscillator frequency that puts `ψ` at `π`, holding `M`, `g̃` and `|α|`.
///
/// `ψ ∝ Ω^{-1/2}`, so `Ω = 8 (g̃ |α| sin 2φ)² / (M π²)`; no root exists when
/// `g̃ |α| sin 2φ ≤ 0`.
pub fn solve_omega_for_condition(params: &ModelParams, init: &OscillatorInit) -> Result<f64> {
    let s = (2.0 * init.phi()).sin();
    let amp = params.g_tilde() * init.alpha_abs() * s;
    if amp <= 0.0 || s.abs() < 1e-12 {
        return Err(Error::Unsatisfiable(format!(
            "psi = 2 g~ q0 sin(2 phi) cannot reach pi: g~ |alpha| sin(2 phi) = {amp:e} at phi = {}",
            init.phi()
        )));
    }
    Ok(8.0 * amp * amp / (params.mass() * PI * PI))
}

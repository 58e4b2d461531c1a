//! Least-squares fits of the short-time growth of `χ`.

use crate::error::{Error, Result};

pub const MIN_FIT_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFit {
    /// `c` in `χ ≈ c τ²`.
    pub coefficient: f64,
    pub r_squared: f64,
    pub points: usize,
}

fn window(tau: &[f64], chi: &[f64], lo: f64, hi: f64) -> Result<Vec<(f64, f64)>> {
    if tau.len() != chi.len() {
        return Err(Error::InvalidParameter {
            name: "series",
            reason: format!("{} abscissae but {} values", tau.len(), chi.len()),
        });
    }
    let pts: Vec<(f64, f64)> = tau
        .iter()
        .zip(chi)
        .filter(|(t, _)| **t > lo && **t <= hi)
        .map(|(t, c)| (*t, *c))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::InvalidParameter {
            name: "tau_cut",
            reason: format!(
                "{} points in ({lo}, {hi}], at least {MIN_FIT_POINTS} required",
                pts.len()
            ),
        });
    }
    Ok(pts)
}

/// Fits `χ = c τ²` on `0 < τ ≤ tau_cut`.
///
/// `R²` is taken about the mean of the fitted values; a series that is fitted
/// exactly has `R² = 1` even when it is constant.
pub fn fit_short_time(tau: &[f64], chi: &[f64], tau_cut: f64) -> Result<QuadraticFit> {
    let pts = window(tau, chi, 0.0, tau_cut)?;
    let (num, den) = pts
        .iter()
        .fold((0.0, 0.0), |(n, d), &(t, c)| (n + t * t * c, d + t.powi(4)));
    let coefficient = num / den;
    let mean = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    let ss_res: f64 = pts.iter().map(|&(t, c)| (c - coefficient * t * t).powi(2)).sum();
    let ss_tot: f64 = pts.iter().map(|&(_, c)| (c - mean).powi(2)).sum();
    let r_squared = if ss_res == 0.0 {
        1.0
    } else if ss_tot == 0.0 {
        0.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(QuadraticFit {
        coefficient,
        r_squared,
        points: pts.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFit {
    /// `p` in `χ ≈ A τ^p`.
    pub exponent: f64,
    pub prefactor: f64,
    pub points: usize,
}

/// Log-log regression on `lo < τ ≤ hi`, skipping non-positive values.
pub fn fit_power_law(tau: &[f64], chi: &[f64], lo: f64, hi: f64) -> Result<PowerFit> {
    let pts: Vec<(f64, f64)> = window(tau, chi, lo, hi)?
        .into_iter()
        .filter(|&(t, c)| t > 0.0 && c > 0.0)
        .map(|(t, c)| (t.ln(), c.ln()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::InvalidParameter {
            name: "series",
            reason: format!("{} positive points, at least {MIN_FIT_POINTS} required", pts.len()),
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let exponent = sxy / sxx;
    Ok(PowerFit {
        exponent,
        prefactor: (my - exponent * mx).exp(),
        points: pts.len(),
    })
}

/// Trapezoidal mean of `values` over `lo ≤ τ ≤ hi`.
pub fn window_mean(tau: &[f64], values: &[f64], lo: f64, hi: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = tau
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= lo && **t <= hi)
        .map(|(t, v)| (*t, *v))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "window",
            reason: format!("fewer than 2 grid points in [{lo}, {hi}]"),
        });
    }
    let area: f64 = pts.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum();
    Ok(area / (pts[pts.len() - 1].0 - pts[0].0))
}

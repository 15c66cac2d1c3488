//! Analytic interference patterns for sinc-spectrum photon pairs.
//!
//! For a frequency-entangled pair with detuning `μ`, bandwidth `ξ` and symmetry
//! phase `φ`, the coincidence probability at delay `Δτ` is `(1 − d)/2` with
//!
//! ```text
//! d = (R + S) / (1 + cos φ · sinc(2μ/ξ))
//! R = cos(μΔτ − φ) · tri(ξΔτ/2)
//! S = sin((2μ/ξ) · tri(ξΔτ/2)) / (2μ/ξ)
//! ```
//!
//! `S` is the finite-bandwidth term. Dropping it (the `μ/ξ → ∞` limit) gives the
//! older literature pattern `d₀ = R`. A frequency-detuned pair interferes with
//! `d = S` alone.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

pub use crate::special::tri;

use crate::special::{one_minus_sinc, reduce_phase};
#[cfg(test)]
use crate::special::sinc;
use crate::{Error, Result};

/// Below this denominator `d_full` refuses to evaluate.
pub const SINGULAR_DENOMINATOR: f64 = 1e-12;

/// Below this denominator `d_full` switches to the cancellation-free form.
const NEAR_SINGULAR_DENOMINATOR: f64 = 1e-6;

/// Below this `2μ/ξ`, `S` is evaluated from its Taylor series.
const S_SERIES_THRESHOLD: f64 = 1e-4;

/// Phases closer than this to π are treated as exactly π by the μ → 0 limit.
const PHI_PI_TOLERANCE: f64 = 1e-12;

/// Which coincidence pattern to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InterferenceModel {
    /// Frequency-entangled pair including the finite-bandwidth term.
    EntangledFull,
    /// Frequency-entangled pair, `d₀ = R` only.
    EntangledLiterature,
    /// Frequency-detuned pair, `d = S`.
    Detuned,
}

impl InterferenceModel {
    pub fn name(self) -> &'static str {
        match self {
            InterferenceModel::EntangledFull => "entangled-full",
            InterferenceModel::EntangledLiterature => "entangled-literature",
            InterferenceModel::Detuned => "detuned",
        }
    }

    /// Coincidence probability for this model.
    ///
    /// The full entangled model falls back to the μ → 0 limit in the singular
    /// `φ = π` corner, so whole curves can be drawn through it.
    pub fn coincidence(self, mu: f64, xi: f64, phi: f64, dtau: f64) -> Result<f64> {
        match self {
            InterferenceModel::EntangledFull => coincidence_entangled_or_limit(mu, xi, phi, dtau),
            InterferenceModel::EntangledLiterature => coincidence_literature(mu, xi, phi, dtau),
            InterferenceModel::Detuned => coincidence_detuned(mu, xi, dtau),
        }
    }
}

fn check_domain(mu: f64, xi: f64, phi: f64, dtau: f64) -> Result<()> {
    if !(mu.is_finite() && xi.is_finite() && phi.is_finite() && dtau.is_finite()) {
        return Err(Error::Domain(format!(
            "non-finite input (mu={mu}, xi={xi}, phi={phi}, dtau={dtau})"
        )));
    }
    if xi <= 0.0 {
        return Err(Error::Domain(format!("xi must be > 0, got {xi}")));
    }
    if mu < 0.0 {
        return Err(Error::Domain(format!("mu must be >= 0, got {mu}")));
    }
    Ok(())
}

/// Clamp to `[0, 1]` only when the excursion is at rounding level.
fn clamp_probability(p: f64) -> f64 {
    const SLACK: f64 = 1e-12;
    if p < 0.0 && p > -SLACK {
        0.0
    } else if p > 1.0 && p < 1.0 + SLACK {
        1.0
    } else {
        p
    }
}

pub fn r_term(mu: f64, xi: f64, phi: f64, dtau: f64) -> f64 {
    (mu * dtau - phi).cos() * tri(xi * dtau / 2.0)
}

pub fn s_term(mu: f64, xi: f64, dtau: f64) -> f64 {
    let m = 2.0 * mu / xi;
    let t = tri(xi * dtau / 2.0);
    if m < S_SERIES_THRESHOLD {
        t - m * m * t * t * t / 6.0
    } else {
        (m * t).sin() / m
    }
}

/// `1 + cos φ · sinc(2μ/ξ)`, written so that it stays accurate near `φ = π, μ = 0`.
fn denominator(m: f64, phi: f64) -> f64 {
    let half = (phi / 2.0).cos();
    2.0 * half * half - phi.cos() * one_minus_sinc(m)
}

/// The interference visibility function `d(Δτ)` of a frequency-entangled pair.
///
/// Returns [`Error::Singular`] when `1 + cos φ · sinc(2μ/ξ)` drops below
/// [`SINGULAR_DENOMINATOR`]; that only happens for `φ ≈ π` with `2μ/ξ ≲ 1e-6`,
/// where [`mu_zero_limit`] gives the answer.
pub fn d_full(mu: f64, xi: f64, phi: f64, dtau: f64) -> Result<f64> {
    check_domain(mu, xi, phi, dtau)?;
    let m = 2.0 * mu / xi;
    let denom = denominator(m, phi);
    if denom < SINGULAR_DENOMINATOR {
        return Err(Error::Singular { denominator: denom });
    }
    if denom >= NEAR_SINGULAR_DENOMINATOR {
        return Ok((r_term(mu, xi, phi, dtau) + s_term(mu, xi, dtau)) / denom);
    }

    // R + S regrouped so that every O(1) piece cancels analytically:
    // R + S = 2cos²(φ/2)·t·cos(my) + t·sinφ·sin(my) + 2t·sin²(my/2) − t·(1 − sinc(mt))
    let y = xi * dtau / 2.0;
    let t = tri(y);
    let my = m * y;
    let half = (phi / 2.0).cos();
    let s_half = (my / 2.0).sin();
    let numerator = 2.0 * half * half * t * my.cos() + t * phi.sin() * my.sin() + 2.0 * t * s_half * s_half
        - t * one_minus_sinc(m * t);
    Ok(numerator / denom)
}

/// `d_full`, or its μ → 0 limit in the singular corner.
pub fn d_full_or_limit(mu: f64, xi: f64, phi: f64, dtau: f64) -> Result<f64> {
    match d_full(mu, xi, phi, dtau) {
        Err(Error::Singular { .. }) => Ok(mu_zero_limit(xi, phi, dtau)),
        other => other,
    }
}

/// The literature pattern `d₀ = R`.
pub fn d_literature(mu: f64, xi: f64, phi: f64, dtau: f64) -> Result<f64> {
    check_domain(mu, xi, phi, dtau)?;
    Ok(r_term(mu, xi, phi, dtau))
}

pub fn coincidence_entangled(mu: f64, xi: f64, phi: f64, dtau: f64) -> Result<f64> {
    Ok(clamp_probability((1.0 - d_full(mu, xi, phi, dtau)?) / 2.0))
}

pub fn coincidence_entangled_or_limit(mu: f64, xi: f64, phi: f64, dtau: f64) -> Result<f64> {
    Ok(clamp_probability((1.0 - d_full_or_limit(mu, xi, phi, dtau)?) / 2.0))
}

pub fn coincidence_literature(mu: f64, xi: f64, phi: f64, dtau: f64) -> Result<f64> {
    Ok(clamp_probability((1.0 - d_literature(mu, xi, phi, dtau)?) / 2.0))
}

pub fn coincidence_detuned(mu: f64, xi: f64, dtau: f64) -> Result<f64> {
    check_domain(mu, xi, 0.0, dtau)?;
    Ok(clamp_probability((1.0 - s_term(mu, xi, dtau)) / 2.0))
}

/// Limit of `d_full` as `μ → 0`.
///
/// For `φ ≠ π` this is `tri(ξΔτ/2)`. For `φ = π` it is the cubic
/// `−[(ξ|Δτ|)³ − 6ξ|Δτ| + 4]/4` on `ξ|Δτ| ≤ 2` and zero beyond, the support
/// inherited from the `tri` factor of the full expression.
pub fn mu_zero_limit(xi: f64, phi: f64, dtau: f64) -> f64 {
    let y = xi * dtau.abs();
    if (reduce_phase(phi) - PI).abs() < PHI_PI_TOLERANCE {
        if y <= 2.0 {
            -(y * y * y - 6.0 * y + 4.0) / 4.0
        } else {
            0.0
        }
    } else {
        tri(y / 2.0)
    }
}

//! Tunable Josephson junction: two parallel junctions forming a SQUID whose
//! threading flux sets both the magnitude and the phase of the effective
//! Cooper-pair tunnelling amplitude.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{HoloError, Result};
use crate::linalg::C64;

/// Slack on the `|φ| ≤ π/2` bound so that values built as `π/2` by
/// arithmetic are not rejected.
const FLUX_SLACK: f64 = 1e-12;

/// One SQUID: base Josephson energy, asymmetry ratio of the two arms, and the
/// reduced flux `φ = πΦ/Φ₀` in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JunctionParams {
    pub e_j: f64,
    pub gamma: f64,
    pub phi: f64,
}

impl JunctionParams {
    pub fn new(e_j: f64, gamma: f64, phi: f64) -> Result<Self> {
        let p = JunctionParams { e_j, gamma, phi };
        p.validate()?;
        Ok(p)
    }

    /// Identical arms (`γ = 1`) with unit Josephson energy.
    pub fn symmetric(phi: f64) -> Self {
        JunctionParams { e_j: 1.0, gamma: 1.0, phi }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.e_j > 0.0) {
            return Err(HoloError::Domain(format!("e_j must be > 0, got {}", self.e_j)));
        }
        check_domain(self.gamma, self.phi)
    }

    pub fn with_phi(self, phi: f64) -> Self {
        JunctionParams { phi, ..self }
    }

    /// The complex amplitude `2 E_J A(φ) e^{-iα(φ)}`.
    pub fn coupling(&self) -> Result<C64> {
        effective_coupling(self)
    }

    /// Whether the junction can be switched off completely (`γ = 1`).
    pub fn is_switchable(&self) -> bool {
        self.gamma == 1.0
    }
}

fn check_domain(gamma: f64, phi: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(HoloError::Domain(format!("gamma must be > 0, got {gamma}")));
    }
    if !(phi.abs() <= FRAC_PI_2 + FLUX_SLACK) {
        return Err(HoloError::Domain(format!("|phi| must be <= pi/2, got {phi}")));
    }
    Ok(())
}

/// `cos φ` evaluated as `sin(π/2 − |φ|)`, which is exactly zero at `φ = ±π/2`.
fn cos_flux(phi: f64) -> f64 {
    (FRAC_PI_2 - phi.abs()).max(0.0).sin()
}

/// Amplitude modulation `A(φ) = sqrt((1−γ)²/4 + γ cos²φ)`.
pub fn amplitude(gamma: f64, phi: f64) -> Result<f64> {
    check_domain(gamma, phi)?;
    let cp = cos_flux(phi);
    Ok((0.25 * (1.0 - gamma).powi(2) + gamma * cp * cp).sqrt())
}

/// Phase shift `α(φ)` with `tan α = (1−γ)/(1+γ) tan φ`.
///
/// Branch: `atan2((1−γ) sin φ, (1+γ) cos φ)`, continuous on `[−π/2, π/2]`.
pub fn phase_shift(gamma: f64, phi: f64) -> Result<f64> {
    check_domain(gamma, phi)?;
    if gamma == 1.0 {
        return Ok(0.0);
    }
    Ok(((1.0 - gamma) * phi.sin()).atan2((1.0 + gamma) * cos_flux(phi)))
}

/// `dα/dφ = (1 − γ²) / (4 A²(φ))`.
pub fn phase_shift_derivative(gamma: f64, phi: f64) -> Result<f64> {
    let a = amplitude(gamma, phi)?;
    Ok((1.0 - gamma * gamma) / (4.0 * a * a))
}

/// Effective coupling `J(φ) = 2 E_J A(φ) e^{−iα(φ)}`.
pub fn effective_coupling(params: &JunctionParams) -> Result<C64> {
    params.validate()?;
    let a = amplitude(params.gamma, params.phi)?;
    let alpha = phase_shift(params.gamma, params.phi)?;
    Ok(C64::from_polar(2.0 * params.e_j * a, -alpha))
}

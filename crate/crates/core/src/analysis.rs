//! Closed-form error estimates: diabatic leakage, quasiparticle poisoning,
//! charge-noise phase error and the resulting gate fidelity.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{HoloError, Result};

/// Reduced Planck constant in J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant in J/K.
pub const K_B: f64 = 1.380_649e-23;

/// Fidelity quoted as the reference value for the standard budget.
pub const REFERENCE_FIDELITY: f64 = 0.998;

/// Inputs of the error budget, all in simulation units (`ħ = 1`, energies
/// and rates share one unit).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    /// Minimal gap `Δ`.
    pub delta: f64,
    pub eta: f64,
    pub tau_op: f64,
    /// Degeneracy splitting from gate-charge offsets.
    pub delta_e: f64,
    /// Superconducting gap `Δ_S`.
    pub delta_s: f64,
    pub e_c: f64,
    /// `k_B T`.
    pub temperature: f64,
    #[serde(default = "default_prefactor")]
    pub qp_prefactor: f64,
}

fn default_prefactor() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub lz_probability: f64,
    pub qp_exponent: f64,
    pub qp_rate: f64,
    /// Poisoning probability over one operation, `1 − e^{−Γ τ}`.
    pub qp_probability: f64,
    pub phase_error: f64,
    pub fidelity_lz: f64,
    pub fidelity_combined: f64,
    pub window: Option<(f64, f64)>,
    pub warnings: Vec<String>,
}

impl ErrorBudget {
    /// Budget with `τ_op = 3/Δ`, `η = 1/τ_op`, `δE = Δ/10` and no
    /// quasiparticle channel.
    pub fn standard(delta: f64) -> ErrorBudget {
        ErrorBudget {
            delta,
            eta: delta / 3.0,
            tau_op: 3.0 / delta,
            delta_e: delta / 10.0,
            delta_s: 0.0,
            e_c: 0.0,
            temperature: 0.0,
            qp_prefactor: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        for (name, v) in [("delta", self.delta), ("eta", self.eta), ("tau_op", self.tau_op)] {
            if !(v > 0.0) || !v.is_finite() {
                errs.push(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [
            ("delta_e", self.delta_e),
            ("delta_s", self.delta_s),
            ("e_c", self.e_c),
            ("temperature", self.temperature),
            ("qp_prefactor", self.qp_prefactor),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                errs.push(format!("{name} must be non-negative, got {v}"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(HoloError::Domain(errs.join("; ")))
        }
    }

    /// `(2Δ_S + E_C)/k_BT`, infinite at zero temperature.
    pub fn qp_exponent(&self) -> f64 {
        if self.temperature == 0.0 {
            f64::INFINITY
        } else {
            (2.0 * self.delta_s + self.e_c) / self.temperature
        }
    }

    pub fn evaluate(&self) -> Result<BudgetReport> {
        self.validate()?;
        let mut warnings = Vec::new();
        if self.tau_op * self.delta < 1.0 {
            warnings.push(format!(
                "tau_op * delta = {} < 1: operation is not adiabatic",
                self.tau_op * self.delta
            ));
        }
        let p = lz_probability(self.delta, self.eta)?;
        let qp_rate = if self.temperature == 0.0 || self.qp_prefactor == 0.0 {
            0.0
        } else {
            quasiparticle_rate(self)?
        };
        let qp_probability = -(-qp_rate * self.tau_op).exp_m1();
        let dphi = phase_error(self.delta_e, self.tau_op)?;
        let window = adiabatic_window(self.delta, self.delta_e);
        if let Some((lo, hi)) = window {
            if !(lo < self.tau_op && self.tau_op < hi) {
                warnings.push(format!("tau_op = {} lies outside the window ({lo}, {hi})", self.tau_op));
            }
        } else {
            warnings.push("empty adiabatic window: delta_e >= delta".into());
        }
        Ok(BudgetReport {
            lz_probability: p,
            qp_exponent: self.qp_exponent(),
            qp_rate,
            qp_probability,
            phase_error: dphi,
            fidelity_lz: fidelity(p, dphi)?,
            fidelity_combined: fidelity((p + qp_probability).min(1.0), dphi)?,
            window,
            warnings,
        })
    }
}

/// `exp(−πΔ/η)`, clamped to `[0, 1]`.
pub fn lz_probability(delta: f64, eta: f64) -> Result<f64> {
    if !(delta > 0.0) || !(eta > 0.0) {
        return Err(HoloError::Domain(format!(
            "delta and eta must be positive, got {delta} and {eta}"
        )));
    }
    Ok((-PI * delta / eta).exp().clamp(0.0, 1.0))
}

/// `Γ_qp = prefactor·exp(−(2Δ_S + E_C)/k_BT)`.
pub fn quasiparticle_rate(budget: &ErrorBudget) -> Result<f64> {
    if !(budget.temperature > 0.0) {
        return Err(HoloError::Domain(format!(
            "temperature must be positive, got {}",
            budget.temperature
        )));
    }
    Ok(budget.qp_prefactor * (-budget.qp_exponent()).exp())
}

/// `δφ = δE·τ_op`.
pub fn phase_error(delta_e: f64, tau_op: f64) -> Result<f64> {
    if !(delta_e >= 0.0) || !(tau_op >= 0.0) {
        return Err(HoloError::Domain(format!(
            "delta_e and tau_op must be non-negative, got {delta_e} and {tau_op}"
        )));
    }
    Ok(delta_e * tau_op)
}

/// `√((1 − P)(1 − sin⁴(δφ/2)))`.
pub fn fidelity(p: f64, delta_phi: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(HoloError::Domain(format!("probability must lie in [0, 1], got {p}")));
    }
    let s = (delta_phi / 2.0).sin();
    Ok(((1.0 - p) * (1.0 - s.powi(4))).sqrt())
}

/// `(1/Δ, 1/δE)`, or `None` when the window is empty. Without a splitting
/// the upper end is infinite.
pub fn adiabatic_window(delta: f64, delta_e: f64) -> Option<(f64, f64)> {
    if delta > 0.0 && delta_e >= 0.0 && delta > delta_e {
        Some((1.0 / delta, if delta_e == 0.0 { f64::INFINITY } else { 1.0 / delta_e }))
    } else {
        None
    }
}

/// Energy of one simulation unit in joules when `1/unit` equals `time_s`
/// seconds (`E = ħ/t`).
pub fn energy_unit_from_time(time_s: f64) -> f64 {
    HBAR / time_s
}

/// Conversion between SI and simulation units for a declared energy scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitScale {
    /// Energy of one simulation unit, in joules.
    pub energy_joules: f64,
}

impl UnitScale {
    /// Scale in which a rate of `1/time_s` is one unit.
    pub fn from_time(time_s: f64) -> UnitScale {
        UnitScale {
            energy_joules: energy_unit_from_time(time_s),
        }
    }

    pub fn seconds_to_units(&self, t: f64) -> f64 {
        t * self.energy_joules / HBAR
    }

    pub fn units_to_seconds(&self, t: f64) -> f64 {
        t * HBAR / self.energy_joules
    }

    pub fn rate_to_units(&self, rate_per_s: f64) -> f64 {
        rate_per_s * HBAR / self.energy_joules
    }

    pub fn kelvin_to_units(&self, temperature_k: f64) -> f64 {
        K_B * temperature_k / self.energy_joules
    }
}

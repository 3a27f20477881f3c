//! Physical inputs and unit handling.
//!
//! Everything inside the library works in natural units with angles in
//! radians; lengths are passed in km and energies are stored in GeV, and the
//! conversions below are the only place the two systems meet.

use std::f64::consts::{FRAC_PI_2, TAU};

use crate::error::{Error, Result};

/// ħc in eV·m (CODATA 2018).
pub const HBAR_C_EV_M: f64 = 1.973_269_804e-7;

/// One kilometre expressed in eV⁻¹ (≈ 5.0677307 × 10⁹).
pub const KM_IN_INV_EV: f64 = 1.0e3 / HBAR_C_EV_M;

/// One GeV in eV.
pub const GEV_IN_EV: f64 = 1.0e9;

/// MSW potential per unit density and electron fraction, eV / (g cm⁻³).
pub const POTENTIAL_PER_DENSITY_EV: f64 = 7.56e-14;

/// Matter potential `V = 7.56e-14 · ρ · Y_e` eV.
pub fn potential_from_density(rho: f64, ye: f64) -> Result<f64> {
    if !rho.is_finite() || rho < 0.0 {
        return Err(Error::domain(
            "rho",
            rho,
            "density must be finite and nonnegative",
        ));
    }
    if !(0.0..=1.0).contains(&ye) {
        return Err(Error::domain(
            "ye",
            ye,
            "electron fraction must lie in [0, 1]",
        ));
    }
    Ok(POTENTIAL_PER_DENSITY_EV * rho * ye)
}

/// Neutrino flavor eigenstates, in the order used for matrix rows/columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flavor {
    E,
    Mu,
    Tau,
}

impl Flavor {
    pub const ALL: [Flavor; 3] = [Flavor::E, Flavor::Mu, Flavor::Tau];

    pub fn index(self) -> usize {
        match self {
            Flavor::E => 0,
            Flavor::Mu => 1,
            Flavor::Tau => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<Flavor> {
        Flavor::ALL.get(index).copied()
    }

    /// Dichotomic value: +1 for ν_e, −1 for ν_μ and ν_τ.
    pub fn q_value(self) -> i8 {
        match self {
            Flavor::E => 1,
            Flavor::Mu | Flavor::Tau => -1,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Flavor::E => "e",
            Flavor::Mu => "mu",
            Flavor::Tau => "tau",
        }
    }
}

/// Inputs of an oscillation probability: splittings in eV², angles in
/// radians, energy in GeV and potential in eV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OscillationParams {
    pub dm21_sq: f64,
    pub dm31_sq: f64,
    pub theta12: f64,
    pub theta13: f64,
    pub theta23: f64,
    pub delta_cp: f64,
    pub energy: f64,
    pub potential: f64,
    /// Replaces α = Δm²₂₁/Δm²₃₁ wherever α appears, leaving Δm²₃₁ alone.
    pub alpha_override: Option<f64>,
}

impl Default for OscillationParams {
    fn default() -> Self {
        Self::reference()
    }
}

impl OscillationParams {
    /// Reference point: global-fit splittings and angles, δ_CP = 306°,
    /// E = 1 GeV, ρ = 3 g/cm³ with Y_e = 0.5.
    pub fn reference() -> Self {
        OscillationParams {
            dm21_sq: 7.50e-5,
            dm31_sq: 2.457e-3,
            theta12: 33.48_f64.to_radians(),
            theta13: 8.50_f64.to_radians(),
            theta23: 42.3_f64.to_radians(),
            delta_cp: 306.0_f64.to_radians(),
            energy: 1.0,
            potential: POTENTIAL_PER_DENSITY_EV * 3.0 * 0.5,
            alpha_override: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.dm31_sq.is_finite() || self.dm31_sq == 0.0 {
            return Err(Error::domain(
                "dm31_sq",
                self.dm31_sq,
                "must be finite and nonzero",
            ));
        }
        if !self.dm21_sq.is_finite() {
            return Err(Error::domain("dm21_sq", self.dm21_sq, "must be finite"));
        }
        if !self.energy.is_finite() || self.energy <= 0.0 {
            return Err(Error::domain("energy", self.energy, "must be positive"));
        }
        if !self.potential.is_finite() || self.potential < 0.0 {
            return Err(Error::domain(
                "potential",
                self.potential,
                "must be nonnegative",
            ));
        }
        for (name, angle) in [
            ("theta12", self.theta12),
            ("theta13", self.theta13),
            ("theta23", self.theta23),
        ] {
            if !(0.0..=FRAC_PI_2).contains(&angle) {
                return Err(Error::domain(name, angle, "mixing angles lie in [0, pi/2]"));
            }
        }
        if !(0.0..TAU).contains(&self.delta_cp) {
            return Err(Error::domain(
                "delta_cp",
                self.delta_cp,
                "phase lies in [0, 2 pi)",
            ));
        }
        if let Some(alpha) = self.alpha_override {
            if !alpha.is_finite() {
                return Err(Error::domain("alpha", alpha, "must be finite"));
            }
        }
        Ok(())
    }

    pub fn with_theta13(mut self, theta13: f64) -> Self {
        self.theta13 = theta13;
        self
    }

    /// Sets δ_CP, wrapping it into [0, 2π).
    pub fn with_delta_cp(mut self, delta_cp: f64) -> Self {
        let wrapped = delta_cp.rem_euclid(TAU);
        self.delta_cp = if wrapped >= TAU { 0.0 } else { wrapped };
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha_override = Some(alpha);
        self
    }

    pub fn with_potential(mut self, potential: f64) -> Self {
        self.potential = potential;
        self
    }

    /// Mass hierarchy parameter used by the expansion.
    pub fn alpha(&self) -> f64 {
        self.alpha_override.unwrap_or(self.dm21_sq / self.dm31_sq)
    }

    /// Δm²₂₁ consistent with [`alpha`](Self::alpha); differs from the stored
    /// splitting only under an override.
    pub fn effective_dm21_sq(&self) -> f64 {
        match self.alpha_override {
            Some(alpha) => alpha * self.dm31_sq,
            None => self.dm21_sq,
        }
    }

    pub fn energy_ev(&self) -> f64 {
        self.energy * GEV_IN_EV
    }

    /// Dimensionless matter parameter `A = 2EV/Δm²₃₁`.
    pub fn matter_parameter(&self) -> f64 {
        2.0 * self.energy_ev() * self.potential / self.dm31_sq
    }

    /// Oscillation phase `Δ = Δm²₃₁ L / 4E` for a length in km.
    pub fn phase(&self, length_km: f64) -> f64 {
        self.dm31_sq * length_km * KM_IN_INV_EV / (4.0 * self.energy_ev())
    }
}

/// Random parameter points for property tests.
#[cfg(test)]
pub(crate) mod strategy {
    use proptest::prelude::*;

    use super::{OscillationParams, POTENTIAL_PER_DENSITY_EV};

    pub fn params() -> impl Strategy<Value = OscillationParams> {
        (
            1e-5..2e-4_f64,
            prop_oneof![1e-3..4e-3_f64, -4e-3..-1e-3_f64],
            0.0..=std::f64::consts::FRAC_PI_2,
            0.0..0.4_f64,
            0.0..=std::f64::consts::FRAC_PI_2,
            0.0..std::f64::consts::TAU,
            0.2..5.0_f64,
            0.0..6.0_f64,
        )
            .prop_map(|(dm21, dm31, t12, t13, t23, d, e, rho)| OscillationParams {
                dm21_sq: dm21,
                dm31_sq: dm31,
                theta12: t12,
                theta13: t13,
                theta23: t23,
                delta_cp: d,
                energy: e,
                potential: POTENTIAL_PER_DENSITY_EV * rho * 0.5,
                alpha_override: None,
            })
    }
}

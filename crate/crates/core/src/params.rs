//! Physical parameters and the fixed eV/nm/fs unit system.
//!
//! All formulas in this crate are evaluated in a unit system where energies
//! are in eV, lengths in nm and times in fs. Charge never appears on its own:
//! it always enters through the Coulomb combination e²/(4πε₀), which is a
//! plain energy·length constant here. This keeps every coupling expression
//! dimensionally checkable without SI round-off.

use serde::{Deserialize, Serialize};

use crate::SimError;

/// Reduced Planck constant, eV·fs.
pub const HBAR: f64 = 0.6582119569;
/// Speed of light, nm/fs.
pub const C_LIGHT: f64 = 299.792458;
/// Coulomb constant e²/(4πε₀), eV·nm.
pub const COULOMB: f64 = 1.43996454;
/// Electron rest energy mₑc², eV.
pub const ME_C2: f64 = 510998.95;
/// ħc, eV·nm (product of the two constants above).
pub const HBAR_C: f64 = HBAR * C_LIGHT;

/// Target and probe geometry plus energy scales.
///
/// Lengths in nm, energies in eV, dipole moments in e·nm. `b_c_qe` is the
/// distance from the sphere *center* to the emitter; the collinear layout has
/// the electron beam, emitter and sphere center aligned along x so that
/// `b_e_c = b_c_qe + b_e_qe`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Cavity dipolar-mode energy ħω_c, eV.
    pub hbar_omega_c: f64,
    /// Emitter transition energy ħω_QE, eV.
    pub hbar_omega_qe: f64,
    /// Emitter transition dipole moment, e·nm.
    pub mu_qe: f64,
    /// Nanoparticle radius R, nm.
    pub radius_r: f64,
    /// Sphere-center to emitter distance, nm.
    pub b_c_qe: f64,
    /// Electron to sphere-center impact parameter, nm.
    pub b_e_c: f64,
    /// Electron to emitter impact parameter, nm.
    pub b_e_qe: f64,
    /// Electron speed v₀/c.
    pub v0_over_c: f64,
    /// Phenomenological line broadening σ, eV.
    pub sigma: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            hbar_omega_c: 2.0,
            hbar_omega_qe: 2.0,
            mu_qe: 1.0,
            radius_r: 10.0,
            b_c_qe: 10.0,
            b_e_c: 11.0,
            b_e_qe: 1.0,
            v0_over_c: 0.02,
            sigma: 0.02,
        }
    }
}

impl PhysicalParams {
    /// Validate ranges. Collinearity `b_e_c = b_c_qe + b_e_qe` is checked
    /// separately by [`PhysicalParams::is_collinear`] since it may be
    /// deliberately overridden.
    pub fn validate(&self) -> Result<(), SimError> {
        let positive = [
            ("hbar_omega_c", self.hbar_omega_c),
            ("hbar_omega_qe", self.hbar_omega_qe),
            ("radius_r", self.radius_r),
            ("b_c_qe", self.b_c_qe),
            ("b_e_c", self.b_e_c),
            ("b_e_qe", self.b_e_qe),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(SimError::InvalidParams(format!(
                    "{name} must be > 0, got {v}"
                )));
            }
        }
        if !(self.v0_over_c > 0.0 && self.v0_over_c < 1.0) {
            return Err(SimError::InvalidParams(format!(
                "v0_over_c must lie in (0, 1), got {}",
                self.v0_over_c
            )));
        }
        if !(self.sigma >= 0.0) || !self.sigma.is_finite() {
            return Err(SimError::InvalidParams(format!(
                "sigma must be >= 0, got {}",
                self.sigma
            )));
        }
        if !(self.mu_qe >= 0.0) || !self.mu_qe.is_finite() {
            return Err(SimError::InvalidParams(format!(
                "mu_qe must be >= 0, got {}",
                self.mu_qe
            )));
        }
        Ok(())
    }

    /// Whether the impact parameters satisfy the collinear layout
    /// `b_e_c = b_c_qe + b_e_qe` (to 1e-9 nm).
    pub fn is_collinear(&self) -> bool {
        (self.b_e_c - self.b_c_qe - self.b_e_qe).abs() <= 1e-9
    }

    /// Electron speed, nm/fs.
    pub fn v0(&self) -> f64 {
        self.v0_over_c * C_LIGHT
    }

    /// ħv₀, eV·nm.
    pub fn hbar_v0(&self) -> f64 {
        HBAR * self.v0()
    }

    /// Central electron wave vector k₀ = mₑv₀/ħ, nm⁻¹.
    pub fn k0(&self) -> f64 {
        ME_C2 * self.v0_over_c / HBAR_C
    }

    /// Cavity mode frequency ω_c, rad/fs.
    pub fn omega_c(&self) -> f64 {
        self.hbar_omega_c / HBAR
    }

    /// Emitter frequency ω_QE, rad/fs.
    pub fn omega_qe(&self) -> f64 {
        self.hbar_omega_qe / HBAR
    }

    /// Half detuning ħΔ = (ħω_c − ħω_QE)/2, eV.
    pub fn hbar_delta(&self) -> f64 {
        0.5 * (self.hbar_omega_c - self.hbar_omega_qe)
    }

    /// Set the half detuning by moving the emitter line: ħω_QE = ħω_c − 2ħΔ.
    pub fn with_hbar_delta(mut self, hbar_delta: f64) -> Self {
        self.hbar_omega_qe = self.hbar_omega_c - 2.0 * hbar_delta;
        self
    }
}

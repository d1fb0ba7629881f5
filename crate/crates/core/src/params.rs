//! Physical constants and unit conventions.
//!
//! Everything is in atomic units: ħ = 1, e² = 1, the electron mass is 1 and
//! the speed of light is the inverse fine-structure constant. The nuclear
//! charge `z` is then the only coupling.

use crate::error::{config, Result};

/// Speed of light in atomic units (CODATA 2018).
pub const SPEED_OF_LIGHT_AU: f64 = 137.035999084;

/// Sharp constant of the projected Coulomb form, (π/2 + 2/π)/2.
pub const TIX_CONSTANT: f64 = 0.5 * (core::f64::consts::FRAC_PI_2 + core::f64::consts::FRAC_2_PI);

/// Sharp constant of the Kato–Herbst inequality.
pub const KATO_CONSTANT: f64 = core::f64::consts::FRAC_PI_2;

/// Sharp constant of the Hardy inequality ‖|x|⁻¹ψ‖ ≤ 2‖∇ψ‖.
pub const HARDY_CONSTANT: f64 = 2.0;

/// Largest admissible coupling Z/c of the projected Coulomb operator, 1/TIX_CONSTANT.
pub const CRITICAL_COUPLING: f64 = 1.0 / TIX_CONSTANT;

/// Integer nuclear-charge thresholds below which the form bound holds
/// by the Hardy, Kato and Tix inequalities respectively.
pub const Z_THRESHOLD_HARDY: u32 = 68;
pub const Z_THRESHOLD_KATO: u32 = 87;
pub const Z_THRESHOLD_TIX: u32 = 124;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PhysParams {
    /// Speed of light.
    pub c: f64,
    /// Particle mass.
    pub m: f64,
    /// Nuclear charge.
    pub z: f64,
}

impl Default for PhysParams {
    fn default() -> Self {
        Self {
            c: SPEED_OF_LIGHT_AU,
            m: 1.0,
            z: 1.0,
        }
    }
}

impl PhysParams {
    pub fn new(c: f64, m: f64, z: f64) -> Result<Self> {
        let params = Self { c, m, z };
        params.validate()?;
        Ok(params)
    }

    /// Atomic units with the given nuclear charge.
    pub fn atomic(z: f64) -> Self {
        Self { z, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(config(alloc::format!("c must be positive, got {}", self.c)));
        }
        if !(self.m.is_finite() && self.m > 0.0) {
            return Err(config(alloc::format!("m must be positive, got {}", self.m)));
        }
        if !(self.z.is_finite() && self.z >= 0.0) {
            return Err(config(alloc::format!("Z must be nonnegative, got {}", self.z)));
        }
        Ok(())
    }

    /// Rest energy mc².
    pub fn rest_energy(&self) -> f64 {
        self.m * self.c * self.c
    }

    /// Compton momentum mc.
    pub fn compton_momentum(&self) -> f64 {
        self.m * self.c
    }

    /// Dimensionless Coulomb coupling Z/c.
    pub fn coulomb_coupling(&self) -> f64 {
        self.z / self.c
    }

    /// Whether Z/c lies strictly inside the window where the projected
    /// Coulomb form is bounded by a fraction a < 1 of the kinetic form.
    pub fn in_form_bound_window(&self) -> bool {
        self.coulomb_coupling() < CRITICAL_COUPLING
    }

    /// Relative form bound a = Z·(π/2 + 2/π)/(2c) of the projected Coulomb potential.
    pub fn form_bound(&self) -> f64 {
        self.coulomb_coupling() * TIX_CONSTANT
    }

    /// Critical nuclear charge c/TIX_CONSTANT for this speed of light.
    pub fn critical_charge(&self) -> f64 {
        self.c * CRITICAL_COUPLING
    }

    pub fn with_z(self, z: f64) -> Self {
        Self { z, ..self }
    }
}

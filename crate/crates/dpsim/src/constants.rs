//! Physical constants shared by every energy and time computation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Newtonian gravitational constant, m^3 kg^-1 s^-2.
pub const GRAVITATIONAL_CONSTANT: f64 = 6.674e-11;

/// Reduced Planck constant, J s.
pub const REDUCED_PLANCK: f64 = 1.0546e-34;

/// Penrose's dimensional estimate for the collapse-time prefactor.
pub const GAMMA_PENROSE: f64 = 1.0 / (8.0 * std::f64::consts::PI);

/// Seconds in a Julian year, used when quoting astronomical collapse times.
pub const SECONDS_PER_YEAR: f64 = 365.25 * 86_400.0;

/// Immutable bundle of the constants entering `E_g` and `t = gamma hbar / E_g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    g: f64,
    hbar: f64,
}

impl PhysicalConstants {
    /// Custom constants, mainly useful for unit-system checks in tests.
    pub fn new(g: f64, hbar: f64) -> Result<Self> {
        if !(g > 0.0) || !g.is_finite() {
            return Err(Error::Domain(format!(
                "gravitational constant must be strictly positive and finite, got {g}"
            )));
        }
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::Domain(format!(
                "reduced Planck constant must be strictly positive and finite, got {hbar}"
            )));
        }
        Ok(Self { g, hbar })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            g: GRAVITATIONAL_CONSTANT,
            hbar: REDUCED_PLANCK,
        }
    }
}

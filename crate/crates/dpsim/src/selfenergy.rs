//! Gravitational self-energy of a two-branch superposition of uniform
//! spheres, and the collapse times it implies.
//!
//! A rigid sphere of mass `M` and radius `R` held in a superposition of two
//! center-of-mass positions a distance `d` apart carries a gravitational
//! self-energy `E_g`: the energy of the mass-density *difference* between the
//! two branches interacting with itself. The dimensionless ratio
//!
//! ```text
//! lambda = d / (2R)
//! ```
//!
//! decides the regime. For separated branches (`lambda >= 1`)
//!
//! ```text
//! E_g = (6 G M^2 / 5 R) * (1 - 5 / (12 lambda))
//! ```
//!
//! and for overlapping branches (`0 <= lambda <= 1`)
//!
//! ```text
//! E_g = (6 G M^2 / 5 R) * (5/3 lambda^2 - c3 lambda^3 + 1/6 lambda^5)
//! ```
//!
//! where the cubic coefficient `c3` is selectable: the value `5/3` that
//! circulates in the secondary literature, or `5/4`, which is the only choice
//! that joins the separated branch continuously at `lambda = 1` and
//! reproduces the exact small-displacement law `E_g -> G M^2 d^2 / (2 R^3)`.
//! The voxel integrator in [`crate::oracle`] confirms `5/4` independently;
//! see `self_energy_scan` in the examples directory.
//!
//! The collapse time follows as `t = gamma * hbar / E_g` with `gamma` a
//! dimensionless constant of order unity (Penrose's dimensional argument
//! suggests `1/(8 pi)`).

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};

/// Which cubic coefficient to use in the overlapping-regime polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapCoefficientVariant {
    /// `5/3 lambda^2 - 5/3 lambda^3 + 1/6 lambda^5`, as commonly printed.
    PaperPrinted,
    /// `5/3 lambda^2 - 5/4 lambda^3 + 1/6 lambda^5`, continuous at
    /// `lambda = 1` and exact in the small-`lambda` limit.
    #[default]
    ContinuityCorrected,
}

/// A rigid uniform sphere participating in the superposition.
///
/// `shape_factor` multiplies the final self-energy to stand in for mild
/// non-sphericity (an oblate mirror blank, say); `1.0` means a true sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassBody {
    mass: f64,
    radius: f64,
    shape_factor: f64,
    label: String,
}

impl MassBody {
    pub fn new(label: impl Into<String>, mass: f64, radius: f64) -> Result<Self> {
        let (mass_ok, radius_ok) = (
            mass.is_finite() && mass > 0.0,
            radius.is_finite() && radius > 0.0,
        );
        if !mass_ok {
            return Err(Error::Domain(format!(
                "mass must be strictly positive and finite, got {mass}"
            )));
        }
        if !radius_ok {
            return Err(Error::Domain(format!(
                "radius must be strictly positive and finite, got {radius}"
            )));
        }
        Ok(Self {
            mass,
            radius,
            shape_factor: 1.0,
            label: label.into(),
        })
    }

    /// Sphere of the given mass and uniform density (kg/m^3).
    pub fn from_density(label: impl Into<String>, mass: f64, density: f64) -> Result<Self> {
        if !(density > 0.0) || !density.is_finite() {
            return Err(Error::Domain(format!(
                "density must be strictly positive and finite, got {density}"
            )));
        }
        let volume = mass / density;
        let radius = (3.0 * volume / (4.0 * std::f64::consts::PI)).cbrt();
        Self::new(label, mass, radius)
    }

    pub fn with_shape_factor(mut self, shape_factor: f64) -> Result<Self> {
        if !(shape_factor > 0.0) || !shape_factor.is_finite() {
            return Err(Error::Domain(format!(
                "shape factor must be strictly positive and finite, got {shape_factor}"
            )));
        }
        self.shape_factor = shape_factor;
        Ok(self)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn shape_factor(&self) -> f64 {
        self.shape_factor
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// One body displaced by `displacement` meters between its two branches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionGeometry {
    body: MassBody,
    displacement: f64,
}

impl SuperpositionGeometry {
    pub fn new(body: MassBody, displacement: f64) -> Result<Self> {
        if !(displacement >= 0.0) || !displacement.is_finite() {
            return Err(Error::Domain(format!(
                "displacement must be nonnegative and finite, got {displacement}"
            )));
        }
        Ok(Self { body, displacement })
    }

    pub fn body(&self) -> &MassBody {
        &self.body
    }

    pub fn displacement(&self) -> f64 {
        self.displacement
    }

    pub fn lambda(&self) -> f64 {
        lambda_ratio(self.displacement, self.body.radius())
            .expect("geometry invariants guarantee a valid lambda")
    }
}

/// `lambda = displacement / (2 radius)`.
pub fn lambda_ratio(displacement: f64, radius: f64) -> Result<f64> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::Domain(format!(
            "radius must be strictly positive and finite, got {radius}"
        )));
    }
    if !(displacement >= 0.0) || !displacement.is_finite() {
        return Err(Error::Domain(format!(
            "displacement must be nonnegative and finite, got {displacement}"
        )));
    }
    Ok(displacement / (2.0 * radius))
}

/// `6 G M^2 / (5 R)`, the fully separated limit, including the shape factor.
fn bulk_energy(body: &MassBody, c: &PhysicalConstants) -> f64 {
    body.shape_factor() * 6.0 * c.g() * body.mass() * body.mass() / (5.0 * body.radius())
}

/// Self-energy in the separated regime, valid for `lambda >= 1`.
pub fn self_energy_separated(
    body: &MassBody,
    lambda: f64,
    c: &PhysicalConstants,
) -> Result<f64> {
    if !(lambda >= 1.0) {
        return Err(Error::Regime(format!(
            "separated-regime formula requires lambda >= 1, got {lambda}"
        )));
    }
    Ok(bulk_energy(body, c) * (1.0 - 5.0 / (12.0 * lambda)))
}

/// Self-energy in the overlapping regime, valid for `0 <= lambda <= 1`.
pub fn self_energy_overlapping(
    body: &MassBody,
    lambda: f64,
    variant: OverlapCoefficientVariant,
    c: &PhysicalConstants,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Regime(format!(
            "overlapping-regime formula requires 0 <= lambda <= 1, got {lambda}"
        )));
    }
    let cubic = match variant {
        OverlapCoefficientVariant::PaperPrinted => 5.0 / 3.0,
        OverlapCoefficientVariant::ContinuityCorrected => 5.0 / 4.0,
    };
    let l2 = lambda * lambda;
    let poly = 5.0 / 3.0 * l2 - cubic * l2 * lambda + 1.0 / 6.0 * l2 * l2 * lambda;
    Ok(bulk_energy(body, c) * poly)
}

/// Self-energy of one displaced body, dispatching on the regime.
///
/// At `lambda = 1` both regimes apply; with the corrected coefficient they
/// agree exactly (`7/12` of the bulk value) and the separated branch is used.
pub fn self_energy(
    geometry: &SuperpositionGeometry,
    variant: OverlapCoefficientVariant,
    c: &PhysicalConstants,
) -> Result<f64> {
    let lambda = geometry.lambda();
    if lambda >= 1.0 {
        self_energy_separated(geometry.body(), lambda, c)
    } else {
        self_energy_overlapping(geometry.body(), lambda, variant, c)
    }
}

/// `t = gamma * hbar / E_g`. Zero self-energy means no collapse, ever:
/// the time is `+inf`, which serializes as the string `"inf"`.
pub fn collapse_time(e_g: f64, gamma: f64, c: &PhysicalConstants) -> Result<f64> {
    check_gamma(gamma)?;
    if !(e_g >= 0.0) || !e_g.is_finite() {
        return Err(Error::Domain(format!(
            "self-energy must be nonnegative and finite, got {e_g}"
        )));
    }
    if e_g == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(gamma * c.hbar() / e_g)
}

/// `rate = E_g / (gamma * hbar)`, the reciprocal of [`collapse_time`].
pub fn collapse_rate(e_g: f64, gamma: f64, c: &PhysicalConstants) -> Result<f64> {
    check_gamma(gamma)?;
    if !(e_g >= 0.0) || !e_g.is_finite() {
        return Err(Error::Domain(format!(
            "self-energy must be nonnegative and finite, got {e_g}"
        )));
    }
    Ok(e_g / (gamma * c.hbar()))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Domain(format!(
            "gamma must be strictly positive and finite, got {gamma}"
        )));
    }
    Ok(())
}

/// Recoil of a mirror mount when its mirror is displaced.
#[derive(Debug, Clone, PartialEq)]
pub struct MountContribution {
    /// Mount displacement implied by momentum balance,
    /// `d_mount = d_mirror * m_mirror / m_mount`.
    pub displacement: f64,
    /// Self-energy of the mount superposition.
    pub energy: f64,
    /// `energy` relative to the mirror's own self-energy.
    pub ratio_to_mirror: f64,
}

/// Self-energy contributed by a mount that recoils against its mirror.
///
/// Momentum balance gives the mount a displacement of
/// `mirror_displacement * m_mirror / m_mount`. A mount outweighing its
/// mirror 100:1 therefore moves 1/100 as far; computed from first
/// principles its recoil still contributes about 1% of the mirror's
/// self-energy (1.08% for the default glass mirror on an aluminium
/// mount), so it belongs in the system total rather than the discard
/// pile. Naive `d^2` bookkeeping would suggest 1/10,000 instead; the
/// difference comes from the mount's own mass and radius entering the
/// energy, and `ratio_to_mirror` reports the first-principles value.
pub fn mount_reaction_contribution(
    mirror: &MassBody,
    mirror_displacement: f64,
    mount: &MassBody,
    variant: OverlapCoefficientVariant,
    c: &PhysicalConstants,
) -> Result<MountContribution> {
    if !(mirror_displacement >= 0.0) || !mirror_displacement.is_finite() {
        return Err(Error::Domain(format!(
            "mirror displacement must be nonnegative and finite, got {mirror_displacement}"
        )));
    }
    let displacement = mirror_displacement * mirror.mass() / mount.mass();
    let mount_geometry = SuperpositionGeometry::new(mount.clone(), displacement)?;
    let energy = self_energy(&mount_geometry, variant, c)?;
    let mirror_geometry = SuperpositionGeometry::new(mirror.clone(), mirror_displacement)?;
    let mirror_energy = self_energy(&mirror_geometry, variant, c)?;
    let ratio_to_mirror = if mirror_energy > 0.0 {
        energy / mirror_energy
    } else {
        0.0
    };
    Ok(MountContribution {
        displacement,
        energy,
        ratio_to_mirror,
    })
}

/// Combined self-energy and collapse rate of several displaced bodies plus
/// fixed-rate components that do not scale with `gamma`-independent energy
/// bookkeeping (detectors, wiring: anything quoted directly as a time).
///
/// Energies add because the branch mass-density differences of distinct
/// bodies are disjoint in the far-separated mounting layout simulated here;
/// cross terms are dropped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemSelfEnergy {
    pub total_energy: f64,
    /// `sum_i E_i / (gamma hbar) + sum_j extra_rate_j`, in 1/s.
    pub total_rate: f64,
}

pub fn system_self_energy(
    geometries: &[SuperpositionGeometry],
    extra_component_rates: &[f64],
    variant: OverlapCoefficientVariant,
    gamma: f64,
    c: &PhysicalConstants,
) -> Result<SystemSelfEnergy> {
    check_gamma(gamma)?;
    let mut total_energy = 0.0;
    for geometry in geometries {
        total_energy += self_energy(geometry, variant, c)?;
    }
    let mut total_rate = collapse_rate(total_energy, gamma, c)?;
    for (i, rate) in extra_component_rates.iter().enumerate() {
        if !(*rate >= 0.0) || !rate.is_finite() {
            return Err(Error::Domain(format!(
                "extra component rate {i} must be nonnegative and finite, got {rate}"
            )));
        }
        total_rate += rate;
    }
    Ok(SystemSelfEnergy {
        total_energy,
        total_rate,
    })
}

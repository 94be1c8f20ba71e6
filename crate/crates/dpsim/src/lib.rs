//! Gravitationally induced wavefunction collapse: how long does a mass in a
//! center-of-mass superposition survive before it picks a branch, and could a
//! tabletop interferometer see it happen?
//!
//! The chain from geometry to inference:
//!
//! - [`selfenergy`]: gravitational self-energy of a sphere displaced against
//!   itself, and the collapse times it implies under both γ conventions.
//! - [`oracle`]: a brute-force voxel integrator that cross-checks the closed
//!   forms with no shared algebra.
//! - [`dynamics`]: two-branch density matrix, pure phase damping, and
//!   collapse instants drawn from an inhomogeneous Poisson hazard.
//! - [`apparatus`]: the interferometer bench (attenuated source, SPADs,
//!   piezo-driven mirror, optional which-path eraser), one trial at a time.
//! - [`analysis`]: onset detection, KS tests, γ estimation with bootstrap
//!   intervals, and the cross-scale benchmark table.
//! - [`config`] and [`io`]: layered run configuration and the campaign file
//!   formats.
//!
//! The examples are the front door, one per capability:
//!
//! - `benchmark_table`: collapse times from a proton to a cat.
//! - `self_energy_scan`: the overlap curve, its λ = 1 seam, and the
//!   printed-coefficient discrepancy, checked against the voxel oracle.
//! - `collapse_sampling`: hazard inversion against closed-form laws.
//! - `decoherence_vs_collapse`: phase damping never moves collapse times.
//! - `single_trial`: one bench trial, sample by sample.
//! - `campaign_gamma_estimate`: simulate both arms, recover γ end to end.
//! - `eraser_study`: which-path marking on and off.
//!
//! A small CLI (`dpsim`) wraps the same calls for scripted campaigns.

pub mod analysis;
pub mod apparatus;
pub mod config;
pub mod constants;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod oracle;
pub mod rng;
pub mod selfenergy;

pub use analysis::{BenchmarkRow, CampaignSummary, GammaEstimate, KsResult};
pub use apparatus::{ApparatusConfig, PrecollapseReadout, TraceSample, TrialRecord, TriggerSource};
pub use config::{Mode, RunConfig};
pub use constants::PhysicalConstants;
pub use dynamics::{Branch, CollapseModel, HazardTrajectory, TwoBranchState};
pub use error::{Error, Result};
pub use selfenergy::{MassBody, OverlapCoefficientVariant, SuperpositionGeometry};

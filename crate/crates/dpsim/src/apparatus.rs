//! Event-level Monte Carlo of the tabletop interferometer.
//!
//! A trial starts when the summing junction fires, either on a detected
//! photon or on a SPAD dark count. The trigger starts the piezo ramps and
//! the detector records the Mach-Zehnder fringe intensity at a fixed
//! cadence. Photon triggers put the two mirrors into superposition: the
//! readout holds the mid-fringe baseline until the sampled collapse instant,
//! then follows the surviving branch's mirror. Dark counts fire exactly one
//! branch, so their traces track that mirror from the first sample.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{PhysicalConstants, GAMMA_PENROSE};
use crate::dynamics::{evolve, Branch, CollapseModel, HazardTrajectory};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, stream, uniform_open01};
use crate::selfenergy::{
    system_self_energy, MassBody, OverlapCoefficientVariant, SuperpositionGeometry,
};

/// Which clock fired the summing-junction trigger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TriggerSource {
    Photon,
    DarkCountSpad1,
    DarkCountSpad2,
}

impl TriggerSource {
    pub fn is_dark_count(&self) -> bool {
        !matches!(self, TriggerSource::Photon)
    }

    /// The single branch a dark count fires; `None` for photons, which
    /// superpose both.
    pub fn fired_branch(&self) -> Option<Branch> {
        match self {
            TriggerSource::Photon => None,
            TriggerSource::DarkCountSpad1 => Some(Branch::One),
            TriggerSource::DarkCountSpad2 => Some(Branch::Two),
        }
    }
}

/// What the detector shows while the superposition is still alive.
///
/// `Baseline` is the collapse-takes-time prediction: the pattern does not
/// move until a branch wins. `Mixture` is the orthodox-decoherence
/// alternative, the population-weighted fringe of both branches, kept
/// runnable so the two predictions can be compared on equal footing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecollapseReadout {
    Baseline,
    Mixture,
}

/// One recorded detector reading, `t` seconds after the trigger.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub t: f64,
    pub intensity: f64,
}

/// Everything one trial produces.
///
/// `collapse_time` is `None` for dark-count trials (nothing superposed, so
/// nothing to collapse) and `Some(f64::INFINITY)` for a photon trial whose
/// superposition outlived the trace window.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub trigger_time: f64,
    pub trigger_source: TriggerSource,
    pub collapse_time: Option<f64>,
    pub surviving_branch: Option<Branch>,
    pub seed: u64,
    pub samples: Vec<TraceSample>,
}

/// Model constants of the bench: source, detectors, optics, piezos, and the
/// collapse bookkeeping that drives a trial.
#[derive(Debug, Clone, PartialEq)]
pub struct ApparatusConfig {
    /// Photons per second leaving the attenuated first laser.
    pub photon_rate: f64,
    /// SPAD detection probability per photon, in [0, 1].
    pub spad_efficiency: f64,
    /// SPAD recovery time. Carried through to the resolved output for
    /// completeness; the single-trigger trial model never re-arms a SPAD.
    pub spad_dead_time: f64,
    /// Dark counts per second per SPAD before cooling.
    pub ambient_dark_rate: f64,
    /// Kelvin below ambient; one dark-count decade per 10 K.
    pub cooling_delta: f64,
    pub laser_wavelength: f64,
    /// Path-length multiplier per unit of mirror displacement.
    pub geometry_factor: f64,
    /// Static interferometer phase; pi/2 sits mid-fringe where sensitivity
    /// to small displacements is maximal.
    pub bias_phase: f64,
    /// First-order lag constant of the piezo actuators.
    pub piezo_tau: f64,
    pub piezo_full_scale: f64,
    pub mirror: MassBody,
    pub mount: MassBody,
    pub eraser_enabled: bool,
    /// Extra hazard when the eraser is out and the environment entrains.
    pub entrainment_rate: f64,
    pub sample_interval: f64,
    pub trace_duration: f64,
    /// Collapse-time convention factor.
    pub gamma: f64,
    /// Environmental decoherence rate acting on the branch coherence.
    pub gamma_dec: f64,
    pub collapse_model: CollapseModel,
    /// Quoted collapse times of always-on components (label, seconds); each
    /// contributes a constant hazard of 1/time.
    pub extra_component_times: Vec<(String, f64)>,
    /// Additive Gaussian intensity noise; 0 disables the draw entirely.
    pub detector_noise_sigma: f64,
    /// Intensity readout granularity; 0 disables quantization.
    pub detector_quantization: f64,
    pub variant: OverlapCoefficientVariant,
    pub precollapse_readout: PrecollapseReadout,
}

impl Default for ApparatusConfig {
    fn default() -> Self {
        Self {
            photon_rate: 1.0e6,
            spad_efficiency: 0.5,
            spad_dead_time: 50.0e-9,
            ambient_dark_rate: 1.0e7,
            cooling_delta: 30.0,
            laser_wavelength: 632.8e-9,
            geometry_factor: 2.0,
            bias_phase: FRAC_PI_2,
            piezo_tau: 1.0e-4,
            piezo_full_scale: 1.0e-6,
            // Equivalent spheres: 0.2 g of glass and a 20 g aluminium mount.
            mirror: MassBody::from_density("mirror", 2.0e-4, 2500.0)
                .expect("default mirror body is valid"),
            mount: MassBody::from_density("mount", 2.0e-2, 2700.0)
                .expect("default mount body is valid"),
            eraser_enabled: true,
            entrainment_rate: 0.0,
            sample_interval: 1.0e-8,
            trace_duration: 1.0e-6,
            gamma: GAMMA_PENROSE,
            gamma_dec: 0.0,
            collapse_model: CollapseModel::Poisson,
            // Component collapse times quoted for the bench hardware, used
            // as constants rather than recomputed.
            extra_component_times: vec![
                ("spad_1".into(), 1.0e3),
                ("spad_2".into(), 1.0e3),
                ("piezo_1".into(), 0.1),
                ("piezo_2".into(), 0.1),
                ("resistor".into(), 50.0),
                ("copper_wiring".into(), 1.0e10),
            ],
            detector_noise_sigma: 0.0,
            detector_quantization: 1.0e-4,
            variant: OverlapCoefficientVariant::ContinuityCorrected,
            precollapse_readout: PrecollapseReadout::Baseline,
        }
    }
}

impl ApparatusConfig {
    pub fn validate(&self) -> Result<()> {
        fn nonnegative(name: &str, v: f64) -> Result<()> {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Config(format!(
                    "{name} must be nonnegative and finite, got {v}"
                )));
            }
            Ok(())
        }
        fn positive(name: &str, v: f64) -> Result<()> {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!(
                    "{name} must be strictly positive and finite, got {v}"
                )));
            }
            Ok(())
        }

        nonnegative("photon_rate", self.photon_rate)?;
        if !self.spad_efficiency.is_finite()
            || !(0.0..=1.0).contains(&self.spad_efficiency)
        {
            return Err(Error::Config(format!(
                "spad_efficiency must lie in [0, 1], got {}",
                self.spad_efficiency
            )));
        }
        nonnegative("spad_dead_time", self.spad_dead_time)?;
        nonnegative("ambient_dark_rate", self.ambient_dark_rate)?;
        nonnegative("cooling_delta", self.cooling_delta)?;
        positive("laser_wavelength", self.laser_wavelength)?;
        nonnegative("geometry_factor", self.geometry_factor)?;
        if !self.bias_phase.is_finite() {
            return Err(Error::Config(format!(
                "bias_phase must be finite, got {}",
                self.bias_phase
            )));
        }
        nonnegative("piezo_tau", self.piezo_tau)?;
        nonnegative("piezo_full_scale", self.piezo_full_scale)?;
        nonnegative("entrainment_rate", self.entrainment_rate)?;
        positive("sample_interval", self.sample_interval)?;
        if self.sample_interval > 1.0e-7 {
            return Err(Error::Config(format!(
                "sample_interval must be at most 1e-7 s, got {}",
                self.sample_interval
            )));
        }
        positive("trace_duration", self.trace_duration)?;
        positive("gamma", self.gamma)?;
        nonnegative("gamma_dec", self.gamma_dec)?;
        nonnegative("detector_noise_sigma", self.detector_noise_sigma)?;
        nonnegative("detector_quantization", self.detector_quantization)?;
        for (label, time) in &self.extra_component_times {
            positive(&format!("extra component time for {label:?}"), *time)?;
        }
        Ok(())
    }

    /// Per-SPAD dark-count rate after cooling.
    pub fn dark_rate_per_spad(&self) -> f64 {
        dark_rate(self.ambient_dark_rate, self.cooling_delta)
    }

    /// Rate at which photons actually fire a SPAD.
    pub fn detected_photon_rate(&self) -> f64 {
        self.photon_rate * self.spad_efficiency
    }

    /// Detector reading with both mirrors at rest.
    pub fn baseline_intensity(&self) -> f64 {
        interference_intensity(0.0, 0.0, self)
    }
}

/// Dark-count rate after thermoelectric cooling: one decade per 10 K.
pub fn dark_rate(ambient_dark_rate: f64, cooling_delta: f64) -> f64 {
    ambient_dark_rate * 10f64.powf(-cooling_delta / 10.0)
}

/// First event among the three competing trigger clocks.
///
/// Draw order is fixed (photon, SPAD 1 dark, SPAD 2 dark) and one uniform is
/// consumed per clock even at rate zero, so trigger streams stay aligned
/// between superposed and control configurations that share a seed.
pub fn sample_trigger<R: Rng>(
    config: &ApparatusConfig,
    rng: &mut R,
) -> Result<(f64, TriggerSource)> {
    let dark = config.dark_rate_per_spad();
    let clocks = [
        (config.detected_photon_rate(), TriggerSource::Photon),
        (dark, TriggerSource::DarkCountSpad1),
        (dark, TriggerSource::DarkCountSpad2),
    ];
    let mut first: Option<(f64, TriggerSource)> = None;
    for (rate, source) in clocks {
        let u = uniform_open01(rng);
        if rate <= 0.0 {
            continue;
        }
        let t = -u.ln() / rate;
        if first.is_none_or(|(best, _)| t < best) {
            first = Some((t, source));
        }
    }
    first.ok_or_else(|| {
        Error::Config(
            "no trigger clock has a positive rate; set photon_rate or a dark-count rate".into(),
        )
    })
}

/// First-order-lag actuator position `t` seconds after its drive starts.
pub fn piezo_displacement(t: f64, config: &ApparatusConfig) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if config.piezo_tau == 0.0 {
        return config.piezo_full_scale;
    }
    config.piezo_full_scale * (1.0 - (-t / config.piezo_tau).exp())
}

/// Detected fringe intensity for the given mirror offsets.
///
/// With the eraser in, mirror B's motion is folded so both arms shift the
/// fringe the same way. With it out the arms subtract, so equal motion of
/// both mirrors cancels exactly and the pattern stays put.
pub fn interference_intensity(
    mirror_a_disp: f64,
    mirror_b_disp: f64,
    config: &ApparatusConfig,
) -> f64 {
    let sign_b = if config.eraser_enabled { -1.0 } else { 1.0 };
    let path = config.geometry_factor * (mirror_a_disp - sign_b * mirror_b_disp);
    let phase = 0.5 * config.bias_phase + PI * path / config.laser_wavelength;
    phase.cos().powi(2)
}

fn branch_intensity(branch: Branch, displacement: f64, config: &ApparatusConfig) -> f64 {
    match branch {
        Branch::One => interference_intensity(displacement, 0.0, config),
        Branch::Two => interference_intensity(0.0, displacement, config),
    }
}

fn branch_geometries(
    config: &ApparatusConfig,
    displacement: f64,
) -> Result<[SuperpositionGeometry; 4]> {
    let mount_disp = displacement * config.mirror.mass() / config.mount.mass();
    Ok([
        SuperpositionGeometry::new(config.mirror.clone(), displacement)?,
        SuperpositionGeometry::new(config.mount.clone(), mount_disp)?,
        SuperpositionGeometry::new(config.mirror.clone(), displacement)?,
        SuperpositionGeometry::new(config.mount.clone(), mount_disp)?,
    ])
}

/// Self-energy of the gravitational difference between the two branches at a
/// common mirror displacement. Each branch moves a different arm, so both
/// mirrors and both recoiling mounts enter the difference at full weight.
pub fn superposition_self_energy(
    config: &ApparatusConfig,
    displacement: f64,
    c: &PhysicalConstants,
) -> Result<f64> {
    let geometries = branch_geometries(config, displacement)?;
    // gamma cancels out of the energy; any positive value works here.
    Ok(system_self_energy(&geometries, &[], config.variant, 1.0, c)?.total_energy)
}

/// Hazard contribution that does not scale with gamma: the quoted component
/// collapse times plus entrainment when the eraser is out.
pub fn fixed_extra_rate(config: &ApparatusConfig) -> f64 {
    let components: f64 = config
        .extra_component_times
        .iter()
        .map(|(_, time)| 1.0 / time)
        .sum();
    if config.eraser_enabled {
        components
    } else {
        components + config.entrainment_rate
    }
}

/// Instantaneous collapse hazard `t` seconds after the trigger.
pub fn hazard_rate(config: &ApparatusConfig, t: f64, c: &PhysicalConstants) -> Result<f64> {
    let displacement = piezo_displacement(t, config);
    let geometries = branch_geometries(config, displacement)?;
    let extras = [fixed_extra_rate(config)];
    Ok(system_self_energy(&geometries, &extras, config.variant, config.gamma, c)?.total_rate)
}

/// Tabulated hazard over the trace window, ready for sampling. Building the
/// table costs a few thousand rate evaluations, so campaigns share one.
pub fn collapse_hazard(
    config: &ApparatusConfig,
    c: &PhysicalConstants,
) -> Result<HazardTrajectory> {
    config.validate()?;
    let cfg = config.clone();
    let c = *c;
    HazardTrajectory::new(
        move |t| hazard_rate(&cfg, t, &c).expect("hazard rate on a validated config"),
        config.trace_duration,
    )
}

/// Gravitational hazard at gamma = 1 with the fixed extras excluded, over a
/// caller-chosen horizon. The cumulative hazard at any gamma is then
/// `cumulative(t) / gamma + fixed_extra_rate(config) * t`, which lets an
/// estimator rescale one table instead of rebuilding it per gamma step.
pub fn gravitational_hazard(
    config: &ApparatusConfig,
    horizon: f64,
    c: &PhysicalConstants,
) -> Result<HazardTrajectory> {
    config.validate()?;
    let cfg = config.clone();
    let c = *c;
    HazardTrajectory::new(
        move |t| {
            let displacement = piezo_displacement(t, &cfg);
            let energy = superposition_self_energy(&cfg, displacement, &c)
                .expect("self-energy on a validated config");
            energy / c.hbar()
        },
        horizon,
    )
}

const TRIGGER_STREAM: u64 = 0;
const DYNAMICS_STREAM: u64 = 1;
const NOISE_STREAM: u64 = 2;

fn read_out<R: Rng>(raw: f64, config: &ApparatusConfig, rng: &mut R) -> f64 {
    let mut value = raw;
    if config.detector_noise_sigma > 0.0 {
        let n: f64 = rng.sample(StandardNormal);
        value += config.detector_noise_sigma * n;
    }
    if config.detector_quantization > 0.0 {
        value = (value / config.detector_quantization).round() * config.detector_quantization;
    }
    value.clamp(0.0, 1.0)
}

/// One trial: waits for a trigger, ramps the piezos, records the trace.
pub fn run_trial(config: &ApparatusConfig, trial_id: u64, seed: u64) -> Result<TrialRecord> {
    config.validate()?;
    let hazard = collapse_hazard(config, &PhysicalConstants::default())?;
    run_trial_with_hazard(config, &hazard, trial_id, seed)
}

fn run_trial_with_hazard(
    config: &ApparatusConfig,
    hazard: &HazardTrajectory,
    trial_id: u64,
    seed: u64,
) -> Result<TrialRecord> {
    let mut trigger_rng = stream(derive_seed(seed, &[TRIGGER_STREAM]));
    let (trigger_time, trigger_source) = sample_trigger(config, &mut trigger_rng)?;

    let (collapse_time, surviving_branch) = match trigger_source.fired_branch() {
        // Dark counts never superpose anything, so there is no collapse.
        Some(branch) => (None, Some(branch)),
        None => {
            let evolution = evolve(
                hazard,
                config.collapse_model,
                config.gamma_dec,
                config.sample_interval,
                derive_seed(seed, &[DYNAMICS_STREAM]),
            )?;
            (
                Some(evolution.collapse_time.unwrap_or(f64::INFINITY)),
                evolution.branch,
            )
        }
    };

    let baseline = config.baseline_intensity();
    let mut noise_rng = stream(derive_seed(seed, &[NOISE_STREAM]));
    let n_intervals = (config.trace_duration / config.sample_interval + 1e-9).floor() as u64;
    let mut samples = Vec::with_capacity(n_intervals as usize + 1);
    for k in 0..=n_intervals {
        let t = k as f64 * config.sample_interval;
        let displacement = piezo_displacement(t, config);
        let raw = match (trigger_source.fired_branch(), collapse_time) {
            (Some(branch), _) => branch_intensity(branch, displacement, config),
            (None, Some(tc)) if t >= tc => {
                let branch = surviving_branch.expect("collapse selects a branch");
                branch_intensity(branch, displacement, config)
            }
            _ => match config.precollapse_readout {
                PrecollapseReadout::Baseline => baseline,
                // Decoherence never moves the populations, so the weights
                // stay at the initial half/half split until collapse.
                PrecollapseReadout::Mixture => {
                    0.5 * branch_intensity(Branch::One, displacement, config)
                        + 0.5 * branch_intensity(Branch::Two, displacement, config)
                }
            },
        };
        samples.push(TraceSample {
            t,
            intensity: read_out(raw, config, &mut noise_rng),
        });
    }

    Ok(TrialRecord {
        trial_id,
        trigger_time,
        trigger_source,
        collapse_time,
        surviving_branch,
        seed,
        samples,
    })
}

/// Runs `n_trials` independent trials with per-trial seeds derived from
/// `master_seed`. Output is ordered by trial id and bitwise reproducible
/// regardless of `parallelism` (0 picks the library default).
pub fn run_campaign(
    config: &ApparatusConfig,
    n_trials: u64,
    master_seed: u64,
    parallelism: usize,
) -> Result<Vec<TrialRecord>> {
    if n_trials == 0 {
        return Err(Error::Config("n_trials must be at least 1".into()));
    }
    config.validate()?;
    let hazard = collapse_hazard(config, &PhysicalConstants::default())?;
    hazard.total(); // force the table once, outside the worker pool

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    pool.install(|| {
        (0..n_trials)
            .into_par_iter()
            .map(|trial_id| {
                run_trial_with_hazard(config, &hazard, trial_id, derive_seed(master_seed, &[trial_id]))
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use crate::constants::{GRAVITATIONAL_CONSTANT, REDUCED_PLANCK};

    fn config() -> ApparatusConfig {
        ApparatusConfig::default()
    }

    #[test]
    fn dark_rate_decade_model() {
        assert_relative_eq!(dark_rate(1.0e7, 30.0), 1.0e4, max_relative = 1e-12);
        assert_relative_eq!(dark_rate(1.0e7, 0.0), 1.0e7, max_relative = 1e-12);
        assert_relative_eq!(dark_rate(1.0e7, 10.0), 1.0e6, max_relative = 1e-12);
    }

    #[test]
    fn control_triggers_are_dark_only() {
        let cfg = ApparatusConfig {
            photon_rate: 0.0,
            ..config()
        };
        let mut rng = stream(41);
        let mut spad1 = 0u32;
        let n = 100_000;
        for _ in 0..n {
            let (t, source) = sample_trigger(&cfg, &mut rng).unwrap();
            assert!(t > 0.0);
            match source {
                TriggerSource::Photon => panic!("photon trigger with the laser off"),
                TriggerSource::DarkCountSpad1 => spad1 += 1,
                TriggerSource::DarkCountSpad2 => {}
            }
        }
        let fraction = f64::from(spad1) / f64::from(n);
        assert!((fraction - 0.5).abs() < 0.005, "spad split {fraction}");
    }

    #[test]
    fn trigger_rates_compete_fairly() {
        // Detected photon rate set equal to each dark rate: 1/3 each.
        let cfg = ApparatusConfig {
            photon_rate: 1.0e4,
            spad_efficiency: 1.0,
            ..config()
        };
        assert_relative_eq!(
            cfg.detected_photon_rate(),
            cfg.dark_rate_per_spad(),
            max_relative = 1e-12
        );
        let mut rng = stream(42);
        let n = 100_000;
        let mut photon = 0u32;
        let mut mean_t = 0.0;
        for _ in 0..n {
            let (t, source) = sample_trigger(&cfg, &mut rng).unwrap();
            mean_t += t;
            if source == TriggerSource::Photon {
                photon += 1;
            }
        }
        let fraction = f64::from(photon) / f64::from(n);
        assert!((fraction - 1.0 / 3.0).abs() < 0.006, "photon fraction {fraction}");
        // Minimum of three exponentials at rate r each is exponential at 3r.
        mean_t /= f64::from(n);
        assert_relative_eq!(mean_t, 1.0 / 3.0e4, max_relative = 0.02);
    }

    #[test]
    fn trigger_needs_a_positive_rate() {
        let cfg = ApparatusConfig {
            photon_rate: 0.0,
            ambient_dark_rate: 0.0,
            ..config()
        };
        let mut rng = stream(1);
        assert!(sample_trigger(&cfg, &mut rng).is_err());
    }

    #[test]
    fn piezo_lag_examples() {
        let cfg = config();
        assert_eq!(piezo_displacement(0.0, &cfg), 0.0);
        assert_relative_eq!(
            piezo_displacement(cfg.piezo_tau, &cfg),
            6.321_205_588e-7,
            max_relative = 1e-9
        );
        assert_relative_eq!(
            piezo_displacement(1e3 * cfg.piezo_tau, &cfg),
            cfg.piezo_full_scale,
            max_relative = 1e-12
        );
    }

    #[test]
    fn fringe_baseline_and_angstrom_step() {
        let cfg = config();
        assert_abs_diff_eq!(cfg.baseline_intensity(), 0.5, epsilon = 1e-15);
        // 1 angstrom on mirror A at mid-fringe.
        let stepped = interference_intensity(1.0e-10, 0.0, &cfg);
        assert_abs_diff_eq!(stepped, 0.499_007_083, epsilon = 1e-8);
        assert_abs_diff_eq!(0.5 - stepped, 9.929_17e-4, epsilon = 1e-8);
    }

    #[test]
    fn eraser_out_common_motion_cancels() {
        let cfg = ApparatusConfig {
            eraser_enabled: false,
            ..config()
        };
        let baseline = cfg.baseline_intensity();
        for d in [1.0e-10, 3.0e-8, 5.0e-7] {
            assert_eq!(interference_intensity(d, d, &cfg), baseline);
        }
    }

    #[test]
    fn eraser_out_branches_shift_opposite_ways() {
        let cfg = ApparatusConfig {
            eraser_enabled: false,
            ..config()
        };
        let d = 2.0e-10;
        let one = interference_intensity(d, 0.0, &cfg);
        let two = interference_intensity(0.0, d, &cfg);
        assert!(one < 0.5 && two > 0.5, "got {one} and {two}");
        assert_abs_diff_eq!(one + two, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn eraser_in_branches_match_exactly() {
        let cfg = config();
        for d in [1.0e-10, 4.0e-9, 2.0e-7] {
            assert_eq!(
                interference_intensity(d, 0.0, &cfg),
                interference_intensity(0.0, d, &cfg)
            );
        }
    }

    #[test]
    fn hazard_rate_matches_quadratic_law() {
        // Small displacements sit deep in the overlapping regime where
        // E = G M^2 d^2 / (2 R^3) per body; mounts recoil at the mass ratio.
        let cfg = config();
        let c = PhysicalConstants::default();
        let t = 5.0e-8;
        let d = piezo_displacement(t, &cfg);
        let mirror_term = GRAVITATIONAL_CONSTANT * cfg.mirror.mass().powi(2) * d * d
            / (2.0 * cfg.mirror.radius().powi(3));
        let d_mount = d * cfg.mirror.mass() / cfg.mount.mass();
        let mount_term = GRAVITATIONAL_CONSTANT * cfg.mount.mass().powi(2) * d_mount * d_mount
            / (2.0 * cfg.mount.radius().powi(3));
        let expected =
            2.0 * (mirror_term + mount_term) / (cfg.gamma * REDUCED_PLANCK) + fixed_extra_rate(&cfg);
        assert_relative_eq!(hazard_rate(&cfg, t, &c).unwrap(), expected, max_relative = 1e-5);
    }

    #[test]
    fn photon_trial_holds_baseline_until_collapse() {
        let cfg = ApparatusConfig {
            ambient_dark_rate: 0.0, // force a photon trigger
            ..config()
        };
        let record = run_trial(&cfg, 0, 7).unwrap();
        assert_eq!(record.trigger_source, TriggerSource::Photon);
        let tc = record.collapse_time.unwrap();
        assert!(tc.is_finite() && tc > 0.0);
        let branch = record.surviving_branch.unwrap();
        for s in &record.samples {
            assert!((0.0..=1.0).contains(&s.intensity));
            if s.t < tc {
                assert_eq!(s.intensity, 0.5, "pre-collapse sample at {}", s.t);
            } else {
                let mut probe = stream(0);
                let want = read_out(
                    branch_intensity(branch, piezo_displacement(s.t, &cfg), &cfg),
                    &cfg,
                    &mut probe,
                );
                assert_eq!(s.intensity, want, "post-collapse sample at {}", s.t);
            }
        }
        assert!(record.samples.iter().any(|s| s.intensity != 0.5));
    }

    #[test]
    fn instant_collapse_equals_dark_count_trace() {
        // A deterministic collapse driven by a huge constant hazard fires
        // essentially at t = 0, which must reproduce a dark-count ramp.
        let photon = ApparatusConfig {
            ambient_dark_rate: 0.0,
            collapse_model: CollapseModel::Deterministic,
            extra_component_times: vec![("shunt".into(), 1.0e-30)],
            ..config()
        };
        let dark = ApparatusConfig {
            photon_rate: 0.0,
            ..config()
        };
        let a = run_trial(&photon, 0, 11).unwrap();
        let b = run_trial(&dark, 0, 11).unwrap();
        assert_eq!(a.trigger_source, TriggerSource::Photon);
        assert!(b.trigger_source.is_dark_count());
        // Eraser in, so the two branches read identically sample for sample.
        assert_eq!(a.samples, b.samples);
    }

    #[test]
    fn vanishing_rate_never_leaves_baseline() {
        let cfg = ApparatusConfig {
            ambient_dark_rate: 0.0,
            gamma: 1.0e30,
            extra_component_times: vec![],
            ..config()
        };
        let record = run_trial(&cfg, 3, 13).unwrap();
        assert_eq!(record.collapse_time, Some(f64::INFINITY));
        assert_eq!(record.surviving_branch, None);
        assert!(record.samples.iter().all(|s| s.intensity == 0.5));
    }

    #[test]
    fn mixture_readout_moves_before_collapse() {
        let cfg = ApparatusConfig {
            ambient_dark_rate: 0.0,
            precollapse_readout: PrecollapseReadout::Mixture,
            gamma: 1.0e30, // suppress collapse so the whole trace is pre-collapse
            extra_component_times: vec![],
            ..config()
        };
        let record = run_trial(&cfg, 0, 5).unwrap();
        // Eraser in: both branch fringes agree, so the mixture tracks the
        // ramp immediately, the orthodox no-delay prediction.
        assert!(record.samples.last().unwrap().intensity != 0.5);
    }

    #[test]
    fn control_trials_depart_on_the_first_ramp_sample() {
        let cfg = ApparatusConfig {
            photon_rate: 0.0,
            ..config()
        };
        let records = run_campaign(&cfg, 20, 17, 1).unwrap();
        for r in &records {
            assert_eq!(r.collapse_time, None);
            assert_eq!(r.samples[0].intensity, 0.5);
            // 10 ns of ramp is already about an angstrom, ten quantization
            // steps below baseline.
            assert!(r.samples[1].intensity != 0.5);
        }
    }

    #[test]
    fn campaign_is_deterministic_and_ordered() {
        let cfg = config();
        let serial = run_campaign(&cfg, 40, 99, 1).unwrap();
        let parallel = run_campaign(&cfg, 40, 99, 4).unwrap();
        assert_eq!(serial, parallel);
        for (i, r) in serial.iter().enumerate() {
            assert_eq!(r.trial_id, i as u64);
        }
        let other = run_campaign(&cfg, 40, 100, 1).unwrap();
        assert!(other[0].trigger_time != serial[0].trigger_time);
    }

    #[test]
    fn campaign_of_one_matches_run_trial() {
        let cfg = config();
        let campaign = run_campaign(&cfg, 1, 12345, 1).unwrap();
        let single = run_trial(&cfg, 0, derive_seed(12345, &[0])).unwrap();
        assert_eq!(campaign[0], single);
    }

    #[test]
    fn validation_names_field_and_bound() {
        let bad = ApparatusConfig {
            spad_efficiency: 1.5,
            ..config()
        };
        let msg = bad.validate().unwrap_err().to_string();
        assert!(msg.contains("spad_efficiency") && msg.contains("[0, 1]"), "{msg}");

        let bad = ApparatusConfig {
            sample_interval: 2.0e-7,
            ..config()
        };
        let msg = bad.validate().unwrap_err().to_string();
        assert!(msg.contains("sample_interval") && msg.contains("1e-7"), "{msg}");

        let bad = ApparatusConfig {
            extra_component_times: vec![("dud".into(), 0.0)],
            ..config()
        };
        assert!(bad.validate().is_err());

        assert!(run_campaign(&config(), 0, 1, 1).is_err());
    }
}

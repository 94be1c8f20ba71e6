//! Two-branch density-matrix dynamics: decoherence, stochastic collapse, and
//! the time-dependent hazard that drives it.
//!
//! The state is the 2x2 density matrix of a mass superposition written as
//! branch populations plus an off-diagonal coherence magnitude and phase.
//! Two distinct processes act on it:
//!
//! * decoherence multiplies the coherence by `exp(-gamma_dec * dt)` and
//!   never touches the populations; it turns the superposition into a
//!   classical-looking mixture but selects nothing;
//! * collapse picks a branch by the Born rule at a random instant drawn
//!   from an inhomogeneous Poisson process whose rate is the instantaneous
//!   gravitational collapse rate `E_g(t) / (gamma * hbar)`.
//!
//! Keeping the two separate is the point of the model: the collapse-time
//! distribution is identical whether the coherence has decayed or not.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream, uniform_open01};

/// Which branch survived a collapse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "branch1")]
    One,
    #[serde(rename = "branch2")]
    Two,
}

/// How collapse instants are generated from the hazard.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollapseModel {
    /// First event of an inhomogeneous Poisson process with the hazard as
    /// its rate; reproduces `t = gamma hbar / E_g` as the mean for constant
    /// self-energy.
    #[default]
    Poisson,
    /// Hard threshold: collapse exactly when the integrated rate reaches 1.
    Deterministic,
}

/// Density-matrix surrogate for a 50:50 two-branch superposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoBranchState {
    p1: f64,
    p2: f64,
    coherence_mag: f64,
    coherence_phase: f64,
    collapsed: Option<Branch>,
}

/// Balanced pure superposition: populations 1/2, coherence 1/2, phase 0.
pub fn initial_state() -> TwoBranchState {
    TwoBranchState {
        p1: 0.5,
        p2: 0.5,
        coherence_mag: 0.5,
        coherence_phase: 0.0,
        collapsed: None,
    }
}

impl TwoBranchState {
    /// Balanced superposition with an explicit off-diagonal phase.
    pub fn with_phase(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::Domain(format!(
                "coherence phase must be finite, got {theta}"
            )));
        }
        Ok(TwoBranchState {
            coherence_phase: theta,
            ..initial_state()
        })
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    pub fn coherence_mag(&self) -> f64 {
        self.coherence_mag
    }

    pub fn coherence_phase(&self) -> f64 {
        self.coherence_phase
    }

    pub fn collapsed(&self) -> Option<Branch> {
        self.collapsed
    }

    /// `tr(rho^2)`: 1 for a pure state, 1/2 for the fully decohered mixture.
    pub fn purity(&self) -> f64 {
        self.p1 * self.p1 + self.p2 * self.p2 + 2.0 * self.coherence_mag * self.coherence_mag
    }

    /// Checks trace, positivity, and collapse consistency.
    pub fn validate(&self) -> Result<()> {
        if (self.p1 + self.p2 - 1.0).abs() > 1e-12 {
            return Err(Error::State(format!(
                "populations must sum to 1, got {} + {}",
                self.p1, self.p2
            )));
        }
        if self.p1 < 0.0 || self.p2 < 0.0 {
            return Err(Error::State(format!(
                "populations must be nonnegative, got ({}, {})",
                self.p1, self.p2
            )));
        }
        if self.coherence_mag < 0.0
            || self.coherence_mag > (self.p1 * self.p2).sqrt() + 1e-12
        {
            return Err(Error::State(format!(
                "coherence magnitude {} violates positive semidefiniteness (bound {})",
                self.coherence_mag,
                (self.p1 * self.p2).sqrt()
            )));
        }
        if self.collapsed.is_some() {
            let pointer = match self.collapsed {
                Some(Branch::One) => self.p1,
                _ => self.p2,
            };
            if (pointer - 1.0).abs() > 1e-12 || self.coherence_mag != 0.0 {
                return Err(Error::State(
                    "collapsed state must be a pure branch projector".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Exponential decay of the off-diagonal terms; populations untouched.
pub fn decohere_step(state: &TwoBranchState, dt: f64, gamma_dec: f64) -> Result<TwoBranchState> {
    if state.collapsed.is_some() {
        return Err(Error::State(
            "cannot decohere a collapsed state: the off-diagonals are already gone".into(),
        ));
    }
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!(
            "dt must be nonnegative and finite, got {dt}"
        )));
    }
    if !(gamma_dec >= 0.0) {
        return Err(Error::Domain(format!(
            "gamma_dec must be nonnegative, got {gamma_dec}"
        )));
    }
    Ok(TwoBranchState {
        coherence_mag: state.coherence_mag * (-gamma_dec * dt).exp(),
        ..*state
    })
}

/// Born-rule symmetry breaking: Branch1 with probability `p1`.
pub fn apply_collapse(state: &TwoBranchState, u: f64) -> Result<TwoBranchState> {
    if state.collapsed.is_some() {
        return Err(Error::State("state has already collapsed".into()));
    }
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!(
            "collapse draw must lie strictly inside (0,1), got {u}"
        )));
    }
    let branch = if u < state.p1 { Branch::One } else { Branch::Two };
    let (p1, p2) = match branch {
        Branch::One => (1.0, 0.0),
        Branch::Two => (0.0, 1.0),
    };
    Ok(TwoBranchState {
        p1,
        p2,
        coherence_mag: 0.0,
        coherence_phase: state.coherence_phase,
        collapsed: Some(branch),
    })
}

/// Time-dependent collapse rate over a finite horizon.
///
/// The cumulative integral is tabulated lazily by adaptive trapezoid
/// refinement (relative tolerance 1e-9) and interpolated with a
/// piecewise-quadratic, so repeated sampling against one trajectory is
/// cheap and deterministic.
#[derive(Clone)]
pub struct HazardTrajectory {
    rate_fn: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    horizon: f64,
    table: Arc<std::sync::OnceLock<CumulativeTable>>,
}

impl fmt::Debug for HazardTrajectory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HazardTrajectory")
            .field("horizon", &self.horizon)
            .field("tabulated", &self.table.get().is_some())
            .finish()
    }
}

#[derive(Debug)]
struct CumulativeTable {
    ts: Vec<f64>,
    rates: Vec<f64>,
    cumulative: Vec<f64>,
}

const TABLE_SEED_PANELS: usize = 512;
const TABLE_MAX_DEPTH: u32 = 40;
const TABLE_REL_TOL: f64 = 1e-9;

impl HazardTrajectory {
    pub fn new(
        rate_fn: impl Fn(f64) -> f64 + Send + Sync + 'static,
        horizon: f64,
    ) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::Domain(format!(
                "horizon must be strictly positive and finite, got {horizon}"
            )));
        }
        Ok(Self {
            rate_fn: Arc::new(rate_fn),
            horizon,
            table: Arc::new(std::sync::OnceLock::new()),
        })
    }

    pub fn constant(rate: f64, horizon: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::Domain(format!(
                "rate must be nonnegative and finite, got {rate}"
            )));
        }
        Self::new(move |_| rate, horizon)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Instantaneous rate, clamped to be nonnegative.
    pub fn rate(&self, t: f64) -> f64 {
        (self.rate_fn)(t).max(0.0)
    }

    fn table(&self) -> &CumulativeTable {
        self.table.get_or_init(|| self.build_table())
    }

    fn build_table(&self) -> CumulativeTable {
        // Coarse pass fixes the tolerance scale.
        let n = TABLE_SEED_PANELS;
        let step = self.horizon / n as f64;
        let mut coarse = 0.0;
        let mut prev = self.rate(0.0);
        for i in 1..=n {
            let r = self.rate(i as f64 * step);
            coarse += 0.5 * (prev + r) * step;
            prev = r;
        }
        let tol_panel = (coarse.abs().max(f64::MIN_POSITIVE) * TABLE_REL_TOL) / n as f64;

        let mut ts = vec![0.0];
        let mut rates = vec![self.rate(0.0)];
        let mut cumulative = vec![0.0];
        for i in 0..n {
            let a = i as f64 * step;
            let b = if i + 1 == n { self.horizon } else { (i + 1) as f64 * step };
            let fa = *rates.last().unwrap();
            let fb = self.rate(b);
            self.refine(
                a,
                fa,
                b,
                fb,
                tol_panel,
                TABLE_MAX_DEPTH,
                &mut ts,
                &mut rates,
                &mut cumulative,
            );
        }
        CumulativeTable {
            ts,
            rates,
            cumulative,
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn refine(
        &self,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        tol: f64,
        depth: u32,
        ts: &mut Vec<f64>,
        rates: &mut Vec<f64>,
        cumulative: &mut Vec<f64>,
    ) {
        let m = 0.5 * (a + b);
        let fm = self.rate(m);
        let whole = 0.5 * (fa + fb) * (b - a);
        let halves = 0.25 * (fa + 2.0 * fm + fb) * (b - a);
        if depth == 0 || (halves - whole).abs() <= 3.0 * tol || ts.len() > 4_000_000 {
            let h_last = *cumulative.last().unwrap();
            ts.push(m);
            rates.push(fm);
            cumulative.push(h_last + 0.25 * (fa + fm) * (b - a));
            ts.push(b);
            rates.push(fb);
            cumulative.push(h_last + halves);
        } else {
            self.refine(a, fa, m, fm, tol / 2.0, depth - 1, ts, rates, cumulative);
            self.refine(m, fm, b, fb, tol / 2.0, depth - 1, ts, rates, cumulative);
        }
    }

    /// Integrated rate `H(t)` on `[0, horizon]`, clamped at the ends.
    pub fn cumulative(&self, t: f64) -> f64 {
        let table = self.table();
        if t <= 0.0 {
            return 0.0;
        }
        if t >= self.horizon {
            return *table.cumulative.last().unwrap();
        }
        let idx = match table
            .ts
            .binary_search_by(|probe| probe.partial_cmp(&t).unwrap())
        {
            Ok(i) => return table.cumulative[i],
            Err(i) => i - 1,
        };
        let (t0, t1) = (table.ts[idx], table.ts[idx + 1]);
        let (r0, r1) = (table.rates[idx], table.rates[idx + 1]);
        let dt = t - t0;
        let span = t1 - t0;
        let r_t = if span > 0.0 {
            r0 + (r1 - r0) * dt / span
        } else {
            r0
        };
        table.cumulative[idx] + 0.5 * (r0 + r_t) * dt
    }

    /// Total integrated rate over the whole horizon.
    pub fn total(&self) -> f64 {
        *self.table().cumulative.last().unwrap()
    }

    /// Smallest `t` with `cumulative(t) >= target`, by doubling then
    /// bisection to 1e-12 relative tolerance; `None` when the horizon total
    /// never reaches the target.
    fn solve_cumulative(&self, target: f64) -> Option<f64> {
        if target <= 0.0 {
            return Some(0.0);
        }
        if self.total() < target {
            return None;
        }
        let mut lo = 0.0;
        let mut hi = self.horizon * 1e-9;
        while self.cumulative(hi) < target {
            lo = hi;
            hi *= 2.0;
            if hi >= self.horizon {
                hi = self.horizon;
                break;
            }
        }
        for _ in 0..200 {
            if (hi - lo) <= 1e-12 * hi.max(f64::MIN_POSITIVE) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.cumulative(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(0.5 * (lo + hi))
    }
}

/// First-event time of the inhomogeneous Poisson process: the `T` solving
/// `integral_0^T rate dt = -ln u`, or `None` when the horizon is survived.
pub fn sample_collapse_time(hazard: &HazardTrajectory, u: f64) -> Result<Option<f64>> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!(
            "uniform draw must lie strictly inside (0,1), got {u}"
        )));
    }
    Ok(hazard.solve_cumulative(-u.ln()))
}

/// Collapse instant under the chosen model, consuming a draw only for the
/// Poisson model.
pub fn collapse_instant<R: Rng>(
    hazard: &HazardTrajectory,
    model: CollapseModel,
    rng: &mut R,
) -> Result<Option<f64>> {
    match model {
        CollapseModel::Poisson => sample_collapse_time(hazard, uniform_open01(rng)),
        CollapseModel::Deterministic => Ok(hazard.solve_cumulative(1.0)),
    }
}

/// One recorded instant of an evolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimelinePoint {
    pub t: f64,
    pub p1: f64,
    pub p2: f64,
    pub coherence_mag: f64,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub collapse_time: Option<f64>,
    pub branch: Option<Branch>,
    pub final_state: TwoBranchState,
    pub timeline: Vec<TimelinePoint>,
}

/// Steps a fresh superposition through decoherence at resolution `dt`,
/// inserting the Born-rule collapse at its sampled instant.
///
/// Draw order from the seeded stream: collapse-time uniform first (Poisson
/// model only), then the branch-selection uniform at the collapse instant.
pub fn evolve(
    hazard: &HazardTrajectory,
    model: CollapseModel,
    gamma_dec: f64,
    dt: f64,
    seed: u64,
) -> Result<Evolution> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!(
            "dt must be strictly positive and finite, got {dt}"
        )));
    }
    let mut rng = stream(seed);
    let collapse_time = collapse_instant(hazard, model, &mut rng)?;

    let mut state = initial_state();
    let mut timeline = vec![TimelinePoint {
        t: 0.0,
        p1: state.p1(),
        p2: state.p2(),
        coherence_mag: state.coherence_mag(),
    }];
    let record = |timeline: &mut Vec<TimelinePoint>, t: f64, state: &TwoBranchState| {
        timeline.push(TimelinePoint {
            t,
            p1: state.p1(),
            p2: state.p2(),
            coherence_mag: state.coherence_mag(),
        });
    };
    let n_steps = (hazard.horizon() / dt).ceil() as u64;
    let mut t = 0.0;
    for k in 1..=n_steps {
        let t_next = (k as f64 * dt).min(hazard.horizon());
        if t_next <= t {
            continue;
        }
        if state.collapsed().is_none() {
            if let Some(tc) = collapse_time.filter(|&tc| tc > t && tc <= t_next) {
                state = decohere_step(&state, tc - t, gamma_dec)?;
                state = apply_collapse(&state, uniform_open01(&mut rng))?;
                record(&mut timeline, tc, &state);
                if t_next > tc {
                    record(&mut timeline, t_next, &state);
                }
                t = t_next;
                continue;
            }
            state = decohere_step(&state, t_next - t, gamma_dec)?;
        }
        record(&mut timeline, t_next, &state);
        t = t_next;
    }
    Ok(Evolution {
        collapse_time,
        branch: state.collapsed(),
        final_state: state,
        timeline,
    })
}

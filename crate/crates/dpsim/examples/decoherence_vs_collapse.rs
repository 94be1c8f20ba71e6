//! Environmental decoherence kills the off-diagonal terms; gravitational
//! collapse picks a branch. The two look alike in an interference pattern
//! but act on different parts of the density matrix, and the collapse clock
//! never consults the coherence. Cranking gamma_dec from zero to absurd
//! leaves every sampled collapse time bit-identical.

use dpsim::dynamics::{evolve, CollapseModel, HazardTrajectory};
use dpsim::Result;

fn main() -> Result<()> {
    let c = 3.0e21;
    let hazard = HazardTrajectory::new(move |t| c * t * t, 1.0e-6)?;
    let dt = 1.0e-8;
    let n = 2_000;

    let mut max_shift: f64 = 0.0;
    let mut coherence_with = f64::NAN;
    let mut coherence_without = f64::NAN;
    for seed in 0..n {
        let calm = evolve(&hazard, CollapseModel::Poisson, 0.0, dt, seed)?;
        let noisy = evolve(&hazard, CollapseModel::Poisson, 1.0e38, dt, seed)?;
        match (calm.collapse_time, noisy.collapse_time) {
            (Some(a), Some(b)) => max_shift = max_shift.max((a - b).abs()),
            (None, None) => {}
            other => panic!("collapse outcomes diverged: {other:?}"),
        }
        // Peek at the superposition a few steps in, before most collapses.
        if seed == 0 {
            coherence_without = calm.timeline[3].coherence_mag;
            coherence_with = noisy.timeline[3].coherence_mag;
        }
    }

    println!("{n} evolutions, gamma_dec 0 vs 1e38 /s, shared seeds");
    println!("  coherence magnitude at t = 30 ns: {coherence_without:.3} vs {coherence_with:.3e}");
    println!("  largest collapse-time shift:      {max_shift:.3e} s");
    println!();
    println!("Decoherence flattened the off-diagonals at the first step, yet no");
    println!("collapse moved: the hazard depends on the mass geometry, not on");
    println!("how scrambled the phase already is.");
    Ok(())
}

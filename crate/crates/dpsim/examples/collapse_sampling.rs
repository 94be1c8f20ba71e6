//! Collapse instants are first events of an inhomogeneous Poisson process:
//! invert the cumulative hazard at a uniform draw. Two cases with known
//! closed forms keep the sampler honest.

use dpsim::dynamics::{sample_collapse_time, HazardTrajectory};
use dpsim::rng::{stream, uniform_open01};
use dpsim::Result;

const GAMMA_4_3: f64 = 0.892979511569249;

fn draw(hazard: &HazardTrajectory, n: usize, seed: u64) -> Result<Vec<f64>> {
    let mut rng = stream(seed);
    let mut times = Vec::with_capacity(n);
    while times.len() < n {
        if let Some(t) = sample_collapse_time(hazard, uniform_open01(&mut rng))? {
            times.push(t);
        }
    }
    Ok(times)
}

fn median(times: &mut [f64]) -> f64 {
    times.sort_by(f64::total_cmp);
    times[times.len() / 2]
}

fn main() -> Result<()> {
    let n = 20_000;

    // Constant hazard: plain exponential waiting times.
    let rate = 2.0e6;
    let constant = HazardTrajectory::constant(rate, 40.0 / rate)?;
    let mut times = draw(&constant, n, 11)?;
    let mean = times.iter().sum::<f64>() / n as f64;
    println!("constant hazard {rate:.1e} /s over {n} draws");
    println!("  mean   {:.4e} s  (law: {:.4e})", mean, 1.0 / rate);
    println!(
        "  median {:.4e} s  (law: {:.4e})",
        median(&mut times),
        std::f64::consts::LN_2 / rate
    );

    // Quadratic ramp c t^2, the shape a steadily opening superposition
    // feeds the collapse clock: survival exp(-c t^3 / 3).
    let c: f64 = 3.0e21;
    let horizon = (3.0 * 40.0 / c).cbrt();
    let ramp = HazardTrajectory::new(move |t| c * t * t, horizon)?;
    let mut times = draw(&ramp, n, 12)?;
    let mean = times.iter().sum::<f64>() / n as f64;
    let median_law = (3.0 * std::f64::consts::LN_2 / c).cbrt();
    let mean_law = (3.0 / c).cbrt() * GAMMA_4_3;
    println!();
    println!("ramp hazard {c:.1e} t^2 over {n} draws");
    println!("  mean   {:.4e} s  (law: {mean_law:.4e})", mean);
    println!(
        "  median {:.4e} s  (law: {median_law:.4e})",
        median(&mut times)
    );
    Ok(())
}

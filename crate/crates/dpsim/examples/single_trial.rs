//! One trial of the bench, sample by sample: a photon detection arms the
//! trial, the mirror superposition decays at its gravitational rate, and the
//! recorded interference intensity only starts tracking the piezo ramp once
//! a branch has won.

use dpsim::analysis::{default_onset_threshold, estimate_onset_delay};
use dpsim::apparatus::{run_trial, ApparatusConfig};
use dpsim::Result;

fn main() -> Result<()> {
    let config = ApparatusConfig::default();
    let record = run_trial(&config, 0, 2)?;

    println!("trigger: {:?} at t = {:.4e} s", record.trigger_source, record.trigger_time);
    match record.collapse_time {
        Some(t) if t.is_finite() => println!("collapse: {:.1} ns after the trigger", t * 1e9),
        Some(_) => println!("collapse: never within the recorded window"),
        None => println!("collapse: no superposition was prepared (dark trigger)"),
    }
    if let Some(branch) = record.surviving_branch {
        println!("surviving branch: {branch:?} (debug-only knowledge)");
    }

    let threshold = default_onset_threshold(&config);
    let onset = estimate_onset_delay(&record, threshold)?;
    match onset {
        Some(t) => println!("onset detected at {:.1} ns (threshold {:.3e})", t * 1e9, threshold),
        None => println!("no onset above threshold {threshold:.3e}"),
    }

    println!();
    println!("{:>6} {:>10}", "t_ns", "intensity");
    for sample in record.samples.iter().take(25) {
        let marker = match onset {
            Some(t) if (sample.t - t).abs() < 1e-12 => "  <- onset",
            _ => "",
        };
        println!("{:>6.0} {:>10.6}{marker}", sample.t * 1e9, sample.intensity);
    }
    println!("   ... {} samples total", record.samples.len());
    Ok(())
}

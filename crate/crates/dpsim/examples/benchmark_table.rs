//! Collapse times across twenty orders of magnitude in mass: a proton takes
//! longer than the age of the universe to decide, a cat never really gets to
//! be in two places. Run with `cargo run --release --example benchmark_table`.

use dpsim::analysis::benchmark_table;
use dpsim::constants::SECONDS_PER_YEAR;
use dpsim::io::benchmark_table_text;
use dpsim::{OverlapCoefficientVariant, PhysicalConstants, Result};

fn main() -> Result<()> {
    let constants = PhysicalConstants::default();
    let rows = benchmark_table(&constants, OverlapCoefficientVariant::ContinuityCorrected)?;
    print!("{}", benchmark_table_text(&rows));
    println!();

    for row in &rows {
        let human = if row.t_gamma_8pi > SECONDS_PER_YEAR {
            format!("{:.2e} years", row.t_gamma_8pi / SECONDS_PER_YEAR)
        } else {
            format!("{:.2e} seconds", row.t_gamma_8pi)
        };
        println!("{:<8} holds its superposition for about {human}", row.label);
    }

    println!();
    println!(
        "The mirror row is the interesting one: {:.1} microseconds sits inside\n\
         the window a photon-triggered bench can actually watch.",
        rows.iter()
            .find(|r| r.label == "mirror")
            .map(|r| r.t_gamma_8pi * 1e6)
            .unwrap_or(f64::NAN)
    );
    Ok(())
}

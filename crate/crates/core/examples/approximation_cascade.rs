//! Funnels of the level-n mollified problems shrinking toward the finest
//! level.
//!
//! `cargo run --release --example approximation_cascade`

use pulse::catalog::ProblemSpec;
use pulse::funnel::{approximation_cascade, CascadeConfig};
use pulse::integrator::StepControl;

fn main() -> pulse::Result<()> {
    let p = ProblemSpec::new("trust-funds").build()?;
    let config = CascadeConfig {
        count: 16,
        ..CascadeConfig::default()
    };
    let cascade = approximation_cascade(&p, &[4, 8, 16, 32], config, &StepControl::default())?;
    let r = &cascade.report;
    println!(
        "{:>6} {:>14} {:>14} {:>14}",
        "n", "H(F_n, F_32)", "k-center", "diameter"
    );
    for i in 0..r.levels.len() {
        println!(
            "{:>6} {:>14.4} {:>14.4} {:>14.4}",
            r.levels[i], r.distances_to_finest[i], r.kcenter_radii[i], r.max_pairwise[i]
        );
    }
    Ok(())
}

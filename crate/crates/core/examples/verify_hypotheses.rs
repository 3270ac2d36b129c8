//! Grid verification of growth, surface ordering and transversality, plus the
//! a-priori envelope, for every catalog problem.
//!
//! `cargo run --release --example verify_hypotheses`

use pulse::catalog::{ProblemSpec, NAMES};
use pulse::problem::{
    check_growth, check_surfaces, check_transversality, gronwall_bounds, SamplingGrid,
};

fn main() -> pulse::Result<()> {
    let grid = SamplingGrid {
        t_points: 5,
        y_points: 32,
    };
    for name in NAMES {
        let p = ProblemSpec::new(name).build()?;
        let k = gronwall_bounds(&p)?;
        print!("{name:<22} K_bar = {:>12.4e}", k.k_bar);
        for report in [
            check_growth(&p, grid)?,
            check_surfaces(&p, grid)?,
            check_transversality(&p, grid)?,
        ] {
            let mark = if report.pass { "ok" } else { "FAIL" };
            print!("  {} {mark} ({:+.4})", report.hypothesis, report.margin);
        }
        println!();
    }
    Ok(())
}

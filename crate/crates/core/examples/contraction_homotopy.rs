//! The contraction homotopy `h(r, ybar)`: identity at `r = 0`, a single
//! trajectory at `r = 1`, and the shrinking step-to-step increments as the
//! `r` grid is refined.
//!
//! `cargo run --release --example contraction_homotopy`

use pulse::catalog::ProblemSpec;
use pulse::funnel::{
    contract_homotopy, contractibility_probe, homotopy_selection, sample_funnel, Strategy,
};
use pulse::integrator::StepControl;

fn main() -> pulse::Result<()> {
    let p = ProblemSpec::new("trust-funds").build()?;
    let ctl = StepControl::default();
    let sample = sample_funnel(&p, &[Strategy::BangBang { switches: 3 }], 8, 7, &ctl)?;

    let g = homotopy_selection(&p, 16)?;
    let ybar = &sample.members()[0];
    for r in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let h = contract_homotopy(&p, &g, ybar, r, &ctl)?;
        println!(
            "r = {r:.2}: d(h, ybar) = {:.4}, y(1) = {:?}",
            h.base().distance(ybar.base())?,
            h.endpoint()
        );
    }

    for steps in [16, 64, 256] {
        let report = contractibility_probe(&p, 16, &sample, steps, false, &ctl)?;
        println!(
            "r steps {steps:>3}: modulus {:.4}, endpoint spread {:.1e}",
            report.continuity_modulus, report.endpoint_identity
        );
    }
    Ok(())
}

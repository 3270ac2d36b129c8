//! Sampling the solution funnel of a problem with three fixed impulse times
//! and summarising it by diameter, Hausdorff gap and k-center radius.
//!
//! `cargo run --release --example funnel_sampling`

use pulse::catalog::ProblemSpec;
use pulse::funnel::{hausdorff, kcenter_radius, sample_funnel, Strategy};
use pulse::integrator::StepControl;

fn main() -> pulse::Result<()> {
    let p = ProblemSpec::new("fixed-time-m3").build()?;
    let ctl = StepControl::default();
    let wide = sample_funnel(&p, &[Strategy::BangBang { switches: 4 }], 40, 1, &ctl)?;
    let tame = sample_funnel(
        &p,
        &[Strategy::Center, Strategy::Mollified { level: 8 }],
        2,
        1,
        &ctl,
    )?;

    println!(
        "bang-bang sample: {} members, diameter {:.4}",
        wide.len(),
        wide.max_pairwise()
    );
    for k in [1, 2, 4, 8] {
        println!(
            "  k-center radius, k = {k}: {:.4}",
            kcenter_radius(&wide, k)?
        );
    }
    println!(
        "Hausdorff(bang-bang, center/mollified) = {:.4}",
        hausdorff(&wide, &tame)?
    );

    let manifest = wide.manifest();
    let first = &manifest.members[0];
    println!(
        "member 0: {:?}, {} events",
        first.provenance,
        first.events.len()
    );
    Ok(())
}

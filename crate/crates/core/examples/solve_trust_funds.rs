//! One trajectory of the trust-fund model under several selections, with
//! event times, post-impulse states and the monotone decay of `t - tau(y)`.
//!
//! `cargo run --release --example solve_trust_funds`

use pulse::catalog::ProblemSpec;
use pulse::funnel::{mollification_box, Strategy};
use pulse::integrator::{post_jump_monotonicity, solve, StepControl};
use pulse::problem::{check_transversality, SamplingGrid};

fn main() -> pulse::Result<()> {
    let p = ProblemSpec::new("trust-funds")
        .with_param("rho", 0.25.into())
        .build()?;
    let ctl = StepControl::default();
    let bounds = mollification_box(&p)?;
    let p_hat = check_transversality(
        &p,
        SamplingGrid {
            t_points: 2,
            y_points: 64,
        },
    )?
    .margin;

    for raw in [
        "zero",
        "center",
        "extreme:1,-1",
        "bangbang:3",
        "mollified:8",
    ] {
        let strategy: Strategy = raw.parse()?;
        let traj = solve(&p, &strategy.selection(&p, 3, &bounds)?, &ctl)?;
        let mono = post_jump_monotonicity(&traj, &p, p_hat)?;
        for e in traj.events() {
            println!(
                "{raw:<13} jump at t = {:.6}: {:?} -> {:?}",
                e.t,
                e.pre
                    .iter()
                    .map(|v| (v * 1e4).round() / 1e4)
                    .collect::<Vec<_>>(),
                e.post
                    .iter()
                    .map(|v| (v * 1e4).round() / 1e4)
                    .collect::<Vec<_>>()
            );
        }
        println!(
            "{raw:<13} y(1) = {:?}, sup |y| = {:.4}, post-jump slope {:.4} (bound {:.4})",
            traj.endpoint(),
            traj.sup_norm(),
            mono.max_slope,
            mono.bound
        );
    }
    Ok(())
}

//! Elements of the jump space: norm, metric, left-continuous evaluation and
//! the round trip between a jump record list and a piecewise path.
//!
//! `cargo run --example jump_space`

use pulse::jumpspace::{reconstruct, reduce, Jump, JumpFunction};

fn main() -> pulse::Result<()> {
    // A continuous ramp with one jump of +1 at t = 0.4.
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let values: Vec<Vec<f64>> = grid.iter().map(|t| vec![*t]).collect();
    let f = JumpFunction::from_samples(1.0, grid.clone(), values, vec![Jump::new(0.4, vec![1.0])])?;

    // Same ramp, jump moved to t = 0.5 and slightly smaller.
    let values: Vec<Vec<f64>> = grid.iter().map(|t| vec![*t]).collect();
    let g = JumpFunction::from_samples(1.0, grid, values, vec![Jump::new(0.5, vec![0.9])])?;

    println!(
        "|f| = {:.3}, |g| = {:.3}, d(f, g) = {:.3}",
        f.norm(),
        g.norm(),
        f.distance(&g)?
    );
    for t in [0.39, 0.4, 0.41] {
        println!("f_hat({t}) = {:.3}", f.eval_hat(t)?[0]);
    }

    let traj = reconstruct(&f)?;
    println!(
        "reconstructed: {} pieces, {} event(s)",
        traj.pieces().len(),
        traj.events().len()
    );
    println!("round trip distance: {:.1e}", reduce(&traj)?.distance(&f)?);
    Ok(())
}

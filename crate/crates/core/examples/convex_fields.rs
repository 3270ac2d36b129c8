//! Convex values, selections and the mollified Lipschitz approximations of a
//! set-valued field.
//!
//! `cargo run --example convex_fields`

use pulse::fields::{mollify, select_center, select_extreme, select_random, ConvexSet, SetField};

fn main() -> pulse::Result<()> {
    let square = ConvexSet::boxed(vec![-1.0, -1.0], vec![1.0, 1.0])?;
    let disc = ConvexSet::ball(vec![0.0, 0.0], 1.0)?;
    let triangle = ConvexSet::polytope(vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 2.0]])?;
    let d = [1.0, 1.0];
    for (name, s) in [("box", &square), ("ball", &disc), ("polytope", &triangle)] {
        println!(
            "{name:>8}: support {:.4}, extreme {:?}, outer radius {:.4}",
            s.support(&d)?,
            s.extreme_point(&d)?,
            s.outer_radius()
        );
    }

    // F(t, y) = [y - 1/2, y + 1/2]: a state-dependent interval with alpha = 1.
    let field = SetField::new(
        1,
        |_, y| ConvexSet::boxed(vec![y[0] - 0.5], vec![y[0] + 0.5]).unwrap(),
        |_| 1.0,
    );
    let y = [0.3];
    println!(
        "center selection at y = 0.3: {:?}",
        select_center(&field).eval(0.0, &y)?
    );
    println!(
        "upper extreme at y = 0.3:    {:?}",
        select_extreme(&field, &[1.0])?.eval(0.0, &y)?
    );
    let random = select_random(&field, 1.0, 42, 3);
    println!("bang-bang switches at {:?}", random.breakpoints());

    // Lattice mollification of a curved field: the error at a lattice
    // midpoint shrinks as n grows.
    let curved = SetField::new(
        1,
        |_, y| ConvexSet::boxed(vec![(3.0 * y[0]).sin()], vec![(3.0 * y[0]).sin() + 1.0]).unwrap(),
        |_| 3.0,
    );
    let y = [0.3f64 + 1.0 / 64.0];
    let exact = (3.0 * y[0]).sin() + 0.5;
    for n in [2, 8, 32] {
        let g = mollify(&curved, n, &[-2.0], &[2.0])?;
        let value = g.eval(0.0, &y)?[0];
        println!(
            "mollified center, n = {n:>2}: {value:.5} (error {:.1e})",
            (value - exact).abs()
        );
    }
    Ok(())
}

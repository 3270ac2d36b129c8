//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Runs as a plain binary (no libtest harness) so the summary lines are
//! always printed.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use pulse::catalog::{ProblemSpec, NAMES};
use pulse::fields::select_zero;
use pulse::funnel::{
    approximation_cascade, contractibility_probe, derive_seed, sample_funnel, CascadeConfig,
    Strategy,
};
use pulse::integrator::{post_jump_monotonicity, solve, StepControl};
use pulse::jumpspace::{reconstruct, reduce, Jump, JumpFunction};
use pulse::problem::{check_transversality, gronwall_bounds, InclusionProblem, SamplingGrid};
use pulse::spline::HermitePath;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn problem(name: &str) -> InclusionProblem {
    ProblemSpec::new(name)
        .build()
        .expect("catalog entry builds")
}

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
}

/// `max_s 6 s / (pi (1 + s^2))` by golden-section search, independent of the
/// library's support functions.
fn oracle_transversality_margin() -> (f64, f64) {
    let g = |s: f64| 6.0 * s / (PI * (1.0 + s * s));
    let (mut lo, mut hi) = (0.0f64, 6.0f64);
    let r = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let (x1, x2) = (hi - r * (hi - lo), lo + r * (hi - lo));
        if g(x1) < g(x2) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    let s = 0.5 * (lo + hi);
    (1.0 - g(s), s)
}

fn criterion_1() -> Outcome {
    let p = problem("trust-funds");
    let start = Instant::now();
    let r = check_transversality(
        &p,
        SamplingGrid {
            t_points: 2,
            y_points: 64,
        },
    )
    .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let (want, s_star) = oracle_transversality_margin();
    let s = r.witness.y[0] + r.witness.y[1];
    check(r.pass, "transversality check failed")?;
    check(
        (r.margin - want).abs() <= 5e-3,
        format!("p_hat = {} vs {want}", r.margin),
    )?;
    check((s - s_star).abs() <= 0.05, format!("witness y1 + y2 = {s}"))?;
    check(
        elapsed < Duration::from_secs(5),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!(
        "p_hat = {:.6} (oracle {want:.6}), witness sum {s:.4}, {elapsed:.2?}",
        r.margin
    ))
}

fn criterion_2() -> Outcome {
    let ctl = StepControl::default();
    let tf = problem("trust-funds");
    let traj = solve(&tf, &select_zero(2), &ctl).map_err(|e| e.to_string())?;
    check(traj.events().len() == 1, "trust-funds: expected one event")?;
    let t1 = traj.events()[0].t;
    check(
        (t1 - 0.25).abs() <= 1e-8,
        format!("trust-funds event at {t1}"),
    )?;

    let tanh = problem("tanh-two-surface");
    let traj = solve(&tanh, &select_zero(1), &ctl).map_err(|e| e.to_string())?;
    let ev = traj.events();
    check(ev.len() == 2, "tanh: expected two events")?;
    let second = 0.6 + 0.1 * (-0.5f64).tanh();
    check(
        (ev[0].t - 0.25).abs() <= 1e-8,
        format!("tanh first event at {}", ev[0].t),
    )?;
    check(
        (ev[1].t - second).abs() <= 1e-7,
        format!("tanh second event at {}", ev[1].t),
    )?;

    let lf = problem("linear-fixed");
    let sel = Strategy::Center
        .selection(&lf, 0, &(vec![], vec![]))
        .map_err(|e| e.to_string())?;
    let traj = solve(&lf, &sel, &ctl).map_err(|e| e.to_string())?;
    let want = (-1.0f64).exp() + (-0.5f64).exp();
    let got = traj.endpoint()[0];
    check(
        (got - want).abs() <= 1e-8,
        format!("linear-fixed y(1) = {got} vs {want}"),
    )?;
    Ok(format!(
        "t = {t1:.10}; t1 = {:.10}, t2 = {:.10}; y(1) error {:.1e}",
        ev[0].t,
        ev[1].t,
        (got - want).abs()
    ))
}

fn crossing_manifests() -> Result<Vec<String>, String> {
    let ctl = StepControl::default();
    ["trust-funds", "fixed-time-m3"]
        .iter()
        .map(|name| {
            let p = problem(name);
            let s = sample_funnel(&p, &[Strategy::BangBang { switches: 3 }], 100, 2024, &ctl)
                .map_err(|e| format!("{name}: {e}"))?;
            serde_json::to_string(&s.manifest()).map_err(|e| e.to_string())
        })
        .collect()
}

fn criterion_3() -> Outcome {
    let ctl = StepControl::default();
    let mut detail = Vec::new();
    for name in ["trust-funds", "fixed-time-m3"] {
        let p = problem(name);
        let m = p.surface_count();
        let mut revisits = 0;
        for i in 0..100u64 {
            let strategy = Strategy::BangBang { switches: 3 };
            let sel = strategy
                .selection(&p, derive_seed(2024, i), &(vec![], vec![]))
                .map_err(|e| e.to_string())?;
            match solve(&p, &sel, &ctl) {
                Ok(traj) => {
                    let ev = traj.events();
                    let surfaces: Vec<usize> = ev.iter().map(|e| e.surface).collect();
                    check(
                        surfaces == (0..m).collect::<Vec<_>>(),
                        format!("{name} sample {i}: surfaces fired {surfaces:?}"),
                    )?;
                    check(
                        ev.windows(2).all(|w| w[0].t < w[1].t),
                        format!("{name} sample {i}: times not ascending"),
                    )?;
                }
                Err(pulse::Error::SurfaceRevisit { .. }) => revisits += 1,
                Err(e) => return Err(format!("{name} sample {i}: {e}")),
            }
        }
        check(
            revisits == 0,
            format!("{name}: {revisits} surface revisits"),
        )?;
        detail.push(format!("{name}: 100/100 with {m} ordered crossing(s)"));
    }
    Ok(detail.join("; "))
}

fn criterion_4() -> Outcome {
    let ctl = StepControl::default();
    let mut worst = f64::INFINITY;
    for name in NAMES {
        let p = problem(name);
        let k_bar = gronwall_bounds(&p).map_err(|e| e.to_string())?.k_bar;
        let s = sample_funnel(&p, &[Strategy::BangBang { switches: 3 }], 100, 99, &ctl)
            .map_err(|e| format!("{name}: {e}"))?;
        let sup = s.members().iter().map(|t| t.sup_norm()).fold(0.0, f64::max);
        check(
            sup <= k_bar + 1e-6,
            format!("{name}: sup |y| = {sup} > K_bar = {k_bar}"),
        )?;
        worst = worst.min((k_bar - sup) / k_bar);
    }
    Ok(format!(
        "all {} problems inside their envelopes (smallest relative gap {worst:.3})",
        NAMES.len()
    ))
}

fn criterion_5() -> Outcome {
    let p = problem("trust-funds");
    let p_hat = check_transversality(
        &p,
        SamplingGrid {
            t_points: 2,
            y_points: 64,
        },
    )
    .map_err(|e| e.to_string())?
    .margin;
    let s = sample_funnel(
        &p,
        &[Strategy::BangBang { switches: 3 }],
        50,
        5,
        &StepControl::default(),
    )
    .map_err(|e| e.to_string())?;
    let mut max_slope = f64::NEG_INFINITY;
    for (i, traj) in s.members().iter().enumerate() {
        let r = post_jump_monotonicity(traj, &p, p_hat).map_err(|e| e.to_string())?;
        check(r.samples > 0, format!("sample {i}: no post-jump slopes"))?;
        check(
            r.pass,
            format!("sample {i}: slope {} > {}", r.max_slope, r.bound),
        )?;
        max_slope = max_slope.max(r.max_slope);
    }
    Ok(format!(
        "max slope {max_slope:.4} <= -p_hat/2 = {:.4}",
        -0.5 * p_hat
    ))
}

fn criterion_6() -> Outcome {
    let p = problem("trust-funds");
    let ctl = StepControl::default();
    let s = sample_funnel(&p, &[Strategy::BangBang { switches: 3 }], 20, 7, &ctl)
        .map_err(|e| e.to_string())?;
    let coarse = contractibility_probe(&p, 16, &s, 64, false, &ctl).map_err(|e| e.to_string())?;
    let fine = contractibility_probe(&p, 16, &s, 256, false, &ctl).map_err(|e| e.to_string())?;
    check(
        coarse.start_identity <= 1e-9,
        format!("start identity {}", coarse.start_identity),
    )?;
    check(
        coarse.endpoint_identity <= 1e-6,
        format!("endpoint identity {}", coarse.endpoint_identity),
    )?;
    let ratio = coarse.continuity_modulus / fine.continuity_modulus;
    check(ratio >= 2.0, format!("modulus ratio {ratio}"))?;
    Ok(format!(
        "start {:.1e}, endpoint {:.1e}, modulus {:.3} -> {:.3} (x{ratio:.2}); at r = 1/2: {:.4} -> {:.4}",
        coarse.start_identity,
        coarse.endpoint_identity,
        coarse.continuity_modulus,
        fine.continuity_modulus,
        coarse.increment_at_half,
        fine.increment_at_half
    ))
}

fn non_increasing(seq: &[f64], slack: f64) -> bool {
    seq.windows(2).all(|w| w[1] <= (1.0 + slack) * w[0])
}

fn cascade_manifests() -> Result<(pulse::funnel::CascadeReport, Vec<String>), String> {
    let p = problem("trust-funds");
    let c = approximation_cascade(
        &p,
        &[4, 8, 16, 32],
        CascadeConfig::default(),
        &StepControl::default(),
    )
    .map_err(|e| e.to_string())?;
    let manifests = c
        .samples
        .iter()
        .map(|s| serde_json::to_string(&s.manifest()).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((c.report, manifests))
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let (report, _) = pool(1).install(cascade_manifests)?;
    let elapsed = start.elapsed();
    check(
        non_increasing(&report.distances_to_finest, 0.1),
        format!("distances {:?}", report.distances_to_finest),
    )?;
    check(
        non_increasing(&report.kcenter_radii, 0.1),
        format!("radii {:?}", report.kcenter_radii),
    )?;
    check(
        elapsed < Duration::from_secs(120),
        format!("took {elapsed:?}"),
    )?;
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.2}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    Ok(format!(
        "distances [{}], k-center radii [{}], {elapsed:.2?} on one thread",
        fmt(&report.distances_to_finest),
        fmt(&report.kcenter_radii)
    ))
}

fn draw(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.random_range(-2.0..2.0)).collect()
}

fn random_element(rng: &mut ChaCha8Rng, dim: usize, m: usize) -> JumpFunction {
    let nodes = rng.random_range(2..20usize);
    let mut grid: Vec<f64> = (0..nodes - 2).map(|_| rng.random_range(0.0..1.0)).collect();
    grid.extend([0.0, 1.0]);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let n = grid.len();
    let values = draw(rng, n * dim);
    let s0 = draw(rng, (n - 1) * dim);
    let s1 = draw(rng, (n - 1) * dim);
    let phi = HermitePath::new(dim, grid, values, s0, s1).unwrap();
    let mut times: Vec<f64> = Vec::new();
    while times.len() < m {
        let t = rng.random_range(0.0..1.0);
        if times.iter().all(|&s| (s - t).abs() > 1e-6) {
            times.push(t);
        }
    }
    let jumps = times
        .into_iter()
        .map(|l| Jump::new(l, draw(rng, dim)))
        .collect();
    JumpFunction::new(1.0, phi, jumps).unwrap()
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_triangle = f64::NEG_INFINITY;
    let mut worst_roundtrip: f64 = 0.0;
    for trial in 0..1000 {
        let dim = rng.random_range(1..4usize);
        let m = rng.random_range(0..4usize);
        let f = random_element(&mut rng, dim, m);
        let g = random_element(&mut rng, dim, m);
        let h = random_element(&mut rng, dim, m);
        let nf = f.norm();
        check(
            nf > 0.0,
            format!("trial {trial}: non-zero element with zero norm"),
        )?;
        let zero = JumpFunction::zero(1.0, dim, 0).unwrap();
        check(zero.norm() == 0.0, "zero element has non-zero norm")?;
        let c: f64 = rng.random_range(0.0..1.0);
        let scaled = f.scaled(c).map_err(|e| e.to_string())?;
        check(
            (scaled.norm() - c * nf).abs() <= 1e-12 * nf.max(1.0),
            format!("trial {trial}: homogeneity {} vs {}", scaled.norm(), c * nf),
        )?;
        let (fg, gh, fh) = (
            f.distance(&g).unwrap(),
            g.distance(&h).unwrap(),
            f.distance(&h).unwrap(),
        );
        worst_triangle = worst_triangle.max(fh - fg - gh);
        check(
            fh <= fg + gh + 1e-12,
            format!("trial {trial}: triangle {fh} > {fg} + {gh}"),
        )?;
        check(
            f.distance(&f).unwrap() == 0.0,
            format!("trial {trial}: d(f, f) != 0"),
        )?;
        let shuffled: Vec<usize> = (0..m).rev().collect();
        let permuted = f.with_jump_order(&shuffled).unwrap();
        check(
            (permuted.norm() - nf).abs() <= 1e-12 * nf.max(1.0),
            format!("trial {trial}: norm depends on record order"),
        )?;
        check(
            permuted.distance(&f).unwrap() <= 1e-12
                && (permuted.distance(&g).unwrap() - fg).abs() <= 1e-12 * fg.max(1.0),
            format!("trial {trial}: distance depends on record order"),
        )?;

        let traj = reconstruct(&f).map_err(|e| e.to_string())?;
        let back = reduce(&traj).map_err(|e| e.to_string())?;
        let d = back.distance(&f).unwrap();
        worst_roundtrip = worst_roundtrip.max(d);
        check(
            d <= 1e-12,
            format!("trial {trial}: reduce after reconstruct moved by {d}"),
        )?;
        for k in 0..=20 {
            let s = k as f64 / 20.0;
            if f.jumps().iter().any(|j| j.l == s) {
                continue;
            }
            let a = f.eval_hat(s).unwrap();
            let b = traj.eval(s).unwrap();
            let err = a
                .iter()
                .zip(&b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            check(
                err <= 1e-12,
                format!("trial {trial}: eval_hat vs raw at {s}: {err}"),
            )?;
        }
    }
    Ok(format!(
        "1000 triples; worst triangle excess {worst_triangle:.1e}, worst round trip {worst_roundtrip:.1e}"
    ))
}

fn criterion_9() -> Outcome {
    let one = pool(1).install(crossing_manifests)?;
    let four = pool(4).install(crossing_manifests)?;
    check(
        one == four,
        "crossing manifests differ between 1 and 4 workers",
    )?;
    let (_, c1) = pool(1).install(cascade_manifests)?;
    let (_, c4) = pool(4).install(cascade_manifests)?;
    check(c1 == c4, "cascade manifests differ between 1 and 4 workers")?;
    let bytes: usize = one.iter().chain(&c1).map(String::len).sum();
    Ok(format!(
        "{} manifests, {bytes} bytes, identical on 1 and 4 workers",
        one.len() + c1.len()
    ))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("trust-funds transversality margin", criterion_1),
        ("closed-form jump times", criterion_2),
        ("exactly-once ordered crossings", criterion_3),
        ("a-priori Gronwall envelope", criterion_4),
        ("post-jump monotone w", criterion_5),
        ("homotopy contraction probe", criterion_6),
        ("cascade trend", criterion_7),
        ("space axioms", criterion_8),
        ("determinism across worker counts", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] criterion {} ({name}): {detail} [{secs:.1}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] criterion {} ({name}): {why} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

//! Event-driven integration of `y' = g(t, y)` with state-dependent impulses.
//!
//! Steps use the Dormand–Prince 5(4) pair with cubic Hermite dense output
//! built from the step's end states and slopes; the stored path is exactly
//! that interpolant, so event location and later evaluation agree.
//!
//! Each surface is armed until it fires. Within an accepted step the
//! detection function `w_j(t) = tau_j(y(t)) - t` is probed at both ends and at
//! eight interior points; the first probe interval where `w_j` drops to
//! `<= 0` is refined by [`locate_crossing`]. A fired surface whose `w` rises
//! above a small threshold and later returns to `<= 0` raises
//! [`Error::SurfaceRevisit`].

use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::fields::Selection;
use crate::jumpspace::{JumpEvent, SolveStats, TracePanel, Trajectory};
use crate::linalg;
use crate::problem::InclusionProblem;
use crate::spline::HermitePath;

/// Step-size and tolerance settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepControl {
    pub h0: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Width of the final event bracket.
    pub event_tol: f64,
    pub max_steps: usize,
    /// Check every node's selection value against the field.
    pub audit: bool,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            h0: 1e-3,
            h_min: 1e-12,
            h_max: 0.01,
            rtol: 1e-10,
            atol: 1e-12,
            event_tol: 1e-10,
            max_steps: 200_000,
            audit: true,
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.h_min && self.h_min <= self.h0 && self.h0 <= self.h_max) {
            return Err(contract("step sizes need 0 < h_min <= h0 <= h_max"));
        }
        if !(self.rtol > 0.0 && self.atol > 0.0 && self.event_tol > 0.0) {
            return Err(contract("tolerances must be positive"));
        }
        if self.max_steps == 0 {
            return Err(contract("max_steps must be positive"));
        }
        Ok(())
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [&[f64]; 7] = [
    &[],
    &[0.2],
    &[3.0 / 40.0, 9.0 / 40.0],
    &[44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0],
    &[
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
    ],
    &[
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
    ],
    &[
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Fifth-order minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Number of interior dense-output probes per step.
const PROBES: usize = 8;

/// Finds `t*` in `[lo, hi]` with `w(t*) ~ 0` given `w(lo) > 0 >= w(hi)`
/// (Brent's method; the final bracket is narrower than `tol`).
pub fn locate_crossing(w: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (w(a), w(b));
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa > 0.0 && fb < 0.0) {
        return Err(contract(format!(
            "no sign change on [{lo}, {hi}]: w = {fa}, {fb}"
        )));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let m = 0.5 * (c - b);
        if m.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol1 * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = d;
            }
        } else {
            d = m;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(m) };
        fb = w(b);
    }
    Ok(b)
}

/// Nodes, values and per-segment slopes of the piece under construction.
struct PieceBuf {
    dim: usize,
    grid: Vec<f64>,
    values: Vec<f64>,
    s0: Vec<f64>,
    s1: Vec<f64>,
}

impl PieceBuf {
    fn start(t: f64, y: &[f64]) -> Self {
        Self {
            dim: y.len(),
            grid: vec![t],
            values: y.to_vec(),
            s0: Vec::new(),
            s1: Vec::new(),
        }
    }

    fn from_path(p: &HermitePath) -> Self {
        let (s0, s1) = p.slopes_flat();
        Self {
            dim: p.dim(),
            grid: p.grid().to_vec(),
            values: p.values_flat().to_vec(),
            s0: s0.to_vec(),
            s1: s1.to_vec(),
        }
    }

    fn push(&mut self, t: f64, y: &[f64], slope_start: &[f64], slope_end: &[f64]) {
        self.grid.push(t);
        self.values.extend_from_slice(y);
        self.s0.extend_from_slice(slope_start);
        self.s1.extend_from_slice(slope_end);
    }

    fn finish(self) -> Result<HermitePath> {
        HermitePath::new(self.dim, self.grid, self.values, self.s0, self.s1)
    }
}

/// One accepted Runge–Kutta step with its Hermite interpolant.
struct Step {
    t0: f64,
    t1: f64,
    y0: Vec<f64>,
    y1: Vec<f64>,
    k0: Vec<f64>,
    k1: Vec<f64>,
}

impl Step {
    fn dense(&self, t: f64) -> Vec<f64> {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s),
            s * (1.0 - s) * (1.0 - s),
            s * s * (3.0 - 2.0 * s),
            s * s * (s - 1.0),
        );
        (0..self.y0.len())
            .map(|i| {
                h00 * self.y0[i] + h * h10 * self.k0[i] + h01 * self.y1[i] + h * h11 * self.k1[i]
            })
            .collect()
    }

    fn dense_slope(&self, t: f64) -> Vec<f64> {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let (d00, d10, d01, d11) = (
            6.0 * s * (s - 1.0) / h,
            (1.0 - s) * (1.0 - 3.0 * s),
            -6.0 * s * (s - 1.0) / h,
            s * (3.0 * s - 2.0),
        );
        (0..self.y0.len())
            .map(|i| d00 * self.y0[i] + d10 * self.k0[i] + d01 * self.y1[i] + d11 * self.k1[i])
            .collect()
    }
}

/// Integration state carried across steps and events.
struct Run<'a> {
    p: &'a InclusionProblem,
    sel: &'a Selection,
    ctl: StepControl,
    pieces: Vec<HermitePath>,
    events: Vec<JumpEvent>,
    trace: Vec<TracePanel>,
    buf: PieceBuf,
    fired: Vec<bool>,
    risen: Vec<bool>,
    stats: SolveStats,
}

impl<'a> Run<'a> {
    fn f(&self, piece: usize, t: f64, y: &[f64]) -> Result<Vec<f64>> {
        let v = self.sel.eval_on(piece, t, y)?;
        if v.len() != y.len() || v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Integration {
                t,
                reason: "selection returned a non-finite or misshaped value".into(),
            });
        }
        if self.ctl.audit {
            self.sel.audit(&self.p.field, t, y, &v)?;
        }
        Ok(v)
    }

    fn w(&self, j: usize, t: f64, y: &[f64]) -> f64 {
        self.p.surfaces[j].tau(y) - t
    }

    fn revisit_threshold(&self) -> f64 {
        (100.0 * self.ctl.event_tol).max(1e-8)
    }

    /// Fires armed surfaces with `w <= 0` at `(t, y)`; returns the post state.
    fn fire_pending(&mut self, t: f64, y: Vec<f64>) -> Result<Vec<f64>> {
        let due: Vec<usize> = (0..self.p.surface_count())
            .filter(|&j| !self.fired[j] && self.w(j, t, &y) <= 0.0)
            .collect();
        match due.as_slice() {
            [] => Ok(y),
            [j] => {
                if let Some(prev) = self.events.last().filter(|e| e.t == t) {
                    return Err(Error::Hypothesis(format!(
                        "surfaces {} and {j} fire simultaneously at t = {t}",
                        prev.surface
                    )));
                }
                self.fire(*j, t, y)
            }
            [first, second, ..] => Err(Error::Hypothesis(format!(
                "surfaces {first} and {second} fire simultaneously at t = {t}"
            ))),
        }
    }

    /// Closes the current piece at `t` and applies surface `j`'s impulse.
    fn fire(&mut self, j: usize, t: f64, pre: Vec<f64>) -> Result<Vec<f64>> {
        let post = linalg::add(&pre, &self.p.surfaces[j].impulse(&pre));
        if post.iter().any(|x| !x.is_finite()) {
            return Err(Error::Integration {
                t,
                reason: format!("impulse {j} is not finite"),
            });
        }
        let buf = std::mem::replace(&mut self.buf, PieceBuf::start(t, &post));
        self.pieces.push(buf.finish()?);
        self.events.push(JumpEvent {
            surface: j,
            t,
            pre,
            post: post.clone(),
        });
        self.fired[j] = true;
        Ok(post)
    }

    fn rk_step(
        &mut self,
        piece: usize,
        t: f64,
        y: &[f64],
        k0: &[f64],
        h: f64,
    ) -> Result<(Vec<f64>, Vec<f64>, f64)> {
        let n = y.len();
        let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
        k.push(k0.to_vec());
        let mut stage = vec![0.0; n];
        for s in 1..7 {
            stage.copy_from_slice(y);
            for (i, &a) in A[s].iter().enumerate() {
                if a != 0.0 {
                    linalg::axpy(h * a, &k[i], &mut stage);
                }
            }
            k.push(self.sel.eval_on(piece, t + C[s] * h, &stage)?);
            if k[s].iter().any(|x| !x.is_finite()) {
                return Err(Error::Integration {
                    t,
                    reason: "non-finite stage value".into(),
                });
            }
        }
        // The seventh stage is evaluated at the fifth-order solution.
        let y1 = stage;
        let mut err = 0.0;
        for i in 0..n {
            let e: f64 = (0..7).map(|s| E[s] * k[s][i]).sum::<f64>() * h;
            let sc = self.ctl.atol + self.ctl.rtol * y[i].abs().max(y1[i].abs());
            err += (e / sc) * (e / sc);
        }
        Ok((y1, k.pop().unwrap(), (err / n as f64).sqrt()))
    }

    /// First probe interval where armed surface `j` drops to `<= 0`.
    fn crossing(&self, j: usize, probes: &[(f64, Vec<f64>)]) -> Option<(f64, f64)> {
        let mut prev: Option<(f64, f64)> = None;
        for (t, y) in probes {
            let w = self.w(j, *t, y);
            if let Some((tp, wp)) = prev {
                if wp > 0.0 && w <= 0.0 {
                    return Some((tp, *t));
                }
            }
            prev = Some((*t, w));
        }
        None
    }

    /// Updates revisit flags of fired surfaces over the probes.
    fn watch_fired(&mut self, probes: &[(f64, Vec<f64>)]) -> Result<()> {
        let threshold = self.revisit_threshold();
        for j in 0..self.p.surface_count() {
            if !self.fired[j] {
                continue;
            }
            for (t, y) in probes {
                let w = self.w(j, *t, y);
                if w > threshold {
                    self.risen[j] = true;
                } else if self.risen[j] && w <= 0.0 {
                    return Err(Error::SurfaceRevisit { surface: j, t: *t });
                }
            }
        }
        Ok(())
    }

    fn panel(&self, piece: usize, step: &Step, end_t: f64, end_y: &[f64]) -> Result<TracePanel> {
        let tm = 0.5 * (step.t0 + end_t);
        let mid = self.f(piece, tm, &step.dense(tm))?;
        let end = if end_t == step.t1 {
            step.k1.clone()
        } else {
            self.f(piece, end_t, end_y)?
        };
        Ok(TracePanel {
            t0: step.t0,
            t1: end_t,
            start: step.k0.clone(),
            mid,
            end,
        })
    }

    fn run(mut self, mut t: f64, mut y: Vec<f64>) -> Result<Trajectory> {
        let a = self.p.horizon;
        let ctl = self.ctl;
        let snap = |t: f64| 1e-13 * t.abs().max(1.0);
        y = self.fire_pending(t, y)?;
        let mut h = ctl.h0;
        let mut steps = 0usize;
        let mut k0: Option<(usize, Vec<f64>)> = None;
        while t < a && !self.events.last().is_some_and(|e| e.t >= a) {
            let bps = self.sel.breakpoints();
            let piece = bps.partition_point(|&b| b <= t + snap(t));
            let stop = bps.get(piece).copied().filter(|&b| b < a).unwrap_or(a);
            let slope = match k0.take() {
                Some((pc, k)) if pc == piece => k,
                _ => self.f(piece, t, &y)?,
            };
            let mut hstep = h.min(ctl.h_max);
            let mut landing = false;
            if t + hstep >= stop - snap(stop) {
                hstep = stop - t;
                landing = true;
            }
            loop {
                steps += 1;
                if steps > ctl.max_steps {
                    return Err(Error::Integration {
                        t,
                        reason: "step budget exhausted".into(),
                    });
                }
                let (y1, k1, err) = self.rk_step(piece, t, &y, &slope, hstep)?;
                if !(err <= 1.0) {
                    self.stats.rejected += 1;
                    let factor = if err.is_finite() {
                        (0.9 * err.powf(-0.2)).max(0.2)
                    } else {
                        0.2
                    };
                    hstep *= factor;
                    landing = false;
                    if hstep < ctl.h_min {
                        return Err(Error::Integration {
                            t,
                            reason: "step size underflow".into(),
                        });
                    }
                    continue;
                }
                let t1 = if landing { stop } else { t + hstep };
                if ctl.audit {
                    self.sel.audit(&self.p.field, t1, &y1, &k1)?;
                }
                let step = Step {
                    t0: t,
                    t1,
                    y0: y.clone(),
                    y1,
                    k0: slope.clone(),
                    k1,
                };
                let probes: Vec<(f64, Vec<f64>)> = (0..=PROBES + 1)
                    .map(|i| {
                        if i == 0 {
                            (t, step.y0.clone())
                        } else if i == PROBES + 1 {
                            (t1, step.y1.clone())
                        } else {
                            let ti = t + (t1 - t) * i as f64 / (PROBES + 1) as f64;
                            (ti, step.dense(ti))
                        }
                    })
                    .collect();
                let crossings: Vec<(usize, (f64, f64))> = (0..self.p.surface_count())
                    .filter(|&j| !self.fired[j])
                    .filter_map(|j| self.crossing(j, &probes).map(|c| (j, c)))
                    .collect();
                if crossings.len() > 1 && hstep > 2.0 * ctl.h_min {
                    hstep *= 0.5;
                    landing = false;
                    continue;
                }
                self.stats.accepted += 1;
                h = hstep * (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 5.0);
                if let Some(&(j, (lo, hi))) = crossings.first() {
                    let t_star =
                        locate_crossing(|s| self.w(j, s, &step.dense(s)), lo, hi, ctl.event_tol)?;
                    let pre = if t_star == t1 {
                        step.y1.clone()
                    } else {
                        step.dense(t_star)
                    };
                    let cut: Vec<(f64, Vec<f64>)> =
                        probes.into_iter().filter(|(s, _)| *s <= t_star).collect();
                    self.watch_fired(&cut)?;
                    if t_star > t {
                        let end_slope = if t_star == t1 {
                            step.k1.clone()
                        } else {
                            step.dense_slope(t_star)
                        };
                        self.buf.push(t_star, &pre, &step.k0, &end_slope);
                        let panel = self.panel(piece, &step, t_star, &pre)?;
                        self.trace.push(panel);
                    }
                    t = t_star;
                    y = self.fire(j, t_star, pre)?;
                    y = self.fire_pending(t, y)?;
                } else {
                    self.watch_fired(&probes)?;
                    self.buf.push(t1, &step.y1, &step.k0, &step.k1);
                    let panel = self.panel(piece, &step, t1, &step.y1)?;
                    self.trace.push(panel);
                    t = t1;
                    y = step.y1.clone();
                    k0 = Some((piece, step.k1));
                }
                break;
            }
        }
        let mut pieces = self.pieces;
        if !self.events.last().is_some_and(|e| e.t >= a) {
            pieces.push(self.buf.finish()?);
        }
        let mut traj = Trajectory::new(a, self.p.surface_count(), pieces, self.events, self.trace)?;
        traj.stats = self.stats;
        Ok(traj)
    }
}

fn check_inputs(p: &InclusionProblem, sel: &Selection, ctl: &StepControl) -> Result<()> {
    ctl.validate()?;
    let probe = sel.eval(0.0, &p.y0)?;
    if probe.len() != p.dim() {
        return Err(contract("selection dimension does not match the problem"));
    }
    Ok(())
}

/// Solves the problem from `y0` under `sel`.
pub fn solve(p: &InclusionProblem, sel: &Selection, ctl: &StepControl) -> Result<Trajectory> {
    check_inputs(p, sel, ctl)?;
    let run = Run {
        p,
        sel,
        ctl: *ctl,
        pieces: Vec::new(),
        events: Vec::new(),
        trace: Vec::new(),
        buf: PieceBuf::start(0.0, &p.y0),
        fired: vec![false; p.surface_count()],
        risen: vec![false; p.surface_count()],
        stats: SolveStats::default(),
    };
    run.run(0.0, p.y0.clone())
}

/// Copies `prior` on `[0, s]` (its events before `s` count as fired) and
/// continues from `(s, prior(s))` under `sel`.
pub fn solve_from(
    p: &InclusionProblem,
    sel: &Selection,
    ctl: &StepControl,
    prior: &Trajectory,
    s: f64,
) -> Result<Trajectory> {
    ctl.validate()?;
    if prior.selection_trace().is_empty() {
        return Err(contract("trajectory carries no selection trace"));
    }
    if prior.dim() != p.dim()
        || prior.surface_count() != p.surface_count()
        || prior.horizon() != p.horizon
    {
        return Err(contract("trajectory does not belong to this problem"));
    }
    if !(0.0..=p.horizon).contains(&s) {
        return Err(contract(format!(
            "switch time {s} outside [0, {}]",
            p.horizon
        )));
    }
    let (mut pieces, events, trace) = prior.prefix(s)?;
    let current = pieces.pop().expect("prefix keeps the current piece");
    let y = current.node_value(current.node_count() - 1).to_vec();
    let mut fired = vec![false; p.surface_count()];
    for e in &events {
        fired[e.surface] = true;
    }
    let run = Run {
        p,
        sel,
        ctl: *ctl,
        pieces,
        events,
        trace,
        buf: PieceBuf::from_path(&current),
        fired,
        risen: vec![false; p.surface_count()],
        stats: SolveStats::default(),
    };
    run.run(s, y)
}

/// Slopes of `w_j` after surface `j` fired.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub pass: bool,
    /// Largest finite-difference slope of any `w_j` after its jump.
    pub max_slope: f64,
    /// Required upper bound `-p_hat / 2`.
    pub bound: f64,
    pub samples: usize,
}

/// Finite-difference slopes of `w_j(t)` on every piece after surface `j`
/// fired, each segment split into four; pass iff all are `<= -p_hat / 2`.
pub fn post_jump_monotonicity(
    traj: &Trajectory,
    p: &InclusionProblem,
    p_hat: f64,
) -> Result<MonotonicityReport> {
    let mut max_slope = f64::NEG_INFINITY;
    let mut samples = 0;
    for (k, e) in traj.events().iter().enumerate() {
        let surface = &p.surfaces[e.surface];
        for piece in &traj.pieces()[k + 1..] {
            let grid = piece.grid();
            for seg in grid.windows(2) {
                let (t0, t1) = (seg[0], seg[1]);
                if t1 - t0 < 1e-9 {
                    continue;
                }
                let mut prev: Option<(f64, f64)> = None;
                for i in 0..=4 {
                    let t = t0 + (t1 - t0) * i as f64 / 4.0;
                    let w = surface.tau(&piece.eval(t)?) - t;
                    if let Some((tp, wp)) = prev {
                        max_slope = max_slope.max((w - wp) / (t - tp));
                        samples += 1;
                    }
                    prev = Some((t, w));
                }
            }
        }
    }
    let bound = -0.5 * p_hat;
    Ok(MonotonicityReport {
        pass: max_slope <= bound,
        max_slope,
        bound,
        samples,
    })
}

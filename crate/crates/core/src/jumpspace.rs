//! Jump functions: a continuous part on `[0, a]` plus `m` (time, jump) records.
//!
//! A [`JumpFunction`] is the flat encoding of a function with `m` jumps: the
//! continuous part carries the shape, the records say when and by how much the
//! function jumps. [`JumpFunction::eval_hat`] turns the encoding back into the
//! left-continuous function, and [`reduce`] goes the other way for a solved
//! [`Trajectory`].
//!
//! The norm is the sup norm of the continuous part plus `|l_j| + |v_j|` over
//! the records; distances pad the shorter record list with `(a, 0)` so that a
//! missing jump counts as a jump at the horizon.

use serde::{Deserialize, Serialize};

use crate::error::{contract, domain, Error, Result};
use crate::linalg;
use crate::spline::HermitePath;

/// One jump record `(l, v)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub l: f64,
    pub v: Vec<f64>,
}

impl Jump {
    pub fn new(l: f64, v: Vec<f64>) -> Self {
        Self { l, v }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "JumpFunctionJson", into = "JumpFunctionJson")]
pub struct JumpFunction {
    horizon: f64,
    phi: HermitePath,
    jumps: Vec<Jump>,
}

impl JumpFunction {
    pub fn new(horizon: f64, phi: HermitePath, jumps: Vec<Jump>) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(contract(format!("horizon must be positive, got {horizon}")));
        }
        if phi.start() != 0.0 || phi.end() != horizon {
            return Err(contract(format!(
                "continuous part spans [{}, {}], expected [0, {horizon}]",
                phi.start(),
                phi.end()
            )));
        }
        for (j, jump) in jumps.iter().enumerate() {
            if !(jump.l >= 0.0 && jump.l <= horizon) {
                return Err(contract(format!(
                    "jump {j} at {} outside [0, {horizon}]",
                    jump.l
                )));
            }
            if jump.v.len() != phi.dim() {
                return Err(contract(format!("jump {j} has dimension {}", jump.v.len())));
            }
            if jump.v.iter().any(|x| !x.is_finite()) {
                return Err(contract(format!("jump {j} is not finite")));
            }
        }
        Ok(Self {
            horizon,
            phi,
            jumps,
        })
    }

    /// Builds the element from nodal samples of the continuous part; slopes
    /// are estimated from the samples.
    pub fn from_samples(
        horizon: f64,
        grid: Vec<f64>,
        values: Vec<Vec<f64>>,
        jumps: Vec<Jump>,
    ) -> Result<Self> {
        let dim = values.first().map_or(0, Vec::len);
        if values.iter().any(|v| v.len() != dim) {
            return Err(contract("ragged value array"));
        }
        let phi = HermitePath::from_samples(dim, grid, values.concat())?;
        Self::new(horizon, phi, jumps)
    }

    /// The zero element with `m` records `(0, 0)`.
    pub fn zero(horizon: f64, dim: usize, m: usize) -> Result<Self> {
        let phi = HermitePath::constant(0.0, horizon, &vec![0.0; dim])?;
        Self::new(horizon, phi, vec![Jump::new(0.0, vec![0.0; dim]); m])
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.phi.dim()
    }

    pub fn jump_count(&self) -> usize {
        self.jumps.len()
    }

    pub fn continuous_part(&self) -> &HermitePath {
        &self.phi
    }

    pub fn jumps(&self) -> &[Jump] {
        &self.jumps
    }

    /// Sup norm of the continuous part plus the sum of `|l_j| + |v_j|`.
    pub fn norm(&self) -> f64 {
        self.phi.sup_norm() + records_norm(self.jumps.iter().map(|j| (j.l, j.v.as_slice())))
    }

    /// `norm(self - other)`, with jump lists sorted by time and the shorter
    /// one padded by `(a, 0)`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        if self.horizon != other.horizon {
            return Err(contract(format!(
                "horizon mismatch: {} vs {}",
                self.horizon, other.horizon
            )));
        }
        if self.dim() != other.dim() {
            return Err(contract(format!(
                "dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        let diff = HermitePath::lin_comb(1.0, &self.phi, -1.0, &other.phi)?;
        let a = self.sorted_jumps();
        let b = other.sorted_jumps();
        let m = a.len().max(b.len());
        let zero = vec![0.0; self.dim()];
        let pad = |list: &[&Jump], i: usize| -> (f64, Vec<f64>) {
            match list.get(i) {
                Some(j) => (j.l, j.v.clone()),
                None => (self.horizon, zero.clone()),
            }
        };
        let mut records = 0.0;
        for i in 0..m {
            let (la, va) = pad(&a, i);
            let (lb, vb) = pad(&b, i);
            records += (la - lb).abs() + linalg::distance(&va, &vb);
        }
        Ok(diff.sup_norm() + records)
    }

    /// Jump records ordered by time (the permutation that sorts them).
    pub fn sorted_jumps(&self) -> Vec<&Jump> {
        let mut sorted: Vec<&Jump> = self.jumps.iter().collect();
        sorted.sort_by(|a, b| a.l.total_cmp(&b.l));
        sorted
    }

    /// Value of the reconstructed function at `t`: the continuous part plus
    /// every jump with `l < t` (a jump at exactly `t` is not yet applied).
    pub fn eval_hat(&self, t: f64) -> Result<Vec<f64>> {
        if !(t >= 0.0 && t <= self.horizon) {
            return Err(domain(format!("t = {t} outside [0, {}]", self.horizon)));
        }
        let mut y = self.phi.eval(t)?;
        for jump in self.sorted_jumps().into_iter().take_while(|j| j.l < t) {
            linalg::axpy(1.0, &jump.v, &mut y);
        }
        Ok(y)
    }

    /// `c * self` applied to the continuous part, times and jump vectors.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let jumps = self
            .jumps
            .iter()
            .map(|j| Jump::new(c * j.l, linalg::scale(c, &j.v)))
            .collect();
        Self::new(self.horizon, self.phi.scaled(c), jumps)
    }

    /// Appends `(a, 0)` records until there are `m` of them.
    pub fn padded_to(mut self, m: usize) -> Self {
        let dim = self.dim();
        while self.jumps.len() < m {
            self.jumps.push(Jump::new(self.horizon, vec![0.0; dim]));
        }
        self
    }

    /// Copy of this element with records listed in a different order.
    pub fn with_jump_order(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.jumps.len() {
            return Err(contract("permutation length does not match jump count"));
        }
        let jumps = order
            .iter()
            .map(|&i| {
                self.jumps
                    .get(i)
                    .cloned()
                    .ok_or_else(|| contract("permutation index out of range"))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.horizon, self.phi.clone(), jumps)
    }
}

fn records_norm<'a>(records: impl Iterator<Item = (f64, &'a [f64])>) -> f64 {
    records.map(|(l, v)| l.abs() + linalg::norm(v)).sum()
}

/// One impulse applied along a trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    /// Zero-based surface index.
    pub surface: usize,
    pub t: f64,
    pub pre: Vec<f64>,
    pub post: Vec<f64>,
}

/// Selection values recorded over one accepted integration step: at its
/// start, midpoint and end (a Simpson panel).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePanel {
    pub t0: f64,
    pub t1: f64,
    pub start: Vec<f64>,
    pub mid: Vec<f64>,
    pub end: Vec<f64>,
}

impl TracePanel {
    /// Simpson estimate of the integral of the selection over the panel, or
    /// over `[t0, upto]` when `upto` cuts the panel (linear shape there).
    pub fn integral(&self, upto: f64) -> Vec<f64> {
        let h = self.t1 - self.t0;
        if upto >= self.t1 {
            return (0..self.start.len())
                .map(|i| h / 6.0 * (self.start[i] + 4.0 * self.mid[i] + self.end[i]))
                .collect();
        }
        let s = ((upto - self.t0) / h).clamp(0.0, 1.0);
        // Integrate the quadratic through the three samples from 0 to s.
        (0..self.start.len())
            .map(|i| {
                let (f0, fm, f1) = (self.start[i], self.mid[i], self.end[i]);
                let b = -3.0 * f0 + 4.0 * fm - f1;
                let c = 2.0 * f0 - 4.0 * fm + 2.0 * f1;
                h * (f0 * s + b * s * s / 2.0 + c * s * s * s / 3.0)
            })
            .collect()
    }
}

/// Counters reported by the integrator.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// A solved, left-continuous trajectory with its jump events.
///
/// The raw path is kept as one Hermite piece per inter-event interval; the
/// reduced [`JumpFunction`] is computed on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    horizon: f64,
    surface_count: usize,
    pieces: Vec<HermitePath>,
    events: Vec<JumpEvent>,
    trace: Vec<TracePanel>,
    base: JumpFunction,
    pub stats: SolveStats,
}

impl Trajectory {
    /// `pieces[k]` runs from the `k`-th event (or 0) to the next one (or `a`).
    /// `surface_count` is the declared `m`; missing jumps are padded at `a`.
    pub fn new(
        horizon: f64,
        surface_count: usize,
        pieces: Vec<HermitePath>,
        events: Vec<JumpEvent>,
        trace: Vec<TracePanel>,
    ) -> Result<Self> {
        let ends_at_horizon = events.last().is_some_and(|e| e.t == horizon);
        let expected = if ends_at_horizon {
            events.len()
        } else {
            events.len() + 1
        };
        if pieces.len() != expected {
            return Err(contract(format!(
                "{} pieces for {} events",
                pieces.len(),
                events.len()
            )));
        }
        for w in events.windows(2).enumerate() {
            let (i, w) = w;
            if !(w[0].t < w[1].t) {
                return Err(Error::DegenerateCorrespondence {
                    first: i,
                    second: i + 1,
                    time: w[1].t,
                });
            }
        }
        let mut start = 0.0;
        for (k, piece) in pieces.iter().enumerate() {
            let end = events.get(k).map_or(horizon, |e| e.t);
            if piece.start() != start || piece.end() != end {
                return Err(contract(format!(
                    "piece {k} spans [{}, {}], expected [{start}, {end}]",
                    piece.start(),
                    piece.end()
                )));
            }
            start = end;
        }
        let mut traj = Self {
            horizon,
            surface_count,
            pieces,
            events,
            trace,
            base: JumpFunction::zero(horizon, 1, 0)?,
            stats: SolveStats::default(),
        };
        traj.base = reduce(&traj)?;
        Ok(traj)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.pieces[0].dim()
    }

    pub fn surface_count(&self) -> usize {
        self.surface_count
    }

    pub fn base(&self) -> &JumpFunction {
        &self.base
    }

    pub fn events(&self) -> &[JumpEvent] {
        &self.events
    }

    pub fn pieces(&self) -> &[HermitePath] {
        &self.pieces
    }

    pub fn selection_trace(&self) -> &[TracePanel] {
        &self.trace
    }

    /// True when fewer surfaces fired than were declared.
    pub fn incomplete(&self) -> bool {
        self.events.len() < self.surface_count
    }

    /// First jump time, if any surface fired.
    pub fn first_jump_time(&self) -> Option<f64> {
        self.events.first().map(|e| e.t)
    }

    /// Left-continuous raw value `y(t)`.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        if !(t >= 0.0 && t <= self.horizon) {
            return Err(domain(format!("t = {t} outside [0, {}]", self.horizon)));
        }
        let piece = self
            .pieces
            .iter()
            .find(|p| p.end() >= t)
            .unwrap_or_else(|| self.pieces.last().unwrap());
        piece.eval(t)
    }

    /// Value just after `t` (differs from [`Trajectory::eval`] at jump times).
    pub fn eval_right(&self, t: f64) -> Result<Vec<f64>> {
        if let Some(e) = self.events.iter().find(|e| e.t == t) {
            return Ok(e.post.clone());
        }
        self.eval(t)
    }

    /// Supremum of `|y(t)|` over `[0, a]`, jumps included.
    pub fn sup_norm(&self) -> f64 {
        let pieces = self.pieces.iter().map(HermitePath::sup_norm);
        let posts = self.events.iter().map(|e| linalg::norm(&e.post));
        pieces.chain(posts).fold(0.0, f64::max)
    }

    /// Integration nodes of the raw path (event times appear once).
    pub fn nodes(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for p in &self.pieces {
            for &t in p.grid() {
                if out.last() != Some(&t) {
                    out.push(t);
                }
            }
        }
        out
    }

    pub fn endpoint(&self) -> Vec<f64> {
        let last = self.pieces.last().unwrap();
        last.node_value(last.node_count() - 1).to_vec()
    }

    /// The raw path restricted to `[0, s]` together with the events and
    /// trace panels strictly before `s`.
    pub(crate) fn prefix(
        &self,
        s: f64,
    ) -> Result<(Vec<HermitePath>, Vec<JumpEvent>, Vec<TracePanel>)> {
        let events: Vec<JumpEvent> = self.events.iter().filter(|e| e.t < s).cloned().collect();
        let mut pieces = self.pieces[..events.len()].to_vec();
        let current = &self.pieces[events.len()];
        pieces.push(current.restrict(current.start(), s)?);
        let mut trace = Vec::new();
        for panel in &self.trace {
            if panel.t1 <= s {
                trace.push(panel.clone());
            } else if panel.t0 < s {
                // Partial panel: resample end and midpoint from the dense path.
                let seg_piece = self
                    .pieces
                    .iter()
                    .find(|p| p.start() <= panel.t0 && p.end() >= s)
                    .unwrap_or(current);
                let tm = 0.5 * (panel.t0 + s);
                trace.push(TracePanel {
                    t0: panel.t0,
                    t1: s,
                    start: panel.start.clone(),
                    mid: seg_piece.derivative(tm)?,
                    end: seg_piece.derivative(s)?,
                });
            }
        }
        Ok((pieces, events, trace))
    }
}

/// The CJ_m representative of a trajectory: the raw path with accumulated
/// jumps subtracted, plus `(t_j, post_j - pre_j)` records (padded with
/// `(a, 0)` up to the trajectory's surface count).
pub fn reduce(traj: &Trajectory) -> Result<JumpFunction> {
    for (i, w) in traj.events.windows(2).enumerate() {
        if w[0].t == w[1].t {
            return Err(Error::DegenerateCorrespondence {
                first: i,
                second: i + 1,
                time: w[0].t,
            });
        }
    }
    let dim = traj.dim();
    let mut cumulative = vec![0.0; dim];
    let mut shifted = Vec::with_capacity(traj.pieces.len());
    let mut jumps = Vec::with_capacity(traj.events.len());
    for (k, piece) in traj.pieces.iter().enumerate() {
        shifted.push(piece.shifted(&linalg::scale(-1.0, &cumulative)));
        if let Some(e) = traj.events.get(k) {
            let v = linalg::sub(&e.post, &e.pre);
            linalg::axpy(1.0, &v, &mut cumulative);
            jumps.push(Jump::new(e.t, v));
        }
    }
    // Zero-length pieces (an event at t = 0) carry no shape.
    let shifted: Vec<HermitePath> = if shifted.len() > 1 {
        shifted.into_iter().filter(|p| p.node_count() > 1).collect()
    } else {
        shifted
    };
    let scale = shifted
        .iter()
        .map(HermitePath::sup_norm)
        .fold(1.0, f64::max);
    let phi = HermitePath::concat(&shifted, 1e-9 * scale)?;
    Ok(JumpFunction::new(traj.horizon, phi, jumps)?.padded_to(traj.surface_count))
}

/// The raw left-continuous trajectory encoded by `f`: one piece per
/// inter-jump interval, events in time order (numbered by that order).
pub fn reconstruct(f: &JumpFunction) -> Result<Trajectory> {
    let a = f.horizon;
    let mut cumulative = vec![0.0; f.dim()];
    let mut pieces = Vec::with_capacity(f.jump_count() + 1);
    let mut events = Vec::with_capacity(f.jump_count());
    let mut start = 0.0;
    for (k, jump) in f.sorted_jumps().into_iter().enumerate() {
        let piece = f.phi.restrict(start, jump.l)?.shifted(&cumulative);
        let pre = piece.node_value(piece.node_count() - 1).to_vec();
        let post = linalg::add(&pre, &jump.v);
        events.push(JumpEvent {
            surface: k,
            t: jump.l,
            pre,
            post,
        });
        pieces.push(piece);
        linalg::axpy(1.0, &jump.v, &mut cumulative);
        start = jump.l;
    }
    if events.last().is_none_or(|e: &JumpEvent| e.t < a) {
        pieces.push(f.phi.restrict(start, a)?.shifted(&cumulative));
    }
    Trajectory::new(a, f.jump_count(), pieces, events, Vec::new())
}

#[derive(Serialize, Deserialize)]
struct JumpFunctionJson {
    horizon: f64,
    dim: usize,
    grid: Vec<f64>,
    values: Vec<Vec<f64>>,
    jumps: Vec<Jump>,
    /// Per-segment `[start slope, end slope]`; estimated from samples when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slopes: Option<Vec<[Vec<f64>; 2]>>,
}

impl TryFrom<JumpFunctionJson> for JumpFunction {
    type Error = Error;

    fn try_from(raw: JumpFunctionJson) -> Result<Self> {
        if raw.values.iter().any(|v| v.len() != raw.dim) {
            return Err(contract("values do not match declared dim"));
        }
        let phi = match raw.slopes {
            Some(slopes) => {
                let mut s0 = Vec::with_capacity(slopes.len() * raw.dim);
                let mut s1 = Vec::with_capacity(slopes.len() * raw.dim);
                for [a, b] in slopes {
                    if a.len() != raw.dim || b.len() != raw.dim {
                        return Err(contract("slopes do not match declared dim"));
                    }
                    s0.extend(a);
                    s1.extend(b);
                }
                HermitePath::new(raw.dim, raw.grid, raw.values.concat(), s0, s1)?
            }
            None => HermitePath::from_samples(raw.dim, raw.grid, raw.values.concat())?,
        };
        JumpFunction::new(raw.horizon, phi, raw.jumps)
    }
}

impl From<JumpFunction> for JumpFunctionJson {
    fn from(f: JumpFunction) -> Self {
        let dim = f.dim();
        let phi = &f.phi;
        let values = phi
            .values_flat()
            .chunks_exact(dim)
            .map(<[f64]>::to_vec)
            .collect();
        let (s0, s1) = phi.slopes_flat();
        let slopes = s0
            .chunks_exact(dim)
            .zip(s1.chunks_exact(dim))
            .map(|(a, b)| [a.to_vec(), b.to_vec()])
            .collect();
        JumpFunctionJson {
            horizon: f.horizon,
            dim,
            grid: phi.grid().to_vec(),
            values,
            jumps: f.jumps,
            slopes: Some(slopes),
        }
    }
}

#[derive(Serialize)]
struct TrajectoryJson<'a> {
    #[serde(flatten)]
    base: JumpFunctionJson,
    events: &'a [JumpEvent],
    incomplete: bool,
}

impl Serialize for Trajectory {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        TrajectoryJson {
            base: self.base.clone().into(),
            events: &self.events,
            incomplete: self.incomplete(),
        }
        .serialize(serializer)
    }
}

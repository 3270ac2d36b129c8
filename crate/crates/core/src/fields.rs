//! Set-valued right-hand sides and their single-valued selections.
//!
//! A [`SetField`] maps `(t, y)` to a compact convex [`ConvexSet`] (box, ball or
//! polytope), each exposed through its support function. A [`Selection`] picks
//! one vector out of the field; the integrator only ever sees selections.
//!
//! Mollified selections blend per-anchor choices `q_s(t)` with multilinear
//! tent weights on a lattice of spacing `1/n`, which makes them Lipschitz in
//! `y`. They are only close to the field, not inside it, so they carry a
//! relaxed membership tolerance that shrinks like `1/n`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{contract, domain, Error, Result};
use crate::linalg;

/// A compact convex subset of `R^N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConvexSet {
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Polytope { vertices: Vec<Vec<f64>> },
}

impl ConvexSet {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let s = ConvexSet::Box { lower, upper };
        s.validate()?;
        Ok(s)
    }

    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let s = ConvexSet::Ball { center, radius };
        s.validate()?;
        Ok(s)
    }

    pub fn polytope(vertices: Vec<Vec<f64>>) -> Result<Self> {
        let s = ConvexSet::Polytope { vertices };
        s.validate()?;
        Ok(s)
    }

    /// A single point.
    pub fn singleton(x: Vec<f64>) -> Self {
        ConvexSet::Ball {
            center: x,
            radius: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ConvexSet::Box { lower, upper } => {
                if lower.is_empty() || lower.len() != upper.len() {
                    return Err(contract("box bounds must be non-empty and of equal length"));
                }
                if lower
                    .iter()
                    .zip(upper)
                    .any(|(l, u)| !(l <= u) || !l.is_finite() || !u.is_finite())
                {
                    return Err(contract("box needs finite lower <= upper componentwise"));
                }
            }
            ConvexSet::Ball { center, radius } => {
                if center.is_empty() || !(*radius >= 0.0) || !radius.is_finite() {
                    return Err(contract(
                        "ball needs a non-empty center and finite radius >= 0",
                    ));
                }
            }
            ConvexSet::Polytope { vertices } => {
                let dim = vertices.first().map_or(0, Vec::len);
                if dim == 0 || vertices.iter().any(|v| v.len() != dim) {
                    return Err(contract(
                        "polytope needs at least one vertex of uniform dimension",
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Box { lower, .. } => lower.len(),
            ConvexSet::Ball { center, .. } => center.len(),
            ConvexSet::Polytope { vertices } => vertices[0].len(),
        }
    }

    fn check_dim(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(contract(format!(
                "vector of dimension {} against set of dimension {}",
                v.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// `max { x . d : x in self }`.
    pub fn support(&self, d: &[f64]) -> Result<f64> {
        self.check_dim(d)?;
        Ok(self.support_unchecked(d))
    }

    pub(crate) fn support_unchecked(&self, d: &[f64]) -> f64 {
        match self {
            ConvexSet::Box { lower, upper } => d
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(&di, (&l, &u))| if di > 0.0 { u * di } else { l * di })
                .sum(),
            ConvexSet::Ball { center, radius } => linalg::dot(center, d) + radius * linalg::norm(d),
            ConvexSet::Polytope { vertices } => vertices
                .iter()
                .map(|v| linalg::dot(v, d))
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// A maximizer of `x . d`; its dot product with `d` is the support value.
    pub fn extreme_point(&self, d: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(d)?;
        if d.iter().all(|&x| x == 0.0) {
            return Err(domain("zero direction has no extreme point"));
        }
        Ok(match self {
            ConvexSet::Box { lower, upper } => d
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(&di, (&l, &u))| if di > 0.0 { u } else { l })
                .collect(),
            ConvexSet::Ball { center, radius } => {
                let n = linalg::norm(d);
                center
                    .iter()
                    .zip(d)
                    .map(|(c, di)| c + radius * di / n)
                    .collect()
            }
            ConvexSet::Polytope { vertices } => {
                let mut best = &vertices[0];
                let mut best_val = linalg::dot(best, d);
                for v in &vertices[1..] {
                    let val = linalg::dot(v, d);
                    if val > best_val {
                        best = v;
                        best_val = val;
                    }
                }
                best.clone()
            }
        })
    }

    /// Membership up to `tol`: `x . d <= support(d) + tol` for unit `d` in a
    /// direction set. Boxes and balls use the exact Euclidean distance.
    /// Polytopes test candidate facet normals (all vertex pairs in 2-D, all
    /// triples in 3-D, plus the coordinate axes); above three dimensions a
    /// fixed sample of `64 * N` directions is used, which can accept points
    /// slightly outside the hull.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            ConvexSet::Box { .. } | ConvexSet::Ball { .. } => self.distance_to(x) <= tol,
            ConvexSet::Polytope { vertices } => polytope_normals(vertices)
                .iter()
                .all(|d| linalg::dot(x, d) <= self.support_unchecked(d) + tol),
        }
    }

    /// Euclidean distance from `x` to the set (polytopes by projected
    /// gradient on the vertex weights, accurate to about 1e-10 relative).
    pub fn distance_to(&self, x: &[f64]) -> f64 {
        match self {
            ConvexSet::Box { lower, upper } => x
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(&xi, (&l, &u))| {
                    let e = (l - xi).max(xi - u).max(0.0);
                    e * e
                })
                .sum::<f64>()
                .sqrt(),
            ConvexSet::Ball { center, radius } => (linalg::distance(x, center) - radius).max(0.0),
            ConvexSet::Polytope { vertices } => polytope_distance(vertices, x),
        }
    }

    /// Canonical interior point: box midpoint, ball center, vertex average.
    pub fn center(&self) -> Vec<f64> {
        match self {
            ConvexSet::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| 0.5 * (l + u))
                .collect(),
            ConvexSet::Ball { center, .. } => center.clone(),
            ConvexSet::Polytope { vertices } => {
                let k = vertices.len() as f64;
                let mut c = vec![0.0; vertices[0].len()];
                for v in vertices {
                    linalg::axpy(1.0 / k, v, &mut c);
                }
                c
            }
        }
    }

    /// Radius of the smallest ball about [`ConvexSet::center`] holding the set.
    pub fn outer_radius(&self) -> f64 {
        match self {
            ConvexSet::Box { lower, upper } => 0.5 * linalg::distance(lower, upper),
            ConvexSet::Ball { radius, .. } => *radius,
            ConvexSet::Polytope { vertices } => {
                let c = self.center();
                vertices
                    .iter()
                    .map(|v| linalg::distance(v, &c))
                    .fold(0.0, f64::max)
            }
        }
    }

    /// `sup { |x| : x in self }`, the support over all unit directions.
    pub fn max_norm(&self) -> f64 {
        match self {
            ConvexSet::Box { lower, upper } => lower
                .iter()
                .zip(upper)
                .map(|(l, u)| (l * l).max(u * u))
                .sum::<f64>()
                .sqrt(),
            ConvexSet::Ball { center, radius } => linalg::norm(center) + radius,
            ConvexSet::Polytope { vertices } => {
                vertices.iter().map(|v| linalg::norm(v)).fold(0.0, f64::max)
            }
        }
    }
}

fn unit(v: Vec<f64>) -> Option<Vec<f64>> {
    let n = linalg::norm(&v);
    (n > 1e-300).then(|| linalg::scale(1.0 / n, &v))
}

fn axes(dim: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(2 * dim);
    for i in 0..dim {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; dim];
            e[i] = s;
            out.push(e);
        }
    }
    out
}

fn cross(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn polytope_normals(vertices: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let dim = vertices[0].len();
    let mut out = axes(dim);
    let push_pm = |v: Vec<f64>, out: &mut Vec<Vec<f64>>| {
        if let Some(u) = unit(v) {
            out.push(linalg::scale(-1.0, &u));
            out.push(u);
        }
    };
    match dim {
        1 => {}
        2 => {
            for i in 0..vertices.len() {
                for j in i + 1..vertices.len() {
                    let e = linalg::sub(&vertices[j], &vertices[i]);
                    push_pm(vec![-e[1], e[0]], &mut out);
                    push_pm(e, &mut out);
                }
            }
        }
        3 => {
            let basis = axes(3);
            for i in 0..vertices.len() {
                for j in i + 1..vertices.len() {
                    let e = linalg::sub(&vertices[j], &vertices[i]);
                    for ax in basis.iter().step_by(2) {
                        push_pm(cross(&e, ax), &mut out);
                    }
                    for k in j + 1..vertices.len() {
                        let f = linalg::sub(&vertices[k], &vertices[i]);
                        push_pm(cross(&e, &f), &mut out);
                    }
                }
            }
        }
        _ => out.extend(sphere_directions(dim, 64 * dim)),
    }
    out
}

/// Deterministic quasi-uniform unit directions (normalized Gaussian draws
/// from a fixed seed).
pub fn sphere_directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_d1ec);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if let Some(u) = unit(v) {
            out.push(u);
        }
    }
    out
}

fn polytope_distance(vertices: &[Vec<f64>], x: &[f64]) -> f64 {
    let k = vertices.len();
    if k == 1 {
        return linalg::distance(&vertices[0], x);
    }
    let dim = x.len();
    let combine = |w: &[f64]| -> Vec<f64> {
        let mut p = vec![0.0; dim];
        for (wi, v) in w.iter().zip(vertices) {
            linalg::axpy(*wi, v, &mut p);
        }
        p
    };
    // Accelerated projected gradient on 0.5 |V w - x|^2 over the simplex.
    let lipschitz: f64 = vertices
        .iter()
        .map(|v| linalg::dot(v, v))
        .sum::<f64>()
        .max(1e-300);
    let step = 1.0 / lipschitz;
    let mut w = vec![1.0 / k as f64; k];
    let mut z = w.clone();
    let mut theta: f64 = 1.0;
    for _ in 0..5000 {
        let r = linalg::sub(&combine(&z), x);
        let grad: Vec<f64> = vertices.iter().map(|v| linalg::dot(v, &r)).collect();
        let next = project_simplex(
            &z.iter()
                .zip(&grad)
                .map(|(zi, gi)| zi - step * gi)
                .collect::<Vec<_>>(),
        );
        let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        let beta = (theta - 1.0) / theta_next;
        z = next
            .iter()
            .zip(&w)
            .map(|(n, o)| n + beta * (n - o))
            .collect();
        let moved = linalg::distance(&next, &w);
        w = next;
        theta = theta_next;
        if moved < 1e-15 {
            break;
        }
    }
    linalg::distance(&combine(&w), x)
}

fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut shift = 0.0;
    for (i, ui) in u.iter().enumerate() {
        cumsum += ui;
        let candidate = (cumsum - 1.0) / (i as f64 + 1.0);
        if ui - candidate > 0.0 {
            shift = candidate;
        }
    }
    v.iter().map(|x| (x - shift).max(0.0)).collect()
}

type SetFn = dyn Fn(f64, &[f64]) -> ConvexSet + Send + Sync;
type ScalarFn = dyn Fn(f64) -> f64 + Send + Sync;

/// `F(t, y)` together with its declared growth coefficient `alpha(t)`.
#[derive(Clone)]
pub struct SetField {
    dim: usize,
    eval: Arc<SetFn>,
    alpha: Arc<ScalarFn>,
}

impl std::fmt::Debug for SetField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SetField")
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

impl SetField {
    pub fn new(
        dim: usize,
        eval: impl Fn(f64, &[f64]) -> ConvexSet + Send + Sync + 'static,
        alpha: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            dim,
            eval: Arc::new(eval),
            alpha: Arc::new(alpha),
        }
    }

    /// A field with one value everywhere.
    pub fn constant(set: ConvexSet, alpha: f64) -> Self {
        let dim = set.dim();
        Self::new(dim, move |_, _| set.clone(), move |_| alpha)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, t: f64, y: &[f64]) -> ConvexSet {
        (self.eval)(t, y)
    }

    pub fn alpha(&self, t: f64) -> f64 {
        (self.alpha)(t)
    }

    /// `max alpha` over 1001 equispaced samples of `[0, horizon]`.
    pub fn alpha_max(&self, horizon: f64) -> f64 {
        (0..=1000)
            .map(|i| self.alpha(horizon * i as f64 / 1000.0))
            .fold(0.0, f64::max)
    }
}

/// How a selection is audited against the field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Membership {
    /// Values lie in `F(t, y)` up to rounding.
    Exact,
    /// Values lie within `(outer_radius(F(t, y)) + slack) / level` of `F(t, y)`.
    Relaxed { level: usize, slack: f64 },
}

/// Provenance of a selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionLabel {
    pub strategy: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
}

type SelectFn = dyn Fn(f64, &[f64], usize) -> Result<Vec<f64>> + Send + Sync;

/// A single-valued field `(t, y) -> x`, possibly piecewise in `t`.
///
/// `breakpoints` split `[0, a]` into pieces; the evaluator receives the piece
/// index so a step that ends exactly on a breakpoint can stay on its own
/// piece. The integrator never steps across a breakpoint.
#[derive(Clone)]
pub struct Selection {
    eval: Arc<SelectFn>,
    breakpoints: Vec<f64>,
    pub label: SelectionLabel,
    pub membership: Membership,
}

impl std::fmt::Debug for Selection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Selection")
            .field("label", &self.label)
            .field("breakpoints", &self.breakpoints)
            .field("membership", &self.membership)
            .finish_non_exhaustive()
    }
}

impl Selection {
    pub fn new(
        label: SelectionLabel,
        membership: Membership,
        breakpoints: Vec<f64>,
        eval: impl Fn(f64, &[f64], usize) -> Result<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            eval: Arc::new(eval),
            breakpoints,
            label,
            membership,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Piece index for a step starting at `t`.
    pub fn piece_at(&self, t: f64) -> usize {
        self.breakpoints.partition_point(|&b| b <= t)
    }

    pub fn eval_on(&self, piece: usize, t: f64, y: &[f64]) -> Result<Vec<f64>> {
        (self.eval)(t, y, piece)
    }

    pub fn eval(&self, t: f64, y: &[f64]) -> Result<Vec<f64>> {
        self.eval_on(self.piece_at(t), t, y)
    }

    /// Tolerance this selection is held to at `(t, y)`.
    pub fn tolerance(&self, set: &ConvexSet, value: &[f64]) -> f64 {
        match self.membership {
            Membership::Exact => 1e-12 * (1.0 + linalg::norm(value)),
            Membership::Relaxed { level, slack } => {
                (set.outer_radius() + slack) / level as f64 + 1e-9
            }
        }
    }

    /// Checks `value` against `F(t, y)`.
    pub fn audit(&self, field: &SetField, t: f64, y: &[f64], value: &[f64]) -> Result<()> {
        let set = field.eval(t, y);
        let tol = self.tolerance(&set, value);
        if set.contains(value, tol) {
            return Ok(());
        }
        Err(Error::Selection {
            t,
            distance: set.distance_to(value),
            tolerance: tol,
        })
    }
}

fn label(strategy: impl Into<String>, seed: Option<u64>, level: Option<usize>) -> SelectionLabel {
    SelectionLabel {
        strategy: strategy.into(),
        seed,
        level,
    }
}

/// The zero vector, valid wherever `0 in F(t, y)`.
pub fn select_zero(dim: usize) -> Selection {
    Selection::new(
        label("zero", None, None),
        Membership::Exact,
        vec![],
        move |_, _, _| Ok(vec![0.0; dim]),
    )
}

/// The canonical center of `F(t, y)`.
pub fn select_center(field: &SetField) -> Selection {
    let field = field.clone();
    Selection::new(
        label("center", None, None),
        Membership::Exact,
        vec![],
        move |t, y, _| Ok(field.eval(t, y).center()),
    )
}

/// `(t, y) -> extreme_point(F(t, y), d)`.
pub fn select_extreme(field: &SetField, d: &[f64]) -> Result<Selection> {
    if d.len() != field.dim() {
        return Err(contract("direction dimension does not match the field"));
    }
    if d.iter().all(|&x| x == 0.0) {
        return Err(domain("zero direction"));
    }
    let field = field.clone();
    let d = d.to_vec();
    let name = format!(
        "extreme:{}",
        d.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    Ok(Selection::new(
        label(name, None, None),
        Membership::Exact,
        vec![],
        move |t, y, _| field.eval(t, y).extreme_point(&d),
    ))
}

/// Random bang-bang schedule: `k` switch times uniform in `[0, horizon]` and
/// `k + 1` unit directions, all drawn from `seed`.
#[derive(Debug, Clone, PartialEq)]
pub struct BangBangSchedule {
    pub switch_times: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
}

impl BangBangSchedule {
    pub fn draw(dim: usize, horizon: f64, seed: u64, switches: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut switch_times: Vec<f64> = (0..switches)
            .map(|_| rng.random_range(0.0..horizon))
            .collect();
        switch_times.sort_by(f64::total_cmp);
        switch_times.dedup();
        switch_times.retain(|&s| s > 0.0);
        let mut directions = Vec::with_capacity(switch_times.len() + 1);
        while directions.len() < switch_times.len() + 1 {
            let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            if let Some(u) = unit(v) {
                directions.push(u);
            }
        }
        Self {
            switch_times,
            directions,
        }
    }
}

/// Bang-bang selection: on each piece of a random schedule, the extreme point
/// of `F(t, y)` in that piece's direction.
pub fn select_random(field: &SetField, horizon: f64, seed: u64, switches: usize) -> Selection {
    let schedule = BangBangSchedule::draw(field.dim(), horizon, seed, switches);
    let field = field.clone();
    let breakpoints = schedule.switch_times.clone();
    let directions = schedule.directions;
    Selection::new(
        label(format!("bangbang:{switches}"), Some(seed), None),
        Membership::Exact,
        breakpoints,
        move |t, y, piece| {
            let d = &directions[piece.min(directions.len() - 1)];
            field.eval(t, y).extreme_point(d)
        },
    )
}

type AnchorFn = dyn Fn(&ConvexSet, usize) -> Vec<f64> + Send + Sync;

/// `g_n(t, y) = sum_s lambda_s(y) q_s(t)` on the lattice `(Z / n)^N`.
///
/// Anchors are lattice points; `q_s(t)` is computed on demand from
/// `F(t, y_s)` by the anchor rule, and `lambda_s` are the multilinear tent
/// functions of the lattice cell holding `y`. Evaluation is restricted to a
/// compact box.
#[derive(Clone)]
pub struct Mollified {
    field: SetField,
    level: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    anchor: Arc<AnchorFn>,
}

impl std::fmt::Debug for Mollified {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Mollified")
            .field("level", &self.level)
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .finish_non_exhaustive()
    }
}

impl Mollified {
    pub fn level(&self) -> usize {
        self.level
    }

    /// Evaluates with the anchor rule's piece `piece`.
    pub fn eval_on(&self, piece: usize, t: f64, y: &[f64]) -> Result<Vec<f64>> {
        let dim = self.field.dim();
        if y.len() != dim {
            return Err(contract("state dimension does not match the field"));
        }
        if y.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .any(|(&yi, (&l, &u))| !(yi >= l && yi <= u))
        {
            return Err(Error::Extrapolation { state: y.to_vec() });
        }
        let n = self.level as f64;
        let mut base = Vec::with_capacity(dim);
        let mut frac = Vec::with_capacity(dim);
        for &yi in y {
            let u = yi * n;
            let k = u.floor();
            base.push(k);
            frac.push(u - k);
        }
        let mut out = vec![0.0; dim];
        let mut corner = vec![0.0; dim];
        for mask in 0..(1usize << dim) {
            let mut weight = 1.0;
            for i in 0..dim {
                let bit = (mask >> i) & 1;
                weight *= if bit == 1 { frac[i] } else { 1.0 - frac[i] };
                corner[i] = (base[i] + bit as f64) / n;
            }
            if weight == 0.0 {
                continue;
            }
            let q = (self.anchor)(&self.field.eval(t, &corner), piece);
            linalg::axpy(weight, &q, &mut out);
        }
        Ok(out)
    }

    pub fn eval(&self, t: f64, y: &[f64]) -> Result<Vec<f64>> {
        self.eval_on(0, t, y)
    }
}

fn check_box(field: &SetField, level: usize, lower: &[f64], upper: &[f64]) -> Result<()> {
    if level == 0 {
        return Err(contract("mollification level must be >= 1"));
    }
    if lower.len() != field.dim() || upper.len() != field.dim() {
        return Err(contract("box dimension does not match the field"));
    }
    if lower
        .iter()
        .zip(upper)
        .any(|(l, u)| !(l < u) || !l.is_finite() || !u.is_finite())
    {
        return Err(contract(
            "mollification box needs finite bounds with nonempty interior",
        ));
    }
    Ok(())
}

/// The mollified center selection `g_n` on `[lower, upper]`.
pub fn mollify(field: &SetField, level: usize, lower: &[f64], upper: &[f64]) -> Result<Mollified> {
    mollify_with(field, level, lower, upper, |set, _| set.center())
}

/// Mollification with a custom anchor rule `q_s = rule(F(t, y_s), piece)`.
pub fn mollify_with(
    field: &SetField,
    level: usize,
    lower: &[f64],
    upper: &[f64],
    rule: impl Fn(&ConvexSet, usize) -> Vec<f64> + Send + Sync + 'static,
) -> Result<Mollified> {
    check_box(field, level, lower, upper)?;
    Ok(Mollified {
        field: field.clone(),
        level,
        lower: lower.to_vec(),
        upper: upper.to_vec(),
        anchor: Arc::new(rule),
    })
}

fn relaxed(field: &SetField, level: usize, horizon: f64) -> Membership {
    Membership::Relaxed {
        level,
        slack: field.alpha_max(horizon) * (field.dim() as f64).sqrt(),
    }
}

/// Selection driven by the mollified center field `g_n`.
pub fn select_mollified(
    field: &SetField,
    horizon: f64,
    level: usize,
    lower: &[f64],
    upper: &[f64],
) -> Result<Selection> {
    let g = mollify(field, level, lower, upper)?;
    Ok(Selection::new(
        label(format!("mollified:{level}"), None, Some(level)),
        relaxed(field, level, horizon),
        vec![],
        move |t, y, _| g.eval(t, y),
    ))
}

/// Level-`n` bang-bang family member: each anchor picks the extreme point of
/// `F(t, y_s)` in the schedule's direction, pushed outward by the factor
/// `1 + 1/n` about the set's center, then anchors are blended as in
/// [`mollify`]. As `n` grows the values approach bang-bang selections of `F`.
pub fn select_mollified_bangbang(
    field: &SetField,
    horizon: f64,
    level: usize,
    lower: &[f64],
    upper: &[f64],
    seed: u64,
    switches: usize,
) -> Result<Selection> {
    let schedule = BangBangSchedule::draw(field.dim(), horizon, seed, switches);
    let directions = schedule.directions;
    let dilation = 1.0 + 1.0 / level as f64;
    let g = mollify_with(field, level, lower, upper, move |set, piece| {
        let d = &directions[piece.min(directions.len() - 1)];
        let c = set.center();
        let e = set
            .extreme_point(d)
            .expect("schedule directions are unit vectors");
        c.iter()
            .zip(&e)
            .map(|(ci, ei)| ci + dilation * (ei - ci))
            .collect()
    })?;
    Ok(Selection::new(
        label(
            format!("mollified-bangbang:{level}:{switches}"),
            Some(seed),
            Some(level),
        ),
        relaxed(field, level, horizon),
        schedule.switch_times,
        move |t, y, piece| g.eval_on(piece, t, y),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx() -> ConvexSet {
        ConvexSet::boxed(vec![-1.0, 0.0], vec![2.0, 3.0]).unwrap()
    }

    fn tri() -> ConvexSet {
        ConvexSet::polytope(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
    }

    #[test]
    fn support_examples() {
        assert_eq!(bx().support(&[1.0, 1.0]).unwrap(), 5.0);
        let ball = ConvexSet::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert_eq!(ball.support(&[3.0, 4.0]).unwrap(), 5.0);
        assert_eq!(tri().support(&[1.0, 1.0]).unwrap(), 1.0);
        assert!(matches!(bx().support(&[1.0]), Err(Error::Contract(_))));
    }

    #[test]
    fn extreme_point_examples() {
        assert_eq!(bx().extreme_point(&[1.0, 1.0]).unwrap(), vec![2.0, 3.0]);
        let ball = ConvexSet::ball(vec![1.0, 1.0], 2.0).unwrap();
        assert_eq!(ball.extreme_point(&[1.0, 0.0]).unwrap(), vec![3.0, 1.0]);
        assert_eq!(tri().extreme_point(&[1.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        assert!(matches!(
            bx().extreme_point(&[0.0, 0.0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn contains_examples() {
        let unit_box = ConvexSet::boxed(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap();
        assert!(unit_box.contains(&[0.5, 0.5], 0.0));
        let ball = ConvexSet::ball(vec![0.0, 0.0], 1.0).unwrap();
        assert!(!ball.contains(&[1.001, 0.0], 1e-6));
        assert!(ball.contains(&[1.001, 0.0], 1e-2));
    }

    #[test]
    fn polytope_contains_uses_facets() {
        let t = tri();
        assert!(t.contains(&[0.2, 0.2], 0.0));
        assert!(t.contains(&[0.5, 0.5], 1e-12));
        assert!(!t.contains(&[0.6, 0.6], 1e-3));
        assert!(!t.contains(&[-0.1, 0.5], 1e-3));
        // degenerate segment
        let seg = ConvexSet::polytope(vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert!(seg.contains(&[0.5, 0.5], 1e-12));
        assert!(!seg.contains(&[0.5, 0.6], 1e-3));
        assert!(!seg.contains(&[1.5, 1.5], 1e-3));
        // 3-D tetrahedron
        let tet = ConvexSet::polytope(vec![
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert!(tet.contains(&[0.2, 0.2, 0.2], 0.0));
        assert!(!tet.contains(&[0.4, 0.4, 0.4], 1e-3));
    }

    #[test]
    fn polytope_distance_matches_geometry() {
        let t = tri();
        assert!((t.distance_to(&[1.0, 1.0]) - 0.5f64.sqrt()).abs() < 1e-9);
        assert!((t.distance_to(&[-1.0, 0.5]) - 1.0).abs() < 1e-9);
        assert!(t.distance_to(&[0.1, 0.1]) < 1e-9);
    }

    #[test]
    fn invalid_sets_rejected() {
        assert!(ConvexSet::boxed(vec![1.0], vec![0.0]).is_err());
        assert!(ConvexSet::ball(vec![0.0], -1.0).is_err());
        assert!(ConvexSet::polytope(vec![]).is_err());
    }

    #[test]
    fn convex_set_json() {
        let v = serde_json::to_value(bx()).unwrap();
        assert_eq!(v["kind"], "box");
        assert_eq!(v["lower"][0], -1.0);
        let b: ConvexSet =
            serde_json::from_str(r#"{"kind":"ball","center":[0,1],"radius":2}"#).unwrap();
        assert_eq!(
            b,
            ConvexSet::Ball {
                center: vec![0.0, 1.0],
                radius: 2.0
            }
        );
    }

    fn interval_field() -> SetField {
        SetField::constant(ConvexSet::boxed(vec![-1.0], vec![1.0]).unwrap(), 1.0)
    }

    #[test]
    fn extreme_selection_examples() {
        let f = interval_field();
        let up = select_extreme(&f, &[1.0]).unwrap();
        let down = select_extreme(&f, &[-1.0]).unwrap();
        assert_eq!(up.eval(0.3, &[5.0]).unwrap(), vec![1.0]);
        assert_eq!(down.eval(0.3, &[5.0]).unwrap(), vec![-1.0]);
        assert!(matches!(select_extreme(&f, &[0.0]), Err(Error::Domain(_))));

        let growing = SetField::new(
            1,
            |_, y: &[f64]| ConvexSet::Box {
                lower: vec![-6.0 * y[0]],
                upper: vec![6.0 * y[0]],
            },
            |_| 6.0,
        );
        let sel = select_extreme(&growing, &[1.0]).unwrap();
        assert_eq!(sel.eval(0.0, &[0.7]).unwrap(), vec![6.0 * 0.7]);
    }

    #[test]
    fn random_selection_is_deterministic() {
        let f = SetField::constant(ConvexSet::ball(vec![0.0, 0.0], 1.0).unwrap(), 1.0);
        let a = select_random(&f, 1.0, 42, 3);
        let b = select_random(&f, 1.0, 42, 3);
        assert_eq!(a.breakpoints(), b.breakpoints());
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            assert_eq!(
                a.eval(t, &[0.1, 0.2]).unwrap(),
                b.eval(t, &[0.1, 0.2]).unwrap()
            );
        }
    }

    #[test]
    fn random_selection_without_switches_is_extreme() {
        let f = SetField::constant(bx(), 1.0);
        let sel = select_random(&f, 1.0, 9, 0);
        assert!(sel.breakpoints().is_empty());
        let d = BangBangSchedule::draw(2, 1.0, 9, 0).directions[0].clone();
        let ext = select_extreme(&f, &d).unwrap();
        assert_eq!(
            sel.eval(0.5, &[0.0, 0.0]).unwrap(),
            ext.eval(0.5, &[0.0, 0.0]).unwrap()
        );
    }

    #[test]
    fn random_selection_stays_in_ball() {
        let ball = ConvexSet::ball(vec![0.0, 0.0], 1.0).unwrap();
        let f = SetField::constant(ball.clone(), 1.0);
        for seed in 0..100 {
            let sel = select_random(&f, 1.0, seed, 4);
            for i in 0..=10 {
                let x = sel.eval(i as f64 / 10.0, &[0.0, 0.0]).unwrap();
                assert!(ball.contains(&x, 1e-12));
            }
        }
    }

    #[test]
    fn mollify_constant_field_is_exact() {
        let f = SetField::new(
            2,
            |t, _| ConvexSet::ball(vec![t, -t], 1.0).unwrap(),
            |_| 1.0,
        );
        let g = mollify(&f, 3, &[-2.0, -2.0], &[2.0, 2.0]).unwrap();
        for (t, y) in [(0.1, [0.33, -1.2]), (0.7, [1.9, 0.01]), (0.0, [0.0, 0.0])] {
            let got = g.eval(t, &y).unwrap();
            assert!(linalg::distance(&got, &[t, -t]) < 1e-14);
        }
    }

    #[test]
    fn mollify_rejects_extrapolation() {
        let f = interval_field();
        let g = mollify(&f, 4, &[0.0], &[1.0]).unwrap();
        assert!(matches!(
            g.eval(0.0, &[1.5]),
            Err(Error::Extrapolation { .. })
        ));
        assert!(mollify(&f, 0, &[0.0], &[1.0]).is_err());
        assert!(mollify(&f, 2, &[1.0], &[1.0]).is_err());
    }

    #[test]
    fn mollify_singleton_within_modulus() {
        // f(y) = (sin 3y1, cos y2); Lipschitz constant 3
        let f = SetField::new(
            2,
            |_, y: &[f64]| ConvexSet::singleton(vec![(3.0 * y[0]).sin(), y[1].cos()]),
            |_| 1.0,
        );
        for n in [2usize, 5, 11] {
            let g = mollify(&f, n, &[-1.0, -1.0], &[1.0, 1.0]).unwrap();
            let radius = 2f64.sqrt() / n as f64;
            for i in 0..=20 {
                for j in 0..=20 {
                    let y = [-1.0 + 0.1 * i as f64, -1.0 + 0.1 * j as f64];
                    let got = g.eval(0.0, &y).unwrap();
                    let want = [(3.0 * y[0]).sin(), y[1].cos()];
                    assert!(linalg::distance(&got, &want) <= 3.0 * radius + 1e-12);
                }
            }
        }
    }

    fn max_gap(field: &SetField, n: usize) -> f64 {
        let g = mollify(field, n, &[0.5], &[2.0]).unwrap();
        (0..=150)
            .map(|i| {
                let y = [0.5 + 1.5 * i as f64 / 150.0];
                field.eval(0.0, &y).distance_to(&g.eval(0.0, &y).unwrap())
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn mollify_refinement_on_interval_field() {
        // F = [-y, y]: centers are all zero, so the gap is zero at every level.
        let f = SetField::new(
            1,
            |_, y: &[f64]| ConvexSet::Box {
                lower: vec![-y[0]],
                upper: vec![y[0]],
            },
            |_| 1.0,
        );
        for n in [2usize, 4, 8, 16] {
            let (coarse, fine) = (max_gap(&f, n), max_gap(&f, 2 * n));
            assert!(fine <= 0.5 * 1.5 * coarse + 1e-15);
        }
        // A thin set: the gap is interpolation error of sin and must shrink.
        let thin = SetField::new(
            1,
            |_, y: &[f64]| ConvexSet::singleton(vec![(3.0 * y[0]).sin()]),
            |_| 1.0,
        );
        for n in [2usize, 4, 8, 16] {
            let (coarse, fine) = (max_gap(&thin, n), max_gap(&thin, 2 * n));
            assert!(fine <= 0.5 * 1.5 * coarse, "n = {n}: {fine} vs {coarse}");
        }
    }

    #[test]
    fn mollified_bangbang_respects_relaxed_audit() {
        let f = SetField::new(
            2,
            |_, y: &[f64]| ConvexSet::Box {
                lower: vec![-6.0 * y[0].abs(), -6.0 * y[1].abs()],
                upper: vec![6.0 * y[0].abs(), 6.0 * y[1].abs()],
            },
            |_| 6.0,
        );
        for n in [4usize, 8, 16, 32] {
            let sel = select_mollified_bangbang(&f, 1.0, n, &[-10.0, -10.0], &[10.0, 10.0], 3, 4)
                .unwrap();
            for i in 0..=30 {
                let t = i as f64 / 30.0;
                let y = [0.3 + 0.1 * i as f64, 2.0 - 0.05 * i as f64];
                let x = sel.eval(t, &y).unwrap();
                sel.audit(&f, t, &y, &x).unwrap();
            }
        }
    }
}

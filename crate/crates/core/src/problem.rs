//! Impulsive inclusion problems, a-priori bounds and grid verifiers.
//!
//! An [`InclusionProblem`] couples a [`SetField`] with ordered
//! [`ImpulseSurface`]s `t = tau_j(y)`. The verifiers sweep a finite grid over
//! `[0, a] x region` and report the worst slack of each hypothesis together
//! with the point that attains it. Results are sound only up to grid
//! resolution.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::fields::SetField;
use crate::linalg;

type TauFn = dyn Fn(&[f64]) -> f64 + Send + Sync;
type VecFn = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

/// A pulse surface `t = tau(y)` with its gradient and impulse map.
#[derive(Clone)]
pub struct ImpulseSurface {
    tau: Arc<TauFn>,
    tau_grad: Arc<VecFn>,
    impulse: Arc<VecFn>,
}

impl std::fmt::Debug for ImpulseSurface {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ImpulseSurface").finish_non_exhaustive()
    }
}

impl ImpulseSurface {
    pub fn new(
        tau: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        tau_grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        impulse: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            tau: Arc::new(tau),
            tau_grad: Arc::new(tau_grad),
            impulse: Arc::new(impulse),
        }
    }

    /// A fixed-time surface `tau == time`.
    pub fn fixed_time(
        time: f64,
        impulse: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        Self::new(move |_| time, |y| vec![0.0; y.len()], impulse)
    }

    pub fn tau(&self, y: &[f64]) -> f64 {
        (self.tau)(y)
    }

    pub fn tau_grad(&self, y: &[f64]) -> Vec<f64> {
        (self.tau_grad)(y)
    }

    pub fn impulse(&self, y: &[f64]) -> Vec<f64> {
        (self.impulse)(y)
    }

    /// Relative error of `tau_grad` against central differences at `y`,
    /// measured as `|grad - fd| / max(|fd|, 1)`.
    pub fn gradient_error(&self, y: &[f64]) -> f64 {
        let g = self.tau_grad(y);
        let mut fd = vec![0.0; y.len()];
        let mut probe = y.to_vec();
        for i in 0..y.len() {
            let h = 1e-6 * (1.0 + y[i].abs());
            probe[i] = y[i] + h;
            let up = self.tau(&probe);
            probe[i] = y[i] - h;
            let down = self.tau(&probe);
            probe[i] = y[i];
            fd[i] = (up - down) / (2.0 * h);
        }
        linalg::distance(&g, &fd) / linalg::norm(&fd).max(1.0)
    }
}

/// Axis-aligned box in state space; infinite bounds are allowed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl StateBox {
    pub fn unbounded(dim: usize) -> Self {
        Self {
            lower: vec![f64::NEG_INFINITY; dim],
            upper: vec![f64::INFINITY; dim],
        }
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        y.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(&v, (&l, &u))| v >= l && v <= u)
    }
}

/// `y' in F(t, y)` on `[0, a]`, `y(0) = y0`, with jumps on ordered surfaces.
#[derive(Debug, Clone)]
pub struct InclusionProblem {
    pub name: String,
    pub horizon: f64,
    pub y0: Vec<f64>,
    pub field: SetField,
    pub surfaces: Vec<ImpulseSurface>,
    /// States where the data are meaningful; the initial state must lie here.
    pub domain: StateBox,
    /// Verification box replacing the default `ball(0, K_bar + 1) & domain`.
    pub region: Option<StateBox>,
}

impl InclusionProblem {
    pub fn new(
        name: impl Into<String>,
        horizon: f64,
        y0: Vec<f64>,
        field: SetField,
        surfaces: Vec<ImpulseSurface>,
    ) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(contract("horizon must be finite and positive"));
        }
        if y0.len() != field.dim() || y0.is_empty() {
            return Err(contract("initial state dimension does not match the field"));
        }
        let dim = y0.len();
        Ok(Self {
            name: name.into(),
            horizon,
            y0,
            field,
            surfaces,
            domain: StateBox::unbounded(dim),
            region: None,
        })
    }

    pub fn with_domain(mut self, domain: StateBox) -> Result<Self> {
        if domain.lower.len() != self.dim() || domain.upper.len() != self.dim() {
            return Err(contract("domain box dimension does not match the problem"));
        }
        if !domain.contains(&self.y0) {
            return Err(Error::Hypothesis(format!(
                "initial state {:?} lies outside the validity domain of {}",
                self.y0, self.name
            )));
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn with_region(mut self, region: StateBox) -> Result<Self> {
        if region.lower.len() != self.dim() || region.upper.len() != self.dim() {
            return Err(contract("region dimension does not match the problem"));
        }
        if region
            .lower
            .iter()
            .chain(&region.upper)
            .any(|v| !v.is_finite())
        {
            return Err(contract("verification region must be bounded"));
        }
        self.region = Some(region);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.y0.len()
    }

    pub fn surface_count(&self) -> usize {
        self.surfaces.len()
    }

    /// The verification box: the override, or `ball(0, K_bar + 1)`'s bounding
    /// box clipped to the domain.
    pub fn verification_region(&self) -> Result<(StateBox, Option<f64>)> {
        if let Some(r) = &self.region {
            return Ok((r.clone(), None));
        }
        let radius = gronwall_bounds(self)?.k_bar + 1.0;
        let lower = self.domain.lower.iter().map(|&l| l.max(-radius)).collect();
        let upper = self.domain.upper.iter().map(|&u| u.min(radius)).collect();
        Ok((StateBox { lower, upper }, Some(radius)))
    }
}

/// Adaptive Simpson quadrature with relative tolerance `rel_tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        if !flm.is_finite() || !frm.is_finite() {
            return Err(Error::Quadrature(format!(
                "integrand not finite near t = {lm}"
            )));
        }
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        Ok(recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    if !fa.is_finite() || !fm.is_finite() || !fb.is_finite() {
        return Err(Error::Quadrature(
            "integrand not finite at a sample node".into(),
        ));
    }
    // Seed with a coarse composite estimate so the tolerance is relative.
    let coarse: f64 = (0..16)
        .map(|i| {
            let t0 = a + (b - a) * i as f64 / 16.0;
            let t1 = a + (b - a) * (i + 1) as f64 / 16.0;
            simpson(f(t0), f(0.5 * (t0 + t1)), f(t1), t1 - t0)
        })
        .sum();
    let tol = (rel_tol * coarse.abs()).max(1e-300);
    let whole = simpson(fa, fm, fb, b - a);
    recurse(&f, a, b, fa, fm, fb, whole, tol, 40)
}

/// A-priori envelopes on solution norms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GronwallBounds {
    /// Envelope before any jump.
    pub k: f64,
    /// Envelope after all jumps.
    pub k_bar: f64,
    /// `K_j` after the first `j` jumps, `j = 1..m`.
    pub per_jump: Vec<f64>,
    /// `c_j`, the largest impulse norm found on `cl B(0, K_{j-1})`.
    pub impulse_bounds: Vec<f64>,
}

/// `K = (|y0| + int 2 alpha) exp(int alpha)` and
/// `K_j = (|y0| + sum_{i <= j} c_i + int 2 alpha) exp(int alpha)`,
/// where `c_j` bounds `|I_j|` on the ball of radius `K_{j-1}`.
pub fn gronwall_bounds(p: &InclusionProblem) -> Result<GronwallBounds> {
    let int_alpha = integrate(|t| p.field.alpha(t), 0.0, p.horizon, 1e-8)?;
    let y0 = linalg::norm(&p.y0);
    let growth = int_alpha.exp();
    let k = (y0 + 2.0 * int_alpha) * growth;
    let mut per_jump = Vec::with_capacity(p.surface_count());
    let mut impulse_bounds = Vec::with_capacity(p.surface_count());
    let mut prev = k;
    let mut c_sum = 0.0;
    for s in &p.surfaces {
        let c = ball_points(p.dim(), prev)
            .into_iter()
            .map(|y| linalg::norm(&s.impulse(&y)))
            .fold(0.0, f64::max);
        c_sum += c;
        impulse_bounds.push(c);
        prev = (y0 + c_sum + 2.0 * int_alpha) * growth;
        per_jump.push(prev);
    }
    Ok(GronwallBounds {
        k,
        k_bar: prev,
        per_jump,
        impulse_bounds,
    })
}

/// Grid points of `cl B(0, radius)` plus a layer on its boundary sphere.
fn ball_points(dim: usize, radius: f64) -> Vec<Vec<f64>> {
    let per_axis = ((40_000f64).powf(1.0 / dim as f64).floor() as usize).clamp(3, 201) | 1;
    let mut out = Vec::new();
    let mut idx = vec![0usize; dim];
    loop {
        let y: Vec<f64> = idx
            .iter()
            .map(|&i| radius * (2.0 * i as f64 / (per_axis - 1) as f64 - 1.0))
            .collect();
        if linalg::norm(&y) <= radius * (1.0 + 1e-12) {
            out.push(y);
        }
        if !advance(&mut idx, per_axis) {
            break;
        }
    }
    for d in crate::fields::sphere_directions(dim, 256 * dim) {
        out.push(linalg::scale(radius, &d));
    }
    out
}

fn advance(idx: &mut [usize], base: usize) -> bool {
    for i in idx.iter_mut() {
        *i += 1;
        if *i < base {
            return true;
        }
        *i = 0;
    }
    false
}

/// Resolution of a verification sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingGrid {
    /// Points along `[0, a]`.
    pub t_points: usize,
    /// Points along each state axis.
    pub y_points: usize,
}

impl Default for SamplingGrid {
    fn default() -> Self {
        Self {
            t_points: 9,
            y_points: 64,
        }
    }
}

/// What a verification sweep covered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub t_points: usize,
    pub y_points: usize,
    pub t_range: [f64; 2],
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ball_radius: Option<f64>,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub t: f64,
    pub y: Vec<f64>,
}

/// Outcome of one hypothesis sweep; `margin` is the worst signed slack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub hypothesis: String,
    pub pass: bool,
    pub margin: f64,
    pub witness: Witness,
    pub grid: GridMeta,
    /// Largest `|tau_j'(y)|` seen, reported by the surface check.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gradient_bound: Option<f64>,
}

struct Sweep {
    times: Vec<f64>,
    states: Vec<Vec<f64>>,
    meta: GridMeta,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn sweep(p: &InclusionProblem, grid: SamplingGrid) -> Result<Sweep> {
    if grid.t_points == 0 || grid.y_points == 0 {
        return Err(contract("grid needs at least one point per axis"));
    }
    let (region, ball) = p.verification_region()?;
    let axes: Vec<Vec<f64>> = region
        .lower
        .iter()
        .zip(&region.upper)
        .map(|(&l, &u)| linspace(l, u, grid.y_points))
        .collect();
    let mut states = Vec::new();
    let mut idx = vec![0usize; p.dim()];
    loop {
        let y: Vec<f64> = idx.iter().zip(&axes).map(|(&i, ax)| ax[i]).collect();
        if ball.is_none_or(|r| linalg::norm(&y) <= r) {
            states.push(y);
        }
        if !advance(&mut idx, grid.y_points) {
            break;
        }
    }
    let times = linspace(0.0, p.horizon, grid.t_points);
    let meta = GridMeta {
        t_points: times.len(),
        y_points: grid.y_points,
        t_range: [0.0, p.horizon],
        lower: region.lower,
        upper: region.upper,
        ball_radius: ball,
        samples: times.len() * states.len(),
    };
    Ok(Sweep {
        times,
        states,
        meta,
    })
}

/// Worst (smallest) slack over the grid; the first grid point wins ties.
fn worst<F>(sw: &Sweep, slack: F) -> (f64, Witness)
where
    F: Fn(f64, &[f64]) -> f64 + Sync,
{
    let per_state: Vec<(f64, f64)> = sw
        .states
        .par_iter()
        .map(|y| {
            let mut best = (f64::INFINITY, 0.0);
            for &t in &sw.times {
                let s = slack(t, y);
                if s < best.0 {
                    best = (s, t);
                }
            }
            best
        })
        .collect();
    let mut margin = f64::INFINITY;
    let mut witness = Witness {
        t: 0.0,
        y: sw.states.first().cloned().unwrap_or_default(),
    };
    for ((s, t), y) in per_state.into_iter().zip(&sw.states) {
        if s < margin {
            margin = s;
            witness = Witness { t, y: y.clone() };
        }
    }
    (margin, witness)
}

/// Sublinear growth: `alpha(t)(1 + |y|) - sup |F(t, y)|` must stay `>= 0`.
pub fn check_growth(p: &InclusionProblem, grid: SamplingGrid) -> Result<VerificationReport> {
    let sw = sweep(p, grid)?;
    let (margin, witness) = worst(&sw, |t, y| {
        p.field.alpha(t) * (1.0 + linalg::norm(y)) - p.field.eval(t, y).max_norm()
    });
    Ok(VerificationReport {
        hypothesis: "F3".into(),
        pass: margin >= 0.0,
        margin,
        witness,
        grid: sw.meta,
        gradient_bound: None,
    })
}

/// Allowance for the non-strict surface inequalities.
const WEAK_TOL: f64 = 1e-12;

/// Ordering and jump compatibility of the surfaces.
pub fn check_surfaces(p: &InclusionProblem, grid: SamplingGrid) -> Result<VerificationReport> {
    let m = p.surface_count();
    if m == 0 {
        return Err(contract("surface check needs at least one surface"));
    }
    // Surfaces are autonomous, so one time sample suffices.
    let sw = sweep(
        p,
        SamplingGrid {
            t_points: 1,
            ..grid
        },
    )?;
    let a = p.horizon;
    let results: Vec<(f64, bool, f64)> = sw
        .states
        .par_iter()
        .map(|y| {
            let tau: Vec<f64> = p.surfaces.iter().map(|s| s.tau(y)).collect();
            let mut strict = vec![tau[0], a - tau[m - 1]];
            strict.extend((0..m - 1).map(|j| tau[j + 1] - tau[j]));
            let mut weak = Vec::with_capacity(m);
            for (j, s) in p.surfaces.iter().enumerate() {
                let jumped = linalg::add(y, &s.impulse(y));
                weak.push(tau[j] - s.tau(&jumped));
                if j + 1 < m {
                    strict.push(p.surfaces[j + 1].tau(&jumped) - tau[j]);
                }
            }
            let ok = strict.iter().all(|&s| s > 0.0) && weak.iter().all(|&w| w >= -WEAK_TOL);
            let slack = strict
                .iter()
                .chain(&weak)
                .copied()
                .fold(f64::INFINITY, f64::min);
            let grad = p
                .surfaces
                .iter()
                .map(|s| linalg::norm(&s.tau_grad(y)))
                .fold(0.0, f64::max);
            (slack, ok, grad)
        })
        .collect();
    let mut margin = f64::INFINITY;
    let mut witness = Witness {
        t: 0.0,
        y: sw.states[0].clone(),
    };
    let mut pass = true;
    let mut gradient_bound: f64 = 0.0;
    for ((slack, ok, grad), y) in results.into_iter().zip(&sw.states) {
        pass &= ok;
        gradient_bound = gradient_bound.max(grad);
        if slack < margin {
            margin = slack;
            witness = Witness {
                t: 0.0,
                y: y.clone(),
            };
        }
    }
    Ok(VerificationReport {
        hypothesis: "H2".into(),
        pass,
        margin,
        witness,
        grid: sw.meta,
        gradient_bound: Some(gradient_bound),
    })
}

/// Transversality: `p_hat = min (1 - support(F(t, y), tau_j'(y)))` must be `> 0`.
pub fn check_transversality(
    p: &InclusionProblem,
    grid: SamplingGrid,
) -> Result<VerificationReport> {
    let sw = sweep(p, grid)?;
    let (margin, witness) = worst(&sw, |t, y| {
        let set = p.field.eval(t, y);
        p.surfaces
            .iter()
            .map(|s| 1.0 - set.support_unchecked(&s.tau_grad(y)))
            .fold(f64::INFINITY, f64::min)
    });
    Ok(VerificationReport {
        hypothesis: "H3".into(),
        pass: margin > 0.0,
        margin,
        witness,
        grid: sw.meta,
        gradient_bound: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::ConvexSet;

    fn singleton_zero(dim: usize) -> SetField {
        SetField::constant(ConvexSet::singleton(vec![0.0; dim]), 1.0)
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        let v = integrate(|t| t.exp(), 0.0, 1.0, 1e-10).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-9);
        let v = integrate(|t| (10.0 * t).sin().abs(), 0.0, 1.0, 1e-10).unwrap();
        let exact = (2.0 * 3.0 + (1.0 - (10.0f64 - 3.0 * std::f64::consts::PI).cos())) / 10.0;
        assert!((v - exact).abs() < 1e-8, "{v} vs {exact}");
        assert!(matches!(
            integrate(|t| 1.0 / t, 0.0, 1.0, 1e-8),
            Err(Error::Quadrature(_))
        ));
    }

    #[test]
    fn gronwall_without_jumps() {
        let p = InclusionProblem::new("g", 1.0, vec![1.0], singleton_zero(1), vec![]).unwrap();
        let b = gronwall_bounds(&p).unwrap();
        assert!((b.k - 3.0 * 1f64.exp()).abs() < 1e-7);
        assert_eq!(b.k, b.k_bar);
    }

    #[test]
    fn gronwall_without_growth() {
        let field = SetField::constant(ConvexSet::singleton(vec![0.0, 0.0]), 0.0);
        let surfaces = vec![
            ImpulseSurface::fixed_time(0.3, |_| vec![1.0, 0.0]),
            ImpulseSurface::fixed_time(0.6, |_| vec![0.0, 2.0]),
        ];
        let p = InclusionProblem::new("g0", 1.0, vec![3.0, 4.0], field, surfaces).unwrap();
        let b = gronwall_bounds(&p).unwrap();
        assert_eq!(b.k, 5.0);
        assert_eq!(b.impulse_bounds, vec![1.0, 2.0]);
        assert_eq!(b.per_jump, vec![6.0, 8.0]);
        assert_eq!(b.k_bar, 8.0);
    }

    #[test]
    fn gradient_check_detects_mismatch() {
        let good = ImpulseSurface::new(
            |y| 0.5 + 0.1 * y[0].tanh(),
            |y| vec![0.1 / y[0].cosh().powi(2)],
            |_| vec![0.0],
        );
        let bad = ImpulseSurface::new(|y| 0.5 + 0.1 * y[0].tanh(), |_| vec![1.0], |_| vec![0.0]);
        assert!(good.gradient_error(&[0.3]) < 1e-5);
        assert!(bad.gradient_error(&[0.3]) > 1e-2);
    }

    #[test]
    fn growth_examples() {
        let region = StateBox {
            lower: vec![-2.0, -2.0],
            upper: vec![2.0, 2.0],
        };
        let p = InclusionProblem::new("zero", 1.0, vec![0.0, 0.0], singleton_zero(2), vec![])
            .unwrap()
            .with_region(region.clone())
            .unwrap();
        let r = check_growth(
            &p,
            SamplingGrid {
                t_points: 3,
                y_points: 5,
            },
        )
        .unwrap();
        assert!(r.pass);
        assert!((r.margin - 1.0).abs() < 1e-15);
        assert_eq!(r.witness.y, vec![0.0, 0.0]);

        let wide = SetField::new(
            2,
            |_, y: &[f64]| ConvexSet::Ball {
                center: vec![0.0, 0.0],
                radius: 2.0 + 2.0 * linalg::norm(y),
            },
            |_| 1.0,
        );
        let at_origin = InclusionProblem::new("wide", 1.0, vec![0.0, 0.0], wide.clone(), vec![])
            .unwrap()
            .with_region(StateBox {
                lower: vec![0.0, 0.0],
                upper: vec![0.0, 0.0],
            })
            .unwrap();
        let r = check_growth(
            &at_origin,
            SamplingGrid {
                t_points: 2,
                y_points: 1,
            },
        )
        .unwrap();
        assert!(!r.pass);
        assert!((r.margin + 1.0).abs() < 1e-12);
        let boxed = InclusionProblem::new("wide", 1.0, vec![0.0, 0.0], wide, vec![])
            .unwrap()
            .with_region(region)
            .unwrap();
        let r = check_growth(
            &boxed,
            SamplingGrid {
                t_points: 2,
                y_points: 9,
            },
        )
        .unwrap();
        assert!(!r.pass && r.margin <= -1.0);
    }

    #[test]
    fn fixed_time_surfaces_pass_with_zero_gradient() {
        let surfaces = vec![
            ImpulseSurface::fixed_time(0.3, |y| vec![y[0]]),
            ImpulseSurface::fixed_time(0.6, |_| vec![-5.0]),
        ];
        let p = InclusionProblem::new("ft", 1.0, vec![0.0], singleton_zero(1), surfaces)
            .unwrap()
            .with_region(StateBox {
                lower: vec![-3.0],
                upper: vec![3.0],
            })
            .unwrap();
        let r = check_surfaces(&p, SamplingGrid::default()).unwrap();
        assert!(r.pass);
        assert_eq!(r.margin, 0.0);
        assert_eq!(r.gradient_bound, Some(0.0));
        let h3 = check_transversality(&p, SamplingGrid::default()).unwrap();
        assert!(h3.pass);
        assert_eq!(h3.margin, 1.0);
    }

    #[test]
    fn misordered_surfaces_fail() {
        let surfaces = vec![
            ImpulseSurface::fixed_time(0.6, |_| vec![0.0]),
            ImpulseSurface::fixed_time(0.3, |_| vec![0.0]),
        ];
        let p = InclusionProblem::new("bad", 1.0, vec![0.0], singleton_zero(1), surfaces)
            .unwrap()
            .with_region(StateBox {
                lower: vec![-1.0],
                upper: vec![1.0],
            })
            .unwrap();
        let r = check_surfaces(&p, SamplingGrid::default()).unwrap();
        assert!(!r.pass);
        assert!((r.margin + 0.3).abs() < 1e-12);
    }

    #[test]
    fn boundary_transversality_fails() {
        let field = SetField::constant(ConvexSet::ball(vec![0.0, 0.0], 2.0).unwrap(), 2.0);
        let s = ImpulseSurface::new(
            |y| 0.5 * y[0] + 0.5,
            |_| vec![0.5, 0.0],
            |_| vec![-0.2, 0.0],
        );
        let p = InclusionProblem::new("edge", 1.0, vec![0.0, 0.0], field, vec![s])
            .unwrap()
            .with_region(StateBox {
                lower: vec![-0.5, -0.5],
                upper: vec![0.5, 0.5],
            })
            .unwrap();
        let r = check_transversality(
            &p,
            SamplingGrid {
                t_points: 2,
                y_points: 5,
            },
        )
        .unwrap();
        assert!(!r.pass);
        assert!(r.margin.abs() < 1e-15);
    }

    #[test]
    fn domain_guard_raises_hypothesis_error() {
        let p = InclusionProblem::new("q", 1.0, vec![-1.0], singleton_zero(1), vec![]).unwrap();
        let err = p
            .with_domain(StateBox {
                lower: vec![0.0],
                upper: vec![f64::INFINITY],
            })
            .unwrap_err();
        assert!(err.is_hypothesis_violation());
    }

    #[test]
    fn report_json_shape() {
        let p = InclusionProblem::new("zero", 1.0, vec![0.0], singleton_zero(1), vec![])
            .unwrap()
            .with_region(StateBox {
                lower: vec![-1.0],
                upper: vec![1.0],
            })
            .unwrap();
        let r = check_growth(
            &p,
            SamplingGrid {
                t_points: 2,
                y_points: 3,
            },
        )
        .unwrap();
        let v = serde_json::to_value(&r).unwrap();
        assert_eq!(v["hypothesis"], "F3");
        assert_eq!(v["pass"], true);
        assert!(v["witness"]["t"].is_number());
        assert!(v["witness"]["y"].is_array());
        assert_eq!(v["grid"]["samples"], 6);
    }
}

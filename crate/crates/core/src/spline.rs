//! Piecewise-cubic Hermite paths with per-segment end slopes.
//!
//! Every segment carries its own start and end derivative, so a path can have
//! derivative jumps at nodes (the integrator restarts there) while the values
//! stay continuous. Storage is flat: node `k` occupies
//! `values[k * dim..(k + 1) * dim]`, segment `k` owns the slopes at the same
//! offset in `slope_start` / `slope_end`.

use crate::error::{contract, domain, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct HermitePath {
    dim: usize,
    grid: Vec<f64>,
    values: Vec<f64>,
    slope_start: Vec<f64>,
    slope_end: Vec<f64>,
}

impl HermitePath {
    /// Builds a path from nodes, nodal values and per-segment `(start, end)` slopes.
    pub fn new(
        dim: usize,
        grid: Vec<f64>,
        values: Vec<f64>,
        slope_start: Vec<f64>,
        slope_end: Vec<f64>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(contract("dimension must be positive"));
        }
        if grid.is_empty() {
            return Err(contract("grid must hold at least one node"));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) || grid.iter().any(|t| !t.is_finite()) {
            return Err(contract(
                "grid times must be finite and strictly increasing",
            ));
        }
        let segs = grid.len() - 1;
        if values.len() != grid.len() * dim
            || slope_start.len() != segs * dim
            || slope_end.len() != segs * dim
        {
            return Err(contract(
                "value/slope arrays do not match grid and dimension",
            ));
        }
        Ok(Self {
            dim,
            grid,
            values,
            slope_start,
            slope_end,
        })
    }

    /// Builds a path from nodal samples only, estimating one continuous slope
    /// per node by second-order finite differences.
    pub fn from_samples(dim: usize, grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = grid.len();
        if dim == 0 || n == 0 || values.len() != n * dim {
            return Err(contract("value array does not match grid and dimension"));
        }
        let mut node_slopes = vec![0.0; n * dim];
        if n >= 2 {
            for k in 0..n {
                for i in 0..dim {
                    node_slopes[k * dim + i] = fd_slope(&grid, &values, dim, k, i);
                }
            }
        }
        let segs = n.saturating_sub(1);
        let mut start = Vec::with_capacity(segs * dim);
        let mut end = Vec::with_capacity(segs * dim);
        for k in 0..segs {
            start.extend_from_slice(&node_slopes[k * dim..(k + 1) * dim]);
            end.extend_from_slice(&node_slopes[(k + 1) * dim..(k + 2) * dim]);
        }
        Self::new(dim, grid, values, start, end)
    }

    /// A constant path on `[t0, t1]`.
    pub fn constant(t0: f64, t1: f64, value: &[f64]) -> Result<Self> {
        let dim = value.len();
        let mut values = value.to_vec();
        values.extend_from_slice(value);
        Self::new(dim, vec![t0, t1], values, vec![0.0; dim], vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn start(&self) -> f64 {
        self.grid[0]
    }

    pub fn end(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn node_count(&self) -> usize {
        self.grid.len()
    }

    pub fn segment_count(&self) -> usize {
        self.grid.len() - 1
    }

    pub fn node_value(&self, k: usize) -> &[f64] {
        &self.values[k * self.dim..(k + 1) * self.dim]
    }

    /// `(start, end)` slopes of segment `k`.
    pub fn segment_slopes(&self, k: usize) -> (&[f64], &[f64]) {
        let r = k * self.dim..(k + 1) * self.dim;
        (&self.slope_start[r.clone()], &self.slope_end[r])
    }

    /// Index of the segment used to evaluate at `t` (the one with
    /// `grid[k] <= t < grid[k + 1]`, the last segment at the right end).
    pub fn segment_of(&self, t: f64) -> usize {
        let segs = self.segment_count();
        let k = self.grid.partition_point(|&g| g <= t);
        k.saturating_sub(1).min(segs.saturating_sub(1))
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        self.check_span(t)?;
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out);
        Ok(out)
    }

    /// Evaluates without a span check; `t` is clamped into the path.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) {
        if self.grid.len() == 1 {
            out.copy_from_slice(self.node_value(0));
            return;
        }
        let k = self.segment_of(t);
        self.eval_on_segment(k, t.clamp(self.start(), self.end()), out);
    }

    pub fn derivative(&self, t: f64) -> Result<Vec<f64>> {
        self.check_span(t)?;
        let mut out = vec![0.0; self.dim];
        if self.grid.len() > 1 {
            let k = self.segment_of(t);
            self.derivative_on_segment(k, t, &mut out);
        }
        Ok(out)
    }

    /// Evaluates the cubic of segment `k` at `t` (which may lie on its end node).
    pub fn eval_on_segment(&self, k: usize, t: f64, out: &mut [f64]) {
        let t0 = self.grid[k];
        let t1 = self.grid[k + 1];
        if t == t0 {
            out.copy_from_slice(self.node_value(k));
            return;
        }
        if t == t1 {
            out.copy_from_slice(self.node_value(k + 1));
            return;
        }
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (h00, h10, h01, h11) = hermite_basis(s);
        let y0 = self.node_value(k);
        let y1 = self.node_value(k + 1);
        let (d0, d1) = self.segment_slopes(k);
        for i in 0..self.dim {
            out[i] = h00 * y0[i] + h10 * h * d0[i] + h01 * y1[i] + h11 * h * d1[i];
        }
    }

    pub fn derivative_on_segment(&self, k: usize, t: f64, out: &mut [f64]) {
        let t0 = self.grid[k];
        let h = self.grid[k + 1] - t0;
        let s = (t - t0) / h;
        let g00 = 6.0 * s * s - 6.0 * s;
        let g10 = 3.0 * s * s - 4.0 * s + 1.0;
        let g01 = -g00;
        let g11 = 3.0 * s * s - 2.0 * s;
        let y0 = self.node_value(k);
        let y1 = self.node_value(k + 1);
        let (d0, d1) = self.segment_slopes(k);
        for i in 0..self.dim {
            out[i] = (g00 * y0[i] + g01 * y1[i]) / h + g10 * d0[i] + g11 * d1[i];
        }
    }

    fn check_span(&self, t: f64) -> Result<()> {
        if !(t >= self.start() && t <= self.end()) {
            return Err(domain(format!(
                "t = {t} outside [{}, {}]",
                self.start(),
                self.end()
            )));
        }
        Ok(())
    }

    /// Exact supremum of the Euclidean norm over the whole path.
    ///
    /// Node values give a lower bound; a segment is only examined in detail
    /// when the convex hull of its Bézier control points can exceed it.
    pub fn sup_norm(&self) -> f64 {
        let dim = self.dim;
        let mut best = (0..self.node_count())
            .map(|k| sq_norm(self.node_value(k)))
            .fold(0.0, f64::max);
        let mut ctrl = vec![0.0; 4 * dim];
        for k in 0..self.segment_count() {
            self.bezier_controls(k, &mut ctrl);
            let bound = ctrl.chunks_exact(dim).map(sq_norm).fold(0.0, f64::max);
            if bound <= best {
                continue;
            }
            best = best.max(segment_max_sq_norm(&ctrl, dim));
        }
        best.sqrt()
    }

    /// Maximum norm over the nodes and the segment interiors, restricted to
    /// `[from, to]`.
    pub fn sup_norm_between(&self, from: f64, to: f64) -> Result<f64> {
        let piece = self.restrict(from, to)?;
        Ok(piece.sup_norm())
    }

    fn bezier_controls(&self, k: usize, ctrl: &mut [f64]) {
        let dim = self.dim;
        let h = self.grid[k + 1] - self.grid[k];
        let y0 = self.node_value(k);
        let y1 = self.node_value(k + 1);
        let (d0, d1) = self.segment_slopes(k);
        for i in 0..dim {
            ctrl[i] = y0[i];
            ctrl[dim + i] = y0[i] + h * d0[i] / 3.0;
            ctrl[2 * dim + i] = y1[i] - h * d1[i] / 3.0;
            ctrl[3 * dim + i] = y1[i];
        }
    }

    /// The same path on `[from, to]`, exact (cubics restricted, not refit).
    pub fn restrict(&self, from: f64, to: f64) -> Result<Self> {
        if !(from <= to) || from < self.start() || to > self.end() {
            return Err(domain(format!(
                "[{from}, {to}] not inside [{}, {}]",
                self.start(),
                self.end()
            )));
        }
        let dim = self.dim;
        if from == to {
            let v = self.eval(from)?;
            return Self::new(dim, vec![from], v, vec![], vec![]);
        }
        let mut grid = vec![from];
        grid.extend(self.grid.iter().copied().filter(|&g| g > from && g < to));
        grid.push(to);
        let mut values = Vec::with_capacity(grid.len() * dim);
        let mut s0 = Vec::with_capacity((grid.len() - 1) * dim);
        let mut s1 = Vec::with_capacity((grid.len() - 1) * dim);
        let mut buf = vec![0.0; dim];
        for (j, w) in grid.windows(2).enumerate() {
            let k = self.segment_of(w[0]);
            if j == 0 {
                self.eval_on_segment(k, w[0], &mut buf);
                values.extend_from_slice(&buf);
            }
            self.eval_on_segment(k, w[1], &mut buf);
            values.extend_from_slice(&buf);
            self.derivative_on_segment(k, w[0], &mut buf);
            s0.extend_from_slice(&buf);
            self.derivative_on_segment(k, w[1], &mut buf);
            s1.extend_from_slice(&buf);
        }
        Self::new(dim, grid, values, s0, s1)
    }

    /// `alpha * self + beta * other` on the union of both grids. Both paths
    /// must span the same interval.
    pub fn lin_comb(alpha: f64, a: &Self, beta: f64, b: &Self) -> Result<Self> {
        if a.dim != b.dim {
            return Err(contract(format!(
                "dimension mismatch: {} vs {}",
                a.dim, b.dim
            )));
        }
        if a.start() != b.start() || a.end() != b.end() {
            return Err(contract(format!(
                "span mismatch: [{}, {}] vs [{}, {}]",
                a.start(),
                a.end(),
                b.start(),
                b.end()
            )));
        }
        let dim = a.dim;
        if a.node_count() == 1 {
            let values = a
                .node_value(0)
                .iter()
                .zip(b.node_value(0))
                .map(|(x, y)| alpha * x + beta * y)
                .collect();
            return Self::new(dim, a.grid.clone(), values, vec![], vec![]);
        }
        let grid = merge_grids(&a.grid, &b.grid);
        let segs = grid.len() - 1;
        let mut values = Vec::with_capacity(grid.len() * dim);
        let mut s0 = Vec::with_capacity(segs * dim);
        let mut s1 = Vec::with_capacity(segs * dim);
        let mut va = vec![0.0; dim];
        let mut vb = vec![0.0; dim];
        let (mut ka, mut kb) = (0usize, 0usize);
        for j in 0..segs {
            let (u0, u1) = (grid[j], grid[j + 1]);
            while ka + 1 < a.segment_count() && a.grid[ka + 1] <= u0 {
                ka += 1;
            }
            while kb + 1 < b.segment_count() && b.grid[kb + 1] <= u0 {
                kb += 1;
            }
            if j == 0 {
                a.eval_on_segment(ka, u0, &mut va);
                b.eval_on_segment(kb, u0, &mut vb);
                values.extend(va.iter().zip(&vb).map(|(x, y)| alpha * x + beta * y));
            }
            a.eval_on_segment(ka, u1, &mut va);
            b.eval_on_segment(kb, u1, &mut vb);
            values.extend(va.iter().zip(&vb).map(|(x, y)| alpha * x + beta * y));
            a.derivative_on_segment(ka, u0, &mut va);
            b.derivative_on_segment(kb, u0, &mut vb);
            s0.extend(va.iter().zip(&vb).map(|(x, y)| alpha * x + beta * y));
            a.derivative_on_segment(ka, u1, &mut va);
            b.derivative_on_segment(kb, u1, &mut vb);
            s1.extend(va.iter().zip(&vb).map(|(x, y)| alpha * x + beta * y));
        }
        Self::new(dim, grid, values, s0, s1)
    }

    /// Pointwise `c * self`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
            slope_start: self.slope_start.iter().map(|v| c * v).collect(),
            slope_end: self.slope_end.iter().map(|v| c * v).collect(),
        }
    }

    /// Adds a constant vector to every value (slopes unchanged).
    pub fn shifted(&self, offset: &[f64]) -> Self {
        let mut out = self.clone();
        for chunk in out.values.chunks_exact_mut(self.dim) {
            for (v, o) in chunk.iter_mut().zip(offset) {
                *v += o;
            }
        }
        out
    }

    /// Joins paths end to start. Consecutive pieces must meet at the same
    /// time with values agreeing to `value_tol`; the shared node keeps the
    /// earlier piece's value.
    pub fn concat(pieces: &[Self], value_tol: f64) -> Result<Self> {
        let first = pieces
            .first()
            .ok_or_else(|| contract("cannot concatenate zero pieces"))?;
        let dim = first.dim;
        let mut grid = first.grid.clone();
        let mut values = first.values.clone();
        let mut s0 = first.slope_start.clone();
        let mut s1 = first.slope_end.clone();
        for p in &pieces[1..] {
            if p.dim != dim {
                return Err(contract("dimension mismatch while concatenating"));
            }
            if p.start() != *grid.last().unwrap() {
                return Err(contract(format!(
                    "pieces do not meet: {} vs {}",
                    grid.last().unwrap(),
                    p.start()
                )));
            }
            let last = &values[values.len() - dim..];
            let gap = last
                .iter()
                .zip(p.node_value(0))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if gap > value_tol {
                return Err(contract(format!(
                    "pieces disagree at t = {} by {gap:e}",
                    p.start()
                )));
            }
            grid.extend_from_slice(&p.grid[1..]);
            values.extend_from_slice(&p.values[dim..]);
            s0.extend_from_slice(&p.slope_start);
            s1.extend_from_slice(&p.slope_end);
        }
        Self::new(dim, grid, values, s0, s1)
    }

    pub fn values_flat(&self) -> &[f64] {
        &self.values
    }

    pub fn slopes_flat(&self) -> (&[f64], &[f64]) {
        (&self.slope_start, &self.slope_end)
    }
}

fn hermite_basis(s: f64) -> (f64, f64, f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    (
        2.0 * s3 - 3.0 * s2 + 1.0,
        s3 - 2.0 * s2 + s,
        -2.0 * s3 + 3.0 * s2,
        s3 - s2,
    )
}

fn fd_slope(grid: &[f64], values: &[f64], dim: usize, k: usize, i: usize) -> f64 {
    let n = grid.len();
    let v = |j: usize| values[j * dim + i];
    if n == 2 {
        return (v(1) - v(0)) / (grid[1] - grid[0]);
    }
    // Three-point Lagrange derivative on a possibly non-uniform stencil.
    let (j0, j1, j2) = if k == 0 {
        (0, 1, 2)
    } else if k == n - 1 {
        (n - 3, n - 2, n - 1)
    } else {
        (k - 1, k, k + 1)
    };
    let (x0, x1, x2) = (grid[j0], grid[j1], grid[j2]);
    let x = grid[k];
    let l0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
    let l1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
    let l2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
    l0 * v(j0) + l1 * v(j1) + l2 * v(j2)
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn merge_grids(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) if x < y => {
                i += 1;
                x
            }
            (Some(&x), Some(&y)) if y < x => {
                j += 1;
                y
            }
            (Some(&x), Some(_)) => {
                i += 1;
                j += 1;
                x
            }
            (Some(&x), None) => {
                i += 1;
                x
            }
            (None, Some(&y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        out.push(next);
    }
    out
}

/// Maximum of `|p(s)|^2` over `s in [0, 1]` for the cubic Bézier curve with
/// control points `ctrl` (four consecutive points of length `dim`).
fn segment_max_sq_norm(ctrl: &[f64], dim: usize) -> f64 {
    // |p(s)|^2 as a degree-6 polynomial in power form.
    let mut q = [0.0f64; 7];
    for i in 0..dim {
        let p0 = ctrl[i];
        let p1 = ctrl[dim + i];
        let p2 = ctrl[2 * dim + i];
        let p3 = ctrl[3 * dim + i];
        let c = [
            p0,
            3.0 * (p1 - p0),
            3.0 * (p2 - 2.0 * p1 + p0),
            p3 - 3.0 * p2 + 3.0 * p1 - p0,
        ];
        for a in 0..4 {
            for b in 0..4 {
                q[a + b] += c[a] * c[b];
            }
        }
    }
    let dq: Vec<f64> = (1..7).map(|k| k as f64 * q[k]).collect();
    let mut best = poly_eval(&q, 0.0).max(poly_eval(&q, 1.0));
    for s in real_roots_in(&dq, 0.0, 1.0) {
        best = best.max(poly_eval(&q, s));
    }
    best
}

/// Horner evaluation; `coeffs[k]` multiplies `x^k`.
pub(crate) fn poly_eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// All real roots of a polynomial in `[lo, hi]`, isolated through the roots
/// of its derivative (between consecutive critical points the polynomial is
/// monotone, so each sign change holds exactly one root).
pub(crate) fn real_roots_in(coeffs: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut deg = coeffs.len();
    while deg > 0 && coeffs[deg - 1] == 0.0 {
        deg -= 1;
    }
    let c = &coeffs[..deg];
    match deg {
        0 | 1 => return vec![],
        2 => {
            let r = -c[0] / c[1];
            return if r >= lo && r <= hi { vec![r] } else { vec![] };
        }
        _ => {}
    }
    let d: Vec<f64> = (1..deg).map(|k| k as f64 * c[k]).collect();
    let mut knots = vec![lo];
    knots.extend(real_roots_in(&d, lo, hi));
    knots.push(hi);
    let mut roots = Vec::new();
    for w in knots.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (mut fa, fb) = (poly_eval(c, a), poly_eval(c, b));
        if fa == 0.0 {
            if roots.last() != Some(&a) {
                roots.push(a);
            }
            continue;
        }
        if fb == 0.0 {
            roots.push(b);
            continue;
        }
        if fa.signum() == fb.signum() {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = poly_eval(c, m);
            if fm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(dim_vals: &[(f64, f64)]) -> HermitePath {
        // scalar path through the given (t, y) nodes
        let grid = dim_vals.iter().map(|p| p.0).collect();
        let values = dim_vals.iter().map(|p| p.1).collect();
        HermitePath::from_samples(1, grid, values).unwrap()
    }

    #[test]
    fn nodes_reproduce_values_exactly() {
        let p = line(&[(0.0, 0.1), (0.3, 0.7), (0.55, -0.2), (1.0, 0.4)]);
        for (k, &t) in p.grid().iter().enumerate() {
            assert_eq!(p.eval(t).unwrap()[0], p.node_value(k)[0]);
        }
    }

    #[test]
    fn rejects_non_increasing_grid() {
        assert!(HermitePath::from_samples(1, vec![0.0, 0.5, 0.5], vec![0.0; 3]).is_err());
    }

    #[test]
    fn cubic_reproduced_exactly() {
        // y = t^3 - t with exact slopes
        let grid = vec![0.0, 0.4, 1.0];
        let f = |t: f64| t * t * t - t;
        let df = |t: f64| 3.0 * t * t - 1.0;
        let values = grid.iter().map(|&t| f(t)).collect();
        let p = HermitePath::new(
            1,
            grid,
            values,
            vec![df(0.0), df(0.4)],
            vec![df(0.4), df(1.0)],
        )
        .unwrap();
        for i in 0..=50 {
            let t = i as f64 / 50.0;
            assert!((p.eval(t).unwrap()[0] - f(t)).abs() < 1e-14);
        }
        // sup |t^3 - t| on [0,1] is at t = 1/sqrt(3)
        let s = 1.0 / 3f64.sqrt();
        assert!((p.sup_norm() - (s - s * s * s)).abs() < 1e-14);
    }

    #[test]
    fn sup_norm_of_circle_arc() {
        // quarter-circle-ish vector cubic: the sup lies inside a segment
        let p = HermitePath::new(
            2,
            vec![0.0, 1.0],
            vec![1.0, 0.0, 0.0, 1.0],
            vec![0.0, 2.0],
            vec![-2.0, 0.0],
        )
        .unwrap();
        let brute = (0..=100_000)
            .map(|i| {
                let v = p.eval(i as f64 / 100_000.0).unwrap();
                (v[0] * v[0] + v[1] * v[1]).sqrt()
            })
            .fold(0.0, f64::max);
        let s = p.sup_norm();
        assert!(s >= brute - 1e-12 && s - brute < 1e-9, "{s} vs {brute}");
    }

    #[test]
    fn lin_comb_matches_pointwise() {
        let a = line(&[(0.0, 0.0), (0.2, 1.0), (0.7, 0.3), (1.0, 0.9)]);
        let b = line(&[(0.0, 1.0), (0.5, -1.0), (1.0, 2.0)]);
        let d = HermitePath::lin_comb(2.0, &a, -0.5, &b).unwrap();
        for i in 0..=40 {
            let t = i as f64 / 40.0;
            let want = 2.0 * a.eval(t).unwrap()[0] - 0.5 * b.eval(t).unwrap()[0];
            assert!((d.eval(t).unwrap()[0] - want).abs() < 1e-13);
        }
    }

    #[test]
    fn restrict_is_exact() {
        let a = line(&[(0.0, 0.0), (0.2, 1.0), (0.7, 0.3), (1.0, 0.9)]);
        let r = a.restrict(0.1, 0.8).unwrap();
        for i in 0..=20 {
            let t = 0.1 + 0.7 * i as f64 / 20.0;
            assert!((r.eval(t).unwrap()[0] - a.eval(t).unwrap()[0]).abs() < 1e-13);
        }
    }

    #[test]
    fn roots_of_quintic() {
        // (x-0.1)(x-0.3)(x-0.5)(x-0.7)(x-0.9)
        let mut c = vec![1.0];
        for r in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let mut next = vec![0.0; c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= r * ck;
            }
            c = next;
        }
        let roots = real_roots_in(&c, 0.0, 1.0);
        assert_eq!(roots.len(), 5);
        for (got, want) in roots.iter().zip([0.1, 0.3, 0.5, 0.7, 0.9]) {
            assert!((got - want).abs() < 1e-12);
        }
    }
}

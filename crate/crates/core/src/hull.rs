//! Step functions and continuous piecewise-linear functions on `[0, 1]`.
//!
//! A [`StepFn`] takes the value `v_i` on the left-open, right-closed cell
//! `(u_{i-1}, u_i]`. Its antiderivative is a [`PiecewiseLinearFn`], and the
//! greatest convex minorant of a piecewise-linear function is the lower hull of
//! its vertex set, so everything here is exact up to floating-point rounding.

use std::ops::{Add, Sub};

use serde::Serialize;

use crate::error::{check_p, Error, Result};

/// Breakpoints closer than this are treated as one when refining partitions.
pub const BREAK_MERGE_TOL: f64 = 1e-13;

/// Relative tolerance (against the largest `|y|` of the triple) below which a
/// vertex counts as lying on the chord of its neighbours.
pub const COLLINEAR_TOL: f64 = 1e-12;

/// Piecewise-constant function on `(0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFn {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl StepFn {
    /// `breaks` must run strictly increasing from 0 to 1 and carry one more
    /// entry than `values`.
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidStepFn("no cells".into()));
        }
        if breaks.len() != values.len() + 1 {
            return Err(Error::InvalidStepFn(format!(
                "{} breakpoints for {} values",
                breaks.len(),
                values.len()
            )));
        }
        if breaks.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "step function",
            });
        }
        if breaks[0] != 0.0 || *breaks.last().unwrap() != 1.0 {
            return Err(Error::InvalidStepFn(
                "breakpoints must start at 0 and end at 1".into(),
            ));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidStepFn(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Self { breaks, values })
    }

    pub(crate) fn from_raw(breaks: Vec<f64>, values: Vec<f64>) -> Self {
        debug_assert_eq!(breaks.len(), values.len() + 1);
        debug_assert!(breaks.windows(2).all(|w| w[0] < w[1]), "{breaks:?}");
        Self { breaks, values }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_raw(vec![0.0, 1.0], vec![c])
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of cells.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Iterates `(lo, hi, value)` over the cells.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breaks
            .windows(2)
            .zip(&self.values)
            .map(|(w, &v)| (w[0], w[1], v))
    }

    /// Left-continuous evaluation. Arguments outside `(0, 1]` are clamped to the
    /// first or last cell.
    pub fn eval(&self, u: f64) -> f64 {
        let i = self.breaks[1..].partition_point(|&b| b < u);
        self.values[i.min(self.values.len() - 1)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> StepFn {
        Self::from_raw(
            self.breaks.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Combines two step functions cell by cell over their common refinement.
    pub fn zip_with(&self, other: &StepFn, f: impl Fn(f64, f64) -> f64) -> StepFn {
        let breaks = common_refinement(&self.breaks, &other.breaks);
        let mut values = Vec::with_capacity(breaks.len() - 1);
        let (mut i, mut j) = (0, 0);
        for w in breaks.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            while self.breaks[i + 1] < mid {
                i += 1;
            }
            while other.breaks[j + 1] < mid {
                j += 1;
            }
            values.push(f(self.values[i], other.values[j]));
        }
        Self::from_raw(breaks, values)
    }

    pub fn integral(&self) -> f64 {
        self.cells().map(|(lo, hi, v)| v * (hi - lo)).sum()
    }

    /// `(∫_0^1 |f|^p)^{1/p}`, exact for step functions.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        check_p(p)?;
        Ok(lp_of_cells(self.cells().map(|(lo, hi, v)| (hi - lo, v)), p))
    }

    /// The function `u ↦ y0 + ∫_0^u f`.
    pub fn antiderivative(&self, y0: f64) -> PiecewiseLinearFn {
        let mut vertices = Vec::with_capacity(self.breaks.len());
        vertices.push(Vertex { u: 0.0, y: y0 });
        let mut y = y0;
        for (lo, hi, v) in self.cells() {
            y += v * (hi - lo);
            vertices.push(Vertex { u: hi, y });
        }
        PiecewiseLinearFn::from_raw(canonicalize(vertices))
    }
}

impl Sub for &StepFn {
    type Output = StepFn;

    fn sub(self, rhs: &StepFn) -> StepFn {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Add for &StepFn {
    type Output = StepFn;

    fn add(self, rhs: &StepFn) -> StepFn {
        self.zip_with(rhs, |a, b| a + b)
    }
}

/// `(Σ width·|v|^p)^{1/p}` over `(width, value)` pairs.
pub(crate) fn lp_of_cells(cells: impl Iterator<Item = (f64, f64)>, p: f64) -> f64 {
    if p == 1.0 {
        cells.map(|(w, v)| w * v.abs()).sum()
    } else if p == 2.0 {
        cells.map(|(w, v)| w * v * v).sum::<f64>().sqrt()
    } else {
        cells
            .map(|(w, v)| w * v.abs().powf(p))
            .sum::<f64>()
            .powf(p.recip())
    }
}

/// Sorted union of two partitions of `[0, 1]`, merging breakpoints closer than
/// [`BREAK_MERGE_TOL`]. Both inputs must start at 0 and end at 1.
pub fn common_refinement(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = if j >= b.len() || (i < a.len() && a[i] <= b[j]) {
            i += 1;
            a[i - 1]
        } else {
            j += 1;
            b[j - 1]
        };
        match out.last() {
            Some(&last) if next - last <= BREAK_MERGE_TOL => {}
            _ => out.push(next),
        }
    }
    // A breakpoint just below 1 may have absorbed the endpoint.
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Vertex {
    pub u: f64,
    pub y: f64,
}

impl Vertex {
    pub fn new(u: f64, y: f64) -> Self {
        Self { u, y }
    }
}

impl From<(f64, f64)> for Vertex {
    fn from((u, y): (f64, f64)) -> Self {
        Self { u, y }
    }
}

/// Signed vertical distance of `b` above the chord from `a` to `c`.
fn chord_gap(a: Vertex, b: Vertex, c: Vertex) -> f64 {
    let t = (b.u - a.u) / (c.u - a.u);
    b.y - (a.y + t * (c.y - a.y))
}

fn collinear_tol(a: Vertex, b: Vertex, c: Vertex) -> f64 {
    COLLINEAR_TOL * a.y.abs().max(b.y.abs()).max(c.y.abs())
}

/// Drops vertices lying on the chord of their neighbours.
fn canonicalize(vertices: Vec<Vertex>) -> Vec<Vertex> {
    let mut out: Vec<Vertex> = Vec::with_capacity(vertices.len());
    for v in vertices {
        out.push(v);
        while out.len() >= 3 {
            let n = out.len();
            let (a, b, c) = (out[n - 3], out[n - 2], out[n - 1]);
            if chord_gap(a, b, c).abs() <= collinear_tol(a, b, c) {
                out.remove(n - 2);
            } else {
                break;
            }
        }
    }
    out
}

/// Lower convex hull of points sorted strictly increasing in `u`, by a single
/// monotone-chain pass. Points on a hull edge (within [`COLLINEAR_TOL`]) are
/// dropped.
pub fn lower_hull(points: &[Vertex]) -> Vec<Vertex> {
    let mut hull: Vec<Vertex> = Vec::with_capacity(points.len());
    for &p in points {
        while hull.len() >= 2 {
            let n = hull.len();
            let (a, b) = (hull[n - 2], hull[n - 1]);
            if chord_gap(a, b, p) < -collinear_tol(a, b, p) {
                break;
            }
            hull.pop();
        }
        hull.push(p);
    }
    hull
}

/// Continuous piecewise-linear function on `[0, 1]`, stored by its vertices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseLinearFn {
    vertices: Vec<Vertex>,
}

impl PiecewiseLinearFn {
    /// Vertices must be strictly increasing in `u`, starting at `u = 0` and
    /// ending at `u = 1`. Collinear interior vertices are removed.
    pub fn new(vertices: Vec<Vertex>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::InvalidPiecewiseLinear(
                "need at least two vertices".into(),
            ));
        }
        if vertices
            .iter()
            .any(|v| !v.u.is_finite() || !v.y.is_finite())
        {
            return Err(Error::NonFinite {
                what: "piecewise-linear function",
            });
        }
        if vertices[0].u != 0.0 || vertices.last().unwrap().u != 1.0 {
            return Err(Error::InvalidPiecewiseLinear(
                "domain must be [0, 1]".into(),
            ));
        }
        if vertices.windows(2).any(|w| w[1].u <= w[0].u) {
            return Err(Error::InvalidPiecewiseLinear(
                "abscissae must be strictly increasing".into(),
            ));
        }
        Ok(Self::from_raw(canonicalize(vertices)))
    }

    pub(crate) fn from_raw(vertices: Vec<Vertex>) -> Self {
        Self { vertices }
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn eval(&self, u: f64) -> f64 {
        let v = &self.vertices;
        let i = v[1..v.len() - 1].partition_point(|p| p.u < u);
        let (a, b) = (v[i], v[i + 1]);
        a.y + (u - a.u) * (b.y - a.y) / (b.u - a.u)
    }

    /// `co(F)`: the greatest convex function below `F`.
    pub fn lower_convex_hull(&self) -> PiecewiseLinearFn {
        Self::from_raw(lower_hull(&self.vertices))
    }

    /// Segment slopes as a step function on the vertex partition.
    pub fn right_derivative(&self) -> StepFn {
        let breaks = self.vertices.iter().map(|v| v.u).collect();
        let slopes = self
            .vertices
            .windows(2)
            .map(|w| (w[1].y - w[0].y) / (w[1].u - w[0].u))
            .collect();
        StepFn::from_raw(breaks, slopes)
    }

    pub fn is_convex(&self, tol: f64) -> bool {
        self.right_derivative()
            .values()
            .windows(2)
            .all(|w| w[1] >= w[0] - tol)
    }

    pub fn min_vertex_value(&self) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.y)
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pl(points: &[(f64, f64)]) -> PiecewiseLinearFn {
        PiecewiseLinearFn::new(points.iter().copied().map(Vertex::from).collect()).unwrap()
    }

    fn step(breaks: &[f64], values: &[f64]) -> StepFn {
        StepFn::new(breaks.to_vec(), values.to_vec()).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-14
    }

    #[test]
    fn antiderivative_of_constant() {
        let f = StepFn::constant(1.0).antiderivative(0.0);
        assert_eq!(
            f.vertices(),
            &[Vertex::new(0.0, 0.0), Vertex::new(1.0, 1.0)]
        );
    }

    #[test]
    fn antiderivative_of_two_point_quantile_difference() {
        let f = step(&[0.0, 0.5, 1.0], &[0.25, -1.0]).antiderivative(0.0);
        let v = f.vertices();
        assert_eq!(v.len(), 3);
        assert!(close(v[1].u, 0.5) && close(v[1].y, 0.125));
        assert!(close(v[2].u, 1.0) && close(v[2].y, -0.375));
    }

    #[test]
    fn antiderivative_tent() {
        let f = step(&[0.0, 0.5, 1.0], &[1.0, -1.0]).antiderivative(0.0);
        assert_eq!(f.vertices()[1], Vertex::new(0.5, 0.5));
        assert_eq!(f.vertices()[2], Vertex::new(1.0, 0.0));
    }

    #[test]
    fn antiderivative_merges_equal_cells() {
        let f = step(&[0.0, 0.25, 0.5, 1.0], &[2.0, 2.0, 2.0]).antiderivative(1.0);
        assert_eq!(
            f.vertices(),
            &[Vertex::new(0.0, 1.0), Vertex::new(1.0, 3.0)]
        );
    }

    #[test]
    fn hull_of_convex_input_is_identity() {
        let pts: Vec<_> = (0..=10)
            .map(|i| (i as f64 / 10.0, (i as f64 / 10.0).powi(2)))
            .collect();
        let f = pl(&pts);
        assert_eq!(f.lower_convex_hull(), f);
    }

    #[test]
    fn hull_of_tent_is_chord() {
        let h = pl(&[(0.0, 0.0), (0.5, 0.5), (1.0, 0.0)]).lower_convex_hull();
        assert_eq!(
            h.vertices(),
            &[Vertex::new(0.0, 0.0), Vertex::new(1.0, 0.0)]
        );
        assert_eq!(h.right_derivative().values(), &[0.0]);
    }

    #[test]
    fn hull_of_two_point_difference_is_chord() {
        let g = step(&[0.0, 0.5, 1.0], &[0.25, -1.0]).antiderivative(0.0);
        let h = g.lower_convex_hull();
        assert_eq!(h.vertices().len(), 2);
        let d = h.right_derivative();
        assert_eq!(d.len(), 1);
        assert!(close(d.values()[0], -0.375));
    }

    #[test]
    fn right_derivative_of_chord() {
        let d = pl(&[(0.0, 0.0), (1.0, 3.0)]).right_derivative();
        assert_eq!(d.values(), &[3.0]);
        assert_eq!(d.breaks(), &[0.0, 1.0]);
    }

    #[test]
    fn lp_norm_examples() {
        assert!(close(StepFn::constant(-3.0).lp_norm(2.5).unwrap(), 3.0));
        let f = step(&[0.0, 0.5, 1.0], &[1.0, -1.0]);
        assert!(close(f.lp_norm(2.0).unwrap(), 1.0));
        let g = step(&[0.0, 0.5, 1.0], &[0.625, 0.625]);
        assert!(close(g.lp_norm(1.0).unwrap(), 0.625));
    }

    #[test]
    fn lp_norm_rejects_small_p() {
        assert_eq!(
            StepFn::constant(1.0).lp_norm(0.5),
            Err(Error::InvalidP(0.5))
        );
        assert!(StepFn::constant(1.0).lp_norm(f64::NAN).is_err());
    }

    #[test]
    fn step_eval_is_left_continuous() {
        let f = step(&[0.0, 0.5, 1.0], &[1.0, 2.0]);
        assert_eq!(f.eval(0.5), 1.0);
        assert_eq!(f.eval(0.5000001), 2.0);
        assert_eq!(f.eval(1.0), 2.0);
        assert_eq!(f.eval(0.0), 1.0);
    }

    #[test]
    fn refinement_merges_near_duplicates() {
        let r = common_refinement(&[0.0, 0.3, 1.0], &[0.0, 0.3 + 1e-15, 0.7, 1.0 - 1e-15, 1.0]);
        assert_eq!(r, vec![0.0, 0.3, 0.7, 1.0]);
    }

    #[test]
    fn zip_with_uses_common_refinement() {
        let f = step(&[0.0, 0.5, 1.0], &[1.0, 2.0]);
        let g = step(&[0.0, 0.25, 1.0], &[10.0, 20.0]);
        let d = &g - &f;
        assert_eq!(d.breaks(), &[0.0, 0.25, 0.5, 1.0]);
        assert_eq!(d.values(), &[9.0, 19.0, 18.0]);
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(StepFn::new(vec![0.0, 1.0], vec![]).is_err());
        assert!(StepFn::new(vec![0.0, 0.6, 0.5, 1.0], vec![1.0, 1.0, 1.0]).is_err());
        assert!(StepFn::new(vec![0.1, 1.0], vec![1.0]).is_err());
        assert!(PiecewiseLinearFn::new(vec![Vertex::new(0.0, 0.0)]).is_err());
        assert!(
            PiecewiseLinearFn::new(vec![Vertex::new(0.0, 0.0), Vertex::new(0.9, 1.0)]).is_err()
        );
    }

    #[test]
    fn eval_interpolates() {
        let f = pl(&[(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]);
        assert!(close(f.eval(0.25), 0.5));
        assert!(close(f.eval(0.75), 0.5));
        assert!(close(f.eval(1.0), 0.0));
    }
}

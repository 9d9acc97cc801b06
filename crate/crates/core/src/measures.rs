//! Finitely supported probability measures on the line and their quantile
//! functions.
//!
//! Quantile functions are left-continuous: a measure with atoms `x_1 < … < x_k`
//! and cumulative weights `c_i` has quantile `x_i` on `(c_{i-1}, c_i]`.

use serde::{Deserialize, Serialize};

use crate::error::{check_p, Error, Result};
use crate::hull::{common_refinement, StepFn};

/// Atoms closer than this are merged into one.
pub const ATOM_MERGE_TOL: f64 = 1e-12;

/// Slack allowed when checking that a piecewise-linear quantile is non-decreasing
/// across its jumps.
const MONOTONE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: f64,
    pub w: f64,
}

/// A probability measure with finitely many atoms, sorted strictly increasing,
/// positive weights summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteMeasure {
    atoms: Vec<Atom>,
}

impl DiscreteMeasure {
    /// Sorts, merges atoms within [`ATOM_MERGE_TOL`] (at their weighted mean
    /// position) and renormalizes the weights.
    pub fn from_atoms<I>(raw: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut atoms: Vec<Atom> = raw.into_iter().map(|(x, w)| Atom { x, w }).collect();
        if atoms.is_empty() {
            return Err(Error::EmptyInput);
        }
        for (index, a) in atoms.iter().enumerate() {
            if !a.x.is_finite() || !a.w.is_finite() {
                return Err(Error::NonFinite { what: "atom" });
            }
            if a.w <= 0.0 {
                return Err(Error::NonPositiveWeight { index, weight: a.w });
            }
        }
        atoms.sort_by(|a, b| a.x.total_cmp(&b.x));

        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        let mut last_x = f64::NEG_INFINITY;
        for a in atoms {
            match merged.last_mut() {
                Some(m) if a.x - last_x <= ATOM_MERGE_TOL => {
                    let w = m.w + a.w;
                    m.x = (m.x * m.w + a.x * a.w) / w;
                    m.w = w;
                }
                _ => merged.push(a),
            }
            last_x = a.x;
        }

        let total: f64 = merged.iter().map(|a| a.w).sum();
        for a in &mut merged {
            a.w /= total;
        }
        Ok(Self { atoms: merged })
    }

    pub fn dirac(x: f64) -> Self {
        Self {
            atoms: vec![Atom { x, w: 1.0 }],
        }
    }

    /// Equal weights on the given positions.
    pub fn uniform(xs: &[f64]) -> Result<Self> {
        Self::from_atoms(xs.iter().map(|&x| (x, 1.0)))
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn barycenter(&self) -> f64 {
        self.atoms.iter().map(|a| a.w * a.x).sum()
    }

    pub fn shifted(&self, dx: f64) -> Self {
        Self {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    x: a.x + dx,
                    w: a.w,
                })
                .collect(),
        }
    }

    /// Left-continuous quantile function.
    pub fn quantile(&self) -> StepQuantile {
        let mut breaks = Vec::with_capacity(self.atoms.len() + 1);
        breaks.push(0.0);
        let mut cum = 0.0;
        for a in &self.atoms[..self.atoms.len() - 1] {
            cum += a.w;
            breaks.push(cum);
        }
        breaks.push(1.0);
        let values = self.atoms.iter().map(|a| a.x).collect();
        StepQuantile(StepFn::from_raw(breaks, values))
    }

    /// Same atom count, with positions and weights pairwise within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.atoms.len() == other.atoms.len()
            && self
                .atoms
                .iter()
                .zip(&other.atoms)
                .all(|(a, b)| (a.x - b.x).abs() <= tol && (a.w - b.w).abs() <= tol)
    }
}

/// Quantile function of a [`DiscreteMeasure`]: a non-decreasing step function.
#[derive(Debug, Clone, PartialEq)]
pub struct StepQuantile(StepFn);

impl StepQuantile {
    /// Fails unless the values are non-decreasing.
    pub fn new(f: StepFn) -> Result<Self> {
        if f.values().windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidQuantile(
                "values must be non-decreasing".into(),
            ));
        }
        Ok(Self(f))
    }

    pub fn as_step_fn(&self) -> &StepFn {
        &self.0
    }

    pub fn into_step_fn(self) -> StepFn {
        self.0
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.0.eval(u)
    }

    pub fn to_measure(&self) -> DiscreteMeasure {
        measure_from_cells(&self.0).expect("quantile cells have positive width")
    }
}

/// Builds the measure whose quantile function is `cells` (after sorting the
/// values, which only matters for rounding-level inversions).
pub(crate) fn measure_from_cells(cells: &StepFn) -> Result<DiscreteMeasure> {
    DiscreteMeasure::from_atoms(cells.cells().map(|(lo, hi, v)| (v, hi - lo)))
}

/// One affine piece of a [`GeneralQuantile`], covering `(previous u_hi, u_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantilePiece {
    pub u_hi: f64,
    pub slope: f64,
    pub value_hi: f64,
}

/// A non-decreasing, piecewise-affine quantile function, possibly with jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralQuantile {
    pieces: Vec<QuantilePiece>,
}

impl GeneralQuantile {
    pub fn new(pieces: Vec<QuantilePiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidQuantile("no pieces".into()));
        }
        if pieces
            .iter()
            .any(|p| !p.u_hi.is_finite() || !p.slope.is_finite() || !p.value_hi.is_finite())
        {
            return Err(Error::NonFinite {
                what: "quantile piece",
            });
        }
        if pieces.last().unwrap().u_hi != 1.0 {
            return Err(Error::InvalidQuantile(
                "last piece must end at u = 1".into(),
            ));
        }
        let mut lo = 0.0;
        let mut prev_hi_value = f64::NEG_INFINITY;
        for (i, p) in pieces.iter().enumerate() {
            if p.u_hi <= lo {
                return Err(Error::InvalidQuantile(format!(
                    "piece {i} has empty interval"
                )));
            }
            if p.slope < 0.0 {
                return Err(Error::InvalidQuantile(format!(
                    "piece {i} has negative slope"
                )));
            }
            let start = p.value_hi - p.slope * (p.u_hi - lo);
            if start < prev_hi_value - MONOTONE_TOL * prev_hi_value.abs().max(1.0) {
                return Err(Error::InvalidQuantile(format!(
                    "decreasing jump before piece {i}"
                )));
            }
            prev_hi_value = p.value_hi;
            lo = p.u_hi;
        }
        Ok(Self { pieces })
    }

    pub fn pieces(&self) -> &[QuantilePiece] {
        &self.pieces
    }

    fn piece_lo(&self, i: usize) -> f64 {
        if i == 0 {
            0.0
        } else {
            self.pieces[i - 1].u_hi
        }
    }

    fn breaks(&self) -> Vec<f64> {
        std::iter::once(0.0)
            .chain(self.pieces.iter().map(|p| p.u_hi))
            .collect()
    }

    fn piece_index(&self, u: f64) -> usize {
        self.pieces
            .partition_point(|p| p.u_hi < u)
            .min(self.pieces.len() - 1)
    }

    /// Left-continuous evaluation on `(0, 1]`.
    pub fn eval(&self, u: f64) -> f64 {
        let p = self.pieces[self.piece_index(u)];
        p.value_hi - p.slope * (p.u_hi - u)
    }

    pub fn mean(&self) -> f64 {
        self.pieces
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let h = p.u_hi - self.piece_lo(i);
                h * (p.value_hi - 0.5 * p.slope * h)
            })
            .sum()
    }

    pub fn max_slope(&self) -> f64 {
        self.pieces.iter().map(|p| p.slope).fold(0.0, f64::max)
    }

    /// `n` atoms of mass `1/n` at the cell midpoints `q((i - 1/2)/n)`.
    pub fn discretize(&self, n: usize) -> DiscreteMeasure {
        assert!(n >= 1, "discretization needs at least one atom");
        let inv = 1.0 / n as f64;
        DiscreteMeasure::from_atoms((0..n).map(|i| (self.eval((i as f64 + 0.5) * inv), inv)))
            .expect("midpoint atoms are finite with positive weight")
    }

    /// `‖q − r‖_p` in closed form, i.e. the p-Wasserstein distance between the
    /// two measures.
    pub fn lp_distance(&self, other: &GeneralQuantile, p: f64) -> Result<f64> {
        check_p(p)?;
        let breaks = common_refinement(&self.breaks(), &other.breaks());
        let mut total = 0.0;
        for w in breaks.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mid = 0.5 * (lo + hi);
            let (a1, s1) = self.affine_at(mid, lo);
            let (a2, s2) = other.affine_at(mid, lo);
            total += integral_abs_pow_affine(a1 - a2, s1 - s2, hi - lo, p);
        }
        Ok(total.powf(p.recip()))
    }

    /// Right limit at `lo` and slope of the piece containing `mid`.
    fn affine_at(&self, mid: f64, lo: f64) -> (f64, f64) {
        let p = self.pieces[self.piece_index(mid)];
        (p.value_hi - p.slope * (p.u_hi - lo), p.slope)
    }
}

impl From<&StepQuantile> for GeneralQuantile {
    fn from(q: &StepQuantile) -> Self {
        let pieces =
            q.0.cells()
                .map(|(_, hi, v)| QuantilePiece {
                    u_hi: hi,
                    slope: 0.0,
                    value_hi: v,
                })
                .collect();
        Self { pieces }
    }
}

impl From<&DiscreteMeasure> for GeneralQuantile {
    fn from(m: &DiscreteMeasure) -> Self {
        (&m.quantile()).into()
    }
}

/// Midpoint discretization of a piecewise-linear quantile into `n` equal atoms.
pub fn discretize(q: &GeneralQuantile, n: usize) -> DiscreteMeasure {
    q.discretize(n)
}

/// `∫_0^h |a + b t|^p dt`.
fn integral_abs_pow_affine(a: f64, b: f64, h: f64, p: f64) -> f64 {
    let e = a + b * h;
    let scale = a.abs().max(e.abs());
    if b.abs() * h <= 1e-6 * scale || scale == 0.0 {
        // Nearly constant integrand, no sign change: Simpson is exact to ~1e-24.
        let m = a + 0.5 * b * h;
        return h / 6.0 * (a.abs().powf(p) + 4.0 * m.abs().powf(p) + e.abs().powf(p));
    }
    let anti = |s: f64| s * s.abs().powf(p) / (p + 1.0);
    (anti(e) - anti(a)) / b
}

//! Potential functions `u_μ(x) = ∫|x − y| μ(dy)` and the minimum / maximum in
//! convex order among measures sharing a barycenter:
//!
//! ```text
//! u_{μ ∧ ν} = co(min(u_μ, u_ν))        u_{μ ∨ ν} = max(u_μ, u_ν)
//! ```
//!
//! Potentials of discrete measures are convex and piecewise linear with slopes
//! `−1` and `+1` outside the support, so both operations are evaluated exactly
//! at the union of kinks plus the crossing points of the two potentials.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fixtures::counterexample;
use crate::hull::{lower_hull, Vertex};
use crate::measures::DiscreteMeasure;
use crate::projection::{is_convex_order, projections, wasserstein};

/// Default tolerance on barycenter agreement.
pub const BARYCENTER_TOL: f64 = 1e-9;

const DEDUP_TOL: f64 = 1e-12;
const MASS_TOL: f64 = 1e-12;
/// Slope changes at or below this are rounding noise.
const JUMP_EPS: f64 = 1e-14;
/// Relative rounding error of a potential value, turned into a slope error by
/// dividing by the vertex spacing.
const SLOPE_NOISE: f64 = 64.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Kink {
    pub x: f64,
    /// Slope increase across `x`; twice the atom weight.
    pub jump: f64,
}

/// Convex piecewise-linear function on ℝ equal to `intercept − x` left of its
/// first kink.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialFn {
    intercept: f64,
    kinks: Vec<Kink>,
}

impl PotentialFn {
    pub fn new(intercept: f64, kinks: Vec<Kink>) -> Result<Self> {
        if kinks.is_empty() {
            return Err(Error::InvalidPotential("no kinks".into()));
        }
        if !intercept.is_finite()
            || kinks
                .iter()
                .any(|k| !k.x.is_finite() || !k.jump.is_finite())
        {
            return Err(Error::NonFinite { what: "potential" });
        }
        if kinks.iter().any(|k| k.jump <= 0.0) {
            return Err(Error::InvalidPotential(
                "slope changes must be positive".into(),
            ));
        }
        if kinks.windows(2).any(|w| w[1].x <= w[0].x) {
            return Err(Error::InvalidPotential(
                "kinks must be strictly increasing".into(),
            ));
        }
        Ok(Self { intercept, kinks })
    }

    pub fn intercept(&self) -> f64 {
        self.intercept
    }

    pub fn kinks(&self) -> &[Kink] {
        &self.kinks
    }

    pub fn total_jump(&self) -> f64 {
        self.kinks.iter().map(|k| k.jump).sum()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut y = self.intercept - x;
        for k in self.kinks.iter().take_while(|k| k.x < x) {
            y += k.jump * (x - k.x);
        }
        y
    }

    /// Evaluates at sorted abscissae in one pass.
    pub fn eval_sorted(&self, xs: &[f64]) -> Vec<f64> {
        debug_assert!(xs.windows(2).all(|w| w[0] <= w[1]));
        let mut out = Vec::with_capacity(xs.len());
        let (mut slope, mut k) = (-1.0, 0);
        let mut anchor_x = self.kinks[0].x;
        let mut anchor_y = self.intercept - anchor_x;
        for &x in xs {
            while k < self.kinks.len() && self.kinks[k].x < x {
                let kx = self.kinks[k].x;
                anchor_y += slope * (kx - anchor_x);
                anchor_x = kx;
                slope += self.kinks[k].jump;
                k += 1;
            }
            out.push(anchor_y + slope * (x - anchor_x));
        }
        out
    }

    /// The potential through a convex chain of vertices, continued with slopes
    /// −1 and +1 outside it. Slope changes within rounding noise of the chord
    /// slopes are carried into the next kink, so the total stays 2.
    fn from_vertices(points: &[Vertex]) -> Self {
        let inner: Vec<f64> = points
            .windows(2)
            .map(|w| ((w[1].y - w[0].y) / (w[1].u - w[0].u)).clamp(-1.0, 1.0))
            .collect();
        let scale = points.iter().fold(1.0f64, |s, v| s.max(v.y.abs()));
        let mut kinks: Vec<Kink> = Vec::with_capacity(points.len());
        let mut left = -1.0;
        for (i, v) in points.iter().enumerate() {
            let right = inner.get(i).copied().unwrap_or(1.0);
            let gap = [
                i.checked_sub(1).map(|j| v.u - points[j].u),
                points.get(i + 1).map(|w| w.u - v.u),
            ]
            .into_iter()
            .flatten()
            .fold(f64::INFINITY, f64::min);
            let noise = SLOPE_NOISE * scale / gap;
            let jump = right - left;
            if jump > JUMP_EPS.max(noise) {
                kinks.push(Kink { x: v.u, jump });
                left = right;
            }
        }
        match kinks.last_mut() {
            Some(last) => last.jump += 1.0 - left,
            None => kinks.push(Kink {
                x: points[points.len() - 1].u,
                jump: 2.0,
            }),
        }
        Self {
            intercept: points[0].y + points[0].u,
            kinks,
        }
    }
}

/// `u_m`: kinks at the atoms with slope change twice the weight.
pub fn potential(m: &DiscreteMeasure) -> PotentialFn {
    PotentialFn {
        intercept: m.barycenter(),
        kinks: m
            .atoms()
            .iter()
            .map(|a| Kink {
                x: a.x,
                jump: 2.0 * a.w,
            })
            .collect(),
    }
}

/// Inverse of [`potential`]: atoms at the kinks with half the slope change as
/// weight.
pub fn measure_from_potential(u: &PotentialFn) -> Result<DiscreteMeasure> {
    let total = u.total_jump();
    if (total - 2.0).abs() > MASS_TOL {
        return Err(Error::MassMismatch { total });
    }
    DiscreteMeasure::from_atoms(u.kinks.iter().map(|k| (k.x, 0.5 * k.jump)))
}

fn check_barycenters(a: &DiscreteMeasure, b: &DiscreteMeasure, tol: f64) -> Result<()> {
    let (left, right) = (a.barycenter(), b.barycenter());
    if (left - right).abs() > tol {
        return Err(Error::BarycenterMismatch { left, right, tol });
    }
    Ok(())
}

/// Pointwise min or max of two potentials, as vertices at the merged kinks
/// and crossing points.
fn envelope(u1: &PotentialFn, u2: &PotentialFn, pick: fn(f64, f64) -> f64) -> Vec<Vertex> {
    let mut xs: Vec<f64> = u1.kinks.iter().chain(&u2.kinks).map(|k| k.x).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|b, a| *b - *a <= DEDUP_TOL);

    let y1 = u1.eval_sorted(&xs);
    let y2 = u2.eval_sorted(&xs);
    let mut points = Vec::with_capacity(2 * xs.len());
    for i in 0..xs.len() {
        points.push(Vertex::new(xs[i], pick(y1[i], y2[i])));
        if i + 1 == xs.len() {
            break;
        }
        let (da, db) = (y1[i] - y2[i], y1[i + 1] - y2[i + 1]);
        if da * db < 0.0 {
            let t = da / (da - db);
            let x = xs[i] + t * (xs[i + 1] - xs[i]);
            if x - xs[i] > DEDUP_TOL && xs[i + 1] - x > DEDUP_TOL {
                points.push(Vertex::new(x, y1[i] + t * (y1[i + 1] - y1[i])));
            }
        }
    }
    points
}

/// `u_{m1 ∧ m2} = co(min(u_{m1}, u_{m2}))`.
pub fn meet_potential(m1: &DiscreteMeasure, m2: &DiscreteMeasure) -> PotentialFn {
    let points = envelope(&potential(m1), &potential(m2), f64::min);
    PotentialFn::from_vertices(&lower_hull(&points))
}

/// `u_{m1 ∨ m2} = max(u_{m1}, u_{m2})`.
pub fn join_potential(m1: &DiscreteMeasure, m2: &DiscreteMeasure) -> PotentialFn {
    let points = envelope(&potential(m1), &potential(m2), f64::max);
    // The maximum is already convex; the hull pass only drops collinear vertices.
    PotentialFn::from_vertices(&lower_hull(&points))
}

/// The largest measure below both inputs in convex order.
pub fn min_convex(m1: &DiscreteMeasure, m2: &DiscreteMeasure, tol: f64) -> Result<DiscreteMeasure> {
    check_barycenters(m1, m2, tol)?;
    measure_from_potential(&meet_potential(m1, m2))
}

/// The smallest measure above both inputs in convex order.
pub fn max_convex(m1: &DiscreteMeasure, m2: &DiscreteMeasure, tol: f64) -> Result<DiscreteMeasure> {
    check_barycenters(m1, m2, tol)?;
    measure_from_potential(&join_potential(m1, m2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeRatio {
    /// `W_p(μ ∨ ν, μ ∨ η) / W_p(η, ν)`.
    pub join: f64,
    /// `W_p(μ ∧ ν, μ ∧ η) / W_p(η, ν)`.
    pub meet: f64,
    /// `n^{1/p} / 2`.
    pub expected: f64,
}

/// Distance ratios of the lattice operations on the grid counterexample,
/// computed through the actual meet, join and distances.
pub fn lattice_ratio(n: usize, p: f64) -> Result<LatticeRatio> {
    assert!(n >= 3, "the construction needs n >= 3");
    let c = counterexample(n);
    let base = wasserstein(&c.eta, &c.nu, p)?;
    let join = wasserstein(
        &max_convex(&c.mu, &c.nu, BARYCENTER_TOL)?,
        &max_convex(&c.mu, &c.eta, BARYCENTER_TOL)?,
        p,
    )?;
    let meet = wasserstein(
        &min_convex(&c.mu, &c.nu, BARYCENTER_TOL)?,
        &min_convex(&c.mu, &c.eta, BARYCENTER_TOL)?,
        p,
    )?;
    Ok(LatticeRatio {
        join: join / base,
        meet: meet / base,
        expected: (n as f64).powf(p.recip()) / 2.0,
    })
}

/// `I(m1, m2) ≤_c m1 ∧ m2` and `m1 ∨ m2 ≤_c J(m1, m2)`.
pub fn sandwich_check(m1: &DiscreteMeasure, m2: &DiscreteMeasure, tol: f64) -> Result<bool> {
    check_barycenters(m1, m2, tol)?;
    let (i, j) = projections(m1, m2);
    let meet = min_convex(m1, m2, tol)?;
    let join = max_convex(m1, m2, tol)?;
    Ok(is_convex_order(&i, &meet, tol)? && is_convex_order(&join, &j, tol)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::ORDER_TOL;

    #[test]
    fn rounding_noise_does_not_create_atoms() {
        // The last vertex sits 2e-16 below the line of slope 1 through the
        // previous one; its slope change is noise, not an atom.
        let points = [
            Vertex::new(-1.0, 1.0),
            Vertex::new(0.0, 0.0),
            Vertex::new(0.5, 0.5),
            Vertex::new(0.501, 0.501 - 2e-16),
        ];
        let u = PotentialFn::from_vertices(&points);
        assert_eq!(u.kinks().len(), 1);
        assert!((u.total_jump() - 2.0).abs() < 1e-15);
        assert!(measure_from_potential(&u)
            .unwrap()
            .approx_eq(&DiscreteMeasure::dirac(0.0), 1e-12));
    }

    #[test]
    fn dirac_potential_is_abs() {
        let u = potential(&DiscreteMeasure::dirac(0.0));
        for x in [-2.0, -0.5, 0.0, 0.3, 4.0] {
            assert_eq!(u.eval(x), f64::abs(x));
        }
        assert_eq!(
            measure_from_potential(&u).unwrap(),
            DiscreteMeasure::dirac(0.0)
        );
    }

    #[test]
    fn potential_values() {
        let m = DiscreteMeasure::from_atoms([(0.0, 0.5), (1.0, 0.5)]).unwrap();
        assert_eq!(potential(&m).eval(0.5), 0.5);
        let nu = counterexample(4).nu;
        assert!((potential(&nu).eval(0.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn eval_sorted_matches_eval() {
        let m = DiscreteMeasure::from_atoms([(-1.0, 0.2), (0.1, 0.5), (0.7, 0.3)]).unwrap();
        let u = potential(&m);
        let xs: Vec<f64> = (0..60).map(|i| -2.0 + i as f64 * 0.07).collect();
        for (x, y) in xs.iter().zip(u.eval_sorted(&xs)) {
            assert!((u.eval(*x) - y).abs() < 1e-14);
        }
    }

    #[test]
    fn measure_from_potential_checks_mass() {
        let u = PotentialFn::new(0.0, vec![Kink { x: 0.0, jump: 1.5 }]).unwrap();
        assert!(matches!(
            measure_from_potential(&u),
            Err(Error::MassMismatch { .. })
        ));
    }

    #[test]
    fn potential_constructor_validation() {
        assert!(PotentialFn::new(0.0, vec![]).is_err());
        assert!(PotentialFn::new(0.0, vec![Kink { x: 0.0, jump: -1.0 }]).is_err());
        assert!(PotentialFn::new(
            0.0,
            vec![Kink { x: 1.0, jump: 1.0 }, Kink { x: 0.0, jump: 1.0 }]
        )
        .is_err());
    }

    #[test]
    fn meet_and_join_of_self() {
        let m = DiscreteMeasure::from_atoms([(-1.0, 0.2), (0.1, 0.5), (0.7, 0.3)]).unwrap();
        assert!(min_convex(&m, &m, BARYCENTER_TOL)
            .unwrap()
            .approx_eq(&m, 1e-14));
        assert!(max_convex(&m, &m, BARYCENTER_TOL)
            .unwrap()
            .approx_eq(&m, 1e-14));
    }

    #[test]
    fn counterexample_lattice_values() {
        let c = counterexample(4);
        assert!(max_convex(&c.mu, &c.nu, BARYCENTER_TOL)
            .unwrap()
            .approx_eq(&c.nu, 1e-14));
        assert!(max_convex(&c.mu, &c.eta, BARYCENTER_TOL)
            .unwrap()
            .approx_eq(&c.mu, 1e-14));
        assert!(min_convex(&c.mu, &c.nu, BARYCENTER_TOL)
            .unwrap()
            .approx_eq(&c.mu, 1e-14));
        assert!(min_convex(&c.mu, &c.eta, BARYCENTER_TOL)
            .unwrap()
            .approx_eq(&c.eta, 1e-14));
    }

    #[test]
    fn lattice_requires_equal_barycenters() {
        let a = DiscreteMeasure::dirac(0.0);
        let b = DiscreteMeasure::dirac(1.0);
        assert!(matches!(
            min_convex(&a, &b, BARYCENTER_TOL),
            Err(Error::BarycenterMismatch { .. })
        ));
        assert!(matches!(
            max_convex(&a, &b, BARYCENTER_TOL),
            Err(Error::BarycenterMismatch { .. })
        ));
        assert!(matches!(
            sandwich_check(&a, &b, BARYCENTER_TOL),
            Err(Error::BarycenterMismatch { .. })
        ));
    }

    #[test]
    fn two_point_meet_and_join() {
        // ½δ_{-1} + ½δ_1 and ¾δ_{-1/3} + ¼δ_1 share barycenter 0.
        let a = DiscreteMeasure::from_atoms([(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        let b = DiscreteMeasure::from_atoms([(-1.0 / 3.0, 0.75), (1.0, 0.25)]).unwrap();
        assert!(is_convex_order(&b, &a, ORDER_TOL).unwrap());
        assert!(min_convex(&a, &b, BARYCENTER_TOL)
            .unwrap()
            .approx_eq(&b, 1e-14));
        assert!(max_convex(&a, &b, BARYCENTER_TOL)
            .unwrap()
            .approx_eq(&a, 1e-14));
    }

    #[test]
    fn lattice_ratio_table_entries() {
        for (n, p, expected) in [(4, 1.0, 2.0), (4, 2.0, 1.0), (16, 2.0, 2.0)] {
            let r = lattice_ratio(n, p).unwrap();
            assert!((r.join - expected).abs() < 1e-12, "{n} {p}: {r:?}");
            assert!((r.meet - expected).abs() < 1e-12, "{n} {p}: {r:?}");
        }
    }

    #[test]
    fn sandwich_on_self_and_counterexample() {
        let c = counterexample(4);
        assert!(sandwich_check(&c.mu, &c.mu, BARYCENTER_TOL).unwrap());
        assert!(sandwich_check(&c.mu, &c.nu, BARYCENTER_TOL).unwrap());
    }
}

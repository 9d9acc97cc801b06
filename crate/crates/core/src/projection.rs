//! Wasserstein distance, convex order and the Wasserstein projections in the
//! convex order for finitely supported measures on the line.
//!
//! Everything is computed from quantile functions on the common refinement of
//! the two cumulative-weight partitions. With
//! `G(v) = ∫_0^v (F_μ^{-1} − F_ν^{-1})` and `co(G)` its greatest convex minorant,
//!
//! ```text
//! F_I^{-1} = F_μ^{-1} − ∂co(G)        F_J^{-1} = F_ν^{-1} + ∂co(G)
//! ```
//!
//! where `I(μ, ν)` is the measure dominated by `ν` in convex order that is
//! closest to `μ`, and `J(μ, ν)` the measure dominating `μ` closest to `ν`. For
//! `p = 1` the minimizers are not unique and these formulas give the canonical
//! selection.

use serde::Serialize;

use crate::error::{check_p, Error, Result};
use crate::hull::{
    common_refinement, lp_of_cells, PiecewiseLinearFn, StepFn, Vertex, BREAK_MERGE_TOL,
};
use crate::measures::{measure_from_cells, DiscreteMeasure};

/// Default absolute tolerance on `G` for convex-order checks.
pub const ORDER_TOL: f64 = 1e-9;

/// Walks the cells of the common refinement of two quantile partitions,
/// calling `f(width, x_a, x_b)`.
fn for_each_common_cell(
    a: &DiscreteMeasure,
    b: &DiscreteMeasure,
    mut f: impl FnMut(f64, f64, f64),
) {
    let (a, b) = (a.atoms(), b.atoms());
    let (mut i, mut j) = (0, 0);
    let (mut ca, mut cb) = (a[0].w, b[0].w);
    let mut prev = 0.0f64;
    loop {
        let last_a = i + 1 == a.len();
        let last_b = j + 1 == b.len();
        if last_a && last_b {
            f((1.0 - prev).max(0.0), a[i].x, b[j].x);
            return;
        }
        let ea = if last_a { f64::INFINITY } else { ca };
        let eb = if last_b { f64::INFINITY } else { cb };
        let next = ea.min(eb);
        f((next - prev).max(0.0), a[i].x, b[j].x);
        prev = next;
        // Cumulative weights that agree up to rounding are one breakpoint.
        let tied = (ea - eb).abs() <= BREAK_MERGE_TOL;
        if ea <= eb || tied {
            i += 1;
            ca += a[i].w;
        }
        if eb < ea || tied {
            j += 1;
            cb += b[j].w;
        }
    }
}

/// `W_p(a, b) = ‖F_a^{-1} − F_b^{-1}‖_p`, exact via the comonotone coupling.
pub fn wasserstein(a: &DiscreteMeasure, b: &DiscreteMeasure, p: f64) -> Result<f64> {
    check_p(p)?;
    let mut cells = Vec::with_capacity(a.len() + b.len());
    for_each_common_cell(a, b, |w, xa, xb| cells.push((w, xa - xb)));
    Ok(lp_of_cells(cells.into_iter(), p))
}

fn check_barycenters(a: &DiscreteMeasure, b: &DiscreteMeasure, tol: f64) -> Result<()> {
    let (left, right) = (a.barycenter(), b.barycenter());
    if (left - right).abs() > tol {
        return Err(Error::BarycenterMismatch { left, right, tol });
    }
    Ok(())
}

/// Whether `a ≤_c b`: `∫_0^u F_a^{-1} ≥ ∫_0^u F_b^{-1}` for all `u`, checked at
/// every breakpoint of the (piecewise-linear) integrated difference.
///
/// The characterization only applies to measures with equal barycenters;
/// others are rejected with [`Error::BarycenterMismatch`].
pub fn is_convex_order(a: &DiscreteMeasure, b: &DiscreteMeasure, tol: f64) -> Result<bool> {
    check_barycenters(a, b, tol)?;
    let mut g = 0.0;
    let mut min_g = 0.0f64;
    for_each_common_cell(a, b, |w, xa, xb| {
        g += w * (xa - xb);
        min_g = min_g.min(g);
    });
    Ok(min_g >= -tol && g.abs() <= tol)
}

/// Quantiles of a pair sampled on their common refinement, with the integrated
/// difference `G` and its convex hull.
#[derive(Debug, Clone)]
pub struct PairProfile {
    /// Common refinement of the two cumulative-weight partitions.
    pub partition: Vec<f64>,
    pub mu_values: Vec<f64>,
    pub nu_values: Vec<f64>,
    pub gap: PiecewiseLinearFn,
    pub hull: PiecewiseLinearFn,
    /// Slope of `co(G)` on each cell of `partition`.
    pub hull_slopes: Vec<f64>,
}

impl PairProfile {
    pub fn new(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Self {
        let qmu = mu.quantile();
        let qnu = nu.quantile();
        let partition = common_refinement(qmu.as_step_fn().breaks(), qnu.as_step_fn().breaks());
        let mu_values = resample(qmu.as_step_fn(), &partition);
        let nu_values = resample(qnu.as_step_fn(), &partition);

        let diff: Vec<f64> = mu_values
            .iter()
            .zip(&nu_values)
            .map(|(a, b)| a - b)
            .collect();
        let gap = StepFn::from_raw(partition.clone(), diff).antiderivative(0.0);
        let hull = gap.lower_convex_hull();

        let hv = hull.vertices();
        let mut k = 0;
        let hull_slopes = partition
            .windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                while hv[k + 1].u < mid {
                    k += 1;
                }
                segment_slope(hv[k], hv[k + 1])
            })
            .collect();

        Self {
            partition,
            mu_values,
            nu_values,
            gap,
            hull,
            hull_slopes,
        }
    }

    fn assemble(&self, base: &[f64], sign: f64) -> DiscreteMeasure {
        let values = base
            .iter()
            .zip(&self.hull_slopes)
            .map(|(v, s)| v + sign * s)
            .collect();
        measure_from_cells(&StepFn::from_raw(self.partition.clone(), values))
            .expect("partition cells have positive width")
    }

    /// `I(μ, ν)`.
    pub fn projection_i(&self) -> DiscreteMeasure {
        self.assemble(&self.mu_values, -1.0)
    }

    /// `J(μ, ν)`.
    pub fn projection_j(&self) -> DiscreteMeasure {
        self.assemble(&self.nu_values, 1.0)
    }

    /// `‖∂co(G)‖_p`, which equals both `W_p(I, μ)` and `W_p(J, ν)`.
    pub fn hull_slope_norm(&self, p: f64) -> f64 {
        lp_of_cells(
            self.partition
                .windows(2)
                .zip(&self.hull_slopes)
                .map(|(w, &s)| (w[1] - w[0], s)),
            p,
        )
    }
}

fn segment_slope(a: Vertex, b: Vertex) -> f64 {
    (b.y - a.y) / (b.u - a.u)
}

/// Values of `f` on the cells of a refinement of its own partition.
fn resample(f: &StepFn, partition: &[f64]) -> Vec<f64> {
    let breaks = f.breaks();
    let mut i = 0;
    partition
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            while breaks[i + 1] < mid {
                i += 1;
            }
            f.values()[i]
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionResult {
    pub projected: DiscreteMeasure,
    /// `W_p(μ, I)` for [`project_i`], `W_p(J, ν)` for [`project_j`].
    pub distance_to_input: f64,
    /// The hull `co(G)` used to build the projection.
    pub hull: PiecewiseLinearFn,
}

/// `I(μ, ν)`: the measure `η ≤_c ν` minimizing `W_p(μ, η)`.
pub fn project_i(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<ProjectionResult> {
    check_p(p)?;
    let profile = PairProfile::new(mu, nu);
    let projected = profile.projection_i();
    let distance_to_input = wasserstein(mu, &projected, p)?;
    Ok(ProjectionResult {
        projected,
        distance_to_input,
        hull: profile.hull,
    })
}

/// `J(μ, ν)`: the measure `η ≥_c μ` minimizing `W_p(η, ν)`.
pub fn project_j(mu: &DiscreteMeasure, nu: &DiscreteMeasure, p: f64) -> Result<ProjectionResult> {
    check_p(p)?;
    let profile = PairProfile::new(mu, nu);
    let projected = profile.projection_j();
    let distance_to_input = wasserstein(&projected, nu, p)?;
    Ok(ProjectionResult {
        projected,
        distance_to_input,
        hull: profile.hull,
    })
}

/// Both projections of a pair, sharing one profile.
pub fn projections(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> (DiscreteMeasure, DiscreteMeasure) {
    let profile = PairProfile::new(mu, nu);
    (profile.projection_i(), profile.projection_j())
}

/// The four distances `W_p(I, μ)`, `W_p(J, ν)`, `W_p(I, ν)`, `W_p(J, μ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EqualDistances {
    pub i_to_mu: f64,
    pub j_to_nu: f64,
    pub i_to_nu: f64,
    pub j_to_mu: f64,
}

impl EqualDistances {
    /// `|W_p(I, μ) − W_p(J, ν)|` and `|W_p(I, ν) − W_p(J, μ)|`.
    pub fn residuals(&self) -> (f64, f64) {
        (
            (self.i_to_mu - self.j_to_nu).abs(),
            (self.i_to_nu - self.j_to_mu).abs(),
        )
    }
}

pub fn equaldist_check(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    p: f64,
) -> Result<EqualDistances> {
    check_p(p)?;
    let (i, j) = projections(mu, nu);
    Ok(EqualDistances {
        i_to_mu: wasserstein(&i, mu, p)?,
        j_to_nu: wasserstein(&j, nu, p)?,
        i_to_nu: wasserstein(&i, nu, p)?,
        j_to_mu: wasserstein(&j, mu, p)?,
    })
}

/// Both sides of the Lipschitz bounds
/// `W_p(I(μ,ν), I(μ',ν')) ≤ 2 W_p(μ,μ') + W_p(ν,ν')` and
/// `W_p(J(μ,ν), J(μ',ν')) ≤ W_p(μ,μ') + 2 W_p(ν,ν')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzReport {
    pub lhs_i: f64,
    pub rhs_i: f64,
    pub lhs_j: f64,
    pub rhs_j: f64,
    /// `W_p(μ, μ')`.
    pub w_mu: f64,
    /// `W_p(ν, ν')`.
    pub w_nu: f64,
}

impl LipschitzReport {
    pub fn holds(&self, slack: f64) -> bool {
        self.lhs_i <= self.rhs_i + slack && self.lhs_j <= self.rhs_j + slack
    }

    /// `lhs_I / rhs_I`, or `None` when both sides vanish.
    pub fn ratio_i(&self) -> Option<f64> {
        ratio(self.lhs_i, self.rhs_i)
    }

    pub fn ratio_j(&self) -> Option<f64> {
        ratio(self.lhs_j, self.rhs_j)
    }
}

fn ratio(lhs: f64, rhs: f64) -> Option<f64> {
    if rhs > 0.0 {
        Some(lhs / rhs)
    } else if lhs > 0.0 {
        Some(f64::INFINITY)
    } else {
        None
    }
}

pub fn lipschitz_audit(
    mu: &DiscreteMeasure,
    mu2: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    nu2: &DiscreteMeasure,
    p: f64,
) -> Result<LipschitzReport> {
    check_p(p)?;
    let (i1, j1) = projections(mu, nu);
    let (i2, j2) = projections(mu2, nu2);
    let w_mu = wasserstein(mu, mu2, p)?;
    let w_nu = wasserstein(nu, nu2, p)?;
    Ok(LipschitzReport {
        lhs_i: wasserstein(&i1, &i2, p)?,
        rhs_i: 2.0 * w_mu + w_nu,
        lhs_j: wasserstein(&j1, &j2, p)?,
        rhs_j: w_mu + 2.0 * w_nu,
        w_mu,
        w_nu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{counterexample, nu_alpha};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn rounding_in_cumulative_weights_is_not_transport() {
        let a = DiscreteMeasure::from_atoms([(-0.5, 0.1), (0.0, 0.2), (0.5, 0.7)]).unwrap();
        let b = DiscreteMeasure::from_atoms([(-0.5, 0.1 + 1e-16), (0.0, 0.2 - 1e-16), (0.5, 0.7)])
            .unwrap();
        assert_eq!(wasserstein(&a, &b, 3.0).unwrap(), 0.0);
    }

    #[test]
    fn distance_to_self_is_zero() {
        let m = DiscreteMeasure::from_atoms([(0.1, 0.3), (0.4, 0.2), (2.0, 0.5)]).unwrap();
        for p in [1.0, 2.0, 3.5] {
            assert_eq!(wasserstein(&m, &m, p).unwrap(), 0.0);
        }
    }

    #[test]
    fn counterexample_distances() {
        let c = counterexample(4);
        assert!(close(wasserstein(&c.mu, &c.nu, 1.0).unwrap(), 0.125, 1e-15));
        assert!(close(
            wasserstein(&c.eta, &c.nu, 1.0).unwrap(),
            1.0 / 16.0,
            1e-15
        ));
        assert!(close(
            wasserstein(&c.eta, &c.nu, 2.0).unwrap(),
            0.125,
            1e-15
        ));
        assert!(close(
            wasserstein(&c.eta, &c.mu, 3.0).unwrap(),
            0.125,
            1e-15
        ));
    }

    #[test]
    fn two_point_distance_to_origin() {
        let w = wasserstein(&DiscreteMeasure::dirac(0.0), &nu_alpha(0.5), 1.0).unwrap();
        assert!(close(w, 0.625, 1e-15));
    }

    #[test]
    fn wasserstein_rejects_small_p() {
        let m = DiscreteMeasure::dirac(0.0);
        assert_eq!(wasserstein(&m, &m, 0.9), Err(Error::InvalidP(0.9)));
    }

    #[test]
    fn convex_order_examples() {
        let c = counterexample(4);
        assert!(is_convex_order(&c.mu, &c.mu, ORDER_TOL).unwrap());
        assert!(is_convex_order(&c.eta, &c.mu, ORDER_TOL).unwrap());
        assert!(is_convex_order(&c.mu, &c.nu, ORDER_TOL).unwrap());
        assert!(!is_convex_order(&c.nu, &c.mu, ORDER_TOL).unwrap());
    }

    #[test]
    fn convex_order_counterexample_gap_sign() {
        // ∫_0^{1/8} (F_ν^{-1} − F_μ^{-1}) = 1/8 · (0 − 1/8) < 0.
        let c = counterexample(4);
        let profile = PairProfile::new(&c.nu, &c.mu);
        assert!(close(profile.gap.eval(0.125), -1.0 / 64.0, 1e-15));
    }

    #[test]
    fn convex_order_requires_equal_barycenters() {
        let err = is_convex_order(
            &DiscreteMeasure::dirac(0.0),
            &DiscreteMeasure::dirac(1.0),
            ORDER_TOL,
        );
        assert!(matches!(err, Err(Error::BarycenterMismatch { .. })));
    }

    #[test]
    fn projection_onto_dirac() {
        let mu = DiscreteMeasure::from_atoms([(-1.0, 0.2), (0.3, 0.5), (2.0, 0.3)]).unwrap();
        let nu = DiscreteMeasure::dirac(0.7);
        let i = project_i(&mu, &nu, 2.0).unwrap();
        assert!(i.projected.approx_eq(&nu, 1e-12));
        let j = project_j(&mu, &nu, 2.0).unwrap();
        assert!(j.projected.approx_eq(&mu, 1e-12));
    }

    #[test]
    fn projection_of_dirac_onto_two_points() {
        let i = project_i(&DiscreteMeasure::dirac(0.0), &nu_alpha(0.5), 1.0).unwrap();
        assert!(i.projected.approx_eq(&DiscreteMeasure::dirac(0.375), 1e-15));
        assert!(close(i.distance_to_input, 0.375, 1e-15));
        let j = project_j(&DiscreteMeasure::dirac(0.375), &nu_alpha(0.5), 1.0).unwrap();
        assert!(j.projected.approx_eq(&nu_alpha(0.5), 1e-15));
    }

    #[test]
    fn projection_of_ordered_pair_is_identity() {
        let c = counterexample(4);
        let i = project_i(&c.mu, &c.nu, 1.0).unwrap();
        assert!(i.projected.approx_eq(&c.mu, 1e-15));
        let j = project_j(&c.mu, &c.nu, 1.0).unwrap();
        assert!(j.projected.approx_eq(&c.nu, 1e-15));
        let j = project_j(&c.mu, &c.mu, 1.0).unwrap();
        assert!(j.projected.approx_eq(&c.mu, 1e-15));
    }

    #[test]
    fn equal_distances_examples() {
        let m = nu_alpha(0.3);
        let d = equaldist_check(&m, &m, 2.0).unwrap();
        assert_eq!(
            (d.i_to_mu, d.j_to_nu, d.i_to_nu, d.j_to_mu),
            (0.0, 0.0, 0.0, 0.0)
        );

        let d = equaldist_check(&DiscreteMeasure::dirac(0.0), &nu_alpha(0.5), 1.0).unwrap();
        assert!(close(d.i_to_mu, 0.375, 1e-15));
        assert!(close(d.j_to_nu, 0.375, 1e-15));
        let (r1, r2) = d.residuals();
        assert!(r1 <= 1e-12 && r2 <= 1e-12);
    }

    #[test]
    fn lipschitz_trivial_quadruple() {
        let m = nu_alpha(0.2);
        let n = DiscreteMeasure::dirac(0.1);
        let r = lipschitz_audit(&m, &m, &n, &n, 1.0).unwrap();
        assert_eq!((r.lhs_i, r.rhs_i, r.lhs_j, r.rhs_j), (0.0, 0.0, 0.0, 0.0));
        assert_eq!(r.ratio_i(), None);
    }

    #[test]
    fn hull_slope_norm_matches_projection_distance() {
        let mu = DiscreteMeasure::from_atoms([(-0.4, 0.3), (0.9, 0.7)]).unwrap();
        let nu = DiscreteMeasure::from_atoms([(0.0, 0.5), (0.2, 0.1), (1.5, 0.4)]).unwrap();
        let profile = PairProfile::new(&mu, &nu);
        let w = wasserstein(&mu, &profile.projection_i(), 2.0).unwrap();
        assert!(close(profile.hull_slope_norm(2.0), w, 1e-12));
    }
}

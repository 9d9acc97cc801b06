//! Recomputes the reference examples and compares them with their closed forms.

use serde::Serialize;

use crate::error::Result;
use crate::fixtures::{
    counterexample, nu_alpha, nu_alpha_barycenter, nu_alpha_distance_to_origin, nu_alpha_spread,
    sharp_quadruple,
};
use crate::lattice::{lattice_ratio, max_convex, min_convex, sandwich_check, BARYCENTER_TOL};
use crate::measures::{DiscreteMeasure, GeneralQuantile};
use crate::projection::{
    is_convex_order, project_i, project_j, projections, wasserstein, ORDER_TOL,
};
use crate::weakot::{plan_barycenter_pushforward, solve_weak_ot, WeakOtOptions};

pub const ALPHA_SWEEP: [f64; 8] = [0.5, 0.2, 0.1, 0.05, 0.01, 0.005, 0.001, 0.0001];
pub const LATTICE_NS: std::ops::RangeInclusive<usize> = 3..=32;
pub const LATTICE_PS: [f64; 3] = [1.0, 2.0, 3.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixtureRow {
    pub name: String,
    pub expected: f64,
    pub computed: f64,
    pub tol: f64,
    pub pass: bool,
}

impl FixtureRow {
    pub fn new(name: impl Into<String>, expected: f64, computed: f64, tol: f64) -> Self {
        let pass = (expected - computed).abs() <= tol;
        Self {
            name: name.into(),
            expected,
            computed,
            tol,
            pass,
        }
    }

    fn flag(name: impl Into<String>, expected: bool, computed: bool) -> Self {
        Self::new(
            name,
            f64::from(u8::from(expected)),
            f64::from(u8::from(computed)),
            0.0,
        )
    }

    /// Records `W_1(computed, expected)` against 0.
    fn measure(
        name: impl Into<String>,
        expected: &DiscreteMeasure,
        computed: &DiscreteMeasure,
        tol: f64,
    ) -> Result<Self> {
        Ok(Self::new(
            name,
            0.0,
            wasserstein(computed, expected, 1.0)?,
            tol,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatticeRow {
    pub n: usize,
    pub p: f64,
    pub join: f64,
    pub meet: f64,
    pub expected: f64,
    pub pass: bool,
}

/// One step of the `ν^α` sweep, with `μ = ν^α`, `μ' = δ_0` and `ν = ν' = ν^α`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaRow {
    pub alpha: f64,
    /// `W_1(I(μ, ν), I(μ', ν'))`.
    pub lhs_i: f64,
    /// `W_1(μ, μ')`.
    pub w_mu: f64,
    pub ratio_i: f64,
    /// `W_1(J(δ_c, ν^α), J(δ_c, δ_0))`.
    pub lhs_j: f64,
    /// `W_1(ν^α, δ_0)`.
    pub w_nu: f64,
    pub ratio_j: f64,
    pub expected_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharpReport {
    pub n: usize,
    pub p: f64,
    /// `W_p^p(I, I')`.
    pub lhs: f64,
    pub w_mu_pp: f64,
    pub w_nu_pp: f64,
    /// Largest `|F_I(u) − u/2|` over the grid midpoints.
    pub proj_error: f64,
    pub proj2_error: f64,
}

impl SharpReport {
    pub fn residual(&self) -> f64 {
        (self.lhs - self.w_mu_pp - self.w_nu_pp).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplayReport {
    pub fixtures: Vec<FixtureRow>,
    pub lattice: Vec<LatticeRow>,
    pub alpha_sweep: Vec<AlphaRow>,
}

impl ReplayReport {
    pub fn all_pass(&self) -> bool {
        self.fixtures.iter().all(|r| r.pass) && self.lattice.iter().all(|r| r.pass)
    }
}

pub fn alpha_row(alpha: f64) -> Result<AlphaRow> {
    let nu = nu_alpha(alpha);
    let origin = DiscreteMeasure::dirac(0.0);
    let c = DiscreteMeasure::dirac(nu_alpha_barycenter(alpha));

    let (i1, _) = projections(&nu, &nu);
    let (i2, _) = projections(&origin, &nu);
    let lhs_i = wasserstein(&i1, &i2, 1.0)?;
    let w_mu = wasserstein(&nu, &origin, 1.0)?;

    let (_, j1) = projections(&c, &nu);
    let (_, j2) = projections(&c, &origin);
    let lhs_j = wasserstein(&j1, &j2, 1.0)?;
    let w_nu = wasserstein(&nu, &origin, 1.0)?;

    Ok(AlphaRow {
        alpha,
        lhs_i,
        w_mu,
        ratio_i: lhs_i / w_mu,
        lhs_j,
        w_nu,
        ratio_j: lhs_j / w_nu,
        expected_ratio: nu_alpha_spread(alpha) / nu_alpha_distance_to_origin(alpha),
    })
}

fn grid_sup_error(m: &DiscreteMeasure, q: &GeneralQuantile, n: usize) -> f64 {
    let f = m.quantile();
    (0..n)
        .map(|k| {
            let u = (k as f64 + 0.5) / n as f64;
            (f.eval(u) - q.eval(u)).abs()
        })
        .fold(0.0, f64::max)
}

/// Discretizes the sharp quadruple into `n` atoms each and compares both sides
/// of the additive identity.
pub fn sharp_report(n: usize, p: f64) -> Result<SharpReport> {
    let s = sharp_quadruple();
    let (mu, mu2, nu, nu2) = (
        s.mu.discretize(n),
        s.mu2.discretize(n),
        s.nu.discretize(n),
        s.nu2.discretize(n),
    );
    let i1 = project_i(&mu, &nu, p)?.projected;
    let i2 = project_i(&mu2, &nu2, p)?.projected;
    Ok(SharpReport {
        n,
        p,
        lhs: wasserstein(&i1, &i2, p)?.powf(p),
        w_mu_pp: wasserstein(&mu, &mu2, p)?.powf(p),
        w_nu_pp: wasserstein(&nu, &nu2, p)?.powf(p),
        proj_error: grid_sup_error(&i1, &s.proj, n),
        proj2_error: grid_sup_error(&i2, &s.proj2, n),
    })
}

fn counterexample_rows(out: &mut Vec<FixtureRow>) -> Result<()> {
    let n = 4;
    let ce = counterexample(n);
    let nf = n as f64;
    out.push(FixtureRow::new(
        "counterexample n=4: W_1(mu, nu)",
        1.0 / (2.0 * nf),
        wasserstein(&ce.mu, &ce.nu, 1.0)?,
        1e-12,
    ));
    out.push(FixtureRow::new(
        "counterexample n=4: W_1(eta, nu)",
        1.0 / (4.0 * nf),
        wasserstein(&ce.eta, &ce.nu, 1.0)?,
        1e-12,
    ));
    out.push(FixtureRow::new(
        "counterexample n=4: W_2(eta, nu)",
        1.0 / (2.0 * nf),
        wasserstein(&ce.eta, &ce.nu, 2.0)?,
        1e-12,
    ));
    for p in [1.0, 2.0, 3.0] {
        out.push(FixtureRow::new(
            format!("counterexample n=4: W_{p}(eta, mu)"),
            1.0 / (2.0 * nf),
            wasserstein(&ce.eta, &ce.mu, p)?,
            1e-12,
        ));
    }
    out.push(FixtureRow::flag(
        "counterexample n=4: eta <=_c mu",
        true,
        is_convex_order(&ce.eta, &ce.mu, ORDER_TOL)?,
    ));
    out.push(FixtureRow::flag(
        "counterexample n=4: mu <=_c nu",
        true,
        is_convex_order(&ce.mu, &ce.nu, ORDER_TOL)?,
    ));
    out.push(FixtureRow::flag(
        "counterexample n=4: nu <=_c mu",
        false,
        is_convex_order(&ce.nu, &ce.mu, ORDER_TOL)?,
    ));

    let tol = BARYCENTER_TOL;
    out.push(FixtureRow::measure(
        "counterexample n=4: max(mu, nu) = nu",
        &ce.nu,
        &max_convex(&ce.mu, &ce.nu, tol)?,
        1e-12,
    )?);
    out.push(FixtureRow::measure(
        "counterexample n=4: min(mu, nu) = mu",
        &ce.mu,
        &min_convex(&ce.mu, &ce.nu, tol)?,
        1e-12,
    )?);
    out.push(FixtureRow::measure(
        "counterexample n=4: max(mu, eta) = mu",
        &ce.mu,
        &max_convex(&ce.mu, &ce.eta, tol)?,
        1e-12,
    )?);
    out.push(FixtureRow::measure(
        "counterexample n=4: min(mu, eta) = eta",
        &ce.eta,
        &min_convex(&ce.mu, &ce.eta, tol)?,
        1e-12,
    )?);
    out.push(FixtureRow::flag(
        "counterexample n=4: sandwich(eta, nu)",
        true,
        sandwich_check(&ce.eta, &ce.nu, tol)?,
    ));
    out.push(FixtureRow::measure(
        "counterexample n=4: I(mu, nu) = mu",
        &ce.mu,
        &project_i(&ce.mu, &ce.nu, 1.0)?.projected,
        1e-12,
    )?);
    Ok(())
}

fn dirac_rows(out: &mut Vec<FixtureRow>) -> Result<()> {
    let mu = DiscreteMeasure::from_atoms([(-1.0, 0.2), (0.0, 0.3), (2.0, 0.5)])?;
    let c = DiscreteMeasure::dirac(0.7);
    let c2 = DiscreteMeasure::dirac(-0.4);
    out.push(FixtureRow::measure(
        "dirac target: I(mu, delta_c) = delta_c",
        &c,
        &project_i(&mu, &c, 1.0)?.projected,
        1e-12,
    )?);
    out.push(FixtureRow::measure(
        "dirac target: J(mu, delta_c) = mu",
        &mu,
        &project_j(&mu, &c, 1.0)?.projected,
        1e-12,
    )?);
    let i1 = project_i(&mu, &c, 2.0)?.projected;
    let i2 = project_i(&mu, &c2, 2.0)?.projected;
    out.push(FixtureRow::new(
        "dirac target: W_2(I(mu, delta_c), I(mu, delta_c')) = W_2(delta_c, delta_c')",
        wasserstein(&c, &c2, 2.0)?,
        wasserstein(&i1, &i2, 2.0)?,
        1e-12,
    ));
    Ok(())
}

fn nu_half_rows(out: &mut Vec<FixtureRow>) -> Result<()> {
    let nu = nu_alpha(0.5);
    let origin = DiscreteMeasure::dirac(0.0);
    let c = DiscreteMeasure::dirac(0.375);
    out.push(FixtureRow::new(
        "nu^0.5: barycenter",
        0.375,
        nu.barycenter(),
        1e-15,
    ));
    out.push(FixtureRow::new(
        "nu^0.5: quantile at u=0.5",
        -0.25,
        nu.quantile().eval(0.5),
        0.0,
    ));
    out.push(FixtureRow::new(
        "nu^0.5: quantile at u=0.75",
        1.0,
        nu.quantile().eval(0.75),
        0.0,
    ));
    out.push(FixtureRow::new(
        "nu^0.5: W_1(delta_0, nu)",
        0.625,
        wasserstein(&origin, &nu, 1.0)?,
        1e-12,
    ));
    out.push(FixtureRow::measure(
        "nu^0.5: I(delta_0, nu) = delta_0.375",
        &c,
        &project_i(&origin, &nu, 1.0)?.projected,
        1e-12,
    )?);
    out.push(FixtureRow::measure(
        "nu^0.5: J(delta_0.375, nu) = nu",
        &nu,
        &project_j(&c, &nu, 1.0)?.projected,
        1e-12,
    )?);

    let sol = solve_weak_ot(&origin, &nu, &WeakOtOptions::default())?;
    out.push(FixtureRow::new(
        "nu^0.5: V_2^2(delta_0, nu)",
        0.140625,
        sol.value,
        1e-6,
    ));
    out.push(FixtureRow::measure(
        "nu^0.5: weak OT pushforward = delta_0.375",
        &c,
        &plan_barycenter_pushforward(&sol.plan, &origin, &nu)?,
        1e-4,
    )?);
    Ok(())
}

fn alpha_rows(out: &mut Vec<FixtureRow>, sweep: &[AlphaRow]) {
    for r in sweep {
        let a = r.alpha;
        out.push(FixtureRow::new(
            format!("nu^alpha, alpha={a}: W_1(I(mu,nu), I(mu',nu'))"),
            nu_alpha_spread(a),
            r.lhs_i,
            1e-12,
        ));
        out.push(FixtureRow::new(
            format!("nu^alpha, alpha={a}: W_1(mu, mu')"),
            nu_alpha_distance_to_origin(a),
            r.w_mu,
            1e-12,
        ));
        out.push(FixtureRow::new(
            format!("nu^alpha, alpha={a}: W_1(J(c,nu), J(c,nu'))"),
            nu_alpha_spread(a),
            r.lhs_j,
            1e-12,
        ));
    }
    if let Some(r) = sweep.iter().find(|r| r.alpha == 0.001) {
        out.push(FixtureRow::new(
            "nu^alpha, alpha=0.001: ratio lhs_I / W_1(mu, mu')",
            1.99601,
            r.ratio_i,
            1e-3,
        ));
        out.push(FixtureRow::new(
            "nu^alpha, alpha=0.001: ratio lhs_J / W_1(nu, nu')",
            1.99601,
            r.ratio_j,
            1e-3,
        ));
    }
}

fn sharp_rows(out: &mut Vec<FixtureRow>, report: &SharpReport) {
    let tag = format!("sharp quadruple n={} p={}", report.n, report.p);
    out.push(FixtureRow::new(
        format!("{tag}: |W^p(I,I') - W^p(mu,mu') - W^p(nu,nu')|"),
        0.0,
        report.residual(),
        1e-3,
    ));
    out.push(FixtureRow::new(
        format!("{tag}: W^p(mu, mu')"),
        1.0 / 1944.0,
        report.w_mu_pp,
        1e-5,
    ));
    out.push(FixtureRow::new(
        format!("{tag}: W^p(nu, nu')"),
        1.0 / 864.0,
        report.w_nu_pp,
        1e-5,
    ));
    out.push(FixtureRow::new(
        format!("{tag}: sup |F_I - u/2|"),
        0.0,
        report.proj_error,
        1e-3,
    ));
    out.push(FixtureRow::new(
        format!("{tag}: sup |F_I' - q'|"),
        0.0,
        report.proj2_error,
        1e-3,
    ));
}

pub fn lattice_table() -> Result<Vec<LatticeRow>> {
    let mut rows = Vec::new();
    for p in LATTICE_PS {
        for n in LATTICE_NS {
            let r = lattice_ratio(n, p)?;
            let pass = (r.join - r.expected).abs() <= 1e-12 && (r.meet - r.expected).abs() <= 1e-12;
            rows.push(LatticeRow {
                n,
                p,
                join: r.join,
                meet: r.meet,
                expected: r.expected,
                pass,
            });
        }
    }
    Ok(rows)
}

pub fn replay_examples() -> Result<ReplayReport> {
    let mut fixtures = Vec::new();
    counterexample_rows(&mut fixtures)?;
    dirac_rows(&mut fixtures)?;
    nu_half_rows(&mut fixtures)?;
    let alpha_sweep = ALPHA_SWEEP
        .iter()
        .map(|&a| alpha_row(a))
        .collect::<Result<Vec<_>>>()?;
    alpha_rows(&mut fixtures, &alpha_sweep);
    sharp_rows(&mut fixtures, &sharp_report(4096, 2.0)?);
    Ok(ReplayReport {
        fixtures,
        lattice: lattice_table()?,
        alpha_sweep,
    })
}

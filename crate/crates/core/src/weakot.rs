//! Barycentric weak optimal transport for `p = 2`, solved directly over the
//! transportation polytope:
//!
//! ```text
//! V_2^2(μ, ν) = min_π Σ_i μ_i (x_i − Σ_j π_ij y_j / μ_i)^2
//! ```
//!
//! The objective is a convex quadratic in `π`, minimized by projected gradient
//! descent with backtracking; each projection onto `Π(μ, ν)` runs Dykstra's
//! alternating projections between the marginal constraints and the
//! non-negative orthant. This solver shares no code with the quantile-based
//! projection and serves as an independent check on it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::DiscreteMeasure;

/// Marginal residual the polytope projection drives below.
const PROJECTION_TOL: f64 = 1e-13;
const PROJECTION_MAX_ITER: usize = 200_000;

/// A coupling of two discrete measures, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransportPlan {
    rows: usize,
    cols: usize,
    mass: Vec<f64>,
}

impl TransportPlan {
    pub fn new(rows: usize, cols: usize, mass: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || mass.len() != rows * cols {
            return Err(Error::InvalidPlan(format!(
                "{} entries for a {rows}x{cols} plan",
                mass.len()
            )));
        }
        if mass.iter().any(|m| !m.is_finite()) {
            return Err(Error::NonFinite {
                what: "transport plan",
            });
        }
        if mass.iter().any(|&m| m < 0.0) {
            return Err(Error::InvalidPlan("negative mass".into()));
        }
        Ok(Self { rows, cols, mass })
    }

    /// The independent coupling `μ ⊗ ν`.
    pub fn product(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Self {
        let mass = mu
            .atoms()
            .iter()
            .flat_map(|a| nu.atoms().iter().map(move |b| a.w * b.w))
            .collect();
        Self {
            rows: mu.len(),
            cols: nu.len(),
            mass,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mass[i * self.cols + j]
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.mass
            .chunks(self.cols)
            .map(|r| r.iter().sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for row in self.mass.chunks(self.cols) {
            for (o, m) in out.iter_mut().zip(row) {
                *o += m;
            }
        }
        out
    }

    /// Largest absolute deviation of a marginal from the measure weights.
    pub fn marginal_error(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
        marginal_error(&self.mass, self.cols, mu, nu)
    }

    fn check_shape(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
        if self.rows != mu.len() || self.cols != nu.len() {
            return Err(Error::InvalidPlan(format!(
                "plan is {}x{}, measures have {} and {} atoms",
                self.rows,
                self.cols,
                mu.len(),
                nu.len()
            )));
        }
        Ok(())
    }
}

fn marginal_error(mass: &[f64], cols: usize, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> f64 {
    let mut err = 0.0f64;
    let mut col = vec![0.0; cols];
    for (row, a) in mass.chunks(cols).zip(mu.atoms()) {
        err = err.max((row.iter().sum::<f64>() - a.w).abs());
        for (c, m) in col.iter_mut().zip(row) {
            *c += m;
        }
    }
    for (c, b) in col.iter().zip(nu.atoms()) {
        err = err.max((c - b.w).abs());
    }
    err
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakOtOptions {
    pub max_iter: usize,
    /// Stop once one step decreases the objective by less than this.
    pub tol: f64,
}

impl Default for WeakOtOptions {
    fn default() -> Self {
        Self {
            max_iter: 100_000,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakOtSolution {
    /// `V_2^2(μ, ν)`.
    pub value: f64,
    pub plan: TransportPlan,
    pub iterations: usize,
}

struct Problem<'a> {
    mu: &'a DiscreteMeasure,
    nu: &'a DiscreteMeasure,
    rows: usize,
    cols: usize,
}

impl Problem<'_> {
    /// Per-row residuals `μ_i x_i − Σ_j π_ij y_j`.
    fn residuals(&self, mass: &[f64]) -> Vec<f64> {
        mass.chunks(self.cols)
            .zip(self.mu.atoms())
            .map(|(row, a)| {
                a.w * a.x
                    - row
                        .iter()
                        .zip(self.nu.atoms())
                        .map(|(m, b)| m * b.x)
                        .sum::<f64>()
            })
            .collect()
    }

    fn objective(&self, mass: &[f64]) -> f64 {
        self.residuals(mass)
            .iter()
            .zip(self.mu.atoms())
            .map(|(r, a)| r * r / a.w)
            .sum()
    }

    fn gradient(&self, mass: &[f64]) -> Vec<f64> {
        let res = self.residuals(mass);
        let mut g = Vec::with_capacity(mass.len());
        for (r, a) in res.iter().zip(self.mu.atoms()) {
            let scale = -2.0 * r / a.w;
            g.extend(self.nu.atoms().iter().map(|b| scale * b.x));
        }
        g
    }

    /// Orthogonal projection onto the affine set of matrices with the right
    /// row and column sums.
    fn project_affine(&self, x: &mut [f64]) {
        let (n, m) = (self.rows as f64, self.cols as f64);
        let row_excess: Vec<f64> = x
            .chunks(self.cols)
            .zip(self.mu.atoms())
            .map(|(row, a)| row.iter().sum::<f64>() - a.w)
            .collect();
        let mut col_excess: Vec<f64> = self.nu.atoms().iter().map(|b| -b.w).collect();
        for row in x.chunks(self.cols) {
            for (c, v) in col_excess.iter_mut().zip(row) {
                *c += v;
            }
        }
        let total: f64 = row_excess.iter().sum();
        for (i, row) in x.chunks_mut(self.cols).enumerate() {
            let a = row_excess[i] / m;
            for (j, v) in row.iter_mut().enumerate() {
                let b = (col_excess[j] - total / m) / n;
                *v -= a + b;
            }
        }
    }

    /// Euclidean projection onto `Π(μ, ν)` by Dykstra's algorithm. Only the
    /// orthant step needs a correction term since the other set is affine.
    fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        let mut correction = vec![0.0; x.len()];
        let mut a = vec![0.0; x.len()];
        for _ in 0..PROJECTION_MAX_ITER {
            a.copy_from_slice(&y);
            self.project_affine(&mut a);
            let mut moved = 0.0f64;
            for ((yk, ak), ck) in y.iter_mut().zip(&a).zip(correction.iter_mut()) {
                let z = ak + *ck;
                let next = z.max(0.0);
                *ck = z - next;
                moved = moved.max((next - *yk).abs());
                *yk = next;
            }
            if marginal_error(&y, self.cols, self.mu, self.nu) <= PROJECTION_TOL
                && moved <= PROJECTION_TOL
            {
                break;
            }
        }
        y
    }
}

/// Minimizes the barycentric weak transport cost from the product coupling.
pub fn solve_weak_ot(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    opts: &WeakOtOptions,
) -> Result<WeakOtSolution> {
    let problem = Problem {
        mu,
        nu,
        rows: mu.len(),
        cols: nu.len(),
    };
    let mut plan = TransportPlan::product(mu, nu).mass;
    let mut value = problem.objective(&plan);

    // Lipschitz constant of the gradient: row i contributes 2‖y‖²/μ_i.
    let y_norm2: f64 = nu.atoms().iter().map(|b| b.x * b.x).sum();
    let min_w = mu.atoms().iter().map(|a| a.w).fold(f64::INFINITY, f64::min);
    let lipschitz = 2.0 * y_norm2 / min_w;
    if lipschitz == 0.0 {
        // ν = δ_0: every coupling has the same cost.
        let plan = TransportPlan {
            rows: mu.len(),
            cols: nu.len(),
            mass: plan,
        };
        return Ok(WeakOtSolution {
            value,
            plan,
            iterations: 0,
        });
    }
    let min_step = 1.0 / lipschitz;
    let mut step = min_step;

    let mut last_decrease = f64::INFINITY;
    for iter in 1..=opts.max_iter {
        let grad = problem.gradient(&plan);
        let (candidate, cand_value) = loop {
            let trial: Vec<f64> = plan.iter().zip(&grad).map(|(p, g)| p - step * g).collect();
            let cand = problem.project(&trial);
            let cand_value = problem.objective(&cand);
            let (mut lin, mut quad) = (0.0, 0.0);
            for ((c, p), g) in cand.iter().zip(&plan).zip(&grad) {
                let d = c - p;
                lin += g * d;
                quad += d * d;
            }
            if cand_value <= value + lin + quad / (2.0 * step) + 1e-15 || step <= min_step {
                break (cand, cand_value);
            }
            step = (0.5 * step).max(min_step);
        };

        last_decrease = value - cand_value;
        if cand_value <= value {
            plan = candidate;
            value = cand_value;
        }
        if last_decrease < opts.tol {
            let plan = TransportPlan {
                rows: mu.len(),
                cols: nu.len(),
                mass: plan,
            };
            return Ok(WeakOtSolution {
                value,
                plan,
                iterations: iter,
            });
        }
        step *= 1.5;
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        last_decrease,
    })
}

/// `V_2^2(μ, ν)`. Only `p = 2` is supported.
pub fn weak_ot_value(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    opts: &WeakOtOptions,
) -> Result<f64> {
    solve_weak_ot(mu, nu, opts).map(|s| s.value)
}

/// Image of `μ` under `x_i ↦ Σ_j π_ij y_j / μ_i`.
pub fn plan_barycenter_pushforward(
    plan: &TransportPlan,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<DiscreteMeasure> {
    plan.check_shape(mu, nu)?;
    DiscreteMeasure::from_atoms(mu.atoms().iter().enumerate().map(|(i, a)| {
        let moved: f64 = (0..plan.cols)
            .map(|j| plan.get(i, j) * nu.atoms()[j].x)
            .sum();
        (moved / a.w, a.w)
    }))
}

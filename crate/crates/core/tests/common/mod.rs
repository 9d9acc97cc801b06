//! Brute-force oracles shared by the integration tests. None of them call the
//! hull, projection or lattice code they are used to check.

#![allow(dead_code)]

use rand::Rng;
use wproj::{DiscreteMeasure, PiecewiseLinearFn, Vertex};

/// Lower convex envelope at `u` as the minimum over all chords spanning `u`.
pub fn chord_min(vertices: &[Vertex], u: f64) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in vertices.iter().enumerate() {
        if a.u > u {
            break;
        }
        if a.u == u {
            best = best.min(a.y);
        }
        for b in &vertices[i + 1..] {
            if b.u < u {
                continue;
            }
            let t = (u - a.u) / (b.u - a.u);
            best = best.min(a.y + t * (b.y - a.y));
        }
    }
    best
}

/// Random piecewise-linear function on `[0, 1]` with `2..=max_vertices` vertices.
pub fn random_plf<R: Rng>(rng: &mut R, max_vertices: usize) -> PiecewiseLinearFn {
    let k = rng.random_range(2..=max_vertices);
    let mut us: Vec<f64> = (0..k - 2).map(|_| rng.random_range(0.0..1.0)).collect();
    us.push(0.0);
    us.push(1.0);
    us.sort_by(f64::total_cmp);
    us.dedup_by(|b, a| *b - *a < 1e-6);
    *us.last_mut().unwrap() = 1.0;
    let vertices = us
        .into_iter()
        .map(|u| Vertex::new(u, rng.random_range(-1.0..=1.0)))
        .collect();
    PiecewiseLinearFn::new(vertices).unwrap()
}

/// `E(X − k)^+`.
pub fn call(m: &DiscreteMeasure, k: f64) -> f64 {
    m.atoms().iter().map(|a| a.w * (a.x - k).max(0.0)).sum()
}

/// Convex order through call prices: equal means and `E(X − k)^+ ≤ E(Y − k)^+`
/// at every support point of either measure. Both sides are piecewise linear
/// in `k` with kinks only there.
pub fn convex_order_by_calls(a: &DiscreteMeasure, b: &DiscreteMeasure, tol: f64) -> bool {
    if (a.barycenter() - b.barycenter()).abs() > tol {
        return false;
    }
    a.atoms()
        .iter()
        .chain(b.atoms())
        .all(|k| call(a, k.x) <= call(b, k.x) + tol)
}

/// `W_p^p` between two `n`-point empirical measures by sorting.
pub fn sorted_wpp(xs: &[f64], ys: &[f64], p: f64) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let (mut xs, mut ys) = (xs.to_vec(), ys.to_vec());
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    xs.iter()
        .zip(&ys)
        .map(|(x, y)| (x - y).abs().powf(p))
        .sum::<f64>()
        / xs.len() as f64
}

/// `W_1` through the CDF formula `∫ |F_a − F_b| dx`.
pub fn w1_by_cdf(a: &DiscreteMeasure, b: &DiscreteMeasure) -> f64 {
    let mut xs: Vec<f64> = a.atoms().iter().chain(b.atoms()).map(|t| t.x).collect();
    xs.sort_by(f64::total_cmp);
    let cdf = |m: &DiscreteMeasure, x: f64| {
        m.atoms()
            .iter()
            .filter(|t| t.x <= x)
            .map(|t| t.w)
            .sum::<f64>()
    };
    xs.windows(2)
        .map(|w| (cdf(a, w[0]) - cdf(b, w[0])).abs() * (w[1] - w[0]))
        .sum()
}

/// `x ↦ Σ w |x − x_i|`.
pub fn potential_at(m: &DiscreteMeasure, x: f64) -> f64 {
    m.atoms().iter().map(|a| a.w * (x - a.x).abs()).sum()
}

/// Vertices of `min(u_a, u_b)` on `[lo, hi]`: all kinks plus the crossings
/// between consecutive kinks, found from the affine pieces directly.
pub fn min_potential_vertices(
    a: &DiscreteMeasure,
    b: &DiscreteMeasure,
    lo: f64,
    hi: f64,
) -> Vec<Vertex> {
    let mut xs: Vec<f64> = a.atoms().iter().chain(b.atoms()).map(|t| t.x).collect();
    xs.push(lo);
    xs.push(hi);
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let d = |x: f64| potential_at(a, x) - potential_at(b, x);
    let mut pts = Vec::new();
    for w in xs.windows(2) {
        pts.push(w[0]);
        let (d0, d1) = (d(w[0]), d(w[1]));
        if d0 * d1 < 0.0 {
            pts.push(w[0] + (w[1] - w[0]) * d0 / (d0 - d1));
        }
    }
    pts.push(*xs.last().unwrap());
    pts.into_iter()
        .map(|x| Vertex::new(x, potential_at(a, x).min(potential_at(b, x))))
        .collect()
}

/// Measure with the given atoms; panics on invalid input.
pub fn measure(atoms: &[(f64, f64)]) -> DiscreteMeasure {
    DiscreteMeasure::from_atoms(atoms.iter().copied()).unwrap()
}

//! Reference measures with known projections, distances and lattice values.

use crate::measures::{DiscreteMeasure, GeneralQuantile, QuantilePiece};

/// `(1 − α) δ_{−α²} + α δ_1`, with barycenter `α(1 − α(1 − α))`.
pub fn nu_alpha(alpha: f64) -> DiscreteMeasure {
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    DiscreteMeasure::from_atoms([(-alpha * alpha, 1.0 - alpha), (1.0, alpha)])
        .expect("valid two-point measure")
}

/// `α(1 − α(1 − α))`, the barycenter of [`nu_alpha`].
pub fn nu_alpha_barycenter(alpha: f64) -> f64 {
    alpha * (1.0 - alpha * (1.0 - alpha))
}

/// `W_1(ν^α, δ_c)` with `c` the barycenter of `ν^α`.
pub fn nu_alpha_spread(alpha: f64) -> f64 {
    2.0 * (alpha + alpha * alpha * (alpha * (1.0 - alpha) - 1.0))
}

/// `W_1(δ_0, ν^α)`.
pub fn nu_alpha_distance_to_origin(alpha: f64) -> f64 {
    alpha + alpha * alpha * (1.0 - alpha)
}

/// Three measures with `η ≤_c μ ≤_c ν` on the grid of step `1/n`, for which the
/// convex-order lattice operations are not Lipschitz.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub mu: DiscreteMeasure,
    pub nu: DiscreteMeasure,
    pub eta: DiscreteMeasure,
}

pub fn counterexample(n: usize) -> Counterexample {
    assert!(n >= 3, "the construction needs n >= 3");
    let nf = n as f64;
    let inner = |lo: usize, hi: usize| (lo..=hi).map(move |i| (i as f64 / nf, 1.0 / nf));

    let nu = std::iter::once((0.0, 0.5 / nf))
        .chain(inner(1, n - 1))
        .chain(std::iter::once((1.0, 0.5 / nf)));
    let mu = (1..=n).map(|i| ((2 * i - 1) as f64 / (2.0 * nf), 1.0 / nf));
    let eta = std::iter::once((1.0 / nf, 1.5 / nf))
        .chain(
            if n >= 4 { Some(inner(2, n - 2)) } else { None }
                .into_iter()
                .flatten(),
        )
        .chain(std::iter::once(((nf - 1.0) / nf, 1.5 / nf)));

    Counterexample {
        mu: DiscreteMeasure::from_atoms(mu).expect("valid"),
        nu: DiscreteMeasure::from_atoms(nu).expect("valid"),
        eta: DiscreteMeasure::from_atoms(eta).expect("valid"),
    }
}

fn piece(u_hi: f64, slope: f64, value_hi: f64) -> QuantilePiece {
    QuantilePiece {
        u_hi,
        slope,
        value_hi,
    }
}

/// Four continuous measures whose projections satisfy
/// `W_p^p(I(μ,ν), I(μ',ν')) = W_p^p(μ,μ') + W_p^p(ν,ν')`.
#[derive(Debug, Clone)]
pub struct SharpQuadruple {
    pub mu: GeneralQuantile,
    pub mu2: GeneralQuantile,
    pub nu: GeneralQuantile,
    pub nu2: GeneralQuantile,
    /// Quantile of `I(μ, ν)`, namely `u/2`.
    pub proj: GeneralQuantile,
    /// Quantile of `I(μ', ν')`.
    pub proj2: GeneralQuantile,
}

pub fn sharp_quadruple() -> SharpQuadruple {
    let q = |pieces| GeneralQuantile::new(pieces).expect("valid quantile");
    SharpQuadruple {
        // u on (0, 1/2], (1 + u)/2 on (1/2, 1)
        mu: q(vec![piece(0.5, 1.0, 0.5), piece(1.0, 0.5, 1.0)]),
        // u on (0, 1/2], (12 + 5u)/18 on (1/2, 1)
        mu2: q(vec![
            piece(0.5, 1.0, 0.5),
            piece(1.0, 5.0 / 18.0, 17.0 / 18.0),
        ]),
        nu: q(vec![piece(1.0, 0.5, 0.5)]),
        // u/3 on (0, 1/2], u/2 on (1/2, 1)
        nu2: q(vec![piece(0.5, 1.0 / 3.0, 1.0 / 6.0), piece(1.0, 0.5, 0.5)]),
        proj: q(vec![piece(1.0, 0.5, 0.5)]),
        // u/3 on (0, 1/2], (3 + 5u)/18 on (1/2, 1)
        proj2: q(vec![
            piece(0.5, 1.0 / 3.0, 1.0 / 6.0),
            piece(1.0, 5.0 / 18.0, 8.0 / 18.0),
        ]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counterexample_n4_nu() {
        let c = counterexample(4);
        let expected = DiscreteMeasure::from_atoms([
            (0.0, 0.125),
            (0.25, 0.25),
            (0.5, 0.25),
            (0.75, 0.25),
            (1.0, 0.125),
        ])
        .unwrap();
        assert_eq!(c.nu, expected);
        assert_eq!(
            c.mu,
            DiscreteMeasure::uniform(&[0.125, 0.375, 0.625, 0.875]).unwrap()
        );
        assert_eq!(c.eta.len(), 3);
    }

    #[test]
    fn counterexample_n3_eta_has_two_atoms() {
        let c = counterexample(3);
        assert_eq!(c.eta.len(), 2);
        assert!((c.eta.barycenter() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn counterexample_barycenters_agree() {
        for n in 3..=32 {
            let c = counterexample(n);
            assert!((c.mu.barycenter() - 0.5).abs() < 1e-14);
            assert!((c.nu.barycenter() - 0.5).abs() < 1e-14);
            assert!((c.eta.barycenter() - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn nu_alpha_barycenter_matches_closed_form() {
        for a in [0.5, 0.1, 0.01, 0.001] {
            assert!((nu_alpha(a).barycenter() - nu_alpha_barycenter(a)).abs() < 1e-15);
        }
    }

    #[test]
    fn sharp_quadruple_projection_means() {
        let s = sharp_quadruple();
        assert!((s.proj.mean() - s.nu.mean()).abs() < 1e-15);
        assert!((s.proj2.mean() - s.nu2.mean()).abs() < 1e-15);
    }
}

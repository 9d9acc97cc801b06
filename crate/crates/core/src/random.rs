//! Reproducible random inputs for audits and property checks.
//!
//! Random measures have an atom count uniform in `1..=max_atoms`, positions
//! i.i.d. uniform on `[−1, 1]` and weights from normalized i.i.d. standard
//! exponentials. Each audit trial draws from its own ChaCha stream keyed by
//! `(seed, trial)`, so results do not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::hull::StepFn;
use crate::measures::DiscreteMeasure;

pub type TrialRng = ChaCha8Rng;

/// Independent generator for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn exp_weights<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let w: f64 = rng.sample(Exp1);
            // Exp1 can return 0 with vanishing probability.
            w.max(f64::MIN_POSITIVE)
        })
        .collect()
}

pub fn random_measure<R: Rng>(rng: &mut R, max_atoms: usize) -> DiscreteMeasure {
    let n = rng.random_range(1..=max_atoms);
    let weights = exp_weights(rng, n);
    DiscreteMeasure::from_atoms(
        weights
            .into_iter()
            .map(|w| (rng.random_range(-1.0..=1.0), w)),
    )
    .expect("positive finite weights")
}

/// A random measure shifted to have the given barycenter.
pub fn random_measure_with_barycenter<R: Rng>(
    rng: &mut R,
    max_atoms: usize,
    barycenter: f64,
) -> DiscreteMeasure {
    let m = random_measure(rng, max_atoms);
    let dx = barycenter - m.barycenter();
    m.shifted(dx)
}

/// Splits random atoms into two points around them, keeping each atom's mean:
/// the result dominates `m` in convex order.
pub fn mean_preserving_spread<R: Rng>(rng: &mut R, m: &DiscreteMeasure) -> DiscreteMeasure {
    let mut out = Vec::with_capacity(2 * m.len());
    for a in m.atoms() {
        if rng.random_bool(0.6) {
            let left: f64 = rng.random_range(0.05..0.5);
            let right: f64 = rng.random_range(0.05..0.5);
            out.push((a.x - left, a.w * right / (left + right)));
            out.push((a.x + right, a.w * left / (left + right)));
        } else {
            out.push((a.x, a.w));
        }
    }
    DiscreteMeasure::from_atoms(out).expect("split weights are positive")
}

/// Sends the atoms of `m` into `bins` random groups by a random coupling and
/// collapses each group to its barycenter: the result is dominated by `m`.
pub fn mean_preserving_contraction<R: Rng>(
    rng: &mut R,
    m: &DiscreteMeasure,
    bins: usize,
) -> DiscreteMeasure {
    let bins = bins.max(1);
    let mut mass = vec![0.0; bins];
    let mut moment = vec![0.0; bins];
    for a in m.atoms() {
        let split = exp_weights(rng, bins);
        // Sparse splits reach the extreme points of the family more often.
        let keep: Vec<bool> = (0..bins).map(|_| rng.random_bool(0.5)).collect();
        let kept: Vec<f64> = split
            .iter()
            .zip(&keep)
            .map(|(&s, &k)| if k { s } else { 0.0 })
            .collect();
        let total: f64 = kept.iter().sum();
        let (shares, total) = if total > 0.0 {
            (kept, total)
        } else {
            (split.clone(), split.iter().sum())
        };
        for b in 0..bins {
            let w = a.w * shares[b] / total;
            mass[b] += w;
            moment[b] += w * a.x;
        }
    }
    DiscreteMeasure::from_atoms(
        mass.iter()
            .zip(&moment)
            .filter(|(&w, _)| w > 0.0)
            .map(|(&w, &mx)| (mx / w, w)),
    )
    .expect("bins with mass")
}

/// Step function with `1..=max_cells` cells, random breakpoints and values in
/// `[−1, 1]`.
pub fn random_step_fn<R: Rng>(rng: &mut R, max_cells: usize) -> StepFn {
    let cells = rng.random_range(1..=max_cells);
    let mut inner: Vec<f64> = (0..cells - 1).map(|_| rng.random_range(0.0..1.0)).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup_by(|b, a| *b - *a < 1e-9);
    inner.retain(|&u| u > 1e-9 && u < 1.0 - 1e-9);
    let breaks: Vec<f64> = std::iter::once(0.0)
        .chain(inner)
        .chain(std::iter::once(1.0))
        .collect();
    let values = (0..breaks.len() - 1)
        .map(|_| rng.random_range(-1.0..=1.0))
        .collect();
    StepFn::new(breaks, values).expect("sorted breakpoints")
}

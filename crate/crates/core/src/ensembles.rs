//! Seeded random surfaces and covers for property tests and acceptance runs.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::exterior::RealVector;
use crate::inequality::UniformCover;
use crate::rng::Rng;
use crate::surface::{Atom, DiscreteSurface};

/// `n` atoms with Gaussian vectors and weights uniform in `[0.25, 2)`.
///
/// Redraws until the vectors span `R^d` when `n ≥ d`.
pub fn random_surface(d: usize, n: usize, rng: &mut Rng) -> Result<DiscreteSurface> {
    if d == 0 || n == 0 {
        return invalid("random surface needs d ≥ 1 and n ≥ 1");
    }
    loop {
        let atoms = (0..n)
            .map(|_| Atom {
                weight: rng.random_range(0.25..2.0),
                vector: RealVector::from_fn(d, |_, _| StandardNormal.sample(rng)),
            })
            .collect();
        let s = DiscreteSurface::new(d, atoms)?;
        if n < d || s.is_spanning() {
            return Ok(s);
        }
    }
}

/// A random surface with `d ≤ n ≤ n_max` atoms.
pub fn random_spanning_surface(d: usize, n_max: usize, rng: &mut Rng) -> Result<DiscreteSurface> {
    if n_max < d {
        return invalid(format!("need n_max ≥ d, got {n_max} < {d}"));
    }
    let n = rng.random_range(d..=n_max);
    random_surface(d, n, rng)
}

/// A random partition of `{0..j}` into nonempty blocks.
pub fn random_partition(j: usize, rng: &mut Rng) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..j).collect();
    idx.shuffle(rng);
    let blocks = rng.random_range(1..=j.max(1));
    let mut out = vec![Vec::new(); blocks];
    for (k, &l) in idx.iter().enumerate() {
        // the first `blocks` indices seed distinct blocks so none is empty
        let b = if k < blocks { k } else { rng.random_range(0..blocks) };
        out[b].push(l);
    }
    for b in &mut out {
        b.sort_unstable();
    }
    out
}

fn basic_cover(j: usize, rng: &mut Rng) -> Result<UniformCover> {
    match rng.random_range(0..4) {
        0 if j >= 2 => UniformCover::leave_one_out(j),
        1 => UniformCover::singletons(j),
        _ => UniformCover::partition(j, random_partition(j, rng)),
    }
}

/// A random uniform cover of `{0..j}`: a leave-one-out cover, singletons, a
/// random partition, or a convex combination of two of these.
pub fn random_cover(j: usize, rng: &mut Rng) -> Result<UniformCover> {
    let a = basic_cover(j, rng)?;
    if rng.random_bool(0.5) {
        return Ok(a);
    }
    let b = basic_cover(j, rng)?;
    let t: f64 = rng.random_range(0.1..0.9);
    let mut sets = a.sets().to_vec();
    sets.extend_from_slice(b.sets());
    let alphas = a.alphas().iter().map(|x| t * x).chain(b.alphas().iter().map(|x| (1.0 - t) * x)).collect();
    UniformCover::new(j, sets, alphas)
}

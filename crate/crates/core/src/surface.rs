//! Generalized hypersurfaces discretized as weighted atoms, sphere samplers
//! and the closed-form sphere reference constants `Q_j^p(S^{d-1})`.

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exterior::RealVector;
use crate::numeric::{ball_volume, ln_ball_volume, ln_factorial};
use crate::q::Exponent;
use crate::rng::{self, Rng};

/// One atom of a discrete surface: a mass `weight` carrying the vector `vector`.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub weight: f64,
    pub vector: RealVector,
}

/// A generalized `d`-hypersurface `(S, σ, v)` with `σ` a finite sum of point masses.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSurface {
    dim: usize,
    atoms: Vec<Atom>,
    spanning: bool,
}

/// Wire format: `{"dim": int, "atoms": [{"w": float, "v": [float; dim]}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceFile {
    pub dim: usize,
    pub atoms: Vec<AtomFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomFile {
    pub w: f64,
    pub v: Vec<f64>,
}

impl DiscreteSurface {
    /// Validate and build a surface. Non-spanning surfaces are accepted and flagged.
    pub fn new(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        if dim == 0 {
            return invalid("dimension must be at least 1");
        }
        if atoms.is_empty() {
            return Err(Error::EmptySurface);
        }
        for (index, atom) in atoms.iter().enumerate() {
            if !(atom.weight > 0.0) || !atom.weight.is_finite() {
                return Err(Error::NonpositiveWeight { index, weight: atom.weight });
            }
            if atom.vector.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: atom.vector.len() });
            }
            if atom.vector.iter().any(|x| !x.is_finite()) {
                return invalid(format!("atom {index} has a non-finite entry"));
            }
        }
        let spanning = span_rank(dim, &atoms) == dim;
        Ok(Self { dim, atoms, spanning })
    }

    /// Build from `(weight, vector)` pairs.
    pub fn from_pairs(dim: usize, pairs: impl IntoIterator<Item = (f64, Vec<f64>)>) -> Result<Self> {
        let atoms = pairs
            .into_iter()
            .map(|(weight, v)| Atom { weight, vector: RealVector::from_vec(v) })
            .collect();
        Self::new(dim, atoms)
    }

    pub fn dim(&self) -> usize {
        self.dim
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

    /// Whether the vectors span `R^d` (the condition under which `K^p` is compact).
    pub fn is_spanning(&self) -> bool {
        self.spanning
    }

    /// Total mass `σ(S)`.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// The same surface with every weight multiplied by `c > 0`.
    pub fn scale_weights(&self, c: f64) -> Result<Self> {
        Self::new(
            self.dim,
            self.atoms.iter().map(|a| Atom { weight: a.weight * c, vector: a.vector.clone() }).collect(),
        )
    }

    /// Weights divided by the total mass (a probability measure).
    pub fn normalized(&self) -> Result<Self> {
        self.scale_weights(1.0 / self.total_mass())
    }

    pub fn to_file(&self) -> SurfaceFile {
        SurfaceFile {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|a| AtomFile { w: a.weight, v: a.vector.iter().copied().collect() })
                .collect(),
        }
    }
}

fn span_rank(dim: usize, atoms: &[Atom]) -> usize {
    let m = DMatrix::from_fn(dim, atoms.len(), |r, c| atoms[c].vector[r]);
    let scale = m.amax();
    if scale == 0.0 {
        return 0;
    }
    m.rank(1e-10 * scale * (dim.max(atoms.len()) as f64))
}

/// Validate a parsed surface description.
pub fn validate_surface(raw: &SurfaceFile) -> Result<DiscreteSurface> {
    let atoms = raw
        .atoms
        .iter()
        .map(|a| Atom { weight: a.w, vector: RealVector::from_vec(a.v.clone()) })
        .collect();
    DiscreteSurface::new(raw.dim, atoms)
}

/// Uniform random unit vector in `R^d` (normalized Gaussian).
pub fn random_unit_vector(d: usize, rng: &mut Rng) -> RealVector {
    loop {
        let g = RealVector::from_fn(d, |_, _| StandardNormal.sample(rng));
        let n = g.norm();
        if n > 1e-300 {
            return g / n;
        }
    }
}

/// `n` uniform points of `S^{d-1}` with equal weights summing to `d·ω_d`.
pub fn make_sphere_surface(d: usize, n: usize, seed: u64) -> Result<DiscreteSurface> {
    if d == 0 || n == 0 {
        return invalid("sphere surface needs d ≥ 1 and n ≥ 1");
    }
    let mut rng = rng::from_seed(seed);
    let w = sphere_area(d) / n as f64;
    let atoms = (0..n).map(|_| Atom { weight: w, vector: random_unit_vector(d, &mut rng) }).collect();
    DiscreteSurface::new(d, atoms)
}

/// The unit circle discretized at `n` equispaced midpoint angles, weights `2π/n`.
pub fn make_circle_surface(n: usize) -> Result<DiscreteSurface> {
    if n == 0 {
        return invalid("circle surface needs n ≥ 1");
    }
    let tau = std::f64::consts::TAU;
    let w = tau / n as f64;
    let atoms = (0..n)
        .map(|k| {
            let t = tau * (k as f64 + 0.5) / n as f64;
            Atom { weight: w, vector: RealVector::from_vec(vec![t.cos(), t.sin()]) }
        })
        .collect();
    DiscreteSurface::new(2, atoms)
}

/// Replace every vector `v` by `M v`; weights are unchanged.
pub fn transform_surface(s: &DiscreteSurface, m: &DMatrix<f64>) -> Result<DiscreteSurface> {
    if m.nrows() != s.dim() || m.ncols() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: m.nrows().max(m.ncols()) });
    }
    let atoms = s.atoms().iter().map(|a| Atom { weight: a.weight, vector: m * &a.vector }).collect();
    DiscreteSurface::new(s.dim(), atoms)
}

/// Surface area `d·ω_d` of `S^{d-1}`.
pub fn sphere_area(d: usize) -> f64 {
    d as f64 * ball_volume(d)
}

/// `ln Q_j^p(S^{d-1})^{jp}` for `p ∈ {1, 2}`:
/// `p = 1`: `d! ω_{d-1}^j ω_d / ((d−j)! ω_{d−j})`;
/// `p = 2`: `ω_d^j d! / (d−j)!`.
pub fn ln_sphere_moment(d: usize, j: usize, p: u8) -> Result<f64> {
    if j == 0 || j > d {
        return invalid(format!("need 1 ≤ j ≤ d, got j = {j}, d = {d}"));
    }
    let jf = j as f64;
    match p {
        1 => Ok(ln_factorial(d) + jf * ln_ball_volume(d - 1) + ln_ball_volume(d)
            - ln_factorial(d - j)
            - ln_ball_volume(d - j)),
        2 => Ok(jf * ln_ball_volume(d) + ln_factorial(d) - ln_factorial(d - j)),
        _ => invalid(format!("no closed form for p = {p}")),
    }
}

/// Closed-form `Q_j^p(S^{d-1})` for `p ∈ {1, 2, ∞}`.
pub fn sphere_reference(d: usize, j: usize, p: Exponent) -> Result<f64> {
    if j == 0 || j > d {
        return invalid(format!("need 1 ≤ j ≤ d, got j = {j}, d = {d}"));
    }
    match p {
        Exponent::Infinite => Ok(1.0),
        Exponent::Finite(x) if x == 1.0 => Ok((ln_sphere_moment(d, j, 1)? / j as f64).exp()),
        Exponent::Finite(x) if x == 2.0 => Ok((ln_sphere_moment(d, j, 2)? / (2 * j) as f64).exp()),
        Exponent::Finite(x) if x > 0.0 => invalid(format!(
            "no closed form for p = {x}; estimate with sphere_reference_mc"
        )),
        _ => invalid("closed-form sphere constants need p > 0"),
    }
}

/// Monte Carlo estimate of `Q_j^p(S^{d-1})` for any `0 < p < ∞`.
pub fn sphere_reference_mc(d: usize, j: usize, p: f64, samples: u64, seed: u64) -> Result<crate::q::QEstimate> {
    if j == 0 || j > d {
        return invalid(format!("need 1 ≤ j ≤ d, got j = {j}, d = {d}"));
    }
    let sphere = SphereSampler::new(d)?;
    let samplers: Vec<&dyn VectorSampler> = vec![&sphere; j];
    crate::q::q_mc(&samplers, p, samples, seed)
}

/// Table of sphere constants for one dimension.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereConstants {
    pub dim: usize,
    /// `ω_0, …, ω_d`.
    pub ball_volumes: Vec<f64>,
    pub rows: Vec<SphereConstantRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereConstantRow {
    pub j: usize,
    pub p: f64,
    pub value: f64,
}

impl SphereConstants {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return invalid("dimension must be at least 1");
        }
        let mut rows = Vec::new();
        for p in [1.0, 2.0] {
            for j in 1..=d {
                rows.push(SphereConstantRow { j, p, value: sphere_reference(d, j, Exponent::Finite(p))? });
            }
        }
        Ok(Self { dim: d, ball_volumes: (0..=d).map(ball_volume).collect(), rows })
    }

    pub fn get(&self, j: usize, p: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.j == j && r.p == p).map(|r| r.value)
    }
}

/// A source of random vectors with an attached total mass, used by the
/// Monte Carlo estimators. The measure is `total_mass()` times the law of `sample`.
pub trait VectorSampler: Sync {
    fn dim(&self) -> usize;
    fn total_mass(&self) -> f64;
    fn sample(&self, rng: &mut Rng) -> RealVector;
}

/// Uniform measure on `S^{d-1}` with total mass `d·ω_d`.
#[derive(Debug, Clone, Copy)]
pub struct SphereSampler {
    dim: usize,
}

impl SphereSampler {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return invalid("dimension must be at least 1");
        }
        Ok(Self { dim })
    }
}

impl VectorSampler for SphereSampler {
    fn dim(&self) -> usize {
        self.dim
    }
    fn total_mass(&self) -> f64 {
        sphere_area(self.dim)
    }
    fn sample(&self, rng: &mut Rng) -> RealVector {
        random_unit_vector(self.dim, rng)
    }
}

/// Draws atoms of a discrete surface with probability proportional to weight.
#[derive(Debug, Clone)]
pub struct AtomSampler<'a> {
    surface: &'a DiscreteSurface,
    index: WeightedIndex<f64>,
}

impl<'a> AtomSampler<'a> {
    pub fn new(surface: &'a DiscreteSurface) -> Result<Self> {
        let index = WeightedIndex::new(surface.atoms().iter().map(|a| a.weight))
            .map_err(|e| Error::InvalidArgument(format!("cannot sample atoms: {e}")))?;
        Ok(Self { surface, index })
    }
}

impl VectorSampler for AtomSampler<'_> {
    fn dim(&self) -> usize {
        self.surface.dim()
    }
    fn total_mass(&self) -> f64 {
        self.surface.total_mass()
    }
    fn sample(&self, rng: &mut Rng) -> RealVector {
        self.surface.atoms()[self.index.sample(rng)].vector.clone()
    }
}

/// Uniform point of `[-h, h]`.
pub(crate) fn symmetric_uniform(rng: &mut Rng, h: f64) -> f64 {
    h * (2.0 * rng.random::<f64>() - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn validation_examples() {
        let s = DiscreteSurface::from_pairs(2, [(1.0, vec![1.0, 0.0]), (1.0, vec![0.0, 1.0])]).unwrap();
        assert!(s.is_spanning());
        let s = DiscreteSurface::from_pairs(2, [(1.0, vec![1.0, 0.0])]).unwrap();
        assert!(!s.is_spanning());
        let e = DiscreteSurface::from_pairs(2, [(-1.0, vec![1.0, 0.0])]).unwrap_err();
        assert!(e.to_string().contains("nonpositive weight"));
        assert_eq!(DiscreteSurface::new(2, vec![]).unwrap_err(), Error::EmptySurface);
        assert!(matches!(
            DiscreteSurface::from_pairs(2, [(1.0, vec![1.0])]),
            Err(Error::DimensionMismatch { .. })
        ));
        let zero = DiscreteSurface::from_pairs(2, [(1.0, vec![0.0, 0.0])]).unwrap();
        assert!(!zero.is_spanning());
    }

    #[test]
    fn json_schema_round_trip() {
        let text = r#"{"dim": 2, "atoms": [{"w": 1.0, "v": [1.0, 0.0]}, {"w": 0.5, "v": [0.0, 2.0]}]}"#;
        let raw: SurfaceFile = serde_json::from_str(text).unwrap();
        let s = validate_surface(&raw).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.to_file(), raw);
        assert!(serde_json::from_str::<SurfaceFile>(r#"{"dim": 2, "atoms": [{"weight": 1}]}"#).is_err());
    }

    #[test]
    fn sphere_surface_construction() {
        let s = make_sphere_surface(3, 500, 4).unwrap();
        assert!((s.total_mass() - 4.0 * PI).abs() < 1e-12 * 4.0 * PI);
        for a in s.atoms() {
            assert!((a.vector.norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(s, make_sphere_surface(3, 500, 4).unwrap());
    }

    #[test]
    fn sphere_reference_values() {
        let v = sphere_reference(2, 2, Exponent::Finite(1.0)).unwrap();
        assert!((v - (8.0 * PI).sqrt()).abs() < 1e-13);
        assert!((v - 5.0132565).abs() < 1e-7);
        let v = sphere_reference(2, 2, Exponent::Finite(2.0)).unwrap();
        assert!((v - (2.0 * PI * PI).powf(0.25)).abs() < 1e-13);
        assert!((v - 2.1078147).abs() < 1e-7);
        let v = sphere_reference(3, 2, Exponent::Finite(1.0)).unwrap();
        assert!((v - 2.0 * PI.powf(1.5)).abs() < 1e-12);
        assert!(sphere_reference(2, 3, Exponent::Finite(1.0)).is_err());
        assert!(sphere_reference(3, 1, Exponent::Finite(3.0)).is_err());
        assert!(sphere_reference(3, 1, Exponent::Zero).is_err());
        assert_eq!(sphere_reference(3, 2, Exponent::Infinite).unwrap(), 1.0);
    }

    #[test]
    fn sphere_reference_invariants() {
        for d in 1..=10 {
            let q11 = sphere_reference(d, 1, Exponent::Finite(1.0)).unwrap();
            assert!((q11 / sphere_area(d) - 1.0).abs() < 1e-12, "d = {d}");
            for j in 1..d {
                let a = sphere_reference(d, j, Exponent::Finite(1.0)).unwrap();
                let b = sphere_reference(d, j + 1, Exponent::Finite(1.0)).unwrap();
                assert!(b < a, "d = {d}, j = {j}");
            }
        }
        let q = sphere_reference(2, 2, Exponent::Finite(2.0)).unwrap();
        assert!((q.powi(4) / (2.0 * PI * PI) - 1.0).abs() < 1e-12);
        let table = SphereConstants::new(2).unwrap();
        assert!((table.get(2, 1.0).unwrap() - 5.0132565).abs() < 1e-7);
    }

    #[test]
    fn transform_examples() {
        let s = make_sphere_surface(3, 20, 1).unwrap();
        assert_eq!(transform_surface(&s, &DMatrix::identity(3, 3)).unwrap(), s);
        assert!(transform_surface(&s, &DMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn circle_surface_has_circumference_mass() {
        let c = make_circle_surface(360).unwrap();
        assert!((c.total_mass() - 2.0 * PI).abs() < 1e-12);
    }
}

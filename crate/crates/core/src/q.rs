//! The transversality quantities
//!
//! ```text
//! Q_j^p(S_1, …, S_j) = ( ∫…∫ |v_1(x_1) ∧ … ∧ v_j(x_j)|^p dσ_1(x_1) … dσ_j(x_j) )^{1/(jp)}
//! ```
//!
//! computed by exact enumeration of atom tuples, by the spectral identity
//! `Q_j^2(S)^{2j} = j!·e_j(spec T_S)` for `p = 2`, or by Monte Carlo.
//!
//! `p = 0` is the normalized geometric mean `exp(mean log wedge)^{1/j}` (zero
//! as soon as a tuple of positive mass has zero wedge) and `p = ∞` is the
//! maximum wedge over tuples of atoms.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Serialize, Serializer};

use crate::convex::{covariance, mixed_volume_zb_diagonal, projection_body, DEFAULT_SUBSET_CAP};
use crate::error::{invalid, Error, Result};
use crate::exterior::GramWorkspace;
use crate::numeric::{
    ball_volume, binomial, block_map, factorial, next_combination, next_tuple, saturating_product,
    unrank_combination, unrank_tuple, KahanSum, BLOCK,
};
use crate::rng;
use crate::surface::{sphere_reference, AtomSampler, DiscreteSurface, VectorSampler};

/// Default cap on the number of ordered tuples an exact enumeration may visit.
pub const DEFAULT_ENUMERATION_CAP: u128 = 100_000_000;

/// The integrability exponent `p ∈ [0, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Zero,
    Finite(f64),
    Infinite,
}

impl Exponent {
    /// Classify a float; negative or NaN exponents are rejected.
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 0.0 {
            return invalid(format!("exponent must lie in [0, ∞], got {p}"));
        }
        Ok(if p == 0.0 {
            Exponent::Zero
        } else if p.is_infinite() {
            Exponent::Infinite
        } else {
            Exponent::Finite(p)
        })
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Exponent::Zero => 0.0,
            Exponent::Finite(p) => p,
            Exponent::Infinite => f64::INFINITY,
        }
    }

    pub fn is(self, p: f64) -> bool {
        self.as_f64() == p
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Infinite => write!(f, "inf"),
            other => write!(f, "{}", other.as_f64()),
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinite),
            other => {
                let p: f64 = other.parse().map_err(|_| Error::InvalidArgument(format!("bad exponent {s:?}")))?;
                Exponent::new(p)
            }
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Infinite => s.serialize_str("inf"),
            other => s.serialize_f64(other.as_f64()),
        }
    }
}

/// How a value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Spectral,
    Mc,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Spectral => "spectral",
            Method::Mc => "mc",
        })
    }
}

/// A value of `Q_j^p` with its provenance. `ci_halfwidth` is zero unless `method` is `Mc`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QEstimate {
    pub value: f64,
    pub method: Method,
    pub ci_halfwidth: f64,
    /// Tuples enumerated (exact) or sampled (mc).
    pub samples: u64,
    pub seed: Option<u64>,
}

impl QEstimate {
    fn exact(value: f64, terms: u64) -> Self {
        Self { value, method: Method::Exact, ci_halfwidth: 0.0, samples: terms, seed: None }
    }
}

/// Knobs for exact enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QOptions {
    /// Maximum number of ordered tuples `∏ n_i`.
    pub cap: u128,
    /// Maximum number of generator subsets for zonotope routes.
    pub subset_cap: u128,
    /// Enumerate every ordered tuple even when all surfaces coincide.
    pub force_ordered: bool,
}

impl Default for QOptions {
    fn default() -> Self {
        Self { cap: DEFAULT_ENUMERATION_CAP, subset_cap: DEFAULT_SUBSET_CAP, force_ordered: false }
    }
}

fn check_tuple(surfaces: &[&DiscreteSurface]) -> Result<usize> {
    let Some(first) = surfaces.first() else {
        return invalid("need at least one surface");
    };
    let d = first.dim();
    for s in surfaces {
        if s.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: s.dim() });
        }
    }
    if surfaces.len() > d {
        return invalid(format!("j = {} exceeds the dimension d = {d}", surfaces.len()));
    }
    Ok(d)
}

#[derive(Default, Clone, Copy)]
struct Accum {
    sum: KahanSum,
    max: f64,
    zero_hit: bool,
}

impl Accum {
    fn merge(&mut self, o: &Accum) {
        self.sum.merge(&o.sum);
        self.max = self.max.max(o.max);
        self.zero_hit |= o.zero_hit;
    }
}

fn term(acc: &mut Accum, p: Exponent, weight: f64, gram: f64) {
    match p {
        Exponent::Finite(x) => {
            if gram > 0.0 {
                let w = if x == 2.0 { gram } else { gram.powf(0.5 * x) };
                acc.sum.add(weight * w);
            }
        }
        Exponent::Zero => {
            if gram > 0.0 {
                acc.sum.add(weight * 0.5 * gram.ln());
            } else {
                acc.zero_hit = true;
            }
        }
        Exponent::Infinite => acc.max = acc.max.max(gram.sqrt()),
    }
}

/// Exact `Q_j^p(S_1, …, S_j)` by enumeration of ordered atom tuples.
///
/// `p = ∞` gives `(max |v_1 ∧ ⋯ ∧ v_j|)^{1/j}` and `p = 0` the mass-normalized
/// geometric mean `exp(E log|v_1 ∧ ⋯ ∧ v_j|)^{1/j}`, the limits of the finite case.
///
/// When all surfaces coincide the enumeration runs over `j`-subsets of atoms
/// instead, which gives the same value because tuples with a repeated atom
/// have zero wedge.
pub fn q_exact(surfaces: &[&DiscreteSurface], p: Exponent, opts: &QOptions) -> Result<QEstimate> {
    let d = check_tuple(surfaces)?;
    let j = surfaces.len();
    let ordered_count = saturating_product(surfaces.iter().map(|s| s.len()));
    if ordered_count > opts.cap {
        return Err(Error::CapExceeded { count: ordered_count, cap: opts.cap });
    }
    let diagonal = !opts.force_ordered && j > 1 && surfaces.iter().all(|s| *s == surfaces[0]);

    let (acc, terms) = if diagonal {
        let s = surfaces[0];
        let n = s.len();
        if p == Exponent::Zero {
            // repeated atoms carry positive mass and zero wedge
            return Ok(QEstimate::exact(0.0, 0));
        }
        let count = binomial(n, j);
        let blocks = block_map(count as u64, BLOCK, |_, start, end| {
            let mut acc = Accum::default();
            if start >= end {
                return acc;
            }
            let mut ws = GramWorkspace::new();
            let mut comb = unrank_combination(n, j, start as u128);
            let mut refs: Vec<&[f64]> = Vec::with_capacity(j);
            for _ in start..end {
                refs.clear();
                let mut w = 1.0;
                for &i in &comb {
                    refs.push(s.atoms()[i].vector.as_slice());
                    w *= s.atoms()[i].weight;
                }
                term(&mut acc, p, w, ws.gram_det(&refs));
                next_combination(&mut comb, n);
            }
            acc
        });
        let mut total = Accum::default();
        for b in &blocks {
            total.merge(b);
        }
        let mut scaled = KahanSum::new();
        scaled.add(total.sum.value() * factorial(j));
        total.sum = scaled;
        (total, count as u64)
    } else {
        let radices: Vec<usize> = surfaces.iter().map(|s| s.len()).collect();
        let blocks = block_map(ordered_count as u64, BLOCK, |_, start, end| {
            let mut acc = Accum::default();
            if start >= end {
                return acc;
            }
            let mut ws = GramWorkspace::new();
            let mut digits = unrank_tuple(&radices, start as u128);
            let mut refs: Vec<&[f64]> = Vec::with_capacity(j);
            for _ in start..end {
                refs.clear();
                let mut w = 1.0;
                for (s, &i) in surfaces.iter().zip(&digits) {
                    refs.push(s.atoms()[i].vector.as_slice());
                    w *= s.atoms()[i].weight;
                }
                term(&mut acc, p, w, ws.gram_det(&refs));
                next_tuple(&mut digits, &radices);
            }
            acc
        });
        let mut total = Accum::default();
        for b in &blocks {
            total.merge(b);
        }
        (total, ordered_count as u64)
    };

    let _ = d;
    let jf = j as f64;
    let value = match p {
        Exponent::Finite(x) => acc.sum.value().max(0.0).powf(1.0 / (jf * x)),
        Exponent::Infinite => acc.max.powf(1.0 / jf),
        Exponent::Zero => {
            if acc.zero_hit {
                0.0
            } else {
                let mass: f64 = surfaces.iter().map(|s| s.total_mass()).product();
                (acc.sum.value() / mass / jf).exp()
            }
        }
    };
    Ok(QEstimate::exact(value, terms))
}

/// Monte Carlo estimate of `Q_j^p` by product sampling proportional to mass.
///
/// The confidence half-width is three standard errors of the mean of
/// `wedge^p`, carried through the `1/(jp)` root by the delta method.
pub fn q_mc(samplers: &[&dyn VectorSampler], p: f64, samples: u64, seed: u64) -> Result<QEstimate> {
    let j = samplers.len();
    let Some(first) = samplers.first() else {
        return invalid("need at least one sampler");
    };
    let d = first.dim();
    if samplers.iter().any(|s| s.dim() != d) {
        return invalid("samplers must share a dimension");
    }
    if j > d {
        return invalid(format!("j = {j} exceeds the dimension d = {d}"));
    }
    if !(p > 0.0 && p.is_finite()) {
        return invalid("Monte Carlo needs 0 < p < ∞");
    }
    if samples < 2 {
        return invalid("Monte Carlo needs at least two samples");
    }
    let mass: f64 = samplers.iter().map(|s| s.total_mass()).product();
    if !(mass > 0.0) {
        return invalid("zero total weight");
    }
    let (mean, se) = mc_mean(samples, seed, |rng| {
        let vs: Vec<_> = samplers.iter().map(|s| s.sample(rng)).collect();
        let refs: Vec<&[f64]> = vs.iter().map(|v| v.as_slice()).collect();
        let g = GramWorkspace::new().gram_det(&refs);
        if p == 2.0 {
            g
        } else {
            g.powf(0.5 * p)
        }
    });
    let integral = mass * mean;
    let root = 1.0 / (j as f64 * p);
    let value = integral.powf(root);
    let ci_halfwidth = if integral > 0.0 {
        3.0 * mass * se * root * integral.powf(root - 1.0)
    } else {
        (3.0 * mass * se).powf(root)
    };
    Ok(QEstimate { value, method: Method::Mc, ci_halfwidth, samples, seed: Some(seed) })
}

/// [`q_mc`] over discrete surfaces.
pub fn q_mc_surfaces(surfaces: &[&DiscreteSurface], p: f64, samples: u64, seed: u64) -> Result<QEstimate> {
    check_tuple(surfaces)?;
    let samplers: Vec<AtomSampler> = surfaces.iter().map(|s| AtomSampler::new(s)).collect::<Result<_>>()?;
    let dyns: Vec<&dyn VectorSampler> = samplers.iter().map(|s| s as &dyn VectorSampler).collect();
    q_mc(&dyns, p, samples, seed)
}

/// Sample mean and standard error of `f` over `samples` draws, evaluated in
/// fixed blocks with one RNG stream per block.
pub(crate) fn mc_mean<F>(samples: u64, seed: u64, f: F) -> (f64, f64)
where
    F: Fn(&mut rng::Rng) -> f64 + Sync + Send,
{
    let blocks = block_map(samples, BLOCK, |b, start, end| {
        let mut r = rng::stream(seed, b);
        let mut s = KahanSum::new();
        let mut s2 = KahanSum::new();
        for _ in start..end {
            let x = f(&mut r);
            s.add(x);
            s2.add(x * x);
        }
        (s, s2)
    });
    let mut s = KahanSum::new();
    let mut s2 = KahanSum::new();
    for (a, b) in &blocks {
        s.merge(a);
        s2.merge(b);
    }
    let n = samples as f64;
    let mean = s.value() / n;
    let var = ((s2.value() - n * mean * mean) / (n - 1.0)).max(0.0);
    (mean, (var / n).sqrt())
}

/// Elementary symmetric polynomials `e_0, …, e_k` of `values`.
pub fn elementary_symmetric(values: &[f64], k: usize) -> Vec<f64> {
    let mut e = vec![0.0; k + 1];
    e[0] = 1.0;
    for &x in values {
        for m in (1..=k.min(values.len())).rev() {
            e[m] += x * e[m - 1];
        }
    }
    e
}

/// Eigenvalues of the covariance of `s`, with values below the numerical
/// noise floor set to zero.
pub fn covariance_spectrum(s: &DiscreteSurface) -> Vec<f64> {
    covariance_eigen(s).0
}

/// Clamped eigenvalues of the covariance of `s` and the matching eigenvectors (as columns).
pub fn covariance_eigen(s: &DiscreteSurface) -> (Vec<f64>, DMatrix<f64>) {
    let eig = covariance(s).matrix().clone().symmetric_eigen();
    let top = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let floor = 64.0 * s.dim() as f64 * f64::EPSILON * top;
    let values = eig.eigenvalues.iter().map(|&l| if l <= floor { 0.0 } else { l }).collect();
    (values, eig.eigenvectors)
}

/// `Q_j^2(S) = (j!·e_j(spec T_S))^{1/(2j)}`.
pub fn q2_spectral(s: &DiscreteSurface, j: usize) -> Result<QEstimate> {
    if j == 0 || j > s.dim() {
        return invalid(format!("need 1 ≤ j ≤ d, got j = {j}, d = {}", s.dim()));
    }
    let e = elementary_symmetric(&covariance_spectrum(s), j);
    let value = (factorial(j) * e[j]).max(0.0).powf(1.0 / (2 * j) as f64);
    Ok(QEstimate { value, method: Method::Spectral, ci_halfwidth: 0.0, samples: 0, seed: None })
}

/// `Q_j^p` for `j = 1..d` and the normalized profile
/// `a_j = (Q_j^p(S) / Q_j^p(S^{d-1}))^j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QProfile {
    pub dim: usize,
    pub p: Exponent,
    /// `q[j-1] = Q_j^p`.
    pub q: Vec<QEstimate>,
    /// `a[0] = 1, a[j]` for `j = 1..d`; present for `p ∈ {1, 2, ∞}`.
    pub a: Option<Vec<f64>>,
    /// Mixed volumes `b_j = V(Π S[j], B^d[d−j])` for `j = 0..d`, present for `p = 1`.
    pub b_proxy: Option<Vec<f64>>,
}

/// Constant `d! / (2^j (d−j)! ω_{d−j})` relating `Q_j^1(…)^j` to mixed volumes.
pub fn mixed_volume_constant(d: usize, j: usize) -> f64 {
    factorial(d) / (2f64.powi(j as i32) * factorial(d - j) * ball_volume(d - j))
}

fn zonotope_estimate(c: f64, bj: f64, j: usize, n: usize) -> QEstimate {
    QEstimate::exact((c * bj).max(0.0).powf(1.0 / j as f64), binomial(n, j).min(u64::MAX as u128) as u64)
}

/// `Q_j^1(S, …, S)` through the mixed volume `V(Π S[j], B^d[d−j])`; the cost is
/// `C(n, j)` generator subsets instead of `n^j` ordered tuples.
pub fn q1_zonotope(s: &DiscreteSurface, j: usize, subset_cap: u128) -> Result<QEstimate> {
    let d = s.dim();
    if j == 0 || j > d {
        return invalid(format!("need 1 ≤ j ≤ d, got j = {j}, d = {d}"));
    }
    let bj = mixed_volume_zb_diagonal(&projection_body(s), j, subset_cap)?;
    Ok(zonotope_estimate(mixed_volume_constant(d, j), bj, j, s.len()))
}

/// Compute the profile using the cheapest exact route for each `j`.
pub fn q_profile(s: &DiscreteSurface, p: Exponent, opts: &QOptions) -> Result<QProfile> {
    let d = s.dim();
    let mut q = Vec::with_capacity(d);
    let mut b_proxy = None;
    match p {
        Exponent::Finite(x) if x == 2.0 => {
            for j in 1..=d {
                q.push(q2_spectral(s, j)?);
            }
        }
        Exponent::Finite(x) if x == 1.0 => {
            let z = projection_body(s);
            let mut b = vec![ball_volume(d)];
            for j in 1..=d {
                let ordered = saturating_product(std::iter::repeat_n(s.len(), j));
                let zonotope = if binomial(s.len(), j) <= opts.subset_cap {
                    Some(mixed_volume_zb_diagonal(&z, j, opts.subset_cap)?)
                } else {
                    None
                };
                let c = mixed_volume_constant(d, j);
                let est = match zonotope {
                    _ if ordered <= opts.cap => q_exact(&vec![s; j], p, opts)?,
                    Some(bj) => zonotope_estimate(c, bj, j, s.len()),
                    None => return Err(Error::CapExceeded { count: ordered, cap: opts.cap }),
                };
                b.push(zonotope.unwrap_or_else(|| est.value.powi(j as i32) / c));
                q.push(est);
            }
            b_proxy = Some(b);
        }
        _ => {
            for j in 1..=d {
                q.push(q_exact(&vec![s; j], p, opts)?);
            }
        }
    }
    let a = match p {
        Exponent::Infinite | Exponent::Finite(1.0) | Exponent::Finite(2.0) => {
            let mut a = vec![1.0];
            for (idx, est) in q.iter().enumerate() {
                let j = idx + 1;
                a.push((est.value / sphere_reference(d, j, p)?).powi(j as i32));
            }
            Some(a)
        }
        _ => None,
    };
    Ok(QProfile { dim: d, p, q, a, b_proxy })
}

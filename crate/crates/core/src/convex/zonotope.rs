use crate::error::{invalid, Error, Result};
use crate::exterior::{GramWorkspace, RealVector};
use crate::numeric::{
    ball_volume, binomial, block_map, factorial, next_combination, next_tuple, saturating_product,
    unrank_combination, unrank_tuple, KahanSum, BLOCK,
};
use crate::surface::DiscreteSurface;

/// Default cap on the number of generator subsets a zonotope computation may visit.
pub const DEFAULT_SUBSET_CAP: u128 = 10_000_000;

/// The Minkowski sum `Σ_i [−g_i, g_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Zonotope {
    dim: usize,
    generators: Vec<RealVector>,
}

impl Zonotope {
    pub fn new(dim: usize, generators: Vec<RealVector>) -> Result<Self> {
        if dim == 0 {
            return invalid("dimension must be at least 1");
        }
        if generators.is_empty() {
            return invalid("a zonotope needs at least one generator");
        }
        for g in &generators {
            if g.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: g.len() });
            }
            if g.iter().any(|x| !x.is_finite()) {
                return invalid("generator entries must be finite");
            }
        }
        Ok(Self { dim, generators })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[RealVector] {
        &self.generators
    }

    /// `h(y) = Σ |y·g_i|`.
    pub fn support(&self, y: &RealVector) -> f64 {
        let mut s = KahanSum::new();
        for g in &self.generators {
            s.add(y.dot(g).abs());
        }
        s.value()
    }

    /// Vertex candidates `Σ ε_i g_i` with `ε_1 = +1`; the other half is the reflection.
    pub fn half_vertices(&self) -> Result<Vec<RealVector>> {
        let n = self.generators.len();
        if n > 24 {
            return invalid(format!("{n} generators is too many to enumerate sign vectors"));
        }
        let mut out = Vec::with_capacity(1 << (n - 1));
        for mask in 0u32..(1u32 << (n - 1)) {
            let mut x = self.generators[0].clone();
            for (i, g) in self.generators.iter().enumerate().skip(1) {
                if mask >> (i - 1) & 1 == 1 {
                    x -= g;
                } else {
                    x += g;
                }
            }
            out.push(x);
        }
        Ok(out)
    }

    /// The vertex of the zonotope maximizing `u·x`.
    pub fn extreme_point(&self, u: &RealVector) -> RealVector {
        let mut x = RealVector::zeros(self.dim);
        for g in &self.generators {
            let s = u.dot(g);
            if s > 0.0 {
                x += g;
            } else if s < 0.0 {
                x -= g;
            }
        }
        x
    }
}

/// `Π(S)` with generators `w_i v_i`.
pub fn projection_body(s: &DiscreteSurface) -> Zonotope {
    Zonotope {
        dim: s.dim(),
        generators: s.atoms().iter().map(|a| &a.vector * a.weight).collect(),
    }
}

/// Relative threshold below which a residual counts as exact linear dependence.
fn dependence_tolerance(d: usize, j: usize) -> f64 {
    32.0 * (d + j) as f64 * f64::EPSILON
}

/// Cofactor vector `c` of `d − 1` vectors in `R^d`, so that `det[u_1 … u_{d−1} x] = c·x`.
fn cofactor(vectors: &[&RealVector], d: usize) -> RealVector {
    match d {
        1 => RealVector::from_element(1, 1.0),
        2 => {
            let a = vectors[0];
            RealVector::from_vec(vec![-a[1], a[0]])
        }
        3 => vectors[0].cross(vectors[1]),
        _ => {
            let mut c = RealVector::zeros(d);
            let mut minor = nalgebra::DMatrix::zeros(d - 1, d - 1);
            for i in 0..d {
                for (col, v) in vectors.iter().enumerate() {
                    for r in 0..d {
                        if r != i {
                            minor[(if r < i { r } else { r - 1 }, col)] = v[r];
                        }
                    }
                }
                let sign = if (i + d - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
                c[i] = sign * minor.clone().determinant();
            }
            c
        }
    }
}

/// `Σ_{|I| = j} |∧_{i∈I} g_i|` over all `j`-subsets of `generators`.
///
/// The last vector of each subset is handled in an inner loop: for `j = d` via
/// the cofactor vector of the first `j − 1`, otherwise by the residual after
/// projecting off their span.
pub fn diagonal_wedge_sum(generators: &[RealVector], j: usize, cap: u128) -> Result<f64> {
    let n = generators.len();
    let Some(first) = generators.first() else {
        return invalid("no generators");
    };
    let d = first.len();
    if j == 0 {
        return Ok(1.0);
    }
    if j > d {
        return invalid(format!("j = {j} exceeds the dimension d = {d}"));
    }
    let count = binomial(n, j);
    if count > cap {
        return Err(Error::CapExceeded { count, cap });
    }
    if j > n {
        return Ok(0.0);
    }
    let tol = dependence_tolerance(d, j);
    let norms: Vec<f64> = generators.iter().map(|g| g.norm()).collect();
    if j == 1 {
        let mut s = KahanSum::new();
        norms.iter().for_each(|&x| s.add(x));
        return Ok(s.value());
    }
    let outer = binomial(n, j - 1) as u64;
    let blocks = block_map(outer, 1 << 10, |_, start, end| {
        let mut acc = KahanSum::new();
        if start >= end {
            return acc;
        }
        let mut comb = unrank_combination(n, j - 1, start as u128);
        let mut basis: Vec<RealVector> = Vec::with_capacity(j);
        for _ in start..end {
            let last = *comb.last().unwrap();
            if last + 1 < n {
                if j == d {
                    let vs: Vec<&RealVector> = comb.iter().map(|&i| &generators[i]).collect();
                    let c = cofactor(&vs, d);
                    let cn = c.norm();
                    if cn > 0.0 {
                        for k in last + 1..n {
                            let t = c.dot(&generators[k]).abs();
                            if t > tol * cn * norms[k] {
                                acc.add(t);
                            }
                        }
                    }
                } else if let Some(w) = orthonormal_prefix(&comb, generators, &norms, tol, &mut basis) {
                    for k in last + 1..n {
                        let g = &generators[k];
                        let mut r2 = norms[k] * norms[k];
                        for q in &basis {
                            let t = q.dot(g);
                            r2 -= t * t;
                        }
                        if r2 > tol * norms[k] * norms[k] {
                            acc.add(w * r2.sqrt());
                        }
                    }
                }
            }
            next_combination(&mut comb, n);
        }
        acc
    });
    let mut total = KahanSum::new();
    for b in &blocks {
        total.merge(b);
    }
    Ok(total.value())
}

/// Orthonormal basis of the span of the chosen generators (two-pass
/// Gram–Schmidt) and their wedge norm, or `None` when they are dependent.
fn orthonormal_prefix(
    comb: &[usize],
    generators: &[RealVector],
    norms: &[f64],
    tol: f64,
    basis: &mut Vec<RealVector>,
) -> Option<f64> {
    basis.clear();
    let mut w = 1.0;
    for &i in comb {
        let mut r = generators[i].clone();
        for _ in 0..2 {
            for q in basis.iter() {
                let t = q.dot(&r);
                r.axpy(-t, q, 1.0);
            }
        }
        let rn = r.norm();
        if rn * rn <= tol * norms[i] * norms[i] || rn == 0.0 {
            return None;
        }
        w *= rn;
        basis.push(r / rn);
    }
    Some(w)
}

/// `vol(Z) = 2^d Σ_{|I| = d} |det g_I|`.
pub fn zonotope_volume(z: &Zonotope, cap: u128) -> Result<f64> {
    let d = z.dim;
    Ok(2f64.powi(d as i32) * diagonal_wedge_sum(&z.generators, d, cap)?)
}

fn ball_term(d: usize, j: usize) -> f64 {
    2f64.powi(j as i32) * factorial(d - j) / factorial(d) * ball_volume(d - j)
}

/// `V(Z[j], B^d[d − j])` for a single zonotope.
pub fn mixed_volume_zb_diagonal(z: &Zonotope, j: usize, cap: u128) -> Result<f64> {
    let d = z.dim;
    if j > d {
        return invalid(format!("j = {j} exceeds the dimension d = {d}"));
    }
    if j == 0 {
        return Ok(ball_volume(d));
    }
    Ok(ball_term(d, j) * factorial(j) * diagonal_wedge_sum(&z.generators, j, cap)?)
}

/// `V(Z_1, …, Z_j, B^d[d − j])` with `d = j + ball_copies`, by expanding each
/// zonotope into its segments.
///
/// `cap` bounds the number of generator tuples `∏ n_i`; when all zonotopes
/// coincide the expansion runs over subsets instead and `cap` bounds `C(n, j)`.
pub fn mixed_volume_zb(zonotopes: &[&Zonotope], ball_copies: usize, cap: u128) -> Result<f64> {
    let j = zonotopes.len();
    let d = j + ball_copies;
    if d == 0 {
        return invalid("dimension must be at least 1");
    }
    for z in zonotopes {
        if z.dim != d {
            return Err(Error::DimensionMismatch { expected: d, found: z.dim });
        }
    }
    if j == 0 {
        return Ok(ball_volume(d));
    }
    if zonotopes.iter().all(|z| std::ptr::eq(*z, zonotopes[0]) || *z == zonotopes[0]) {
        return mixed_volume_zb_diagonal(zonotopes[0], j, cap);
    }
    let count = saturating_product(zonotopes.iter().map(|z| z.generators.len()));
    if count > cap {
        return Err(Error::CapExceeded { count, cap });
    }
    let radices: Vec<usize> = zonotopes.iter().map(|z| z.generators.len()).collect();
    let blocks = block_map(count as u64, BLOCK, |_, start, end| {
        let mut acc = KahanSum::new();
        if start >= end {
            return acc;
        }
        let mut ws = GramWorkspace::new();
        let mut digits = unrank_tuple(&radices, start as u128);
        let mut refs: Vec<&[f64]> = Vec::with_capacity(j);
        for _ in start..end {
            refs.clear();
            for (z, &i) in zonotopes.iter().zip(&digits) {
                refs.push(z.generators[i].as_slice());
            }
            let g = ws.gram_det(&refs);
            if g > 0.0 {
                acc.add(g.sqrt());
            }
            next_tuple(&mut digits, &radices);
        }
        acc
    });
    let mut total = KahanSum::new();
    for b in &blocks {
        total.merge(b);
    }
    Ok(ball_term(d, j) * total.value())
}

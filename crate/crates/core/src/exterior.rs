//! Exterior-algebra primitives.
//!
//! Wedge norms are computed from Gram determinants rather than from explicit
//! exterior coordinates: `|v_1 ∧ … ∧ v_j| = sqrt(det G)` with `G_ab = v_a · v_b`.
//! The determinant comes from a pivoted Cholesky factorization whose pivots are
//! compared against the original squared norms, so exactly or numerically
//! dependent families produce an exact zero.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::inequality::UniformCover;
use crate::rng;

/// A point of `R^d`.
pub type RealVector = DVector<f64>;

/// Orthonormality tolerance for frames.
pub const FRAME_TOLERANCE: f64 = 1e-12;

/// Reusable scratch space for Gram determinants.
#[derive(Debug, Default, Clone)]
pub struct GramWorkspace {
    gram: Vec<f64>,
    norms: Vec<f64>,
}

impl GramWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Gram determinant of `vectors`, all of the same length.
    pub fn gram_det(&mut self, vectors: &[&[f64]]) -> f64 {
        let j = vectors.len();
        if j == 0 {
            return 1.0;
        }
        let dim = vectors[0].len();
        self.gram.clear();
        self.gram.resize(j * j, 0.0);
        self.norms.clear();
        for a in 0..j {
            for b in 0..=a {
                let dot: f64 = vectors[a].iter().zip(vectors[b]).map(|(x, y)| x * y).sum();
                self.gram[a * j + b] = dot;
                self.gram[b * j + a] = dot;
            }
            self.norms.push(self.gram[a * j + a]);
        }
        pivoted_cholesky_det(&mut self.gram, &mut self.norms, j, dim)
    }
}

/// Determinant of a symmetric PSD `j×j` matrix (row-major, overwritten) by
/// Cholesky with diagonal pivoting. `reference[i]` is the scale against which
/// the pivot of index `i` is judged to vanish.
fn pivoted_cholesky_det(g: &mut [f64], reference: &mut [f64], j: usize, dim: usize) -> f64 {
    let tol = 32.0 * (dim + j) as f64 * f64::EPSILON;
    let mut det = 1.0;
    for k in 0..j {
        let mut p = k;
        for i in k + 1..j {
            if g[i * j + i] > g[p * j + p] {
                p = i;
            }
        }
        if p != k {
            for c in 0..j {
                g.swap(k * j + c, p * j + c);
            }
            for r in 0..j {
                g.swap(r * j + k, r * j + p);
            }
            reference.swap(k, p);
        }
        let pivot = g[k * j + k];
        if !(pivot > tol * reference[k]) || reference[k] == 0.0 {
            return 0.0;
        }
        det *= pivot;
        for r in k + 1..j {
            let f = g[r * j + k] / pivot;
            for c in k + 1..=r {
                let v = g[r * j + c] - f * g[c * j + k];
                g[r * j + c] = v;
                g[c * j + r] = v;
            }
        }
    }
    det.max(0.0)
}

fn check_family(vectors: &[RealVector]) -> Result<usize> {
    let Some(first) = vectors.first() else {
        return invalid("wedge of an empty family");
    };
    let d = first.len();
    if d == 0 {
        return invalid("vectors must have dimension at least 1");
    }
    for v in vectors {
        if v.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: v.len() });
        }
    }
    if vectors.len() > d {
        return invalid(format!("wedge of {} vectors in R^{d}", vectors.len()));
    }
    Ok(d)
}

/// Gram determinant `det(v_a · v_b)`, i.e. the squared wedge norm.
pub fn gram_determinant(vectors: &[RealVector]) -> Result<f64> {
    check_family(vectors)?;
    let slices: Vec<&[f64]> = vectors.iter().map(|v| v.as_slice()).collect();
    Ok(GramWorkspace::new().gram_det(&slices))
}

/// `|v_1 ∧ … ∧ v_j|`, the `j`-volume of the parallelotope spanned by the vectors.
pub fn wedge_norm(vectors: &[RealVector]) -> Result<f64> {
    Ok(gram_determinant(vectors)?.sqrt())
}

/// Outcome of comparing a wedge norm with a product over a uniform cover.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WedgeCoverBound {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// `|v_1 ∧ … ∧ v_j| ≤ ∏_i |∧_{n∈A_i} v_n|^{α_i}` for a uniform cover `(A_i, α_i)`.
pub fn check_wedge_cover_bound(vectors: &[RealVector], cover: &UniformCover) -> Result<WedgeCoverBound> {
    check_family(vectors)?;
    if cover.ground_size() != vectors.len() {
        return Err(Error::InvalidCover(format!(
            "cover is on {} indices but {} vectors were given",
            cover.ground_size(),
            vectors.len()
        )));
    }
    let lhs = wedge_norm(vectors)?;
    let mut rhs = 1.0;
    for (set, &alpha) in cover.sets().iter().zip(cover.alphas()) {
        let part: Vec<RealVector> = set.iter().map(|&n| vectors[n].clone()).collect();
        rhs *= wedge_norm(&part)?.powf(alpha);
    }
    Ok(WedgeCoverBound { lhs, rhs, pass: lhs <= rhs * (1.0 + 1e-12) })
}

/// Result of the block-determinant identity `|det 𝒜| = |det Y|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlockDeterminantReport {
    pub det_a: f64,
    pub det_y: f64,
    pub pass: bool,
}

/// Generalized cross product of the `d−1` columns of a `d×(d−1)` matrix:
/// the vector whose `i`-th entry is the cofactor `(−1)^i det(A without row i)`.
pub fn exterior_product(block: &DMatrix<f64>) -> Result<RealVector> {
    let d = block.nrows();
    if d < 2 || block.ncols() != d - 1 {
        return invalid(format!("expected a d×(d−1) block, got {}×{}", block.nrows(), block.ncols()));
    }
    let mut y = RealVector::zeros(d);
    for i in 0..d {
        let minor = block.clone().remove_row(i);
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        y[i] = sign * minor.determinant();
    }
    Ok(y)
}

/// The `d²×d²` block matrix whose `j`-th row block is `[−I, 0, …, A_j, …, 0]`.
pub fn crofton_block_matrix(blocks: &[DMatrix<f64>]) -> Result<DMatrix<f64>> {
    let d = blocks.len();
    if d < 2 {
        return invalid("need at least two blocks");
    }
    for b in blocks {
        if b.nrows() != d || b.ncols() != d - 1 {
            return invalid(format!("block must be {d}×{}, got {}×{}", d - 1, b.nrows(), b.ncols()));
        }
    }
    let n = d * d;
    let mut a = DMatrix::zeros(n, n);
    for (j, block) in blocks.iter().enumerate() {
        let row = j * d;
        for i in 0..d {
            a[(row + i, i)] = -1.0;
        }
        let col = d + j * (d - 1);
        a.view_mut((row, col), (d, d - 1)).copy_from(block);
    }
    Ok(a)
}

/// Build `𝒜` and `Y` from the blocks and compare `|det 𝒜|` with `|det Y|`.
pub fn block_determinant_check(blocks: &[DMatrix<f64>]) -> Result<BlockDeterminantReport> {
    let a = crofton_block_matrix(blocks)?;
    let d = blocks.len();
    let mut y = DMatrix::zeros(d, d);
    for (j, block) in blocks.iter().enumerate() {
        y.set_column(j, &exterior_product(block)?);
    }
    let det_a = a.determinant();
    let det_y = y.determinant();
    let pass = (det_a.abs() - det_y.abs()).abs() <= 1e-8 * det_y.abs().max(1.0);
    Ok(BlockDeterminantReport { det_a, det_y, pass })
}

/// An orthonormal family of `k` vectors in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    vectors: Vec<RealVector>,
}

impl Frame {
    /// Accept `vectors` if their Gram matrix is within [`FRAME_TOLERANCE`] of the identity.
    pub fn new(vectors: Vec<RealVector>) -> Result<Self> {
        check_family(&vectors)?;
        for (a, u) in vectors.iter().enumerate() {
            for (b, v) in vectors.iter().enumerate() {
                let target = if a == b { 1.0 } else { 0.0 };
                if (u.dot(v) - target).abs() > FRAME_TOLERANCE {
                    return invalid("frame vectors are not orthonormal");
                }
            }
        }
        Ok(Self { vectors })
    }

    /// Modified Gram–Schmidt; fails if the family is (numerically) dependent.
    pub fn orthonormalize(vectors: Vec<RealVector>) -> Result<Self> {
        check_family(&vectors)?;
        let mut out: Vec<RealVector> = Vec::with_capacity(vectors.len());
        for v in vectors {
            let scale = v.norm();
            let mut w = v;
            // two passes keep the result orthonormal to working precision
            for _ in 0..2 {
                for q in &out {
                    let c = q.dot(&w);
                    w.axpy(-c, q, 1.0);
                }
            }
            let n = w.norm();
            if !(n > 1e-10 * scale) {
                return Err(Error::Degenerate("frame vectors are linearly dependent".into()));
            }
            out.push(w / n);
        }
        Ok(Self { vectors: out })
    }

    /// The standard basis `e_1, …, e_d`.
    pub fn standard(d: usize) -> Self {
        Self { vectors: (0..d).map(|i| RealVector::from_fn(d, |r, _| if r == i { 1.0 } else { 0.0 })).collect() }
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].len()
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &[RealVector] {
        &self.vectors
    }

    /// Columns are the frame vectors.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_columns(&self.vectors)
    }

    /// The frame restricted to the given indices.
    pub fn select(&self, indices: &[usize]) -> Frame {
        Frame { vectors: indices.iter().map(|&i| self.vectors[i].clone()).collect() }
    }
}

/// A linear subspace `E ∈ G(d, k)` given by an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    basis: Frame,
}

impl Plane {
    pub fn new(basis: Frame) -> Self {
        Self { basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Dimension `k` of the subspace.
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &Frame {
        &self.basis
    }

    /// Coordinates of the orthogonal projection of `v` in the plane's basis.
    pub fn project(&self, v: &RealVector) -> RealVector {
        RealVector::from_iterator(self.rank(), self.basis.vectors().iter().map(|b| b.dot(v)))
    }
}

/// `|E_1 ∧ … ∧ E_m|` for planes whose ranks sum to `d`: `|det|` of the stacked bases.
pub fn planes_wedge(planes: &[Plane]) -> Result<f64> {
    let Some(first) = planes.first() else {
        return invalid("no planes");
    };
    let d = first.dim();
    let total: usize = planes.iter().map(Plane::rank).sum();
    if total != d {
        return invalid(format!("plane dimensions sum to {total}, expected {d}"));
    }
    let cols: Vec<RealVector> = planes.iter().flat_map(|p| p.basis().vectors().iter().cloned()).collect();
    Ok(DMatrix::from_columns(&cols).determinant().abs())
}

/// Haar-distributed orthonormal `k`-frame in `R^d`, deterministic in `seed`.
pub fn random_frame(d: usize, k: usize, seed: u64) -> Result<Frame> {
    if k == 0 || k > d {
        return invalid(format!("cannot draw {k} orthonormal vectors in R^{d}"));
    }
    let mut rng = rng::from_seed(seed);
    let g = DMatrix::<f64>::from_fn(d, k, |_, _| StandardNormal.sample(&mut rng));
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let cols: Vec<RealVector> = (0..k)
        .map(|c| {
            let s = if r[(c, c)] < 0.0 { -1.0 } else { 1.0 };
            q.column(c).clone_owned() * s
        })
        .collect();
    Frame::orthonormalize(cols)
}

/// Haar-distributed orthogonal `d×d` matrix.
pub fn random_orthogonal(d: usize, seed: u64) -> Result<DMatrix<f64>> {
    Ok(random_frame(d, d, seed)?.to_matrix())
}

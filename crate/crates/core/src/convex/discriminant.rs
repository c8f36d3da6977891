use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::numeric::factorial;
use crate::q::{q_exact, Exponent, QOptions};
use crate::surface::DiscreteSurface;

/// Largest dimension accepted by [`mixed_discriminant`] (it evaluates `2^d` determinants).
pub const MAX_DISCRIMINANT_DIM: usize = 12;

/// A symmetric positive-semidefinite `d × d` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    matrix: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Accepts matrices symmetric to 1e-12 and with eigenvalues ≥ −1e-10
    /// (relative to the largest); slightly negative eigenvalues are clamped to zero.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return invalid("covariance matrix must be square and nonempty");
        }
        let scale = matrix.amax().max(1.0);
        if (&matrix - matrix.transpose()).amax() > 1e-12 * scale {
            return invalid("covariance matrix is not symmetric");
        }
        let sym = (&matrix + matrix.transpose()) * 0.5;
        let eig = sym.clone().symmetric_eigen();
        let top = eig.eigenvalues.amax().max(1.0);
        if eig.eigenvalues.iter().any(|&l| l < -1e-10 * top) {
            return invalid("covariance matrix is not positive semidefinite");
        }
        if eig.eigenvalues.iter().all(|&l| l >= 0.0) {
            return Ok(Self { matrix: sym });
        }
        let clamped = eig.eigenvalues.map(|l| l.max(0.0));
        let matrix = &eig.eigenvectors * DMatrix::from_diagonal(&clamped) * eig.eigenvectors.transpose();
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `T_S = Σ w_i v_i ⊗ v_i`.
pub fn covariance(s: &DiscreteSurface) -> CovarianceMatrix {
    let d = s.dim();
    let mut t = DMatrix::zeros(d, d);
    for a in s.atoms() {
        t.ger(a.weight, &a.vector, &a.vector, 1.0);
    }
    let t = (&t + t.transpose()) * 0.5;
    CovarianceMatrix { matrix: t }
}

/// `D(T_1, …, T_d) = (1/d!) Σ_{S ⊆ [d]} (−1)^{d−|S|} det(Σ_{i∈S} T_i)`.
pub fn mixed_discriminant(mats: &[&DMatrix<f64>]) -> Result<f64> {
    let d = mats.len();
    if d == 0 {
        return invalid("need at least one matrix");
    }
    if d > MAX_DISCRIMINANT_DIM {
        return invalid(format!("mixed discriminant limited to d ≤ {MAX_DISCRIMINANT_DIM}, got {d}"));
    }
    for m in mats {
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: m.nrows().max(m.ncols()) });
        }
    }
    let mut total = 0.0;
    for mask in 1u32..(1u32 << d) {
        let mut sum = DMatrix::zeros(d, d);
        for (i, m) in mats.iter().enumerate() {
            if mask >> i & 1 == 1 {
                sum += *m;
            }
        }
        let sign = if (d - mask.count_ones() as usize).is_multiple_of(2) { 1.0 } else { -1.0 };
        total += sign * sum.determinant();
    }
    Ok(total / factorial(d))
}

/// Both sides of an identity and whether they agree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
}

/// `D(T_{S_1}, …, T_{S_d})` against `(1/d!)·Q_d^2(S_1, …, S_d)^{2d}`.
///
/// Agreement is relative 1e-8, with an absolute floor of 1e-12·∏‖T_i‖ so
/// that two values that are zero up to rounding agree.
pub fn mixed_discriminant_identity_check(surfaces: &[&DiscreteSurface], opts: &QOptions) -> Result<IdentityCheck> {
    let d = surfaces.len();
    if d == 0 {
        return invalid("need at least one surface");
    }
    if surfaces.iter().any(|s| s.dim() != d) {
        return invalid("need exactly d surfaces in R^d");
    }
    let covs: Vec<CovarianceMatrix> = surfaces.iter().map(|s| covariance(s)).collect();
    let refs: Vec<&DMatrix<f64>> = covs.iter().map(|c| c.matrix()).collect();
    let lhs = mixed_discriminant(&refs)?;
    let q = q_exact(surfaces, Exponent::Finite(2.0), opts)?.value;
    let rhs = q.powi(2 * d as i32) / factorial(d);
    let floor: f64 = refs.iter().map(|m| m.norm()).product::<f64>() * 1e-12;
    let pass = (lhs - rhs).abs() <= 1e-8 * lhs.abs().max(rhs.abs()) + floor;
    Ok(IdentityCheck { lhs, rhs, pass })
}

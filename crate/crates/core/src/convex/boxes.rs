use crate::error::{invalid, Error, Result};
use crate::exterior::{Frame, RealVector};
use crate::numeric::{factorial, permutations};

/// Largest dimension accepted by the box mixed-volume sums.
pub const MAX_BOX_DIM: usize = 8;

/// A rectangular box with edges `lengths[i]` along the orthonormal directions `frame[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSpec {
    pub frame: Frame,
    pub lengths: Vec<f64>,
}

impl BoxSpec {
    pub fn new(frame: Frame, lengths: Vec<f64>) -> Result<Self> {
        if frame.len() != frame.dim() {
            return invalid("a box needs a full frame of d directions");
        }
        if lengths.len() != frame.len() {
            return Err(Error::DimensionMismatch { expected: frame.len(), found: lengths.len() });
        }
        if lengths.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return invalid("box edge lengths must be positive");
        }
        Ok(Self { frame, lengths })
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// Edge vectors `a_i f_i`.
    pub fn edges(&self) -> Vec<RealVector> {
        self.frame.vectors().iter().zip(&self.lengths).map(|(f, &a)| f * a).collect()
    }
}

fn check_boxes(boxes: &[&BoxSpec]) -> Result<usize> {
    let d = boxes.len();
    if d == 0 {
        return invalid("need at least one box");
    }
    if d > MAX_BOX_DIM {
        return invalid(format!("box mixed volumes limited to d ≤ {MAX_BOX_DIM}, got {d}"));
    }
    for b in boxes {
        if b.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: b.dim() });
        }
    }
    Ok(d)
}

/// `V(R_1, …, R_d)` for boxes, i.e. zonotopes with segments `[0, a^m_i f^m_i]`:
///
/// ```text
/// V = (1/d!) Σ_{i_1, …, i_d} a^1_{i_1} ⋯ a^d_{i_d} |f^1_{i_1} ∧ ⋯ ∧ f^d_{i_d}|
/// ```
///
/// summed over all `d^d` index maps. When all frames coincide only the
/// permutations contribute and this is [`box_permutation_sum`].
pub fn mixed_volume_boxes(boxes: &[&BoxSpec]) -> Result<f64> {
    let d = check_boxes(boxes)?;
    let edges: Vec<Vec<RealVector>> = boxes.iter().map(|b| b.edges()).collect();
    let tol = 64.0 * d as f64 * f64::EPSILON;
    let mut basis: Vec<RealVector> = Vec::with_capacity(d);
    let total = expand(&edges, 0, 1.0, &mut basis, tol);
    Ok(total / factorial(d))
}

fn expand(edges: &[Vec<RealVector>], m: usize, w: f64, basis: &mut Vec<RealVector>, tol: f64) -> f64 {
    if m == edges.len() {
        return w;
    }
    let mut sum = 0.0;
    for e in &edges[m] {
        let mut r = e.clone();
        for _ in 0..2 {
            for q in basis.iter() {
                let t = q.dot(&r);
                r.axpy(-t, q, 1.0);
            }
        }
        let rn = r.norm();
        if rn <= tol * e.norm() {
            continue;
        }
        basis.push(r / rn);
        sum += expand(edges, m + 1, w * rn, basis, tol);
        basis.pop();
    }
    sum
}

/// `(1/d!) Σ_{τ ∈ S_d} a^1_{τ(1)} ⋯ a^d_{τ(d)} |f^1_{τ(1)} ∧ ⋯ ∧ f^d_{τ(d)}|`, the
/// permutation-only part of [`mixed_volume_boxes`].
pub fn box_permutation_sum(boxes: &[&BoxSpec]) -> Result<f64> {
    let d = check_boxes(boxes)?;
    let mut total = 0.0;
    for tau in permutations(d) {
        let mut m = nalgebra::DMatrix::zeros(d, d);
        let mut w = 1.0;
        for (col, b) in boxes.iter().enumerate() {
            let i = tau[col];
            w *= b.lengths[i];
            m.set_column(col, &b.frame.vectors()[i]);
        }
        total += w * m.determinant().abs();
    }
    Ok(total / factorial(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotated(theta: f64, a: [f64; 2]) -> BoxSpec {
        let f = Frame::new(vec![
            RealVector::from_vec(vec![theta.cos(), theta.sin()]),
            RealVector::from_vec(vec![-theta.sin(), theta.cos()]),
        ])
        .unwrap();
        BoxSpec::new(f, a.to_vec()).unwrap()
    }

    #[test]
    fn identical_boxes_give_volume() {
        let b = BoxSpec::new(Frame::standard(3), vec![1.0, 2.0, 3.0]).unwrap();
        assert!((mixed_volume_boxes(&[&b, &b, &b]).unwrap() - 6.0).abs() < 1e-12);
        assert!((box_permutation_sum(&[&b, &b, &b]).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn axis_aligned_pair() {
        let a = BoxSpec::new(Frame::standard(2), vec![2.0, 3.0]).unwrap();
        let b = BoxSpec::new(Frame::standard(2), vec![5.0, 7.0]).unwrap();
        let v = mixed_volume_boxes(&[&a, &b]).unwrap();
        assert!((v - (2.0 * 7.0 + 3.0 * 5.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn rotated_unit_squares() {
        let a = rotated(0.0, [1.0, 1.0]);
        let b = rotated(std::f64::consts::FRAC_PI_4, [1.0, 1.0]);
        assert!((mixed_volume_boxes(&[&a, &b]).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!((box_permutation_sum(&[&a, &b]).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
    }
}

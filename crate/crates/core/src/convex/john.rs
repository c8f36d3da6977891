use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exterior::{Frame, RealVector};
use crate::numeric::ball_volume;
use crate::rng;
use crate::surface::{random_unit_vector, DiscreteSurface};

use super::zonotope::{projection_body, Zonotope};

/// The centered ellipsoid `{x : x·A x ≤ 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    shape: DMatrix<f64>,
}

impl Ellipsoid {
    pub fn new(shape: DMatrix<f64>) -> Result<Self> {
        if !shape.is_square() || shape.nrows() == 0 {
            return invalid("ellipsoid shape must be square and nonempty");
        }
        let scale = shape.amax();
        if (&shape - shape.transpose()).amax() > 1e-10 * scale {
            return invalid("ellipsoid shape must be symmetric");
        }
        let sym = (&shape + shape.transpose()) * 0.5;
        if sym.clone().cholesky().is_none() {
            return Err(Error::Degenerate("ellipsoid shape is not positive definite".into()));
        }
        Ok(Self { shape: sym })
    }

    /// The ball of radius `r`, shape `r^{-2} I`.
    pub fn ball(d: usize, r: f64) -> Result<Self> {
        if d == 0 || !(r > 0.0 && r.is_finite()) {
            return invalid("ball needs d ≥ 1 and a positive radius");
        }
        Self::new(DMatrix::identity(d, d) / (r * r))
    }

    pub fn dim(&self) -> usize {
        self.shape.nrows()
    }

    pub fn shape(&self) -> &DMatrix<f64> {
        &self.shape
    }

    /// `ω_d / sqrt(det A)`.
    pub fn volume(&self) -> f64 {
        ball_volume(self.dim()) / self.shape.determinant().sqrt()
    }

    /// `sqrt(x·A x)`.
    pub fn gauge(&self, x: &RealVector) -> f64 {
        x.dot(&(&self.shape * x)).max(0.0).sqrt()
    }

    /// The polar ellipsoid `{y : y·A^{-1} y ≤ 1}`.
    pub fn polar(&self) -> Result<Self> {
        let inv = self
            .shape
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Degenerate("ellipsoid shape is not positive definite".into()))?
            .inverse();
        Self::new(inv)
    }

    /// Semiaxis lengths in decreasing order with their principal directions.
    pub fn principal_axes(&self) -> (Vec<f64>, Frame) {
        let eig = self.shape.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let axes = order.iter().map(|&i| 1.0 / eig.eigenvalues[i].sqrt()).collect();
        let vectors = order.iter().map(|&i| eig.eigenvectors.column(i).clone_owned()).collect();
        let frame = Frame::orthonormalize(vectors).expect("eigenvectors of a symmetric matrix are independent");
        (axes, frame)
    }
}

/// Stopping rule for [`mvee`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MveeOptions {
    /// Stop once every point satisfies `x·X^{-1}x ≤ d(1 + tolerance)`.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for MveeOptions {
    fn default() -> Self {
        Self { tolerance: 1e-7, max_iterations: 100_000 }
    }
}

/// Minimum-volume centered ellipsoid containing `±x` for every given point.
///
/// Khachiyan's coordinate ascent on the weights `u` of the design
/// `X(u) = Σ u_i x_i x_iᵀ`, with away steps; the result is scaled so that
/// every point lies inside. Returns the ellipsoid and the iteration count.
pub fn mvee(points: &[RealVector], opts: &MveeOptions) -> Result<(Ellipsoid, usize)> {
    let Some(first) = points.first() else {
        return invalid("no points");
    };
    let d = first.len();
    if points.iter().any(|p| p.len() != d) {
        return invalid("points must share a dimension");
    }
    if d == 1 {
        let m = points.iter().map(|p| p[0].abs()).fold(0.0, f64::max);
        if m == 0.0 {
            return Err(Error::Degenerate("all points are zero".into()));
        }
        return Ok((Ellipsoid::new(DMatrix::from_element(1, 1, 1.0 / (m * m)))?, 0));
    }
    let n = points.len();
    let df = d as f64;
    let mut u = vec![1.0 / n as f64; n];
    let (mut xinv, mut m) = refresh(points, &u)?;
    let mut iterations = 0;
    loop {
        let (jmax, kmax) = argmax(&m);
        if kmax <= df * (1.0 + opts.tolerance) {
            break;
        }
        if iterations >= opts.max_iterations {
            return Err(Error::NoConvergence { iterations, tolerance: opts.tolerance });
        }
        iterations += 1;

        let mut kmin = f64::INFINITY;
        let mut imin = usize::MAX;
        for (i, (&ui, &mi)) in u.iter().zip(&m).enumerate() {
            if ui > 0.0 && mi < kmin {
                kmin = mi;
                imin = i;
            }
        }
        let mut away = None;
        if kmax - df < df - kmin {
            let uk = u[imin];
            let t = if kmin > 1.0 { ((df - kmin) / (kmin * (df - 1.0))).min(uk) } else { uk };
            if t > 0.0 && t < 1.0 && t * kmin < 1.0 - 1e-12 {
                away = Some((imin, t));
            }
        }
        match away {
            Some((k, t)) => {
                let y = &xinv * &points[k];
                let c = t / (1.0 - t * m[k]);
                for (mi, p) in m.iter_mut().zip(points) {
                    let z = p.dot(&y);
                    *mi = (1.0 - t) * (*mi + c * z * z);
                }
                xinv.ger(c, &y, &y, 1.0);
                xinv *= 1.0 - t;
                let uk = u[k];
                for ui in u.iter_mut() {
                    *ui /= 1.0 - t;
                }
                u[k] = if t >= uk { 0.0 } else { (uk - t) / (1.0 - t) };
            }
            None => {
                let s = (kmax - df) / (kmax * (df - 1.0));
                let y = &xinv * &points[jmax];
                let c = s / (1.0 + s * kmax);
                for (mi, p) in m.iter_mut().zip(points) {
                    let z = p.dot(&y);
                    *mi = (1.0 + s) * (*mi - c * z * z);
                }
                xinv.ger(-c, &y, &y, 1.0);
                xinv *= 1.0 + s;
                for ui in u.iter_mut() {
                    *ui /= 1.0 + s;
                }
                u[jmax] += s / (1.0 + s);
            }
        }
        if iterations % 256 == 0 {
            (xinv, m) = refresh(points, &u)?;
        }
    }
    let (xinv, m) = refresh(points, &u)?;
    let (_, kmax) = argmax(&m);
    Ok((Ellipsoid::new(xinv / kmax.max(df))?, iterations))
}

fn argmax(m: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, &x) in m.iter().enumerate() {
        if x > best.1 {
            best = (i, x);
        }
    }
    best
}

fn refresh(points: &[RealVector], u: &[f64]) -> Result<(DMatrix<f64>, Vec<f64>)> {
    let d = points[0].len();
    let mut x = DMatrix::zeros(d, d);
    for (p, &w) in points.iter().zip(u) {
        if w > 0.0 {
            x.ger(w, p, p, 1.0);
        }
    }
    let xinv = x
        .cholesky()
        .ok_or_else(|| Error::Degenerate("points do not span the space".into()))?
        .inverse();
    let m = points.iter().map(|p| p.dot(&(&xinv * p))).collect();
    Ok((xinv, m))
}

/// A centrally symmetric convex body with nonempty interior.
#[derive(Debug, Clone, Copy)]
pub enum SymmetricBody<'a> {
    /// `K^p(S) = {y : Σ w|y·v|^p ≤ 1}`.
    KBody { surface: &'a DiscreteSurface, p: f64 },
    Zonotope(&'a Zonotope),
    Ball { dim: usize, radius: f64 },
    Ellipsoid(&'a Ellipsoid),
}

/// A John ellipsoid and how it was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct JohnEllipsoid {
    pub ellipsoid: Ellipsoid,
    /// True when the polar body was represented by samples rather than all its vertices.
    pub approximate: bool,
    pub iterations: usize,
    pub points: usize,
}

/// Number of sampled boundary points used when the polar body has too many vertices.
const SAMPLED_POINTS: usize = 1 << 16;

/// Largest generator count for which all zonotope vertices are enumerated.
const EXACT_VERTEX_GENERATORS: usize = 16;

/// Maximal-volume ellipsoid inscribed in `body`, as the polar of the minimal
/// enclosing ellipsoid of the polar body.
pub fn john_ellipsoid(body: &SymmetricBody, seed: u64, opts: &MveeOptions) -> Result<JohnEllipsoid> {
    let (points, approximate) = polar_points(body, seed)?;
    let (outer, iterations) = mvee(&points, opts)?;
    Ok(JohnEllipsoid { ellipsoid: outer.polar()?, approximate, iterations, points: points.len() })
}

fn polar_points(body: &SymmetricBody, seed: u64) -> Result<(Vec<RealVector>, bool)> {
    let mut rng = rng::from_seed(seed);
    match *body {
        SymmetricBody::KBody { surface, p } => {
            if !(p >= 1.0 && p.is_finite()) {
                return invalid("K^p needs 1 ≤ p < ∞");
            }
            if !surface.is_spanning() {
                return Err(Error::NonSpanning { dim: surface.dim() });
            }
            let d = surface.dim();
            if p == 1.0 {
                let z = projection_body(surface);
                if z.generators().len() <= EXACT_VERTEX_GENERATORS {
                    return Ok((z.half_vertices()?, false));
                }
                let mut pts: Vec<RealVector> = z.generators().to_vec();
                for _ in 0..SAMPLED_POINTS {
                    pts.push(z.extreme_point(&random_unit_vector(d, &mut rng)));
                }
                return Ok((pts, true));
            }
            let pts = (0..SAMPLED_POINTS).map(|_| kp_gradient(surface, p, &random_unit_vector(d, &mut rng))).collect();
            Ok((pts, true))
        }
        SymmetricBody::Zonotope(z) => {
            let d = z.dim();
            let mut pts = Vec::with_capacity(SAMPLED_POINTS);
            for _ in 0..SAMPLED_POINTS {
                let u = random_unit_vector(d, &mut rng);
                let h = z.support(&u);
                if h > 0.0 {
                    pts.push(u / h);
                } else {
                    return Err(Error::Degenerate("zonotope has empty interior".into()));
                }
            }
            Ok((pts, true))
        }
        SymmetricBody::Ball { dim, radius } => {
            if dim == 0 || !(radius > 0.0 && radius.is_finite()) {
                return invalid("ball needs d ≥ 1 and a positive radius");
            }
            Ok((sphere_design(dim, 64, &mut rng).into_iter().map(|x| x / radius).collect(), false))
        }
        SymmetricBody::Ellipsoid(e) => {
            // boundary of the polar {y : y·A^{-1} y ≤ 1} is L S^{d-1} with L Lᵀ = A
            let l = e.shape().clone().cholesky().expect("shape is positive definite").l();
            let pts = sphere_design(e.dim(), 64, &mut rng).into_iter().map(|x| &l * x).collect();
            Ok((pts, false))
        }
    }
}

/// Cross-polytope vertices plus `extra` uniform points of the unit sphere.
fn sphere_design(d: usize, extra: usize, rng: &mut rng::Rng) -> Vec<RealVector> {
    let mut pts: Vec<RealVector> =
        (0..d).map(|i| RealVector::from_fn(d, |r, _| if r == i { 1.0 } else { 0.0 })).collect();
    pts.extend((0..extra).map(|_| random_unit_vector(d, rng)));
    pts
}

/// Gradient of the gauge `g(y) = (Σ w|y·v|^p)^{1/p}` at `u`; it lies on the boundary of the polar body.
fn kp_gradient(s: &DiscreteSurface, p: f64, u: &RealVector) -> RealVector {
    let mut grad = RealVector::zeros(s.dim());
    let mut g = 0.0;
    for a in s.atoms() {
        let t = u.dot(&a.vector);
        let at = t.abs();
        if at > 0.0 {
            g += a.weight * at.powf(p);
            grad.axpy(a.weight * at.powf(p - 1.0) * t.signum(), &a.vector, 1.0);
        }
    }
    let g = g.powf(1.0 / p);
    grad * g.powf(1.0 - p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_is_its_own_john_ellipsoid() {
        let j = john_ellipsoid(&SymmetricBody::Ball { dim: 3, radius: 2.0 }, 1, &MveeOptions::default()).unwrap();
        let target = DMatrix::<f64>::identity(3, 3) / 4.0;
        assert!((j.ellipsoid.shape() - target).amax() < 1e-6);
        assert!(!j.approximate);
    }

    #[test]
    fn ellipsoid_fixed_point() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.3, 0.0, 0.3, 1.0, -0.2, 0.0, -0.2, 0.5]);
        let e = Ellipsoid::new(a.clone()).unwrap();
        let j = john_ellipsoid(&SymmetricBody::Ellipsoid(&e), 4, &MveeOptions::default()).unwrap();
        let err = (j.ellipsoid.shape() - &a).amax();
        assert!(err < 1e-4, "{err} {}", j.ellipsoid.shape());
    }

    #[test]
    fn cross_polytope() {
        for d in 2..=4 {
            let s = DiscreteSurface::from_pairs(d, (0..d).map(|i| (1.0, (0..d).map(|r| if r == i { 1.0 } else { 0.0 }).collect()))).unwrap();
            let j = john_ellipsoid(&SymmetricBody::KBody { surface: &s, p: 1.0 }, 0, &MveeOptions::default()).unwrap();
            let (axes, _) = j.ellipsoid.principal_axes();
            for a in axes {
                assert!((a - 1.0 / (d as f64).sqrt()).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn mvee_of_a_box_is_the_circumscribed_ellipsoid() {
        let pts = vec![RealVector::from_vec(vec![2.0, 1.0]), RealVector::from_vec(vec![2.0, -1.0])];
        let (e, _) = mvee(&pts, &MveeOptions::default()).unwrap();
        let (axes, _) = e.principal_axes();
        assert!((axes[0] - 2.0 * 2f64.sqrt()).abs() < 1e-6);
        assert!((axes[1] - 2f64.sqrt()).abs() < 1e-6);
        for p in &pts {
            assert!(e.gauge(p) <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn volume_and_polar() {
        let e = Ellipsoid::ball(2, 3.0).unwrap();
        assert!((e.volume() - 9.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((e.polar().unwrap().volume() - std::f64::consts::PI / 9.0).abs() < 1e-12);
        assert!(Ellipsoid::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])).is_err());
    }
}

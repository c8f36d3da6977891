//! Library routes against independent computations.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use qgeo::convex::{
    covariance, mixed_discriminant, mixed_volume_boxes, mixed_volume_zb, projection_body, zonotope_volume, BoxSpec,
    Zonotope, DEFAULT_SUBSET_CAP,
};
use qgeo::crofton::{analytic_q1, intersection_count, AnalyticSurface, ShapeKind};
use qgeo::ensembles::random_surface;
use qgeo::exterior::block_determinant_check;
use qgeo::inequality::{sphere_expectation, vitale_table};
use qgeo::numeric::{ball_volume, factorial, permutations};
use qgeo::q::{covariance_spectrum, elementary_symmetric};
use qgeo::rng::from_seed;
use qgeo::surface::make_circle_surface;
use qgeo::{q2_spectral, q_exact, sphere_reference, DiscreteSurface, Exponent, Frame, QOptions, RealVector};
use rand::Rng as _;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// `Σ_tuples ∏w · det(Gram)^{p/2}` by nested loops and a dense determinant.
fn brute_sum(surfaces: &[&DiscreteSurface], p: f64) -> f64 {
    let j = surfaces.len();
    let mut idx = vec![0usize; j];
    let mut total = 0.0;
    loop {
        let mut w = 1.0;
        let cols: Vec<RealVector> = (0..j)
            .map(|k| {
                let a = &surfaces[k].atoms()[idx[k]];
                w *= a.weight;
                a.vector.clone()
            })
            .collect();
        let m = DMatrix::from_columns(&cols);
        let g = (m.transpose() * &m).determinant().max(0.0);
        total += w * g.powf(p / 2.0);
        let mut k = 0;
        loop {
            if k == j {
                return total;
            }
            idx[k] += 1;
            if idx[k] < surfaces[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

#[test]
fn enumeration_matches_brute_force() {
    let mut r = from_seed(11);
    for _ in 0..60 {
        let d = r.random_range(2..=4);
        let j = r.random_range(1..=d);
        let ss: Vec<DiscreteSurface> = (0..j).map(|_| random_surface(d, r.random_range(1..=5), &mut r).unwrap()).collect();
        let refs: Vec<&DiscreteSurface> = ss.iter().collect();
        for p in [0.5, 1.0, 2.0, 3.0] {
            let q = q_exact(&refs, Exponent::Finite(p), &QOptions::default()).unwrap().value;
            let oracle = brute_sum(&refs, p).powf(1.0 / (j as f64 * p));
            assert!(rel(q, oracle) < 1e-10, "p={p}: {q} vs {oracle}");
        }
    }
}

/// `e_j` of the spectrum as the sum of `j×j` principal minors.
fn principal_minor_sum(t: &DMatrix<f64>, j: usize) -> f64 {
    let d = t.nrows();
    let mut total = 0.0;
    for mask in 0u32..(1 << d) {
        if mask.count_ones() as usize != j {
            continue;
        }
        let ix: Vec<usize> = (0..d).filter(|&i| mask >> i & 1 == 1).collect();
        total += DMatrix::from_fn(j, j, |a, b| t[(ix[a], ix[b])]).determinant();
    }
    total
}

#[test]
fn cauchy_binet_constant() {
    // Q_j^2(S)^{2j} = j!·e_j(T_S), established by brute force before the spectral route is trusted
    let mut r = from_seed(12);
    for _ in 0..100 {
        let d = r.random_range(1..=4);
        let s = random_surface(d, r.random_range(1..=6), &mut r).unwrap();
        let t = covariance(&s).matrix().clone();
        for j in 1..=d {
            let lhs = brute_sum(&vec![&s; j], 2.0);
            // rank-deficient tuples leave rounding noise in the dense determinants
            let floor = 1e-12 * t.trace().powi(j as i32);
            let rhs = factorial(j) * principal_minor_sum(&t, j);
            assert!(rel(lhs, rhs) < 1e-10 || lhs.abs().max(rhs.abs()) < floor, "{lhs} vs {rhs}");
            let spec = q2_spectral(&s, j).unwrap().value;
            assert!(rel(spec.powi(2 * j as i32), lhs) < 1e-9 || lhs < floor, "n={} j={j}: {spec} {lhs}", s.len());
            let e = elementary_symmetric(&covariance_spectrum(&s), j)[j];
            assert!((e - principal_minor_sum(&t, j)).abs() < 1e-9 * (1.0 + e.abs()));
        }
    }
}

#[test]
fn circle_constant_by_quadrature() {
    // ∫∫ |sin(θ1 − θ2)| over [0, 2π)^2 by the midpoint rule
    let n = 4000;
    let h = 2.0 * PI / n as f64;
    let mut total = 0.0;
    for a in 0..n {
        for b in 0..n {
            total += ((a as f64 - b as f64) * h).sin().abs();
        }
    }
    total *= h * h;
    assert!(rel(total, 8.0 * PI) < 1e-6);
    let q = sphere_reference(2, 2, Exponent::Finite(1.0)).unwrap();
    assert!(rel(q * q, total) < 1e-6);
    let s = make_circle_surface(n).unwrap();
    let qs = q_exact(&[&s, &s], Exponent::Finite(1.0), &QOptions::default()).unwrap().value;
    assert!(rel(qs, q) < 1e-6);
}

#[test]
fn sphere_constants_with_known_closed_forms() {
    for d in 1..=10 {
        let v = sphere_reference(d, 1, Exponent::Finite(1.0)).unwrap();
        assert!(rel(v, d as f64 * ball_volume(d)) < 1e-12);
    }
    let q = sphere_reference(2, 2, Exponent::Finite(2.0)).unwrap();
    assert!(rel(q.powi(4), 2.0 * PI * PI) < 1e-12);
    assert!(rel(sphere_reference(3, 2, Exponent::Finite(1.0)).unwrap(), 2.0 * PI.powf(1.5)) < 1e-12);
}

// Convex hull of planar points (monotone chain), counter-clockwise.
fn hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn shoelace(poly: &[(f64, f64)]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| poly[i].0 * poly[(i + 1) % n].1 - poly[(i + 1) % n].0 * poly[i].1).sum::<f64>().abs() / 2.0
}

fn perimeter(poly: &[(f64, f64)]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| (poly[i].0 - poly[(i + 1) % n].0).hypot(poly[i].1 - poly[(i + 1) % n].1)).sum()
}

fn box_corners(b: &BoxSpec) -> Vec<(f64, f64)> {
    let e = b.edges();
    [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)]
        .iter()
        .map(|&(s, t)| (s * e[0][0] + t * e[1][0], s * e[0][1] + t * e[1][1]))
        .collect()
}

fn rotated(theta: f64, a: f64, b: f64) -> BoxSpec {
    let f = Frame::new(vec![
        RealVector::from_vec(vec![theta.cos(), theta.sin()]),
        RealVector::from_vec(vec![-theta.sin(), theta.cos()]),
    ])
    .unwrap();
    BoxSpec::new(f, vec![a, b]).unwrap()
}

#[test]
fn box_mixed_volume_by_polarization() {
    let mut r = from_seed(13);
    for _ in 0..200 {
        let r1 = rotated(r.random_range(0.0..PI), r.random_range(0.2..3.0), r.random_range(0.2..3.0));
        let r2 = rotated(r.random_range(0.0..PI), r.random_range(0.2..3.0), r.random_range(0.2..3.0));
        let (c1, c2) = (box_corners(&r1), box_corners(&r2));
        let sum: Vec<(f64, f64)> = c1.iter().flat_map(|a| c2.iter().map(move |b| (a.0 + b.0, a.1 + b.1))).collect();
        let oracle = (shoelace(&hull(sum)) - shoelace(&hull(c1)) - shoelace(&hull(c2))) / 2.0;
        let v = mixed_volume_boxes(&[&r1, &r2]).unwrap();
        assert!(rel(v, oracle) < 1e-10, "{v} vs {oracle}");
    }
}

fn zonotope_polygon(z: &Zonotope) -> Vec<(f64, f64)> {
    let g = z.generators();
    let mut pts = Vec::new();
    for mask in 0u32..(1 << g.len()) {
        let mut x = (0.0, 0.0);
        for (i, gi) in g.iter().enumerate() {
            let s = if mask >> i & 1 == 1 { 1.0 } else { -1.0 };
            x.0 += s * gi[0];
            x.1 += s * gi[1];
        }
        pts.push(x);
    }
    hull(pts)
}

#[test]
fn planar_zonotopes_by_hull() {
    let mut r = from_seed(14);
    for _ in 0..100 {
        let s = random_surface(2, r.random_range(2..=8), &mut r).unwrap();
        let z = projection_body(&s);
        let poly = zonotope_polygon(&z);
        assert!(rel(zonotope_volume(&z, DEFAULT_SUBSET_CAP).unwrap(), shoelace(&poly)) < 1e-10);
        // V(K, B) is half the perimeter in the plane
        let v = mixed_volume_zb(&[&z], 1, DEFAULT_SUBSET_CAP).unwrap();
        assert!(rel(v, perimeter(&poly) / 2.0) < 1e-10);
    }
}

/// `D(A_1..A_d) = (1/d!) Σ_σ det[A_{σ(1)} e_1, …, A_{σ(d)} e_d]`.
fn discriminant_by_columns(mats: &[DMatrix<f64>]) -> f64 {
    let d = mats.len();
    let mut total = 0.0;
    for perm in permutations(d) {
        let m = DMatrix::from_fn(d, d, |r, c| mats[perm[c]][(r, c)]);
        total += m.determinant();
    }
    total / factorial(d)
}

fn random_psd(d: usize, r: &mut qgeo::rng::Rng) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d + 1, |_, _| r.random_range(-1.0..1.0));
    &g * g.transpose()
}

#[test]
fn discriminant_by_column_expansion() {
    let mut r = from_seed(15);
    for _ in 0..200 {
        let d = r.random_range(1..=5);
        let mats: Vec<DMatrix<f64>> = (0..d).map(|_| random_psd(d, &mut r)).collect();
        let refs: Vec<&DMatrix<f64>> = mats.iter().collect();
        let v = mixed_discriminant(&refs).unwrap();
        let oracle = discriminant_by_columns(&mats);
        assert!((v - oracle).abs() < 1e-9 * (1.0 + oracle.abs()), "{v} vs {oracle}");
    }
}

#[test]
fn block_determinant_by_dense_matrices() {
    let mut r = from_seed(16);
    for _ in 0..500 {
        let d = r.random_range(2..=5);
        let blocks: Vec<DMatrix<f64>> = (0..d).map(|_| DMatrix::from_fn(d, d - 1, |_, _| r.random_range(-1.0..1.0))).collect();
        let rep = block_determinant_check(&blocks).unwrap();
        assert!(rep.pass, "{rep:?}");
        // Y's columns are normals to each block's column span, with length the (d−1)-volume
        let y = DMatrix::from_fn(d, d, |row, col| {
            let b = &blocks[col];
            let minor = b.clone().remove_row(row).determinant();
            if (row + d - 1) % 2 == 0 { minor } else { -minor }
        });
        assert!(rel(rep.det_y.abs(), y.determinant().abs()) < 1e-8);
    }
}

#[test]
fn intersection_points_lie_on_every_shape() {
    let mut r = from_seed(17);
    let mut seen = 0;
    for _ in 0..2000 {
        let kind = if r.random_bool(0.5) { ShapeKind::Circle } else { ShapeKind::Sphere };
        let d = kind.dim();
        let fam: Vec<AnalyticSurface> = (0..d)
            .map(|_| AnalyticSurface::new(kind, r.random_range(0.3..2.0), (0..d).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap())
            .collect();
        let shifts: Vec<RealVector> = (1..d).map(|_| RealVector::from_fn(d, |_, _| r.random_range(-1.0..1.0))).collect();
        let x = intersection_count(&fam, &shifts).unwrap();
        assert!(x.points.is_empty() || x.points.len() == 2);
        for p in &x.points {
            seen += 1;
            for (i, s) in fam.iter().enumerate() {
                let mut c = RealVector::from_column_slice(&s.center);
                if i > 0 {
                    c -= &shifts[i - 1];
                }
                assert!(((p - c).norm() - s.r).abs() < 1e-9);
            }
        }
    }
    assert!(seen > 100);
}

#[test]
fn crofton_closed_forms_are_bilinear_in_radii() {
    let c = |r: f64| AnalyticSurface::centered(ShapeKind::Circle, r).unwrap();
    assert!(rel(analytic_q1(&[c(1.0), c(0.7)]).unwrap(), 8.0 * PI * 0.7) < 1e-14);
    assert!(rel(analytic_q1(&[c(3.0), c(2.1)]).unwrap(), 9.0 * analytic_q1(&[c(1.0), c(0.7)]).unwrap()) < 1e-14);
    let s = |r: f64| AnalyticSurface::centered(ShapeKind::Sphere, r).unwrap();
    let q = sphere_reference(3, 3, Exponent::Finite(1.0)).unwrap();
    assert!(rel(analytic_q1(&[s(1.0), s(1.0), s(1.0)]).unwrap(), q.powi(3)) < 1e-14);
}

#[test]
fn vitale_sequences_by_direct_products() {
    let rows = vitale_table(50).unwrap();
    for row in &rows {
        let d = row.d;
        let ratio: f64 = (1..=d).map(|k| k as f64 / d as f64).product();
        assert!(rel(row.rhs, ratio.powf(1.0 / (2.0 * d as f64))) < 1e-12);
        assert!(row.pass);
    }
    // d = 2, p = 1 on the circle: E|sin| over two independent angles is 2/π
    assert!(rel(sphere_expectation(2, 2, 1.0).unwrap(), 2.0 / PI) < 1e-12);
    // E det² of three uniform unit vectors in R^3 is d!/d^d
    assert!(rel(sphere_expectation(3, 3, 2.0).unwrap(), 6.0 / 27.0) < 1e-12);
}

//! Invariants over random instances.

use nalgebra::DMatrix;
use proptest::prelude::*;
use qgeo::convex::{covariance, mixed_discriminant, mixed_volume_zb, projection_body, zonotope_volume, Zonotope};
use qgeo::ensembles::{random_cover, random_spanning_surface, random_surface};
use qgeo::exterior::{check_wedge_cover_bound, random_orthogonal};
use qgeo::inequality::{certify_diagonal_monotone, certify_finner, certify_isoperimetric, certify_logconcavity, sphere_ratio_chain};
use qgeo::numeric::{ball_volume, factorial};
use qgeo::q::mixed_volume_constant;
use qgeo::rng::{from_seed, Rng};
use qgeo::surface::transform_surface;
use qgeo::{q2_spectral, q_exact, wedge_norm, DiscreteSurface, Exponent, QOptions, RealVector};
use rand::seq::SliceRandom;
use rand::Rng as _;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn gaussian_vectors(d: usize, j: usize, r: &mut Rng) -> Vec<RealVector> {
    (0..j).map(|_| RealVector::from_fn(d, |_, _| r.random_range(-1.0..1.0))).collect()
}

fn exponents() -> [Exponent; 4] {
    [Exponent::Finite(0.5), Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Infinite]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wedge_symmetries(seed in any::<u64>(), d in 1usize..=5) {
        let mut r = from_seed(seed);
        let j = r.random_range(1..=d);
        let vs = gaussian_vectors(d, j, &mut r);
        let w = wedge_norm(&vs).unwrap();
        let mut shuffled = vs.clone();
        shuffled.shuffle(&mut r);
        prop_assert!(rel(w, wedge_norm(&shuffled).unwrap()) < 1e-10);
        let o = random_orthogonal(d, r.random()).unwrap();
        let rotated: Vec<RealVector> = vs.iter().map(|v| &o * v).collect();
        prop_assert!(rel(w, wedge_norm(&rotated).unwrap()) < 1e-10);
        let hadamard: f64 = vs.iter().map(|v| v.norm()).product();
        prop_assert!(w <= hadamard * (1.0 + 1e-12));
        if j == d {
            let det = DMatrix::from_columns(&vs).determinant().abs();
            prop_assert!(rel(w, det) < 1e-10 || det < 1e-14);
        }
    }

    #[test]
    fn wedge_cover_bound(seed in any::<u64>(), d in 2usize..=5) {
        let mut r = from_seed(seed);
        let j = r.random_range(1..=d);
        let vs = gaussian_vectors(d, j, &mut r);
        let cover = random_cover(j, &mut r).unwrap();
        prop_assert!(check_wedge_cover_bound(&vs, &cover).unwrap().pass);
    }

    #[test]
    fn q_invariances(seed in any::<u64>(), d in 2usize..=4) {
        let mut r = from_seed(seed);
        let j = r.random_range(1..=d);
        let ss: Vec<DiscreteSurface> = (0..j).map(|_| random_surface(d, r.random_range(1..=5), &mut r).unwrap()).collect();
        let refs: Vec<&DiscreteSurface> = ss.iter().collect();
        let opts = QOptions::default();
        let o = random_orthogonal(d, r.random()).unwrap();
        let rotated: Vec<DiscreteSurface> = ss.iter().map(|s| transform_surface(s, &o).unwrap()).collect();
        let rotated_refs: Vec<&DiscreteSurface> = rotated.iter().collect();
        let mut perm = refs.clone();
        perm.shuffle(&mut r);
        let c = r.random_range(0.5..3.0);
        let scaled: Vec<DiscreteSurface> = ss.iter().map(|s| s.scale_weights(c).unwrap()).collect();
        let scaled_refs: Vec<&DiscreteSurface> = scaled.iter().collect();
        for p in exponents() {
            let q = q_exact(&refs, p, &opts).unwrap().value;
            prop_assert!((q - q_exact(&perm, p, &opts).unwrap().value).abs() <= 1e-12 * q.max(1.0));
            prop_assert!(rel(q, q_exact(&rotated_refs, p, &opts).unwrap().value) < 1e-10 || q < 1e-12);
            // Riesz–Hadamard with the 1/j normalization: the geometric mean of the Q_1
            let singles: f64 = refs.iter().map(|s| q_exact(&[*s], p, &opts).unwrap().value).product();
            prop_assert!(q <= singles.powf(1.0 / j as f64) * (1.0 + 1e-12));
            if let Exponent::Finite(x) = p {
                let qs = q_exact(&scaled_refs, p, &opts).unwrap().value;
                prop_assert!(rel(qs, q * c.powf(1.0 / x)) < 1e-10 || q < 1e-12);
            }
        }
    }

    #[test]
    fn spectral_route(seed in any::<u64>(), d in 1usize..=5) {
        let mut r = from_seed(seed);
        let s = random_surface(d, r.random_range(1..=10), &mut r).unwrap();
        for j in 1..=d {
            let a = q_exact(&vec![&s; j], Exponent::Finite(2.0), &QOptions::default()).unwrap().value;
            let b = q2_spectral(&s, j).unwrap().value;
            prop_assert!(rel(a, b) < 1e-9 || a.max(b) < 1e-6, "j={} {} vs {}", j, a, b);
        }
    }

    #[test]
    fn zonotope_identities(seed in any::<u64>(), d in 2usize..=5) {
        let mut r = from_seed(seed);
        let s = random_spanning_surface(d, 12, &mut r).unwrap();
        let opts = QOptions::default();
        let z = projection_body(&s);
        let vol = zonotope_volume(&z, opts.subset_cap).unwrap();
        let qd = q_exact(&vec![&s; d], Exponent::Finite(1.0), &opts).unwrap().value;
        prop_assert!(rel(qd.powi(d as i32), factorial(d) / 2f64.powi(d as i32) * vol) < 1e-9);
        // off-diagonal tuples
        let j = r.random_range(1..=d);
        let ss: Vec<DiscreteSurface> = (0..j).map(|_| random_surface(d, r.random_range(1..=5), &mut r).unwrap()).collect();
        let zs: Vec<Zonotope> = ss.iter().map(projection_body).collect();
        let v = mixed_volume_zb(&zs.iter().collect::<Vec<_>>(), d - j, opts.subset_cap).unwrap();
        let q = q_exact(&ss.iter().collect::<Vec<_>>(), Exponent::Finite(1.0), &opts).unwrap().value;
        prop_assert!(rel(q.powi(j as i32), mixed_volume_constant(d, j) * v) < 1e-9);
    }

    #[test]
    fn aleksandrov_fenchel_for_zonotopes_and_balls(seed in any::<u64>(), d in 2usize..=4) {
        let mut r = from_seed(seed);
        let j = r.random_range(2..=d);
        let zs: Vec<Zonotope> = (0..j).map(|_| projection_body(&random_surface(d, r.random_range(1..=5), &mut r).unwrap())).collect();
        let cap = QOptions::default().subset_cap;
        let with = |a: &Zonotope, b: &Zonotope| {
            let mut t: Vec<&Zonotope> = vec![a, b];
            t.extend(zs[2..].iter());
            mixed_volume_zb(&t, d - j, cap).unwrap()
        };
        let v12 = with(&zs[0], &zs[1]);
        let v11 = with(&zs[0], &zs[0]);
        let v22 = with(&zs[1], &zs[1]);
        let scale = v11.max(v22).max(v12).powi(2);
        prop_assert!(v12 * v12 >= v11 * v22 - 1e-9 * scale);
    }

    #[test]
    fn discriminant_properties(seed in any::<u64>(), d in 1usize..=5) {
        let mut r = from_seed(seed);
        let mats: Vec<DMatrix<f64>> = (0..d)
            .map(|_| {
                let g = DMatrix::from_fn(d, d, |_, _| r.random_range(-1.0..1.0));
                &g * g.transpose() + DMatrix::identity(d, d) * 0.05
            })
            .collect();
        let refs: Vec<&DMatrix<f64>> = mats.iter().collect();
        let v = mixed_discriminant(&refs).unwrap();
        let mut perm = refs.clone();
        perm.shuffle(&mut r);
        prop_assert!((v - mixed_discriminant(&perm).unwrap()).abs() < 1e-10 * v.abs().max(1.0));
        // (i) nonnegative, (ii) diagonal and identity values
        prop_assert!(v >= -1e-12);
        let diag = mixed_discriminant(&vec![refs[0]; d]).unwrap();
        prop_assert!(rel(diag, mats[0].determinant()) < 1e-8);
        let id = DMatrix::<f64>::identity(d, d);
        prop_assert!(rel(mixed_discriminant(&vec![&id; d]).unwrap(), 1.0) < 1e-12);
        // (iii) d·D(T, I, …, I) = tr T
        let mut t = vec![&id; d];
        t[0] = refs[0];
        prop_assert!(rel(d as f64 * mixed_discriminant(&t).unwrap(), mats[0].trace()) < 1e-8);
        // (iv) multilinearity in the first slot
        let c = r.random_range(0.1..4.0);
        let sum = &mats[0] * c + &mats[d - 1];
        let mut a = refs.clone();
        a[0] = &sum;
        let mut b = refs.clone();
        b[0] = refs[d - 1];
        let lin = c * v + mixed_discriminant(&b).unwrap();
        prop_assert!((mixed_discriminant(&a).unwrap() - lin).abs() < 1e-8 * lin.abs().max(1.0));
        // Aleksandrov
        if d >= 2 {
            let mut x = refs.clone();
            x[1] = refs[0];
            let mut y = refs.clone();
            y[0] = refs[1];
            let (a11, a22) = (mixed_discriminant(&x).unwrap(), mixed_discriminant(&y).unwrap());
            prop_assert!(v * v >= a11 * a22 * (1.0 - 1e-9));
        }
    }

    #[test]
    fn discriminant_under_transforms(seed in any::<u64>(), d in 1usize..=4) {
        // (v) D(S T_1 Sᵀ, …) = det(S)^2 D(T_1, …) with T_i = covariance of S_i
        let mut r = from_seed(seed);
        let ss: Vec<DiscreteSurface> = (0..d).map(|_| random_surface(d, r.random_range(1..=4), &mut r).unwrap()).collect();
        let m = DMatrix::from_fn(d, d, |_, _| r.random_range(-1.0..1.0));
        let ts: Vec<DMatrix<f64>> = ss.iter().map(|s| covariance(s).matrix().clone()).collect();
        let ms: Vec<DMatrix<f64>> = ss.iter().map(|s| covariance(&transform_surface(s, &m).unwrap()).matrix().clone()).collect();
        let before = mixed_discriminant(&ts.iter().collect::<Vec<_>>()).unwrap();
        let after = mixed_discriminant(&ms.iter().collect::<Vec<_>>()).unwrap();
        let expect = m.determinant().powi(2) * before;
        let scale: f64 = ms.iter().map(|t| t.norm()).product::<f64>().max(1e-300);
        prop_assert!((after - expect).abs() <= 1e-8 * expect.abs() + 1e-12 * scale);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn finner_certificates(seed in any::<u64>(), d in 2usize..=5) {
        let mut r = from_seed(seed);
        let j = r.random_range(1..=d);
        let ss: Vec<DiscreteSurface> = (0..j).map(|_| random_surface(d, r.random_range(1..=4), &mut r).unwrap()).collect();
        let cover = random_cover(j, &mut r).unwrap();
        for p in exponents() {
            let c = certify_finner(&ss.iter().collect::<Vec<_>>(), &cover, p, &QOptions::default()).unwrap();
            prop_assert!(c.pass, "{:?}", c);
        }
    }

    #[test]
    fn diagonal_monotone(seed in any::<u64>(), d in 2usize..=4) {
        let mut r = from_seed(seed);
        let s = random_surface(d, r.random_range(1..=8), &mut r).unwrap();
        for p in exponents() {
            for c in certify_diagonal_monotone(&s, p, &QOptions::default()).unwrap() {
                prop_assert!(c.pass, "{:?}", c);
            }
        }
    }

    #[test]
    fn sphere_comparisons(seed in any::<u64>(), d in 2usize..=5) {
        let mut r = from_seed(seed);
        let s = random_spanning_surface(d, 10, &mut r).unwrap();
        let opts = QOptions::default();
        for p in [Exponent::Finite(1.0), Exponent::Finite(2.0)] {
            let chain = sphere_ratio_chain(&s, p, &opts).unwrap();
            prop_assert!(chain.pass, "{:?}", chain);
            let lc = certify_logconcavity(&s, p, &opts).unwrap();
            prop_assert!(lc.pass, "{:?}", lc);
            // the a_j^{1/j} chain and the sphere-ratio steps agree in sign
            for (step, link) in chain.steps.iter().zip(&lc.chain) {
                prop_assert_eq!(step.margin >= -step.tolerance, link.margin >= -link.tolerance);
            }
        }
        prop_assert!(certify_isoperimetric(&s, &opts).unwrap().pass);
    }
}

#[test]
fn ball_copies_only_give_ball_volume() {
    let z: Vec<&Zonotope> = Vec::new();
    for d in 1..=5 {
        assert!(rel(mixed_volume_zb(&z, d, 1000).unwrap(), ball_volume(d)) < 1e-14);
    }
}

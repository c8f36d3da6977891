use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exterior::{planes_wedge, random_frame, Frame, Plane, RealVector};
use crate::numeric::{ball_volume, factorial, permutations, KahanSum};
use crate::q::{covariance_eigen, mc_mean, q_exact, Exponent, QOptions};
use crate::rng;
use crate::surface::{symmetric_uniform, Atom, DiscreteSurface};

use super::john::{john_ellipsoid, MveeOptions, SymmetricBody};
use super::zonotope::{projection_body, zonotope_volume};

/// `(Σ w_i |y·v_i|^p)^{1/p}`, the gauge of `K^p(S)`.
pub fn kp_norm(y: &RealVector, s: &DiscreteSurface, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return invalid(format!("the K^p gauge needs 1 ≤ p < ∞, got {p}"));
    }
    if y.len() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: y.len() });
    }
    Ok(gauge(y, s, p))
}

fn gauge(y: &RealVector, s: &DiscreteSurface, p: f64) -> f64 {
    let mut acc = 0.0;
    if p == 1.0 {
        for a in s.atoms() {
            acc += a.weight * y.dot(&a.vector).abs();
        }
        acc
    } else {
        for a in s.atoms() {
            acc += a.weight * y.dot(&a.vector).abs().powf(p);
        }
        acc.powf(1.0 / p)
    }
}

/// What the mass of a surface is measured against.
#[derive(Debug, Clone, Copy)]
pub enum MassTarget<'a> {
    /// A unit vector `e`: `σ(e, S) = Σ w|e·v|`.
    Vector(&'a RealVector),
    /// A `k`-plane `E`: `σ(E, S) = Σ_{ordered k-tuples} ∏w · |π_E v_1 ∧ … ∧ π_E v_k|`.
    Plane(&'a Plane),
}

/// Directional or plane mass of `s`.
pub fn directional_mass(target: MassTarget, s: &DiscreteSurface, opts: &QOptions) -> Result<f64> {
    match target {
        MassTarget::Vector(e) => {
            if e.len() != s.dim() {
                return Err(Error::DimensionMismatch { expected: s.dim(), found: e.len() });
            }
            if (e.norm() - 1.0).abs() > 1e-10 {
                return invalid("directional mass needs a unit vector");
            }
            let mut acc = KahanSum::new();
            for a in s.atoms() {
                acc.add(a.weight * e.dot(&a.vector).abs());
            }
            Ok(acc.value())
        }
        MassTarget::Plane(plane) => {
            if plane.dim() != s.dim() {
                return Err(Error::DimensionMismatch { expected: s.dim(), found: plane.dim() });
            }
            let k = plane.rank();
            let atoms = s
                .atoms()
                .iter()
                .map(|a| Atom { weight: a.weight, vector: plane.project(&a.vector) })
                .collect();
            let projected = DiscreteSurface::new(k, atoms)?;
            let q = q_exact(&vec![&projected; k], Exponent::Finite(1.0), opts)?.value;
            Ok(q.powi(k as i32))
        }
    }
}

/// A Monte Carlo estimate of `vis^p(S) = vol(K^p(S))^{-1/d}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VisibilityEstimate {
    pub vis: f64,
    pub ci_halfwidth: f64,
    pub volume: f64,
    pub volume_ci_halfwidth: f64,
    pub box_volume: f64,
    pub acceptance: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Estimate `vol(K^p(S))` by rejection sampling in a box that provably contains `K^p(S)`.
///
/// The box is aligned with the eigenvectors `e_k` of the covariance `T_S`.
/// Writing `e_k = Σ w_i μ_i v_i` with `μ_i = v_i·T^{-1}e_k`, Hölder's
/// inequality bounds `|y·e_k|` on `K^p` by `(Σ w_i |μ_i|^q)^{1/q}` with `q` the
/// conjugate exponent (the maximum of `|μ_i|` when `p = 1`).
pub fn visibility(s: &DiscreteSurface, p: f64, samples: u64, seed: u64) -> Result<VisibilityEstimate> {
    if !(p >= 1.0 && p.is_finite()) {
        return invalid(format!("visibility needs 1 ≤ p < ∞, got {p}"));
    }
    if !s.is_spanning() {
        return Err(Error::NonSpanning { dim: s.dim() });
    }
    if samples < 2 {
        return invalid("visibility needs at least two samples");
    }
    let d = s.dim();
    let (values, vectors) = covariance_eigen(s);
    let mut half = Vec::with_capacity(d);
    for k in 0..d {
        let lambda = values[k];
        if !(lambda > 0.0) {
            return Err(Error::NonSpanning { dim: d });
        }
        let e = vectors.column(k);
        let mu = |a: &Atom| (a.vector.dot(&e) / lambda).abs();
        let h = if p == 1.0 {
            s.atoms().iter().map(mu).fold(0.0, f64::max)
        } else {
            let q = p / (p - 1.0);
            s.atoms().iter().map(|a| a.weight * mu(a).powf(q)).sum::<f64>().powf(1.0 / q)
        };
        half.push(h);
    }
    let box_volume: f64 = half.iter().map(|h| 2.0 * h).product();
    let (frac, se) = mc_mean(samples, seed, |r| {
        let t = RealVector::from_iterator(d, half.iter().map(|&h| symmetric_uniform(r, h)));
        let y = &vectors * t;
        if gauge(&y, s, p) <= 1.0 {
            1.0
        } else {
            0.0
        }
    });
    if frac == 0.0 {
        return Err(Error::Degenerate("no sample fell inside K^p; increase the sample count".into()));
    }
    let volume = box_volume * frac;
    let volume_ci_halfwidth = 3.0 * box_volume * se;
    let df = d as f64;
    let vis = volume.powf(-1.0 / df);
    let ci_halfwidth = volume_ci_halfwidth * vis / (df * volume);
    Ok(VisibilityEstimate {
        vis,
        ci_halfwidth,
        volume,
        volume_ci_halfwidth,
        box_volume,
        acceptance: frac,
        samples,
        seed,
    })
}

/// `vol(K¹)·vol(Π)` against the reference interval `[4^d/d!², ω_d²]`; never asserted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SantaloDiagnostic {
    pub volume_k: f64,
    pub volume_projection_body: f64,
    pub product: f64,
    pub lower: f64,
    pub upper: f64,
    pub within: bool,
}

pub fn santalo_diagnostic(s: &DiscreteSurface, vis: &VisibilityEstimate, cap: u128) -> Result<SantaloDiagnostic> {
    let d = s.dim();
    let volume_projection_body = zonotope_volume(&projection_body(s), cap)?;
    let product = vis.volume * volume_projection_body;
    let lower = 4f64.powi(d as i32) / (factorial(d) * factorial(d));
    let upper = ball_volume(d).powi(2);
    Ok(SantaloDiagnostic {
        volume_k: vis.volume,
        volume_projection_body,
        product,
        lower,
        upper,
        within: product >= lower && product <= upper,
    })
}

/// Options for [`visibility_bounds`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsConfig {
    pub samples: u64,
    pub seed: u64,
    /// Number of Haar-random frames in the random search.
    pub random_frames: usize,
    pub user_frames: Vec<Frame>,
    /// Plane dimensions `k_1 + … + k_m = d` for the plane bound at the John frame.
    pub plane_dims: Option<Vec<usize>>,
    pub q_options: QOptions,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            samples: 200_000,
            seed: 0,
            random_frames: 200,
            user_frames: Vec::new(),
            plane_dims: None,
            q_options: QOptions::default(),
        }
    }
}

/// A bound expression evaluated at one frame, with its ratio to the measured quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameBound {
    pub label: String,
    pub value: f64,
    pub ratio: f64,
}

/// Diagnostic comparison of visibility with directional-mass bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisibilityBoundsReport {
    pub visibility: VisibilityEstimate,
    pub john_semiaxes: Vec<f64>,
    pub john_frame: Vec<Vec<f64>>,
    pub john_approximate: bool,
    pub lines: Vec<FrameBound>,
    pub planes: Option<FrameBound>,
    /// Fraction of random frames whose line bound is at least the John-frame value.
    pub john_not_worse_fraction: f64,
    /// `Q_d^1(S)` and its ratio to `vis`.
    pub q_d: f64,
    pub q_d_ratio: f64,
}

/// `(∏ σ(u_i, S) / |u_1 ∧ … ∧ u_d|)^{1/d}`.
pub fn line_bound(s: &DiscreteSurface, frame: &[RealVector], opts: &QOptions) -> Result<f64> {
    let d = s.dim();
    if frame.len() != d {
        return invalid(format!("need {d} directions, got {}", frame.len()));
    }
    let mut prod = 1.0;
    for u in frame {
        let unit = u / u.norm();
        prod *= directional_mass(MassTarget::Vector(&unit), s, opts)?;
    }
    let m = nalgebra::DMatrix::from_columns(frame);
    let vol = m.determinant().abs() / frame.iter().map(|u| u.norm()).product::<f64>();
    if vol == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((prod / vol).powf(1.0 / d as f64))
}

/// `(∏ σ(E_i, S) / |E_1 ∧ … ∧ E_m|)^{1/d}` for consecutive blocks of `frame` of sizes `dims`.
pub fn plane_bound(s: &DiscreteSurface, frame: &Frame, dims: &[usize], opts: &QOptions) -> Result<f64> {
    let d = s.dim();
    if dims.iter().sum::<usize>() != d || dims.contains(&0) {
        return invalid(format!("plane dimensions {dims:?} must be positive and sum to {d}"));
    }
    let mut planes = Vec::with_capacity(dims.len());
    let mut start = 0;
    for &k in dims {
        let idx: Vec<usize> = (start..start + k).collect();
        planes.push(Plane::new(frame.select(&idx)));
        start += k;
    }
    let mut prod = 1.0;
    for e in &planes {
        prod *= directional_mass(MassTarget::Plane(e), s, opts)?;
    }
    let w = planes_wedge(&planes)?;
    Ok((prod / w).powf(1.0 / d as f64))
}

/// Evaluate the line and plane bounds at the John frame of `K¹(S)`, at user
/// frames and over a random search, and report each against `vis¹(S)`.
pub fn visibility_bounds(s: &DiscreteSurface, cfg: &BoundsConfig) -> Result<VisibilityBoundsReport> {
    let d = s.dim();
    let vis = visibility(s, 1.0, cfg.samples, cfg.seed)?;
    let john = john_ellipsoid(&SymmetricBody::KBody { surface: s, p: 1.0 }, cfg.seed, &MveeOptions::default())?;
    let (semiaxes, frame) = john.ellipsoid.principal_axes();
    let opts = &cfg.q_options;
    let mut lines = Vec::new();
    let john_value = line_bound(s, frame.vectors(), opts)?;
    lines.push(FrameBound { label: "john".into(), value: john_value, ratio: john_value / vis.vis });
    for (i, f) in cfg.user_frames.iter().enumerate() {
        let v = line_bound(s, f.vectors(), opts)?;
        lines.push(FrameBound { label: format!("user-{i}"), value: v, ratio: v / vis.vis });
    }
    let mut best = f64::INFINITY;
    let mut not_worse = 0usize;
    for t in 0..cfg.random_frames {
        let f = random_frame(d, d, rng::child_seed(cfg.seed, t as u64))?;
        let v = line_bound(s, f.vectors(), opts)?;
        best = best.min(v);
        if john_value <= v * (1.0 + 1e-12) {
            not_worse += 1;
        }
    }
    if cfg.random_frames > 0 {
        lines.push(FrameBound { label: "random-min".into(), value: best, ratio: best / vis.vis });
    }
    let planes = match &cfg.plane_dims {
        Some(dims) => {
            let v = plane_bound(s, &frame, dims, opts)?;
            Some(FrameBound { label: format!("john-planes-{dims:?}"), value: v, ratio: v / vis.vis })
        }
        None => None,
    };
    let q_d = q_exact(&vec![s; d], Exponent::Finite(1.0), opts)?.value;
    Ok(VisibilityBoundsReport {
        visibility: vis,
        john_semiaxes: semiaxes,
        john_frame: frame.vectors().iter().map(|v| v.iter().copied().collect()).collect(),
        john_approximate: john.approximate,
        lines,
        planes,
        john_not_worse_fraction: if cfg.random_frames == 0 { 1.0 } else { not_worse as f64 / cfg.random_frames as f64 },
        q_d,
        q_d_ratio: q_d / vis.vis,
    })
}

/// `Σ_{τ ∈ S_d} σ(e^1_{τ(1)}, S_1) ⋯ σ(e^j_{τ(j)}, S_j) |e^1_{τ(1)} ∧ ⋯ ∧ e^d_{τ(d)}|`
/// for `j` surfaces and `d` orthonormal frames.
pub fn interpolation_sum(surfaces: &[&DiscreteSurface], frames: &[Frame], opts: &QOptions) -> Result<f64> {
    let j = surfaces.len();
    let Some(first) = surfaces.first() else {
        return invalid("need at least one surface");
    };
    let d = first.dim();
    if j > d || frames.len() != d || frames.iter().any(|f| f.len() != d || f.dim() != d) {
        return invalid("need j ≤ d surfaces and d full frames in R^d");
    }
    let mut mass = vec![vec![0.0; d]; j];
    for (m, s) in surfaces.iter().enumerate() {
        for i in 0..d {
            mass[m][i] = directional_mass(MassTarget::Vector(&frames[m].vectors()[i]), s, opts)?;
        }
    }
    let mut total = 0.0;
    for tau in permutations(d) {
        let mut w: f64 = (0..j).map(|m| mass[m][tau[m]]).product();
        if w == 0.0 {
            continue;
        }
        let cols: Vec<RealVector> = (0..d).map(|m| frames[m].vectors()[tau[m]].clone()).collect();
        w *= nalgebra::DMatrix::from_columns(&cols).determinant().abs();
        total += w;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::make_circle_surface;

    fn cube(d: usize) -> DiscreteSurface {
        DiscreteSurface::from_pairs(d, (0..d).map(|i| (1.0, (0..d).map(|r| if r == i { 1.0 } else { 0.0 }).collect()))).unwrap()
    }

    #[test]
    fn gauge_examples() {
        let s = cube(3);
        let y = RealVector::from_vec(vec![1.0, -2.0, 0.5]);
        assert_eq!(kp_norm(&y, &s, 1.0).unwrap(), 3.5);
        assert_eq!(kp_norm(&RealVector::zeros(3), &s, 2.0).unwrap(), 0.0);
        assert!((kp_norm(&y, &s, 2.0).unwrap() - y.norm()).abs() < 1e-15);
        assert!(kp_norm(&y, &s, 0.5).is_err());
    }

    #[test]
    fn directional_mass_examples() {
        let s = cube(3);
        let e1 = RealVector::from_vec(vec![1.0, 0.0, 0.0]);
        assert_eq!(directional_mass(MassTarget::Vector(&e1), &s, &QOptions::default()).unwrap(), 1.0);
        let whole = Plane::new(Frame::standard(3));
        let m = directional_mass(MassTarget::Plane(&whole), &s, &QOptions::default()).unwrap();
        let q = q_exact(&[&s, &s, &s], Exponent::Finite(1.0), &QOptions::default()).unwrap().value;
        assert!((m - q.powi(3)).abs() < 1e-12);
        assert!(directional_mass(MassTarget::Vector(&RealVector::from_vec(vec![2.0, 0.0, 0.0])), &s, &QOptions::default()).is_err());
    }

    #[test]
    fn cube_visibility() {
        let v = visibility(&cube(2), 1.0, 200_000, 3).unwrap();
        assert!((v.vis - 0.5f64.sqrt()).abs() <= v.ci_halfwidth);
        assert_eq!(v.box_volume, 4.0);
    }

    #[test]
    fn circle_visibility() {
        let s = make_circle_surface(512).unwrap();
        let v = visibility(&s, 1.0, 200_000, 5).unwrap();
        let expect = 4.0 / std::f64::consts::PI.sqrt();
        assert!((v.vis - expect).abs() <= v.ci_halfwidth, "{v:?}");
    }

    #[test]
    fn non_spanning_is_rejected() {
        let s = DiscreteSurface::from_pairs(2, [(1.0, vec![1.0, 0.0])]).unwrap();
        assert!(matches!(visibility(&s, 1.0, 100, 0), Err(Error::NonSpanning { .. })));
    }

    #[test]
    fn cube_line_bound_is_one() {
        let s = cube(3);
        let b = line_bound(&s, Frame::standard(3).vectors(), &QOptions::default()).unwrap();
        assert!((b - 1.0).abs() < 1e-15);
        let p = plane_bound(&s, &Frame::standard(3), &[2, 1], &QOptions::default()).unwrap();
        assert!(p > 0.0);
    }
}

//! Intersection counting for circles and spheres, and a Monte Carlo check of
//! the Crofton-type identity
//!
//! ```text
//! ∫_{S_d} ⋯ ∫_{S_1} |n(x_1) ∧ ⋯ ∧ n(x_d)| dσ ⋯ dσ = ∫ ⋯ ∫ #[S_1 ∩ (S_2 − v_2) ∩ ⋯ ∩ (S_d − v_d)] dv_2 ⋯ dv_d
//!                                               = ∫ ⋯ ∫ #[B ∩ (S_1 − v_1) ∩ ⋯ ∩ (S_d − v_d)] dv_1 ⋯ dv_d
//! ```
//!
//! with `B` a ball of unit volume.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exterior::RealVector;
use crate::numeric::{ball_volume, block_map, KahanSum, BLOCK};
use crate::q::Exponent;
use crate::rng;
use crate::surface::{sphere_reference, symmetric_uniform};

/// Relative width of the band in which a configuration counts as tangent.
pub const TANGENCY_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeKind {
    Circle,
    Sphere,
}

impl ShapeKind {
    pub fn dim(self) -> usize {
        match self {
            ShapeKind::Circle => 2,
            ShapeKind::Sphere => 3,
        }
    }
}

/// A round circle in `R^2` or sphere in `R^3`; wire format `{"kind", "r", "center"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticSurface {
    pub kind: ShapeKind,
    pub r: f64,
    pub center: Vec<f64>,
}

impl AnalyticSurface {
    pub fn new(kind: ShapeKind, r: f64, center: Vec<f64>) -> Result<Self> {
        let s = Self { kind, r, center };
        s.validate()?;
        Ok(s)
    }

    /// Centered at the origin.
    pub fn centered(kind: ShapeKind, r: f64) -> Result<Self> {
        Self::new(kind, r, vec![0.0; kind.dim()])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return invalid(format!("radius must be positive, got {}", self.r));
        }
        if self.center.len() != self.kind.dim() {
            return Err(Error::DimensionMismatch { expected: self.kind.dim(), found: self.center.len() });
        }
        if self.center.iter().any(|x| !x.is_finite()) {
            return invalid("center must be finite");
        }
        Ok(())
    }

    fn center_vector(&self) -> RealVector {
        RealVector::from_column_slice(&self.center)
    }
}

fn check_family(surfaces: &[AnalyticSurface]) -> Result<usize> {
    let Some(first) = surfaces.first() else {
        return invalid("no surfaces");
    };
    for s in surfaces {
        s.validate()?;
        if s.kind != first.kind {
            return invalid("all surfaces must be of the same kind");
        }
    }
    let d = first.kind.dim();
    if surfaces.len() != d {
        return invalid(format!("need exactly {d} surfaces of kind {:?}", first.kind));
    }
    Ok(d)
}

/// `∫⋯∫ |n(x_1) ∧ ⋯ ∧ n(x_d)|`: `8π r_1 r_2` for circles and
/// `Q_3^1(S^2)^3 r_1² r_2² r_3²` for spheres.
pub fn analytic_q1(surfaces: &[AnalyticSurface]) -> Result<f64> {
    let d = check_family(surfaces)?;
    let radii: f64 = surfaces.iter().map(|s| s.r.powi(d as i32 - 1)).product();
    let q = sphere_reference(d, d, Exponent::Finite(1.0))?;
    Ok(q.powi(d as i32) * radii)
}

/// Intersection points together with the number of tangential comparisons met.
#[derive(Debug, Clone, PartialEq)]
pub struct Intersection {
    pub points: Vec<RealVector>,
    pub tangencies: u32,
}

struct Guarded {
    tangencies: u32,
}

impl Guarded {
    /// Whether `a ≤ b`, counting near-equality as tangency resolved to true.
    fn le(&mut self, a: f64, b: f64, scale: f64) -> bool {
        if (a - b).abs() <= TANGENCY_GUARD * scale {
            self.tangencies += 1;
            true
        } else {
            a < b
        }
    }
}

/// Points of two coplanar circles given by centers (in an orthonormal 2-frame
/// `(e1, e2)` through `origin`) and radii.
fn circle_circle(
    g: &mut Guarded,
    a: &RealVector,
    ra: f64,
    b: &RealVector,
    rb: f64,
    normal: Option<&RealVector>,
) -> Result<Vec<RealVector>> {
    let diff = b - a;
    let dist = diff.norm();
    let scale = ra + rb + dist;
    if dist <= TANGENCY_GUARD * scale {
        if (ra - rb).abs() <= TANGENCY_GUARD * scale {
            return Err(Error::Coincident);
        }
        return Ok(Vec::new());
    }
    if !g.le(dist, ra + rb, scale) || !g.le((ra - rb).abs(), dist, scale) {
        return Ok(Vec::new());
    }
    let u = &diff / dist;
    let t = (dist * dist + ra * ra - rb * rb) / (2.0 * dist);
    let h = (ra * ra - t * t).max(0.0).sqrt();
    let perp = match normal {
        None => RealVector::from_vec(vec![-u[1], u[0]]),
        Some(n) => n.cross(&u),
    };
    let m = a + &u * t;
    Ok(vec![&m + &perp * h, &m - &perp * h])
}

/// `S_1 ∩ ⋯ ∩ S_d` for circles (d = 2) or spheres (d = 3) with the given centers.
pub fn intersection_points(centers: &[RealVector], radii: &[f64]) -> Result<Intersection> {
    let mut g = Guarded { tangencies: 0 };
    let points = match centers.len() {
        2 => circle_circle(&mut g, &centers[0], radii[0], &centers[1], radii[1], None)?,
        3 => {
            let (a, b, c) = (&centers[0], &centers[1], &centers[2]);
            let (r1, r2, r3) = (radii[0], radii[1], radii[2]);
            let diff = b - a;
            let dist = diff.norm();
            let scale = r1 + r2 + dist;
            if dist <= TANGENCY_GUARD * scale {
                if (r1 - r2).abs() <= TANGENCY_GUARD * scale {
                    return Err(Error::Coincident);
                }
                Vec::new()
            } else if !g.le(dist, r1 + r2, scale) || !g.le((r1 - r2).abs(), dist, scale) {
                Vec::new()
            } else {
                // circle of the first two spheres: center m, radius rho, in the plane normal to n
                let n = &diff / dist;
                let t = (dist * dist + r1 * r1 - r2 * r2) / (2.0 * dist);
                let rho = (r1 * r1 - t * t).max(0.0).sqrt();
                let m = a + &n * t;
                let h = (c - &m).dot(&n);
                let foot = c - &n * h;
                let s3 = r3 + h.abs();
                if !g.le(h.abs(), r3, s3) {
                    Vec::new()
                } else {
                    let s = (r3 * r3 - h * h).max(0.0).sqrt();
                    circle_circle(&mut g, &m, rho, &foot, s, Some(&n))?
                }
            }
        }
        k => return invalid(format!("intersection counting supports 2 circles or 3 spheres, got {k} shapes")),
    };
    Ok(Intersection { points, tangencies: g.tangencies })
}

/// Count of `S_1 ∩ (S_2 − v_2) ∩ ⋯ ∩ (S_d − v_d)`.
pub fn intersection_count(surfaces: &[AnalyticSurface], shifts: &[RealVector]) -> Result<Intersection> {
    let d = check_family(surfaces)?;
    if shifts.len() != d - 1 {
        return invalid(format!("need {} shift vectors, got {}", d - 1, shifts.len()));
    }
    if shifts.iter().any(|v| v.len() != d) {
        return invalid("shift vectors must match the dimension");
    }
    let mut centers = vec![surfaces[0].center_vector()];
    for (s, v) in surfaces[1..].iter().zip(shifts) {
        centers.push(s.center_vector() - v);
    }
    let radii: Vec<f64> = surfaces.iter().map(|s| s.r).collect();
    intersection_points(&centers, &radii)
}

/// The shift box for `S_i` relative to `S_1`: center `c_i − c_1`, half-side `r_1 + r_i` plus a margin.
pub fn shift_box(surfaces: &[AnalyticSurface], i: usize) -> (RealVector, f64) {
    let c = surfaces[i].center_vector() - surfaces[0].center_vector();
    let h = (surfaces[0].r + surfaces[i].r) * (1.0 + 1e-9);
    (c, h)
}

/// Both Monte Carlo forms of the right-hand side against the closed-form left-hand side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CroftonReport {
    pub lhs: f64,
    pub rhs_estimate: f64,
    /// Three-sigma half-width of `rhs_estimate`.
    pub ci: f64,
    pub pass: bool,
    /// The form with a unit-volume ball and all `d` shifts.
    pub rhs_ball: f64,
    pub ci_ball: f64,
    pub forms_agree: bool,
    pub box_volume: f64,
    pub tangencies: u64,
    pub samples: u64,
    pub seed: u64,
}

#[derive(Default, Clone, Copy)]
struct CountAccum {
    sum: KahanSum,
    sum_sq: KahanSum,
    tangencies: u64,
    coincident: bool,
}

fn run_blocks<F>(samples: u64, seed: u64, f: F) -> Result<(f64, f64, u64)>
where
    F: Fn(&mut rng::Rng) -> Result<Intersection> + Sync + Send,
{
    let blocks = block_map(samples, BLOCK, |b, start, end| {
        let mut r = rng::stream(seed, b);
        let mut acc = CountAccum::default();
        for _ in start..end {
            match f(&mut r) {
                Ok(x) => {
                    let c = x.points.len() as f64;
                    acc.sum.add(c);
                    acc.sum_sq.add(c * c);
                    acc.tangencies += x.tangencies as u64;
                }
                Err(_) => acc.coincident = true,
            }
        }
        acc
    });
    let mut total = CountAccum::default();
    for b in &blocks {
        total.sum.merge(&b.sum);
        total.sum_sq.merge(&b.sum_sq);
        total.tangencies += b.tangencies;
        total.coincident |= b.coincident;
    }
    if total.coincident {
        return Err(Error::Coincident);
    }
    let n = samples as f64;
    let mean = total.sum.value() / n;
    let var = ((total.sum_sq.value() - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok((mean, (var / n).sqrt(), total.tangencies))
}

/// Monte Carlo check of the Crofton identity for two circles or three spheres.
pub fn crofton_check(surfaces: &[AnalyticSurface], samples: u64, seed: u64) -> Result<CroftonReport> {
    let d = check_family(surfaces)?;
    if samples == 0 {
        return invalid("sample budget must be positive");
    }
    if samples < 2 {
        return invalid("need at least two samples for a confidence interval");
    }
    let lhs = analytic_q1(surfaces)?;
    let df = d as i32;
    let boxes: Vec<(RealVector, f64)> = (1..d).map(|i| shift_box(surfaces, i)).collect();
    let box_volume: f64 = boxes.iter().map(|(_, h)| (2.0 * h).powi(df)).product();
    let radii: Vec<f64> = surfaces.iter().map(|s| s.r).collect();
    let c1 = surfaces[0].center_vector();

    let draw = |r: &mut rng::Rng, (c, h): &(RealVector, f64)| -> RealVector {
        RealVector::from_fn(d, |k, _| c[k] + symmetric_uniform(r, *h))
    };

    let (mean, se, tan1) = run_blocks(samples, seed, |r| {
        let mut centers = vec![c1.clone()];
        for (i, bx) in boxes.iter().enumerate() {
            let v = draw(r, bx);
            centers.push(surfaces[i + 1].center_vector() - v);
        }
        intersection_points(&centers, &radii)
    })?;
    let rhs_estimate = box_volume * mean;
    let ci = 3.0 * box_volume * se;

    // unit-volume ball B at the origin; v_1 ranges over shifts with B ∩ (S_1 − v_1) ≠ ∅
    let rb = (1.0 / ball_volume(d)).powf(1.0 / d as f64);
    let h1 = (surfaces[0].r + rb) * (1.0 + 1e-9);
    let ball_box_volume = (2.0 * h1).powi(df) * box_volume;
    let (mean_b, se_b, tan2) = run_blocks(samples, rng::child_seed(seed, 1), |r| {
        let v1 = draw(r, &(c1.clone(), h1));
        let base = &c1 - &v1;
        let mut centers = vec![base.clone()];
        for (i, (c, h)) in boxes.iter().enumerate() {
            let vi = draw(r, &(c + &v1, *h));
            centers.push(surfaces[i + 1].center_vector() - vi);
        }
        let mut x = intersection_points(&centers, &radii)?;
        x.points.retain(|p| p.norm() <= rb);
        Ok(x)
    })?;
    let rhs_ball = ball_box_volume * mean_b;
    let ci_ball = 3.0 * ball_box_volume * se_b;

    Ok(CroftonReport {
        lhs,
        rhs_estimate,
        ci,
        pass: (lhs - rhs_estimate).abs() <= ci,
        rhs_ball,
        ci_ball,
        forms_agree: (rhs_estimate - rhs_ball).abs() <= ci.hypot(ci_ball),
        box_volume,
        tangencies: tan1 + tan2,
        samples,
        seed,
    })
}

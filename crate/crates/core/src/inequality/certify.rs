use serde::Serialize;

use crate::convex::{projection_body, zonotope_volume};
use crate::error::{invalid, Error, Result};
use crate::numeric::ball_volume;
use crate::q::{q_exact, q_profile, Exponent, Method, QOptions, QProfile};
use crate::surface::{sphere_area, sphere_reference, DiscreteSurface};

use super::cover::UniformCover;

/// Relative tolerance for certificates whose two sides are both exact.
pub const EXACT_TOLERANCE: f64 = 1e-9;

/// How each side of a certificate was computed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MethodTags {
    pub lhs: String,
    pub rhs: String,
}

/// The outcome of checking `lhs ≤ rhs`.
///
/// `tolerance` is the absolute slack applied, so `pass ⇔ lhs ≤ rhs + tolerance`.
/// For exact sides it is `EXACT_TOLERANCE·max(|lhs|, |rhs|)`; when either
/// side is a Monte Carlo estimate it is the combined three-sigma half-width.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub claim: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
    pub method: MethodTags,
    pub tolerance: f64,
    pub seed: Option<u64>,
}

impl CertificateReport {
    pub fn exact(claim: impl Into<String>, lhs: f64, rhs: f64, rel: f64, methods: (Method, Method)) -> Self {
        let tolerance = rel * lhs.abs().max(rhs.abs());
        Self {
            claim: claim.into(),
            lhs,
            rhs,
            margin: rhs - lhs,
            pass: lhs <= rhs + tolerance,
            method: MethodTags { lhs: methods.0.to_string(), rhs: methods.1.to_string() },
            tolerance,
            seed: None,
        }
    }

    /// A certificate with Monte Carlo sides; `*_ci` are three-sigma half-widths.
    pub fn statistical(
        claim: impl Into<String>,
        (lhs, lhs_ci): (f64, f64),
        (rhs, rhs_ci): (f64, f64),
        methods: (Method, Method),
        seed: Option<u64>,
    ) -> Self {
        let tolerance = lhs_ci.hypot(rhs_ci);
        Self {
            claim: claim.into(),
            lhs,
            rhs,
            margin: rhs - lhs,
            pass: lhs <= rhs + tolerance,
            method: MethodTags { lhs: methods.0.to_string(), rhs: methods.1.to_string() },
            tolerance,
            seed,
        }
    }

    /// Re-evaluate an exact certificate at relative tolerance `rel`; statistical
    /// certificates keep their three-sigma criterion.
    pub fn with_tolerance(self, rel: f64) -> Self {
        if self.is_statistical() {
            return self;
        }
        let tolerance = rel * self.lhs.abs().max(self.rhs.abs());
        Self { pass: self.lhs <= self.rhs + tolerance, tolerance, ..self }
    }

    pub fn is_statistical(&self) -> bool {
        self.method.lhs == "mc" || self.method.rhs == "mc"
    }
}

/// `Q_j^p(S_1, …, S_j) ≤ ∏_i Q_{k_i}^p(S_{A_i})^{α_i k_i / j}` for a uniform cover `(A_i, α_i)`.
pub fn certify_finner(
    surfaces: &[&DiscreteSurface],
    cover: &UniformCover,
    p: Exponent,
    opts: &QOptions,
) -> Result<CertificateReport> {
    let j = surfaces.len();
    if cover.ground_size() != j {
        return Err(Error::InvalidCover(format!("cover is on {} indices but {j} surfaces were given", cover.ground_size())));
    }
    let lhs = q_exact(surfaces, p, opts)?.value;
    let mut rhs = 1.0;
    for (set, &alpha) in cover.sets().iter().zip(cover.alphas()) {
        let sub: Vec<&DiscreteSurface> = set.iter().map(|&l| surfaces[l]).collect();
        let k = sub.len() as f64;
        rhs *= q_exact(&sub, p, opts)?.value.powf(alpha * k / j as f64);
    }
    Ok(CertificateReport::exact("finner", lhs, rhs, EXACT_TOLERANCE, (Method::Exact, Method::Exact)))
}

fn check_sphere_exponent(p: Exponent) -> Result<()> {
    match p {
        Exponent::Infinite => Ok(()),
        Exponent::Finite(x) if x == 1.0 || x == 2.0 => Ok(()),
        _ => invalid(format!("sphere comparison is only asserted for p ∈ {{1, 2, ∞}}, got {p}")),
    }
}

fn ratio_step(prof: &QProfile, j: usize) -> Result<CertificateReport> {
    let d = prof.dim;
    let lower = &prof.q[j - 1];
    let upper = &prof.q[j];
    let factor = sphere_reference(d, j + 1, prof.p)? / sphere_reference(d, j, prof.p)?;
    Ok(CertificateReport::exact(
        format!("sphere-ratio[j={j}]"),
        upper.value,
        factor * lower.value,
        EXACT_TOLERANCE,
        (upper.method, lower.method),
    ))
}

/// `Q_{j+1}^p(S) ≤ (Q_{j+1}^p(S^{d−1}) / Q_j^p(S^{d−1}))·Q_j^p(S)` for `p ∈ {1, 2, ∞}`.
pub fn certify_sphere_ratio(s: &DiscreteSurface, p: Exponent, j: usize, opts: &QOptions) -> Result<CertificateReport> {
    check_sphere_exponent(p)?;
    let d = s.dim();
    if j == 0 || j >= d {
        return invalid(format!("need 1 ≤ j ≤ d − 1, got j = {j}, d = {d}"));
    }
    ratio_step(&q_profile(s, p, opts)?, j)
}

/// Every step of the sphere comparison, plus the isoperimetric endpoint when `p = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereRatioChain {
    pub p: Exponent,
    pub steps: Vec<CertificateReport>,
    pub isoperimetric: Option<CertificateReport>,
    pub pass: bool,
}

pub fn sphere_ratio_chain(s: &DiscreteSurface, p: Exponent, opts: &QOptions) -> Result<SphereRatioChain> {
    check_sphere_exponent(p)?;
    let prof = q_profile(s, p, opts)?;
    let d = s.dim();
    let steps = (1..d).map(|j| ratio_step(&prof, j)).collect::<Result<Vec<_>>>()?;
    let isoperimetric = match &prof.b_proxy {
        Some(b) => Some(isoperimetric_report(d, b[d], prof.q[0].value)),
        None => None,
    };
    let pass = steps.iter().all(|c| c.pass) && isoperimetric.as_ref().is_none_or(|c| c.pass);
    Ok(SphereRatioChain { p, steps, isoperimetric, pass })
}

fn isoperimetric_report(d: usize, volume: f64, mass: f64) -> CertificateReport {
    let df = d as f64;
    let lhs = if mass > 0.0 { volume.powf(1.0 / df) / mass } else { 0.0 };
    let rhs = 2.0 * ball_volume(d - 1) * ball_volume(d).powf(1.0 / df) / sphere_area(d);
    CertificateReport::exact("isoperimetric", lhs, rhs, EXACT_TOLERANCE, (Method::Exact, Method::Exact))
}

/// `vol(Π S)^{1/d} / σ(S) ≤ vol(Π S^{d−1})^{1/d} / σ(S^{d−1})`, with `σ(S) = Q_1^1(S)`.
pub fn certify_isoperimetric(s: &DiscreteSurface, opts: &QOptions) -> Result<CertificateReport> {
    let volume = zonotope_volume(&projection_body(s), opts.subset_cap)?;
    let mass = q_exact(&[s], Exponent::Finite(1.0), opts)?.value;
    Ok(isoperimetric_report(s.dim(), volume, mass))
}

/// `Q_{j+1}^p(S) ≤ Q_j^p(S)` for `j = 1..d−1`.
pub fn certify_diagonal_monotone(s: &DiscreteSurface, p: Exponent, opts: &QOptions) -> Result<Vec<CertificateReport>> {
    let prof = q_profile(s, p, opts)?;
    Ok((1..s.dim())
        .map(|j| {
            let (lo, hi) = (&prof.q[j - 1], &prof.q[j]);
            CertificateReport::exact(
                format!("diagonal-monotone[j={j}]"),
                hi.value,
                lo.value,
                EXACT_TOLERANCE,
                (hi.method, lo.method),
            )
        })
        .collect())
}

/// The normalized profile `a_0 = 1, a_1, …, a_d` and the inequalities it satisfies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogConcavityReport {
    pub p: Exponent,
    pub a: Vec<f64>,
    /// `a_j^{1/j}` for `j = 1..d`.
    pub roots: Vec<f64>,
    /// First `j` with `a_j = 0`; every later inequality holds trivially.
    pub truncated_at: Option<usize>,
    /// `a_2 ≤ a_1²`, present when `d ≥ 2`.
    pub base: Option<CertificateReport>,
    /// `a_{j−1} a_{j+1} ≤ a_j²` for `j = 1..d−1`.
    pub steps: Vec<CertificateReport>,
    /// `a_{j+1}^{1/(j+1)} ≤ a_j^{1/j}` for `j = 1..d−1`.
    pub chain: Vec<CertificateReport>,
    pub pass: bool,
}

pub fn certify_logconcavity(s: &DiscreteSurface, p: Exponent, opts: &QOptions) -> Result<LogConcavityReport> {
    match p {
        Exponent::Finite(x) if x == 1.0 || x == 2.0 => {}
        _ => return invalid(format!("log-concavity is only asserted for p ∈ {{1, 2}}, got {p}")),
    }
    let prof = q_profile(s, p, opts)?;
    let a = prof.a.clone().expect("profile has a_j for p ∈ {1, 2}");
    let d = s.dim();
    let m = |j: usize| if j == 0 { Method::Exact } else { prof.q[j - 1].method };
    let roots: Vec<f64> = (1..=d).map(|j| a[j].powf(1.0 / j as f64)).collect();
    let truncated_at = (1..=d).find(|&j| a[j] == 0.0);
    let base = (d >= 2).then(|| CertificateReport::exact("base", a[2], a[1] * a[1], EXACT_TOLERANCE, (m(2), m(1))));
    let steps: Vec<_> = (1..d)
        .map(|j| {
            CertificateReport::exact(
                format!("log-concave[j={j}]"),
                a[j - 1] * a[j + 1],
                a[j] * a[j],
                EXACT_TOLERANCE,
                (m(j + 1), m(j)),
            )
        })
        .collect();
    let chain: Vec<_> = (1..d)
        .map(|j| {
            CertificateReport::exact(
                format!("root-monotone[j={j}]"),
                roots[j],
                roots[j - 1],
                EXACT_TOLERANCE,
                (m(j + 1), m(j)),
            )
        })
        .collect();
    let pass = base.as_ref().is_none_or(|c| c.pass) && steps.iter().all(|c| c.pass) && chain.iter().all(|c| c.pass);
    Ok(LogConcavityReport { p, a, roots, truncated_at, base, steps, chain, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::make_sphere_surface;

    fn cube(d: usize, i: usize) -> DiscreteSurface {
        DiscreteSurface::from_pairs(d, [(1.0, (0..d).map(|r| if r == i { 1.0 } else { 0.0 }).collect())]).unwrap()
    }

    #[test]
    fn cube_finner_margin_is_zero() {
        let cubes: Vec<_> = (0..3).map(|i| cube(3, i)).collect();
        let refs: Vec<_> = cubes.iter().collect();
        for cover in [UniformCover::leave_one_out(3).unwrap(), UniformCover::singletons(3).unwrap()] {
            let r = certify_finner(&refs, &cover, Exponent::Finite(1.0), &QOptions::default()).unwrap();
            assert_eq!((r.lhs, r.rhs, r.margin), (1.0, 1.0, 0.0));
            assert!(r.pass);
        }
    }

    #[test]
    fn diagonal_finner_is_strict() {
        let s = make_sphere_surface(3, 6, 11).unwrap();
        let r = certify_finner(&[&s, &s, &s], &UniformCover::leave_one_out(3).unwrap(), Exponent::Finite(1.0), &QOptions::default())
            .unwrap();
        assert!(r.pass && r.margin > 0.0);
    }

    #[test]
    fn report_json_shape() {
        let r = CertificateReport::exact("finner", 1.0, 2.0, EXACT_TOLERANCE, (Method::Exact, Method::Spectral));
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 8);
        assert_eq!(v["method"]["rhs"], "spectral");
        assert_eq!(v["seed"], serde_json::Value::Null);
    }

    #[test]
    fn single_atom_ratio() {
        let s = DiscreteSurface::from_pairs(3, [(2.0, vec![1.0, 1.0, 0.0])]).unwrap();
        let r = certify_sphere_ratio(&s, Exponent::Finite(1.0), 1, &QOptions::default()).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.pass);
        assert!(certify_sphere_ratio(&s, Exponent::Finite(3.0), 1, &QOptions::default()).is_err());
        assert!(certify_sphere_ratio(&s, Exponent::Finite(1.0), 3, &QOptions::default()).is_err());
        let lc = certify_logconcavity(&s, Exponent::Finite(2.0), &QOptions::default()).unwrap();
        assert_eq!(lc.truncated_at, Some(2));
        assert!(lc.pass);
    }

    #[test]
    fn sphere_isoperimetric_is_near_equality() {
        let s = make_sphere_surface(3, 300, 2).unwrap();
        let r = certify_isoperimetric(&s, &QOptions::default()).unwrap();
        assert!(r.pass);
        assert!((r.lhs / r.rhs - 1.0).abs() < 0.05);
    }
}

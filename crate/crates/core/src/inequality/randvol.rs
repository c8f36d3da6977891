use rand::Rng as _;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{invalid, Result};
use crate::exterior::{GramWorkspace, RealVector};
use crate::numeric::{ln_ball_volume, ln_factorial};
use crate::q::{mc_mean, q_exact, Exponent, Method, QEstimate, QOptions};
use crate::rng::{self, Rng};
use crate::surface::{ln_sphere_moment, random_unit_vector, sphere_area, DiscreteSurface, VectorSampler};

use super::certify::CertificateReport;

/// Built-in probability laws on `R^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawKind {
    UniformSphere,
    UniformBall,
    Gaussian,
    /// Independent standard Laplace coordinates (density `½e^{−|x|}` each).
    ExponentialProduct,
}

impl std::str::FromStr for LawKind {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sphere" | "uniform-sphere" => Ok(LawKind::UniformSphere),
            "ball" | "uniform-ball" => Ok(LawKind::UniformBall),
            "gaussian" => Ok(LawKind::Gaussian),
            "exponential" | "exponential-product" => Ok(LawKind::ExponentialProduct),
            other => invalid(format!("unknown distribution {other:?}")),
        }
    }
}

/// A built-in law, scaled by `scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Law {
    pub kind: LawKind,
    pub dim: usize,
    pub scale: f64,
}

impl Law {
    pub fn new(kind: LawKind, dim: usize) -> Result<Self> {
        if dim == 0 {
            return invalid("dimension must be at least 1");
        }
        Ok(Self { kind, dim, scale: 1.0 })
    }

    /// The law rescaled so that `E|ξ|^p = 1`.
    pub fn normalized(kind: LawKind, dim: usize, p: f64) -> Result<Self> {
        let base = Self::new(kind, dim)?;
        let m = base.moment(p)?;
        Ok(Self { scale: m.powf(-1.0 / p), ..base })
    }

    /// `E|ξ|^p` in closed form.
    pub fn moment(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p.is_finite()) {
            return invalid("moments need 0 < p < ∞");
        }
        let d = self.dim as f64;
        let base = match self.kind {
            LawKind::UniformSphere => 1.0,
            LawKind::UniformBall => d / (d + p),
            LawKind::Gaussian => (0.5 * p * 2f64.ln() + ln_gamma((d + p) / 2.0) - ln_gamma(d / 2.0)).exp(),
            LawKind::ExponentialProduct if p == 2.0 => 2.0 * d,
            LawKind::ExponentialProduct => {
                return invalid("the exponential product law has a closed-form moment only for p = 2")
            }
        };
        Ok(base * self.scale.powf(p))
    }

    /// Log-concave laws (all built-ins except the sphere).
    pub fn is_log_concave(&self) -> bool {
        self.kind != LawKind::UniformSphere
    }
}

impl VectorSampler for Law {
    fn dim(&self) -> usize {
        self.dim
    }
    fn total_mass(&self) -> f64 {
        1.0
    }
    fn sample(&self, rng: &mut Rng) -> RealVector {
        let d = self.dim;
        let x = match self.kind {
            LawKind::UniformSphere => random_unit_vector(d, rng),
            LawKind::UniformBall => {
                let r = rng.random::<f64>().powf(1.0 / d as f64);
                random_unit_vector(d, rng) * r
            }
            LawKind::Gaussian => RealVector::from_fn(d, |_, _| StandardNormal.sample(rng)),
            LawKind::ExponentialProduct => RealVector::from_fn(d, |_, _| {
                let e: f64 = Exp1.sample(rng);
                if rng.random::<bool>() {
                    e
                } else {
                    -e
                }
            }),
        };
        x * self.scale
    }
}

/// Monte Carlo estimate of `E(V_j^p)`, the expected `p`-th power of the
/// volume of the parallelotope spanned by `j` independent draws.
pub fn randvol_expectation(law: &dyn VectorSampler, j: usize, p: f64, samples: u64, seed: u64) -> Result<QEstimate> {
    if samples == 0 {
        return invalid("zero samples");
    }
    if samples < 2 {
        return invalid("need at least two samples for a confidence interval");
    }
    if (law.total_mass() - 1.0).abs() > 1e-12 {
        return invalid("the distribution must have total mass 1");
    }
    if j == 0 || j > law.dim() {
        return invalid(format!("need 1 ≤ j ≤ d, got j = {j}, d = {}", law.dim()));
    }
    if !(p > 0.0 && p.is_finite()) {
        return invalid("need 0 < p < ∞");
    }
    let (mean, se) = mc_mean(samples, seed, |r| {
        let vs: Vec<RealVector> = (0..j).map(|_| law.sample(r)).collect();
        let refs: Vec<&[f64]> = vs.iter().map(|v| v.as_slice()).collect();
        let g = GramWorkspace::new().gram_det(&refs);
        if p == 2.0 {
            g
        } else {
            g.powf(0.5 * p)
        }
    });
    Ok(QEstimate { value: mean, method: Method::Mc, ci_halfwidth: 3.0 * se, samples, seed: Some(seed) })
}

/// `E(V_j^p) = Q_j^p(S)^{jp}` for a discrete surface rescaled to total mass 1, by enumeration.
pub fn randvol_exact(s: &DiscreteSurface, j: usize, p: f64, opts: &QOptions) -> Result<QEstimate> {
    let probability = s.normalized()?;
    let q = q_exact(&vec![&probability; j], Exponent::new(p)?, opts)?;
    Ok(QEstimate { value: q.value.powf(j as f64 * p), ..q })
}

/// `E^σ(W_j^p) = Q_j^p(S^{d−1})^{jp} / (dω_d)^j` for the uniform probability on the sphere, `p ∈ {1, 2}`.
pub fn sphere_expectation(d: usize, j: usize, p: f64) -> Result<f64> {
    let code = match p {
        x if x == 1.0 => 1,
        x if x == 2.0 => 2,
        _ => return invalid(format!("no closed form for p = {p}")),
    };
    Ok((ln_sphere_moment(d, j, code)? - j as f64 * sphere_area(d).ln()).exp())
}

/// `E^μ(V_j^p) ≤ E^σ(W_j^p)` for a law with `E|ξ|^p = 1`, `p ∈ {1, 2}`.
pub fn corollary_check(law: &Law, j: usize, p: f64, samples: u64, seed: u64) -> Result<CertificateReport> {
    let m = law.moment(p)?;
    if (m - 1.0).abs() > 1e-12 {
        return invalid(format!("the law must satisfy E|ξ|^p = 1, got {m}"));
    }
    let rhs = sphere_expectation(law.dim, j, p)?;
    let lhs = randvol_expectation(law, j, p, samples, seed)?;
    Ok(CertificateReport::statistical(
        format!("randvol-corollary[j={j},p={p}]"),
        (lhs.value, lhs.ci_halfwidth),
        (rhs, 0.0),
        (Method::Mc, Method::Exact),
        Some(seed),
    ))
}

/// One row of the comparison `E^σ(W_d^1)^{1/d} ≤ (d!/d^d)^{1/(2d)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VitaleRow {
    pub d: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    /// `|(d!/d^d)^{1/(2d)} − e^{−1/2}|`.
    pub gap_half: f64,
    /// `|(d!/d^d)^{1/d} − e^{−1}|`.
    pub gap_one: f64,
}

pub fn vitale_table(d_max: usize) -> Result<Vec<VitaleRow>> {
    if d_max == 0 || d_max > 200 {
        return invalid(format!("need 1 ≤ dMax ≤ 200, got {d_max}"));
    }
    Ok((1..=d_max)
        .map(|d| {
            let df = d as f64;
            let ln_ratio = ln_factorial(d) - df * df.ln();
            let lhs =
                ((df * ln_ball_volume(d - 1) + ln_factorial(d) - (df - 1.0) * ln_ball_volume(d) - df * df.ln()) / df).exp();
            let rhs = (ln_ratio / (2.0 * df)).exp();
            VitaleRow {
                d,
                lhs,
                rhs,
                pass: lhs <= rhs * (1.0 + 1e-12),
                gap_half: (rhs - (-0.5f64).exp()).abs(),
                gap_one: ((ln_ratio / df).exp() - (-1f64).exp()).abs(),
            }
        })
        .collect())
}

/// Measured ratios around the weak sphere comparison for log-concave laws.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReverseHolderReport {
    pub law: Law,
    pub j: usize,
    pub p: f64,
    /// `[E^μ(V_{j+1}^p)/E^σ(W_{j+1}^p)]^{1/p(j+1)} / [E^μ(V_j^p)/E^σ(W_j^p)]^{1/pj}`.
    pub r: f64,
    pub r_ci_halfwidth: f64,
    /// `E^σ(W_j^1)^{1/j} / E^σ(W_j^p)^{1/pj}`.
    pub b: f64,
    pub b_ci_halfwidth: f64,
    /// `B ≤ 1` (within the half-width when the sphere side is estimated).
    pub b_le_one: bool,
    /// `R / (p² sqrt((d+1)/(d+p)))`, the constant the weak comparison would need.
    pub implied_constant: f64,
    /// `R ≤ 1` within the half-width; only reported for `p ∈ {1, 2}`.
    pub sphere_comparison: Option<bool>,
    pub samples: u64,
    pub seed: u64,
}

/// `E^σ(W_j^p)` with its half-width, exact for `p ∈ {1, 2}`.
fn sphere_side(d: usize, j: usize, p: f64, samples: u64, seed: u64) -> Result<(f64, f64)> {
    match sphere_expectation(d, j, p) {
        Ok(v) => Ok((v, 0.0)),
        Err(_) => {
            let e = randvol_expectation(&Law::new(LawKind::UniformSphere, d)?, j, p, samples, seed)?;
            Ok((e.value, e.ci_halfwidth))
        }
    }
}

pub fn reverse_holder_report(law: &Law, j: usize, p: f64, samples: u64, seed: u64) -> Result<ReverseHolderReport> {
    if !law.is_log_concave() {
        return invalid("reverse Hölder diagnostics need a built-in log-concave law");
    }
    if !(p >= 1.0 && p.is_finite()) {
        return invalid("need 1 ≤ p < ∞");
    }
    let d = law.dim;
    if j == 0 || j >= d {
        return invalid(format!("need 1 ≤ j ≤ d − 1, got j = {j}, d = {d}"));
    }
    let seeds: Vec<u64> = (0..5).map(|i| rng::child_seed(seed, i)).collect();
    let mu_j = randvol_expectation(law, j, p, samples, seeds[0])?;
    let mu_k = randvol_expectation(law, j + 1, p, samples, seeds[1])?;
    let (sg_j, sg_j_ci) = sphere_side(d, j, p, samples, seeds[2])?;
    let (sg_k, sg_k_ci) = sphere_side(d, j + 1, p, samples, seeds[3])?;
    let (ej, ek) = (p * j as f64, p * (j + 1) as f64);
    let r = (mu_k.value / sg_k).powf(1.0 / ek) / (mu_j.value / sg_j).powf(1.0 / ej);
    let rel = |ci: f64, v: f64, e: f64| if v > 0.0 { ci / (e * v) } else { 0.0 };
    let r_rel = [
        rel(mu_k.ci_halfwidth, mu_k.value, ek),
        rel(sg_k_ci, sg_k, ek),
        rel(mu_j.ci_halfwidth, mu_j.value, ej),
        rel(sg_j_ci, sg_j, ej),
    ]
    .iter()
    .map(|x| x * x)
    .sum::<f64>()
    .sqrt();
    let (b, b_ci) = if p == 1.0 {
        (1.0, 0.0)
    } else {
        let w1 = sphere_expectation(d, j, 1.0)?.powf(1.0 / j as f64);
        let b = w1 / sg_j.powf(1.0 / ej);
        (b, b * rel(sg_j_ci, sg_j, ej))
    };
    let df = d as f64;
    let implied_constant = r / (p * p * ((df + 1.0) / (df + p)).sqrt());
    let r_ci = r * r_rel;
    Ok(ReverseHolderReport {
        law: *law,
        j,
        p,
        r,
        r_ci_halfwidth: r_ci,
        b,
        b_ci_halfwidth: b_ci,
        b_le_one: b <= 1.0 + b_ci + 1e-12,
        implied_constant,
        sphere_comparison: (p == 1.0 || p == 2.0).then_some(r <= 1.0 + r_ci),
        samples,
        seed,
    })
}

use std::fs;
use std::path::Path;

use qgeo::convex::{visibility, visibility_bounds, BoundsConfig};
use qgeo::crofton::{crofton_check, AnalyticSurface, ShapeKind};
use qgeo::inequality::{
    certify_diagonal_monotone, certify_finner, certify_isoperimetric, certify_logconcavity, certify_sphere_ratio,
    corollary_check, randvol_exact, randvol_expectation, reverse_holder_report, sphere_expectation,
    sphere_ratio_chain, validate_cover, vitale_table, CertificateReport, CoverFile, Law, LawKind, UniformCover,
};
use qgeo::numeric::{binomial, saturating_product};
use qgeo::q::q_mc_surfaces;
use qgeo::surface::{validate_surface, SphereConstants};
use qgeo::{q1_zonotope, q2_spectral, q_exact, q_profile, DiscreteSurface, Exponent, QOptions, SurfaceFile};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Command, EnumerationArgs, MethodArg, RandvolMode, Theorem};
use crate::CliError;

/// What a command produced: the result body and, for certificates, the verdict.
pub struct Outcome {
    pub result: Value,
    pub pass: Option<bool>,
}

impl Outcome {
    fn info(result: impl Serialize) -> Result<Self, CliError> {
        Ok(Self { result: to_value(result)?, pass: None })
    }

    fn verdict(result: impl Serialize, pass: bool) -> Result<Self, CliError> {
        Ok(Self { result: to_value(result)?, pass: Some(pass) })
    }
}

fn to_value(x: impl Serialize) -> Result<Value, CliError> {
    serde_json::to_value(x).map_err(|e| CliError::Config(format!("cannot serialize report: {e}")))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input { path: path.into(), message: e.to_string() })?;
    serde_json::from_str(&text).map_err(|e| CliError::Input {
        path: path.into(),
        message: format!("line {}, column {}: {e}", e.line(), e.column()),
    })
}

fn read_surface(path: &Path) -> Result<DiscreteSurface, CliError> {
    let raw: SurfaceFile = read_json(path)?;
    validate_surface(&raw).map_err(|e| CliError::Input { path: path.into(), message: e.to_string() })
}

fn read_surfaces(paths: &[impl AsRef<Path>]) -> Result<Vec<DiscreteSurface>, CliError> {
    paths.iter().map(|p| read_surface(p.as_ref())).collect()
}

fn read_cover(path: &Path) -> Result<UniformCover, CliError> {
    let raw: CoverFile = read_json(path)?;
    validate_cover(&raw).map_err(|e| CliError::Input { path: path.into(), message: e.to_string() })
}

fn exponent(p: &str) -> Result<Exponent, CliError> {
    p.parse().map_err(|e: qgeo::Error| CliError::Config(format!("--p: {e}")))
}

fn finite_exponent(p: &str) -> Result<f64, CliError> {
    match exponent(p)? {
        Exponent::Finite(x) => Ok(x),
        _ => Err(CliError::Config(format!("--p must be finite and positive here, got {p}"))),
    }
}

fn require_seed(seed: Option<u64>) -> Result<u64, CliError> {
    seed.ok_or_else(|| CliError::Config("--seed is required for Monte Carlo methods".into()))
}

fn q_options(e: &EnumerationArgs) -> QOptions {
    QOptions { cap: e.cap, subset_cap: e.subset_cap, ..QOptions::default() }
}

/// Expand one input plus `--j` into a diagonal tuple, or take the inputs as the tuple.
fn tuple(surfaces: &[DiscreteSurface], j: Option<usize>) -> Result<Vec<&DiscreteSurface>, CliError> {
    match (surfaces.len(), j) {
        (1, Some(j)) => Ok(vec![&surfaces[0]; j]),
        (1, None) => Ok(vec![&surfaces[0]]),
        (n, Some(j)) if j != n => Err(CliError::Config(format!("--j {j} does not match the {n} input surfaces"))),
        _ => Ok(surfaces.iter().collect()),
    }
}

pub fn execute(cmd: &Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::ComputeQ { input, j, p, method, samples, seed, enumeration } => {
            let surfaces = read_surfaces(input)?;
            let t = tuple(&surfaces, *j)?;
            compute_q(&t, exponent(p)?, *method, *samples, *seed, &q_options(enumeration))
        }
        Command::Profile { input, p, enumeration } => {
            let s = read_surface(input)?;
            Outcome::info(q_profile(&s, exponent(p)?, &q_options(enumeration))?)
        }
        Command::Certify { theorem, input, cover, j, p, tol, enumeration } => {
            if !(*tol > 0.0) {
                return Err(CliError::Config(format!("--tol must be positive, got {tol}")));
            }
            let surfaces = read_surfaces(input)?;
            certify(*theorem, &surfaces, cover.as_deref(), *j, exponent(p)?, *tol, &q_options(enumeration))
        }
        Command::SphereConstants { dim } => {
            let table = SphereConstants::new(*dim)?;
            Outcome::info(table)
        }
        Command::Visibility { input, p, samples, seed, random_frames, plane_dims, enumeration } => {
            let s = read_surface(input)?;
            let seed = require_seed(*seed)?;
            let p = finite_exponent(p)?;
            if p == 1.0 {
                let cfg = BoundsConfig {
                    samples: *samples,
                    seed,
                    random_frames: *random_frames,
                    user_frames: Vec::new(),
                    plane_dims: plane_dims.clone(),
                    q_options: q_options(enumeration),
                };
                Outcome::info(visibility_bounds(&s, &cfg)?)
            } else {
                Outcome::info(json!({ "visibility": visibility(&s, p, *samples, seed)? }))
            }
        }
        Command::Crofton { radii, input, samples, seed } => {
            let seed = require_seed(*seed)?;
            let shapes: Vec<AnalyticSurface> = match (radii, input) {
                (Some(r), None) => {
                    let kind = if r.len() == 2 { ShapeKind::Circle } else { ShapeKind::Sphere };
                    r.iter().map(|&x| AnalyticSurface::centered(kind, x)).collect::<Result<_, _>>()?
                }
                (None, Some(path)) => {
                    let shapes: Vec<AnalyticSurface> = read_json(path)?;
                    for s in &shapes {
                        s.validate().map_err(|e| CliError::Input { path: path.clone(), message: e.to_string() })?;
                    }
                    shapes
                }
                _ => return Err(CliError::Config("give either --radii or --input".into())),
            };
            let report = crofton_check(&shapes, *samples, seed)?;
            let pass = report.pass && report.forms_agree;
            Outcome::verdict(json!({ "shapes": shapes, "report": report }), pass)
        }
        Command::Randvol { mode, law, input, dim, j, p, normalize, samples, seed, dmax } => {
            randvol(*mode, law, input.as_deref(), *dim, *j, p, *normalize, *samples, *seed, *dmax)
        }
    }
}

fn compute_q(
    t: &[&DiscreteSurface],
    p: Exponent,
    method: MethodArg,
    samples: Option<u64>,
    seed: Option<u64>,
    opts: &QOptions,
) -> Result<Outcome, CliError> {
    let j = t.len();
    let diagonal = t.iter().all(|s| *s == t[0]);
    let mc = |samples: Option<u64>| -> Result<_, CliError> {
        let samples = samples.ok_or_else(|| CliError::Config("--samples is required for Monte Carlo".into()))?;
        let x = match p {
            Exponent::Finite(x) => x,
            _ => return Err(CliError::Config("Monte Carlo needs 0 < p < ∞".into())),
        };
        Ok((q_mc_surfaces(t, x, samples, require_seed(seed)?)?, "mc"))
    };
    let ordered = saturating_product(t.iter().map(|s| s.len()));
    let (estimate, route) = match method {
        MethodArg::Exact => (q_exact(t, p, opts)?, "enumeration"),
        MethodArg::Spectral => {
            if !(diagonal && p == Exponent::Finite(2.0)) {
                return Err(CliError::Config("the spectral route needs p = 2 and a diagonal tuple".into()));
            }
            (q2_spectral(t[0], j)?, "spectral")
        }
        MethodArg::Mc => mc(samples)?,
        MethodArg::Auto => {
            if diagonal && p == Exponent::Finite(2.0) && j <= t[0].dim() {
                (q2_spectral(t[0], j)?, "spectral")
            } else if ordered <= opts.cap {
                (q_exact(t, p, opts)?, "enumeration")
            } else if diagonal && p == Exponent::Finite(1.0) && binomial(t[0].len(), j) <= opts.subset_cap {
                (q1_zonotope(t[0], j, opts.subset_cap)?, "zonotope")
            } else if samples.is_some() {
                mc(samples)?
            } else {
                return Err(CliError::Config(format!(
                    "{ordered} tuples exceed the enumeration cap {}; pass --samples and --seed to allow Monte Carlo",
                    opts.cap
                )));
            }
        }
    };
    Outcome::info(json!({ "j": j, "p": p, "route": route, "estimate": estimate }))
}

fn retolerance(reports: Vec<CertificateReport>, tol: f64) -> Vec<CertificateReport> {
    reports.into_iter().map(|r| r.with_tolerance(tol)).collect()
}

fn all_pass(reports: &[CertificateReport]) -> bool {
    reports.iter().all(|r| r.pass)
}

fn certify(
    theorem: Theorem,
    surfaces: &[DiscreteSurface],
    cover: Option<&Path>,
    j: Option<usize>,
    p: Exponent,
    tol: f64,
    opts: &QOptions,
) -> Result<Outcome, CliError> {
    let single = || -> Result<&DiscreteSurface, CliError> {
        match surfaces {
            [s] => Ok(s),
            _ => Err(CliError::Config("this certificate takes exactly one --input surface".into())),
        }
    };
    match theorem {
        Theorem::Finner => {
            let t = tuple(surfaces, j)?;
            let cover = match cover {
                Some(path) => read_cover(path)?,
                None if t.len() >= 2 => UniformCover::leave_one_out(t.len())?,
                None => UniformCover::singletons(t.len())?,
            };
            let report = certify_finner(&t, &cover, p, opts)?.with_tolerance(tol);
            let pass = report.pass;
            Outcome::verdict(json!({ "cover": cover.to_file(), "certificate": report }), pass)
        }
        Theorem::SphereRatio => {
            let s = single()?;
            match j {
                Some(j) => {
                    let report = certify_sphere_ratio(s, p, j, opts)?.with_tolerance(tol);
                    let pass = report.pass;
                    Outcome::verdict(report, pass)
                }
                None => {
                    let mut chain = sphere_ratio_chain(s, p, opts)?;
                    chain.steps = retolerance(chain.steps, tol);
                    chain.isoperimetric = chain.isoperimetric.map(|r| r.with_tolerance(tol));
                    chain.pass = all_pass(&chain.steps) && chain.isoperimetric.as_ref().is_none_or(|r| r.pass);
                    let pass = chain.pass;
                    Outcome::verdict(chain, pass)
                }
            }
        }
        Theorem::LogConcavity => {
            let mut r = certify_logconcavity(single()?, p, opts)?;
            r.base = r.base.map(|b| b.with_tolerance(tol));
            r.steps = retolerance(r.steps, tol);
            r.chain = retolerance(r.chain, tol);
            r.pass = r.base.as_ref().is_none_or(|b| b.pass) && all_pass(&r.steps) && all_pass(&r.chain);
            let pass = r.pass;
            Outcome::verdict(r, pass)
        }
        Theorem::DiagonalMonotone => {
            let reports = retolerance(certify_diagonal_monotone(single()?, p, opts)?, tol);
            let pass = all_pass(&reports);
            Outcome::verdict(reports, pass)
        }
        Theorem::Isoperimetric => {
            let report = certify_isoperimetric(single()?, opts)?.with_tolerance(tol);
            let pass = report.pass;
            Outcome::verdict(report, pass)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn randvol(
    mode: RandvolMode,
    law: &str,
    input: Option<&Path>,
    dim: Option<usize>,
    j: Option<usize>,
    p: &str,
    normalize: bool,
    samples: u64,
    seed: Option<u64>,
    dmax: usize,
) -> Result<Outcome, CliError> {
    if mode == RandvolMode::Vitale {
        let rows = vitale_table(dmax)?;
        let pass = rows.iter().all(|r| r.pass);
        return Outcome::verdict(rows, pass);
    }
    let p = finite_exponent(p)?;
    let j = j.ok_or_else(|| CliError::Config("--j is required".into()))?;
    if let (RandvolMode::Expectation, Some(path)) = (mode, input) {
        let s = read_surface(path)?;
        let est = randvol_exact(&s, j, p, &QOptions::default())?;
        return Outcome::info(json!({ "j": j, "p": p, "estimate": est }));
    }
    let dim = dim.ok_or_else(|| CliError::Config("--dim is required".into()))?;
    let kind: LawKind = law.parse().map_err(|e: qgeo::Error| CliError::Config(format!("--law: {e}")))?;
    let seed = require_seed(seed)?;
    let law = if normalize || mode == RandvolMode::Corollary { Law::normalized(kind, dim, p)? } else { Law::new(kind, dim)? };
    match mode {
        RandvolMode::Expectation => {
            let est = randvol_expectation(&law, j, p, samples, seed)?;
            let sphere = sphere_expectation(dim, j, p).ok();
            Outcome::info(json!({ "law": law, "j": j, "p": p, "estimate": est, "sphere": sphere }))
        }
        RandvolMode::Corollary => {
            let report = corollary_check(&law, j, p, samples, seed)?;
            let pass = report.pass;
            Outcome::verdict(json!({ "law": law, "certificate": report }), pass)
        }
        RandvolMode::ReverseHolder => {
            let report = reverse_holder_report(&law, j, p, samples, seed)?;
            let pass = report.b_le_one;
            Outcome::verdict(report, pass)
        }
        RandvolMode::Vitale => unreachable!("handled above"),
    }
}

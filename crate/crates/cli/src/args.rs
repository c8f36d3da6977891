use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Transversality quantities, mixed volumes and inequality certificates.
#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "qgeo", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Cap on worker threads; results do not depend on it.
    #[arg(long, global = true, env = "QGEO_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Leave the wall-clock timestamp out of the report.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Exact,
    Spectral,
    Mc,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    Finner,
    SphereRatio,
    LogConcavity,
    DiagonalMonotone,
    Isoperimetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RandvolMode {
    Expectation,
    Corollary,
    Vitale,
    ReverseHolder,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EnumerationArgs {
    /// Maximum number of ordered atom tuples for exact enumeration.
    #[arg(long, default_value_t = 100_000_000)]
    pub cap: u128,
    /// Maximum number of generator subsets for zonotope routes.
    #[arg(long, default_value_t = 10_000_000)]
    pub subset_cap: u128,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Q_j^p of a tuple of surfaces.
    ComputeQ {
        /// Surface files; a single file with --j gives the diagonal tuple.
        #[arg(long, num_args = 1.., required = true)]
        input: Vec<PathBuf>,
        #[arg(long)]
        j: Option<usize>,
        #[arg(long, default_value = "1")]
        p: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        enumeration: EnumerationArgs,
    },
    /// Q_j^p for j = 1..d and the normalized profile a_j.
    Profile {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "1")]
        p: String,
        #[command(flatten)]
        enumeration: EnumerationArgs,
    },
    /// Certify one of the inequalities on the given surfaces.
    Certify {
        #[arg(long, value_enum)]
        theorem: Theorem,
        #[arg(long, num_args = 1.., required = true)]
        input: Vec<PathBuf>,
        /// Uniform cover for finner; leave-one-out when absent.
        #[arg(long)]
        cover: Option<PathBuf>,
        #[arg(long)]
        j: Option<usize>,
        #[arg(long, default_value = "1")]
        p: String,
        /// Relative tolerance for exact certificates.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[command(flatten)]
        enumeration: EnumerationArgs,
    },
    /// Closed-form Q_j^p(S^{d-1}) for p ∈ {1, 2}.
    SphereConstants {
        #[arg(long)]
        dim: usize,
    },
    /// vis^p by Monte Carlo, with John-ellipsoid and frame-bound diagnostics for p = 1.
    Visibility {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "1")]
        p: String,
        #[arg(long, default_value_t = 200_000)]
        samples: u64,
        #[arg(long)]
        seed: Option<u64>,
        /// Number of random frames in the bound search.
        #[arg(long, default_value_t = 200)]
        random_frames: usize,
        /// Plane dimensions summing to d for the plane bound.
        #[arg(long, num_args = 1..)]
        plane_dims: Option<Vec<usize>>,
        #[command(flatten)]
        enumeration: EnumerationArgs,
    },
    /// Monte Carlo check of the Crofton identity for two circles or three spheres.
    Crofton {
        /// Two radii for circles, three for spheres.
        #[arg(long, num_args = 2..=3, conflicts_with = "input")]
        radii: Option<Vec<f64>>,
        /// JSON list of shapes {"kind", "r", "center"}.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Random parallelotope volumes: expectations, the sphere corollary, Vitale limits.
    Randvol {
        #[arg(long, value_enum, default_value_t = RandvolMode::Expectation)]
        mode: RandvolMode,
        /// sphere, ball, gaussian or exponential.
        #[arg(long, default_value = "gaussian")]
        law: String,
        /// Surface file normalized to a probability; replaces --law for expectations.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        j: Option<usize>,
        #[arg(long, default_value = "1")]
        p: String,
        /// Rescale the law so that E|ξ|^p = 1.
        #[arg(long)]
        normalize: bool,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long)]
        seed: Option<u64>,
        /// Largest dimension in the Vitale table.
        #[arg(long, default_value_t = 50)]
        dmax: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::ComputeQ { .. } => "compute-q",
            Command::Profile { .. } => "profile",
            Command::Certify { .. } => "certify",
            Command::SphereConstants { .. } => "sphere-constants",
            Command::Visibility { .. } => "visibility",
            Command::Crofton { .. } => "crofton",
            Command::Randvol { .. } => "randvol",
        }
    }
}

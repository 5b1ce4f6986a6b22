use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(
    name = "eigenshape",
    version,
    about = "Spectral shape analysis experiments on triangle meshes"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Serialize)]
pub struct Common {
    /// Mesh file (.off/.obj) or a builtin such as `builtin:icosphere:3`.
    #[arg(long, global = true)]
    pub mesh: Option<String>,
    /// Output directory for the report and result files.
    #[arg(long, global = true, env = "EIGENSHAPE_OUT", default_value = "eigenshape-out")]
    #[serde(skip)]
    pub out: PathBuf,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Mesh statistics.
    Info,
    /// Gaussian curvature and metric weights.
    Curvature(CurvatureArgs),
    /// Smallest Laplace-Beltrami eigenpairs.
    Eigs(EigsArgs),
    /// Compare truncation residuals with the Dirichlet-energy bound.
    BoundCheck(BoundCheckArgs),
    /// Worst-case ratio of rival frames against the eigenbasis.
    Audit(AuditArgs),
    /// Geodesic distance fields from sample vertices.
    Geodesic(GeodesicArgs),
    /// Canonical form embedding by spectral or classical MDS.
    Canonical(CanonicalArgs),
    /// Regularized PCA bases, sweeps and reconstructions.
    Rpca(RpcaArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Info => "info",
            Command::Curvature(_) => "curvature",
            Command::Eigs(_) => "eigs",
            Command::BoundCheck(_) => "bound-check",
            Command::Audit(_) => "audit",
            Command::Geodesic(_) => "geodesic",
            Command::Canonical(_) => "canonical",
            Command::Rpca(_) => "rpca",
        }
    }

    pub fn options(&self) -> serde_json::Value {
        let value = match self {
            Command::Info => Ok(serde_json::json!({})),
            Command::Curvature(a) => serde_json::to_value(a),
            Command::Eigs(a) => serde_json::to_value(a),
            Command::BoundCheck(a) => serde_json::to_value(a),
            Command::Audit(a) => serde_json::to_value(a),
            Command::Geodesic(a) => serde_json::to_value(a),
            Command::Canonical(a) => serde_json::to_value(a),
            Command::Rpca(a) => serde_json::to_value(a),
        };
        value.expect("argument structs serialize")
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct MetricArgs {
    /// Interpolation between the regular (0) and curvature-scaled (1) metric.
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    /// Floor for the dimensionless curvature weight.
    #[arg(long, default_value_t = eigenshape::curvature::DEFAULT_EPSILON)]
    pub epsilon: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverMethod {
    Auto,
    ShiftInvert,
    Dense,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SolverArgs {
    /// Relative residual tolerance of the eigensolver.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Restart-cycle cap of the eigensolver.
    #[arg(long, default_value_t = 300)]
    pub max_iter: usize,
    #[arg(long, value_enum, default_value_t = SolverMethod::Auto)]
    pub method: SolverMethod,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixFormat {
    Csv,
    Spmx,
}

impl MatrixFormat {
    pub fn extension(self) -> &'static str {
        match self {
            MatrixFormat::Csv => "csv",
            MatrixFormat::Spmx => "spmx",
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct CurvatureArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub metric: MetricArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct EigsArgs {
    /// Number of eigenpairs.
    #[arg(long, default_value_t = 20)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = MatrixFormat::Csv)]
    pub matrix_format: MatrixFormat,
    #[command(flatten)]
    #[serde(flatten)]
    pub metric: MetricArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundCheckArgs {
    /// Truncation order.
    #[arg(long)]
    pub n: usize,
    /// Basis size (at least n + 1; defaults to n + 1).
    #[arg(long)]
    pub k: Option<usize>,
    /// Number of random vertex-noise fields drawn from `--seed`.
    #[arg(long, default_value_t = 0)]
    pub random: usize,
    /// Extra fields: `x`, `y`, `z` or a CSV file with one column per field.
    #[arg(long = "field")]
    pub fields: Vec<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub metric: MetricArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampler {
    Noise,
    Spectral,
}

#[derive(Args, Debug, Serialize)]
pub struct AuditArgs {
    /// Rival frame size.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Random rival frames to draw.
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    /// Basis size (defaults to 3n + 1, at least n + 1).
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum, default_value_t = Sampler::Spectral)]
    pub sampler: Sampler,
    /// Do not force the constant field into the rival frames.
    #[arg(long)]
    pub no_constant: bool,
    /// Audit a user rival frame (CSV or SPMX, one column per field).
    #[arg(long)]
    pub rival: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub metric: MetricArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
}

#[derive(Args, Debug, Serialize)]
pub struct GeodesicArgs {
    /// Number of farthest point samples.
    #[arg(long, conflicts_with = "sources")]
    pub samples: Option<usize>,
    /// Explicit source vertices, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub sources: Vec<usize>,
    /// First vertex of farthest point sampling.
    #[arg(long, default_value_t = 0)]
    pub start: usize,
    /// Refine edge-graph distances by triangle unfolding.
    #[arg(long)]
    pub refine: bool,
    #[arg(long, value_enum, default_value_t = MatrixFormat::Csv)]
    pub matrix_format: MatrixFormat,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MdsMethod {
    Spectral,
    Classical,
}

#[derive(Args, Debug, Serialize)]
pub struct CanonicalArgs {
    #[arg(long, value_enum, default_value_t = MdsMethod::Spectral)]
    pub mds: MdsMethod,
    /// Farthest point samples for spectral MDS.
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    /// Basis size for spectral MDS.
    #[arg(long, default_value_t = 100)]
    pub k: usize,
    /// Embedding dimension.
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    /// Smoothness weight (defaults to a scale-free automatic choice).
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub start: usize,
    #[arg(long)]
    pub refine: bool,
    /// Skip the full-stress evaluation (it needs all-pairs distances).
    #[arg(long)]
    pub no_full_stress: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub metric: MetricArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub solver: SolverArgs,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RpcaSolver {
    Auto,
    Dense,
    ShiftInvert,
}

#[derive(Args, Debug, Serialize)]
pub struct RpcaArgs {
    /// Training data: meshes sharing the connectivity of `--mesh` (their
    /// coordinates become fields) or CSV/SPMX field matrices.
    #[arg(long, required = true, num_args = 1..)]
    pub data: Vec<String>,
    /// Held-out meshes to reconstruct in addition to the training meshes.
    #[arg(long)]
    pub target: Vec<String>,
    /// Smoothness weight, either a value or a log sweep `lo:hi:steps`.
    #[arg(long, default_value = "0")]
    pub mu: String,
    /// Interpret `--mu` as the calibrated weight |L|_1 mu / |A X X^T A|_1.
    #[arg(long)]
    pub calibrated: bool,
    /// Basis dimension.
    #[arg(long, default_value_t = 6)]
    pub m: usize,
    #[arg(long, value_enum, default_value_t = RpcaSolver::Auto)]
    pub solver: RpcaSolver,
    #[arg(long, value_enum, default_value_t = MatrixFormat::Csv)]
    pub matrix_format: MatrixFormat,
    #[command(flatten)]
    #[serde(flatten)]
    pub metric: MetricArgs,
}

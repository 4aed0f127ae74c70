use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

// Aliases keep clap from treating the parsed lists as repeated flags.
pub type Coords = Vec<f64>;
pub type Vectors = Vec<Vec<f64>>;
pub type Indices = Vec<usize>;

/// Numerical verification of the sharp area bound for minimal submanifolds
/// of the unit ball passing through a prescribed point.
#[derive(Debug, Parser)]
#[command(name = "areabound", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the calibration field or fuzz its deficit inequality.
    #[command(subcommand)]
    Field(FieldCommand),
    /// Build an analytic surface, print its area oracle, optionally export a mesh.
    Surface(SurfaceCmd),
    /// Minimize the area of a triangle mesh with fixed boundary and pinned vertex.
    Solve(SolveCmd),
    /// Run the bound, identity and flux-limit checks on a surface.
    Verify(VerifyCmd),
}

#[derive(Debug, Subcommand)]
pub enum FieldCommand {
    Eval(EvalCmd),
    Fuzz(FuzzCmd),
}

#[derive(Debug, Args)]
pub struct EvalCmd {
    /// Intrinsic dimension.
    #[arg(long)]
    pub k: usize,
    /// Ambient dimension; inferred from the vectors when omitted.
    #[arg(long)]
    pub n: Option<usize>,
    /// Evaluation point, comma separated.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vector)]
    pub x: Coords,
    /// Center point, comma separated.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vector)]
    pub y: Coords,
    /// Tangent frame as `k` vectors separated by `;`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vectors)]
    pub frame: Option<Vectors>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FuzzCmd {
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_parser = parse_usizes, default_value = "2,3,4")]
    pub k_set: Indices,
    #[arg(long, value_parser = parse_usizes, default_value = "3,4,5,7")]
    pub n_set: Indices,
    #[arg(long, default_value_t = 0.95)]
    pub ymax: f64,
    /// Smallest admissible |x - y|.
    #[arg(long, default_value_t = 1e-3)]
    pub min_dist: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Flatdisk,
    Catenoid,
    Cone,
}

#[derive(Debug, Args)]
pub struct SurfaceArgs {
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Flat disk: distance of the plane from the origin.
    #[arg(long)]
    pub d: Option<f64>,
    /// Flat disk: a point of the plane.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vector)]
    pub center: Option<Coords>,
    /// Flat disk: spanning vectors separated by `;` (orthonormalized).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vectors)]
    pub axes: Option<Vectors>,
    /// Flat disk: the plane through --y orthogonal to it.
    #[arg(long)]
    pub orthogonal_to_y: bool,
    /// Catenoid neck radius.
    #[arg(long)]
    pub c: Option<f64>,
    /// Cone: radius of the apex ball whose area is added analytically.
    #[arg(long)]
    pub apex_delta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SurfaceCmd {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vector)]
    pub y: Option<Coords>,
    /// Quadrature resolution for the area cross-check.
    #[arg(long, default_value_t = 32)]
    pub density: usize,
    /// Write an OBJ mesh (plus sidecar) of the surface.
    #[arg(long)]
    pub export: Option<PathBuf>,
    /// Mesh resolution for --export.
    #[arg(long, default_value_t = 16)]
    pub resolution: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveCmd {
    #[arg(long)]
    pub input: PathBuf,
    /// Pin the interior vertex nearest to this point and move it there.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vector)]
    pub y: Option<Coords>,
    #[arg(long, default_value_t = 200)]
    pub iters: usize,
    /// Relative area change over the convergence window.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 10)]
    pub window: usize,
    /// Minimum triangle angle in degrees.
    #[arg(long, default_value_t = 0.5)]
    pub min_angle: f64,
    /// Flip non-Delaunay edges instead of aborting on thin triangles.
    #[arg(long)]
    pub remesh: bool,
    /// Output OBJ; the sidecar is written next to it.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the solve report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct VerifyCmd {
    /// OBJ mesh to verify (alternative to --family).
    #[arg(long, conflicts_with = "family")]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub surface: SurfaceArgs,
    /// Center of the field; defaults to the surface's through point or the mesh pin.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vector)]
    pub y: Option<Coords>,
    #[arg(long, value_parser = parse_vector, default_value = "0.04,0.02,0.01")]
    pub r_ladder: Coords,
    #[arg(long, default_value_t = 1e-2)]
    pub identity_r: f64,
    #[arg(long, default_value_t = 32)]
    pub density: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long)]
    pub tol_bound: Option<f64>,
    #[arg(long)]
    pub tol_identity: Option<f64>,
    #[arg(long)]
    pub tol_limit: Option<f64>,
    #[arg(long)]
    pub tol_deficit: Option<f64>,
    #[arg(long)]
    pub tol_equality: Option<f64>,
    /// JSON report path; required with --format csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_vector(s: &str) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<_, _>>()?;
    if v.iter().any(|c| !c.is_finite()) {
        return Err("non-finite component".into());
    }
    Ok(v)
}

fn parse_vectors(s: &str) -> Result<Vec<Vec<f64>>, String> {
    s.split(';').map(parse_vector).collect()
}

fn parse_usizes(s: &str) -> Result<Vec<usize>, String> {
    s.split(',').map(|t| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vectors_parse() {
        assert_eq!(parse_vector("0.5, -1,2e-3").unwrap(), vec![0.5, -1.0, 2e-3]);
        assert!(parse_vector("1,,2").is_err());
        assert!(parse_vector("nan").is_err());
        assert_eq!(parse_vectors("1,0;0,1").unwrap(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}

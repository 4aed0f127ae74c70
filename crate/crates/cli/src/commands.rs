use std::fs;
use std::path::Path;

use serde::Serialize;

use areabound::fuzz::{run_fuzz, FuzzConfig};
use areabound::json::to_json_string;
use areabound::linalg::one_minus_norm_sq;
use areabound::mesh::{load_mesh, minimize, save_mesh, LoadOptions, SolverConfig};
use areabound::surfaces::{Surface, SurfaceDescriptor};
use areabound::verify::{area_bound, check_bound, verify as run_verify, Tolerances, VerifyConfig, SCHEMA_VERSION};
use areabound::{CalibrationField, Point, TangentFrame, TriMesh};

use crate::args::{EvalCmd, Format, FuzzCmd, SolveCmd, SurfaceCmd, VerifyCmd};
use crate::surface::{build, check_n};
use crate::Failure;

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), Failure> {
    let text = to_json_string(value)?;
    if let Some(path) = out {
        fs::write(path, &text)?;
    }
    print!("{text}");
    Ok(())
}

fn to_vec(p: &Point) -> Vec<f64> {
    p.iter().copied().collect()
}

#[derive(Serialize)]
struct EvalReport {
    schema_version: u32,
    k: usize,
    n: usize,
    x: Vec<f64>,
    y: Vec<f64>,
    #[serde(rename = "W")]
    w: Vec<f64>,
    div: Option<f64>,
    deficit: Option<f64>,
    #[serde(rename = "Q")]
    q: f64,
    dist: f64,
}

pub fn field_eval(cmd: &EvalCmd) -> Result<bool, Failure> {
    if cmd.x.len() != cmd.y.len() {
        return Err(Failure::Usage(format!("--x has dimension {} but --y has {}", cmd.x.len(), cmd.y.len())));
    }
    let n = check_n(cmd.n, cmd.y.len(), "--y")?;
    let frame = match &cmd.frame {
        None => None,
        Some(vectors) => {
            if vectors.len() != cmd.k {
                return Err(Failure::Usage(format!("--frame has {} vectors but --k is {}", vectors.len(), cmd.k)));
            }
            let vectors: Vec<Point> = vectors.iter().map(|v| Point::from_vec(v.clone())).collect();
            if vectors.iter().any(|v| v.len() != n) {
                return Err(Failure::Usage(format!("--frame vectors must have dimension {n}")));
            }
            Some(TangentFrame::from_vectors(&vectors)?)
        }
    };
    let x = Point::from_vec(cmd.x.clone());
    let y = Point::from_vec(cmd.y.clone());
    let field = CalibrationField::new(y.clone(), cmd.k)?;
    let w = field.eval(&x)?;
    let deficit = frame.as_ref().map(|f| field.deficit(&x, f)).transpose()?;
    let dist = (&x - &y).norm();
    let report = EvalReport {
        schema_version: SCHEMA_VERSION,
        k: cmd.k,
        n,
        x: cmd.x.clone(),
        y: cmd.y.clone(),
        w: to_vec(&w),
        div: deficit.map(|d| 1.0 - d),
        deficit,
        q: dist * dist + one_minus_norm_sq(&x),
        dist,
    };
    emit(&report, cmd.out.as_deref())?;
    Ok(true)
}

pub fn field_fuzz(cmd: &FuzzCmd) -> Result<bool, Failure> {
    if cmd.samples == 0 {
        return Err(Failure::Usage("--samples must be at least 1".into()));
    }
    let config = FuzzConfig {
        samples: cmd.samples,
        seed: cmd.seed,
        k_set: cmd.k_set.clone(),
        n_set: cmd.n_set.clone(),
        ymax: cmd.ymax,
        min_dist: cmd.min_dist,
    };
    let report = run_fuzz(&config).map_err(|e| Failure::Usage(e.to_string()))?;
    if report.conditioning_warning {
        eprintln!("warning: |y| up to {} is poorly conditioned near the sphere", cmd.ymax);
    }
    emit(&report, cmd.out.as_deref())?;
    Ok(report.passed)
}

#[derive(Serialize)]
struct SurfaceReport {
    schema_version: u32,
    surface: SurfaceDescriptor,
    k: usize,
    n: usize,
    area: f64,
    quadrature_area: f64,
    density: usize,
    through_point: Vec<f64>,
    boundary_max_sphere_deviation: f64,
    y: Option<Vec<f64>>,
    bound: Option<f64>,
    margin: Option<f64>,
    export: Option<String>,
}

pub fn surface(cmd: &SurfaceCmd) -> Result<bool, Failure> {
    let y = cmd.y.clone().map(Point::from_vec);
    let surface = build(&cmd.surface, y.as_ref())?;
    let quadrature_area = surface.samples(None, cmd.density)?.area();
    let deviation =
        surface.boundary_points(cmd.density).iter().map(|p| (p.norm() - 1.0).abs()).fold(0.0, f64::max);
    let checked = y.as_ref().map(|y| check_bound(&surface, y)).transpose()?;
    if let Some(path) = &cmd.export {
        save_mesh(&surface.to_mesh(cmd.resolution)?, path)?;
    }
    let report = SurfaceReport {
        schema_version: SCHEMA_VERSION,
        surface: surface.descriptor(),
        k: surface.k(),
        n: surface.n(),
        area: surface.area(),
        quadrature_area,
        density: cmd.density,
        through_point: to_vec(&surface.through_point()),
        boundary_max_sphere_deviation: deviation,
        y: y.as_ref().map(to_vec),
        bound: checked.map(|b| b.bound),
        margin: checked.map(|b| b.margin),
        export: cmd.export.as_ref().map(|p| p.display().to_string()),
    };
    emit(&report, cmd.out.as_deref())?;
    Ok(true)
}

fn nearest_interior_vertex(mesh: &TriMesh, y: &Point) -> Option<usize> {
    (0..mesh.vertices().len())
        .filter(|&i| !mesh.is_boundary(i))
        .min_by(|&a, &b| (&mesh.vertices()[a] - y).norm().total_cmp(&(&mesh.vertices()[b] - y).norm()))
}

fn load(path: &Path) -> Result<TriMesh, Failure> {
    Ok(load_mesh(path, &LoadOptions { check_ball: true, sidecar: None })?)
}

pub fn solve(cmd: &SolveCmd) -> Result<bool, Failure> {
    if cmd.iters == 0 || cmd.window == 0 || !(cmd.tol > 0.0) || !(cmd.min_angle >= 0.0) {
        return Err(Failure::Usage("--iters and --window must be positive, --tol > 0, --min-angle >= 0".into()));
    }
    let mut mesh = load(&cmd.input)?;
    if let Some(y) = &cmd.y {
        let y = Point::from_vec(y.clone());
        check_n(Some(mesh.ambient_dim()), y.len(), "--y")?;
        match mesh.pinned() {
            Some(pin) if pin.target != y => {
                return Err(Failure::Usage("--y disagrees with the pinned vertex of the mesh sidecar".into()));
            }
            Some(_) => {}
            None => {
                let index = nearest_interior_vertex(&mesh, &y)
                    .ok_or_else(|| Failure::Usage("mesh has no interior vertex to pin".into()))?;
                mesh = mesh.with_pin(index, y)?;
            }
        }
    }
    let config = SolverConfig {
        max_iterations: cmd.iters,
        area_rel_tol: cmd.tol,
        window: cmd.window,
        min_angle_deg: cmd.min_angle,
        remesh: cmd.remesh,
        ..SolverConfig::default()
    };
    let (result, report) = minimize(&mesh, &config)?;
    save_mesh(&result, &cmd.out)?;
    emit(&report, cmd.report.as_deref())?;
    Ok(report.converged)
}

fn tolerances(cmd: &VerifyCmd, base: Tolerances) -> Result<Tolerances, Failure> {
    let pick = |v: Option<f64>, d: f64, name: &str| match v {
        Some(t) if !(t >= 0.0) => Err(Failure::Usage(format!("--tol-{name} must be nonnegative"))),
        Some(t) => Ok(t),
        None => Ok(d),
    };
    Ok(Tolerances {
        bound: pick(cmd.tol_bound, base.bound, "bound")?,
        identity: pick(cmd.tol_identity, base.identity, "identity")?,
        limit: pick(cmd.tol_limit, base.limit, "limit")?,
        deficit: pick(cmd.tol_deficit, base.deficit, "deficit")?,
        equality: pick(cmd.tol_equality, base.equality, "equality")?,
    })
}

pub fn verify(cmd: &VerifyCmd) -> Result<bool, Failure> {
    if cmd.format == Format::Csv && cmd.out.is_none() {
        return Err(Failure::Usage("--format csv prints the flux ladder; give --out for the JSON report".into()));
    }
    if cmd.r_ladder.len() < 2 {
        return Err(Failure::Usage("--r-ladder needs at least two radii".into()));
    }
    if cmd.density < 2 {
        return Err(Failure::Usage("--density must be at least 2".into()));
    }
    let y = cmd.y.clone().map(Point::from_vec);
    let report = match &cmd.input {
        Some(path) => {
            if cmd.surface.family.is_some() {
                return Err(Failure::Usage("--input and --family are exclusive".into()));
            }
            let mesh = load(path)?;
            let y = match (y, mesh.pinned()) {
                (Some(y), _) => y,
                (None, Some(pin)) => pin.target.clone(),
                (None, None) => return Err(Failure::Usage("mesh has no pinned vertex; give --y".into())),
            };
            check_n(cmd.surface.n.or(Some(mesh.ambient_dim())), y.len(), "--y")?;
            let base = Tolerances::mesh(area_bound(2, &y));
            let config = verify_config(cmd, tolerances(cmd, base)?);
            run_verify(&mesh, &y, &config)?
        }
        None => {
            let surface = build(&cmd.surface, y.as_ref())?;
            let y = y.unwrap_or_else(|| surface.through_point());
            check_n(Some(surface.n()), y.len(), "--y")?;
            let config = verify_config(cmd, tolerances(cmd, Tolerances::analytic())?);
            run_verify(&surface, &y, &config)?
        }
    };
    match cmd.format {
        Format::Json => emit(&report, cmd.out.as_deref())?,
        Format::Csv => {
            fs::write(cmd.out.as_deref().expect("checked above"), to_json_string(&report)?)?;
            print!("{}", report.flux_csv());
        }
    }
    Ok(report.passed())
}

fn verify_config(cmd: &VerifyCmd, tolerances: Tolerances) -> VerifyConfig {
    VerifyConfig {
        r_ladder: cmd.r_ladder.clone(),
        identity_r: cmd.identity_r,
        density: cmd.density,
        tolerances: Some(tolerances),
    }
}

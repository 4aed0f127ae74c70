//! Turns surface flags into an analytic surface, rejecting flag combinations
//! that do not belong to the chosen family.

use areabound::surfaces::{AnalyticSurface, Catenoid, CliffordCone, FlatDisk};
use areabound::{Point, TangentFrame};

use crate::args::{Family, SurfaceArgs};
use crate::Failure;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Dimension `inferred` checked against an explicit `--n`.
pub fn check_n(explicit: Option<usize>, inferred: usize, what: &str) -> Result<usize, Failure> {
    match explicit {
        Some(n) if n != inferred => Err(usage(format!("--n {n} disagrees with {what} of dimension {inferred}"))),
        _ => Ok(inferred),
    }
}

fn reject_flags(args: &SurfaceArgs, family: &str, disk: bool, catenoid: bool, cone: bool) -> Result<(), Failure> {
    let stray = [
        (!disk && args.d.is_some(), "--d"),
        (!disk && args.center.is_some(), "--center"),
        (!disk && args.axes.is_some(), "--axes"),
        (!disk && args.orthogonal_to_y, "--orthogonal-to-y"),
        (!catenoid && args.c.is_some(), "--c"),
        (!cone && args.apex_delta.is_some(), "--apex-delta"),
    ];
    match stray.iter().find(|(bad, _)| *bad) {
        Some((_, flag)) => Err(usage(format!("{flag} does not apply to the {family} family"))),
        None => Ok(()),
    }
}

fn fixed_dims(args: &SurfaceArgs, family: &str, k: usize, n: usize) -> Result<(), Failure> {
    if args.k.is_some_and(|v| v != k) || args.n.is_some_and(|v| v != n) {
        return Err(usage(format!("the {family} family has k = {k}, n = {n}")));
    }
    Ok(())
}

fn flat_disk(args: &SurfaceArgs, y: Option<&Point>) -> Result<FlatDisk, Failure> {
    let selectors = [args.d.is_some(), args.center.is_some(), args.orthogonal_to_y].iter().filter(|&&b| b).count();
    if selectors != 1 {
        return Err(usage("a flat disk needs exactly one of --d, --center, --orthogonal-to-y"));
    }
    if args.axes.is_some() && args.center.is_none() {
        return Err(usage("--axes requires --center"));
    }
    let k = match (&args.axes, args.k) {
        (Some(axes), Some(k)) if axes.len() != k => {
            return Err(usage(format!("--axes lists {} vectors but --k is {k}", axes.len())));
        }
        (Some(axes), _) => axes.len(),
        (None, k) => k.unwrap_or(2),
    };
    if let Some(d) = args.d {
        let n = args.n.unwrap_or(3);
        return Ok(FlatDisk::at_distance(d, k, n)?);
    }
    if args.orthogonal_to_y {
        let y = y.ok_or_else(|| usage("--orthogonal-to-y requires --y"))?;
        check_n(args.n, y.len(), "--y")?;
        return Ok(FlatDisk::orthogonal_to(y, k)?);
    }
    let center = Point::from_vec(args.center.clone().unwrap_or_default());
    let n = check_n(args.n, center.len(), "--center")?;
    let frame = match &args.axes {
        Some(axes) => {
            let vectors: Vec<Point> = axes.iter().map(|a| Point::from_vec(a.clone())).collect();
            if let Some(bad) = vectors.iter().find(|v| v.len() != n) {
                return Err(usage(format!("axis of dimension {} in ambient dimension {n}", bad.len())));
            }
            TangentFrame::orthonormalized(&vectors)?
        }
        None => TangentFrame::coordinate(n, &(0..k).collect::<Vec<_>>())?,
    };
    Ok(FlatDisk::new(center, frame)?)
}

/// Builds the surface named by `--family`.
pub fn build(args: &SurfaceArgs, y: Option<&Point>) -> Result<AnalyticSurface, Failure> {
    let family = args.family.ok_or_else(|| usage("--family is required"))?;
    match family {
        Family::Flatdisk => {
            reject_flags(args, "flatdisk", true, false, false)?;
            Ok(AnalyticSurface::FlatDisk(flat_disk(args, y)?))
        }
        Family::Catenoid => {
            reject_flags(args, "catenoid", false, true, false)?;
            fixed_dims(args, "catenoid", 2, 3)?;
            Ok(AnalyticSurface::Catenoid(Catenoid::new(args.c.unwrap_or(0.5))?))
        }
        Family::Cone => {
            reject_flags(args, "cone", false, false, true)?;
            fixed_dims(args, "cone", 3, 4)?;
            let cone = match args.apex_delta {
                Some(delta) => CliffordCone::new(delta)?,
                None => CliffordCone::default(),
            };
            Ok(AnalyticSurface::CliffordCone(cone))
        }
    }
}

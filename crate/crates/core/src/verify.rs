//! The integral argument, assembled numerically: deficit quadrature, slice
//! fluxes, the divergence identity, the flux limit and the area bound.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::CalibrationField;
use crate::linalg::Point;
use crate::quadrature::unit_ball_volume;
use crate::surfaces::{Exclusion, SampleSet, SliceSample, Surface, SurfaceDescriptor};

pub const SCHEMA_VERSION: u32 = 1;

/// How far the surface may be from `y` and still count as passing through it.
pub const THROUGH_TOL: f64 = 1e-9;

/// Smallest slice radius accepted for analytic surfaces and for meshes.
pub const ANALYTIC_R_MIN: f64 = 1e-6;
pub const MESH_R_MIN: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Absolute slack on the margin.
    pub bound: f64,
    /// Identity gap relative to `max(1, |rhs|)`.
    pub identity: f64,
    /// Flux-limit error relative to the target.
    pub limit: f64,
    /// Allowed negative excursion of the pointwise deficit.
    pub deficit: f64,
    /// Equality residual below which a sample counts as rigid.
    pub equality: f64,
}

impl Tolerances {
    pub fn analytic() -> Self {
        Tolerances { bound: 1e-10, identity: 1e-6, limit: 5e-3, deficit: 1e-10, equality: 1e-12 }
    }

    /// Mesh defaults; the bound slack is 1% of `bound`.
    pub fn mesh(bound: f64) -> Self {
        Tolerances { bound: 1e-2 * bound, identity: 5e-2, limit: 2e-2, deficit: 1e-10, equality: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    /// Slice radii for the flux-limit study.
    pub r_ladder: Vec<f64>,
    /// Exclusion radius for the identity check.
    pub identity_r: f64,
    /// Resolution of analytic quadrature rules.
    pub density: usize,
    /// Defaults by surface kind when `None`.
    pub tolerances: Option<Tolerances>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { r_ladder: vec![4e-2, 2e-2, 1e-2], identity_r: 1e-2, density: 32, tolerances: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeficitSummary {
    pub integral: f64,
    pub min: f64,
    /// Max over samples of `normal_xy_sq + tangential_y_sq`.
    pub equality_residual: f64,
}

/// Weighted deficit over the samples, which must avoid the exclusion ball.
pub fn integrate_deficit(set: &SampleSet, field: &CalibrationField) -> Result<DeficitSummary> {
    if let Some(ex) = &set.exclusion {
        if !(ex.radius >= field.r_min()) {
            return Err(Error::InvalidArgument(format!(
                "exclusion radius {} is below r_min {}",
                ex.radius,
                field.r_min()
            )));
        }
    }
    set.check_exclusion()?;
    let values: Vec<(f64, f64, f64)> = set
        .samples
        .par_iter()
        .map(|s| {
            let d = field.diagnostics(&s.x, &s.frame)?;
            let deficit = field.deficit(&s.x, &s.frame)?;
            Ok((s.weight * deficit, deficit, d.normal_xy_sq + d.tangential_y_sq))
        })
        .collect::<Result<_>>()?;
    let mut out = DeficitSummary { integral: 0.0, min: f64::INFINITY, equality_residual: 0.0 };
    for (wd, d, e) in values {
        out.integral += wd;
        out.min = out.min.min(d);
        out.equality_residual = out.equality_residual.max(e);
    }
    Ok(out)
}

pub fn equality_residual(set: &SampleSet, field: &CalibrationField) -> Result<f64> {
    Ok(integrate_deficit(set, field)?.equality_residual)
}

/// `sum weight <W, conormal>` over slice samples.
pub fn flux_integral(slice: &[SliceSample], field: &CalibrationField) -> Result<f64> {
    let terms: Vec<f64> =
        slice.par_iter().map(|s| Ok(s.weight * field.eval(&s.x)?.dot(&s.conormal))).collect::<Result<_>>()?;
    Ok(terms.into_iter().sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub r: f64,
    pub density: usize,
    /// Deficit integral over the surface outside `B_r(y)`.
    pub lhs: f64,
    /// Area outside `B_r(y)` minus the slice flux.
    pub rhs: f64,
    pub gap: f64,
    pub area_outside: f64,
    pub flux: f64,
    pub deficit_min: f64,
    pub equality_residual: f64,
}

impl IdentityCheck {
    pub fn relative_gap(&self) -> f64 {
        self.gap / self.rhs.abs().max(1.0)
    }
}

pub fn check_identity<S: Surface + ?Sized>(
    surface: &S,
    field: &CalibrationField,
    r: f64,
    density: usize,
) -> Result<IdentityCheck> {
    let y = field.y().clone();
    let set = surface.samples(Some(&Exclusion { center: y.clone(), radius: r }), density)?;
    let summary = integrate_deficit(&set, field)?;
    let flux = flux_integral(&surface.slice(&y, r, density)?, field)?;
    let area_outside = set.area();
    let rhs = area_outside - flux;
    Ok(IdentityCheck {
        r,
        density,
        lhs: summary.integral,
        rhs,
        gap: (summary.integral - rhs).abs(),
        area_outside,
        flux,
        deficit_min: summary.min,
        equality_residual: summary.equality_residual,
    })
}

/// `|B^k| (1 - |y|^2)^{k/2}`.
pub fn area_bound(k: usize, y: &Point) -> f64 {
    unit_ball_volume(k) * (1.0 - y.norm_squared()).powf(0.5 * k as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub area: f64,
    pub bound: f64,
    pub margin: f64,
    pub distance_to_y: f64,
}

/// Fails with [`Error::MissesPoint`] when the surface does not pass through `y`.
pub fn check_bound<S: Surface + ?Sized>(surface: &S, y: &Point) -> Result<BoundCheck> {
    if y.len() != surface.n() {
        return Err(Error::DimensionMismatch { expected: surface.n(), got: y.len() });
    }
    if !(y.norm() < 1.0) {
        return Err(Error::PointOutsideBall(y.norm()));
    }
    let distance = surface.distance_to(y);
    if !(distance <= THROUGH_TOL) {
        return Err(Error::MissesPoint(distance));
    }
    let area = surface.area();
    let bound = area_bound(surface.k(), y);
    Ok(BoundCheck { area, bound, margin: area - bound, distance_to_y: distance })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxValue {
    pub r: f64,
    pub flux: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxStudy {
    /// Ladder values in decreasing `r`, including any dropped ones.
    pub values: Vec<FluxValue>,
    /// Radii removed from the extrapolation as noisy.
    pub dropped: Vec<f64>,
    /// Richardson extrapolation (error `O(r^2)`) from the two smallest kept radii.
    pub extrapolated: f64,
}

/// Extrapolates `f(r) = L + C r^2` through two radii.
pub fn richardson(r1: f64, f1: f64, r2: f64, f2: f64) -> f64 {
    let (a, b) = (r1 * r1, r2 * r2);
    (f2 * a - f1 * b) / (a - b)
}

fn noisy_tail(values: &[FluxValue]) -> bool {
    let n = values.len();
    if n < 3 {
        return false;
    }
    let scale = values.iter().map(|v| v.flux.abs()).fold(0.0, f64::max).max(1e-300);
    let d_prev = values[n - 2].flux - values[n - 3].flux;
    let d_last = values[n - 1].flux - values[n - 2].flux;
    let floor = 1e-13 * scale;
    if d_last.abs() <= floor {
        return false;
    }
    let sign_flip = d_prev.abs() > floor && d_prev.signum() != d_last.signum();
    sign_flip || d_last.abs() > d_prev.abs().max(floor)
}

pub fn flux_limit_study<S: Surface + ?Sized>(
    surface: &S,
    field: &CalibrationField,
    r_ladder: &[f64],
    density: usize,
) -> Result<FluxStudy> {
    if r_ladder.len() < 2 {
        return Err(Error::InvalidArgument("the flux ladder needs at least two radii".into()));
    }
    let mut ladder = r_ladder.to_vec();
    ladder.sort_by(|a, b| b.total_cmp(a));
    if ladder.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("flux ladder radii must be distinct".into()));
    }
    let y = field.y();
    let values: Vec<FluxValue> = ladder
        .iter()
        .map(|&r| Ok(FluxValue { r, flux: flux_integral(&surface.slice(y, r, density)?, field)? }))
        .collect::<Result<_>>()?;
    let mut kept = values.clone();
    let mut dropped = Vec::new();
    while noisy_tail(&kept) {
        dropped.push(kept.pop().unwrap().r);
    }
    let n = kept.len();
    let extrapolated = richardson(kept[n - 2].r, kept[n - 2].flux, kept[n - 1].r, kept[n - 1].flux);
    Ok(FluxStudy { values, dropped, extrapolated })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    pub bound: bool,
    pub identity: bool,
    pub flux_limit: bool,
    pub deficit_nonnegative: bool,
    /// Equality in the bound forces the equality configuration.
    pub rigidity: bool,
}

impl Verdicts {
    pub fn all(&self) -> bool {
        self.bound && self.identity && self.flux_limit && self.deficit_nonnegative && self.rigidity
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub surface: SurfaceDescriptor,
    pub y: Vec<f64>,
    pub k: usize,
    pub n: usize,
    pub density: usize,
    pub area: f64,
    pub bound: f64,
    pub margin: f64,
    pub distance_to_y: f64,
    pub identity_r: f64,
    pub identity_lhs: f64,
    pub identity_rhs: f64,
    pub identity_gap: f64,
    pub flux_values: Vec<FluxValue>,
    pub flux_dropped: Vec<f64>,
    pub flux_extrapolated: f64,
    pub flux_limit_target: f64,
    /// Area density of the surface at `y`; the flux tends to this multiple
    /// of the bound.
    pub density_at_y: f64,
    /// Radii below this are under the mesh resolution at `y` (zero for
    /// analytic surfaces).
    pub flux_valid_r_min: f64,
    pub deficit_min: f64,
    pub equality_residual: f64,
    pub tolerances: Tolerances,
    pub verdicts: Verdicts,
}

impl VerificationReport {
    /// Verdicts derived from the stored numbers alone.
    pub fn recompute_verdicts(&self) -> Verdicts {
        let t = &self.tolerances;
        let equality = self.margin <= t.bound;
        Verdicts {
            bound: self.margin >= -t.bound,
            identity: self.identity_gap <= t.identity * self.identity_rhs.abs().max(1.0),
            flux_limit: (self.flux_extrapolated - self.flux_limit_target).abs()
                <= t.limit * self.flux_limit_target.abs(),
            deficit_nonnegative: self.deficit_min >= -t.deficit,
            rigidity: !equality || self.equality_residual <= t.equality,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdicts.all()
    }

    /// `r,flux` rows in ladder order.
    pub fn flux_csv(&self) -> String {
        let mut out = String::from("r,flux\n");
        for v in &self.flux_values {
            out.push_str(&format!("{:.16e},{:.16e}\n", v.r, v.flux));
        }
        out
    }
}

/// Runs every check on `surface` with the field centered at `y`.
pub fn verify<S: Surface + ?Sized>(surface: &S, y: &Point, config: &VerifyConfig) -> Result<VerificationReport> {
    let bound = check_bound(surface, y)?;
    let r_min = if surface.is_discrete() { MESH_R_MIN } else { ANALYTIC_R_MIN };
    if let Some(&r) = config.r_ladder.iter().chain([&config.identity_r]).find(|&&r| !(r >= r_min)) {
        return Err(Error::InvalidArgument(format!("radius {r} is below the minimum {r_min}")));
    }
    let field = CalibrationField::new(y.clone(), surface.k())?;
    let identity = check_identity(surface, &field, config.identity_r, config.density)?;
    let study = flux_limit_study(surface, &field, &config.r_ladder, config.density)?;
    let tolerances = config.tolerances.unwrap_or_else(|| {
        if surface.is_discrete() {
            Tolerances::mesh(bound.bound)
        } else {
            Tolerances::analytic()
        }
    });
    let mut report = VerificationReport {
        schema_version: SCHEMA_VERSION,
        surface: surface.descriptor(),
        y: y.iter().copied().collect(),
        k: surface.k(),
        n: surface.n(),
        density: config.density,
        area: bound.area,
        bound: bound.bound,
        margin: bound.margin,
        distance_to_y: bound.distance_to_y,
        identity_r: config.identity_r,
        identity_lhs: identity.lhs,
        identity_rhs: identity.rhs,
        identity_gap: identity.gap,
        flux_values: study.values,
        flux_dropped: study.dropped,
        flux_extrapolated: study.extrapolated,
        flux_limit_target: bound.bound,
        density_at_y: surface.density_at(y),
        flux_valid_r_min: surface.valid_r_min(y),
        deficit_min: identity.deficit_min,
        equality_residual: identity.equality_residual,
        tolerances,
        verdicts: Verdicts { bound: false, identity: false, flux_limit: false, deficit_nonnegative: false, rigidity: false },
    };
    report.verdicts = report.recompute_verdicts();
    Ok(report)
}

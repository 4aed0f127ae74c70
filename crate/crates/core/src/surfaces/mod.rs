//! Exact minimal surfaces in the unit ball and a common sampling interface
//! shared with triangle meshes.

mod catenoid;
mod cone;
mod disk;
mod mesh_surface;

pub use catenoid::{catenoid_c_max, catenoid_height, Catenoid};
pub use cone::CliffordCone;
pub use disk::FlatDisk;
pub use mesh_surface::{closest_point_on_triangle, clip_mesh, ClippedMesh};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::TangentFrame;
use crate::linalg::Point;
use crate::mesh::TriMesh;

/// A point of the surface with its tangent plane and quadrature weight.
#[derive(Debug, Clone)]
pub struct SurfaceSample {
    pub x: Point,
    pub frame: TangentFrame,
    pub weight: f64,
}

/// A point of the slice `surface ∩ ∂B_r(center)` with the inward conormal
/// and a (k-1)-dimensional weight.
#[derive(Debug, Clone)]
pub struct SliceSample {
    pub x: Point,
    pub conormal: Point,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub center: Point,
    pub radius: f64,
}

#[derive(Debug, Clone)]
pub struct SampleSet {
    pub samples: Vec<SurfaceSample>,
    /// Area of regions left out of `samples` for reasons other than the
    /// exclusion ball (the cone apex), added analytically.
    pub unsampled_area: f64,
    pub exclusion: Option<Exclusion>,
    /// How far inside the exclusion ball a sample may sit; nonzero only when
    /// the excluded region is approximated (chord-clipped meshes).
    pub slack: f64,
}

impl SampleSet {
    pub fn total_weight(&self) -> f64 {
        self.samples.iter().map(|s| s.weight).sum()
    }

    /// Area of the sampled region plus `unsampled_area`.
    pub fn area(&self) -> f64 {
        self.total_weight() + self.unsampled_area
    }

    /// Errors if any sample lies inside the exclusion ball beyond `slack`.
    pub fn check_exclusion(&self) -> Result<()> {
        if let Some(ex) = &self.exclusion {
            for s in &self.samples {
                let dist = (&s.x - &ex.center).norm();
                if dist < ex.radius - self.slack - 1e-15 * ex.radius.max(1.0) {
                    return Err(Error::SampleInsideExclusion { dist, r: ex.radius });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SurfaceDescriptor {
    FlatDisk { foot: Vec<f64>, frame: Vec<Vec<f64>>, d: f64, k: usize, n: usize },
    Catenoid { c: f64, z1: f64, axis: Vec<f64> },
    CliffordCone { apex_delta: f64 },
    Mesh { vertices: usize, triangles: usize, n: usize, source: Option<String> },
}

/// What the verifier needs from a surface.
pub trait Surface: Sync {
    fn k(&self) -> usize;
    fn n(&self) -> usize;
    /// Total k-dimensional area.
    fn area(&self) -> f64;
    fn distance_to(&self, y: &Point) -> f64;
    /// Quadrature over the surface minus the exclusion ball. `density` sets the
    /// resolution of analytic rules and is ignored by meshes.
    fn samples(&self, exclusion: Option<&Exclusion>, density: usize) -> Result<SampleSet>;
    /// Quadrature over `surface ∩ ∂B_r(center)`.
    fn slice(&self, center: &Point, r: f64, density: usize) -> Result<Vec<SliceSample>>;
    /// Area density at a point of the surface (1 at smooth points).
    fn density_at(&self, _y: &Point) -> f64 {
        1.0
    }
    /// Smallest radius at which the slice geometry is meaningful.
    fn valid_r_min(&self, _y: &Point) -> f64 {
        0.0
    }
    fn is_discrete(&self) -> bool {
        false
    }
    fn descriptor(&self) -> SurfaceDescriptor;
}

#[derive(Debug, Clone)]
pub enum AnalyticSurface {
    FlatDisk(FlatDisk),
    Catenoid(Catenoid),
    CliffordCone(CliffordCone),
}

macro_rules! each {
    ($self:ident, $s:ident => $e:expr) => {
        match $self {
            AnalyticSurface::FlatDisk($s) => $e,
            AnalyticSurface::Catenoid($s) => $e,
            AnalyticSurface::CliffordCone($s) => $e,
        }
    };
}

impl AnalyticSurface {
    /// Points of the boundary, which lies on the unit sphere.
    pub fn boundary_points(&self, density: usize) -> Vec<Point> {
        each!(self, s => s.boundary_points(density))
    }

    /// The designated point the surface passes through.
    pub fn through_point(&self) -> Point {
        each!(self, s => s.through_point())
    }

    /// Triangle mesh export (two-dimensional families only). `resolution`
    /// controls the vertex count; the through point is a pinned vertex.
    pub fn to_mesh(&self, resolution: usize) -> Result<TriMesh> {
        match self {
            AnalyticSurface::FlatDisk(s) => s.to_mesh(resolution, None),
            AnalyticSurface::Catenoid(s) => s.to_mesh(resolution),
            AnalyticSurface::CliffordCone(_) => {
                Err(Error::Unsupported("mesh export needs a two-dimensional surface".into()))
            }
        }
    }
}

impl Surface for AnalyticSurface {
    fn k(&self) -> usize {
        each!(self, s => s.k())
    }
    fn n(&self) -> usize {
        each!(self, s => s.n())
    }
    fn area(&self) -> f64 {
        each!(self, s => s.area())
    }
    fn distance_to(&self, y: &Point) -> f64 {
        each!(self, s => s.distance_to(y))
    }
    fn samples(&self, exclusion: Option<&Exclusion>, density: usize) -> Result<SampleSet> {
        each!(self, s => s.samples(exclusion, density))
    }
    fn slice(&self, center: &Point, r: f64, density: usize) -> Result<Vec<SliceSample>> {
        each!(self, s => s.slice(center, r, density))
    }
    fn density_at(&self, y: &Point) -> f64 {
        each!(self, s => s.density_at(y))
    }
    fn descriptor(&self) -> SurfaceDescriptor {
        each!(self, s => s.descriptor())
    }
}

pub(crate) fn check_density(density: usize) -> Result<()> {
    if density < 2 {
        return Err(Error::InvalidArgument(format!("quadrature density must be at least 2, got {density}")));
    }
    Ok(())
}

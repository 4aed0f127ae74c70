//! Flat k-disks: an affine k-plane intersected with the unit ball.

use nalgebra::DVector;

use super::{check_density, Exclusion, SampleSet, SliceSample, Surface, SurfaceDescriptor, SurfaceSample};
use crate::error::{Error, Result};
use crate::frame::TangentFrame;
use crate::linalg::{orthogonal_complement, Point};
use crate::mesh::{disk_mesh, DiskMeshSpec, TriMesh};
use crate::quadrature::{gauss_legendre_on, sphere_rule, unit_ball_volume};

#[derive(Debug, Clone)]
pub struct FlatDisk {
    /// Point of the plane closest to the origin.
    foot: Point,
    frame: TangentFrame,
}

impl FlatDisk {
    /// The plane `basepoint + span(frame)`.
    pub fn new(basepoint: Point, frame: TangentFrame) -> Result<Self> {
        if basepoint.len() != frame.n() {
            return Err(Error::DimensionMismatch { expected: frame.n(), got: basepoint.len() });
        }
        let foot = frame.reject(&basepoint);
        let d = foot.norm();
        if !(d < 1.0) {
            return Err(Error::InadmissibleSurface(format!("plane at distance {d} misses the open unit ball")));
        }
        Ok(FlatDisk { foot, frame })
    }

    /// The disk through `y` orthogonal to `y`; any k-plane through the
    /// origin spanned by the first coordinate axes when `y = 0`.
    pub fn orthogonal_to(y: &Point, k: usize) -> Result<Self> {
        let n = y.len();
        if y.norm() == 0.0 {
            let axes: Vec<usize> = (0..k).collect();
            return Self::new(y.clone(), TangentFrame::coordinate(n, &axes)?);
        }
        if k >= n {
            return Err(Error::InvalidDimension { k, n });
        }
        let comp = orthogonal_complement(std::slice::from_ref(y), n);
        let frame = TangentFrame::new(comp.columns(0, k).into_owned())?;
        Self::new(y.clone(), frame)
    }

    /// Disk spanned by the first `k` axes at distance `d` along the last axis.
    pub fn at_distance(d: f64, k: usize, n: usize) -> Result<Self> {
        if k >= n && d != 0.0 {
            return Err(Error::InvalidDimension { k, n });
        }
        let axes: Vec<usize> = (0..k).collect();
        let mut base = Point::zeros(n);
        base[n - 1] = d;
        Self::new(base, TangentFrame::coordinate(n, &axes)?)
    }

    pub fn frame(&self) -> &TangentFrame {
        &self.frame
    }

    pub fn foot(&self) -> &Point {
        &self.foot
    }

    pub fn d(&self) -> f64 {
        self.foot.norm()
    }

    pub fn k(&self) -> usize {
        self.frame.k()
    }

    pub fn n(&self) -> usize {
        self.frame.n()
    }

    pub fn area(&self) -> f64 {
        unit_ball_volume(self.k()) * (1.0 - self.d() * self.d()).powf(0.5 * self.k() as f64)
    }

    /// Radius of the disk within its plane.
    pub fn radius(&self) -> f64 {
        (1.0 - self.foot.norm_squared()).max(0.0).sqrt()
    }

    fn plane_point(&self, coeffs: &DVector<f64>) -> Point {
        self.frame.basis() * coeffs
    }

    /// Orthogonal projection of `p` onto the affine plane.
    pub fn project(&self, p: &Point) -> Point {
        &self.foot + self.frame.project(p)
    }

    pub fn through_point(&self) -> Point {
        self.foot.clone()
    }

    pub fn distance_to(&self, y: &Point) -> f64 {
        let p = self.project(y);
        let offset = &p - &self.foot;
        let rho = offset.norm();
        let closest = if rho <= self.radius() { p } else { &self.foot + offset * (self.radius() / rho) };
        (y - closest).norm()
    }

    pub fn boundary_points(&self, density: usize) -> Vec<Point> {
        sphere_rule(self.k(), density.max(2))
            .into_iter()
            .map(|(u, _)| {
                let v = &self.foot + self.plane_point(&u) * self.radius();
                // the disk's rim lies on the sphere; renormalize away rounding
                let norm = v.norm();
                v / norm
            })
            .collect()
    }

    pub fn samples(&self, exclusion: Option<&Exclusion>, density: usize) -> Result<SampleSet> {
        check_density(density)?;
        let (center, s_in) = match exclusion {
            None => (self.foot.clone(), 0.0),
            Some(ex) => {
                let c = self.project(&ex.center);
                let h = (&ex.center - &c).norm();
                (c, (ex.radius * ex.radius - h * h).max(0.0).sqrt())
            }
        };
        let gap = 1.0 - center.norm_squared();
        if !(gap > 0.0) {
            return Err(Error::InvalidArgument("polar center lies outside the disk".into()));
        }
        let k = self.k() as i32;
        let mut samples = Vec::new();
        for (u, wu) in sphere_rule(self.k(), density) {
            let dir = self.plane_point(&u);
            let a = center.dot(&dir);
            let s_out = -a + (a * a + gap).sqrt();
            if s_out <= s_in {
                continue;
            }
            for (s, ws) in gauss_legendre_on(density, s_in, s_out) {
                samples.push(SurfaceSample {
                    x: &center + &dir * s,
                    frame: self.frame.clone(),
                    weight: wu * ws * s.powi(k - 1),
                });
            }
        }
        Ok(SampleSet { samples, unsampled_area: 0.0, exclusion: exclusion.cloned(), slack: 0.0 })
    }

    pub fn slice(&self, center: &Point, r: f64, density: usize) -> Result<Vec<SliceSample>> {
        check_density(density)?;
        let c = self.project(center);
        let h = (center - &c).norm();
        if !(h < r) {
            return Err(Error::InvalidArgument(format!("sphere of radius {r} does not meet the disk")));
        }
        let rho = (r * r - h * h).sqrt();
        let reach = c.norm_squared() + rho * rho + 2.0 * rho * self.frame.project(&c).norm();
        if !(reach < 1.0) {
            return Err(Error::RadiusTooLarge(r));
        }
        let k = self.k() as i32;
        Ok(sphere_rule(self.k(), 4 * density)
            .into_iter()
            .map(|(u, w)| {
                let dir = self.plane_point(&u);
                SliceSample { x: &c + &dir * rho, conormal: -dir, weight: w * rho.powi(k - 1) }
            })
            .collect())
    }

    /// Ring mesh of the disk (k = 2) centered at `center` (the foot point by
    /// default), which becomes the pinned vertex.
    pub fn to_mesh(&self, rings: usize, center: Option<&Point>) -> Result<TriMesh> {
        if self.k() != 2 {
            return Err(Error::Unsupported("mesh export needs a two-dimensional surface".into()));
        }
        let center = center.map_or_else(|| self.foot.clone(), |c| self.project(c));
        disk_mesh(&DiskMeshSpec { center, frame: self.frame.clone(), rings })
    }

    pub fn descriptor(&self) -> SurfaceDescriptor {
        let b = self.frame.basis();
        SurfaceDescriptor::FlatDisk {
            foot: self.foot.iter().copied().collect(),
            frame: (0..self.k()).map(|j| b.column(j).iter().copied().collect()).collect(),
            d: self.d(),
            k: self.k(),
            n: self.n(),
        }
    }
}

impl Surface for FlatDisk {
    fn k(&self) -> usize {
        FlatDisk::k(self)
    }
    fn n(&self) -> usize {
        FlatDisk::n(self)
    }
    fn area(&self) -> f64 {
        FlatDisk::area(self)
    }
    fn distance_to(&self, y: &Point) -> f64 {
        FlatDisk::distance_to(self, y)
    }
    fn samples(&self, exclusion: Option<&Exclusion>, density: usize) -> Result<SampleSet> {
        FlatDisk::samples(self, exclusion, density)
    }
    fn slice(&self, center: &Point, r: f64, density: usize) -> Result<Vec<SliceSample>> {
        FlatDisk::slice(self, center, r, density)
    }
    fn descriptor(&self) -> SurfaceDescriptor {
        FlatDisk::descriptor(self)
    }
}

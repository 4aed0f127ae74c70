//! Catenoid pieces `rho = c cosh(z / c)` cut by the unit ball.
//!
//! Parameters are the height `z` along the axis and the arc length `u = c theta`
//! around it; in `(z, u)` the metric is conformal with factor `cosh^2(z / c)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use super::{check_density, Exclusion, SampleSet, SliceSample, Surface, SurfaceDescriptor, SurfaceSample};
use crate::error::{Error, Result};
use crate::frame::TangentFrame;
use crate::linalg::{orthogonal_complement, unit_axis, Point};
use crate::mesh::{cylinder_mesh, TriMesh};
use crate::quadrature::{circle_rule, gauss_legendre_on};
use crate::roots::bisect;

const ROOT_TOL: f64 = 1e-14;

fn height_equation(c: f64, z: f64) -> f64 {
    let ch = (z / c).cosh();
    c * c * ch * ch + z * z - 1.0
}

fn root_exists(c: f64) -> bool {
    c > 0.0 && height_equation(c, 0.0) < 0.0 && height_equation(c, 1.0) > 0.0
}

/// Height `z1 > 0` where the catenoid with waist `c` meets the unit sphere.
pub fn catenoid_height(c: f64) -> Result<f64> {
    if !(c > 0.0 && c < catenoid_c_max()) || !root_exists(c) {
        return Err(Error::InadmissibleSurface(format!(
            "catenoid waist c = {c} admits no boundary height in (0, 1); need 0 < c < {}",
            catenoid_c_max()
        )));
    }
    bisect(|z| height_equation(c, z), 0.0, 1.0, ROOT_TOL)
}

/// Supremum of admissible waist radii, located by bisection on existence of
/// the boundary height.
pub fn catenoid_c_max() -> f64 {
    static C_MAX: OnceLock<f64> = OnceLock::new();
    *C_MAX.get_or_init(|| {
        let (mut lo, mut hi) = (1e-3, 2.0);
        while hi - lo > ROOT_TOL {
            let mid = 0.5 * (lo + hi);
            if root_exists(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    })
}

#[derive(Debug, Clone)]
pub struct Catenoid {
    c: f64,
    z1: f64,
    axis: Point,
    e1: Point,
    e2: Point,
}

struct Local {
    x: Point,
    xz: Point,
    xu: Point,
    scale: f64,
}

impl Catenoid {
    /// Catenoid about the third coordinate axis in `R^3`, waist through `(c, 0, 0)`.
    pub fn new(c: f64) -> Result<Self> {
        Self::with_axis(c, unit_axis(3, 2))
    }

    pub fn with_axis(c: f64, axis: Point) -> Result<Self> {
        if axis.len() != 3 {
            return Err(Error::DimensionMismatch { expected: 3, got: axis.len() });
        }
        let norm = axis.norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidArgument("catenoid axis must be nonzero".into()));
        }
        let axis = axis / norm;
        let z1 = catenoid_height(c)?;
        let (e1, e2) = if (axis[2] - 1.0).abs() < 1e-15 {
            (unit_axis(3, 0), unit_axis(3, 1))
        } else {
            let comp = orthogonal_complement(std::slice::from_ref(&axis), 3);
            let e1: Point = comp.column(0).into_owned();
            let e2 = axis.cross(&e1);
            (e1, e2)
        };
        Ok(Catenoid { c, z1, axis, e1, e2 })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn z1(&self) -> f64 {
        self.z1
    }

    pub fn k(&self) -> usize {
        2
    }

    pub fn n(&self) -> usize {
        3
    }

    /// `2 pi c [z1 + (c / 2) sinh(2 z1 / c)]`.
    pub fn area(&self) -> f64 {
        let c = self.c;
        2.0 * PI * c * (self.z1 + 0.5 * c * (2.0 * self.z1 / c).sinh())
    }

    pub fn point(&self, z: f64, u: f64) -> Point {
        self.local(z, u).x
    }

    fn local(&self, z: f64, u: f64) -> Local {
        let c = self.c;
        let (st, ct) = (u / c).sin_cos();
        let (sh, ch) = ((z / c).sinh(), (z / c).cosh());
        let radial = &self.e1 * ct + &self.e2 * st;
        let tangential = &self.e2 * ct - &self.e1 * st;
        Local {
            x: &radial * (c * ch) + &self.axis * z,
            xz: &radial * sh + &self.axis,
            xu: tangential * ch,
            scale: ch,
        }
    }

    fn frame_of(l: &Local) -> TangentFrame {
        let a = &l.xz / l.scale;
        let b = &l.xu / l.scale;
        TangentFrame::with_tolerance(nalgebra::DMatrix::from_columns(&[a, b]), 1e-12)
            .expect("catenoid frame is orthonormal by construction")
    }

    pub fn through_point(&self) -> Point {
        self.point(0.0, 0.0)
    }

    /// Parameters of the point of the surface nearest to `y`.
    pub fn nearest_parameters(&self, y: &Point) -> (f64, f64) {
        let rel = y.clone();
        let z0 = rel.dot(&self.axis).clamp(-self.z1, self.z1);
        let theta = rel.dot(&self.e2).atan2(rel.dot(&self.e1));
        let (mut z, mut u) = (z0, self.c * theta);
        for _ in 0..60 {
            let l = self.local(z, u);
            let r = y - &l.x;
            let g = l.scale * l.scale;
            let dz = r.dot(&l.xz) / g;
            let du = r.dot(&l.xu) / g;
            z = (z + dz).clamp(-self.z1, self.z1);
            u += du;
            if dz.abs() + du.abs() < 1e-17 {
                break;
            }
        }
        (z, u)
    }

    pub fn distance_to(&self, y: &Point) -> f64 {
        if y.len() != 3 {
            return f64::INFINITY;
        }
        let (z, u) = self.nearest_parameters(y);
        (y - self.point(z, u)).norm()
    }

    pub fn boundary_points(&self, density: usize) -> Vec<Point> {
        let mut out = Vec::new();
        for z in [-self.z1, self.z1] {
            for (t, _) in circle_rule(4 * density.max(2)) {
                out.push(self.point(z, self.c * t));
            }
        }
        out
    }

    /// Mean-curvature vector magnitude from a second-order difference of the
    /// parameterization, maximized over a `grid x grid` parameter lattice.
    pub fn mean_curvature_sup(&self, grid: usize, h: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..grid {
            let z = -self.z1 + 2.0 * self.z1 * (i as f64 + 0.5) / grid as f64;
            for j in 0..grid {
                let u = self.c * 2.0 * PI * j as f64 / grid as f64;
                let lap = self.point(z + h, u) + self.point(z - h, u) + self.point(z, u + h) + self.point(z, u - h)
                    - self.point(z, u) * 4.0;
                let scale = self.local(z, u).scale;
                worst = worst.max(lap.norm() / (h * h * scale * scale * 2.0));
            }
        }
        worst
    }

    fn ray_exit(&self, z0: f64, phi: f64) -> f64 {
        let (s, c) = phi.sin_cos();
        let mut t = f64::INFINITY;
        if c > 0.0 {
            t = t.min((self.z1 - z0) / c);
        } else if c < 0.0 {
            t = t.min((-self.z1 - z0) / c);
        }
        let half = PI * self.c;
        if s > 0.0 {
            t = t.min(half / s);
        } else if s < 0.0 {
            t = t.min(-half / s);
        }
        t
    }

    /// Parameter radius along direction `phi` at which the surface leaves
    /// `B_r(center)`.
    fn slice_radius(&self, center: &Point, z0: f64, u0: f64, r: f64, phi: f64) -> Result<f64> {
        let (s, c) = phi.sin_cos();
        let f = |rho: f64| (self.point(z0 + rho * c, u0 + rho * s) - center).norm_squared() - r * r;
        let hi = self.ray_exit(z0, phi);
        if !(f(hi) > 0.0) {
            return Err(Error::RadiusTooLarge(r));
        }
        bisect(f, 0.0, hi, 1e-16 * hi.max(1e-300))
    }

    fn center_params(&self, center: &Point) -> Result<(f64, f64)> {
        let (z0, u0) = self.nearest_parameters(center);
        let miss = (center - self.point(z0, u0)).norm();
        if miss > 1e-9 {
            return Err(Error::MissesPoint(miss));
        }
        Ok((z0, u0))
    }

    pub fn samples(&self, exclusion: Option<&Exclusion>, density: usize) -> Result<SampleSet> {
        check_density(density)?;
        let mut samples = Vec::new();
        let push = |z: f64, u: f64, w: f64, samples: &mut Vec<SurfaceSample>| {
            let l = self.local(z, u);
            samples.push(SurfaceSample { frame: Self::frame_of(&l), weight: w * l.scale * l.scale, x: l.x });
        };
        match exclusion {
            None => {
                for (t, wt) in circle_rule(2 * density) {
                    for (z, wz) in gauss_legendre_on(density, -self.z1, self.z1) {
                        push(z, self.c * t, self.c * wt * wz, &mut samples);
                    }
                }
            }
            Some(ex) => {
                let (z0, u0) = self.center_params(&ex.center)?;
                let half = PI * self.c;
                let corners = [(self.z1, u0 + half), (-self.z1, u0 + half), (-self.z1, u0 - half), (self.z1, u0 - half)];
                let mut angles: Vec<f64> = corners.iter().map(|&(z, u)| (u - u0).atan2(z - z0)).collect();
                angles.sort_by(f64::total_cmp);
                for i in 0..4 {
                    let a = angles[i];
                    let b = if i == 3 { angles[0] + 2.0 * PI } else { angles[i + 1] };
                    for (phi, wphi) in gauss_legendre_on(density, a, b) {
                        let rho_in = self.slice_radius(&ex.center, z0, u0, ex.radius, phi)?;
                        let rho_out = self.ray_exit(z0, phi);
                        let (s, c) = phi.sin_cos();
                        for (rho, wrho) in gauss_legendre_on(density, rho_in, rho_out) {
                            push(z0 + rho * c, u0 + rho * s, rho * wrho * wphi, &mut samples);
                        }
                    }
                }
            }
        }
        Ok(SampleSet { samples, unsampled_area: 0.0, exclusion: exclusion.cloned(), slack: 0.0 })
    }

    pub fn slice(&self, center: &Point, r: f64, density: usize) -> Result<Vec<SliceSample>> {
        check_density(density)?;
        let (z0, u0) = self.center_params(center)?;
        let mut out = Vec::new();
        for (phi, w) in circle_rule(8 * density) {
            let rho = self.slice_radius(center, z0, u0, r, phi)?;
            let (s, c) = phi.sin_cos();
            let l = self.local(z0 + rho * c, u0 + rho * s);
            let x_rho = &l.xz * c + &l.xu * s;
            let x_phi = (&l.xu * c - &l.xz * s) * rho;
            let diff = &l.x - center;
            let drho = -diff.dot(&x_phi) / diff.dot(&x_rho);
            let speed = (x_rho * drho + x_phi).norm();
            let tangential = Self::frame_of(&l).project(&diff);
            let conormal = -&tangential / tangential.norm();
            out.push(SliceSample { x: l.x, conormal, weight: speed * w });
        }
        Ok(out)
    }

    /// Cylinder mesh on the exact surface with `resolution` rows (rounded up
    /// to odd) and `4 * resolution` columns.
    pub fn to_mesh(&self, resolution: usize) -> Result<TriMesh> {
        let rows = resolution.max(3) | 1;
        let (mesh, pin) = cylinder_mesh(rows, 4 * resolution.max(3), |s, t| self.point(s * self.z1, self.c * t))?;
        mesh.with_pin(pin, self.through_point())
    }

    /// Cylinder mesh spanning the same boundary circles whose profile is the
    /// parabola through the waist radius; a starting guess for the solver.
    pub fn parabolic_mesh(&self, resolution: usize) -> Result<TriMesh> {
        let rows = resolution.max(3) | 1;
        let rim = (1.0 - self.z1 * self.z1).sqrt();
        let (mesh, pin) = cylinder_mesh(rows, 4 * resolution.max(3), |s, t| {
            let radius = rim + (self.c - rim) * (1.0 - s * s);
            (&self.e1 * t.cos() + &self.e2 * t.sin()) * radius + &self.axis * (s * self.z1)
        })?;
        mesh.with_pin(pin, self.through_point())
    }

    pub fn descriptor(&self) -> SurfaceDescriptor {
        SurfaceDescriptor::Catenoid { c: self.c, z1: self.z1, axis: self.axis.iter().copied().collect() }
    }
}

impl Surface for Catenoid {
    fn k(&self) -> usize {
        2
    }
    fn n(&self) -> usize {
        3
    }
    fn area(&self) -> f64 {
        Catenoid::area(self)
    }
    fn distance_to(&self, y: &Point) -> f64 {
        Catenoid::distance_to(self, y)
    }
    fn samples(&self, exclusion: Option<&Exclusion>, density: usize) -> Result<SampleSet> {
        Catenoid::samples(self, exclusion, density)
    }
    fn slice(&self, center: &Point, r: f64, density: usize) -> Result<Vec<SliceSample>> {
        Catenoid::slice(self, center, r, density)
    }
    fn descriptor(&self) -> SurfaceDescriptor {
        Catenoid::descriptor(self)
    }
}

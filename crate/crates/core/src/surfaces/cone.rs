//! The cone over the Clifford torus `S^1(1/sqrt 2) x S^1(1/sqrt 2)` in `R^4`,
//! a three-dimensional minimal cone with apex at the origin.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use super::{check_density, Exclusion, SampleSet, SliceSample, Surface, SurfaceDescriptor, SurfaceSample};
use crate::error::{Error, Result};
use crate::frame::TangentFrame;
use crate::linalg::{point, Point};
use crate::quadrature::{circle_rule, gauss_legendre_on, unit_ball_volume};

/// Area of the link in `S^3`.
const LINK_AREA: f64 = 2.0 * PI * PI;

#[derive(Debug, Clone)]
pub struct CliffordCone {
    apex_delta: f64,
}

impl Default for CliffordCone {
    fn default() -> Self {
        CliffordCone { apex_delta: 1e-3 }
    }
}

impl CliffordCone {
    /// `apex_delta` is the radius of the apex ball whose volume is added
    /// analytically instead of sampled.
    pub fn new(apex_delta: f64) -> Result<Self> {
        if !(apex_delta > 0.0 && apex_delta < 1.0) {
            return Err(Error::InvalidArgument(format!("apex radius must lie in (0, 1), got {apex_delta}")));
        }
        Ok(CliffordCone { apex_delta })
    }

    pub fn apex_delta(&self) -> f64 {
        self.apex_delta
    }

    pub fn k(&self) -> usize {
        3
    }

    pub fn n(&self) -> usize {
        4
    }

    /// Volume inside the ball of radius `t`: link area times `t^3 / 3`.
    pub fn volume_within(t: f64) -> f64 {
        LINK_AREA * t.powi(3) / 3.0
    }

    pub fn area(&self) -> f64 {
        Self::volume_within(1.0)
    }

    pub fn point(t: f64, a: f64, b: f64) -> Point {
        let s = t * FRAC_1_SQRT_2;
        point(&[s * a.cos(), s * a.sin(), s * b.cos(), s * b.sin()])
    }

    /// Orthonormal frame (radial, a-direction, b-direction).
    pub fn frame_at(a: f64, b: f64) -> TangentFrame {
        let (sa, ca) = a.sin_cos();
        let (sb, cb) = b.sin_cos();
        let h = FRAC_1_SQRT_2;
        TangentFrame::with_tolerance(
            nalgebra::DMatrix::from_column_slice(4, 3, &[h * ca, h * sa, h * cb, h * sb, -sa, ca, 0.0, 0.0, 0.0, 0.0, -sb, cb]),
            1e-12,
        )
        .expect("cone frame is orthonormal by construction")
    }

    pub fn through_point(&self) -> Point {
        Point::zeros(4)
    }

    pub fn distance_to(&self, y: &Point) -> f64 {
        if y.len() != 4 {
            return f64::INFINITY;
        }
        let p = (y[0] * y[0] + y[1] * y[1]).sqrt();
        let q = (y[2] * y[2] + y[3] * y[3]).sqrt();
        (p - q).abs() * FRAC_1_SQRT_2
    }

    /// `pi / 2` at the apex (volume ratio against a flat 3-ball), 1 elsewhere.
    pub fn density_at(&self, y: &Point) -> f64 {
        if y.norm() <= 1e-12 {
            LINK_AREA / 3.0 / unit_ball_volume(3)
        } else {
            1.0
        }
    }

    pub fn boundary_points(&self, density: usize) -> Vec<Point> {
        let rule = circle_rule(2 * density.max(2));
        rule.iter().flat_map(|&(a, _)| rule.iter().map(move |&(b, _)| Self::point(1.0, a, b))).collect()
    }

    fn check_apex(center: &Point) -> Result<()> {
        if center.len() != 4 {
            return Err(Error::DimensionMismatch { expected: 4, got: center.len() });
        }
        if center.norm() > 1e-12 {
            return Err(Error::Unsupported("cone quadrature is centered at the apex only".into()));
        }
        Ok(())
    }

    pub fn samples(&self, exclusion: Option<&Exclusion>, density: usize) -> Result<SampleSet> {
        check_density(density)?;
        let excluded = match exclusion {
            Some(ex) => {
                Self::check_apex(&ex.center)?;
                ex.radius
            }
            None => 0.0,
        };
        let t_lo = excluded.max(self.apex_delta);
        let unsampled = Self::volume_within(t_lo) - Self::volume_within(excluded.min(t_lo));
        let angles = circle_rule(2 * density);
        let mut samples = Vec::with_capacity(density * angles.len() * angles.len());
        if t_lo < 1.0 {
            for &(a, wa) in &angles {
                for &(b, wb) in &angles {
                    let frame = Self::frame_at(a, b);
                    for (t, wt) in gauss_legendre_on(density, t_lo, 1.0) {
                        samples.push(SurfaceSample {
                            x: Self::point(t, a, b),
                            frame: frame.clone(),
                            weight: 0.5 * t * t * wt * wa * wb,
                        });
                    }
                }
            }
        }
        Ok(SampleSet { samples, unsampled_area: unsampled, exclusion: exclusion.cloned(), slack: 0.0 })
    }

    pub fn slice(&self, center: &Point, r: f64, density: usize) -> Result<Vec<SliceSample>> {
        check_density(density)?;
        Self::check_apex(center)?;
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::RadiusTooLarge(r));
        }
        let angles = circle_rule(4 * density);
        let mut out = Vec::with_capacity(angles.len() * angles.len());
        for &(a, wa) in &angles {
            for &(b, wb) in &angles {
                let x = Self::point(r, a, b);
                let conormal = -&x / r;
                out.push(SliceSample { x, conormal, weight: 0.5 * r * r * wa * wb });
            }
        }
        Ok(out)
    }

    pub fn descriptor(&self) -> SurfaceDescriptor {
        SurfaceDescriptor::CliffordCone { apex_delta: self.apex_delta }
    }
}

impl Surface for CliffordCone {
    fn k(&self) -> usize {
        3
    }
    fn n(&self) -> usize {
        4
    }
    fn area(&self) -> f64 {
        CliffordCone::area(self)
    }
    fn distance_to(&self, y: &Point) -> f64 {
        CliffordCone::distance_to(self, y)
    }
    fn samples(&self, exclusion: Option<&Exclusion>, density: usize) -> Result<SampleSet> {
        CliffordCone::samples(self, exclusion, density)
    }
    fn slice(&self, center: &Point, r: f64, density: usize) -> Result<Vec<SliceSample>> {
        CliffordCone::slice(self, center, r, density)
    }
    fn density_at(&self, y: &Point) -> f64 {
        CliffordCone::density_at(self, y)
    }
    fn descriptor(&self) -> SurfaceDescriptor {
        CliffordCone::descriptor(self)
    }
}

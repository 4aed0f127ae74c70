//! Triangle meshes as verifier input.
//!
//! Triangles crossing `∂B_r(y)` are cut along the chord through the two points
//! where their edges meet the sphere; the chords form the discrete slice.

use rayon::prelude::*;

use super::{Exclusion, SampleSet, SliceSample, Surface, SurfaceDescriptor, SurfaceSample};
use crate::error::{Error, Result};
use crate::frame::TangentFrame;
use crate::linalg::Point;
use crate::mesh::{triangle_area, TriMesh, DEGENERATE_AREA};

const MAX_SUBDIVISION: usize = 24;
/// Crossing triangles are split until their diameter is below this fraction
/// of `r`, which bounds the chord sagitta by about `r / 800`.
const CHORD_FRACTION: f64 = 0.1;

/// Closest point of triangle `abc` to `p`, in any ambient dimension.
pub fn closest_point_on_triangle(p: &Point, a: &Point, b: &Point, c: &Point) -> Point {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a.clone();
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b.clone();
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c.clone();
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

fn segment_distance(p: &Point, a: &Point, b: &Point) -> f64 {
    let d = b - a;
    let len_sq = d.norm_squared();
    let t = if len_sq > 0.0 { ((p - a).dot(&d) / len_sq).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + d * t)).norm()
}

/// Point where the segment from `inside` to `outside` leaves the ball.
fn sphere_crossing(center: &Point, r: f64, inside: &Point, outside: &Point) -> Point {
    let d = outside - inside;
    let m = inside - center;
    let a = d.norm_squared();
    let b = m.dot(&d);
    let c = m.norm_squared() - r * r;
    // c <= 0, so the larger root is the exit in [0, 1]; avoid cancellation
    let disc = (b * b - a * c).max(0.0).sqrt();
    let t = if b >= 0.0 { -c / (b + disc) } else { (disc - b) / a };
    inside + d * t.clamp(0.0, 1.0)
}

/// A piece of a mesh triangle outside the exclusion ball.
#[derive(Debug, Clone)]
pub struct Piece {
    pub triangle: usize,
    pub corners: [Point; 3],
}

#[derive(Debug, Clone)]
pub struct Chord {
    pub triangle: usize,
    pub ends: [Point; 2],
}

#[derive(Debug, Clone, Default)]
pub struct ClippedMesh {
    pub pieces: Vec<Piece>,
    pub chords: Vec<Chord>,
    /// Largest sagitta of a chord against its arc of radius `r`.
    pub max_sagitta: f64,
}

fn clip_triangle(t: usize, p: [Point; 3], center: &Point, r: f64, depth: usize, out: &mut ClippedMesh) {
    let inside: Vec<bool> = p.iter().map(|v| (v - center).norm() < r).collect();
    let count = inside.iter().filter(|&&b| b).count();
    let outer_edge_dips = |i: usize, j: usize| segment_distance(center, &p[i], &p[j]) < r;
    let subdivide = |out: &mut ClippedMesh| {
        let m01 = (&p[0] + &p[1]) * 0.5;
        let m12 = (&p[1] + &p[2]) * 0.5;
        let m20 = (&p[2] + &p[0]) * 0.5;
        for q in [
            [p[0].clone(), m01.clone(), m20.clone()],
            [m01.clone(), p[1].clone(), m12.clone()],
            [m20.clone(), m12.clone(), p[2].clone()],
            [m01, m12, m20],
        ] {
            clip_triangle(t, q, center, r, depth + 1, out);
        }
    };
    let diameter = (0..3).map(|i| (&p[i] - &p[(i + 1) % 3]).norm()).fold(0.0, f64::max);
    if (count == 1 || count == 2) && diameter > CHORD_FRACTION * r && depth < MAX_SUBDIVISION {
        subdivide(out);
        return;
    }
    match count {
        3 => {}
        0 => {
            let q = closest_point_on_triangle(center, &p[0], &p[1], &p[2]);
            if (q - center).norm() < r && depth < MAX_SUBDIVISION {
                subdivide(out);
            } else {
                out.pieces.push(Piece { triangle: t, corners: p });
            }
        }
        1 => {
            let i = inside.iter().position(|&b| b).unwrap();
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            if outer_edge_dips(j, k) && depth < MAX_SUBDIVISION {
                subdivide(out);
                return;
            }
            let pj = sphere_crossing(center, r, &p[i], &p[j]);
            let pk = sphere_crossing(center, r, &p[i], &p[k]);
            out.pieces.push(Piece { triangle: t, corners: [pj.clone(), p[j].clone(), p[k].clone()] });
            out.pieces.push(Piece { triangle: t, corners: [pj.clone(), p[k].clone(), pk.clone()] });
            out.chords.push(Chord { triangle: t, ends: [pj, pk] });
        }
        _ => {
            let k = inside.iter().position(|&b| !b).unwrap();
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            let pi = sphere_crossing(center, r, &p[i], &p[k]);
            let pj = sphere_crossing(center, r, &p[j], &p[k]);
            out.pieces.push(Piece { triangle: t, corners: [pi.clone(), pj.clone(), p[k].clone()] });
            out.chords.push(Chord { triangle: t, ends: [pi, pj] });
        }
    }
}

/// Splits the mesh into pieces outside `B_r(center)` and the slice chords.
pub fn clip_mesh(mesh: &TriMesh, center: &Point, r: f64) -> ClippedMesh {
    let parts: Vec<ClippedMesh> = (0..mesh.triangles().len())
        .into_par_iter()
        .map(|t| {
            let [a, b, c] = mesh.corners(t);
            let mut out = ClippedMesh::default();
            clip_triangle(t, [a.clone(), b.clone(), c.clone()], center, r, 0, &mut out);
            out
        })
        .collect();
    let mut all = ClippedMesh::default();
    for part in parts {
        all.pieces.extend(part.pieces);
        all.chords.extend(part.chords);
    }
    all.max_sagitta = all
        .chords
        .iter()
        .map(|c| {
            let half = 0.5 * (&c.ends[0] - &c.ends[1]).norm();
            r - (r * r - half * half).max(0.0).sqrt()
        })
        .fold(0.0, f64::max);
    all
}

const THREE_POINT: [[f64; 3]; 3] = [[2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0], [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0], [1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0]];

fn piece_samples(pieces: &[Piece], frames: &[Option<TangentFrame>]) -> Result<Vec<SurfaceSample>> {
    let mut out = Vec::with_capacity(3 * pieces.len());
    for piece in pieces {
        let [a, b, c] = &piece.corners;
        let area = triangle_area(a, b, c);
        if !(area > DEGENERATE_AREA) {
            continue;
        }
        let frame = frames[piece.triangle].clone().ok_or(Error::DegenerateTriangle(piece.triangle))?;
        for w in THREE_POINT {
            out.push(SurfaceSample { x: a * w[0] + b * w[1] + c * w[2], frame: frame.clone(), weight: area / 3.0 });
        }
    }
    Ok(out)
}

fn triangle_frames(mesh: &TriMesh) -> Vec<Option<TangentFrame>> {
    (0..mesh.triangles().len()).into_par_iter().map(|t| mesh.frame_of_triangle(t).ok()).collect()
}

impl Surface for TriMesh {
    fn k(&self) -> usize {
        2
    }

    fn n(&self) -> usize {
        self.ambient_dim()
    }

    fn area(&self) -> f64 {
        TriMesh::area(self)
    }

    fn distance_to(&self, y: &Point) -> f64 {
        if y.len() != self.ambient_dim() {
            return f64::INFINITY;
        }
        let d: Vec<f64> = (0..self.triangles().len())
            .into_par_iter()
            .map(|t| {
                let [a, b, c] = self.corners(t);
                (closest_point_on_triangle(y, a, b, c) - y).norm()
            })
            .collect();
        d.into_iter().fold(f64::INFINITY, f64::min)
    }

    fn samples(&self, exclusion: Option<&Exclusion>, _density: usize) -> Result<SampleSet> {
        let frames = triangle_frames(self);
        let (pieces, slack) = match exclusion {
            None => {
                let pieces = (0..self.triangles().len())
                    .map(|t| {
                        let [a, b, c] = self.corners(t);
                        Piece { triangle: t, corners: [a.clone(), b.clone(), c.clone()] }
                    })
                    .collect::<Vec<_>>();
                (pieces, 0.0)
            }
            Some(ex) => {
                let clipped = clip_mesh(self, &ex.center, ex.radius);
                (clipped.pieces, clipped.max_sagitta)
            }
        };
        Ok(SampleSet { samples: piece_samples(&pieces, &frames)?, unsampled_area: 0.0, exclusion: exclusion.cloned(), slack })
    }

    fn slice(&self, center: &Point, r: f64, _density: usize) -> Result<Vec<SliceSample>> {
        let clipped = clip_mesh(self, center, r);
        if clipped.chords.is_empty() {
            return Err(Error::InvalidArgument(format!("sphere of radius {r} does not cut the mesh")));
        }
        let mut out = Vec::with_capacity(clipped.chords.len());
        for chord in &clipped.chords {
            let frame = self.frame_of_triangle(chord.triangle)?;
            let length = (&chord.ends[0] - &chord.ends[1]).norm();
            if length == 0.0 {
                continue;
            }
            let mid = (&chord.ends[0] + &chord.ends[1]) * 0.5;
            let inward = frame.project(&(center - &mid));
            let norm = inward.norm();
            if !(norm > 0.0) {
                return Err(Error::DegenerateTriangle(chord.triangle));
            }
            out.push(SliceSample { x: mid, conormal: inward / norm, weight: length });
        }
        Ok(out)
    }

    fn valid_r_min(&self, y: &Point) -> f64 {
        let near = self.nearest_vertex_distance(y);
        self.local_edge_length(y, near + 1e-12)
    }

    fn is_discrete(&self) -> bool {
        true
    }

    fn descriptor(&self) -> SurfaceDescriptor {
        SurfaceDescriptor::Mesh {
            vertices: self.vertices().len(),
            triangles: self.triangles().len(),
            n: self.ambient_dim(),
            source: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::point;
    use crate::mesh::{disk_mesh, DiskMeshSpec};
    use std::f64::consts::PI;

    fn disk(rings: usize) -> TriMesh {
        let frame = TangentFrame::coordinate(3, &[0, 1]).unwrap();
        disk_mesh(&DiskMeshSpec { center: point(&[0.0, 0.0, 0.6]), frame, rings }).unwrap()
    }

    #[test]
    fn closest_point_regions() {
        let a = point(&[0.0, 0.0, 0.0]);
        let b = point(&[1.0, 0.0, 0.0]);
        let c = point(&[0.0, 1.0, 0.0]);
        let q = closest_point_on_triangle(&point(&[0.2, 0.2, 3.0]), &a, &b, &c);
        assert!((q - point(&[0.2, 0.2, 0.0])).norm() < 1e-15);
        let q = closest_point_on_triangle(&point(&[2.0, 2.0, 0.0]), &a, &b, &c);
        assert!((q - point(&[0.5, 0.5, 0.0])).norm() < 1e-15);
        let q = closest_point_on_triangle(&point(&[-1.0, -1.0, 1.0]), &a, &b, &c);
        assert_eq!(q, a);
    }

    #[test]
    fn clipped_area_and_slice_length() {
        let mesh = disk(24);
        let y = point(&[0.0, 0.0, 0.6]);
        let r = 0.05;
        let set = mesh.samples(Some(&Exclusion { center: y.clone(), radius: r }), 0).unwrap();
        set.check_exclusion().unwrap();
        let expected = mesh.area() - PI * r * r;
        assert!((set.area() - expected).abs() < 2e-3 * PI * r * r);
        let len: f64 = mesh.slice(&y, r, 0).unwrap().iter().map(|s| s.weight).sum();
        assert!((len - 2.0 * PI * r).abs() < 2e-2 * 2.0 * PI * r);
    }

    #[test]
    fn sphere_inside_one_triangle_is_subdivided() {
        let mesh = TriMesh::new(
            vec![point(&[-0.5, -0.5, 0.0]), point(&[0.5, -0.5, 0.0]), point(&[0.0, 0.5, 0.0])],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let c = point(&[0.0, -0.1, 0.0]);
        let clipped = clip_mesh(&mesh, &c, 0.1);
        let removed = mesh.area() - clipped.pieces.iter().map(|p| triangle_area(&p.corners[0], &p.corners[1], &p.corners[2])).sum::<f64>();
        assert!((removed - PI * 0.01).abs() < 0.05 * PI * 0.01);
        assert!(!clipped.chords.is_empty());
    }

    #[test]
    fn distance_to_mesh() {
        let mesh = disk(4);
        assert!(mesh.distance_to(&point(&[0.1, 0.1, 0.6])) < 1e-15);
        assert!((mesh.distance_to(&point(&[0.1, 0.1, 0.5])) - 0.1).abs() < 1e-15);
    }
}

//! Mesh generators for the k = 2 test problems.

use std::f64::consts::PI;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TriMesh;
use crate::error::{Error, Result};
use crate::frame::TangentFrame;
use crate::linalg::Point;

/// A ring triangulation of the intersection of a 2-plane with the unit ball,
/// centered at `center` (a point of the plane inside the ball).
#[derive(Debug, Clone)]
pub struct DiskMeshSpec {
    pub center: Point,
    pub frame: TangentFrame,
    /// Number of rings; ring `i` carries `6 i` vertices.
    pub rings: usize,
}

/// Builds the disk mesh. Vertex 0 is the center and is pinned to it; the
/// outer ring lies on the unit sphere.
pub fn disk_mesh(spec: &DiskMeshSpec) -> Result<TriMesh> {
    if spec.frame.k() != 2 {
        return Err(Error::Unsupported("disk meshes are two-dimensional".into()));
    }
    if spec.rings == 0 {
        return Err(Error::InvalidArgument("disk mesh needs at least one ring".into()));
    }
    let o = &spec.center;
    let slack = (1.0 - o.norm_squared()).max(0.0);
    if o.len() != spec.frame.n() || !(slack > 0.0) {
        return Err(Error::InvalidArgument("disk center must lie inside the unit ball".into()));
    }
    let (e1, e2) = (spec.frame.vector(0), spec.frame.vector(1));
    let m = spec.rings;
    let mut vertices = vec![o.clone()];
    let mut ring_start = vec![0usize];
    for i in 1..=m {
        ring_start.push(vertices.len());
        let count = 6 * i;
        for j in 0..count {
            let a = 2.0 * PI * j as f64 / count as f64;
            let u = &e1 * a.cos() + &e2 * a.sin();
            let ou = o.dot(&u);
            let reach = -ou + (ou * ou + slack).sqrt();
            let mut v = o + &u * (reach * i as f64 / m as f64);
            if i == m {
                v /= v.norm();
            }
            vertices.push(v);
        }
    }
    let mut triangles = Vec::with_capacity(6 * m * m);
    for i in 1..=m {
        let (inner_start, inner_count) = (ring_start[i - 1], if i == 1 { 1 } else { 6 * (i - 1) });
        let (outer_start, outer_count) = (ring_start[i], 6 * i);
        zip_rings(inner_start, inner_count, outer_start, outer_count, &mut triangles);
    }
    let mesh = TriMesh::new(vertices, triangles)?;
    let center = o.clone();
    mesh.with_pin(0, center)
}

/// Stitches two concentric rings whose vertices are equally spaced in angle
/// starting at angle zero.
fn zip_rings(a0: usize, na: usize, b0: usize, nb: usize, out: &mut Vec<[usize; 3]>) {
    if na == 1 {
        for j in 0..nb {
            out.push([a0, b0 + j, b0 + (j + 1) % nb]);
        }
        return;
    }
    let (mut i, mut j) = (0usize, 0usize);
    while i < na || j < nb {
        let next_a = (i + 1) as f64 / na as f64;
        let next_b = (j + 1) as f64 / nb as f64;
        if j >= nb || (i < na && next_a < next_b) {
            out.push([a0 + i % na, b0 + j % nb, a0 + (i + 1) % na]);
            i += 1;
        } else {
            out.push([a0 + i % na, b0 + j % nb, b0 + (j + 1) % nb]);
            j += 1;
        }
    }
}

/// Cylinder-topology grid with `rows` latitude rows (odd, so a middle row
/// exists) and `cols` vertices per row. `position(s, theta)` maps `s` in
/// `[-1, 1]` and the angle to a point; the first and last rows are projected
/// onto the unit sphere. Returns the mesh and the index of the vertex at
/// `(s, theta) = (0, 0)`.
pub fn cylinder_mesh<F: Fn(f64, f64) -> Point>(rows: usize, cols: usize, position: F) -> Result<(TriMesh, usize)> {
    if rows < 3 || rows % 2 == 0 || cols < 3 {
        return Err(Error::InvalidArgument("cylinder mesh needs an odd row count >= 3 and >= 3 columns".into()));
    }
    let mut vertices = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        let s = -1.0 + 2.0 * i as f64 / (rows - 1) as f64;
        for j in 0..cols {
            let theta = 2.0 * PI * j as f64 / cols as f64;
            let mut v = position(s, theta);
            if i == 0 || i == rows - 1 {
                v /= v.norm();
            }
            vertices.push(v);
        }
    }
    let idx = |i: usize, j: usize| i * cols + j % cols;
    let mut triangles = Vec::with_capacity(2 * (rows - 1) * cols);
    for i in 0..rows - 1 {
        for j in 0..cols {
            if (i + j) % 2 == 0 {
                triangles.push([idx(i, j), idx(i, j + 1), idx(i + 1, j + 1)]);
                triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i + 1, j)]);
            } else {
                triangles.push([idx(i, j), idx(i, j + 1), idx(i + 1, j)]);
                triangles.push([idx(i, j + 1), idx(i + 1, j + 1), idx(i + 1, j)]);
            }
        }
    }
    let mesh = TriMesh::new(vertices, triangles)?;
    Ok((mesh, idx(rows / 2, 0)))
}

/// Uniform random displacement in `[-amplitude, amplitude]` per coordinate
/// for every free vertex.
pub fn jitter_interior(mesh: &TriMesh, amplitude: f64, seed: u64) -> TriMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = mesh.clone();
    let moved: Vec<Point> = mesh
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let d = Point::from_fn(v.len(), |_, _| rng.random_range(-amplitude..=amplitude));
            if mesh.is_fixed(i) {
                v.clone()
            } else {
                v + d
            }
        })
        .collect();
    out.set_vertices(moved);
    out
}

/// Displaces every free vertex along `direction` by a uniform amount in
/// `[-amplitude, amplitude]`.
pub fn jitter_along(mesh: &TriMesh, direction: &Point, amplitude: f64, seed: u64) -> TriMesh {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = direction / direction.norm();
    let mut out = mesh.clone();
    let moved: Vec<Point> = mesh
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let t: f64 = rng.random_range(-amplitude..=amplitude);
            if mesh.is_fixed(i) {
                v.clone()
            } else {
                v + &unit * t
            }
        })
        .collect();
    out.set_vertices(moved);
    out
}

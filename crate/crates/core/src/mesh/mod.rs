//! Triangle meshes in `R^n` with a sphere-constrained boundary and an
//! optional pinned vertex.

mod build;
mod io;
mod solver;

pub use build::{cylinder_mesh, disk_mesh, jitter_along, jitter_interior, DiskMeshSpec};
pub use io::{apply_sidecar, load_mesh, save_mesh, sidecar_path, to_obj_string, LoadOptions, Sidecar, SidecarPin};
pub use solver::{minimize, SolveReport, SolverConfig};

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::TangentFrame;
use crate::linalg::Point;

/// Triangles with area below this are treated as degenerate.
pub const DEGENERATE_AREA: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pin {
    pub index: usize,
    pub target: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    pinned: Option<Pin>,
}

/// A topological problem found while validating connectivity.
#[derive(Debug, Clone)]
pub(crate) struct Defect {
    pub triangle: Option<usize>,
    pub vertex: Option<usize>,
    pub message: String,
}

impl From<Defect> for Error {
    fn from(d: Defect) -> Self {
        match (d.triangle, d.vertex) {
            (Some(t), _) => Error::InvalidMesh(format!("triangle {t}: {}", d.message)),
            (None, Some(v)) => Error::InvalidMesh(format!("vertex {v}: {}", d.message)),
            (None, None) => Error::InvalidMesh(d.message),
        }
    }
}

/// Checks index ranges, edge-manifoldness, consistent orientation and that
/// every boundary vertex lies on exactly one boundary loop. Returns the
/// per-vertex boundary flags.
pub(crate) fn validate_topology(vertex_count: usize, triangles: &[[usize; 3]]) -> std::result::Result<Vec<bool>, Defect> {
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for (t, tri) in triangles.iter().enumerate() {
        for &v in tri {
            if v >= vertex_count {
                return Err(Defect { triangle: Some(t), vertex: None, message: format!("vertex index {v} out of range") });
            }
        }
        if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
            return Err(Defect { triangle: Some(t), vertex: None, message: "repeated vertex".into() });
        }
        for e in 0..3 {
            let key = (tri[e], tri[(e + 1) % 3]);
            if directed.insert(key, t).is_some() {
                return Err(Defect {
                    triangle: Some(t),
                    vertex: None,
                    message: format!("edge ({}, {}) is non-manifold or inconsistently oriented", key.0, key.1),
                });
            }
        }
    }
    let mut boundary_degree = vec![0usize; vertex_count];
    for &(a, b) in directed.keys() {
        if !directed.contains_key(&(b, a)) {
            boundary_degree[a] += 1;
            boundary_degree[b] += 1;
        }
    }
    let mut used = vec![false; vertex_count];
    for tri in triangles {
        for &v in tri {
            used[v] = true;
        }
    }
    for v in 0..vertex_count {
        if !used[v] {
            return Err(Defect { triangle: None, vertex: Some(v), message: "not used by any triangle".into() });
        }
        if boundary_degree[v] != 0 && boundary_degree[v] != 2 {
            return Err(Defect {
                triangle: None,
                vertex: Some(v),
                message: format!("touches {} boundary edges (non-manifold boundary)", boundary_degree[v]),
            });
        }
    }
    Ok(boundary_degree.iter().map(|&d| d > 0).collect())
}

pub fn triangle_area(a: &Point, b: &Point, c: &Point) -> f64 {
    let u = b - a;
    let v = c - a;
    if u.len() == 3 {
        let cross = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
        0.5 * (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt()
    } else {
        let uu = u.norm_squared();
        let vv = v.norm_squared();
        let uv = u.dot(&v);
        0.5 * (uu * vv - uv * uv).max(0.0).sqrt()
    }
}

/// Cotangent of the angle between `u` and `v`.
pub(crate) fn cotangent(u: &Point, v: &Point) -> f64 {
    let dot = u.dot(v);
    let cross_sq = (u.norm_squared() * v.norm_squared() - dot * dot).max(0.0);
    dot / cross_sq.sqrt()
}

impl TriMesh {
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let n = vertices.first().map(|v| v.len()).ok_or_else(|| Error::InvalidMesh("no vertices".into()))?;
        if let Some(bad) = vertices.iter().find(|v| v.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: bad.len() });
        }
        if vertices.iter().any(|v| v.iter().any(|c| !c.is_finite())) {
            return Err(Error::InvalidMesh("non-finite vertex coordinate".into()));
        }
        let boundary = validate_topology(vertices.len(), &triangles)?;
        Ok(TriMesh { vertices, triangles, boundary, pinned: None })
    }

    /// Pins `index` to `target` and moves it there.
    pub fn with_pin(mut self, index: usize, target: Point) -> Result<Self> {
        if index >= self.vertices.len() {
            return Err(Error::InvalidMesh(format!("pinned vertex {index} out of range")));
        }
        if target.len() != self.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), got: target.len() });
        }
        if self.boundary[index] {
            return Err(Error::InvalidMesh(format!("pinned vertex {index} lies on the boundary")));
        }
        self.vertices[index] = target.clone();
        self.pinned = Some(Pin { index, target });
        Ok(self)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn pinned(&self) -> Option<&Pin> {
        self.pinned.as_ref()
    }

    pub fn ambient_dim(&self) -> usize {
        self.vertices[0].len()
    }

    pub fn is_fixed(&self, v: usize) -> bool {
        self.boundary[v] || self.pinned.as_ref().is_some_and(|p| p.index == v)
    }

    pub(crate) fn set_vertices(&mut self, vertices: Vec<Point>) {
        debug_assert_eq!(vertices.len(), self.vertices.len());
        self.vertices = vertices;
    }

    pub(crate) fn set_triangles(&mut self, triangles: Vec<[usize; 3]>) {
        self.triangles = triangles;
    }

    pub fn corners(&self, t: usize) -> [&Point; 3] {
        let [a, b, c] = self.triangles[t];
        [&self.vertices[a], &self.vertices[b], &self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        triangle_area(a, b, c)
    }

    /// Sum of triangle areas. Degenerate triangles contribute zero; see
    /// [`TriMesh::degenerate_triangles`].
    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn degenerate_triangles(&self) -> Vec<usize> {
        (0..self.triangles.len()).filter(|&t| !(self.triangle_area(t) > DEGENERATE_AREA)).collect()
    }

    /// Orthonormal frame of the triangle's plane, from the two edges leaving
    /// its first corner.
    pub fn frame_of_triangle(&self, t: usize) -> Result<TangentFrame> {
        self.frame_of_triangle_at(t, 0)
    }

    /// As [`TriMesh::frame_of_triangle`], using the edges leaving `corner`.
    pub fn frame_of_triangle_at(&self, t: usize, corner: usize) -> Result<TangentFrame> {
        let p = self.corners(t);
        let o = p[corner % 3];
        let e1 = p[(corner + 1) % 3] - o;
        let e2 = p[(corner + 2) % 3] - o;
        if !(self.triangle_area(t) > DEGENERATE_AREA) {
            return Err(Error::DegenerateTriangle(t));
        }
        TangentFrame::orthonormalized(&[e1, e2]).map_err(|_| Error::DegenerateTriangle(t))
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> f64 {
        let mut best = std::f64::consts::PI;
        for t in 0..self.triangles.len() {
            let p = self.corners(t);
            for i in 0..3 {
                let u = p[(i + 1) % 3] - p[i];
                let v = p[(i + 2) % 3] - p[i];
                let c = (u.dot(&v) / (u.norm() * v.norm())).clamp(-1.0, 1.0);
                let angle = c.acos();
                if angle.is_nan() {
                    return 0.0;
                }
                best = best.min(angle);
            }
        }
        best
    }

    /// Largest `| |v| - 1 |` over boundary vertices.
    pub fn max_sphere_deviation(&self) -> f64 {
        self.vertices
            .iter()
            .zip(&self.boundary)
            .filter(|(_, &b)| b)
            .map(|(v, _)| (v.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Displacement of the pinned vertex from its target (zero when unpinned).
    pub fn pin_displacement(&self) -> f64 {
        self.pinned.as_ref().map_or(0.0, |p| (&self.vertices[p.index] - &p.target).norm())
    }

    /// Fails if a vertex lies outside the closed unit ball by more than `tol`.
    pub fn check_in_ball(&self, tol: f64) -> Result<()> {
        for v in &self.vertices {
            let r = v.norm();
            if r > 1.0 + tol {
                return Err(Error::OutsideDomain(r));
            }
        }
        Ok(())
    }

    /// Undirected edges with the (one or two) triangles on each side.
    pub fn edge_map(&self) -> BTreeMap<(usize, usize), Vec<usize>> {
        let mut map: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for e in 0..3 {
                let (a, b) = (tri[e], tri[(e + 1) % 3]);
                map.entry((a.min(b), a.max(b))).or_default().push(t);
            }
        }
        map
    }

    pub fn boundary_loop_count(&self) -> usize {
        let edges = self.edge_map();
        let mut next: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (&(a, b), tris) in &edges {
            if tris.len() == 1 {
                next.entry(a).or_default().push(b);
                next.entry(b).or_default().push(a);
            }
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut loops = 0;
        let starts: Vec<usize> = next.keys().copied().collect();
        for start in starts {
            if seen[start] {
                continue;
            }
            loops += 1;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                if std::mem::replace(&mut seen[v], true) {
                    continue;
                }
                stack.extend(next[&v].iter().copied().filter(|&w| !seen[w]));
            }
        }
        loops
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edge_map()
            .keys()
            .map(|&(a, b)| (&self.vertices[a] - &self.vertices[b]).norm())
            .fold(0.0, f64::max)
    }

    /// Longest edge incident to a vertex within `radius` of `center`.
    pub fn local_edge_length(&self, center: &Point, radius: f64) -> f64 {
        self.edge_map()
            .keys()
            .filter(|&&(a, b)| {
                (&self.vertices[a] - center).norm() <= radius || (&self.vertices[b] - center).norm() <= radius
            })
            .map(|&(a, b)| (&self.vertices[a] - &self.vertices[b]).norm())
            .fold(0.0, f64::max)
    }

    /// Distance from `p` to the nearest vertex.
    pub fn nearest_vertex_distance(&self, p: &Point) -> f64 {
        self.vertices.iter().map(|v| (v - p).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Cotangent weight `(cot alpha + cot beta) / 2` for every undirected edge.
    pub(crate) fn cotangent_weights(&self) -> BTreeMap<(usize, usize), f64> {
        let mut w: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for tri in &self.triangles {
            for i in 0..3 {
                let o = tri[i];
                let a = tri[(i + 1) % 3];
                let b = tri[(i + 2) % 3];
                let u = &self.vertices[a] - &self.vertices[o];
                let v = &self.vertices[b] - &self.vertices[o];
                *w.entry((a.min(b), a.max(b))).or_insert(0.0) += 0.5 * cotangent(&u, &v);
            }
        }
        w
    }

    /// Area gradient at every vertex, `1/2 sum_j (cot a + cot b)(v_i - v_j)`.
    pub fn area_gradient(&self) -> Vec<Point> {
        let n = self.ambient_dim();
        let mut g = vec![Point::zeros(n); self.vertices.len()];
        for (&(a, b), &w) in &self.cotangent_weights() {
            let d = (&self.vertices[a] - &self.vertices[b]) * w;
            g[a] += &d;
            g[b] -= &d;
        }
        g
    }

    /// Largest area-gradient norm over free (non-boundary, non-pinned) vertices.
    pub fn free_gradient_norm(&self) -> f64 {
        self.area_gradient()
            .iter()
            .enumerate()
            .filter(|(i, _)| !self.is_fixed(*i))
            .map(|(_, g)| g.norm())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::CalibrationField;
    use crate::linalg::point;

    fn right_triangle() -> TriMesh {
        TriMesh::new(vec![point(&[0.0, 0.0, 0.0]), point(&[1.0, 0.0, 0.0]), point(&[0.0, 1.0, 0.0])], vec![[0, 1, 2]])
            .unwrap()
    }

    #[test]
    fn single_triangle_area() {
        assert!((right_triangle().area() - 0.5).abs() < 1e-16);
    }

    #[test]
    fn gram_area_in_higher_dimension() {
        let m = TriMesh::new(
            vec![point(&[0.0, 0.0, 0.0, 0.0]), point(&[1.0, 0.0, 0.0, 1.0]), point(&[0.0, 1.0, 0.0, 0.0])],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert!((m.area() - 0.5 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn planar_triangle_frame() {
        let m = TriMesh::new(vec![point(&[0.1, 0.2, 0.6]), point(&[0.5, -0.1, 0.6]), point(&[0.0, 0.7, 0.6])], vec![[0, 1, 2]])
            .unwrap();
        let f = m.frame_of_triangle(0).unwrap();
        assert_eq!(f.vector(0)[2], 0.0);
        assert_eq!(f.vector(1)[2], 0.0);
    }

    #[test]
    fn frame_spans_triangle_and_trace_is_corner_independent() {
        let m = TriMesh::new(vec![point(&[0.1, 0.2, 0.3]), point(&[0.5, -0.1, 0.2]), point(&[0.0, 0.4, -0.3])], vec![[0, 1, 2]])
            .unwrap();
        let p = m.corners(0);
        let u = p[1] - p[0];
        let v = p[2] - p[0];
        let normal = point(&[u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]]).normalize();
        let field = CalibrationField::new(point(&[0.1, -0.2, 0.3]), 2).unwrap();
        let x = point(&[0.2, 0.15, 0.0]);
        let reference = field.divergence_trace(&x, &m.frame_of_triangle(0).unwrap()).unwrap();
        for corner in 0..3 {
            let f = m.frame_of_triangle_at(0, corner).unwrap();
            assert!(f.vector(0).dot(&normal).abs() < 1e-12);
            assert!(f.vector(1).dot(&normal).abs() < 1e-12);
            let d = field.divergence_trace(&x, &f).unwrap();
            assert!((d - reference).abs() <= 1e-12 * reference.abs().max(1.0));
        }
    }

    #[test]
    fn degenerate_triangle_flagged() {
        let m = TriMesh::new(vec![point(&[0.0, 0.0, 0.0]), point(&[1.0, 0.0, 0.0]), point(&[2.0, 0.0, 0.0])], vec![[0, 1, 2]])
            .unwrap();
        assert_eq!(m.area(), 0.0);
        assert_eq!(m.degenerate_triangles(), vec![0]);
        assert!(matches!(m.frame_of_triangle(0), Err(Error::DegenerateTriangle(0))));
    }

    #[test]
    fn non_manifold_edge_rejected() {
        let v = vec![
            point(&[0.0, 0.0, 0.0]),
            point(&[1.0, 0.0, 0.0]),
            point(&[0.0, 1.0, 0.0]),
            point(&[0.0, -1.0, 0.0]),
            point(&[0.0, 0.0, 1.0]),
        ];
        let err = TriMesh::new(v, vec![[0, 1, 2], [1, 0, 3], [0, 1, 4]]).unwrap_err();
        assert!(matches!(err, Error::InvalidMesh(_)));
    }

    #[test]
    fn out_of_range_index_rejected() {
        let v = vec![point(&[0.0, 0.0, 0.0]), point(&[1.0, 0.0, 0.0]), point(&[0.0, 1.0, 0.0])];
        assert!(TriMesh::new(v, vec![[0, 1, 3]]).is_err());
    }

    #[test]
    fn pin_must_be_interior() {
        assert!(right_triangle().with_pin(0, point(&[0.0, 0.0, 0.0])).is_err());
    }
}

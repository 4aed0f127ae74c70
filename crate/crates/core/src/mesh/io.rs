//! OBJ meshes with a JSON sidecar for boundary and pinned-vertex metadata.
//!
//! Vertices are written as `v` lines with 17 significant digits. Meshes in an
//! ambient dimension other than three carry a `# ambient <n>` header and `n`
//! coordinates per `v` line. Faces use 1-based indices. The sidecar lives at
//! `<mesh path>.json` and also uses 1-based vertex indices.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{validate_topology, TriMesh};
use crate::error::{Error, Result};
use crate::linalg::Point;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarPin {
    pub index: usize,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub boundary: Vec<usize>,
    pub pinned: Option<SidecarPin>,
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Reject vertices outside the closed unit ball (with 1e-9 slack).
    pub check_ball: bool,
    /// Explicit sidecar path; defaults to `<mesh path>.json` when it exists.
    pub sidecar: Option<PathBuf>,
}

pub fn sidecar_path(mesh_path: &Path) -> PathBuf {
    let mut s = mesh_path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn save_mesh(mesh: &TriMesh, path: &Path) -> Result<()> {
    fs::write(path, to_obj_string(mesh))?;
    let sidecar = Sidecar {
        boundary: (0..mesh.vertices().len()).filter(|&i| mesh.is_boundary(i)).map(|i| i + 1).collect(),
        pinned: mesh.pinned().map(|p| SidecarPin { index: p.index + 1, y: p.target.iter().copied().collect() }),
    };
    fs::write(sidecar_path(path), crate::json::to_json_string(&sidecar)?)?;
    Ok(())
}

pub fn to_obj_string(mesh: &TriMesh) -> String {
    let n = mesh.ambient_dim();
    let mut out = String::from("# areabound triangle mesh\n");
    if n != 3 {
        writeln!(out, "# ambient {n}").unwrap();
    }
    for v in mesh.vertices() {
        out.push('v');
        for c in v.iter() {
            write!(out, " {c:.16e}").unwrap();
        }
        out.push('\n');
    }
    for t in mesh.triangles() {
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).unwrap();
    }
    out
}

pub fn load_mesh(path: &Path, options: &LoadOptions) -> Result<TriMesh> {
    let text = fs::read_to_string(path)?;
    let parsed = parse_obj(&text)?;
    let mut mesh = parsed.into_mesh(options.check_ball)?;
    let sidecar = options.sidecar.clone().or_else(|| Some(sidecar_path(path)).filter(|p| p.exists()));
    if let Some(sc_path) = sidecar {
        let sc: Sidecar = serde_json::from_str(&fs::read_to_string(&sc_path)?)?;
        mesh = apply_sidecar(mesh, &sc)?;
    }
    Ok(mesh)
}

pub fn apply_sidecar(mesh: TriMesh, sc: &Sidecar) -> Result<TriMesh> {
    let count = mesh.vertices().len();
    let mut flags = vec![false; count];
    for &i in &sc.boundary {
        if i == 0 || i > count {
            return Err(Error::InvalidMesh(format!("sidecar boundary index {i} out of range (1-based)")));
        }
        flags[i - 1] = true;
    }
    if flags != mesh.boundary_flags() {
        return Err(Error::InvalidMesh("sidecar boundary list disagrees with the mesh boundary".into()));
    }
    match &sc.pinned {
        None => Ok(mesh),
        Some(pin) => {
            if pin.index == 0 || pin.index > count {
                return Err(Error::InvalidMesh(format!("sidecar pinned index {} out of range (1-based)", pin.index)));
            }
            mesh.with_pin(pin.index - 1, Point::from_vec(pin.y.clone()))
        }
    }
}

struct ParsedObj {
    vertices: Vec<Point>,
    vertex_lines: Vec<usize>,
    triangles: Vec<[usize; 3]>,
    face_lines: Vec<usize>,
}

impl ParsedObj {
    fn into_mesh(self, check_ball: bool) -> Result<TriMesh> {
        if check_ball {
            for (v, &line) in self.vertices.iter().zip(&self.vertex_lines) {
                let r = v.norm();
                if r > 1.0 + 1e-9 {
                    return Err(Error::Parse { line, msg: format!("vertex outside the unit ball (|v| = {r})") });
                }
            }
        }
        if let Err(d) = validate_topology(self.vertices.len(), &self.triangles) {
            let line = match (d.triangle, d.vertex) {
                (Some(t), _) => self.face_lines[t],
                (None, Some(v)) => self.vertex_lines[v],
                _ => 0,
            };
            return Err(Error::Parse { line, msg: d.message });
        }
        TriMesh::new(self.vertices, self.triangles)
    }
}

fn parse_obj(text: &str) -> Result<ParsedObj> {
    let mut dim: Option<usize> = None;
    let mut out = ParsedObj { vertices: vec![], vertex_lines: vec![], triangles: vec![], face_lines: vec![] };
    let mut pending_faces: Vec<(usize, [i64; 3])> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let trimmed = raw.trim();
        if let Some(comment) = trimmed.strip_prefix('#') {
            let mut words = comment.split_whitespace();
            if words.next() == Some("ambient") {
                let value = words.next().and_then(|w| w.parse::<usize>().ok());
                match value {
                    Some(n) if n >= 2 && out.vertices.is_empty() => dim = Some(n),
                    _ => return Err(Error::Parse { line, msg: "malformed or misplaced '# ambient n' header".into() }),
                }
            }
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        match tokens.next() {
            None => {}
            Some("v") => {
                let n = *dim.get_or_insert(3);
                let coords: std::result::Result<Vec<f64>, _> = tokens.map(str::parse::<f64>).collect();
                let coords = coords.map_err(|e| Error::Parse { line, msg: format!("bad coordinate: {e}") })?;
                if coords.len() != n {
                    return Err(Error::Parse { line, msg: format!("expected {n} coordinates, found {}", coords.len()) });
                }
                if coords.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Parse { line, msg: "non-finite coordinate".into() });
                }
                out.vertices.push(Point::from_vec(coords));
                out.vertex_lines.push(line);
            }
            Some("f") => {
                let idx: Vec<&str> = tokens.collect();
                if idx.len() != 3 {
                    return Err(Error::Parse { line, msg: format!("only triangles are supported, found {} indices", idx.len()) });
                }
                let mut tri = [0i64; 3];
                for (slot, tok) in tri.iter_mut().zip(&idx) {
                    let head = tok.split('/').next().unwrap_or("");
                    *slot = head.parse::<i64>().map_err(|_| Error::Parse { line, msg: format!("bad face index '{tok}'") })?;
                }
                pending_faces.push((line, tri));
            }
            Some(_) => {}
        }
    }
    let count = out.vertices.len() as i64;
    for (line, tri) in pending_faces {
        let mut t = [0usize; 3];
        for (slot, &i) in t.iter_mut().zip(&tri) {
            if i == 0 {
                return Err(Error::Parse { line, msg: "face index 0: OBJ indices are 1-based".into() });
            }
            if i < 0 || i > count {
                return Err(Error::Parse { line, msg: format!("face index {i} out of range 1..={count}") });
            }
            *slot = (i - 1) as usize;
        }
        out.triangles.push(t);
        out.face_lines.push(line);
    }
    if out.vertices.is_empty() {
        return Err(Error::Parse { line: 0, msg: "no vertices".into() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::point;
    use crate::mesh::{disk_mesh, DiskMeshSpec};
    use crate::TangentFrame;

    fn parse_err(text: &str) -> (usize, String) {
        match parse_obj(text).and_then(|p| p.into_mesh(true)) {
            Err(Error::Parse { line, msg }) => (line, msg),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn zero_based_indices_rejected_with_line() {
        let (line, msg) = parse_err("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 0 1 2\n");
        assert_eq!(line, 4);
        assert!(msg.contains("1-based"));
    }

    #[test]
    fn out_of_range_index_reports_line() {
        let (line, _) = parse_err("v 0 0 0\nv 1 0 0\n# c\nv 0 1 0\nf 1 2 3\nf 1 3 9\n");
        assert_eq!(line, 6);
    }

    #[test]
    fn outside_ball_flagged() {
        let (line, msg) = parse_err("v 0 0 0\nv 1.5 0 0\nv 0 1 0\nf 1 2 3\n");
        assert_eq!(line, 2);
        assert!(msg.contains("outside"));
        assert!(parse_obj("v 0 0 0\nv 1.5 0 0\nv 0 1 0\nf 1 2 3\n").unwrap().into_mesh(false).is_ok());
    }

    #[test]
    fn non_manifold_reports_face_line() {
        let text = "v 0 0 0\nv 0.5 0 0\nv 0 0.5 0\nv 0 -0.5 0\nv 0 0 0.5\nf 1 2 3\nf 2 1 4\nf 1 2 5\n";
        let (line, _) = parse_err(text);
        assert_eq!(line, 8);
    }

    #[test]
    fn malformed_vertex_line() {
        let (line, _) = parse_err("v 0 0\n");
        assert_eq!(line, 1);
        let (line, _) = parse_err("v 0 0 zero\n");
        assert_eq!(line, 1);
    }

    #[test]
    fn face_tokens_with_slashes() {
        let p = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nf 1/1 2/1 3/1\n").unwrap();
        assert_eq!(p.triangles, vec![[0, 1, 2]]);
    }

    #[test]
    fn round_trip_in_four_dimensions() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.obj");
        let frame = TangentFrame::coordinate(4, &[0, 3]).unwrap();
        let mesh = disk_mesh(&DiskMeshSpec { center: point(&[0.0, 0.1, 0.2, 0.0]), frame, rings: 3 }).unwrap();
        save_mesh(&mesh, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.contains("# ambient 4"));
        let back = load_mesh(&path, &LoadOptions::default()).unwrap();
        assert_eq!(back, mesh);
    }
}

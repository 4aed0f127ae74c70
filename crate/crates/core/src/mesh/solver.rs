//! Discrete area minimization by iterated cotangent-Laplace solves.
//!
//! Each step replaces the free vertices by the minimizer of the Dirichlet
//! energy measured in the current triangle metric. Boundary vertices stay
//! where they are (they start on the unit sphere) and a pinned vertex never
//! moves.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::TriMesh;
use crate::error::{Error, Result};
use crate::linalg::Point;
use crate::sparse::{conjugate_gradient, CgOutcome, Csr};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Stop once the relative area decrease over `window` iterations drops
    /// below this.
    pub area_rel_tol: f64,
    pub window: usize,
    /// Abort (or remesh) when the smallest triangle angle falls below this.
    pub min_angle_deg: f64,
    pub remesh: bool,
    pub cg_rel_tol: f64,
    pub cg_max_iterations: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iterations: 200,
            area_rel_tol: 1e-10,
            window: 10,
            min_angle_deg: 0.5,
            remesh: false,
            cg_rel_tol: 1e-13,
            cg_max_iterations: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub converged: bool,
    /// Area per iteration, starting with the input mesh.
    pub area_history: Vec<f64>,
    pub final_area: f64,
    pub gradient_norm: f64,
    pub max_sphere_deviation: f64,
    pub pin_displacement: f64,
    pub min_angle_deg: f64,
    /// Boundary sphere deviation and pin displacement after every iteration,
    /// starting with the input mesh.
    pub sphere_deviation_history: Vec<f64>,
    pub pin_displacement_history: Vec<f64>,
    pub edge_flips: usize,
    /// Iterations where the linear solve fell back to clamped weights.
    pub clamped_solves: usize,
    /// Iterations whose step was shortened to protect the minimum angle.
    pub angle_limited_steps: usize,
}

const MAX_HALVINGS: usize = 40;
const STEP_TOL: f64 = 1e-12;

pub fn minimize(mesh: &TriMesh, config: &SolverConfig) -> Result<(TriMesh, SolveReport)> {
    if config.window == 0 {
        return Err(Error::InvalidArgument("solver window must be positive".into()));
    }
    let mut mesh = mesh.clone();
    check_angles(&mut mesh, config, 0)?;
    let threshold = config.min_angle_deg.to_radians();
    let mut history = vec![mesh.area()];
    let mut sphere_history = vec![mesh.max_sphere_deviation()];
    let mut pin_history = vec![mesh.pin_displacement()];
    let mut converged = false;
    let mut flips = 0;
    let mut clamped = 0;
    let mut angle_limited = 0;
    let mut iterations = 0;
    while iterations < config.max_iterations {
        iterations += 1;
        let (target, was_clamped) = laplace_step(&mesh, config)?;
        clamped += usize::from(was_clamped);
        let old = mesh.vertices().to_vec();
        let step_max = old.iter().zip(&target).map(|(a, b)| (b - a).norm()).fold(0.0, f64::max);
        let area_old = *history.last().unwrap();
        let angle_old = mesh.min_angle();
        let mut alpha = 1.0;
        let mut accepted = false;
        let mut shape_blocked = false;
        for _ in 0..MAX_HALVINGS {
            let trial: Vec<Point> = old.iter().zip(&target).map(|(a, b)| a + (b - a) * alpha).collect();
            mesh.set_vertices(trial);
            let descends = mesh.area() <= area_old;
            // a step may not push the smallest angle under the threshold (or
            // lower it further once it is there)
            let angle = mesh.min_angle();
            let shaped = angle >= threshold || angle >= angle_old;
            if descends && shaped {
                accepted = true;
                break;
            }
            shape_blocked |= descends && !shaped;
            alpha *= 0.5;
        }
        if !accepted {
            mesh.set_vertices(old);
        }
        flips += check_angles(&mut mesh, config, iterations)?;
        history.push(mesh.area());
        sphere_history.push(mesh.max_sphere_deviation());
        pin_history.push(mesh.pin_displacement());
        angle_limited += usize::from(shape_blocked);
        if !accepted {
            // no admissible step: stationary unless mesh quality was the obstacle
            converged = !shape_blocked;
            break;
        }
        if step_max * alpha < STEP_TOL {
            converged = true;
            break;
        }
        if history.len() > config.window {
            let a_then = history[history.len() - 1 - config.window];
            let a_now = *history.last().unwrap();
            if (a_then - a_now) / a_now.abs().max(f64::MIN_POSITIVE) < config.area_rel_tol {
                converged = true;
                break;
            }
        }
    }
    let report = SolveReport {
        iterations,
        converged,
        final_area: *history.last().unwrap(),
        area_history: history,
        gradient_norm: mesh.free_gradient_norm(),
        max_sphere_deviation: mesh.max_sphere_deviation(),
        pin_displacement: mesh.pin_displacement(),
        min_angle_deg: mesh.min_angle().to_degrees(),
        sphere_deviation_history: sphere_history,
        pin_displacement_history: pin_history,
        edge_flips: flips,
        clamped_solves: clamped,
        angle_limited_steps: angle_limited,
    };
    Ok((mesh, report))
}

/// Returns the number of edge flips performed.
fn check_angles(mesh: &mut TriMesh, config: &SolverConfig, iteration: usize) -> Result<usize> {
    let threshold = config.min_angle_deg.to_radians();
    if mesh.min_angle() >= threshold {
        return Ok(0);
    }
    if !config.remesh {
        return Err(Error::SolverDegenerate { iteration, min_angle_deg: mesh.min_angle().to_degrees() });
    }
    let flips = delaunay_flips(mesh);
    let min = mesh.min_angle();
    if min < threshold && !(min > 0.0) {
        return Err(Error::SolverDegenerate { iteration, min_angle_deg: min.to_degrees() });
    }
    Ok(flips)
}

/// Flips interior edges whose opposite angles sum past pi, keeping a flip
/// only when it does not increase area.
pub(crate) fn delaunay_flips(mesh: &mut TriMesh) -> usize {
    let mut flips = 0;
    for _pass in 0..100 {
        let mut changed = false;
        let edges = mesh.edge_map();
        let mut tris = mesh.triangles().to_vec();
        let mut touched = vec![false; tris.len()];
        for (&(a, b), faces) in &edges {
            if faces.len() != 2 || touched[faces[0]] || touched[faces[1]] {
                continue;
            }
            let (t1, t2) = (faces[0], faces[1]);
            let c = opposite(&tris[t1], a, b);
            let d = opposite(&tris[t2], a, b);
            if c == d || edges.contains_key(&(c.min(d), c.max(d))) {
                continue;
            }
            let v = mesh.vertices();
            let angle = |o: usize| {
                let u = &v[a] - &v[o];
                let w = &v[b] - &v[o];
                (u.dot(&w) / (u.norm() * w.norm())).clamp(-1.0, 1.0).acos()
            };
            if angle(c) + angle(d) <= std::f64::consts::PI + 1e-12 {
                continue;
            }
            // orient along the cycle so that each new triangle keeps the
            // orientation of the pair
            let (p, q) = if directed(&tris[t1], a, b) { (a, b) } else { (b, a) };
            let (c, d) = (opposite(&tris[t1], a, b), opposite(&tris[t2], a, b));
            let new1 = [d, q, c];
            let new2 = [c, p, d];
            let before = super::triangle_area(&v[tris[t1][0]], &v[tris[t1][1]], &v[tris[t1][2]])
                + super::triangle_area(&v[tris[t2][0]], &v[tris[t2][1]], &v[tris[t2][2]]);
            let after = super::triangle_area(&v[new1[0]], &v[new1[1]], &v[new1[2]])
                + super::triangle_area(&v[new2[0]], &v[new2[1]], &v[new2[2]]);
            if after > before {
                continue;
            }
            tris[t1] = new1;
            tris[t2] = new2;
            touched[t1] = true;
            touched[t2] = true;
            flips += 1;
            changed = true;
        }
        mesh.set_triangles(tris);
        if !changed {
            break;
        }
    }
    flips
}

fn opposite(tri: &[usize; 3], a: usize, b: usize) -> usize {
    *tri.iter().find(|&&v| v != a && v != b).unwrap()
}

fn directed(tri: &[usize; 3], a: usize, b: usize) -> bool {
    (0..3).any(|i| tri[i] == a && tri[(i + 1) % 3] == b)
}

/// Target positions after one Laplace solve; the flag reports a fallback to
/// clamped weights.
fn laplace_step(mesh: &TriMesh, config: &SolverConfig) -> Result<(Vec<Point>, bool)> {
    let weights = mesh.cotangent_weights();
    match solve_with(mesh, &weights, config) {
        Some(v) => Ok((v, false)),
        None => {
            let clamped: BTreeMap<(usize, usize), f64> = weights.iter().map(|(&e, &w)| (e, w.max(1e-8))).collect();
            solve_with(mesh, &clamped, config)
                .map(|v| (v, true))
                .ok_or_else(|| Error::SolverDegenerate { iteration: 0, min_angle_deg: mesh.min_angle().to_degrees() })
        }
    }
}

fn solve_with(mesh: &TriMesh, weights: &BTreeMap<(usize, usize), f64>, config: &SolverConfig) -> Option<Vec<Point>> {
    let count = mesh.vertices().len();
    let n = mesh.ambient_dim();
    let mut index = vec![usize::MAX; count];
    let mut free = Vec::new();
    for v in 0..count {
        if !mesh.is_fixed(v) {
            index[v] = free.len();
            free.push(v);
        }
    }
    if free.is_empty() {
        return Some(mesh.vertices().to_vec());
    }
    let m = free.len();
    let mut entries: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut rhs = vec![vec![0.0; m]; n];
    for (&(a, b), &w) in weights {
        for (i, j) in [(a, b), (b, a)] {
            if index[i] == usize::MAX {
                continue;
            }
            let ri = index[i];
            *entries.entry((ri, ri)).or_insert(0.0) += w;
            if index[j] == usize::MAX {
                for (c, r) in rhs.iter_mut().enumerate() {
                    r[ri] += w * mesh.vertices()[j][c];
                }
            } else {
                *entries.entry((ri, index[j])).or_insert(0.0) -= w;
            }
        }
    }
    let a = Csr::from_map(m, &entries);
    let columns: Vec<Option<Vec<f64>>> = (0..n)
        .into_par_iter()
        .map(|c| {
            let mut x: Vec<f64> = free.iter().map(|&v| mesh.vertices()[v][c]).collect();
            match conjugate_gradient(&a, &rhs[c], &mut x, config.cg_rel_tol, config.cg_max_iterations) {
                CgOutcome::Converged { .. } | CgOutcome::MaxIterations { .. } => Some(x),
                CgOutcome::Breakdown => None,
            }
        })
        .collect();
    let mut out = mesh.vertices().to_vec();
    for (c, col) in columns.into_iter().enumerate() {
        let col = col?;
        if col.iter().any(|x| !x.is_finite()) {
            return None;
        }
        for (k, &v) in free.iter().enumerate() {
            out[v][c] = col[k];
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::point;
    use crate::mesh::{disk_mesh, jitter_interior, DiskMeshSpec};
    use crate::TangentFrame;

    fn flat_disk(rings: usize) -> TriMesh {
        let frame = TangentFrame::coordinate(3, &[0, 1]).unwrap();
        disk_mesh(&DiskMeshSpec { center: point(&[0.0, 0.0, 0.0]), frame, rings }).unwrap()
    }

    #[test]
    fn jittered_disk_relaxes_to_plane() {
        let mesh = flat_disk(8);
        let noisy = jitter_interior(&mesh, 0.02, 7);
        assert!(noisy.area() > mesh.area());
        let (out, report) = minimize(&noisy, &SolverConfig::default()).unwrap();
        assert!(report.converged);
        assert!(report.final_area <= noisy.area());
        for w in report.area_history.windows(2) {
            assert!(w[1] <= w[0]);
        }
        let max_z = out.vertices().iter().map(|v| v[2].abs()).fold(0.0, f64::max);
        assert!(max_z < 1e-9, "max_z = {max_z}");
        assert!((out.area() - mesh.area()).abs() < 1e-3 * mesh.area());
        assert_eq!(report.pin_displacement, 0.0);
        assert!(report.max_sphere_deviation < 1e-14);
    }

    #[test]
    fn degenerate_mesh_aborts_without_remesh() {
        let mesh = flat_disk(3);
        let cfg = SolverConfig { min_angle_deg: 59.0, ..SolverConfig::default() };
        assert!(matches!(minimize(&mesh, &cfg), Err(Error::SolverDegenerate { .. })));
    }

    #[test]
    fn flips_preserve_topology_and_area() {
        let mesh = flat_disk(5);
        let mut noisy = jitter_interior(&mesh, 0.03, 3);
        let a0 = noisy.area();
        delaunay_flips(&mut noisy);
        assert!(noisy.area() <= a0 + 1e-15);
        TriMesh::new(noisy.vertices().to_vec(), noisy.triangles().to_vec()).unwrap();
    }
}

//! Compressed sparse rows and a Jacobi-preconditioned conjugate gradient.

use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl Csr {
    /// Builds from accumulated `(row, col) -> value` entries; duplicates must
    /// already be summed by the map.
    pub fn from_map(n: usize, entries: &BTreeMap<(usize, usize), f64>) -> Self {
        let mut row_ptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals = Vec::with_capacity(entries.len());
        for (&(r, c), &v) in entries {
            row_ptr[r + 1] += 1;
            cols.push(c);
            vals.push(v);
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Csr { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mul(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *o = s;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                (self.row_ptr[r]..self.row_ptr[r + 1])
                    .find(|&k| self.cols[k] == r)
                    .map_or(0.0, |k| self.vals[k])
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CgOutcome {
    Converged { iterations: usize, residual: f64 },
    MaxIterations { residual: f64 },
    /// The matrix is not positive definite along some search direction.
    Breakdown,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` in place starting from the given `x`. `rel_tol` is
/// relative to the larger of `|b|` and the initial residual.
pub fn conjugate_gradient(a: &Csr, b: &[f64], x: &mut [f64], rel_tol: f64, max_iter: usize) -> CgOutcome {
    let n = a.dim();
    let diag = a.diagonal();
    if diag.iter().any(|&d| !(d > 0.0)) {
        return CgOutcome::Breakdown;
    }
    let mut ax = vec![0.0; n];
    a.mul(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    // with b = 0 the scale comes from the initial residual
    let target = rel_tol * dot(b, b).sqrt().max(dot(&r, &r).sqrt());
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(ri, d)| ri / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 0..max_iter {
        let res = dot(&r, &r).sqrt();
        if res <= target {
            return CgOutcome::Converged { iterations: it, residual: res };
        }
        a.mul(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return CgOutcome::Breakdown;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res = dot(&r, &r).sqrt();
    if res <= target {
        CgOutcome::Converged { iterations: max_iter, residual: res }
    } else {
        CgOutcome::MaxIterations { residual: res }
    }
}

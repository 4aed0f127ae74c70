//! Small dense helpers on `nalgebra` vectors shared by the geometry code.

use nalgebra::{DMatrix, DVector};

pub type Point = DVector<f64>;

pub fn point(coords: &[f64]) -> Point {
    DVector::from_column_slice(coords)
}

pub fn unit_axis(n: usize, i: usize) -> Point {
    let mut e = DVector::zeros(n);
    e[i] = 1.0;
    e
}

/// `1 - |x|^2` evaluated as `(1 - |x|)(1 + |x|)`.
pub fn one_minus_norm_sq(x: &Point) -> f64 {
    let r = x.norm();
    (1.0 - r) * (1.0 + r)
}

/// Modified Gram-Schmidt with one reorthogonalization pass. Returns `None` if
/// the input vectors are (numerically) linearly dependent.
pub fn orthonormalize(columns: &[Point]) -> Option<DMatrix<f64>> {
    let n = columns.first()?.len();
    let mut basis: Vec<Point> = Vec::with_capacity(columns.len());
    for v in columns {
        let scale = v.norm();
        if scale == 0.0 || !scale.is_finite() {
            return None;
        }
        let mut w = v / scale;
        for _ in 0..2 {
            for b in &basis {
                let c = b.dot(&w);
                w.axpy(-c, b, 1.0);
            }
        }
        let len = w.norm();
        if len < 1e-10 {
            return None;
        }
        basis.push(w / len);
    }
    Some(DMatrix::from_fn(n, basis.len(), |r, c| basis[c][r]))
}

/// Orthonormal basis of the orthogonal complement of the span of `columns`.
pub fn orthogonal_complement(columns: &[Point], n: usize) -> DMatrix<f64> {
    let mut vectors: Vec<Point> = columns.iter().filter(|v| v.norm() > 0.0).cloned().collect();
    let start = vectors.len();
    for i in 0..n {
        let mut trial = vectors.clone();
        trial.push(unit_axis(n, i));
        if orthonormalize(&trial).is_some() {
            vectors = trial;
        }
        if vectors.len() == n {
            break;
        }
    }
    let full = orthonormalize(&vectors).expect("completed basis is independent");
    full.columns(start, n - start).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_is_orthogonal() {
        let y = point(&[0.3, -0.2, 0.5, 0.1]);
        let c = orthogonal_complement(std::slice::from_ref(&y), 4);
        assert_eq!(c.ncols(), 3);
        for j in 0..3 {
            assert!(c.column(j).dot(&y).abs() < 1e-15);
        }
        let gram = c.transpose() * &c;
        assert!((gram - DMatrix::identity(3, 3)).amax() < 1e-15);
    }

    #[test]
    fn dependent_vectors_rejected() {
        let a = point(&[1.0, 2.0, 3.0]);
        assert!(orthonormalize(&[a.clone(), &a * 2.0]).is_none());
    }
}

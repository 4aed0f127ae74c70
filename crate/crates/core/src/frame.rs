use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{orthonormalize, Point};

/// Gram deviation allowed when a frame is constructed.
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Gram deviation allowed when a frame is consumed by a field operation.
pub const USE_TOL: f64 = 1e-9;

/// An orthonormal k-frame in `R^n`, stored as the columns of an `n x k` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentFrame {
    basis: DMatrix<f64>,
}

impl TangentFrame {
    /// Wraps `basis` after checking orthonormality to `CONSTRUCTION_TOL`.
    pub fn new(basis: DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(basis, CONSTRUCTION_TOL)
    }

    pub fn with_tolerance(basis: DMatrix<f64>, tol: f64) -> Result<Self> {
        let frame = TangentFrame { basis };
        if frame.k() == 0 || frame.k() > frame.n() {
            return Err(Error::InvalidDimension { k: frame.k(), n: frame.n() });
        }
        let dev = frame.gram_deviation();
        if !(dev <= tol) {
            return Err(Error::NonOrthonormalFrame(dev));
        }
        Ok(frame)
    }

    pub fn from_vectors(vectors: &[Point]) -> Result<Self> {
        let n = vectors.first().map(|v| v.len()).unwrap_or(0);
        if vectors.iter().any(|v| v.len() != n) {
            return Err(Error::InvalidArgument("frame vectors differ in length".into()));
        }
        let basis = DMatrix::from_fn(n, vectors.len(), |r, c| vectors[c][r]);
        Self::new(basis)
    }

    /// Gram-Schmidt on arbitrary spanning vectors.
    pub fn orthonormalized(vectors: &[Point]) -> Result<Self> {
        let basis = orthonormalize(vectors)
            .ok_or_else(|| Error::InvalidArgument("frame vectors are linearly dependent".into()))?;
        Self::new(basis)
    }

    /// Frame spanned by the coordinate axes with the given zero-based indices.
    pub fn coordinate(n: usize, axes: &[usize]) -> Result<Self> {
        if axes.iter().any(|&a| a >= n) {
            return Err(Error::InvalidArgument(format!("axis index out of range for n = {n}")));
        }
        let basis = DMatrix::from_fn(n, axes.len(), |r, c| if axes[c] == r { 1.0 } else { 0.0 });
        Self::new(basis)
    }

    /// Orthonormalized Gaussian k-frame in `R^n`; identical for identical seeds.
    pub fn random(n: usize, k: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::random_with(n, k, &mut rng)
    }

    pub fn random_with<R: rand::Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::InvalidDimension { k, n });
        }
        loop {
            let vectors: Vec<Point> = (0..k)
                .map(|_| DVector::from_fn(n, |_, _| StandardNormal.sample(rng)))
                .collect();
            if let Some(basis) = orthonormalize(&vectors) {
                return Self::new(basis);
            }
        }
    }

    pub fn k(&self) -> usize {
        self.basis.ncols()
    }

    pub fn n(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn vector(&self, i: usize) -> DVector<f64> {
        self.basis.column(i).into_owned()
    }

    /// Max-norm distance of the Gram matrix from the identity.
    pub fn gram_deviation(&self) -> f64 {
        let gram = self.basis.tr_mul(&self.basis);
        (gram - DMatrix::<f64>::identity(self.k(), self.k())).amax()
    }

    /// Coefficients `<v, e_i>`.
    pub fn coefficients(&self, v: &Point) -> DVector<f64> {
        self.basis.tr_mul(v)
    }

    /// Orthogonal projection of `v` onto the span.
    pub fn project(&self, v: &Point) -> Point {
        &self.basis * self.coefficients(v)
    }

    /// Component of `v` orthogonal to the span.
    pub fn reject(&self, v: &Point) -> Point {
        v - self.project(v)
    }

    /// The same plane expressed in a rotated basis, `E * rotation` for an
    /// orthogonal `k x k` matrix.
    pub fn rotated(&self, rotation: &DMatrix<f64>) -> Result<Self> {
        Self::with_tolerance(&self.basis * rotation, 1e-11)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_random_frame_is_orthogonal() {
        for seed in 0..20 {
            let f = TangentFrame::random(3, 3, seed).unwrap();
            let det = f.basis().determinant();
            assert!((det.abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn random_frame_gram_is_identity() {
        let f = TangentFrame::random(5, 2, 7).unwrap();
        assert!(f.gram_deviation() < 1e-12);
    }

    #[test]
    fn random_frame_is_deterministic() {
        let a = TangentFrame::random(7, 4, 1234).unwrap();
        let b = TangentFrame::random(7, 4, 1234).unwrap();
        assert_eq!(a, b);
        let c = TangentFrame::random(7, 4, 1235).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn k_larger_than_n_rejected() {
        assert!(matches!(TangentFrame::random(3, 4, 0), Err(Error::InvalidDimension { .. })));
    }

    #[test]
    fn non_orthonormal_rejected() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 0.1, 0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(TangentFrame::new(m), Err(Error::NonOrthonormalFrame(_))));
    }
}

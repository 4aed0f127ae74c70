//! The calibration vector field `W` attached to a point `y` of the unit ball
//! and a dimension `k`, together with its tangential divergence.
//!
//! With `Q = 1 - 2<x,y> + |y|^2` and `R = Q / |x - y|^2`,
//!
//! ```text
//! k > 2:  W(x) = -(R^{k/2} - 1)/k (x - y) + (R^{(k-2)/2} - 1)/(k - 2) y
//! k = 2:  W(x) = -(R - 1)/2 (x - y) + (ln R)/2 y
//! ```
//!
//! Since `Q - |x - y|^2 = 1 - |x|^2`, every quantity is evaluated through
//! `ln R = ln1p((1 - |x|^2) / |x - y|^2)`. On the unit sphere this is exactly
//! zero, which makes `W` vanish there without cancellation.
//!
//! For an orthonormal k-frame `e_i` the trace `sum <D_{e_i} W, e_i>` equals
//!
//! ```text
//! 1 - (R^{k/2} |P_perp (x - y)|^2 + R^{(k-4)/2} |P y|^2) / |x - y|^2
//! ```
//!
//! where `P` projects onto the frame's span. The subtracted term is the
//! deficit, which is manifestly nonnegative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::{TangentFrame, USE_TOL};
use crate::linalg::{one_minus_norm_sq, Point};

/// Default minimum admissible distance `|x - y|`.
pub const DEFAULT_R_MIN: f64 = 1e-9;
/// Slack on `|x| <= 1` for points of the closed ball.
pub const BALL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationField {
    y: Point,
    k: usize,
    r_min: f64,
}

/// Intermediate quantities of the closed-form divergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldDiagnostics {
    /// `1 - 2<x,y> + |y|^2`
    pub q: f64,
    /// `|x - y|`
    pub dist: f64,
    /// `sum_i <y, e_i>^2`
    pub tangential_y_sq: f64,
    /// `|x - y|^2 - sum_i <x - y, e_i>^2`
    pub normal_xy_sq: f64,
}

struct Local {
    diff: Point,
    dist_sq: f64,
    /// `ln R`
    log_ratio: f64,
    /// `R - 1`, exact form `(1 - |x|^2) / |x - y|^2`
    ratio_minus_one: f64,
}

impl CalibrationField {
    pub fn new(y: Point, k: usize) -> Result<Self> {
        let n = y.len();
        if k < 2 || k > n {
            return Err(Error::InvalidDimension { k, n });
        }
        let norm = y.norm();
        if !(norm < 1.0) {
            return Err(Error::PointOutsideBall(norm));
        }
        Ok(CalibrationField { y, k, r_min: DEFAULT_R_MIN })
    }

    pub fn with_r_min(mut self, r_min: f64) -> Self {
        self.r_min = r_min;
        self
    }

    pub fn y(&self) -> &Point {
        &self.y
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: x.len() });
        }
        let norm = x.norm();
        if !(norm <= 1.0 + BALL_TOL) {
            return Err(Error::OutsideDomain(norm));
        }
        Ok(())
    }

    fn check_frame(&self, frame: &TangentFrame) -> Result<()> {
        if frame.n() != self.n() || frame.k() != self.k {
            return Err(Error::DimensionMismatch { expected: self.k, got: frame.k() });
        }
        let dev = frame.gram_deviation();
        if !(dev <= USE_TOL) {
            return Err(Error::NonOrthonormalFrame(dev));
        }
        Ok(())
    }

    fn local(&self, x: &Point) -> Result<Local> {
        self.check_point(x)?;
        let diff = x - &self.y;
        let dist_sq = diff.norm_squared();
        let dist = dist_sq.sqrt();
        if !(dist >= self.r_min) {
            return Err(Error::Singular { dist, r_min: self.r_min });
        }
        // points within BALL_TOL outside the sphere count as boundary points
        let gap = one_minus_norm_sq(x).max(0.0);
        let ratio_minus_one = gap / dist_sq;
        Ok(Local { diff, dist_sq, log_ratio: ratio_minus_one.ln_1p(), ratio_minus_one })
    }

    /// `W(x)`.
    pub fn eval(&self, x: &Point) -> Result<Point> {
        let l = self.local(x)?;
        Ok(self.eval_local(&l))
    }

    fn eval_local(&self, l: &Local) -> Point {
        let k = self.k as f64;
        if self.k == 2 {
            &l.diff * (-0.5 * l.ratio_minus_one) + &self.y * (0.5 * l.log_ratio)
        } else {
            let radial = (0.5 * k * l.log_ratio).exp_m1() / k;
            let shift = (0.5 * (k - 2.0) * l.log_ratio).exp_m1() / (k - 2.0);
            &l.diff * (-radial) + &self.y * shift
        }
    }

    pub fn diagnostics(&self, x: &Point, frame: &TangentFrame) -> Result<FieldDiagnostics> {
        self.check_frame(frame)?;
        let l = self.local(x)?;
        Ok(self.diagnostics_local(x, &l, frame))
    }

    fn diagnostics_local(&self, x: &Point, l: &Local, frame: &TangentFrame) -> FieldDiagnostics {
        let gap = one_minus_norm_sq(x).max(0.0);
        FieldDiagnostics {
            q: l.dist_sq + gap,
            dist: l.dist_sq.sqrt(),
            tangential_y_sq: frame.coefficients(&self.y).norm_squared(),
            normal_xy_sq: frame.reject(&l.diff).norm_squared(),
        }
    }

    /// `1 - div_Sigma W` for the plane spanned by `frame`.
    pub fn deficit(&self, x: &Point, frame: &TangentFrame) -> Result<f64> {
        self.check_frame(frame)?;
        let l = self.local(x)?;
        let d = self.diagnostics_local(x, &l, frame);
        Ok(self.deficit_from(&l, &d))
    }

    fn deficit_from(&self, l: &Local, d: &FieldDiagnostics) -> f64 {
        let k = self.k as f64;
        let normal_weight = (0.5 * k * l.log_ratio).exp();
        let tangential_weight = (0.5 * (k - 4.0) * l.log_ratio).exp();
        (normal_weight * d.normal_xy_sq + tangential_weight * d.tangential_y_sq) / l.dist_sq
    }

    /// Closed-form tangential divergence `sum_i <D_{e_i} W, e_i>`.
    pub fn divergence_trace(&self, x: &Point, frame: &TangentFrame) -> Result<f64> {
        Ok(1.0 - self.deficit(x, frame)?)
    }

    /// Central finite differences of `W` along each frame direction:
    /// `sum_i <W(x + h e_i) - W(x - h e_i), e_i> / 2h`.
    pub fn divergence_trace_fd(&self, x: &Point, frame: &TangentFrame, h: f64) -> Result<f64> {
        self.check_frame(frame)?;
        self.check_point(x)?;
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidStep(h));
        }
        let mut total = 0.0;
        for i in 0..frame.k() {
            let e = frame.vector(i);
            let plus = self.stencil_eval(&(x + &e * h))?;
            let minus = self.stencil_eval(&(x - &e * h))?;
            total += (plus - minus).dot(&e) / (2.0 * h);
        }
        Ok(total)
    }

    /// Richardson combination of central differences at `h` and `h/2`,
    /// accurate to `O(h^4)`.
    pub fn divergence_trace_richardson(&self, x: &Point, frame: &TangentFrame, h: f64) -> Result<f64> {
        let coarse = self.divergence_trace_fd(x, frame, h)?;
        let fine = self.divergence_trace_fd(x, frame, 0.5 * h)?;
        Ok((4.0 * fine - coarse) / 3.0)
    }

    fn stencil_eval(&self, x: &Point) -> Result<Point> {
        match self.eval(x) {
            Err(Error::OutsideDomain(_)) | Err(Error::Singular { .. }) => Err(Error::StencilOutsideDomain),
            other => other,
        }
    }

    /// Leading singular term `-(1 - |y|^2)^{k/2} (x - y) / (k |x - y|^k)`.
    pub fn asymptotic_leading(&self, x: &Point) -> Result<Point> {
        if x.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), got: x.len() });
        }
        let diff = x - &self.y;
        let dist = diff.norm();
        if !(dist >= self.r_min) {
            return Err(Error::Singular { dist, r_min: self.r_min });
        }
        let k = self.k as f64;
        let scale = (1.0 - self.y.norm_squared()).powf(0.5 * k) / (k * dist.powi(self.k as i32));
        Ok(diff * (-scale))
    }

    /// `(1 - |y|^2)^{k/2}`, the factor multiplying `|B^k|` in the area bound.
    pub fn bound_factor(&self) -> f64 {
        (1.0 - self.y.norm_squared()).powf(0.5 * self.k as f64)
    }
}

/// True when the sample is an equality configuration: the plane contains
/// `x - y` and is orthogonal to `y`, both up to `tol`.
pub fn is_rigid(d: &FieldDiagnostics, tol: f64) -> bool {
    d.normal_xy_sq <= tol && d.tangential_y_sq <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::point;
    use nalgebra::DMatrix;

    /// Literal transcription of the field definition with `powf`, used as an
    /// independent oracle.
    fn literal_w(y: &Point, k: usize, x: &Point) -> Point {
        let q = 1.0 - 2.0 * x.dot(y) + y.norm_squared();
        let diff = x - y;
        let ratio = q / diff.norm_squared();
        let kf = k as f64;
        if k == 2 {
            &diff * (-0.5 * (ratio - 1.0)) + y * (0.5 * ratio.ln())
        } else {
            &diff * (-(ratio.powf(kf / 2.0) - 1.0) / kf) + y * ((ratio.powf((kf - 2.0) / 2.0) - 1.0) / (kf - 2.0))
        }
    }

    /// The unsimplified five-term expansion of the trace, before collecting
    /// terms. Independent of the factored closed form.
    fn expanded_trace(y: &Point, k: usize, x: &Point, frame: &TangentFrame) -> f64 {
        let q = 1.0 - 2.0 * x.dot(y) + y.norm_squared();
        let diff = x - y;
        let dist = diff.norm();
        let kf = k as f64;
        let cy = frame.coefficients(y);
        let cd = frame.coefficients(&diff);
        let mixed = cy.dot(&cd);
        1.0 - (q / (dist * dist)).powf(kf / 2.0) + q.powf((kf - 2.0) / 2.0) / dist.powf(kf) * mixed
            + q.powf(kf / 2.0) / dist.powf(kf + 2.0) * cd.norm_squared()
            - q.powf((kf - 4.0) / 2.0) / dist.powf(kf - 2.0) * cy.norm_squared()
            - q.powf((kf - 2.0) / 2.0) / dist.powf(kf) * mixed
    }

    fn axes(n: usize, ax: &[usize]) -> TangentFrame {
        TangentFrame::coordinate(n, ax).unwrap()
    }

    #[test]
    fn log_branch_value() {
        let f = CalibrationField::new(point(&[0.0, 0.0, 0.0]), 2).unwrap();
        let x = point(&[0.5, 0.0, 0.0]);
        let w = f.eval(&x).unwrap();
        let oracle = literal_w(f.y(), 2, &x);
        assert!((w - point(&[-0.75, 0.0, 0.0])).amax() < 1e-15);
        assert!((oracle - point(&[-0.75, 0.0, 0.0])).amax() < 1e-15);
    }

    #[test]
    fn k3_value() {
        let f = CalibrationField::new(point(&[0.0, 0.0, 0.0]), 3).unwrap();
        let x = point(&[0.0, 0.5, 0.0]);
        let w = f.eval(&x).unwrap();
        assert!((w - point(&[0.0, -7.0 / 6.0, 0.0])).amax() < 1e-14);
    }

    #[test]
    fn vanishes_on_sphere() {
        let f = CalibrationField::new(point(&[0.3, 0.0, 0.0]), 3).unwrap();
        let w = f.eval(&point(&[1.0, 0.0, 0.0])).unwrap();
        assert_eq!(w.amax(), 0.0);
    }

    #[test]
    fn matches_literal_formula_in_the_interior() {
        let y = point(&[0.2, -0.4, 0.1, 0.3]);
        for k in 2..=4 {
            let f = CalibrationField::new(y.clone(), k).unwrap();
            for x in [point(&[0.5, 0.1, -0.3, 0.0]), point(&[-0.1, -0.2, 0.6, 0.6]), point(&[0.0, 0.0, 0.0, 0.0])] {
                let a = f.eval(&x).unwrap();
                let b = literal_w(&y, k, &x);
                assert!((&a - &b).amax() <= 1e-12 * b.amax().max(1.0), "k={k}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn rejects_singular_and_exterior_points() {
        let f = CalibrationField::new(point(&[0.1, 0.2, 0.0]), 2).unwrap();
        assert!(matches!(f.eval(&point(&[0.1, 0.2, 0.0])), Err(Error::Singular { .. })));
        assert!(matches!(f.eval(&point(&[1.1, 0.0, 0.0])), Err(Error::OutsideDomain(_))));
        assert!(f.eval(&point(&[1.0 + 5e-13, 0.0, 0.0])).is_ok());
        assert!(matches!(f.asymptotic_leading(f.y()), Err(Error::Singular { .. })));
    }

    #[test]
    fn constructor_validation() {
        assert!(matches!(CalibrationField::new(point(&[0.0, 0.0, 0.0]), 1), Err(Error::InvalidDimension { .. })));
        assert!(matches!(CalibrationField::new(point(&[0.0, 0.0, 0.0]), 4), Err(Error::InvalidDimension { .. })));
        assert!(matches!(CalibrationField::new(point(&[1.0, 0.0, 0.0]), 2), Err(Error::PointOutsideBall(_))));
    }

    #[test]
    fn equality_configuration_has_unit_divergence() {
        let f = CalibrationField::new(point(&[0.0, 0.0, 0.6]), 2).unwrap();
        let x = point(&[0.3, 0.0, 0.6]);
        let frame = axes(3, &[0, 1]);
        assert!((f.divergence_trace(&x, &frame).unwrap() - 1.0).abs() < 1e-15);
        assert!(f.deficit(&x, &frame).unwrap().abs() < 1e-15);
    }

    #[test]
    fn normal_frame_value() {
        let f = CalibrationField::new(point(&[0.0, 0.0, 0.0]), 2).unwrap();
        let x = point(&[0.5, 0.0, 0.0]);
        let frame = axes(3, &[1, 2]);
        assert!((f.divergence_trace(&x, &frame).unwrap() + 3.0).abs() < 1e-14);
        assert!((f.deficit(&x, &frame).unwrap() - 4.0).abs() < 1e-14);
        let fd = f.divergence_trace_fd(&x, &frame, 1e-4).unwrap();
        assert!((fd + 3.0).abs() < 1e-6, "{fd}");
        let d = f.diagnostics(&x, &frame).unwrap();
        assert_eq!(d.q, 1.0);
        assert!((d.normal_xy_sq - 0.25).abs() < 1e-16);
        assert_eq!(d.tangential_y_sq, 0.0);
    }

    #[test]
    fn radial_plane_through_origin_has_unit_divergence() {
        let f = CalibrationField::new(point(&[0.0, 0.0, 0.0]), 2).unwrap();
        let x = point(&[0.3, 0.4, 0.0]);
        let frame = axes(3, &[0, 1]);
        let fd = f.divergence_trace_fd(&x, &frame, 1e-4).unwrap();
        assert!((fd - 1.0).abs() < 1e-6);
    }

    #[test]
    fn closed_form_matches_expanded_trace() {
        let y = point(&[0.2, 0.1, 0.0, -0.3, 0.05]);
        for k in 2..=5 {
            let f = CalibrationField::new(y.clone(), k).unwrap();
            for seed in 0..10 {
                let frame = TangentFrame::random(5, k, seed).unwrap();
                let x = point(&[0.4, -0.3, 0.2, 0.1, 0.3]);
                let a = f.divergence_trace(&x, &frame).unwrap();
                let b = expanded_trace(&y, k, &x, &frame);
                assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "k={k}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn finite_differences_match_k3_random() {
        let y = point(&[0.2, 0.1, 0.0]);
        let f = CalibrationField::new(y, 3).unwrap();
        let frame = TangentFrame::random(3, 3, 99).unwrap();
        let x = point(&[-0.35, 0.42, 0.27]);
        let exact = f.divergence_trace(&x, &frame).unwrap();
        let fd = f.divergence_trace_fd(&x, &frame, 1e-5).unwrap();
        assert!((exact - fd).abs() <= 1e-6 * exact.abs().max(1.0), "{exact} vs {fd}");
    }

    #[test]
    fn fd_step_validation() {
        let f = CalibrationField::new(point(&[0.0, 0.0, 0.0]), 2).unwrap();
        let frame = axes(3, &[0, 1]);
        let x = point(&[0.5, 0.0, 0.0]);
        assert!(matches!(f.divergence_trace_fd(&x, &frame, 0.0), Err(Error::InvalidStep(_))));
        assert!(matches!(f.divergence_trace_fd(&x, &frame, 0.6), Err(Error::StencilOutsideDomain)));
    }

    #[test]
    fn frame_checks() {
        let f = CalibrationField::new(point(&[0.0, 0.0, 0.0]), 2).unwrap();
        let skew = TangentFrame::with_tolerance(DMatrix::from_row_slice(3, 2, &[1.0, 1e-6, 0.0, 1.0, 0.0, 0.0]), 1.0)
            .unwrap();
        assert!(matches!(f.deficit(&point(&[0.5, 0.0, 0.0]), &skew), Err(Error::NonOrthonormalFrame(_))));
        let wrong_k = axes(3, &[0, 1, 2]);
        assert!(f.deficit(&point(&[0.5, 0.0, 0.0]), &wrong_k).is_err());
    }

    #[test]
    fn leading_term_values() {
        let f = CalibrationField::new(point(&[0.0, 0.0, 0.0]), 2).unwrap();
        let r = 0.25;
        let lead = f.asymptotic_leading(&point(&[r, 0.0, 0.0])).unwrap();
        assert!((lead[0] + 1.0 / (2.0 * r)).abs() < 1e-14);

        let f = CalibrationField::new(point(&[0.0, 0.0, 0.6]), 2).unwrap();
        let lead = f.asymptotic_leading(&point(&[1e-3, 0.0, 0.6])).unwrap();
        assert!((lead[0] + 320.0).abs() < 1e-9, "{}", lead[0]);
        assert_eq!(lead[1], 0.0);
    }

    #[test]
    fn leading_term_dominates_near_y() {
        let y = point(&[0.0, 0.36, 0.48]);
        for k in 2..=3 {
            let f = CalibrationField::new(y.clone(), k).unwrap();
            let d = point(&[0.6, 0.0, -0.8]);
            let mut prev = f64::INFINITY;
            for t in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6] {
                let x = &y + &d * t;
                let err = (f.eval(&x).unwrap() - f.asymptotic_leading(&x).unwrap()).norm() * t.powi(k as i32 - 1);
                assert!(err < prev, "k={k} t={t}: {err} !< {prev}");
                prev = err;
            }
            assert!(prev < 1e-4);
        }
    }

    #[test]
    fn rigidity_predicate() {
        let f = CalibrationField::new(point(&[0.0, 0.0, 0.6]), 2).unwrap();
        let flat = axes(3, &[0, 1]);
        let d = f.diagnostics(&point(&[0.2, -0.3, 0.6]), &flat).unwrap();
        assert!(is_rigid(&d, 1e-12));
        let tilted = axes(3, &[0, 2]);
        let d = f.diagnostics(&point(&[0.2, 0.0, 0.6]), &tilted).unwrap();
        assert!(!is_rigid(&d, 1e-12));
        assert!(f.deficit(&point(&[0.2, 0.0, 0.6]), &tilted).unwrap() > 0.0);
    }
}

//! Quadrature rules: Gauss-Legendre on intervals and product rules on unit
//! spheres of arbitrary dimension, plus unit-ball volumes.

use std::f64::consts::PI;

use nalgebra::DVector;

/// Volume of the unit ball in `R^k`, `pi^(k/2) / Gamma(k/2 + 1)`, evaluated
/// through the recurrence `V_k = 2 pi / k * V_{k-2}` to stay exact to rounding.
pub fn unit_ball_volume(k: usize) -> f64 {
    let mut v = if k % 2 == 0 { 1.0 } else { 2.0 };
    let mut j = if k % 2 == 0 { 2 } else { 3 };
    while j <= k {
        v *= 2.0 * PI / j as f64;
        j += 2;
    }
    v
}

/// Area of the unit `(k-1)`-sphere bounding the unit ball of `R^k`.
pub fn unit_sphere_area(k: usize) -> f64 {
    k as f64 * unit_ball_volume(k)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
///
/// Nodes come from Newton iteration on the three-term Legendre recurrence,
/// started from the Chebyshev-like asymptotic guess.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1, "quadrature order must be positive");
    let m = order;
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(m, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[m - 1 - i] = x;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for j in 2..=m {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let p = if m == 0 { 1.0 } else { p1 };
    let d = m as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(order: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter().zip(&w).map(|(xi, wi)| (mid + half * xi, half * wi)).collect()
}

/// Periodic trapezoidal rule on `[0, 2 pi)`; spectrally accurate for smooth
/// periodic integrands.
pub fn circle_rule(count: usize) -> Vec<(f64, f64)> {
    let w = 2.0 * PI / count as f64;
    (0..count).map(|j| (w * j as f64, w)).collect()
}

/// Product rule on the unit sphere `S^(dim-1)` in `R^dim`. Weights sum to the
/// sphere's area. `order` controls resolution in every angular direction.
pub fn sphere_rule(dim: usize, order: usize) -> Vec<(DVector<f64>, f64)> {
    assert!(dim >= 1);
    match dim {
        1 => vec![(DVector::from_element(1, -1.0), 1.0), (DVector::from_element(1, 1.0), 1.0)],
        2 => circle_rule((2 * order).max(4))
            .into_iter()
            .map(|(a, w)| (DVector::from_vec(vec![a.cos(), a.sin()]), w))
            .collect(),
        _ => {
            let lower = sphere_rule(dim - 1, order);
            let mut out = Vec::with_capacity(order * lower.len());
            for (theta, wt) in gauss_legendre_on(order.max(2), 0.0, PI) {
                let (s, c) = theta.sin_cos();
                let jac = s.powi(dim as i32 - 2);
                for (omega, wo) in &lower {
                    let mut p = DVector::zeros(dim);
                    p[0] = c;
                    p.rows_mut(1, dim - 1).copy_from(&(omega * s));
                    out.push((p, wt * wo * jac));
                }
            }
            out
        }
    }
}

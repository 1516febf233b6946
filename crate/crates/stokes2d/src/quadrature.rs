//! Gauss quadrature on the reference triangle and on edges.
//!
//! Triangle rules come from a tensor Gauss-Legendre grid on the unit square
//! pushed through the Duffy map (u, v) -> (u, v(1-u)), whose Jacobian (1-u)
//! raises the u-degree by one. With m points per direction the rule is exact
//! for total degree 2m-2, so m = ceil((degree+2)/2) suffices.

use crate::geometry::Vec2;

pub const MAX_EXACTNESS: usize = 14;

#[derive(Debug, thiserror::Error)]
pub enum QuadratureError {
    #[error("unsupported exactness {requested}; supported range is 1..={max}")]
    UnsupportedDegree { requested: usize, max: usize },
}

/// Quadrature rule on the reference triangle (0,0)-(1,0)-(0,1).
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    /// Barycentric coordinates (l0, l1, l2) of each point.
    pub points: Vec<[f64; 3]>,
    /// Reference-triangle weights, summing to 1/2.
    pub weights: Vec<f64>,
    /// Total polynomial degree integrated exactly.
    pub exactness: usize,
}

impl QuadratureRule {
    /// Integrate `f` over a physical triangle, mapping barycentric points to
    /// physical coordinates. `area` is the triangle area.
    pub fn integrate(&self, verts: [Vec2; 3], area: f64, mut f: impl FnMut(Vec2) -> f64) -> f64 {
        let mut sum = 0.0;
        for (bary, w) in self.points.iter().zip(&self.weights) {
            let x = verts[0].scale(bary[0]) + verts[1].scale(bary[1]) + verts[2].scale(bary[2]);
            sum += w * f(x);
        }
        2.0 * area * sum
    }
}

/// Construct a triangle rule exact for polynomials of the given total degree.
pub fn quadrature(exactness: usize) -> Result<QuadratureRule, QuadratureError> {
    if exactness < 1 || exactness > MAX_EXACTNESS {
        return Err(QuadratureError::UnsupportedDegree {
            requested: exactness,
            max: MAX_EXACTNESS,
        });
    }
    let m = (exactness + 3) / 2;
    let (nodes, weights) = gauss_legendre_01(m);
    let mut points = Vec::with_capacity(m * m);
    let mut wts = Vec::with_capacity(m * m);
    for (&u, &wu) in nodes.iter().zip(&weights) {
        for (&v, &wv) in nodes.iter().zip(&weights) {
            let x = u;
            let y = v * (1.0 - u);
            points.push([1.0 - x - y, x, y]);
            wts.push(wu * wv * (1.0 - u));
        }
    }
    Ok(QuadratureRule {
        points,
        weights: wts,
        exactness,
    })
}

/// Gauss rule on the unit interval [0, 1], weights summing to 1.
#[derive(Clone, Debug)]
pub struct EdgeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub exactness: usize,
}

impl EdgeRule {
    /// Integrate `f` along the segment from `a` to `b` (with respect to arc
    /// length, so the result scales with |b - a|).
    pub fn integrate(&self, a: Vec2, b: Vec2, mut f: impl FnMut(Vec2) -> f64) -> f64 {
        let len = (b - a).norm();
        let mut sum = 0.0;
        for (&t, &w) in self.points.iter().zip(&self.weights) {
            sum += w * f(a + (b - a).scale(t));
        }
        len * sum
    }
}

/// Construct an edge rule exact for univariate polynomials of the given degree.
pub fn edge_quadrature(exactness: usize) -> EdgeRule {
    let m = exactness / 2 + 1;
    let (points, weights) = gauss_legendre_01(m);
    EdgeRule {
        points,
        weights,
        exactness: 2 * m - 1,
    }
}

/// Gauss-Legendre nodes and weights shifted to [0, 1]. Roots of the Legendre
/// polynomial are found by Newton iteration from the Chebyshev initial guess.
fn gauss_legendre_01(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(m, x);
        nodes[i] = 0.5 * (x + 1.0);
        weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
    }
    nodes.reverse();
    weights.reverse();
    (nodes, weights)
}

/// Value and derivative of the Legendre polynomial P_m at x, via the
/// three-term recurrence.
fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 1..m {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = p_next;
    }
    let dp = m as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

//! Gauss rules on `[0, 1]` and collapsed (Duffy) product rules on the
//! reference triangle `{(x, y): x, y >= 0, x + y <= 1}`.

use crate::error::ElementError;

pub const MAX_DEGREE: usize = 40;

/// Gauss-Legendre nodes and weights on `[0, 1]`, exact to degree `2n - 1`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "need at least one Gauss point");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = 0.5 * (1.0 - x);
        nodes[n - 1 - i] = 0.5 * (1.0 + x);
        weights[i] = 0.5 * w;
        weights[n - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

/// Gauss rule on `[0, 1]` exact for polynomials of the given degree.
pub fn edge_rule(degree: usize) -> (Vec<f64>, Vec<f64>) {
    gauss_legendre(degree / 2 + 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    /// Reference coordinates `(x, y)`.
    pub points: Vec<[f64; 2]>,
    /// Weights summing to the reference area `1/2`.
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Barycentric coordinates `(1 - x - y, x, y)` of each point.
    pub fn barycentric(&self) -> Vec<[f64; 3]> {
        self.points.iter().map(|&[x, y]| [1.0 - x - y, x, y]).collect()
    }

    pub fn integrate(&self, f: impl Fn([f64; 2]) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }
}

/// Triangle rule exact for all polynomials of total degree `<= degree`.
pub fn quadrature_for(degree: usize) -> Result<QuadratureRule, ElementError> {
    if degree > MAX_DEGREE {
        return Err(ElementError::UnsupportedQuadrature { requested: degree, max: MAX_DEGREE });
    }
    // x = u, y = v (1 - u); Jacobian (1 - u) adds one degree in u.
    let (nu, wu) = gauss_legendre((degree + 2).div_ceil(2));
    let (nv, wv) = gauss_legendre((degree + 1).div_ceil(2).max(1));
    let mut points = Vec::with_capacity(nu.len() * nv.len());
    let mut weights = Vec::with_capacity(nu.len() * nv.len());
    for (&u, &a) in nu.iter().zip(&wu) {
        for (&v, &b) in nv.iter().zip(&wv) {
            points.push([u, v * (1.0 - u)]);
            weights.push(a * b * (1.0 - u));
        }
    }
    Ok(QuadratureRule { points, weights, degree })
}

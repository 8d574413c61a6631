//! Closed-form manufactured solution on the unit square.
//!
//! ```text
//! u = (1/5) (-x cos x sin y + x², x sin x cos y + y²)
//! p = sin πx sin πy
//! ```
//!
//! All derivatives are written out by hand.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::elements::PointValues;
use crate::mesh::Point;
use crate::physics::{eval_permeability, eval_permeability_derivative, law_fluid_content, MaterialParams, PermeabilityLaw};
use crate::problem::{scalar, vector, FlowBc, MechanicalBc, ProblemData};

/// Exact fields that can be sampled pointwise.
pub trait ExactFields: Send + Sync {
    fn values(&self, x: Point) -> PointValues;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedCase {
    pub params: MaterialParams,
    pub law: PermeabilityLaw,
}

/// Quantities available from [`manufactured_eval`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Displacement,
    Pressure,
    Strain,
    Rotation,
    Stress,
    BodyForce,
    Source,
}

impl Default for ManufacturedCase {
    /// Kozeny-Carman with `k0 = k1 = 0.1`, `μ = λ = μ_f = 1`, `c0 = α = 0.25`.
    fn default() -> Self {
        Self {
            params: MaterialParams { lambda: 1.0, mu: 1.0, c0: 0.25, alpha: 0.25, mu_f: 1.0 },
            law: PermeabilityLaw::KozenyCarman { k0: 0.1, k1: 0.1 },
        }
    }
}

impl ManufacturedCase {
    pub fn with_law(law: PermeabilityLaw) -> Self {
        Self { law, ..Self::default() }
    }

    pub fn displacement(&self, [x, y]: Point) -> [f64; 2] {
        [(-x * x.cos() * y.sin() + x * x) / 5.0, (x * x.sin() * y.cos() + y * y) / 5.0]
    }

    /// `G[i][j] = ∂_j u_i`.
    pub fn grad_displacement(&self, [x, y]: Point) -> [[f64; 2]; 2] {
        let (sx, cx, sy, cy) = (x.sin(), x.cos(), y.sin(), y.cos());
        [
            [(-cx * sy + x * sx * sy + 2.0 * x) / 5.0, -x * cx * cy / 5.0],
            [(sx * cy + x * cx * cy) / 5.0, (-x * sx * sy + 2.0 * y) / 5.0],
        ]
    }

    /// `H[i][j][k] = ∂_j ∂_k u_i`.
    fn hessian_displacement(&self, [x, y]: Point) -> [[[f64; 2]; 2]; 2] {
        let (sx, cx, sy, cy) = (x.sin(), x.cos(), y.sin(), y.cos());
        let u1_xx = (2.0 * sx * sy + x * cx * sy + 2.0) / 5.0;
        let u1_xy = (-cx * cy + x * sx * cy) / 5.0;
        let u1_yy = x * cx * sy / 5.0;
        let u2_xx = (2.0 * cx * cy - x * sx * cy) / 5.0;
        let u2_xy = (-sx * sy - x * cx * sy) / 5.0;
        let u2_yy = (-x * sx * cy + 2.0) / 5.0;
        [[[u1_xx, u1_xy], [u1_xy, u1_yy]], [[u2_xx, u2_xy], [u2_xy, u2_yy]]]
    }

    pub fn strain(&self, x: Point) -> [[f64; 2]; 2] {
        let g = self.grad_displacement(x);
        let off = 0.5 * (g[0][1] + g[1][0]);
        [[g[0][0], off], [off, g[1][1]]]
    }

    /// `(1,2)` entry of the skew part of `∇u`.
    pub fn rotation(&self, x: Point) -> f64 {
        let g = self.grad_displacement(x);
        0.5 * (g[0][1] - g[1][0])
    }

    pub fn pressure(&self, [x, y]: Point) -> f64 {
        (PI * x).sin() * (PI * y).sin()
    }

    pub fn grad_pressure(&self, [x, y]: Point) -> [f64; 2] {
        [PI * (PI * x).cos() * (PI * y).sin(), PI * (PI * x).sin() * (PI * y).cos()]
    }

    pub fn laplacian_pressure(&self, x: Point) -> f64 {
        -2.0 * PI * PI * self.pressure(x)
    }

    pub fn div_displacement(&self, x: Point) -> f64 {
        let g = self.grad_displacement(x);
        g[0][0] + g[1][1]
    }

    fn grad_div_displacement(&self, x: Point) -> [f64; 2] {
        let h = self.hessian_displacement(x);
        [h[0][0][0] + h[1][1][0], h[0][0][1] + h[1][1][1]]
    }

    /// `σ = 𝒞d - αp𝕀`.
    pub fn stress(&self, x: Point) -> [[f64; 2]; 2] {
        let MaterialParams { lambda, mu, alpha, .. } = self.params;
        let d = self.strain(x);
        let diag = lambda * (d[0][0] + d[1][1]) - alpha * self.pressure(x);
        [[2.0 * mu * d[0][0] + diag, 2.0 * mu * d[0][1]], [2.0 * mu * d[1][0], 2.0 * mu * d[1][1] + diag]]
    }

    pub fn div_stress(&self, x: Point) -> [f64; 2] {
        let MaterialParams { lambda, mu, alpha, .. } = self.params;
        let h = self.hessian_displacement(x);
        let gd = self.grad_div_displacement(x);
        let gp = self.grad_pressure(x);
        // div(2μ ε(u)) = μ (Δu + ∇ div u)
        let lap = [h[0][0][0] + h[0][1][1], h[1][0][0] + h[1][1][1]];
        [
            mu * (lap[0] + gd[0]) + lambda * gd[0] - alpha * gp[0],
            mu * (lap[1] + gd[1]) + lambda * gd[1] - alpha * gp[1],
        ]
    }

    /// Fluid content `ζ` as seen by the permeability law.
    pub fn zeta(&self, x: Point) -> f64 {
        law_fluid_content(&self.law, &self.params, self.div_displacement(x), self.pressure(x))
    }

    fn grad_zeta(&self, x: Point) -> [f64; 2] {
        let (gp, gd) = (self.grad_pressure(x), self.grad_div_displacement(x));
        let s = self.law.zeta_scale();
        let MaterialParams { c0, alpha, .. } = self.params;
        [s * (c0 * gp[0] + alpha * gd[0]), s * (c0 * gp[1] + alpha * gd[1])]
    }

    /// # Panics
    /// If the law is not positive at the exact fluid content.
    pub fn permeability(&self, x: Point) -> f64 {
        eval_permeability(&self.law, &self.params, self.zeta(x)).expect("permeability positive on the exact solution")
    }

    pub fn body_force(&self, x: Point) -> [f64; 2] {
        let d = self.div_stress(x);
        [-d[0], -d[1]]
    }

    /// `g = c0 p + α div u - κ'(ζ)∇ζ·∇p - κ Δp`.
    pub fn source(&self, x: Point) -> f64 {
        let MaterialParams { c0, alpha, .. } = self.params;
        let dk = eval_permeability_derivative(&self.law, &self.params, self.zeta(x)).expect("no pole on the exact solution");
        let (gz, gp) = (self.grad_zeta(x), self.grad_pressure(x));
        c0 * self.pressure(x) + alpha * self.div_displacement(x)
            - dk * (gz[0] * gp[0] + gz[1] * gp[1])
            - self.permeability(x) * self.laplacian_pressure(x)
    }

    /// `r = κ∇p·n`.
    pub fn normal_flux(&self, x: Point, n: [f64; 2]) -> f64 {
        let gp = self.grad_pressure(x);
        self.permeability(x) * (gp[0] * n[0] + gp[1] * n[1])
    }

    /// Loads and natural data on a unit square tagged `bottom`, `right`, `top`, `left`.
    pub fn problem_data(&self) -> ProblemData {
        let me = Arc::new(*self);
        let mut data = {
            let (a, b) = (me.clone(), me.clone());
            ProblemData::new()
                .with_body_force(vector(move |x| a.body_force(x)))
                .with_source(scalar(move |x| b.source(x)))
        };
        for (tag, n) in [("bottom", [0.0, -1.0]), ("right", [1.0, 0.0]), ("top", [0.0, 1.0]), ("left", [-1.0, 0.0])] {
            let (a, b) = (me.clone(), me.clone());
            data = data
                .with_mechanical(tag, MechanicalBc::Displacement(Some(vector(move |x| a.displacement(x)))))
                .with_flow(tag, FlowBc::Flux(Some(scalar(move |x| b.normal_flux(x, n)))));
        }
        data
    }
}

impl ExactFields for ManufacturedCase {
    fn values(&self, x: Point) -> PointValues {
        PointValues {
            strain: self.strain(x),
            pressure: self.pressure(x),
            pressure_grad: self.grad_pressure(x),
            stress: self.stress(x),
            stress_div: self.div_stress(x),
            displacement: self.displacement(x),
            rotation: self.rotation(x),
        }
    }
}

/// Closed-form evaluation of one quantity, flattened row by row.
pub fn manufactured_eval(case: &ManufacturedCase, q: Quantity, x: Point) -> Vec<f64> {
    let flat = |m: [[f64; 2]; 2]| vec![m[0][0], m[0][1], m[1][0], m[1][1]];
    match q {
        Quantity::Displacement => case.displacement(x).to_vec(),
        Quantity::Pressure => vec![case.pressure(x)],
        Quantity::Strain => flat(case.strain(x)),
        Quantity::Rotation => vec![case.rotation(x)],
        Quantity::Stress => flat(case.stress(x)),
        Quantity::BodyForce => case.body_force(x).to_vec(),
        Quantity::Source => vec![case.source(x)],
    }
}

/// Zero fields, for norms of the exact solution.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroFields;

impl ExactFields for ZeroFields {
    fn values(&self, _x: Point) -> PointValues {
        PointValues::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Fourth-order central difference.
    fn d(f: &dyn Fn(Point) -> f64, x: Point, dir: usize) -> f64 {
        let h = 1e-3;
        let at = |s: f64| {
            let mut y = x;
            y[dir] += s * h;
            f(y)
        };
        (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * h)
    }

    #[test]
    fn closed_form_values() {
        let c = ManufacturedCase::default();
        assert_eq!(c.displacement([0.0, 0.0]), [0.0, 0.0]);
        assert!((c.pressure([0.5, 0.5]) - 1.0).abs() < 1e-15);
        let u = c.displacement([1.0, 0.0]);
        assert!((u[0] - 0.2).abs() < 1e-15);
        assert!((u[1] - 0.168_294_196_961_579_3).abs() < 1e-12);
        assert!(c.div_displacement([0.0, 0.0]).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let c = ManufacturedCase::default();
        for x in [[0.3, 0.7], [0.9, 0.1], [0.0, 1.0]] {
            let g = c.grad_displacement(x);
            for i in 0..2 {
                for j in 0..2 {
                    let fd = d(&|y| c.displacement(y)[i], x, j);
                    assert!((fd - g[i][j]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn zero_alpha_decouples_stress() {
        let mut c = ManufacturedCase::default();
        c.params.alpha = 0.0;
        let x = [0.4, 0.6];
        let (s, e) = (c.stress(x), c.strain(x));
        let tr = e[0][0] + e[1][1];
        assert!((s[0][1] - 2.0 * e[0][1]).abs() < 1e-15);
        assert!((s[0][0] - (2.0 * e[0][0] + tr)).abs() < 1e-15);
    }
}

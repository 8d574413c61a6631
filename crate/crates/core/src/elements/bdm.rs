//! Brezzi-Douglas-Marini elements of degree 1 and 2 on the reference triangle.
//!
//! Degrees of freedom, in local order:
//! * for each local edge `i` (from vertex `i+1` to vertex `i+2`) and each
//!   `j <= degree`: `∫_e φ·n L_j(s) ds`, with `n` the outward unit normal, `s`
//!   the normalised arc-length parameter along the traversal and `L_j` the
//!   Legendre polynomial shifted to `[0, 1]`;
//! * for degree 2, three interior moments `∫_T φ·ψ` with
//!   `ψ ∈ {(1,0), (0,1), (-y,x)}`.

use nalgebra::DMatrix;

use super::quadrature::{gauss_legendre, quadrature_for};
use crate::error::ElementError;

pub const REF_VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];

/// Shifted Legendre polynomial on `[0, 1]`.
pub fn legendre01(j: usize, s: f64) -> f64 {
    match j {
        0 => 1.0,
        1 => 2.0 * s - 1.0,
        2 => 6.0 * s * s - 6.0 * s + 1.0,
        _ => panic!("edge moment order {j} not supported"),
    }
}

#[derive(Debug, Clone)]
pub struct BdmElement {
    degree: usize,
    monomials: Vec<(i32, i32)>,
    /// Column `k` holds the monomial coefficients of basis function `k`,
    /// ordered as `[x-component monomials, y-component monomials]`.
    coeffs: DMatrix<f64>,
}

impl BdmElement {
    pub fn new(degree: usize) -> Result<Self, ElementError> {
        if !(1..=2).contains(&degree) {
            return Err(ElementError::UnsupportedDegree(degree));
        }
        let mut monomials = Vec::new();
        for total in 0..=degree as i32 {
            for b in 0..=total {
                monomials.push((total - b, b));
            }
        }
        let nm = monomials.len();
        let dim = 2 * nm;
        let mut el = Self { degree, monomials, coeffs: DMatrix::identity(dim, dim) };
        let mut vander = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            let col = el.apply_dofs(|p| el.raw_monomial(j, p));
            for i in 0..dim {
                vander[(i, j)] = col[i];
            }
        }
        el.coeffs = vander.try_inverse().expect("BDM degrees of freedom are unisolvent");
        Ok(el)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        (self.degree + 1) * (self.degree + 2)
    }

    pub fn moments_per_edge(&self) -> usize {
        self.degree + 1
    }

    pub fn num_interior(&self) -> usize {
        if self.degree == 2 {
            3
        } else {
            0
        }
    }

    fn raw_monomial(&self, j: usize, p: [f64; 2]) -> [f64; 2] {
        let nm = self.monomials.len();
        let (a, b) = self.monomials[j % nm];
        let v = p[0].powi(a) * p[1].powi(b);
        if j < nm {
            [v, 0.0]
        } else {
            [0.0, v]
        }
    }

    fn monomial_values(&self, p: [f64; 2]) -> (Vec<f64>, Vec<[f64; 2]>) {
        let mut v = Vec::with_capacity(self.monomials.len());
        let mut g = Vec::with_capacity(self.monomials.len());
        for &(a, b) in &self.monomials {
            v.push(p[0].powi(a) * p[1].powi(b));
            let dx = if a > 0 { a as f64 * p[0].powi(a - 1) * p[1].powi(b) } else { 0.0 };
            let dy = if b > 0 { b as f64 * p[0].powi(a) * p[1].powi(b - 1) } else { 0.0 };
            g.push([dx, dy]);
        }
        (v, g)
    }

    /// Reference basis values and divergences at `p`.
    pub fn eval(&self, p: [f64; 2], values: &mut [[f64; 2]], divs: &mut [f64]) {
        let nm = self.monomials.len();
        let (v, g) = self.monomial_values(p);
        for k in 0..self.dim() {
            let (mut fx, mut fy, mut div) = (0.0, 0.0, 0.0);
            for m in 0..nm {
                let cx = self.coeffs[(m, k)];
                let cy = self.coeffs[(nm + m, k)];
                fx += cx * v[m];
                fy += cy * v[m];
                div += cx * g[m][0] + cy * g[m][1];
            }
            values[k] = [fx, fy];
            divs[k] = div;
        }
    }

    pub fn values(&self, p: [f64; 2]) -> Vec<[f64; 2]> {
        let mut v = vec![[0.0; 2]; self.dim()];
        let mut d = vec![0.0; self.dim()];
        self.eval(p, &mut v, &mut d);
        v
    }

    pub fn divergences(&self, p: [f64; 2]) -> Vec<f64> {
        let mut v = vec![[0.0; 2]; self.dim()];
        let mut d = vec![0.0; self.dim()];
        self.eval(p, &mut v, &mut d);
        d
    }

    /// Applies the local degrees of freedom to a vector field on the reference cell.
    pub fn apply_dofs(&self, f: impl Fn([f64; 2]) -> [f64; 2]) -> Vec<f64> {
        let (s, w) = gauss_legendre(self.degree + 2);
        let mut out = Vec::with_capacity(self.dim());
        for i in 0..3 {
            let a = REF_VERTICES[(i + 1) % 3];
            let b = REF_VERTICES[(i + 2) % 3];
            let t = [b[0] - a[0], b[1] - a[1]];
            // |e| n: right normal of the counterclockwise traversal.
            let nu = [t[1], -t[0]];
            for j in 0..=self.degree {
                let mut m = 0.0;
                for (&s, &w) in s.iter().zip(&w) {
                    let v = f([a[0] + s * t[0], a[1] + s * t[1]]);
                    m += w * (v[0] * nu[0] + v[1] * nu[1]) * legendre01(j, s);
                }
                out.push(m);
            }
        }
        if self.degree == 2 {
            let q = quadrature_for(4).expect("degree 4 rule");
            for psi in 0..3 {
                out.push(q.integrate(|p| {
                    let v = f(p);
                    match psi {
                        0 => v[0],
                        1 => v[1],
                        _ => -p[1] * v[0] + p[0] * v[1],
                    }
                }));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        assert_eq!(BdmElement::new(1).unwrap().dim(), 6);
        assert_eq!(BdmElement::new(2).unwrap().dim(), 12);
        assert!(BdmElement::new(0).is_err());
        assert!(BdmElement::new(3).is_err());
    }

    #[test]
    fn kronecker_duality() {
        for r in 1..=2 {
            let el = BdmElement::new(r).unwrap();
            for k in 0..el.dim() {
                let dofs = el.apply_dofs(|p| el.values(p)[k]);
                for (i, d) in dofs.iter().enumerate() {
                    let e = if i == k { 1.0 } else { 0.0 };
                    assert!((d - e).abs() < 1e-12, "r={r} k={k} i={i} got {d}");
                }
            }
        }
    }

    #[test]
    fn divergence_is_lower_degree_and_matches_flux() {
        // ∫_T div φ = Σ_edges ∫ φ·n = sum of the constant edge moments.
        let q = quadrature_for(4).unwrap();
        for r in 1..=2 {
            let el = BdmElement::new(r).unwrap();
            for k in 0..el.dim() {
                let int_div = q.integrate(|p| el.divergences(p)[k]);
                let flux: f64 = (0..3).map(|i| if i * (r + 1) == k { 1.0 } else { 0.0 }).sum();
                assert!((int_div - flux).abs() < 1e-12);
            }
            if r == 1 {
                let d0 = el.divergences([0.1, 0.2]);
                let d1 = el.divergences([0.6, 0.3]);
                for k in 0..el.dim() {
                    assert!((d0[k] - d1[k]).abs() < 1e-12);
                }
            }
        }
    }
}

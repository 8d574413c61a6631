//! Nodal Lagrange bases of degree 0, 1, 2 on the reference triangle.
//!
//! Node order: vertices `(0,0), (1,0), (0,1)`, then the midpoints of local
//! edges 0, 1, 2 (edge `i` is opposite vertex `i`). Degree 0 has one node at
//! the centroid.

use crate::error::ElementError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LagrangeElement {
    degree: usize,
}

impl LagrangeElement {
    pub fn new(degree: usize) -> Result<Self, ElementError> {
        if degree > 2 {
            return Err(ElementError::UnsupportedDegree(degree));
        }
        Ok(Self { degree })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        (self.degree + 1) * (self.degree + 2) / 2
    }

    pub fn nodes(&self) -> Vec<[f64; 2]> {
        match self.degree {
            0 => vec![[1.0 / 3.0, 1.0 / 3.0]],
            1 => vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            _ => vec![
                [0.0, 0.0],
                [1.0, 0.0],
                [0.0, 1.0],
                [0.5, 0.5],
                [0.0, 0.5],
                [0.5, 0.0],
            ],
        }
    }

    pub fn eval(&self, p: [f64; 2], out: &mut [f64]) {
        let l = [1.0 - p[0] - p[1], p[0], p[1]];
        match self.degree {
            0 => out[0] = 1.0,
            1 => out[..3].copy_from_slice(&l),
            _ => {
                for i in 0..3 {
                    out[i] = l[i] * (2.0 * l[i] - 1.0);
                }
                out[3] = 4.0 * l[1] * l[2];
                out[4] = 4.0 * l[2] * l[0];
                out[5] = 4.0 * l[0] * l[1];
            }
        }
    }

    /// Reference gradients.
    pub fn grad(&self, p: [f64; 2], out: &mut [[f64; 2]]) {
        const G: [[f64; 2]; 3] = [[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]];
        let l = [1.0 - p[0] - p[1], p[0], p[1]];
        match self.degree {
            0 => out[0] = [0.0, 0.0],
            1 => out[..3].copy_from_slice(&G),
            _ => {
                for i in 0..3 {
                    let s = 4.0 * l[i] - 1.0;
                    out[i] = [s * G[i][0], s * G[i][1]];
                }
                for (slot, (a, b)) in [(3, (1, 2)), (4, (2, 0)), (5, (0, 1))] {
                    out[slot] = [
                        4.0 * (l[a] * G[b][0] + l[b] * G[a][0]),
                        4.0 * (l[a] * G[b][1] + l[b] * G[a][1]),
                    ];
                }
            }
        }
    }

    pub fn values(&self, p: [f64; 2]) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        self.eval(p, &mut v);
        v
    }

    pub fn gradients(&self, p: [f64; 2]) -> Vec<[f64; 2]> {
        let mut g = vec![[0.0; 2]; self.dim()];
        self.grad(p, &mut g);
        g
    }

    /// Applies the nodal functionals (point evaluations) to `f`.
    pub fn apply_dofs(&self, f: impl Fn([f64; 2]) -> f64) -> Vec<f64> {
        self.nodes().into_iter().map(f).collect()
    }
}

//! Error norms between discrete and exact fields.

use rayon::prelude::*;

use super::manufactured::ExactFields;
use crate::elements::{quadrature_for, CellBasis, CellGeometry, PointValues, RefTab, SpaceSet};
use crate::mesh::Mesh;
use crate::solver::FieldState;

/// Errors in the natural norm of each unknown.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorReport {
    pub h: f64,
    pub dofs: usize,
    /// Tensor `L²` error of the strain.
    pub e0_d: f64,
    /// Full `H¹` error of the pressure.
    pub e1_p: f64,
    /// Tensor `H(div)` error of the stress.
    pub ediv_sigma: f64,
    pub e0_u: f64,
    /// `L²` error of the skew rotation tensor (twice the squared entry).
    pub e0_gamma: f64,
}

impl ErrorReport {
    pub fn values(&self) -> [f64; 5] {
        [self.e0_d, self.e1_p, self.ediv_sigma, self.e0_u, self.e0_gamma]
    }

    pub const NAMES: [&'static str; 5] = ["e0_d", "e1_p", "ediv_sigma", "e0_u", "e0_gamma"];
}

fn sq(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> f64 {
    (0..2).flat_map(|i| (0..2).map(move |j| (a[i][j] - b[i][j]).powi(2))).sum()
}

/// Squared integrands: strain, pressure, pressure gradient, stress, stress divergence,
/// displacement, rotation.
fn local_sq(a: &PointValues, b: &PointValues) -> [f64; 7] {
    let v2 = |x: [f64; 2], y: [f64; 2]| (x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2);
    [
        sq(a.strain, b.strain),
        (a.pressure - b.pressure).powi(2),
        v2(a.pressure_grad, b.pressure_grad),
        sq(a.stress, b.stress),
        v2(a.stress_div, b.stress_div),
        v2(a.displacement, b.displacement),
        2.0 * (a.rotation - b.rotation).powi(2),
    ]
}

fn report(mesh: &Mesh, dofs: usize, s: [f64; 7]) -> ErrorReport {
    ErrorReport {
        h: mesh.mesh_size(),
        dofs,
        e0_d: s[0].sqrt(),
        e1_p: (s[1] + s[2]).sqrt(),
        ediv_sigma: (s[3] + s[4]).sqrt(),
        e0_u: s[5].sqrt(),
        e0_gamma: s[6].sqrt(),
    }
}

fn sum_cells(mesh: &Mesh, f: impl Fn(usize) -> [f64; 7] + Sync) -> [f64; 7] {
    let parts: Vec<[f64; 7]> = (0..mesh.num_cells()).into_par_iter().map(&f).collect();
    parts.iter().fold([0.0; 7], |mut acc, p| {
        for (a, v) in acc.iter_mut().zip(p) {
            *a += v;
        }
        acc
    })
}

/// Quadrature degree used for error norms at polynomial degree `k`.
pub fn error_quadrature_degree(k: usize) -> usize {
    2 * (k + 2) + 2
}

/// Errors of `state` against `exact`.
pub fn compute_errors(mesh: &Mesh, spaces: &SpaceSet, state: &FieldState, exact: &dyn ExactFields) -> ErrorReport {
    let rule = quadrature_for(error_quadrature_degree(spaces.degree())).expect("error quadrature available");
    let tab = RefTab::new(spaces, &rule.points);
    let view = state.view(spaces);
    let s = sum_cells(mesh, |c| {
        let cb = CellBasis::new(mesh, spaces, &tab, c);
        let mut acc = [0.0; 7];
        for (q, &w) in rule.weights.iter().enumerate() {
            let w = w * cb.geometry.det;
            let e = local_sq(&view.at(c, &tab, &cb, q), &exact.values(cb.x[q]));
            for (a, v) in acc.iter_mut().zip(e) {
                *a += w * v;
            }
        }
        acc
    });
    report(mesh, spaces.total_dofs(), s)
}

/// Distance between two exact field sets with the same norms.
pub fn exact_distance(mesh: &Mesh, a: &dyn ExactFields, b: &dyn ExactFields, degree: usize) -> ErrorReport {
    let rule = quadrature_for(degree).expect("quadrature available");
    let s = sum_cells(mesh, |c| {
        let geo = CellGeometry::of_cell(mesh, c);
        let mut acc = [0.0; 7];
        for (p, &w) in rule.points.iter().zip(&rule.weights) {
            let x = geo.map(*p);
            let e = local_sq(&a.values(x), &b.values(x));
            for (a, v) in acc.iter_mut().zip(e) {
                *a += w * geo.det * v;
            }
        }
        acc
    });
    report(mesh, 0, s)
}

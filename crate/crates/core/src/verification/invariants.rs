//! Structural properties every discrete solution must satisfy.

use rayon::prelude::*;

use crate::elements::{edge_rule, CellBasis, CellGeometry, RefTab};
use crate::forms::Forms;
use crate::mesh::Point;
use crate::problem::{MechanicalBc, ProblemData};
use crate::solver::FieldState;

/// Relative defects of the discrete equations that hold exactly cell by cell.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StructuralReport {
    /// `max_η |∫σ:η| / (‖σ‖₀ ‖η‖₀)` over rotation basis functions.
    pub weak_symmetry: f64,
    /// `max_v |∫_K (div σ + f)·v| / (‖v‖₀ max(‖div σ‖₀, ‖f‖₀))` over displacement basis functions.
    pub momentum_balance: f64,
    /// `max |[σn]| / max |σn|` at quadrature points of interior edges.
    pub normal_jump: f64,
    /// Cells next to sliding edges, whose momentum row carries the boundary term.
    pub skipped_cells: usize,
}

impl StructuralReport {
    pub fn max_defect(&self) -> f64 {
        self.weak_symmetry.max(self.momentum_balance).max(self.normal_jump)
    }
}

struct CellDefects {
    sym: Vec<(f64, f64)>,
    mom: Vec<(f64, f64)>,
    sigma_sq: f64,
    div_sq: f64,
    f_sq: f64,
}

/// Weak symmetry, local momentum balance and normal-trace continuity of `state`.
pub fn structural_checks(forms: &Forms, state: &FieldState, data: &ProblemData) -> StructuralReport {
    let mesh = forms.mesh;
    let s = forms.spaces;
    let (nb, nl) = (s.stress_element.dim(), s.low_element.dim());
    let mut sliding = vec![false; mesh.num_cells()];
    for (e, tag) in mesh.boundary_edges() {
        if matches!(data.mechanical_bc(tag), MechanicalBc::Slide) {
            sliding[mesh.edge_cells(e)[0].expect("boundary edge has a cell")] = true;
        }
    }
    let view = state.view(s);
    let body = data.body_force.as_ref();
    let cells: Vec<CellDefects> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let cb = forms.cell_basis(c);
            let b2 = forms.local_b2_with(&cb);
            let sd = s.stress.cell_dofs(c);
            let (mut sigma_sq, mut div_sq, mut f_sq) = (0.0, 0.0, 0.0);
            let mut mass = vec![0.0; nl];
            let mut fv = vec![0.0; 2 * nl];
            for (q, &w) in forms.quadrature.weights.iter().enumerate() {
                let w = w * cb.geometry.det;
                let pv = view.at(c, &forms.tab, &cb, q);
                sigma_sq += w * pv.stress.iter().flatten().map(|v| v * v).sum::<f64>();
                div_sq += w * (pv.stress_div[0].powi(2) + pv.stress_div[1].powi(2));
                let f = body.map_or([0.0; 2], |b| b(cb.x[q]));
                f_sq += w * (f[0] * f[0] + f[1] * f[1]);
                for m in 0..nl {
                    let chi = forms.tab.low[q][m];
                    mass[m] += w * chi * chi;
                    fv[m] += w * f[0] * chi;
                    fv[nl + m] += w * f[1] * chi;
                }
            }
            let pair = |col: usize| (0..2 * nb).map(|i| b2[(i, col)] * state.stress[sd[i]]).sum::<f64>();
            // Rotation: b₂ column is -∫σ:η, and ‖η‖₀² = 2∫χ².
            let sym = (0..nl).map(|m| (pair(2 * nl + m).abs(), (2.0 * mass[m]).sqrt())).collect();
            let mom = if sliding[c] {
                Vec::new()
            } else {
                (0..2 * nl).map(|j| ((pair(j) - fv[j]).abs(), mass[j % nl].sqrt())).collect()
            };
            CellDefects { sym, mom, sigma_sq, div_sq, f_sq }
        })
        .collect();

    let sigma = cells.iter().map(|c| c.sigma_sq).sum::<f64>().sqrt();
    let div = cells.iter().map(|c| c.div_sq).sum::<f64>().sqrt();
    let f = cells.iter().map(|c| c.f_sq).sum::<f64>().sqrt();
    let ratio = |num: f64, den: f64| if num == 0.0 { 0.0 } else { num / den };
    let weak_symmetry = cells
        .iter()
        .flat_map(|c| c.sym.iter())
        .map(|&(r, n)| ratio(r, n * sigma))
        .fold(0.0, f64::max);
    let momentum_balance = cells
        .iter()
        .flat_map(|c| c.mom.iter())
        .map(|&(r, n)| ratio(r, n * div.max(f)))
        .fold(0.0, f64::max);
    StructuralReport {
        weak_symmetry,
        momentum_balance,
        normal_jump: normal_jump(forms, state),
        skipped_cells: sliding.iter().filter(|&&b| b).count(),
    }
}

/// `max |[σn]| / max |σn|` over interior edges.
pub fn normal_jump(forms: &Forms, state: &FieldState) -> f64 {
    let mesh = forms.mesh;
    let s = forms.spaces;
    let view = state.view(s);
    let (sp, _) = edge_rule(2 * s.degree() + 4);
    let (jump, scale) = (0..mesh.num_edges())
        .into_par_iter()
        .filter_map(|e| {
            let [Some(k1), Some(k2)] = mesh.edge_cells(e) else { return None };
            let [a, b] = mesh.edges()[e].map(|v| mesh.vertices()[v]);
            let t = [b[0] - a[0], b[1] - a[1]];
            let n = [t[1], -t[0]];
            let pts: Vec<Point> = sp.iter().map(|&s| [a[0] + s * t[0], a[1] + s * t[1]]).collect();
            let trace = |cell: usize| -> Vec<[f64; 2]> {
                let geo = CellGeometry::of_cell(mesh, cell);
                let refs: Vec<[f64; 2]> = pts.iter().map(|&x| geo.inverse_map(x)).collect();
                let tab = RefTab::new(s, &refs);
                let cb = CellBasis::new(mesh, s, &tab, cell);
                (0..refs.len())
                    .map(|q| {
                        let st = view.at(cell, &tab, &cb, q).stress;
                        [st[0][0] * n[0] + st[0][1] * n[1], st[1][0] * n[0] + st[1][1] * n[1]]
                    })
                    .collect()
            };
            let (t1, t2) = (trace(k1), trace(k2));
            let mut jump: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for (x, y) in t1.iter().zip(&t2) {
                for r in 0..2 {
                    jump = jump.max((x[r] - y[r]).abs());
                    scale = scale.max(x[r].abs()).max(y[r].abs());
                }
            }
            Some((jump, scale))
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    if jump == 0.0 {
        0.0
    } else {
        jump / scale
    }
}

//! Global degree-of-freedom maps and physical basis evaluation for the five
//! unknowns: strain, pressure, stress, displacement and rotation.

use super::bdm::BdmElement;
use super::lagrange::LagrangeElement;
use crate::error::ElementError;
use crate::mesh::{Mesh, Point};

/// Affine map `x = x0 + J ξ` from the reference triangle to a mesh cell.
#[derive(Debug, Clone, Copy)]
pub struct CellGeometry {
    pub x0: Point,
    pub jac: [[f64; 2]; 2],
    pub det: f64,
    pub jinv: [[f64; 2]; 2],
}

impl CellGeometry {
    pub fn new(v: [Point; 3]) -> Self {
        let jac = [[v[1][0] - v[0][0], v[2][0] - v[0][0]], [v[1][1] - v[0][1], v[2][1] - v[0][1]]];
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let jinv = [[jac[1][1] / det, -jac[0][1] / det], [-jac[1][0] / det, jac[0][0] / det]];
        Self { x0: v[0], jac, det, jinv }
    }

    pub fn of_cell(mesh: &Mesh, cell: usize) -> Self {
        Self::new(mesh.cell_vertices(cell))
    }

    pub fn map(&self, p: [f64; 2]) -> Point {
        [
            self.x0[0] + self.jac[0][0] * p[0] + self.jac[0][1] * p[1],
            self.x0[1] + self.jac[1][0] * p[0] + self.jac[1][1] * p[1],
        ]
    }

    /// Reference coordinates of a physical point.
    pub fn inverse_map(&self, x: Point) -> [f64; 2] {
        let (rx, ry) = (x[0] - self.x0[0], x[1] - self.x0[1]);
        [self.jinv[0][0] * rx + self.jinv[0][1] * ry, self.jinv[1][0] * rx + self.jinv[1][1] * ry]
    }

    /// Physical gradient from a reference gradient: `J^{-T} ĝ`.
    pub fn grad(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.jinv[0][0] * g[0] + self.jinv[1][0] * g[1],
            self.jinv[0][1] * g[0] + self.jinv[1][1] * g[1],
        ]
    }

    /// Contravariant Piola transform `J v̂ / det J`.
    pub fn piola(&self, v: [f64; 2]) -> [f64; 2] {
        [
            (self.jac[0][0] * v[0] + self.jac[0][1] * v[1]) / self.det,
            (self.jac[1][0] * v[0] + self.jac[1][1] * v[1]) / self.det,
        ]
    }

    pub fn area(&self) -> f64 {
        0.5 * self.det
    }
}

/// Cell-to-global DOF table of one discrete space.
#[derive(Debug, Clone)]
pub struct DofMap {
    num_dofs: usize,
    local_dim: usize,
    dofs: Vec<usize>,
    signs: Vec<f64>,
}

impl DofMap {
    pub fn num_dofs(&self) -> usize {
        self.num_dofs
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn num_cells(&self) -> usize {
        self.dofs.len() / self.local_dim
    }

    pub fn cell_dofs(&self, cell: usize) -> &[usize] {
        &self.dofs[cell * self.local_dim..(cell + 1) * self.local_dim]
    }

    /// Orientation signs (`±1`) matching [`Self::cell_dofs`].
    pub fn cell_signs(&self, cell: usize) -> &[f64] {
        &self.signs[cell * self.local_dim..(cell + 1) * self.local_dim]
    }

    fn discontinuous(num_cells: usize, local_dim: usize) -> Self {
        Self {
            num_dofs: num_cells * local_dim,
            local_dim,
            dofs: (0..num_cells * local_dim).collect(),
            signs: vec![1.0; num_cells * local_dim],
        }
    }
}

/// The discrete spaces of the weakly symmetric mixed method of degree `k`.
#[derive(Debug, Clone)]
pub struct SpaceSet {
    k: usize,
    /// Scalar element used componentwise for the strain (degree `k+1`, discontinuous).
    pub strain_element: LagrangeElement,
    /// Continuous pressure element of degree `k+1`.
    pub pressure_element: LagrangeElement,
    /// Row element of the stress (BDM of degree `k+1`).
    pub stress_element: BdmElement,
    /// Scalar element for displacement components and the rotation (degree `k`).
    pub low_element: LagrangeElement,
    pub strain: DofMap,
    pub pressure: DofMap,
    pub stress: DofMap,
    pub displacement: DofMap,
    pub rotation: DofMap,
    stress_per_row: usize,
    num_edges: usize,
}

impl SpaceSet {
    pub fn degree(&self) -> usize {
        self.k
    }

    /// Global BDM DOFs of one stress row.
    pub fn stress_per_row(&self) -> usize {
        self.stress_per_row
    }

    pub fn counts(&self) -> [usize; 5] {
        [
            self.strain.num_dofs(),
            self.pressure.num_dofs(),
            self.stress.num_dofs(),
            self.displacement.num_dofs(),
            self.rotation.num_dofs(),
        ]
    }

    pub fn total_dofs(&self) -> usize {
        self.counts().iter().sum()
    }

    /// Global stress DOF of moment `j` on `edge` for tensor row `row`.
    pub fn stress_edge_dof(&self, row: usize, edge: usize, j: usize) -> usize {
        row * self.stress_per_row + edge * self.stress_element.moments_per_edge() + j
    }

    /// Pressure DOFs lying on the given edges (vertex nodes and, for `k = 1`, midpoints).
    pub fn pressure_dofs_on_edges(&self, mesh: &Mesh, edges: &[usize]) -> Vec<usize> {
        let nv = mesh.num_vertices();
        let mut out: Vec<usize> = Vec::new();
        for &e in edges {
            let [a, b] = mesh.edges()[e];
            out.extend([a, b]);
            if self.pressure_element.degree() == 2 {
                out.push(nv + e);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Coordinates of pressure DOF nodes.
    pub fn pressure_node(&self, mesh: &Mesh, dof: usize) -> Point {
        let nv = mesh.num_vertices();
        if dof < nv {
            mesh.vertices()[dof]
        } else {
            let [a, b] = mesh.edges()[dof - nv];
            let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
            [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]
        }
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }
}

/// Builds the spaces of degree `k ∈ {0, 1}` on `mesh`.
pub fn make_space_set(mesh: &Mesh, k: usize) -> Result<SpaceSet, ElementError> {
    if k > 1 {
        return Err(ElementError::UnsupportedDegree(k));
    }
    let strain_element = LagrangeElement::new(k + 1)?;
    let pressure_element = LagrangeElement::new(k + 1)?;
    let stress_element = BdmElement::new(k + 1)?;
    let low_element = LagrangeElement::new(k)?;
    let nc = mesh.num_cells();
    let nv = mesh.num_vertices();
    let ne = mesh.num_edges();

    let np = pressure_element.dim();
    let mut pdofs = Vec::with_capacity(nc * np);
    for c in 0..nc {
        pdofs.extend_from_slice(&mesh.triangles()[c]);
        if k == 1 {
            pdofs.extend(mesh.cell_edges(c).iter().map(|&e| nv + e));
        }
    }
    let pressure = DofMap {
        num_dofs: if k == 1 { nv + ne } else { nv },
        local_dim: np,
        signs: vec![1.0; pdofs.len()],
        dofs: pdofs,
    };

    let nb = stress_element.dim();
    let nmom = stress_element.moments_per_edge();
    let nint = stress_element.num_interior();
    let per_row = ne * nmom + nc * nint;
    let mut sdofs = Vec::with_capacity(nc * 2 * nb);
    let mut ssigns = Vec::with_capacity(nc * 2 * nb);
    for c in 0..nc {
        let edges = mesh.cell_edges(c);
        let orient = mesh.cell_edge_signs(c);
        for row in 0..2 {
            for i in 0..3 {
                let o = f64::from(orient[i]);
                for j in 0..nmom {
                    sdofs.push(row * per_row + edges[i] * nmom + j);
                    ssigns.push(if j % 2 == 0 { o } else { 1.0 });
                }
            }
            for m in 0..nint {
                sdofs.push(row * per_row + ne * nmom + c * nint + m);
                ssigns.push(1.0);
            }
        }
    }
    let stress = DofMap { num_dofs: 2 * per_row, local_dim: 2 * nb, dofs: sdofs, signs: ssigns };

    Ok(SpaceSet {
        k,
        strain: DofMap::discontinuous(nc, 4 * strain_element.dim()),
        displacement: DofMap::discontinuous(nc, 2 * low_element.dim()),
        rotation: DofMap::discontinuous(nc, low_element.dim()),
        strain_element,
        pressure_element,
        stress_element,
        low_element,
        pressure,
        stress,
        stress_per_row: per_row,
        num_edges: ne,
    })
}

/// Reference-cell tabulation of every element at a fixed point set.
#[derive(Debug, Clone)]
pub struct RefTab {
    pub points: Vec<[f64; 2]>,
    pub strain: Vec<Vec<f64>>,
    pub pressure: Vec<Vec<f64>>,
    pub pressure_grad: Vec<Vec<[f64; 2]>>,
    pub stress: Vec<Vec<[f64; 2]>>,
    pub stress_div: Vec<Vec<f64>>,
    pub low: Vec<Vec<f64>>,
}

impl RefTab {
    pub fn new(spaces: &SpaceSet, points: &[[f64; 2]]) -> Self {
        let mut stress = Vec::with_capacity(points.len());
        let mut stress_div = Vec::with_capacity(points.len());
        for &p in points {
            let n = spaces.stress_element.dim();
            let mut v = vec![[0.0; 2]; n];
            let mut d = vec![0.0; n];
            spaces.stress_element.eval(p, &mut v, &mut d);
            stress.push(v);
            stress_div.push(d);
        }
        Self {
            points: points.to_vec(),
            strain: points.iter().map(|&p| spaces.strain_element.values(p)).collect(),
            pressure: points.iter().map(|&p| spaces.pressure_element.values(p)).collect(),
            pressure_grad: points.iter().map(|&p| spaces.pressure_element.gradients(p)).collect(),
            stress,
            stress_div,
            low: points.iter().map(|&p| spaces.low_element.values(p)).collect(),
        }
    }
}

/// Physical basis values on one cell at the points of a [`RefTab`].
///
/// Stress local index `row * nb + i` denotes the tensor whose row `row` is
/// the (signed, Piola-mapped) BDM function `i` and whose other row is zero.
#[derive(Debug, Clone)]
pub struct CellBasis {
    pub geometry: CellGeometry,
    pub x: Vec<Point>,
    pub pressure_grad: Vec<Vec<[f64; 2]>>,
    pub stress: Vec<Vec<[f64; 2]>>,
    pub stress_div: Vec<Vec<f64>>,
}

impl CellBasis {
    pub fn new(mesh: &Mesh, spaces: &SpaceSet, tab: &RefTab, cell: usize) -> Self {
        let geometry = CellGeometry::of_cell(mesh, cell);
        let nb = spaces.stress_element.dim();
        let signs = &spaces.stress.cell_signs(cell)[..nb];
        let mut stress = Vec::with_capacity(tab.points.len());
        let mut stress_div = Vec::with_capacity(tab.points.len());
        for q in 0..tab.points.len() {
            stress.push((0..nb).map(|i| {
                let v = geometry.piola(tab.stress[q][i]);
                [signs[i] * v[0], signs[i] * v[1]]
            }).collect());
            stress_div.push((0..nb).map(|i| signs[i] * tab.stress_div[q][i] / geometry.det).collect());
        }
        Self {
            x: tab.points.iter().map(|&p| geometry.map(p)).collect(),
            pressure_grad: tab
                .pressure_grad
                .iter()
                .map(|gs| gs.iter().map(|&g| geometry.grad(g)).collect())
                .collect(),
            stress,
            stress_div,
            geometry,
        }
    }
}

/// Evaluates fields given by coefficient vectors at reference points of a cell.
#[derive(Debug, Clone, Copy)]
pub struct FieldView<'a> {
    pub spaces: &'a SpaceSet,
    pub strain: &'a [f64],
    pub pressure: &'a [f64],
    pub stress: &'a [f64],
    pub displacement: &'a [f64],
    pub rotation: &'a [f64],
}

/// Pointwise values of all five fields.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PointValues {
    pub strain: [[f64; 2]; 2],
    pub pressure: f64,
    pub pressure_grad: [f64; 2],
    pub stress: [[f64; 2]; 2],
    pub stress_div: [f64; 2],
    pub displacement: [f64; 2],
    /// The `(1, 2)` entry of the skew rotation tensor.
    pub rotation: f64,
}

impl FieldView<'_> {
    /// Values at quadrature point `q` of `tab` on a cell with basis `cb`.
    pub fn at(&self, cell: usize, tab: &RefTab, cb: &CellBasis, q: usize) -> PointValues {
        let s = self.spaces;
        let mut out = PointValues::default();
        let sd = s.strain.cell_dofs(cell);
        let nps = s.strain_element.dim();
        for comp in 0..4 {
            let mut v = 0.0;
            for m in 0..nps {
                v += self.strain[sd[comp * nps + m]] * tab.strain[q][m];
            }
            out.strain[comp / 2][comp % 2] = v;
        }
        for (i, &g) in s.pressure.cell_dofs(cell).iter().enumerate() {
            let c = self.pressure[g];
            out.pressure += c * tab.pressure[q][i];
            out.pressure_grad[0] += c * cb.pressure_grad[q][i][0];
            out.pressure_grad[1] += c * cb.pressure_grad[q][i][1];
        }
        let nb = s.stress_element.dim();
        let st = s.stress.cell_dofs(cell);
        for row in 0..2 {
            for i in 0..nb {
                let c = self.stress[st[row * nb + i]];
                out.stress[row][0] += c * cb.stress[q][i][0];
                out.stress[row][1] += c * cb.stress[q][i][1];
                out.stress_div[row] += c * cb.stress_div[q][i];
            }
        }
        let nl = s.low_element.dim();
        let ud = s.displacement.cell_dofs(cell);
        let rd = s.rotation.cell_dofs(cell);
        for m in 0..nl {
            out.displacement[0] += self.displacement[ud[m]] * tab.low[q][m];
            out.displacement[1] += self.displacement[ud[nl + m]] * tab.low[q][m];
            out.rotation += self.rotation[rd[m]] * tab.low[q][m];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::quadrature::{edge_rule, quadrature_for};
    use crate::mesh::{build_structured_mesh, SideTags};

    fn unit(n: usize) -> Mesh {
        build_structured_mesh(n, n, 1.0, 1.0, &SideTags::per_side()).unwrap()
    }

    #[test]
    fn single_triangle_counts() {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let tags = vec![crate::mesh::BoundaryTag { name: "w".into(), sides: vec![] }];
        let m = Mesh::from_parts(v, vec![[0, 1, 2]], tags, &[(0, 1, 0), (1, 2, 0), (2, 0, 0)]).unwrap();
        let s = make_space_set(&m, 0).unwrap();
        assert_eq!(s.counts(), [12, 3, 12, 2, 1]);
        assert_eq!(s.total_dofs(), 30);
        let s1 = make_space_set(&m, 1).unwrap();
        assert_eq!(s1.counts(), [24, 6, 24, 6, 3]);
        assert!(make_space_set(&m, 2).is_err());
    }

    #[test]
    fn structured_counts() {
        assert_eq!(make_space_set(&unit(1), 0).unwrap().pressure.num_dofs(), 4);
        let s = make_space_set(&unit(2), 0).unwrap();
        assert_eq!(s.stress_per_row(), 32);
        assert_eq!(s.stress.num_dofs(), 64);
    }

    #[test]
    fn pressure_dofs_shared_consistently() {
        let m = unit(3);
        let s = make_space_set(&m, 1).unwrap();
        let tab = RefTab::new(&s, &s.pressure_element.nodes());
        for c in 0..m.num_cells() {
            let g = CellGeometry::of_cell(&m, c);
            for (i, &d) in s.pressure.cell_dofs(c).iter().enumerate() {
                let x = g.map(tab.points[i]);
                let y = s.pressure_node(&m, d);
                assert!((x[0] - y[0]).abs() < 1e-14 && (x[1] - y[1]).abs() < 1e-14);
            }
        }
    }

    /// For a random global stress vector, σn is continuous across interior edges.
    #[test]
    fn normal_trace_continuity() {
        let m = unit(3);
        for k in 0..2 {
            let s = make_space_set(&m, k).unwrap();
            let coeffs: Vec<f64> = (0..s.stress.num_dofs()).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect();
            let (pts, _) = edge_rule(4);
            for e in 0..m.num_edges() {
                let [Some(c0), Some(c1)] = m.edge_cells(e) else { continue };
                let [a, b] = m.edges()[e];
                let (pa, pb) = (m.vertices()[a], m.vertices()[b]);
                let n = [pb[1] - pa[1], -(pb[0] - pa[0])];
                for &t in &pts {
                    let x = [pa[0] + t * (pb[0] - pa[0]), pa[1] + t * (pb[1] - pa[1])];
                    let flux = |c: usize| -> [f64; 2] {
                        let g = CellGeometry::of_cell(&m, c);
                        let xi = [
                            g.jinv[0][0] * (x[0] - g.x0[0]) + g.jinv[0][1] * (x[1] - g.x0[1]),
                            g.jinv[1][0] * (x[0] - g.x0[0]) + g.jinv[1][1] * (x[1] - g.x0[1]),
                        ];
                        let tab = RefTab::new(&s, &[xi]);
                        let cb = CellBasis::new(&m, &s, &tab, c);
                        let nb = s.stress_element.dim();
                        let dofs = s.stress.cell_dofs(c);
                        let mut out = [0.0; 2];
                        for row in 0..2 {
                            for i in 0..nb {
                                let v = cb.stress[0][i];
                                out[row] += coeffs[dofs[row * nb + i]] * (v[0] * n[0] + v[1] * n[1]);
                            }
                        }
                        out
                    };
                    let (f0, f1) = (flux(c0), flux(c1));
                    assert!((f0[0] - f1[0]).abs() < 1e-10 && (f0[1] - f1[1]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn stress_rows_lie_in_strain_space() {
        // L²-project each stress row function onto P_{k+1} per component and check the residual.
        let m = unit(2);
        for k in 0..2 {
            let s = make_space_set(&m, k).unwrap();
            let q = quadrature_for(2 * k + 4).unwrap();
            let tab = RefTab::new(&s, &q.points);
            let cb = CellBasis::new(&m, &s, &tab, 3);
            let np = s.strain_element.dim();
            let mut mass = nalgebra::DMatrix::<f64>::zeros(np, np);
            for (qi, w) in q.weights.iter().enumerate() {
                for a in 0..np {
                    for b in 0..np {
                        mass[(a, b)] += w * tab.strain[qi][a] * tab.strain[qi][b];
                    }
                }
            }
            let inv = mass.try_inverse().unwrap();
            for i in 0..s.stress_element.dim() {
                for comp in 0..2 {
                    let mut rhs = nalgebra::DVector::<f64>::zeros(np);
                    for (qi, w) in q.weights.iter().enumerate() {
                        for a in 0..np {
                            rhs[a] += w * tab.strain[qi][a] * cb.stress[qi][i][comp];
                        }
                    }
                    let c = &inv * rhs;
                    for qi in 0..q.len() {
                        let proj: f64 = (0..np).map(|a| c[a] * tab.strain[qi][a]).sum();
                        assert!((proj - cb.stress[qi][i][comp]).abs() < 1e-12);
                    }
                }
            }
        }
    }
}

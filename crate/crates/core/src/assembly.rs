//! Monolithic block system and essential boundary conditions.
//!
//! Unknown ordering: strain, pressure, stress, displacement, rotation.

use std::ops::Range;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::elements::bdm::legendre01;
use crate::elements::SpaceSet;
use crate::error::AssemblyError;
use crate::forms::{EdgeQuadrature, FormContext, Forms};
use crate::linalg::{CscMatrix, SparsityPattern};
use crate::mesh::Mesh;
use crate::problem::{FlowBc, MechanicalBc, ProblemData, ScalarField, VectorField};

const CHUNK: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    Strain,
    Pressure,
    Stress,
    Displacement,
    Rotation,
}

impl Field {
    pub const ALL: [Field; 5] = [Field::Strain, Field::Pressure, Field::Stress, Field::Displacement, Field::Rotation];

    pub fn name(self) -> &'static str {
        match self {
            Field::Strain => "strain",
            Field::Pressure => "pressure",
            Field::Stress => "stress",
            Field::Displacement => "displacement",
            Field::Rotation => "rotation",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockLayout {
    offsets: [usize; 6],
}

impl BlockLayout {
    pub fn new(spaces: &SpaceSet) -> Self {
        let mut offsets = [0; 6];
        for (i, n) in spaces.counts().iter().enumerate() {
            offsets[i + 1] = offsets[i] + n;
        }
        Self { offsets }
    }

    pub fn offset(&self, f: Field) -> usize {
        self.offsets[f.index()]
    }

    pub fn size(&self, f: Field) -> usize {
        self.offsets[f.index() + 1] - self.offsets[f.index()]
    }

    pub fn range(&self, f: Field) -> Range<usize> {
        self.offsets[f.index()]..self.offsets[f.index() + 1]
    }

    pub fn total(&self) -> usize {
        self.offsets[5]
    }

    pub fn field_of(&self, dof: usize) -> Field {
        Field::ALL.into_iter().find(|&f| self.range(f).contains(&dof)).expect("dof inside the layout")
    }

    pub fn named_ranges(&self) -> Vec<(&'static str, Range<usize>)> {
        Field::ALL.iter().map(|&f| (f.name(), self.range(f))).collect()
    }
}

/// Global indices of the unknowns touching one cell.
#[derive(Debug, Clone)]
pub struct CellIndices {
    /// Strain followed by pressure.
    pub mixed: Vec<usize>,
    pub strain: Vec<usize>,
    pub pressure: Vec<usize>,
    pub stress: Vec<usize>,
    /// Displacement followed by rotation.
    pub low: Vec<usize>,
}

impl CellIndices {
    pub fn new(spaces: &SpaceSet, layout: &BlockLayout, cell: usize) -> Self {
        let shift = |dofs: &[usize], f: Field| dofs.iter().map(|d| d + layout.offset(f)).collect::<Vec<_>>();
        let strain = shift(spaces.strain.cell_dofs(cell), Field::Strain);
        let pressure = shift(spaces.pressure.cell_dofs(cell), Field::Pressure);
        let stress = shift(spaces.stress.cell_dofs(cell), Field::Stress);
        let mut low = shift(spaces.displacement.cell_dofs(cell), Field::Displacement);
        low.extend(shift(spaces.rotation.cell_dofs(cell), Field::Rotation));
        let mut mixed = strain.clone();
        mixed.extend_from_slice(&pressure);
        Self { mixed, strain, pressure, stress, low }
    }
}

/// Unknowns private to each cell: the strain and, with `bubbles`, the interior
/// stress DOFs. These are the groups removed by static condensation.
pub fn cell_local_groups(spaces: &SpaceSet, layout: &BlockLayout, bubbles: bool) -> Vec<Vec<usize>> {
    let per_row = spaces.stress_per_row();
    let edge_dofs = spaces.num_edges() * spaces.stress_element.moments_per_edge();
    (0..spaces.strain.num_cells())
        .map(|c| {
            let mut g: Vec<usize> = spaces.strain.cell_dofs(c).iter().map(|d| d + layout.offset(Field::Strain)).collect();
            if bubbles {
                g.extend(
                    spaces
                        .stress
                        .cell_dofs(c)
                        .iter()
                        .filter(|&&d| d % per_row >= edge_dofs)
                        .map(|d| d + layout.offset(Field::Stress)),
                );
            }
            g
        })
        .collect()
}

/// Assembled matrix, load vector and the constraints already eliminated.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub layout: BlockLayout,
    pub matrix: CscMatrix,
    pub rhs: Vec<f64>,
    /// Eliminated DOFs with their prescribed values, in application order.
    pub constrained: Vec<(usize, f64)>,
}

impl BlockSystem {
    /// Eliminates `dofs` symmetrically: known columns move to the load, rows
    /// and columns are cleared and the diagonal set to one.
    pub fn constrain(&mut self, dofs: &[(usize, f64)]) {
        eliminate(&mut self.matrix, &mut self.rhs, dofs);
        self.constrained.extend_from_slice(dofs);
    }

    pub fn block(&self, row: Field, col: Field) -> DMatrix<f64> {
        let (r, c) = (self.layout.range(row), self.layout.range(col));
        let mut m = DMatrix::zeros(r.len(), c.len());
        for (i, j, v) in self.matrix.entries() {
            if r.contains(&i) && c.contains(&j) {
                m[(i - r.start, j - c.start)] += v;
            }
        }
        m
    }

    /// `‖Mx - b‖∞`.
    pub fn residual_linf(&self, x: &[f64]) -> f64 {
        let mx = self.matrix.mul_vec(x);
        mx.iter().zip(&self.rhs).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Symmetric elimination of `dofs` from `matrix`, keeping structural entries.
pub fn eliminate(matrix: &mut CscMatrix, rhs: &mut [f64], dofs: &[(usize, f64)]) {
    if dofs.is_empty() {
        return;
    }
    let n = matrix.n();
    let mut fixed = vec![false; n];
    for &(c, _) in dofs {
        fixed[c] = true;
    }
    let pat = matrix.pattern.clone();
    for &(c, g) in dofs {
        for p in pat.col_ptr[c]..pat.col_ptr[c + 1] {
            let i = pat.row_idx[p];
            if !fixed[i] {
                rhs[i] -= matrix.values[p] * g;
            }
        }
    }
    for j in 0..n {
        for p in pat.col_ptr[j]..pat.col_ptr[j + 1] {
            let i = pat.row_idx[p];
            if fixed[i] || fixed[j] {
                matrix.values[p] = if i == j { 1.0 } else { 0.0 };
            }
        }
    }
    for &(c, g) in dofs {
        rhs[c] = g;
    }
}

/// Prescribed traction moments on the edges of `tag`.
pub fn traction_constraints(
    mesh: &Mesh,
    spaces: &SpaceSet,
    layout: &BlockLayout,
    tag: &str,
    traction: &VectorField,
) -> Result<Vec<(usize, f64)>, AssemblyError> {
    let edges = tagged_edges(mesh, tag)?;
    let nmom = spaces.stress_element.moments_per_edge();
    let degree = 2 * nmom + 4;
    let mut out = Vec::with_capacity(edges.len() * 2 * nmom);
    for e in edges {
        let eq = EdgeQuadrature::new(mesh, e, degree);
        let o = f64::from(mesh.cell_edge_signs(eq.cell)[eq.local_edge]);
        let [lo, _] = mesh.edges()[e];
        let x0 = mesh.vertices()[lo];
        for row in 0..2 {
            for j in 0..nmom {
                let mut m = 0.0;
                for pt in &eq.points {
                    let s = ((pt.x[0] - x0[0]).powi(2) + (pt.x[1] - x0[1]).powi(2)).sqrt() / eq.length;
                    m += pt.weight * traction(pt.x)[row] * legendre01(j, s);
                }
                out.push((layout.offset(Field::Stress) + spaces.stress_edge_dof(row, e, j), o * m));
            }
        }
    }
    Ok(out)
}

/// Nodal pressure values on the edges of `tag`.
pub fn pressure_constraints(
    mesh: &Mesh,
    spaces: &SpaceSet,
    layout: &BlockLayout,
    tag: &str,
    value: &ScalarField,
) -> Result<Vec<(usize, f64)>, AssemblyError> {
    let edges = tagged_edges(mesh, tag)?;
    Ok(spaces
        .pressure_dofs_on_edges(mesh, &edges)
        .into_iter()
        .map(|d| (layout.offset(Field::Pressure) + d, value(spaces.pressure_node(mesh, d))))
        .collect())
}

fn tagged_edges(mesh: &Mesh, tag: &str) -> Result<Vec<usize>, AssemblyError> {
    if mesh.tag_index(tag).is_none() {
        return Err(AssemblyError::UnknownTag(tag.to_string()));
    }
    let edges = mesh.edges_with_tag(tag);
    if edges.is_empty() {
        return Err(AssemblyError::EmptyTag(tag.to_string()));
    }
    Ok(edges)
}

/// All essential constraints implied by `data`, sorted by DOF. A DOF shared by
/// two tags keeps the value of the tag that comes first alphabetically.
pub fn essential_constraints(
    mesh: &Mesh,
    spaces: &SpaceSet,
    layout: &BlockLayout,
    data: &ProblemData,
) -> Result<Vec<(usize, f64)>, AssemblyError> {
    let mut out: Vec<(usize, f64)> = Vec::new();
    for (tag, bc) in &data.mechanical {
        if let MechanicalBc::Traction(t) = bc {
            out.extend(traction_constraints(mesh, spaces, layout, tag, t)?);
        }
    }
    for (tag, bc) in &data.flow {
        if let FlowBc::Pressure(p) = bc {
            out.extend(pressure_constraints(mesh, spaces, layout, tag, p)?);
        }
    }
    out.sort_by_key(|c| c.0);
    out.dedup_by_key(|c| c.0);
    Ok(out)
}

/// Imposes `σn = traction` on `tag`.
pub fn apply_essential_traction(
    system: &mut BlockSystem,
    mesh: &Mesh,
    spaces: &SpaceSet,
    tag: &str,
    traction: &VectorField,
) -> Result<(), AssemblyError> {
    let c = traction_constraints(mesh, spaces, &system.layout, tag, traction)?;
    system.constrain(&c);
    Ok(())
}

/// Imposes `p = value` on `tag`.
pub fn apply_essential_pressure(
    system: &mut BlockSystem,
    mesh: &Mesh,
    spaces: &SpaceSet,
    tag: &str,
    value: &ScalarField,
) -> Result<(), AssemblyError> {
    let c = pressure_constraints(mesh, spaces, &system.layout, tag, value)?;
    system.constrain(&c);
    Ok(())
}

struct CellLocal {
    a: DMatrix<f64>,
    newton: Option<DMatrix<f64>>,
    g: DVector<f64>,
    f: DVector<f64>,
}

/// Reusable assembler: pattern, state-independent coupling blocks and
/// boundary loads are computed once per mesh and problem.
pub struct Assembler<'m> {
    pub forms: Forms<'m>,
    pub layout: BlockLayout,
    pub data: ProblemData,
    pattern: Arc<SparsityPattern>,
    indices: Vec<CellIndices>,
    coupling: CscMatrix,
    boundary_load: Vec<f64>,
    flux_edges: Vec<(usize, ScalarField)>,
    essential: Vec<(usize, f64)>,
}

impl<'m> Assembler<'m> {
    pub fn new(mesh: &'m Mesh, spaces: &'m SpaceSet, data: &ProblemData) -> Result<Self, AssemblyError> {
        data.validate(mesh)?;
        let forms = Forms::new(mesh, spaces)?;
        let layout = BlockLayout::new(spaces);
        let indices: Vec<CellIndices> = (0..mesh.num_cells()).map(|c| CellIndices::new(spaces, &layout, c)).collect();
        let pattern = Arc::new(build_pattern(&layout, &indices));

        let mut coupling = CscMatrix::zeros(pattern.clone());
        for chunk in (0..mesh.num_cells()).collect::<Vec<_>>().chunks(CHUNK) {
            let locals: Vec<_> = chunk
                .par_iter()
                .map(|&c| {
                    let cb = forms.cell_basis(c);
                    (forms.local_b1_with(&cb), forms.local_b2_with(&cb))
                })
                .collect();
            for (&c, (b1, b2)) in chunk.iter().zip(&locals) {
                let ix = &indices[c];
                let b1 = b1.rows(0, ix.strain.len()).into_owned();
                coupling.add_block(&ix.strain, &ix.stress, &b1, false);
                coupling.add_block(&ix.stress, &ix.strain, &b1, true);
                coupling.add_block(&ix.stress, &ix.low, b2, false);
                coupling.add_block(&ix.low, &ix.stress, b2, true);
            }
        }

        let mut boundary_load = vec![0.0; layout.total()];
        let mut flux_edges = Vec::new();
        let nl2 = 2 * spaces.low_element.dim();
        for (edge, tag) in mesh.boundary_edges() {
            match data.mechanical_bc(tag) {
                MechanicalBc::Displacement(Some(u)) => {
                    let (cell, h) = forms.boundary_h(edge, &u);
                    for (i, &g) in indices[cell].stress.iter().enumerate() {
                        boundary_load[g] += h[i];
                    }
                }
                MechanicalBc::Slide => {
                    let (cell, s) = forms.boundary_slide(edge);
                    let ix = &indices[cell];
                    let u = &ix.low[..nl2];
                    coupling.add_block(&ix.stress, u, &s, false);
                    coupling.add_block(u, &ix.stress, &s, true);
                }
                _ => {}
            }
            if let FlowBc::Flux(Some(r)) = data.flow_bc(tag) {
                flux_edges.push((edge, r));
            }
        }
        let essential = essential_constraints(mesh, spaces, &layout, data)?;
        Ok(Self {
            forms,
            layout,
            data: data.clone(),
            pattern,
            indices,
            coupling,
            boundary_load,
            flux_edges,
            essential,
        })
    }

    pub fn mesh(&self) -> &'m Mesh {
        self.forms.mesh
    }

    pub fn spaces(&self) -> &'m SpaceSet {
        self.forms.spaces
    }

    pub fn pattern(&self) -> &Arc<SparsityPattern> {
        &self.pattern
    }

    pub fn essential(&self) -> &[(usize, f64)] {
        &self.essential
    }

    pub fn cell_indices(&self, cell: usize) -> &CellIndices {
        &self.indices[cell]
    }

    /// Linearised system at `ctx` before elimination, optionally with the
    /// Newton Jacobian `K + N`.
    pub fn assemble_raw(
        &self,
        ctx: &FormContext,
        newton: bool,
    ) -> Result<(BlockSystem, Option<CscMatrix>), AssemblyError> {
        let mesh = self.mesh();
        let mut matrix = self.coupling.clone();
        let mut jac = newton.then(|| self.coupling.clone());
        let mut rhs = self.boundary_load.clone();
        let forms = &self.forms;
        let nd = forms.spaces.strain.local_dim();
        let source = self.data.source.as_ref();
        let body = self.data.body_force.as_ref();
        let cells: Vec<usize> = (0..mesh.num_cells()).collect();
        for chunk in cells.chunks(CHUNK) {
            let locals: Result<Vec<CellLocal>, AssemblyError> = chunk
                .par_iter()
                .map(|&c| {
                    let cb = forms.cell_basis(c);
                    let kappa = forms.permeability_at(c, &cb, ctx)?;
                    let a = forms.local_a_with(&cb, &kappa, ctx);
                    let newton = newton.then(|| forms.local_newton_with(c, &cb, &kappa, ctx));
                    let (g, f) = forms.local_rhs_with(c, &cb, ctx, source, body);
                    Ok(CellLocal { a, newton, g, f })
                })
                .collect();
            for (&c, loc) in chunk.iter().zip(locals?) {
                let ix = &self.indices[c];
                matrix.add_block(&ix.mixed, &ix.mixed, &loc.a, false);
                if let (Some(j), Some(n)) = (jac.as_mut(), loc.newton.as_ref()) {
                    j.add_block(&ix.mixed, &ix.mixed, &loc.a, false);
                    j.add_block(&ix.pressure, &ix.mixed, n, false);
                }
                for (i, &g) in ix.pressure.iter().enumerate() {
                    rhs[g] += loc.g[i];
                }
                for (i, &g) in ix.low[..loc.f.len()].iter().enumerate() {
                    rhs[g] += loc.f[i];
                }
            }
        }
        let np = forms.spaces.pressure_element.dim();
        for (edge, r) in &self.flux_edges {
            let (cell, g) = forms.boundary_flux(*edge, r, ctx.flow_scale);
            let ix = &self.indices[cell];
            for i in 0..np {
                rhs[ix.mixed[nd + i]] += g[i];
            }
        }
        let system = BlockSystem { layout: self.layout, matrix, rhs, constrained: Vec::new() };
        Ok((system, jac))
    }

    /// Linearised system with every essential condition eliminated.
    pub fn assemble(&self, ctx: &FormContext) -> Result<BlockSystem, AssemblyError> {
        let (mut sys, _) = self.assemble_raw(ctx, false)?;
        sys.constrain(&self.essential);
        Ok(sys)
    }
}

fn build_pattern(layout: &BlockLayout, indices: &[CellIndices]) -> SparsityPattern {
    let n = layout.total();
    let mut keys = Vec::new();
    let mut block = |rows: &[usize], cols: &[usize]| {
        for &c in cols {
            for &r in rows {
                keys.push(SparsityPattern::key(n, r, c));
                keys.push(SparsityPattern::key(n, c, r));
            }
        }
    };
    for ix in indices {
        block(&ix.mixed, &ix.mixed);
        block(&ix.strain, &ix.stress);
        block(&ix.stress, &ix.low);
    }
    keys.extend((0..n).map(|i| SparsityPattern::key(n, i, i)));
    SparsityPattern::from_entries(n, keys)
}

/// Assembles the linearised system for `ctx` and eliminates the essential
/// conditions of `data`.
pub fn assemble(
    mesh: &Mesh,
    spaces: &SpaceSet,
    ctx: &FormContext,
    data: &ProblemData,
) -> Result<BlockSystem, AssemblyError> {
    Assembler::new(mesh, spaces, data)?.assemble(ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::make_space_set;
    use crate::mesh::{build_structured_mesh, BoundaryTag, SideTags};
    use crate::physics::{MaterialParams, PermeabilityLaw};
    use crate::problem::{constant_scalar, constant_vector};

    fn params() -> MaterialParams {
        MaterialParams { lambda: 1.0, mu: 1.0, c0: 0.25, alpha: 0.25, mu_f: 1.0 }
    }

    fn ctx() -> FormContext<'static> {
        FormContext::stationary(params(), PermeabilityLaw::Constant { kappa0: 1.0 })
    }

    fn one_triangle() -> Mesh {
        let v = vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let tags = vec![BoundaryTag { name: "w".into(), sides: vec![] }];
        Mesh::from_parts(v, vec![[0, 1, 2]], tags, &[(0, 1, 0), (1, 2, 0), (2, 0, 0)]).unwrap()
    }

    #[test]
    fn single_triangle_dimension_and_zero_blocks() {
        let m = one_triangle();
        let s = make_space_set(&m, 0).unwrap();
        let sys = assemble(&m, &s, &ctx(), &ProblemData::new()).unwrap();
        assert_eq!(sys.layout.total(), 30);
        use Field::*;
        for (r, c) in [
            (Strain, Displacement),
            (Strain, Rotation),
            (Pressure, Stress),
            (Pressure, Displacement),
            (Stress, Stress),
            (Displacement, Displacement),
            (Rotation, Rotation),
            (Displacement, Rotation),
        ] {
            assert!(sys.block(r, c).iter().all(|&v| v == 0.0), "{r:?} x {c:?}");
        }
        let no_struct = sys.matrix.entries().filter(|&(i, j, _)| {
            let (fi, fj) = (sys.layout.field_of(i), sys.layout.field_of(j));
            (fi == Strain && fj == Displacement) || (fi == Displacement && fj == Strain)
        });
        assert_eq!(no_struct.count(), 0);
    }

    #[test]
    fn symmetric_apart_from_alpha_coupling() {
        let m = build_structured_mesh(1, 1, 1.0, 1.0, &SideTags::per_side()).unwrap();
        let s = make_space_set(&m, 1).unwrap();
        let sys = assemble(&m, &s, &ctx(), &ProblemData::new()).unwrap();
        let mut d = sys.matrix.to_dense();
        let (p, st) = (sys.layout.range(Field::Pressure), sys.layout.range(Field::Strain));
        for i in p.clone() {
            for j in st.clone() {
                d[(i, j)] = -d[(i, j)];
            }
        }
        let defect = (&d - d.transpose()).amax();
        assert!(defect < 1e-12, "{defect}");
    }

    #[test]
    fn zero_data_gives_zero_rhs() {
        let m = build_structured_mesh(2, 2, 1.0, 1.0, &SideTags::per_side()).unwrap();
        let s = make_space_set(&m, 0).unwrap();
        let sys = assemble(&m, &s, &ctx(), &ProblemData::new()).unwrap();
        assert!(sys.rhs.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cell_order_does_not_change_entries() {
        let m = build_structured_mesh(3, 2, 1.0, 1.0, &SideTags::per_side()).unwrap();
        let mut tris = m.triangles().to_vec();
        tris.reverse();
        let tagged: Vec<_> = m
            .boundary_edges()
            .map(|(e, t)| (m.edges()[e][0], m.edges()[e][1], m.tag_index(t).unwrap()))
            .collect();
        let m2 = Mesh::from_parts(m.vertices().to_vec(), tris, m.tags().to_vec(), &tagged).unwrap();
        let data = ProblemData::new()
            .with_body_force(constant_vector([1.0, -2.0]))
            .with_source(constant_scalar(3.0));
        let a = assemble(&m, &make_space_set(&m, 0).unwrap(), &ctx(), &data).unwrap();
        let b = assemble(&m2, &make_space_set(&m2, 0).unwrap(), &ctx(), &data).unwrap();
        // Only the continuous pressure numbering is cell-order independent; compare its block.
        let (pa, pb) = (a.block(Field::Pressure, Field::Pressure), b.block(Field::Pressure, Field::Pressure));
        assert!((pa - pb).amax() < 1e-14);
        let ra = &a.rhs[a.layout.range(Field::Pressure)];
        let rb = &b.rhs[b.layout.range(Field::Pressure)];
        for (x, y) in ra.iter().zip(rb) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn discrete_divergence_theorem() {
        let m = build_structured_mesh(3, 3, 1.0, 1.0, &SideTags::per_side()).unwrap();
        let s = make_space_set(&m, 1).unwrap();
        let asm = Assembler::new(&m, &s, &ProblemData::new()).unwrap();
        let sys = asm.assemble(&ctx()).unwrap();
        let l = sys.layout;
        let sigma: Vec<f64> = (0..l.size(Field::Stress)).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect();
        let nl = s.low_element.dim();
        let mut v = vec![0.0; l.size(Field::Displacement)];
        for c in 0..m.num_cells() {
            for &d in &s.displacement.cell_dofs(c)[..nl] {
                v[d] = 1.0;
            }
        }
        let b2 = sys.block(Field::Displacement, Field::Stress);
        let lhs = DVector::from_vec(v).dot(&(b2 * DVector::from_vec(sigma.clone())));
        let view = crate::elements::FieldView {
            spaces: &s,
            strain: &vec![0.0; l.size(Field::Strain)],
            pressure: &vec![0.0; l.size(Field::Pressure)],
            stress: &sigma,
            displacement: &vec![0.0; l.size(Field::Displacement)],
            rotation: &vec![0.0; l.size(Field::Rotation)],
        };
        let mut flux = 0.0;
        for (e, _) in m.boundary_edges() {
            let eq = EdgeQuadrature::new(&m, e, 8);
            let tab = crate::elements::RefTab::new(&s, &eq.reference_points());
            let cb = crate::elements::CellBasis::new(&m, &s, &tab, eq.cell);
            for (q, pt) in eq.points.iter().enumerate() {
                let pv = view.at(eq.cell, &tab, &cb, q);
                flux += pt.weight * (pv.stress[0][0] * eq.normal[0] + pv.stress[0][1] * eq.normal[1]);
            }
        }
        assert!((lhs + flux).abs() < 1e-10, "{lhs} vs {flux}");
    }

    #[test]
    fn traction_moments_of_constant_load() {
        let m = build_structured_mesh(2, 1, 2.0, 1.0, &SideTags::per_side()).unwrap();
        let s = make_space_set(&m, 0).unwrap();
        let l = BlockLayout::new(&s);
        let c = traction_constraints(&m, &s, &l, "top", &constant_vector([0.0, -3.0])).unwrap();
        assert_eq!(c.len(), 2 * 2 * 2);
        let per_row = s.stress_per_row();
        for &(dof, val) in &c {
            let local = dof - l.offset(Field::Stress);
            let (row, j) = (local / per_row, (local % per_row) % 2);
            let e = (local % per_row) / 2;
            let expected = if row == 1 && j == 0 {
                let cell = m.edge_cells(e)[0].unwrap();
                let o = f64::from(m.cell_edge_signs(cell)[m.local_edge(cell, e).unwrap()]);
                -3.0 * m.edge_length(e) * o
            } else {
                0.0
            };
            assert!((val - expected).abs() < 1e-13, "{val} {expected}");
        }
    }

    #[test]
    fn constrained_rows_are_identity_and_counted() {
        let m = build_structured_mesh(2, 2, 1.0, 1.0, &SideTags::per_side()).unwrap();
        let s = make_space_set(&m, 1).unwrap();
        let data = ProblemData::new()
            .with_mechanical("top", MechanicalBc::Traction(constant_vector([0.0, -1.0])))
            .with_flow("right", FlowBc::Pressure(constant_scalar(1.0e4)));
        let asm = Assembler::new(&m, &s, &data).unwrap();
        // 2 edges × 2 rows × 3 moments, and 5 pressure nodes on the right side.
        assert_eq!(asm.essential().len(), 12 + 5);
        let sys = asm.assemble(&ctx()).unwrap();
        let x: Vec<f64> = (0..sys.layout.total()).map(|i| (i as f64).sin()).collect();
        let mut x2 = x.clone();
        for &(c, g) in asm.essential() {
            x2[c] = g;
        }
        let mx = sys.matrix.mul_vec(&x2);
        for &(c, g) in asm.essential() {
            assert_eq!(mx[c] - sys.rhs[c], 0.0);
            assert_eq!(sys.rhs[c], g);
        }
        let stress = asm.essential().iter().filter(|c| sys.layout.field_of(c.0) == Field::Stress).count();
        assert_eq!(stress, 12);
        for &(c, g) in asm.essential() {
            if sys.layout.field_of(c) == Field::Pressure {
                assert_eq!(g, 1.0e4);
            }
        }
    }

    #[test]
    fn elimination_in_two_steps_matches_one() {
        let m = build_structured_mesh(2, 2, 1.0, 1.0, &SideTags::per_side()).unwrap();
        let s = make_space_set(&m, 0).unwrap();
        let data = ProblemData::new().with_source(constant_scalar(1.0));
        let asm = Assembler::new(&m, &s, &data).unwrap();
        let (base, _) = asm.assemble_raw(&ctx(), false).unwrap();
        let t = traction_constraints(&m, &s, &asm.layout, "left", &constant_vector([1.0, 2.0])).unwrap();
        let p = pressure_constraints(&m, &s, &asm.layout, "bottom", &constant_scalar(2.0)).unwrap();
        let mut one = base.clone();
        let mut all = t.clone();
        all.extend_from_slice(&p);
        one.constrain(&all);
        let mut two = base;
        two.constrain(&t);
        two.constrain(&p);
        assert_eq!(one.matrix.values, two.matrix.values);
        for (a, b) in one.rhs.iter().zip(&two.rhs) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}

//! Picard and Newton outer iterations, linear solves and backward Euler steps.

use std::fmt::Write as _;

use crate::assembly::{cell_local_groups, eliminate, Assembler, BlockLayout, Field};
use crate::condense::{CondensedSolver, StaticCondensation};
use crate::elements::{CellBasis, FieldView, PointValues, RefTab, SpaceSet};
use crate::error::SolveError;
use crate::forms::FormContext;
use crate::linalg::linf;
use crate::mesh::Mesh;
use crate::physics::{ClampCounter, MaterialParams, PermeabilityLaw};
use crate::problem::ProblemData;

/// Coefficient vectors of the five unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub strain: Vec<f64>,
    pub pressure: Vec<f64>,
    pub stress: Vec<f64>,
    pub displacement: Vec<f64>,
    /// Coefficients of the `(1,2)` entry of the skew rotation.
    pub rotation: Vec<f64>,
}

impl FieldState {
    pub fn zeros(spaces: &SpaceSet) -> Self {
        let [a, b, c, d, e] = spaces.counts();
        Self {
            strain: vec![0.0; a],
            pressure: vec![0.0; b],
            stress: vec![0.0; c],
            displacement: vec![0.0; d],
            rotation: vec![0.0; e],
        }
    }

    pub fn from_vector(layout: &BlockLayout, x: &[f64]) -> Self {
        let part = |f| x[layout.range(f)].to_vec();
        Self {
            strain: part(Field::Strain),
            pressure: part(Field::Pressure),
            stress: part(Field::Stress),
            displacement: part(Field::Displacement),
            rotation: part(Field::Rotation),
        }
    }

    pub fn to_vector(&self) -> Vec<f64> {
        [&self.strain, &self.pressure, &self.stress, &self.displacement, &self.rotation]
            .into_iter()
            .flat_map(|v| v.iter().copied())
            .collect()
    }

    pub fn field(&self, f: Field) -> &[f64] {
        match f {
            Field::Strain => &self.strain,
            Field::Pressure => &self.pressure,
            Field::Stress => &self.stress,
            Field::Displacement => &self.displacement,
            Field::Rotation => &self.rotation,
        }
    }

    pub fn matches(&self, spaces: &SpaceSet) -> bool {
        let c = spaces.counts();
        Field::ALL.iter().zip(c).all(|(&f, n)| self.field(f).len() == n)
    }

    pub fn view<'a>(&'a self, spaces: &'a SpaceSet) -> FieldView<'a> {
        FieldView {
            spaces,
            strain: &self.strain,
            pressure: &self.pressure,
            stress: &self.stress,
            displacement: &self.displacement,
            rotation: &self.rotation,
        }
    }

    /// All fields at `x`, evaluated in the first cell containing it.
    pub fn evaluate(&self, mesh: &Mesh, spaces: &SpaceSet, x: [f64; 2]) -> Option<PointValues> {
        let (cell, r) = mesh.locate(x)?;
        let tab = RefTab::new(spaces, &[r]);
        let cb = CellBasis::new(mesh, spaces, &tab, cell);
        Some(self.view(spaces).at(cell, &tab, &cb, 0))
    }

    /// `‖(d, p)‖∞`.
    pub fn strain_pressure_linf(&self) -> f64 {
        linf(&self.strain).max(linf(&self.pressure))
    }

    /// `‖(d, p) - (d', p')‖∞`.
    pub fn strain_pressure_distance(&self, other: &FieldState) -> f64 {
        let d = self.strain.iter().zip(&other.strain).fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()));
        self.pressure.iter().zip(&other.pressure).fold(d, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `‖x - x'‖∞` over all unknowns.
    pub fn distance(&self, other: &FieldState) -> f64 {
        let (a, b) = (self.to_vector(), other.to_vector());
        a.iter().zip(&b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Picard,
    Newton,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "picard" => Ok(Mode::Picard),
            "newton" => Ok(Mode::Newton),
            other => Err(format!("unknown solver mode '{other}' (expected picard or newton)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub mode: Mode,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_iterations: usize,
    /// Relative residual demanded of every linear solve.
    pub linear_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { mode: Mode::Picard, abs_tol: 1e-7, rel_tol: 1e-7, max_iterations: 50, linear_tol: 1e-10 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0 && self.linear_tol > 0.0) {
            return Err(SolveError::Config("tolerances must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(SolveError::Config("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSteppingConfig {
    pub dt: f64,
    pub t_end: f64,
}

impl TimeSteppingConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.dt > 0.0 && self.dt <= self.t_end) {
            return Err(SolveError::Config(format!("need 0 < dt <= t_end, got dt={} t_end={}", self.dt, self.t_end)));
        }
        Ok(())
    }

    /// Number of steps, rounding `t_end / dt` to the nearest integer.
    pub fn num_steps(&self) -> usize {
        (self.t_end / self.dt).round().max(1.0) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub change_linf: f64,
    pub residual_linf: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub records: Vec<IterationRecord>,
    /// Quadrature points where the Kozeny-Carman guard clipped ζ.
    pub clamped_points: usize,
}

impl Trace {
    pub fn iterations(&self) -> usize {
        self.records.len()
    }

    pub fn changes(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.change_linf).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("iter,change_linf,residual_linf\n");
        for r in &self.records {
            writeln!(s, "{},{:.5e},{:.5e}", r.iter, r.change_linf, r.residual_linf).unwrap();
        }
        s
    }
}

/// Nonlinear solver bound to one mesh and problem; the assembler and the
/// symbolic factorisation are reused across iterations and time steps.
pub struct NonlinearSolver<'m> {
    pub assembler: Assembler<'m>,
    pub params: MaterialParams,
    pub law: PermeabilityLaw,
    pub config: SolverConfig,
    lu: CondensedSolver,
}

impl<'m> NonlinearSolver<'m> {
    pub fn new(
        mesh: &'m Mesh,
        spaces: &'m SpaceSet,
        params: MaterialParams,
        law: PermeabilityLaw,
        data: &ProblemData,
        config: SolverConfig,
    ) -> Result<Self, SolveError> {
        config.validate()?;
        params.validate().map_err(|e| SolveError::Config(e.to_string()))?;
        let assembler = Assembler::new(mesh, spaces, data)?;
        let groups = cell_local_groups(spaces, &assembler.layout, true);
        let lu = CondensedSolver::new(StaticCondensation::new(assembler.pattern(), groups)?, config.linear_tol);
        Ok(Self { assembler, params, law, config, lu })
    }

    pub fn spaces(&self) -> &'m SpaceSet {
        self.assembler.spaces()
    }

    pub fn layout(&self) -> BlockLayout {
        self.assembler.layout
    }

    fn context<'a>(
        &self,
        frozen: &'a FieldState,
        flow_scale: f64,
        previous: Option<&'a FieldState>,
        clamps: &ClampCounter,
    ) -> FormContext<'a> {
        FormContext {
            params: self.params,
            law: self.law,
            frozen: Some((&frozen.strain, &frozen.pressure)),
            flow_scale,
            previous: previous.map(|p| (p.strain.as_slice(), p.pressure.as_slice())),
            clamps: clamps.clone(),
        }
    }

    /// One linear solve with κ frozen at `frozen`.
    pub fn solve_frozen(
        &mut self,
        frozen: &FieldState,
        flow_scale: f64,
        previous: Option<&FieldState>,
    ) -> Result<FieldState, SolveError> {
        let ctx = self.context(frozen, flow_scale, previous, &ClampCounter::default());
        let sys = self.assembler.assemble(&ctx)?;
        let ranges = sys.layout.named_ranges();
        let x = self.lu.solve(&sys.matrix, &sys.rhs, &ranges)?;
        Ok(FieldState::from_vector(&sys.layout, &x))
    }

    /// Fixed-point iteration `w ← J(w)` from `initial`.
    pub fn picard(
        &mut self,
        initial: &FieldState,
        flow_scale: f64,
        previous: Option<&FieldState>,
    ) -> Result<(FieldState, Trace), SolveError> {
        let clamps = ClampCounter::default();
        let mut trace = Trace::default();
        let mut w = initial.clone();
        for iter in 1..=self.config.max_iterations {
            let ctx = self.context(&w, flow_scale, previous, &clamps);
            let sys = self.assembler.assemble(&ctx)?;
            let residual_linf = sys.residual_linf(&w.to_vector());
            let ranges = sys.layout.named_ranges();
            let x = self.lu.solve(&sys.matrix, &sys.rhs, &ranges)?;
            let next = FieldState::from_vector(&sys.layout, &x);
            let change_linf = next.strain_pressure_distance(&w);
            trace.records.push(IterationRecord { iter, change_linf, residual_linf });
            let scale = next.strain_pressure_linf();
            w = next;
            if change_linf <= self.config.abs_tol || change_linf <= self.config.rel_tol * scale {
                trace.clamped_points = clamps.get();
                return Ok((w, trace));
            }
        }
        Err(SolveError::NotConverged { iterations: self.config.max_iterations, changes: trace.changes() })
    }

    /// Residual `K(x)x - b` with constrained rows replaced by `x_c - g_c`.
    pub fn residual(
        &self,
        x: &FieldState,
        flow_scale: f64,
        previous: Option<&FieldState>,
    ) -> Result<Vec<f64>, SolveError> {
        let ctx = self.context(x, flow_scale, previous, &ClampCounter::default());
        let (sys, _) = self.assembler.assemble_raw(&ctx, false)?;
        Ok(self.raw_residual(&sys.matrix, &sys.rhs, &x.to_vector()))
    }

    fn raw_residual(&self, k: &crate::linalg::CscMatrix, b: &[f64], xv: &[f64]) -> Vec<f64> {
        let mut r = k.mul_vec(xv);
        for (r, b) in r.iter_mut().zip(b) {
            *r -= b;
        }
        for &(c, g) in self.assembler.essential() {
            r[c] = xv[c] - g;
        }
        r
    }

    /// Newton Jacobian at `x`, before elimination.
    pub fn jacobian(
        &self,
        x: &FieldState,
        flow_scale: f64,
        previous: Option<&FieldState>,
    ) -> Result<crate::linalg::CscMatrix, SolveError> {
        let ctx = self.context(x, flow_scale, previous, &ClampCounter::default());
        let (_, j) = self.assembler.assemble_raw(&ctx, true)?;
        Ok(j.expect("jacobian requested"))
    }

    /// Newton iteration on the full residual from `initial`.
    pub fn newton(
        &mut self,
        initial: &FieldState,
        flow_scale: f64,
        previous: Option<&FieldState>,
    ) -> Result<(FieldState, Trace), SolveError> {
        let clamps = ClampCounter::default();
        let mut trace = Trace::default();
        let mut x = initial.to_vector();
        let layout = self.layout();
        let ranges = layout.named_ranges();
        let dp = 0..layout.offset(Field::Stress);
        for iter in 1..=self.config.max_iterations {
            let state = FieldState::from_vector(&layout, &x);
            let ctx = self.context(&state, flow_scale, previous, &clamps);
            let (sys, jac) = self.assembler.assemble_raw(&ctx, true)?;
            let mut jac = jac.expect("jacobian requested");
            let r = self.raw_residual(&sys.matrix, &sys.rhs, &x);
            let residual_linf = linf(&r);
            let mut rhs: Vec<f64> = r.iter().map(|v| -v).collect();
            let fixed: Vec<(usize, f64)> = self.assembler.essential().iter().map(|&(c, _)| (c, -r[c])).collect();
            eliminate(&mut jac, &mut rhs, &fixed);
            let delta = self.lu.solve(&jac, &rhs, &ranges)?;
            for (x, d) in x.iter_mut().zip(&delta) {
                *x += d;
            }
            let change_linf = linf(&delta[dp.clone()]);
            trace.records.push(IterationRecord { iter, change_linf, residual_linf });
            let bnorm = linf(&sys.rhs);
            let scale = linf(&x[dp.clone()]);
            let small_residual =
                residual_linf <= self.config.abs_tol || residual_linf <= self.config.rel_tol * bnorm;
            let small_step = change_linf <= self.config.abs_tol || change_linf <= self.config.rel_tol * scale;
            if small_residual && small_step {
                trace.clamped_points = clamps.get();
                return Ok((FieldState::from_vector(&layout, &x), trace));
            }
        }
        Err(SolveError::NotConverged { iterations: self.config.max_iterations, changes: trace.changes() })
    }

    /// Dispatches on the configured mode.
    pub fn solve(
        &mut self,
        initial: &FieldState,
        flow_scale: f64,
        previous: Option<&FieldState>,
    ) -> Result<(FieldState, Trace), SolveError> {
        match self.config.mode {
            Mode::Picard => self.picard(initial, flow_scale, previous),
            Mode::Newton => self.newton(initial, flow_scale, previous),
        }
    }

    /// Stationary solve from the zero state.
    pub fn solve_stationary(&mut self) -> Result<(FieldState, Trace), SolveError> {
        let zero = FieldState::zeros(self.spaces());
        self.solve(&zero, 1.0, None)
    }

    /// One backward Euler step of size `dt` from `prev`, warm-started at `prev`.
    pub fn time_step(&mut self, prev: &FieldState, dt: f64) -> Result<(FieldState, Trace), SolveError> {
        if !prev.matches(self.spaces()) {
            return Err(SolveError::Config("previous state does not match the spaces".into()));
        }
        self.solve(prev, dt, Some(prev))
    }
}

/// Solves the linearised problem described by `ctx` once.
pub fn solve_linearized(
    mesh: &Mesh,
    spaces: &SpaceSet,
    ctx: &FormContext,
    data: &ProblemData,
) -> Result<FieldState, SolveError> {
    let asm = Assembler::new(mesh, spaces, data)?;
    let sys = asm.assemble(ctx)?;
    let sc = StaticCondensation::new(asm.pattern(), cell_local_groups(spaces, &sys.layout, true))?;
    let x = CondensedSolver::new(sc, 1e-10).solve(&sys.matrix, &sys.rhs, &sys.layout.named_ranges())?;
    Ok(FieldState::from_vector(&sys.layout, &x))
}

pub fn picard_solve(
    mesh: &Mesh,
    spaces: &SpaceSet,
    params: MaterialParams,
    law: PermeabilityLaw,
    data: &ProblemData,
    config: SolverConfig,
) -> Result<(FieldState, Trace), SolveError> {
    let mut s = NonlinearSolver::new(mesh, spaces, params, law, data, SolverConfig { mode: Mode::Picard, ..config })?;
    s.solve_stationary()
}

pub fn newton_solve(
    mesh: &Mesh,
    spaces: &SpaceSet,
    params: MaterialParams,
    law: PermeabilityLaw,
    data: &ProblemData,
    config: SolverConfig,
) -> Result<(FieldState, Trace), SolveError> {
    let mut s = NonlinearSolver::new(mesh, spaces, params, law, data, SolverConfig { mode: Mode::Newton, ..config })?;
    s.solve_stationary()
}

/// One backward Euler step for the fluid-content equation.
#[allow(clippy::too_many_arguments)]
pub fn time_step_system(
    prev: &FieldState,
    dt: f64,
    mesh: &Mesh,
    spaces: &SpaceSet,
    params: MaterialParams,
    law: PermeabilityLaw,
    data: &ProblemData,
    config: SolverConfig,
) -> Result<(FieldState, Trace), SolveError> {
    if dt <= 0.0 {
        return Err(SolveError::Config(format!("time step must be positive, got {dt}")));
    }
    NonlinearSolver::new(mesh, spaces, params, law, data, config)?.time_step(prev, dt)
}

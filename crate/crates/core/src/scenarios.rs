//! Mandel's consolidation problem on the quarter domain `(0, L) × (0, H)`.

use std::fmt::Write as _;

use crate::elements::{edge_rule, make_space_set, quadrature_for, CellBasis, CellGeometry, PointValues, RefTab, SpaceSet};
use crate::error::SolveError;
use crate::mesh::{build_structured_mesh, Mesh, Point, SideTags};
use crate::physics::{MaterialParams, PermeabilityLaw};
use crate::problem::{constant_scalar, constant_vector, FlowBc, MechanicalBc, ProblemData};
use crate::solver::{FieldState, Mode, NonlinearSolver, SolverConfig, TimeSteppingConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MandelVariant {
    /// `κ = κ0 / μ_f`.
    Constant,
    /// `κ = k0 κ0 exp(k1 ζ) / μ_f`.
    Exponential,
}

impl MandelVariant {
    /// Short name used in file names and summaries.
    pub fn label(self) -> &'static str {
        match self {
            MandelVariant::Constant => "constant",
            MandelVariant::Exponential => "nonlinear",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MandelSetup {
    pub length: f64,
    pub height: f64,
    /// Magnitude of the downward traction on `y = H`.
    pub load: f64,
    pub params: MaterialParams,
    /// Intrinsic permeability; the flow equation uses the mobility `κ0 / μ_f`.
    pub kappa0: f64,
    pub k0: f64,
    pub k1: f64,
    /// Carried for completeness; the quasi-static model has no inertia.
    pub density: f64,
    pub variant: MandelVariant,
    pub time: TimeSteppingConfig,
    /// Cells per side of the structured mesh.
    pub cells: usize,
    pub degree: usize,
    pub solver: SolverConfig,
    /// Times at which mid-line profiles are stored (matched to the nearest step).
    pub midline_times: Vec<f64>,
    pub midline_samples: usize,
}

/// Parameter set of the published Mandel experiment on an 8 × 8 mesh with `k = 1`.
pub fn mandel_parameters_default() -> MandelSetup {
    MandelSetup {
        length: 1.0,
        height: 1.0,
        load: 100.0,
        params: MaterialParams::from_young_poisson(1e3, 1.0 / 3.0, 4e-10, 0.9, 1e-3),
        kappa0: 5.1e-8,
        k0: 5.0,
        k1: 30.0,
        density: 1.0,
        variant: MandelVariant::Constant,
        time: TimeSteppingConfig { dt: 0.01, t_end: 1.0 },
        cells: 8,
        degree: 1,
        solver: SolverConfig { mode: Mode::Picard, ..SolverConfig::default() },
        midline_times: vec![0.01, 0.1, 0.5, 1.0],
        midline_samples: 41,
    }
}

impl MandelSetup {
    pub fn with_variant(mut self, variant: MandelVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn law(&self) -> PermeabilityLaw {
        let mobility = self.kappa0 / self.params.mu_f;
        match self.variant {
            MandelVariant::Constant => PermeabilityLaw::Constant { kappa0: mobility },
            MandelVariant::Exponential => PermeabilityLaw::ScaledExponential { k0: self.k0, k1: self.k1, kappa0: mobility },
        }
    }

    /// `(0, H/2)`: left end of the mid-line.
    pub fn probe_center(&self) -> Point {
        [0.0, 0.5 * self.height]
    }

    /// `(L/2, H)`: middle of the loaded plate.
    pub fn probe_top(&self) -> Point {
        [0.5 * self.length, self.height]
    }

    pub fn validate(&self) -> Result<(), SolveError> {
        let bad = |m: String| Err(SolveError::Config(m));
        if !(self.length > 0.0 && self.height > 0.0) {
            return bad(format!("domain must have positive size, got {} x {}", self.length, self.height));
        }
        if !self.load.is_finite() {
            return bad(format!("load must be finite, got {}", self.load));
        }
        if !(self.kappa0 > 0.0) {
            return bad(format!("kappa0 must be > 0, got {}", self.kappa0));
        }
        if self.cells == 0 {
            return bad("cells must be positive".into());
        }
        if self.midline_samples < 2 {
            return bad("need at least two mid-line samples".into());
        }
        self.params.validate().map_err(|e| SolveError::Config(e.to_string()))?;
        self.time.validate()?;
        self.solver.validate()
    }

    pub fn mesh(&self) -> Result<Mesh, SolveError> {
        build_structured_mesh(self.cells, self.cells, self.length, self.height, &SideTags::per_side())
            .map_err(|e| SolveError::Config(e.to_string()))
    }

    /// Drained outlet at `x = L`, sliding on the symmetry lines, loaded plate on top.
    pub fn problem_data(&self) -> ProblemData {
        ProblemData::new()
            .with_mechanical("right", MechanicalBc::Traction(constant_vector([0.0, 0.0])))
            .with_flow("right", FlowBc::Pressure(constant_scalar(0.0)))
            .with_mechanical("left", MechanicalBc::Slide)
            .with_mechanical("bottom", MechanicalBc::Slide)
            .with_mechanical("top", MechanicalBc::Traction(constant_vector([0.0, -self.load])))
            .with_flow("left", FlowBc::Flux(None))
            .with_flow("bottom", FlowBc::Flux(None))
            .with_flow("top", FlowBc::Flux(None))
    }
}

/// Fields sampled along `y = H/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct MidlineProfile {
    pub t: f64,
    pub x: Vec<f64>,
    pub values: Vec<PointValues>,
}

impl MidlineProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,p,ux,uy,dxx,dyy,sxx,syy\n");
        for (x, v) in self.x.iter().zip(&self.values) {
            writeln!(
                s,
                "{x:.5e},{:.5e},{:.5e},{:.5e},{:.5e},{:.5e},{:.5e},{:.5e}",
                v.pressure, v.displacement[0], v.displacement[1], v.strain[0][0], v.strain[1][1], v.stress[0][0], v.stress[1][1]
            )
            .unwrap();
        }
        s
    }

    /// `mandel_midline_<label>_<t>.csv`.
    pub fn file_name(&self, label: &str) -> String {
        format!("mandel_midline_{label}_{:.2}.csv", self.t)
    }
}

/// Per-step probe values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TransientRecord {
    pub times: Vec<f64>,
    /// Pore pressure at `(0, H/2)`.
    pub p_center: Vec<f64>,
    /// All fields at `(L/2, H)`.
    pub top: Vec<PointValues>,
    pub iterations: Vec<usize>,
    /// `max_e |∫_e u·n| / ‖u‖₀` over sliding edges.
    pub slide_defect: Vec<f64>,
    pub midlines: Vec<MidlineProfile>,
}

impl TransientRecord {
    pub fn peak_pressure(&self) -> f64 {
        self.p_center.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Columns `t,p_probe1,sxx_probe2,syy_probe2,ux_probe2,uy_probe2,iterations`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,p_probe1,sxx_probe2,syy_probe2,ux_probe2,uy_probe2,iterations\n");
        for i in 0..self.times.len() {
            let v = &self.top[i];
            writeln!(
                s,
                "{:.5e},{:.5e},{:.5e},{:.5e},{:.5e},{:.5e},{}",
                self.times[i],
                self.p_center[i],
                v.stress[0][0],
                v.stress[1][1],
                v.displacement[0],
                v.displacement[1],
                self.iterations[i]
            )
            .unwrap();
        }
        s
    }
}

pub struct MandelRun {
    pub setup: MandelSetup,
    pub mesh: Mesh,
    pub spaces: SpaceSet,
    pub record: TransientRecord,
    pub state: FieldState,
}

fn probe(state: &FieldState, mesh: &Mesh, spaces: &SpaceSet, x: Point) -> Result<PointValues, SolveError> {
    state.evaluate(mesh, spaces, x).ok_or_else(|| SolveError::Config(format!("probe {x:?} outside the mesh")))
}

/// Largest `|∫_e u·n|` over edges tagged `left` or `bottom`, relative to `‖u‖₀`.
pub fn slide_defect(mesh: &Mesh, spaces: &SpaceSet, state: &FieldState) -> f64 {
    let rule = quadrature_for(2 * spaces.degree() + 2).expect("quadrature available");
    let tab = RefTab::new(spaces, &rule.points);
    let view = state.view(spaces);
    let mut norm_sq = 0.0;
    for c in 0..mesh.num_cells() {
        let cb = CellBasis::new(mesh, spaces, &tab, c);
        for (q, &w) in rule.weights.iter().enumerate() {
            let u = view.at(c, &tab, &cb, q).displacement;
            norm_sq += w * cb.geometry.det * (u[0] * u[0] + u[1] * u[1]);
        }
    }
    let (sp, sw) = edge_rule(2 * spaces.degree() + 2);
    let mut worst: f64 = 0.0;
    for tag in ["left", "bottom"] {
        for e in mesh.edges_with_tag(tag) {
            let [a, b] = mesh.edges()[e].map(|v| mesh.vertices()[v]);
            let n = mesh.outward_normal(e);
            let len = mesh.edge_length(e);
            let mut flux = 0.0;
            let c = mesh.edge_cells(e)[0].expect("boundary edge has a cell");
            let geo = CellGeometry::of_cell(mesh, c);
            for (&s, &w) in sp.iter().zip(&sw) {
                let r = geo.inverse_map([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
                let t = RefTab::new(spaces, &[r]);
                let cb = CellBasis::new(mesh, spaces, &t, c);
                let u = view.at(c, &t, &cb, 0).displacement;
                flux += w * len * (u[0] * n[0] + u[1] * n[1]);
            }
            worst = worst.max(flux.abs());
        }
    }
    if worst == 0.0 {
        0.0
    } else {
        worst / norm_sq.sqrt()
    }
}

fn midline(setup: &MandelSetup, mesh: &Mesh, spaces: &SpaceSet, state: &FieldState, t: f64) -> Result<MidlineProfile, SolveError> {
    let n = setup.midline_samples;
    let x: Vec<f64> = (0..n).map(|i| setup.length * i as f64 / (n - 1) as f64).collect();
    let values = x
        .iter()
        .map(|&xi| probe(state, mesh, spaces, [xi, 0.5 * setup.height]))
        .collect::<Result<_, _>>()?;
    Ok(MidlineProfile { t, x, values })
}

/// Backward Euler run from zero pressure and strain.
pub fn run_mandel(setup: &MandelSetup) -> Result<MandelRun, SolveError> {
    setup.validate()?;
    let mesh = setup.mesh()?;
    let spaces = make_space_set(&mesh, setup.degree).map_err(|e| SolveError::Config(e.to_string()))?;
    let data = setup.problem_data();
    let dt = setup.time.dt;
    let steps = setup.time.num_steps();
    let mut record = TransientRecord::default();
    let mut prev = FieldState::zeros(&spaces);
    {
        let mut solver = NonlinearSolver::new(&mesh, &spaces, setup.params, setup.law(), &data, setup.solver)?;
        let mut pending: Vec<f64> = setup.midline_times.clone();
        for step in 1..=steps {
            let t = step as f64 * dt;
            let (state, trace) = solver
                .time_step(&prev, dt)
                .map_err(|e| SolveError::TimeStep { step, time: t, source: Box::new(e) })?;
            record.times.push(t);
            record.p_center.push(probe(&state, &mesh, &spaces, setup.probe_center())?.pressure);
            record.top.push(probe(&state, &mesh, &spaces, setup.probe_top())?);
            record.iterations.push(trace.iterations());
            record.slide_defect.push(slide_defect(&mesh, &spaces, &state));
            let (due, rest): (Vec<f64>, Vec<f64>) = pending.iter().partition(|&&tm| tm <= t + 0.5 * dt);
            pending = rest;
            if !due.is_empty() {
                record.midlines.push(midline(setup, &mesh, &spaces, &state, t)?);
            }
            prev = state;
        }
    }
    Ok(MandelRun { setup: setup.clone(), mesh, spaces, record, state: prev })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn short(load: f64) -> MandelSetup {
        MandelSetup {
            load,
            cells: 2,
            degree: 0,
            time: TimeSteppingConfig { dt: 0.01, t_end: 0.03 },
            midline_times: vec![0.02],
            midline_samples: 5,
            ..mandel_parameters_default()
        }
    }

    #[test]
    fn default_parameters() {
        let s = mandel_parameters_default();
        assert!((s.params.lambda - 750.0).abs() < 1e-9);
        assert!((s.params.mu - 375.0).abs() < 1e-9);
        assert_eq!(s.time.num_steps(), 100);
        assert_eq!(s.probe_center(), [0.0, 0.5]);
        assert_eq!(s.probe_top(), [0.5, 1.0]);
    }

    #[test]
    fn zero_load_gives_zero_solution() {
        let run = run_mandel(&short(0.0)).unwrap();
        assert_eq!(run.record.times.len(), 3);
        assert!(run.record.p_center.iter().all(|&p| p == 0.0));
        assert!(run.state.to_vector().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn loaded_run_records_every_step() {
        let run = run_mandel(&short(100.0)).unwrap();
        let r = &run.record;
        assert!(r.times.windows(2).all(|w| w[1] > w[0]));
        assert!((r.times[0] - 0.01).abs() < 1e-15);
        assert!(r.p_center[0] > 0.0);
        assert_eq!(r.midlines.len(), 1);
        assert_eq!(r.midlines[0].values.len(), 5);
        // The plate traction is essential and exact for a constant load inside a top edge.
        let top = run.state.evaluate(&run.mesh, &run.spaces, [0.25, 1.0]).unwrap().stress;
        assert!((top[1][1] + 100.0).abs() < 1e-8 && top[0][1].abs() < 1e-8, "{top:?}");
        assert_eq!(r.to_csv().lines().count(), 4);
    }

    #[test]
    fn rejects_bad_setup() {
        let mut s = short(1.0);
        s.length = 0.0;
        assert!(matches!(run_mandel(&s), Err(SolveError::Config(_))));
    }
}

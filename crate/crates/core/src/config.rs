//! Declarative run configuration read from a TOML file.
//!
//! Every section is optional. Missing values fall back to the documented defaults of the
//! selected command: the manufactured case for `convergence` and `solve`, the published
//! Mandel parameters for `mandel`.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::ConfigError;
use crate::mesh::{build_structured_mesh, Mesh, SideTags};
use crate::physics::{MaterialParams, PermeabilityLaw};
use crate::problem::{constant_scalar, constant_vector, FlowBc, MechanicalBc, ProblemData};
use crate::scenarios::{mandel_parameters_default, MandelSetup, MandelVariant};
use crate::solver::{Mode, SolverConfig, TimeSteppingConfig};
use crate::verification::ManufacturedCase;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Convergence,
    Mandel,
    Solve,
}

impl std::str::FromStr for Command {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "convergence" => Ok(Command::Convergence),
            "mandel" => Ok(Command::Mandel),
            "solve" => Ok(Command::Solve),
            other => Err(ConfigError::new("command", format!("unknown command '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum LawKind {
    #[serde(rename = "constant")]
    Constant,
    #[serde(rename = "exp")]
    Exponential,
    #[serde(rename = "kozeny")]
    Kozeny,
    #[serde(rename = "scaled-exp")]
    ScaledExponential,
    #[serde(rename = "porosity-exp")]
    PorosityExponential,
}

impl std::str::FromStr for LawKind {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "constant" => Ok(LawKind::Constant),
            "exp" => Ok(LawKind::Exponential),
            "kozeny" => Ok(LawKind::Kozeny),
            "scaled-exp" => Ok(LawKind::ScaledExponential),
            "porosity-exp" => Ok(LawKind::PorosityExponential),
            other => Err(ConfigError::new(
                "permeability.law",
                format!("unknown law '{other}' (expected constant, exp, kozeny, scaled-exp or porosity-exp)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    /// Mesh file in the line-oriented text format; overrides the structured fields.
    pub file: Option<PathBuf>,
    /// Structured `nx × ny` mesh of `(0, lx) × (0, ly)` with tags `bottom`, `right`, `top`, `left`.
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub lx: Option<f64>,
    pub ly: Option<f64>,
    /// Refinement levels of the convergence study.
    pub levels: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSection {
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    /// Alternative to `lambda` and `mu`.
    pub young: Option<f64>,
    pub poisson: Option<f64>,
    pub c0: Option<f64>,
    pub alpha: Option<f64>,
    pub mu_f: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PermeabilitySection {
    pub law: Option<LawKind>,
    pub k0: Option<f64>,
    pub k1: Option<f64>,
    pub k2: Option<f64>,
    pub kappa0: Option<f64>,
    pub phi0: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    /// `picard` or `newton`.
    pub mode: Option<String>,
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_iterations: Option<usize>,
    pub linear_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MandelSection {
    pub load: Option<f64>,
    pub length: Option<f64>,
    pub height: Option<f64>,
    pub midline_times: Option<Vec<f64>>,
    pub midline_samples: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandSection {
    pub rate_min: Option<f64>,
    pub rate_max: Option<f64>,
    /// Number of trailing levels whose rates must lie in the band.
    pub levels: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MechanicalKind {
    Displacement,
    Traction,
    Slide,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowKind {
    Flux,
    Pressure,
}

/// Constant boundary data on one tag.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySection {
    pub tag: String,
    pub mechanical: Option<MechanicalKind>,
    /// Displacement or traction vector, zero when absent.
    pub vector: Option<[f64; 2]>,
    pub flow: Option<FlowKind>,
    /// Pressure or flux value, zero when absent.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadSection {
    pub body_force: Option<[f64; 2]>,
    pub source: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    /// Closed-form data of the manufactured solution.
    Manufactured,
    /// Constant loads from `[loads]` and boundary data from `[[boundary]]`.
    Custom,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub degree: Option<usize>,
    pub problem: Option<ProblemKind>,
    #[serde(default)]
    pub mesh: MeshSection,
    #[serde(default)]
    pub material: MaterialSection,
    #[serde(default)]
    pub permeability: PermeabilitySection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub mandel: MandelSection,
    #[serde(default)]
    pub bands: BandSection,
    #[serde(default)]
    pub loads: LoadSection,
    #[serde(default)]
    pub boundary: Vec<BoundarySection>,
    #[serde(default)]
    pub output: OutputSection,
}

/// Rate band checked by the convergence command.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBand {
    pub min: f64,
    pub max: f64,
    pub levels: usize,
}

impl RateBand {
    /// `[0.85, 1.15]` for `k = 0` and `[1.8, 2.2]` for `k = 1`, over the last two levels.
    pub fn default_for(k: usize) -> Self {
        let r = (k + 1) as f64;
        let half = if k == 0 { 0.15 } else { 0.1 * r };
        RateBand { min: r - half, max: r + half, levels: 2 }
    }
}

#[derive(Debug, Clone)]
pub struct ConvergenceJob {
    pub case: ManufacturedCase,
    pub degree: usize,
    pub levels: usize,
    pub solver: SolverConfig,
    pub band: RateBand,
}

#[derive(Clone)]
pub struct SolveJob {
    pub mesh: Mesh,
    pub degree: usize,
    pub params: MaterialParams,
    pub law: PermeabilityLaw,
    pub data: ProblemData,
    pub solver: SolverConfig,
    /// Set when errors against the closed-form fields can be reported.
    pub manufactured: Option<ManufacturedCase>,
}

fn positive(name: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::new(name, format!("must be positive and finite, got {v}")))
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::new("config", e.to_string().trim().replace('\n', " ")))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    fn degree_or(&self, default: usize) -> Result<usize, ConfigError> {
        match self.degree.unwrap_or(default) {
            k @ (0 | 1) => Ok(k),
            k => Err(ConfigError::new("degree", format!("must be 0 or 1, got {k}"))),
        }
    }

    /// Material parameters, filling gaps from `default`.
    pub fn material(&self, default: MaterialParams) -> Result<MaterialParams, ConfigError> {
        let m = &self.material;
        let mut p = default;
        match (m.young, m.poisson, m.lambda, m.mu) {
            (Some(_), _, Some(_), _) | (Some(_), _, _, Some(_)) | (_, Some(_), Some(_), _) | (_, Some(_), _, Some(_)) => {
                return Err(ConfigError::new("material", "give either lambda/mu or young/poisson, not both"));
            }
            (Some(e), Some(nu), None, None) => {
                if !(nu > -1.0 && nu < 0.5) {
                    return Err(ConfigError::new("material.poisson", format!("must lie in (-1, 0.5), got {nu}")));
                }
                let lame = MaterialParams::from_young_poisson(positive("material.young", e)?, nu, 0.0, 0.0, 1.0);
                p.lambda = lame.lambda;
                p.mu = lame.mu;
            }
            (Some(_), None, ..) | (None, Some(_), ..) => {
                return Err(ConfigError::new("material", "young and poisson must be given together"));
            }
            (None, None, lambda, mu) => {
                p.lambda = lambda.unwrap_or(p.lambda);
                p.mu = mu.unwrap_or(p.mu);
            }
        }
        p.c0 = m.c0.unwrap_or(p.c0);
        p.alpha = m.alpha.unwrap_or(p.alpha);
        p.mu_f = m.mu_f.unwrap_or(p.mu_f);
        p.validate().map_err(|e| ConfigError::new("material", e.to_string()))?;
        Ok(p)
    }

    /// Permeability law, filling the kind and its coefficients from `default`.
    pub fn law(&self, default: PermeabilityLaw) -> Result<PermeabilityLaw, ConfigError> {
        let s = &self.permeability;
        let kind = s.law.unwrap_or(match default {
            PermeabilityLaw::Constant { .. } => LawKind::Constant,
            PermeabilityLaw::Exponential { .. } => LawKind::Exponential,
            PermeabilityLaw::KozenyCarman { .. } => LawKind::Kozeny,
            PermeabilityLaw::ScaledExponential { .. } => LawKind::ScaledExponential,
            PermeabilityLaw::PorosityExponential { .. } => LawKind::PorosityExponential,
        });
        let need = |name: &str, v: Option<f64>, fallback: Option<f64>| {
            v.or(fallback)
                .ok_or_else(|| ConfigError::new(&format!("permeability.{name}"), "required by the selected law"))
        };
        // Coefficients of the default carry over only when the kind is unchanged.
        let (d0, d1, d2, dk, dphi) = match default {
            PermeabilityLaw::Constant { kappa0 } if kind == LawKind::Constant => (None, None, None, Some(kappa0), None),
            PermeabilityLaw::Exponential { k0, k1, k2 } if kind == LawKind::Exponential => {
                (Some(k0), Some(k1), Some(k2), None, None)
            }
            PermeabilityLaw::KozenyCarman { k0, k1 } if kind == LawKind::Kozeny => (Some(k0), Some(k1), None, None, None),
            PermeabilityLaw::ScaledExponential { k0, k1, kappa0 } if kind == LawKind::ScaledExponential => {
                (Some(k0), Some(k1), None, Some(kappa0), None)
            }
            PermeabilityLaw::PorosityExponential { k0, k1, k2, phi0 } if kind == LawKind::PorosityExponential => {
                (Some(k0), Some(k1), Some(k2), None, Some(phi0))
            }
            _ => (None, None, None, None, None),
        };
        let law = match kind {
            LawKind::Constant => PermeabilityLaw::Constant {
                kappa0: positive("permeability.kappa0", need("kappa0", s.kappa0, dk)?)?,
            },
            LawKind::Exponential => PermeabilityLaw::Exponential {
                k0: need("k0", s.k0, d0)?,
                k1: need("k1", s.k1, d1)?,
                k2: need("k2", s.k2, d2)?,
            },
            LawKind::Kozeny => PermeabilityLaw::KozenyCarman { k0: need("k0", s.k0, d0)?, k1: need("k1", s.k1, d1)? },
            LawKind::ScaledExponential => PermeabilityLaw::ScaledExponential {
                k0: need("k0", s.k0, d0)?,
                k1: need("k1", s.k1, d1)?,
                kappa0: positive("permeability.kappa0", need("kappa0", s.kappa0, dk)?)?,
            },
            LawKind::PorosityExponential => PermeabilityLaw::PorosityExponential {
                k0: need("k0", s.k0, d0)?,
                k1: need("k1", s.k1, d1)?,
                k2: need("k2", s.k2, d2)?,
                phi0: need("phi0", s.phi0, dphi)?,
            },
        };
        Ok(law)
    }

    pub fn solver(&self, default: SolverConfig) -> Result<SolverConfig, ConfigError> {
        let s = &self.solver;
        let mode = match &s.mode {
            Some(m) => m.parse::<Mode>().map_err(|e| ConfigError::new("solver.mode", e))?,
            None => default.mode,
        };
        let cfg = SolverConfig {
            mode,
            abs_tol: s.abs_tol.unwrap_or(default.abs_tol),
            rel_tol: s.rel_tol.unwrap_or(default.rel_tol),
            max_iterations: s.max_iterations.unwrap_or(default.max_iterations),
            linear_tol: s.linear_tol.unwrap_or(default.linear_tol),
        };
        cfg.validate().map_err(|e| ConfigError::new("solver", e.to_string()))?;
        Ok(cfg)
    }

    /// Manufactured-case study; defaults to `k = 0`, 6 levels and the default rate band.
    pub fn convergence_job(&self) -> Result<ConvergenceJob, ConfigError> {
        let base = ManufacturedCase::default();
        let degree = self.degree_or(0)?;
        let levels = self.mesh.levels.unwrap_or(6);
        if levels < 2 {
            return Err(ConfigError::new("mesh.levels", format!("need at least 2 levels, got {levels}")));
        }
        let d = RateBand::default_for(degree);
        let band = RateBand {
            min: self.bands.rate_min.unwrap_or(d.min),
            max: self.bands.rate_max.unwrap_or(d.max),
            levels: self.bands.levels.unwrap_or(d.levels),
        };
        if !(band.min <= band.max) || band.levels == 0 || band.levels >= levels {
            return Err(ConfigError::new("bands", format!("invalid band {band:?} for {levels} levels")));
        }
        Ok(ConvergenceJob {
            case: ManufacturedCase { params: self.material(base.params)?, law: self.law(base.law)? },
            degree,
            levels,
            solver: self.solver(SolverConfig::default())?,
            band,
        })
    }

    /// Mandel setup and the variants to run; `law = constant` or `scaled-exp` selects one.
    pub fn mandel_job(&self) -> Result<(MandelSetup, Vec<MandelVariant>), ConfigError> {
        let d = mandel_parameters_default();
        let p = &self.permeability;
        let variants = match p.law {
            None => vec![MandelVariant::Constant, MandelVariant::Exponential],
            Some(LawKind::Constant) => vec![MandelVariant::Constant],
            Some(LawKind::ScaledExponential) => vec![MandelVariant::Exponential],
            Some(other) => {
                return Err(ConfigError::new(
                    "permeability.law",
                    format!("the Mandel scenario supports constant and scaled-exp, got {other:?}"),
                ))
            }
        };
        if p.k2.is_some() || p.phi0.is_some() {
            return Err(ConfigError::new("permeability", "the Mandel scenario uses only kappa0, k0 and k1"));
        }
        if self.mesh.file.is_some() || self.mesh.levels.is_some() || self.mesh.lx.is_some() || self.mesh.ly.is_some() {
            return Err(ConfigError::new("mesh", "the Mandel scenario takes only nx (cells per side)"));
        }
        if self.mesh.ny.is_some_and(|ny| Some(ny) != self.mesh.nx) {
            return Err(ConfigError::new("mesh.ny", "the Mandel mesh is square; give nx only"));
        }
        let m = &self.mandel;
        let setup = MandelSetup {
            length: m.length.unwrap_or(d.length),
            height: m.height.unwrap_or(d.height),
            load: m.load.unwrap_or(d.load),
            params: self.material(d.params)?,
            kappa0: p.kappa0.unwrap_or(d.kappa0),
            k0: p.k0.unwrap_or(d.k0),
            k1: p.k1.unwrap_or(d.k1),
            density: d.density,
            variant: variants[0],
            time: TimeSteppingConfig {
                dt: self.time.dt.unwrap_or(d.time.dt),
                t_end: self.time.t_end.unwrap_or(d.time.t_end),
            },
            cells: self.mesh.nx.unwrap_or(d.cells),
            degree: self.degree_or(d.degree)?,
            solver: self.solver(d.solver)?,
            midline_times: m.midline_times.clone().unwrap_or(d.midline_times),
            midline_samples: m.midline_samples.unwrap_or(d.midline_samples),
        };
        setup.validate().map_err(|e| ConfigError::new("mandel", e.to_string()))?;
        Ok((setup, variants))
    }

    fn solve_mesh(&self) -> Result<Mesh, ConfigError> {
        let m = &self.mesh;
        if let Some(file) = &m.file {
            if m.nx.is_some() || m.ny.is_some() || m.lx.is_some() || m.ly.is_some() {
                return Err(ConfigError::new("mesh", "give either file or the structured nx/ny/lx/ly fields"));
            }
            return Mesh::read(file).map_err(|e| ConfigError::new("mesh.file", e.to_string()));
        }
        let nx = m.nx.unwrap_or(8);
        let ny = m.ny.unwrap_or(nx);
        let lx = positive("mesh.lx", m.lx.unwrap_or(1.0))?;
        let ly = positive("mesh.ly", m.ly.unwrap_or(1.0))?;
        build_structured_mesh(nx, ny, lx, ly, &SideTags::per_side()).map_err(|e| ConfigError::new("mesh", e.to_string()))
    }

    /// One stationary solve. The manufactured problem needs no boundary entries; a custom
    /// problem must describe every boundary tag of the mesh.
    pub fn solve_job(&self) -> Result<SolveJob, ConfigError> {
        let mesh = self.solve_mesh()?;
        let base = ManufacturedCase::default();
        let params = self.material(base.params)?;
        let law = self.law(base.law)?;
        let degree = self.degree_or(0)?;
        let kind = self.problem.unwrap_or(if self.boundary.is_empty() {
            ProblemKind::Manufactured
        } else {
            ProblemKind::Custom
        });
        let (data, manufactured) = match kind {
            ProblemKind::Manufactured => {
                if !self.boundary.is_empty() || self.loads != LoadSection::default() {
                    return Err(ConfigError::new("problem", "the manufactured problem takes no [loads] or [[boundary]]"));
                }
                let case = ManufacturedCase { params, law };
                (case.problem_data(), Some(case))
            }
            ProblemKind::Custom => (self.custom_data(&mesh)?, None),
        };
        data.validate(&mesh).map_err(|e| ConfigError::new("boundary", e.to_string()))?;
        Ok(SolveJob { mesh, degree, params, law, data, solver: self.solver(SolverConfig::default())?, manufactured })
    }

    fn custom_data(&self, mesh: &Mesh) -> Result<ProblemData, ConfigError> {
        let mut data = ProblemData::new();
        if let Some(f) = self.loads.body_force {
            data = data.with_body_force(constant_vector(f));
        }
        if let Some(g) = self.loads.source {
            data = data.with_source(constant_scalar(g));
        }
        for (i, b) in self.boundary.iter().enumerate() {
            let field = |name: &str| format!("boundary[{i}].{name}");
            if mesh.tag_index(&b.tag).is_none() {
                return Err(ConfigError::new(&field("tag"), format!("mesh has no tag '{}'", b.tag)));
            }
            if self.boundary[..i].iter().any(|o| o.tag == b.tag) {
                return Err(ConfigError::new(&field("tag"), format!("tag '{}' listed twice", b.tag)));
            }
            let v = b.vector.unwrap_or([0.0; 2]);
            let mech = match b.mechanical.unwrap_or(MechanicalKind::Displacement) {
                MechanicalKind::Displacement => MechanicalBc::Displacement(Some(constant_vector(v))),
                MechanicalKind::Traction => MechanicalBc::Traction(constant_vector(v)),
                MechanicalKind::Slide if b.vector.is_some() => {
                    return Err(ConfigError::new(&field("vector"), "slide takes no vector"));
                }
                MechanicalKind::Slide => MechanicalBc::Slide,
            };
            let value = b.value.unwrap_or(0.0);
            let flow = match b.flow.unwrap_or(FlowKind::Flux) {
                FlowKind::Flux => FlowBc::Flux(Some(constant_scalar(value))),
                FlowKind::Pressure => FlowBc::Pressure(constant_scalar(value)),
            };
            data = data.with_mechanical(&b.tag, mech).with_flow(&b.tag, flow);
        }
        for tag in mesh.tags() {
            if !self.boundary.iter().any(|b| b.tag == tag.name) {
                return Err(ConfigError::new("boundary", format!("no entry for mesh tag '{}'", tag.name)));
            }
        }
        Ok(data)
    }
}

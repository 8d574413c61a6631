//! Volume data and boundary conditions attached to mesh tags.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::AssemblyError;
use crate::mesh::{Mesh, Point};

pub type ScalarField = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;

pub fn scalar(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> ScalarField {
    Arc::new(f)
}

pub fn vector(f: impl Fn(Point) -> [f64; 2] + Send + Sync + 'static) -> VectorField {
    Arc::new(f)
}

pub fn constant_vector(v: [f64; 2]) -> VectorField {
    Arc::new(move |_| v)
}

pub fn constant_scalar(v: f64) -> ScalarField {
    Arc::new(move |_| v)
}

/// Condition on the solid unknowns along a tag.
#[derive(Clone)]
pub enum MechanicalBc {
    /// Natural: `u = u_Γ`, entering only the stress-row load. `None` means `u_Γ = 0`.
    Displacement(Option<VectorField>),
    /// Essential: `σn = t`.
    Traction(VectorField),
    /// Frictionless sliding: `u·n = 0`, `(σn)·t = 0`.
    Slide,
}

/// Condition on the pressure along a tag.
#[derive(Clone)]
pub enum FlowBc {
    /// Natural: `κ∇p·n = r`. `None` means zero flux.
    Flux(Option<ScalarField>),
    /// Essential: `p = value`.
    Pressure(ScalarField),
}

impl fmt::Debug for MechanicalBc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MechanicalBc::Displacement(None) => write!(f, "Displacement(0)"),
            MechanicalBc::Displacement(Some(_)) => write!(f, "Displacement(field)"),
            MechanicalBc::Traction(_) => write!(f, "Traction(field)"),
            MechanicalBc::Slide => write!(f, "Slide"),
        }
    }
}

impl fmt::Debug for FlowBc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowBc::Flux(None) => write!(f, "Flux(0)"),
            FlowBc::Flux(Some(_)) => write!(f, "Flux(field)"),
            FlowBc::Pressure(_) => write!(f, "Pressure(field)"),
        }
    }
}

/// Loads and boundary conditions. Tags without an entry default to
/// `u_Γ = 0` and zero flux.
#[derive(Clone, Default)]
pub struct ProblemData {
    pub body_force: Option<VectorField>,
    pub source: Option<ScalarField>,
    pub mechanical: BTreeMap<String, MechanicalBc>,
    pub flow: BTreeMap<String, FlowBc>,
}

impl fmt::Debug for ProblemData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemData")
            .field("body_force", &self.body_force.is_some())
            .field("source", &self.source.is_some())
            .field("mechanical", &self.mechanical)
            .field("flow", &self.flow)
            .finish()
    }
}

impl ProblemData {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_body_force(mut self, f: VectorField) -> Self {
        self.body_force = Some(f);
        self
    }

    pub fn with_source(mut self, g: ScalarField) -> Self {
        self.source = Some(g);
        self
    }

    pub fn with_mechanical(mut self, tag: &str, bc: MechanicalBc) -> Self {
        self.mechanical.insert(tag.to_string(), bc);
        self
    }

    pub fn with_flow(mut self, tag: &str, bc: FlowBc) -> Self {
        self.flow.insert(tag.to_string(), bc);
        self
    }

    pub fn mechanical_bc(&self, tag: &str) -> MechanicalBc {
        self.mechanical.get(tag).cloned().unwrap_or(MechanicalBc::Displacement(None))
    }

    pub fn flow_bc(&self, tag: &str) -> FlowBc {
        self.flow.get(tag).cloned().unwrap_or(FlowBc::Flux(None))
    }

    /// Every referenced tag must exist and own at least one edge.
    pub fn validate(&self, mesh: &Mesh) -> Result<(), AssemblyError> {
        for tag in self.mechanical.keys().chain(self.flow.keys()) {
            if mesh.tag_index(tag).is_none() {
                return Err(AssemblyError::UnknownTag(tag.clone()));
            }
            if mesh.edges_with_tag(tag).is_empty() {
                return Err(AssemblyError::EmptyTag(tag.clone()));
            }
        }
        Ok(())
    }

    /// True when some tag carries an essential pressure.
    pub fn has_essential_pressure(&self) -> bool {
        self.flow.values().any(|b| matches!(b, FlowBc::Pressure(_)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_structured_mesh, SideTags};

    #[test]
    fn defaults_and_validation() {
        let m = build_structured_mesh(2, 2, 1.0, 1.0, &SideTags::per_side()).unwrap();
        let d = ProblemData::new()
            .with_mechanical("top", MechanicalBc::Traction(constant_vector([0.0, -1.0])))
            .with_flow("right", FlowBc::Pressure(constant_scalar(0.0)));
        assert!(d.validate(&m).is_ok());
        assert!(matches!(d.mechanical_bc("left"), MechanicalBc::Displacement(None)));
        assert!(matches!(d.flow_bc("left"), FlowBc::Flux(None)));
        assert!(d.has_essential_pressure());
        let bad = ProblemData::new().with_mechanical("nowhere", MechanicalBc::Slide);
        assert!(matches!(bad.validate(&m), Err(AssemblyError::UnknownTag(_))));
    }
}

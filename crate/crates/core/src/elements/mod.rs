//! Reference elements, quadrature and global DOF maps.

pub mod bdm;
pub mod lagrange;
pub mod quadrature;
pub mod spaces;

pub use bdm::BdmElement;
pub use lagrange::LagrangeElement;
pub use quadrature::{edge_rule, gauss_legendre, quadrature_for, QuadratureRule};
pub use spaces::{make_space_set, CellBasis, CellGeometry, DofMap, FieldView, PointValues, RefTab, SpaceSet};

/// Element families used by the method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    DiscontinuousLagrange,
    ContinuousLagrange,
    Bdm,
    /// Discontinuous Lagrange coefficients of the `(1,2)` entry of a skew tensor.
    SkewLagrange,
}

/// A reference element together with its family.
#[derive(Debug, Clone)]
pub enum ReferenceElement {
    Lagrange(Family, LagrangeElement),
    Bdm(BdmElement),
}

impl ReferenceElement {
    pub fn family(&self) -> Family {
        match self {
            ReferenceElement::Lagrange(f, _) => *f,
            ReferenceElement::Bdm(_) => Family::Bdm,
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            ReferenceElement::Lagrange(_, e) => e.degree(),
            ReferenceElement::Bdm(e) => e.degree(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ReferenceElement::Lagrange(_, e) => e.dim(),
            ReferenceElement::Bdm(e) => e.dim(),
        }
    }
}

impl SpaceSet {
    /// Reference elements in block order: strain, pressure, stress, displacement, rotation.
    pub fn reference_elements(&self) -> [ReferenceElement; 5] {
        [
            ReferenceElement::Lagrange(Family::DiscontinuousLagrange, self.strain_element),
            ReferenceElement::Lagrange(Family::ContinuousLagrange, self.pressure_element),
            ReferenceElement::Bdm(self.stress_element.clone()),
            ReferenceElement::Lagrange(Family::DiscontinuousLagrange, self.low_element),
            ReferenceElement::Lagrange(Family::SkewLagrange, self.low_element),
        ]
    }
}

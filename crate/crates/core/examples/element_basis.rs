//! Reference elements: dimensions, BDM degrees of freedom and Piola-mapped traces.
//!
//! ```text
//! cargo run --example element_basis
//! ```

use biot_mixed::elements::{make_space_set, BdmElement, CellBasis, RefTab};
use biot_mixed::mesh::{build_structured_mesh, SideTags};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mesh = build_structured_mesh(1, 1, 1.0, 1.0, &SideTags::per_side())?;
    for k in [0, 1] {
        let spaces = make_space_set(&mesh, k)?;
        let dims: Vec<String> = spaces
            .reference_elements()
            .iter()
            .map(|e| format!("{:?}({})={}", e.family(), e.degree(), e.dim()))
            .collect();
        println!("k = {k}: {}", dims.join(", "));
        println!("  global dofs {:?} total {}", spaces.counts(), spaces.total_dofs());

        // Degrees of freedom applied to the basis give the identity.
        let bdm = BdmElement::new(k + 1)?;
        let mut defect: f64 = 0.0;
        for j in 0..bdm.dim() {
            let dofs = bdm.apply_dofs(|p| bdm.values(p)[j]);
            for (i, d) in dofs.iter().enumerate() {
                defect = defect.max((d - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        println!("  BDM{} duality defect {defect:.1e}", k + 1);

        // Piola-mapped stress basis at the centroid of cell 0.
        let tab = RefTab::new(&spaces, &[[1.0 / 3.0, 1.0 / 3.0]]);
        let cb = CellBasis::new(&mesh, &spaces, &tab, 0);
        println!("  first stress basis function at the centroid of cell 0: {:?}", cb.stress[0][0]);
    }
    Ok(())
}

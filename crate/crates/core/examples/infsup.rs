//! Discrete inf-sup constants of the stress couplings on the coarsest meshes.
//!
//! ```text
//! cargo run --release --example infsup
//! ```

use biot_mixed::elements::make_space_set;
use biot_mixed::mesh::{build_structured_mesh, SideTags};
use biot_mixed::verification::infsup::relative_variation;
use biot_mixed::verification::infsup_constants;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for k in [0, 1] {
        let mut betas = Vec::new();
        println!("k = {k}");
        for n in [2, 4, 8] {
            let mesh = build_structured_mesh(n, n, 1.0, 1.0, &SideTags::per_side())?;
            let spaces = make_space_set(&mesh, k)?;
            let r = infsup_constants(&mesh, &spaces)?;
            println!(
                "  h = {:.4}: stress dofs {:>5}, beta_b2 {:.5}, kernel dim {:>5}, beta_b1 on kernel {:.5}",
                r.h, r.stress_dofs, r.beta_b2, r.kernel_dim, r.beta_b1_kernel
            );
            betas.push(r.beta_b2);
        }
        println!("  relative variation of beta_b2: {:.3}", relative_variation(&betas));
    }
    Ok(())
}

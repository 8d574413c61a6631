//! Structured meshes, uniform refinement and the text mesh format.
//!
//! ```text
//! cargo run --example mesh_refinement
//! ```

use biot_mixed::mesh::{build_structured_mesh, refine_uniform, Mesh, SideTags};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut mesh = build_structured_mesh(2, 2, 1.0, 1.0, &SideTags::per_side())?;
    println!("{:>6} {:>8} {:>8} {:>10} {:>8}", "cells", "edges", "verts", "h", "area");
    for _ in 0..4 {
        println!(
            "{:>6} {:>8} {:>8} {:>10.4e} {:>8.4}",
            mesh.num_cells(),
            mesh.num_edges(),
            mesh.num_vertices(),
            mesh.mesh_size(),
            mesh.total_area()
        );
        mesh = refine_uniform(&mesh);
    }
    for tag in mesh.tags() {
        println!("tag {:<7} {} edges", tag.name, mesh.edges_with_tag(&tag.name).len());
    }

    let coarse = build_structured_mesh(1, 1, 2.0, 1.0, &SideTags::new("floor", "outlet", "plate", "axis"))?;
    let text = coarse.to_text();
    print!("\n{text}");
    let back = Mesh::from_text(&text)?;
    assert_eq!(back.triangles(), coarse.triangles());
    println!("round trip ok");
    Ok(())
}

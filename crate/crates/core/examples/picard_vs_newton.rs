//! Picard and Newton iterations on the manufactured Kozeny-Carman case.
//!
//! ```text
//! cargo run --release --example picard_vs_newton -- [cells]
//! ```

use biot_mixed::elements::make_space_set;
use biot_mixed::mesh::{build_structured_mesh, SideTags};
use biot_mixed::physics::PermeabilityLaw;
use biot_mixed::solver::{newton_solve, picard_solve, SolverConfig};
use biot_mixed::verification::ManufacturedCase;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map_or(8, |a| a.parse().expect("cells"));
    let mesh = build_structured_mesh(n, n, 1.0, 1.0, &SideTags::per_side())?;
    let spaces = make_space_set(&mesh, 0)?;
    let config = SolverConfig { abs_tol: 1e-12, rel_tol: 1e-12, ..SolverConfig::default() };
    for law in [PermeabilityLaw::KozenyCarman { k0: 0.1, k1: 0.1 }, PermeabilityLaw::Exponential { k0: 0.1, k1: 0.1, k2: 2.0 }] {
        let case = ManufacturedCase::with_law(law);
        let data = case.problem_data();
        let (p, pt) = picard_solve(&mesh, &spaces, case.params, case.law, &data, config)?;
        let (nw, nt) = newton_solve(&mesh, &spaces, case.params, case.law, &data, config)?;
        println!("{law:?}");
        println!("  picard changes {:?}", pt.changes().iter().map(|c| format!("{c:.1e}")).collect::<Vec<_>>());
        println!("  newton changes {:?}", nt.changes().iter().map(|c| format!("{c:.1e}")).collect::<Vec<_>>());
        println!("  final states differ by {:.2e}", p.distance(&nw));
    }
    Ok(())
}

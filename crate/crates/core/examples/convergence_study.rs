//! Error and rate table for the manufactured Kozeny-Carman case.
//!
//! ```text
//! cargo run --release --example convergence_study -- [degree] [levels]
//! ```

use biot_mixed::solver::SolverConfig;
use biot_mixed::verification::{convergence_study, ManufacturedCase};

fn main() {
    let mut args = std::env::args().skip(1);
    let k: usize = args.next().map_or(0, |a| a.parse().expect("degree"));
    let levels: usize = args.next().map_or(5, |a| a.parse().expect("levels"));
    let study = convergence_study(&ManufacturedCase::default(), k, levels, SolverConfig::default()).expect("study");
    print!("{}", study.table());
    for r in &study.rows {
        println!(
            "level {}: {} iterations, {:.2}s, structural defect {:.1e}",
            r.level,
            r.iterations,
            r.seconds,
            r.structural.max_defect()
        );
    }
}

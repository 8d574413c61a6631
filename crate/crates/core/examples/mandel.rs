//! Mandel's consolidation test with constant and exponential permeability.
//!
//! ```text
//! cargo run --release --example mandel -- [out_dir]
//! ```

use std::time::Instant;

use biot_mixed::cli::mandel_summary;
use biot_mixed::output::{mandel_files, write_file};
use biot_mixed::scenarios::{mandel_parameters_default, run_mandel, MandelVariant};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map(std::path::PathBuf::from);
    let mut runs = Vec::new();
    for variant in [MandelVariant::Constant, MandelVariant::Exponential] {
        let start = Instant::now();
        let run = run_mandel(&mandel_parameters_default().with_variant(variant))?;
        let r = &run.record;
        println!(
            "{}: {:.1}s, {} Picard iterations, axial stress at (L/2,H) {:.4e}, largest slide defect {:.2e}",
            variant.label(),
            start.elapsed().as_secs_f64(),
            r.iterations.iter().sum::<usize>(),
            r.top.last().map_or(0.0, |v| v.stress[1][1]),
            r.slide_defect.iter().copied().fold(0.0, f64::max)
        );
        runs.push(run);
    }
    println!("{}", mandel_summary(&runs));
    if let Some(dir) = out {
        for (name, contents) in runs.iter().flat_map(mandel_files) {
            write_file(&dir, &name, &contents)?;
        }
    }
    Ok(())
}

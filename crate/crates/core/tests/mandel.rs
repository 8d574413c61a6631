//! Physical sanity of the default Mandel run with constant permeability.

use biot_mixed::scenarios::{mandel_parameters_default, run_mandel, MandelVariant};

#[test]
fn constant_variant_profiles() {
    let setup = mandel_parameters_default().with_variant(MandelVariant::Constant);
    let run = run_mandel(&setup).unwrap();
    let r = &run.record;
    assert_eq!(r.times.len(), r.p_center.len());
    assert!(r.iterations.iter().all(|&n| n >= 1 && n <= setup.solver.max_iterations));

    let last = r.top.last().unwrap();
    let syy = last.stress[1][1];
    assert!((syy + setup.load).abs() <= 0.25 * setup.load, "sigma_yy at the top {syy}");

    assert!(!r.midlines.is_empty());
    for m in &r.midlines {
        let p: Vec<f64> = m.values.iter().map(|v| v.pressure).collect();
        let max = p.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = p.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(max > 0.0 && min >= -0.05 * max, "t = {}: p in [{min}, {max}]", m.t);
    }

    // the sliding constraint is imposed weakly and vanishes with refinement
    assert!(r.slide_defect.iter().all(|d| d.is_finite() && *d < 1e-3));
}

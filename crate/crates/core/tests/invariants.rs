//! Property tests for mesh topology, the stress space and the error norms.

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use biot_mixed::elements::make_space_set;
use biot_mixed::forms::Forms;
use biot_mixed::mesh::{build_structured_mesh, refine_uniform, Mesh, SideTags};
use biot_mixed::physics::{MaterialParams, PermeabilityLaw};
use biot_mixed::solver::FieldState;
use biot_mixed::verification::manufactured::ZeroFields;
use biot_mixed::verification::invariants::normal_jump;
use biot_mixed::verification::{exact_distance, ManufacturedCase};

fn rect(nx: usize, ny: usize, lx: f64, ly: f64) -> Mesh {
    build_structured_mesh(nx, ny, lx, ly, &SideTags::per_side()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn structured_mesh_topology(nx in 1usize..9, ny in 1usize..9, lx in 0.1f64..5.0, ly in 0.1f64..5.0) {
        let m = rect(nx, ny, lx, ly);
        let (v, e, t) = (m.num_vertices() as i64, m.num_edges() as i64, m.num_cells() as i64);
        prop_assert_eq!(v - e + t, 1);
        prop_assert_eq!(t, 2 * (nx * ny) as i64);
        prop_assert_eq!(m.boundary_edges().count(), 2 * (nx + ny));
        prop_assert!((m.total_area() - lx * ly).abs() <= 1e-12 * lx * ly);
        for c in 0..m.num_cells() {
            prop_assert!(m.cell_area(c) > 0.0);
        }
        for e in 0..m.num_edges() {
            if let [Some(a), Some(b)] = m.edge_cells(e) {
                let sa = m.cell_edge_signs(a)[m.local_edge(a, e).unwrap()];
                let sb = m.cell_edge_signs(b)[m.local_edge(b, e).unwrap()];
                prop_assert_eq!(sa + sb, 0);
            }
        }
    }

    #[test]
    fn refinement_keeps_area_and_tags(nx in 1usize..5, ny in 1usize..5, lx in 0.5f64..3.0, ly in 0.5f64..3.0) {
        let m = rect(nx, ny, lx, ly);
        let r = refine_uniform(&m);
        prop_assert_eq!(r.num_cells(), 4 * m.num_cells());
        prop_assert!((r.total_area() - m.total_area()).abs() <= 1e-12 * m.total_area());
        prop_assert!((r.mesh_size() - 0.5 * m.mesh_size()).abs() <= 1e-12 * m.mesh_size());
        for tag in m.tags() {
            prop_assert_eq!(r.edges_with_tag(&tag.name).len(), 2 * m.edges_with_tag(&tag.name).len());
        }
        prop_assert_eq!(r.num_vertices() as i64 - r.num_edges() as i64 + r.num_cells() as i64, 1);
    }

    #[test]
    fn text_format_round_trip(nx in 1usize..6, ny in 1usize..6, lx in 0.1f64..4.0, ly in 0.1f64..4.0) {
        let m = rect(nx, ny, lx, ly);
        let back = Mesh::from_text(&m.to_text()).unwrap();
        prop_assert_eq!(back.triangles(), m.triangles());
        prop_assert_eq!(back.edges(), m.edges());
        prop_assert_eq!(back.tags(), m.tags());
        for (a, b) in back.vertices().iter().zip(m.vertices()) {
            prop_assert!((a[0] - b[0]).abs() <= 1e-14 * lx && (a[1] - b[1]).abs() <= 1e-14 * ly);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn stress_normal_trace_is_continuous(seed in any::<u64>(), k in 0usize..2, n in 1usize..4) {
        let m = rect(n, n + 1, 1.0, 1.3);
        let s = make_space_set(&m, k).unwrap();
        let forms = Forms::new(&m, &s).unwrap();
        let mut state = FieldState::zeros(&s);
        let mut rng = StdRng::seed_from_u64(seed);
        state.stress.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
        prop_assert!(normal_jump(&forms, &state) < 1e-11);
    }

    #[test]
    fn error_norms_are_a_metric(lambda in 0.1f64..10.0, mu in 0.1f64..10.0, lambda2 in 0.1f64..10.0) {
        let m = rect(3, 3, 1.0, 1.0);
        let case = |l: f64, mu: f64| ManufacturedCase {
            params: MaterialParams { lambda: l, mu, c0: 0.25, alpha: 0.25, mu_f: 1.0 },
            law: PermeabilityLaw::Constant { kappa0: 0.1 },
        };
        let (a, b) = (case(lambda, mu), case(lambda2, mu));
        let ab = exact_distance(&m, &a, &b, 4).values();
        let ba = exact_distance(&m, &b, &a, 4).values();
        let a0 = exact_distance(&m, &a, &ZeroFields, 4).values();
        let b0 = exact_distance(&m, &b, &ZeroFields, 4).values();
        let aa = exact_distance(&m, &a, &a, 4).values();
        for i in 0..5 {
            prop_assert!((ab[i] - ba[i]).abs() <= 1e-12 * (1.0 + ab[i]));
            prop_assert!(ab[i] <= a0[i] + b0[i] + 1e-12);
            prop_assert!(aa[i] == 0.0);
        }
    }
}

#[test]
fn documented_mesh_example_parses() {
    let text = "# biot-mixed mesh v1\nvertices 4\n0.0 0.0\n2.0 0.0\n0.0 1.0\n2.0 1.0\ntriangles 2\n0 1 3\n0 3 2\n\
                tags 2\nfixed left,bottom\nfree\nboundary 4\n0 1 fixed\n0 2 fixed\n1 3 free\n2 3 free\n";
    let m = Mesh::from_text(text).unwrap();
    assert_eq!((m.num_cells(), m.num_edges()), (2, 5));
    assert_eq!(m.edges_with_tag("fixed").len(), 2);
    assert!((m.total_area() - 2.0).abs() < 1e-15);
    assert!(Mesh::from_text(&text.replace("0 1 3\n", "0 3 1\n")).is_err());
    assert!(Mesh::from_text(&text.replace("2 3 free\n", "")).is_err());
}

//! CSV and legacy-VTK writers for command outputs.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::assembly::Field;
use crate::elements::{CellBasis, CellGeometry, RefTab, SpaceSet};
use crate::mesh::Mesh;
use crate::scenarios::MandelRun;
use crate::solver::FieldState;

/// Creates `dir` and writes `contents` to `dir/name`, returning the path.
pub fn write_file(dir: &Path, name: &str, contents: &str) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    std::fs::write(&path, contents)?;
    Ok(path)
}

/// `mandel_transients_<label>.csv` plus one mid-line file per stored time.
pub fn mandel_files(run: &MandelRun) -> Vec<(String, String)> {
    let label = run.setup.variant.label();
    let mut files = vec![(format!("mandel_transients_{label}.csv"), run.record.to_csv())];
    files.extend(run.record.midlines.iter().map(|m| (m.file_name(label), m.to_csv())));
    files
}

/// Coefficient vectors with columns `field,index,value`.
pub fn fields_csv(state: &FieldState) -> String {
    let mut s = String::from("field,index,value\n");
    for (name, f) in [
        ("strain", Field::Strain),
        ("pressure", Field::Pressure),
        ("stress", Field::Stress),
        ("displacement", Field::Displacement),
        ("rotation", Field::Rotation),
    ] {
        for (i, v) in state.field(f).iter().enumerate() {
            writeln!(s, "{name},{i},{v:.5e}").unwrap();
        }
    }
    s
}

/// Legacy ASCII VTK: pressure at vertices, the other fields at cell centroids.
pub fn vtk_string(mesh: &Mesh, spaces: &SpaceSet, state: &FieldState) -> String {
    let view = state.view(spaces);
    let nv = mesh.num_vertices();
    let nc = mesh.num_cells();
    let mut vertex_p = vec![None; nv];
    let mut cells = Vec::with_capacity(nc);
    let centroid = RefTab::new(spaces, &[[1.0 / 3.0, 1.0 / 3.0]]);
    for c in 0..nc {
        let geo = CellGeometry::of_cell(mesh, c);
        let tri = mesh.triangles()[c];
        let refs: Vec<[f64; 2]> = tri.iter().map(|&v| geo.inverse_map(mesh.vertices()[v])).collect();
        let tab = RefTab::new(spaces, &refs);
        let cb = CellBasis::new(mesh, spaces, &tab, c);
        for (q, &v) in tri.iter().enumerate() {
            if vertex_p[v].is_none() {
                vertex_p[v] = Some(view.at(c, &tab, &cb, q).pressure);
            }
        }
        let cb = CellBasis::new(mesh, spaces, &centroid, c);
        cells.push(view.at(c, &centroid, &cb, 0));
    }

    let mut s = String::from("# vtk DataFile Version 3.0\nbiot-mixed fields\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    writeln!(s, "POINTS {nv} double").unwrap();
    for v in mesh.vertices() {
        writeln!(s, "{:.9e} {:.9e} 0", v[0], v[1]).unwrap();
    }
    writeln!(s, "CELLS {nc} {}", 4 * nc).unwrap();
    for t in mesh.triangles() {
        writeln!(s, "3 {} {} {}", t[0], t[1], t[2]).unwrap();
    }
    writeln!(s, "CELL_TYPES {nc}").unwrap();
    for _ in 0..nc {
        s.push_str("5\n");
    }
    writeln!(s, "POINT_DATA {nv}\nSCALARS pressure double 1\nLOOKUP_TABLE default").unwrap();
    for p in &vertex_p {
        writeln!(s, "{:.9e}", p.unwrap_or(0.0)).unwrap();
    }
    writeln!(s, "CELL_DATA {nc}\nVECTORS displacement double").unwrap();
    for v in &cells {
        writeln!(s, "{:.9e} {:.9e} 0", v.displacement[0], v.displacement[1]).unwrap();
    }
    for (name, pick) in [("stress", 0), ("strain", 1)] {
        writeln!(s, "TENSORS {name} double").unwrap();
        for v in &cells {
            let t = if pick == 0 { v.stress } else { v.strain };
            writeln!(s, "{:.9e} {:.9e} 0\n{:.9e} {:.9e} 0\n0 0 0", t[0][0], t[0][1], t[1][0], t[1][1]).unwrap();
        }
    }
    s.push_str("SCALARS rotation double 1\nLOOKUP_TABLE default\n");
    for v in &cells {
        writeln!(s, "{:.9e}", v.rotation).unwrap();
    }
    s
}

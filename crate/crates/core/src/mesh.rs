//! Conforming triangulations of rectangles with oriented edges and boundary tags.
//!
//! Triangles are stored counterclockwise. Local edge `i` of a triangle runs from
//! local vertex `i+1` to local vertex `i+2` (mod 3), i.e. it is the edge opposite
//! vertex `i`, traversed in counterclockwise order. Every edge has a canonical
//! global orientation from its lower to its higher vertex index; the per-triangle
//! edge sign is `+1` when the counterclockwise traversal agrees with it.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use crate::error::MeshError;

pub type Point = [f64; 2];

/// The four sides of an axis-aligned rectangle `[0, lx] x [0, ly]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Bottom, Side::Right, Side::Top, Side::Left];

    pub fn name(self) -> &'static str {
        match self {
            Side::Bottom => "bottom",
            Side::Right => "right",
            Side::Top => "top",
            Side::Left => "left",
        }
    }
}

/// A named group of boundary edges.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTag {
    pub name: String,
    /// Rectangle sides this tag was built from, when known.
    pub sides: Vec<Side>,
}

/// Side → tag-label assignment for [`build_structured_mesh`].
#[derive(Debug, Clone, PartialEq)]
pub struct SideTags {
    pub bottom: String,
    pub right: String,
    pub top: String,
    pub left: String,
}

impl SideTags {
    /// One tag per side, named after the side.
    pub fn per_side() -> Self {
        Self::new("bottom", "right", "top", "left")
    }

    pub fn uniform(name: &str) -> Self {
        Self::new(name, name, name, name)
    }

    pub fn new(bottom: &str, right: &str, top: &str, left: &str) -> Self {
        Self {
            bottom: bottom.to_string(),
            right: right.to_string(),
            top: top.to_string(),
            left: left.to_string(),
        }
    }

    pub fn get(&self, side: Side) -> &str {
        match side {
            Side::Bottom => &self.bottom,
            Side::Right => &self.right,
            Side::Top => &self.top,
            Side::Left => &self.left,
        }
    }
}

impl Default for SideTags {
    fn default() -> Self {
        Self::per_side()
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    tri_edges: Vec<[usize; 3]>,
    tri_edge_signs: Vec<[i8; 3]>,
    edge_cells: Vec<[Option<usize>; 2]>,
    tags: Vec<BoundaryTag>,
    boundary_tags: BTreeMap<usize, usize>,
}

impl Mesh {
    /// Builds a mesh from raw connectivity and a list of tagged boundary edges
    /// `(a, b, tag)`. Validates every structural invariant.
    pub fn from_parts(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        tags: Vec<BoundaryTag>,
        tagged_edges: &[(usize, usize, usize)],
    ) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Invalid("mesh has no triangles".into()));
        }
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= vertices.len() {
                    return Err(MeshError::Invalid(format!("triangle {t} references vertex {v}")));
                }
            }
            let area = signed_area(&vertices, tri);
            if !(area > 0.0) {
                return Err(MeshError::Invalid(format!(
                    "triangle {t} has non-positive signed area {area:e}"
                )));
            }
        }
        for (i, tag) in tags.iter().enumerate() {
            if tags[..i].iter().any(|o| o.name == tag.name) {
                return Err(MeshError::Invalid(format!("duplicate tag name '{}'", tag.name)));
            }
        }

        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut edge_cells: Vec<[Option<usize>; 2]> = Vec::new();
        let mut tri_edges = Vec::with_capacity(triangles.len());
        let mut tri_edge_signs = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut te = [0usize; 3];
            let mut ts = [0i8; 3];
            for i in 0..3 {
                let a = tri[(i + 1) % 3];
                let b = tri[(i + 2) % 3];
                let key = (a.min(b), a.max(b));
                let e = *edge_index.entry(key).or_insert_with(|| {
                    edges.push([key.0, key.1]);
                    edge_cells.push([None, None]);
                    edges.len() - 1
                });
                let slot = &mut edge_cells[e];
                if slot[0].is_none() {
                    slot[0] = Some(t);
                } else if slot[1].is_none() {
                    slot[1] = Some(t);
                } else {
                    return Err(MeshError::Invalid(format!(
                        "edge ({}, {}) shared by more than two triangles",
                        key.0, key.1
                    )));
                }
                te[i] = e;
                ts[i] = if a < b { 1 } else { -1 };
            }
            tri_edges.push(te);
            tri_edge_signs.push(ts);
        }

        let mut boundary_tags = BTreeMap::new();
        for &(a, b, tag) in tagged_edges {
            if tag >= tags.len() {
                return Err(MeshError::Invalid(format!("unknown tag index {tag}")));
            }
            let e = *edge_index
                .get(&(a.min(b), a.max(b)))
                .ok_or_else(|| MeshError::Invalid(format!("tagged edge ({a}, {b}) is not a mesh edge")))?;
            if edge_cells[e][1].is_some() {
                return Err(MeshError::Invalid(format!("tagged edge ({a}, {b}) is interior")));
            }
            if boundary_tags.insert(e, tag).is_some() {
                return Err(MeshError::Invalid(format!("edge ({a}, {b}) tagged twice")));
            }
        }
        for (e, cells) in edge_cells.iter().enumerate() {
            if cells[1].is_none() && !boundary_tags.contains_key(&e) {
                let [a, b] = edges[e];
                return Err(MeshError::Invalid(format!("boundary edge ({a}, {b}) carries no tag")));
            }
        }

        Ok(Self {
            vertices,
            triangles,
            edges,
            tri_edges,
            tri_edge_signs,
            edge_cells,
            tags,
            boundary_tags,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Global edge indices of the three local edges of `cell`.
    pub fn cell_edges(&self, cell: usize) -> [usize; 3] {
        self.tri_edges[cell]
    }

    /// `+1` where the counterclockwise traversal of a local edge agrees with
    /// the global low→high orientation, `-1` otherwise.
    pub fn cell_edge_signs(&self, cell: usize) -> [i8; 3] {
        self.tri_edge_signs[cell]
    }

    pub fn cell_vertices(&self, cell: usize) -> [Point; 3] {
        let t = self.triangles[cell];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    /// Cells adjacent to an edge; the second slot is `None` on the boundary.
    pub fn edge_cells(&self, edge: usize) -> [Option<usize>; 2] {
        self.edge_cells[edge]
    }

    pub fn is_boundary_edge(&self, edge: usize) -> bool {
        self.edge_cells[edge][1].is_none()
    }

    pub fn tags(&self) -> &[BoundaryTag] {
        &self.tags
    }

    pub fn tag_index(&self, name: &str) -> Option<usize> {
        self.tags.iter().position(|t| t.name == name)
    }

    pub fn edge_tag(&self, edge: usize) -> Option<&str> {
        self.boundary_tags.get(&edge).map(|&t| self.tags[t].name.as_str())
    }

    /// Boundary edges carrying tag `name`, in increasing edge order.
    pub fn edges_with_tag(&self, name: &str) -> Vec<usize> {
        match self.tag_index(name) {
            Some(t) => self
                .boundary_tags
                .iter()
                .filter(|(_, &tag)| tag == t)
                .map(|(&e, _)| e)
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = (usize, &str)> + '_ {
        self.boundary_tags
            .iter()
            .map(move |(&e, &t)| (e, self.tags[t].name.as_str()))
    }

    /// Local index (0..3) of `edge` inside `cell`.
    pub fn local_edge(&self, cell: usize, edge: usize) -> Option<usize> {
        self.tri_edges[cell].iter().position(|&e| e == edge)
    }

    pub fn cell_area(&self, cell: usize) -> f64 {
        signed_area(&self.vertices, &self.triangles[cell])
    }

    pub fn cell_diameter(&self, cell: usize) -> f64 {
        let [a, b, c] = self.cell_vertices(cell);
        dist(a, b).max(dist(b, c)).max(dist(c, a))
    }

    pub fn edge_length(&self, edge: usize) -> f64 {
        let [a, b] = self.edges[edge];
        dist(self.vertices[a], self.vertices[b])
    }

    /// Unit normal of a boundary edge pointing out of the domain.
    pub fn outward_normal(&self, edge: usize) -> Point {
        let cell = self.edge_cells[edge][0].expect("edge has at least one cell");
        let local = self.local_edge(cell, edge).expect("incidence is consistent");
        let t = self.triangles[cell];
        let a = self.vertices[t[(local + 1) % 3]];
        let b = self.vertices[t[(local + 2) % 3]];
        let len = dist(a, b);
        [(b[1] - a[1]) / len, -(b[0] - a[0]) / len]
    }

    /// Mesh size `h`: the largest triangle diameter.
    pub fn mesh_size(&self) -> f64 {
        (0..self.num_cells())
            .map(|c| self.cell_diameter(c))
            .fold(0.0, f64::max)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_cells()).map(|c| self.cell_area(c)).sum()
    }

    /// Index of a cell containing `x` (within a small relative tolerance),
    /// together with its reference coordinates.
    pub fn locate(&self, x: Point) -> Option<(usize, Point)> {
        let tol = 1e-10;
        (0..self.num_cells()).find_map(|c| {
            let [a, b, d] = self.cell_vertices(c);
            let j = [[b[0] - a[0], d[0] - a[0]], [b[1] - a[1], d[1] - a[1]]];
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            let rx = x[0] - a[0];
            let ry = x[1] - a[1];
            let xi = (j[1][1] * rx - j[0][1] * ry) / det;
            let eta = (-j[1][0] * rx + j[0][0] * ry) / det;
            if xi >= -tol && eta >= -tol && xi + eta <= 1.0 + tol {
                Some((c, [xi.clamp(0.0, 1.0), eta.clamp(0.0, 1.0 - xi.clamp(0.0, 1.0))]))
            } else {
                None
            }
        })
    }

    /// Writes the line-oriented text format (see the crate README).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "# biot-mixed mesh v1").unwrap();
        writeln!(s, "vertices {}", self.vertices.len()).unwrap();
        for v in &self.vertices {
            writeln!(s, "{:.17e} {:.17e}", v[0], v[1]).unwrap();
        }
        writeln!(s, "triangles {}", self.triangles.len()).unwrap();
        for t in &self.triangles {
            writeln!(s, "{} {} {}", t[0], t[1], t[2]).unwrap();
        }
        writeln!(s, "tags {}", self.tags.len()).unwrap();
        for t in &self.tags {
            let sides: Vec<&str> = t.sides.iter().map(|s| s.name()).collect();
            if sides.is_empty() {
                writeln!(s, "{}", t.name).unwrap();
            } else {
                writeln!(s, "{} {}", t.name, sides.join(",")).unwrap();
            }
        }
        writeln!(s, "boundary {}", self.boundary_tags.len()).unwrap();
        for (&e, &t) in &self.boundary_tags {
            let [a, b] = self.edges[e];
            writeln!(s, "{} {} {}", a, b, self.tags[t].name).unwrap();
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, MeshError> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let mut next = |what: &str| -> Result<&str, MeshError> {
            lines.next().ok_or_else(|| MeshError::Parse(format!("unexpected end of file reading {what}")))
        };
        fn header(line: &str, name: &str) -> Result<usize, MeshError> {
            let mut it = line.split_whitespace();
            if it.next() != Some(name) {
                return Err(MeshError::Parse(format!("expected '{name}', found '{line}'")));
            }
            it.next()
                .and_then(|n| n.parse().ok())
                .ok_or_else(|| MeshError::Parse(format!("bad count in '{line}'")))
        }
        fn parse<T: std::str::FromStr>(tok: Option<&str>, line: &str) -> Result<T, MeshError> {
            tok.and_then(|t| t.parse().ok())
                .ok_or_else(|| MeshError::Parse(format!("malformed line '{line}'")))
        }

        let nv = header(next("vertices")?, "vertices")?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let line = next("vertex")?;
            let mut it = line.split_whitespace();
            vertices.push([parse(it.next(), line)?, parse(it.next(), line)?]);
        }
        let nt = header(next("triangles")?, "triangles")?;
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let line = next("triangle")?;
            let mut it = line.split_whitespace();
            triangles.push([parse(it.next(), line)?, parse(it.next(), line)?, parse(it.next(), line)?]);
        }
        let ntags = header(next("tags")?, "tags")?;
        let mut tags = Vec::with_capacity(ntags);
        for _ in 0..ntags {
            let line = next("tag")?;
            let mut it = line.split_whitespace();
            let name = it.next().ok_or_else(|| MeshError::Parse("empty tag line".into()))?;
            let sides = match it.next() {
                Some(list) => list
                    .split(',')
                    .map(|s| {
                        Side::ALL
                            .into_iter()
                            .find(|side| side.name() == s)
                            .ok_or_else(|| MeshError::Parse(format!("unknown side '{s}'")))
                    })
                    .collect::<Result<Vec<_>, _>>()?,
                None => Vec::new(),
            };
            tags.push(BoundaryTag { name: name.to_string(), sides });
        }
        let nb = header(next("boundary")?, "boundary")?;
        let mut tagged = Vec::with_capacity(nb);
        for _ in 0..nb {
            let line = next("boundary edge")?;
            let mut it = line.split_whitespace();
            let a: usize = parse(it.next(), line)?;
            let b: usize = parse(it.next(), line)?;
            let name = it.next().ok_or_else(|| MeshError::Parse(format!("malformed line '{line}'")))?;
            let t = tags
                .iter()
                .position(|tag| tag.name == name)
                .ok_or_else(|| MeshError::Parse(format!("undeclared tag '{name}'")))?;
            tagged.push((a, b, t));
        }
        Mesh::from_parts(vertices, triangles, tags, &tagged)
    }

    pub fn write(&self, path: &Path) -> Result<(), MeshError> {
        std::fs::write(path, self.to_text()).map_err(|e| MeshError::Io(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self, MeshError> {
        let text = std::fs::read_to_string(path).map_err(|e| MeshError::Io(e.to_string()))?;
        Self::from_text(&text)
    }
}

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn signed_area(vertices: &[Point], tri: &[usize; 3]) -> f64 {
    let [a, b, c] = [vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]];
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn tags_from_sides(sides: &SideTags) -> (Vec<BoundaryTag>, [usize; 4]) {
    let mut tags: Vec<BoundaryTag> = Vec::new();
    let mut index = [0usize; 4];
    for (k, side) in Side::ALL.into_iter().enumerate() {
        let name = sides.get(side);
        index[k] = match tags.iter().position(|t| t.name == name) {
            Some(i) => {
                tags[i].sides.push(side);
                i
            }
            None => {
                tags.push(BoundaryTag { name: name.to_string(), sides: vec![side] });
                tags.len() - 1
            }
        };
    }
    (tags, index)
}

/// Structured triangulation of `[0, lx] x [0, ly]` with `nx * ny` cells, each
/// split along its bottom-left → top-right diagonal.
pub fn build_structured_mesh(
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    sides: &SideTags,
) -> Result<Mesh, MeshError> {
    if nx == 0 || ny == 0 {
        return Err(MeshError::Invalid(format!("cell counts must be positive, got {nx} x {ny}")));
    }
    if !(lx > 0.0 && ly > 0.0) {
        return Err(MeshError::Invalid(format!("lengths must be positive, got {lx} x {ly}")));
    }
    let vid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([lx * i as f64 / nx as f64, ly * j as f64 / ny as f64]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    let (tags, idx) = tags_from_sides(sides);
    let mut tagged = Vec::with_capacity(2 * (nx + ny));
    for i in 0..nx {
        tagged.push((vid(i, 0), vid(i + 1, 0), idx[0]));
        tagged.push((vid(i, ny), vid(i + 1, ny), idx[2]));
    }
    for j in 0..ny {
        tagged.push((vid(nx, j), vid(nx, j + 1), idx[1]));
        tagged.push((vid(0, j), vid(0, j + 1), idx[3]));
    }
    Mesh::from_parts(vertices, triangles, tags, &tagged)
}

/// Splits every triangle into four congruent children through its edge midpoints.
pub fn refine_uniform(mesh: &Mesh) -> Mesh {
    let nv = mesh.num_vertices();
    let mut vertices = mesh.vertices.clone();
    for &[a, b] in &mesh.edges {
        let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
        vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
    }
    let mut triangles = Vec::with_capacity(4 * mesh.num_cells());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let e = mesh.tri_edges[t];
        let m = [nv + e[0], nv + e[1], nv + e[2]];
        triangles.push([tri[0], m[2], m[1]]);
        triangles.push([m[2], tri[1], m[0]]);
        triangles.push([m[1], m[0], tri[2]]);
        triangles.push([m[0], m[1], m[2]]);
    }
    let mut tagged = Vec::with_capacity(2 * mesh.boundary_tags.len());
    for (&e, &tag) in &mesh.boundary_tags {
        let [a, b] = mesh.edges[e];
        tagged.push((a, nv + e, tag));
        tagged.push((nv + e, b, tag));
    }
    Mesh::from_parts(vertices, triangles, mesh.tags.clone(), &tagged)
        .expect("refinement of a valid mesh is valid")
}

/// Mesh size `h := max_K h_K`.
pub fn mesh_size(mesh: &Mesh) -> f64 {
    mesh.mesh_size()
}

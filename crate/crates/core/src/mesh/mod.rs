//! Unstructured triangular meshes with tagged boundary edges.
//!
//! A [`Mesh`] is immutable once built: every constructor validates that cells
//! are counter-clockwise with strictly positive area, that each tagged
//! boundary edge is the edge of exactly one cell, and that swimmer boundaries
//! close into loops.

mod generate;
mod locate;
mod msh;
mod quality;
mod remesh;

pub use generate::{
    generate_channel, generate_domain, structured_rectangle, BodyOutline, Hole, HoleShape, OuterBoundary,
};
pub use locate::PointLocator;
pub use msh::{load_msh, parse_msh};
pub use quality::{cell_quality, quality_report, triangle_quality, QualityReport};
pub use remesh::{remesh, remesh_with_map, RemeshOutput};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{self, Point};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("cell {cell} references vertex {vertex} out of range")]
    BadIndex { cell: usize, vertex: usize },
    #[error("cell {cell} has non-positive signed area {area:.3e}")]
    NonPositiveArea { cell: usize, area: f64 },
    #[error("inverted element: cell {cell} has signed area {area:.3e} after displacement")]
    InvertedElement { cell: usize, area: f64 },
    #[error("boundary edge ({0}, {1}) does not belong to any cell")]
    OrphanBoundaryEdge(usize, usize),
    #[error("boundary edge ({0}, {1}) is shared by two cells")]
    InteriorBoundaryEdge(usize, usize),
    #[error("boundary edges tagged '{0}' do not form closed loops")]
    OpenLoop(String),
    #[error("tag index {0} out of range")]
    BadTag(usize),
    #[error("displacement has {got} entries, mesh has {expected} vertices")]
    DisplacementLength { got: usize, expected: usize },
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("boundary loop self-intersects near edge ({0}, {1})")]
    SelfIntersection(usize, usize),
    #[error("triangulation failed: {0}")]
    Triangulation(String),
    #[error("msh line {line}: {message}")]
    Msh { line: usize, message: String },
    #[error("unsupported element type {0} (only 1 = line and 2 = triangle are read)")]
    UnsupportedElement(u32),
    #[error("physical tag {0} has no name in $PhysicalNames")]
    MissingPhysicalName(i64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// What a tagged piece of boundary represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryKind {
    /// No-slip or prescribed-velocity wall.
    Wall,
    /// Prescribed-velocity inflow.
    Inflow,
    /// Traction (Neumann) outflow.
    Outflow,
    /// Boundary of the body with the given index.
    Swimmer(usize),
}

impl BoundaryKind {
    pub fn is_dirichlet(self) -> bool {
        matches!(self, BoundaryKind::Wall | BoundaryKind::Inflow)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTag {
    pub name: String,
    pub kind: BoundaryKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub tag: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    vertices: Vec<Point>,
    cells: Vec<[usize; 3]>,
    boundary_edges: Vec<BoundaryEdge>,
    tags: Vec<BoundaryTag>,
}

/// Edge-based connectivity derived from a mesh.
#[derive(Clone, Debug)]
pub struct Topology {
    /// Unique edges as sorted vertex pairs, in lexicographic order.
    pub edges: Vec<[usize; 2]>,
    /// For each cell, its edge indices in local order (01, 12, 20).
    pub cell_edges: Vec<[usize; 3]>,
    /// Cells adjacent to each edge; the second entry is `None` on the boundary.
    pub edge_cells: Vec<[Option<usize>; 2]>,
}

impl Topology {
    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_cells[e][1].is_none()
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = if a < b { [a, b] } else { [b, a] };
        self.edges.binary_search(&key).ok()
    }
}

fn key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl Mesh {
    /// Builds and validates a mesh.
    pub fn new(
        vertices: Vec<Point>,
        cells: Vec<[usize; 3]>,
        boundary_edges: Vec<BoundaryEdge>,
        tags: Vec<BoundaryTag>,
    ) -> Result<Self, MeshError> {
        let mesh = Mesh { vertices, cells, boundary_edges, tags };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[[usize; 3]] {
        &self.cells
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    pub fn tags(&self) -> &[BoundaryTag] {
        &self.tags
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn tag_index(&self, name: &str) -> Option<usize> {
        self.tags.iter().position(|t| t.name == name)
    }

    /// Replaces the kind of every tag; used when a scenario assigns
    /// boundary conditions to named boundaries.
    pub fn set_tag_kind(&mut self, tag: usize, kind: BoundaryKind) {
        self.tags[tag].kind = kind;
    }

    pub fn cell_points(&self, c: usize) -> [Point; 3] {
        let [a, b, d] = self.cells[c];
        [self.vertices[a], self.vertices[b], self.vertices[d]]
    }

    pub fn cell_area(&self, c: usize) -> f64 {
        let [a, b, d] = self.cell_points(c);
        geom::triangle_area(a, b, d)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.n_cells()).map(|c| self.cell_area(c)).sum()
    }

    pub fn topology(&self) -> Topology {
        let mut map: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (c, cell) in self.cells.iter().enumerate() {
            for k in 0..3 {
                map.entry(key(cell[k], cell[(k + 1) % 3])).or_default().push(c);
            }
        }
        let edges: Vec<[usize; 2]> = map.keys().map(|&(a, b)| [a, b]).collect();
        let edge_cells = map.values().map(|cs| [cs.first().copied(), cs.get(1).copied()]).collect();
        let cell_edges = self
            .cells
            .iter()
            .map(|cell| {
                let mut out = [0; 3];
                for k in 0..3 {
                    let (a, b) = key(cell[k], cell[(k + 1) % 3]);
                    out[k] = edges.binary_search(&[a, b]).unwrap();
                }
                out
            })
            .collect();
        Topology { edges, cell_edges, edge_cells }
    }

    /// Tag of each boundary edge keyed by its sorted vertex pair.
    pub fn boundary_tag_map(&self) -> BTreeMap<(usize, usize), usize> {
        self.boundary_edges.iter().map(|e| (key(e.vertices[0], e.vertices[1]), e.tag)).collect()
    }

    /// Boundary vertices of every edge whose tag kind is `Swimmer(body)`.
    pub fn swimmer_vertices(&self, body: usize) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .boundary_edges
            .iter()
            .filter(|e| self.tags[e.tag].kind == BoundaryKind::Swimmer(body))
            .flat_map(|e| e.vertices)
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Vertices on the outer boundary: every topological boundary vertex that
    /// is not on a swimmer loop.
    pub fn outer_boundary_vertices(&self) -> Vec<usize> {
        let topo = self.topology();
        let tags = self.boundary_tag_map();
        let mut v = Vec::new();
        for (e, edge) in topo.edges.iter().enumerate() {
            if !topo.is_boundary_edge(e) {
                continue;
            }
            let swimmer = tags
                .get(&(edge[0], edge[1]))
                .map(|&t| matches!(self.tags[t].kind, BoundaryKind::Swimmer(_)))
                .unwrap_or(false);
            if !swimmer {
                v.extend_from_slice(edge);
            }
        }
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Boundary loops of a given body as ordered vertex cycles, each
    /// oriented so that the body lies on its left (counter-clockwise around
    /// the body).
    pub fn swimmer_loops(&self, body: usize) -> Vec<Vec<usize>> {
        let edges: Vec<[usize; 2]> = self
            .boundary_edges
            .iter()
            .filter(|e| self.tags[e.tag].kind == BoundaryKind::Swimmer(body))
            .map(|e| e.vertices)
            .collect();
        let mut loops = chain_loops(&edges);
        for l in &mut loops {
            let pts: Vec<Point> = l.iter().map(|&v| self.vertices[v]).collect();
            if geom::polygon_area(&pts) < 0.0 {
                l.reverse();
            }
        }
        loops
    }

    pub fn n_swimmer_tags(&self) -> usize {
        self.tags
            .iter()
            .filter_map(|t| match t.kind {
                BoundaryKind::Swimmer(i) => Some(i + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Moves every vertex by the given displacement and validates the result.
    pub fn displace(&self, displacement: &[Point]) -> Result<Mesh, MeshError> {
        if displacement.len() != self.vertices.len() {
            return Err(MeshError::DisplacementLength { got: displacement.len(), expected: self.vertices.len() });
        }
        let vertices = self.vertices.iter().zip(displacement).map(|(&x, &d)| geom::add(x, d)).collect();
        self.with_vertices(vertices)
    }

    /// Same connectivity with new vertex positions.
    pub fn with_vertices(&self, vertices: Vec<Point>) -> Result<Mesh, MeshError> {
        let mesh = Mesh { vertices, cells: self.cells.clone(), boundary_edges: self.boundary_edges.clone(), tags: self.tags.clone() };
        if let Some((cell, area)) = mesh.first_inverted() {
            return Err(MeshError::InvertedElement { cell, area });
        }
        Ok(mesh)
    }

    /// Replaces vertex positions without validation.
    pub(crate) fn set_vertices_unchecked(&mut self, vertices: Vec<Point>) {
        self.vertices = vertices;
    }

    /// First cell with non-positive signed area.
    pub fn first_inverted(&self) -> Option<(usize, f64)> {
        (0..self.cells.len()).map(|c| (c, self.cell_area(c))).find(|&(_, a)| a <= 0.0 || !a.is_finite())
    }

    /// Splits each triangle into four through its edge midpoints.
    pub fn refine_uniform(&self) -> Mesh {
        let topo = self.topology();
        let nv = self.vertices.len();
        let mut vertices = self.vertices.clone();
        vertices.extend(topo.edges.iter().map(|e| geom::midpoint(self.vertices[e[0]], self.vertices[e[1]])));
        let mut cells = Vec::with_capacity(4 * self.cells.len());
        for (c, cell) in self.cells.iter().enumerate() {
            let [e01, e12, e20] = topo.cell_edges[c].map(|e| nv + e);
            let [a, b, d] = *cell;
            cells.push([a, e01, e20]);
            cells.push([e01, b, e12]);
            cells.push([e20, e12, d]);
            cells.push([e01, e12, e20]);
        }
        let mut boundary_edges = Vec::with_capacity(2 * self.boundary_edges.len());
        for e in &self.boundary_edges {
            let m = nv + topo.edge_index(e.vertices[0], e.vertices[1]).unwrap();
            boundary_edges.push(BoundaryEdge { vertices: [e.vertices[0], m], tag: e.tag });
            boundary_edges.push(BoundaryEdge { vertices: [m, e.vertices[1]], tag: e.tag });
        }
        Mesh { vertices, cells, boundary_edges, tags: self.tags.clone() }
    }

    /// Smallest edge length over all cells.
    pub fn min_edge_length(&self) -> f64 {
        self.topology().edges.iter().map(|e| geom::dist(self.vertices[e[0]], self.vertices[e[1]])).fold(f64::INFINITY, f64::min)
    }

    pub fn max_edge_length(&self) -> f64 {
        self.topology().edges.iter().map(|e| geom::dist(self.vertices[e[0]], self.vertices[e[1]])).fold(0.0, f64::max)
    }

    /// Number of edge-connected components of the cell graph.
    pub fn connected_components(&self) -> usize {
        let topo = self.topology();
        let mut parent: Vec<usize> = (0..self.cells.len()).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for ec in &topo.edge_cells {
            if let [Some(a), Some(b)] = *ec {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
        (0..self.cells.len()).filter(|&i| find(&mut parent, i) == i).count()
    }

    fn validate(&self) -> Result<(), MeshError> {
        let nv = self.vertices.len();
        for (c, cell) in self.cells.iter().enumerate() {
            if let Some(&v) = cell.iter().find(|&&v| v >= nv) {
                return Err(MeshError::BadIndex { cell: c, vertex: v });
            }
            let area = self.cell_area(c);
            if !(area > 0.0) {
                return Err(MeshError::NonPositiveArea { cell: c, area });
            }
        }
        let mut count: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for cell in &self.cells {
            for k in 0..3 {
                *count.entry(key(cell[k], cell[(k + 1) % 3])).or_default() += 1;
            }
        }
        for e in &self.boundary_edges {
            if e.tag >= self.tags.len() {
                return Err(MeshError::BadTag(e.tag));
            }
            let [a, b] = e.vertices;
            match count.get(&key(a, b)) {
                None => return Err(MeshError::OrphanBoundaryEdge(a, b)),
                Some(1) => {}
                Some(_) => return Err(MeshError::InteriorBoundaryEdge(a, b)),
            }
        }
        // The full boundary closes automatically; swimmer groups must close on their own.
        for (t, tag) in self.tags.iter().enumerate() {
            if !matches!(tag.kind, BoundaryKind::Swimmer(_)) {
                continue;
            }
            let mut degree: BTreeMap<usize, usize> = BTreeMap::new();
            for e in self.boundary_edges.iter().filter(|e| e.tag == t) {
                for v in e.vertices {
                    *degree.entry(v).or_default() += 1;
                }
            }
            if degree.values().any(|&d| d != 2) {
                return Err(MeshError::OpenLoop(tag.name.clone()));
            }
        }
        Ok(())
    }
}

/// Chains unordered edges into closed vertex cycles.
pub(crate) fn chain_loops(edges: &[[usize; 2]]) -> Vec<Vec<usize>> {
    let mut adj: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for e in edges {
        adj.entry(e[0]).or_default().push(e[1]);
        adj.entry(e[1]).or_default().push(e[0]);
    }
    let mut visited = std::collections::BTreeSet::new();
    let mut loops = Vec::new();
    for &start in adj.keys() {
        if visited.contains(&start) {
            continue;
        }
        let mut cycle = vec![start];
        visited.insert(start);
        let mut prev = usize::MAX;
        let mut cur = start;
        loop {
            let next = adj[&cur].iter().copied().find(|&n| n != prev && !visited.contains(&n));
            match next {
                Some(n) => {
                    visited.insert(n);
                    cycle.push(n);
                    prev = cur;
                    cur = n;
                }
                None => break,
            }
        }
        loops.push(cycle);
    }
    loops
}

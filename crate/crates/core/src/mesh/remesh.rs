use std::collections::BTreeMap;

use super::generate::triangulate_region;
use super::{BoundaryEdge, Mesh, MeshError};
use crate::geom::{self, Point};

/// Result of [`remesh_with_map`].
#[derive(Clone, Debug)]
pub struct RemeshOutput {
    pub mesh: Mesh,
    /// New index of every old vertex that survived (all boundary vertices).
    pub vertex_map: Vec<Option<usize>>,
}

/// Re-triangulates the region bounded by the current boundary polygons.
pub fn remesh(mesh: &Mesh) -> Result<Mesh, MeshError> {
    remesh_with_map(mesh).map(|o| o.mesh)
}

/// Like [`remesh`], also returning where the old boundary vertices went.
///
/// Boundary vertices come first in the new mesh, in increasing old index,
/// and keep their exact coordinates and tags. Interior points are generated
/// by constrained Delaunay refinement with an area bound taken from the
/// largest current cell.
pub fn remesh_with_map(mesh: &Mesh) -> Result<RemeshOutput, MeshError> {
    let topo = mesh.topology();
    let boundary: Vec<[usize; 2]> =
        (0..topo.edges.len()).filter(|&e| topo.is_boundary_edge(e)).map(|e| topo.edges[e]).collect();

    check_simple(mesh.vertices(), &boundary)?;

    let mut vertex_map = vec![None; mesh.n_vertices()];
    let mut old_ids: Vec<usize> = boundary.iter().flatten().copied().collect();
    old_ids.sort_unstable();
    old_ids.dedup();
    let points: Vec<Point> = old_ids
        .iter()
        .enumerate()
        .map(|(new, &old)| {
            vertex_map[old] = Some(new);
            mesh.vertices()[old]
        })
        .collect();
    let segments: Vec<[usize; 2]> =
        boundary.iter().map(|e| [vertex_map[e[0]].unwrap(), vertex_map[e[1]].unwrap()]).collect();

    let max_area = (0..mesh.n_cells()).map(|c| mesh.cell_area(c)).fold(0.0, f64::max);
    let (vertices, cells) = triangulate_region(&points, &segments, max_area)?;

    let mut boundary_edges = Vec::with_capacity(mesh.boundary_edges().len());
    for e in mesh.boundary_edges() {
        boundary_edges.push(BoundaryEdge {
            vertices: [vertex_map[e.vertices[0]].unwrap(), vertex_map[e.vertices[1]].unwrap()],
            tag: e.tag,
        });
    }
    let out = Mesh::new(vertices, cells, boundary_edges, mesh.tags().to_vec())?;
    if out.connected_components() != mesh.connected_components() {
        return Err(MeshError::Triangulation("remeshed domain changed connectivity".into()));
    }
    Ok(RemeshOutput { mesh: out, vertex_map })
}

/// Rejects boundaries where two segments that share no vertex touch.
fn check_simple(vertices: &[Point], segments: &[[usize; 2]]) -> Result<(), MeshError> {
    // Bucket segments on a coarse grid so only nearby pairs are tested.
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for s in segments {
        for &v in s {
            for k in 0..2 {
                lo[k] = lo[k].min(vertices[v][k]);
                hi[k] = hi[k].max(vertices[v][k]);
            }
        }
    }
    let n = (segments.len() as f64).sqrt().ceil().max(1.0) as usize;
    let cell = [((hi[0] - lo[0]) / n as f64).max(1e-300), ((hi[1] - lo[1]) / n as f64).max(1e-300)];
    let bin = |p: Point, k: usize| (((p[k] - lo[k]) / cell[k]) as usize).min(n - 1);
    let mut grid: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (i, s) in segments.iter().enumerate() {
        let (a, b) = (vertices[s[0]], vertices[s[1]]);
        for gx in bin(a, 0).min(bin(b, 0))..=bin(a, 0).max(bin(b, 0)) {
            for gy in bin(a, 1).min(bin(b, 1))..=bin(a, 1).max(bin(b, 1)) {
                grid.entry((gx, gy)).or_default().push(i);
            }
        }
    }
    for bucket in grid.values() {
        for (x, &i) in bucket.iter().enumerate() {
            for &j in &bucket[x + 1..] {
                let (si, sj) = (segments[i], segments[j]);
                if si.iter().any(|v| sj.contains(v)) {
                    continue;
                }
                if geom::segments_intersect(vertices[si[0]], vertices[si[1]], vertices[sj[0]], vertices[sj[1]]) {
                    return Err(MeshError::SelfIntersection(i.min(j), i.max(j)));
                }
            }
        }
    }
    Ok(())
}

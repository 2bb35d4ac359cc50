use super::{fast_march, CollisionParams, NarrowBandField};
use crate::geom::{self, Point};
use crate::mesh::Mesh;
use crate::par;

/// Distance fields seeded by each body boundary and by the outer boundary.
#[derive(Clone, Debug)]
pub struct DistanceFields {
    pub bodies: Vec<NarrowBandField>,
    pub wall: Option<NarrowBandField>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContactKind {
    BodyBody(usize, usize),
    BodyWall(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactPair {
    pub kind: ContactKind,
    /// Distance between the contact points; `d_max` when the partner is
    /// outside the narrow band.
    pub distance: f64,
    /// Contact point on the first body.
    pub x_i: Point,
    /// Contact point on the partner (second body or outer wall).
    pub x_j: Point,
    pub active: bool,
}

/// Runs one narrow-band fast march per body and one from the outer boundary.
pub fn compute_fields(mesh: &Mesh, n_bodies: usize, d_max: f64) -> DistanceFields {
    let outer = mesh.outer_boundary_vertices();
    let fields = par::map_range(n_bodies + 1, |k| {
        if k < n_bodies {
            Some(fast_march(mesh, &mesh.swimmer_vertices(k), d_max))
        } else if outer.is_empty() {
            None
        } else {
            Some(fast_march(mesh, &outer, d_max))
        }
    });
    let mut fields: Vec<Option<NarrowBandField>> = fields;
    let wall = fields.pop().flatten();
    DistanceFields { bodies: fields.into_iter().map(|f| f.expect("body field")).collect(), wall }
}

/// Vertex of `candidates` minimizing the field; ties go to the smallest index.
fn argmin(field: &NarrowBandField, candidates: &[usize]) -> (usize, f64) {
    let mut best = (usize::MAX, f64::INFINITY);
    for &v in candidates {
        let d = field.values[v];
        if d < best.1 || (d == best.1 && v < best.0) {
            best = (v, d);
        }
    }
    best
}

fn pair(mesh: &Mesh, kind: ContactKind, own: &[usize], other: &[usize], f_own: &NarrowBandField, f_other: &NarrowBandField, params: &CollisionParams) -> ContactPair {
    let (vi, di) = argmin(f_other, own);
    let (vj, dj) = argmin(f_own, other);
    let (x_i, x_j) = (mesh.vertices()[vi], mesh.vertices()[vj]);
    let saturated = di >= f_other.d_max && dj >= f_own.d_max;
    let distance = if saturated { f_own.d_max.max(f_other.d_max) } else { geom::dist(x_i, x_j) };
    ContactPair { kind, distance, x_i, x_j, active: !saturated && distance <= params.w_col }
}

/// Every unordered body pair followed by every body–wall pair.
pub fn find_contacts(mesh: &Mesh, fields: &DistanceFields, params: &CollisionParams) -> Vec<ContactPair> {
    let nb = fields.bodies.len();
    let boundary: Vec<Vec<usize>> = (0..nb).map(|i| mesh.swimmer_vertices(i)).collect();
    let pairs: Vec<(usize, usize)> = (0..nb).flat_map(|i| ((i + 1)..nb).map(move |j| (i, j))).collect();
    let mut out = par::map_slice(&pairs, |&(i, j)| {
        pair(mesh, ContactKind::BodyBody(i, j), &boundary[i], &boundary[j], &fields.bodies[i], &fields.bodies[j], params)
    });
    if let Some(wall) = &fields.wall {
        let outer = mesh.outer_boundary_vertices();
        for i in 0..nb {
            out.push(pair(mesh, ContactKind::BodyWall(i), &boundary[i], &outer, &fields.bodies[i], wall, params));
        }
    }
    out
}

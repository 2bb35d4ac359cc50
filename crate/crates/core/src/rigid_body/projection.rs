use super::{Body, RigidBodyError};
use crate::fem::{DofMap, NodeClass};
use crate::geom;
use crate::linalg::CsrMatrix;

/// Operator from reduced unknowns `[free velocity | (ℓx, ℓy, ω) per body |
/// pressure]` to full unknowns `[velocity | body | pressure]`. Rows of body
/// boundary dofs at `x` read `u = ℓ + ω (x − x_CM)^⊥` with `(a, b)^⊥ = (−b, a)`.
#[derive(Clone, Debug)]
pub struct Projection {
    pub matrix: CsrMatrix,
    /// Reduced index of each full index that is kept as its own unknown.
    pub reduced_index: Vec<Option<usize>>,
    pub n_velocity: usize,
    pub n_bodies: usize,
    /// First body unknown in the reduced layout.
    pub body_offset: usize,
}

impl Projection {
    pub fn n_full(&self) -> usize {
        self.matrix.nrows
    }

    pub fn n_reduced(&self) -> usize {
        self.matrix.ncols
    }

    /// Full index of body unknown `k` (0: ℓx, 1: ℓy, 2: ω) of body `b`.
    pub fn full_body_index(&self, b: usize, k: usize) -> usize {
        self.n_velocity + 3 * b + k
    }

    pub fn reduced_body_index(&self, b: usize, k: usize) -> usize {
        self.body_offset + 3 * b + k
    }
}

pub fn build_projection(dofmap: &DofMap, bodies: &[Body]) -> Result<Projection, RigidBodyError> {
    let nvel = dofmap.n_velocity();
    let nb = bodies.len();
    let n_full = nvel + 3 * nb + dofmap.n_pressure();
    let mut reduced_index = vec![None; n_full];
    let mut next = 0;
    for node in 0..dofmap.n_nodes() {
        match dofmap.node_class(node) {
            NodeClass::Gamma(b) if b >= nb => return Err(RigidBodyError::UnownedGamma { node, body: b }),
            NodeClass::Gamma(_) => {}
            _ => {
                reduced_index[2 * node] = Some(next);
                reduced_index[2 * node + 1] = Some(next + 1);
                next += 2;
            }
        }
    }
    let body_offset = next;
    for k in nvel..n_full {
        reduced_index[k] = Some(next);
        next += 1;
    }
    let mut triplets = Vec::with_capacity(n_full + dofmap.n_nodes());
    for node in 0..dofmap.n_nodes() {
        match dofmap.node_class(node) {
            NodeClass::Gamma(b) => {
                let r = geom::sub(dofmap.node_coords()[node], bodies[b].x_cm);
                let perp = geom::perp(r);
                let lx = body_offset + 3 * b;
                triplets.push((2 * node, lx, 1.0));
                triplets.push((2 * node, lx + 2, perp[0]));
                triplets.push((2 * node + 1, lx + 1, 1.0));
                triplets.push((2 * node + 1, lx + 2, perp[1]));
            }
            _ => {
                triplets.push((2 * node, reduced_index[2 * node].unwrap(), 1.0));
                triplets.push((2 * node + 1, reduced_index[2 * node + 1].unwrap(), 1.0));
            }
        }
    }
    for k in nvel..n_full {
        triplets.push((k, reduced_index[k].unwrap(), 1.0));
    }
    Ok(Projection {
        matrix: CsrMatrix::from_triplets(n_full, next, &triplets),
        reduced_index,
        n_velocity: nvel,
        n_bodies: nb,
        body_offset,
    })
}

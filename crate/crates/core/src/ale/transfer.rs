use super::AleError;
use crate::fem::{eval_p1, eval_velocity, DofMap};
use crate::mesh::{Mesh, PointLocator};
use crate::par;

/// Interpolates a P2 velocity from `(old_mesh, old_dofmap)` onto the nodes of
/// `new_dofmap`.
pub fn transfer_p2(old_mesh: &Mesh, old_dofmap: &DofMap, u: &[f64], new_dofmap: &DofMap) -> Result<Vec<f64>, AleError> {
    let locator = PointLocator::new(old_mesh);
    let values = par::map_slice(new_dofmap.node_coords(), |&x| {
        locator
            .locate(old_mesh, x)
            .map(|(c, l)| eval_velocity(old_dofmap, u, c, l))
            .ok_or(AleError::Transfer(x[0], x[1]))
    });
    let mut out = Vec::with_capacity(2 * values.len());
    for v in values {
        out.extend(v?);
    }
    Ok(out)
}

/// Interpolates a vertex field from `old_mesh` onto the vertices of `new_mesh`.
pub fn transfer_p1(old_mesh: &Mesh, values: &[f64], new_mesh: &Mesh) -> Result<Vec<f64>, AleError> {
    let locator = PointLocator::new(old_mesh);
    par::map_slice(new_mesh.vertices(), |&x| {
        locator.locate(old_mesh, x).map(|(c, l)| eval_p1(old_mesh, values, c, l)).ok_or(AleError::Transfer(x[0], x[1]))
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_channel, remesh, Hole};

    #[test]
    fn linear_fields_survive_remesh() {
        let m = generate_channel(2.0, 1.0, &[Hole::circle([0.8, 0.5], 0.2)], 0.12).unwrap();
        let moved: Vec<_> = m.vertices().iter().map(|&[x, y]| [x + 0.03 * (3.0 * y).sin() * x * (2.0 - x), y]).collect();
        let m = m.with_vertices(moved).unwrap();
        let r = remesh(&m).unwrap();
        let (d_old, d_new) = (DofMap::new(&m), DofMap::new(&r));
        let lin = |[x, y]: [f64; 2]| [1.0 + 2.0 * x - y, -0.5 * x + 3.0 * y];
        let u = d_old.interpolate(lin);
        let t = transfer_p2(&m, &d_old, &u, &d_new).unwrap();
        for (n, &x) in d_new.node_coords().iter().enumerate() {
            let e = lin(x);
            assert!((t[2 * n] - e[0]).abs() < 1e-10 && (t[2 * n + 1] - e[1]).abs() < 1e-10);
        }
        let p: Vec<f64> = m.vertices().iter().map(|&[x, y]| 4.0 * x - 2.0 * y + 0.5).collect();
        let tp = transfer_p1(&m, &p, &r).unwrap();
        for (v, &[x, y]) in r.vertices().iter().enumerate() {
            assert!((tp[v] - (4.0 * x - 2.0 * y + 0.5)).abs() < 1e-10);
        }
    }
}

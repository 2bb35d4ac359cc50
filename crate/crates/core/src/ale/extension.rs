use std::collections::BTreeMap;

use super::AleError;
use crate::fem::basis::barycentric_gradients;
use crate::fem::eliminate;
use crate::geom::{self, Point};
use crate::linalg::{relative_residual, CsrMatrix, LinalgError, SparseLu};
use crate::mesh::{BoundaryKind, Mesh};
use crate::par;

const RESIDUAL_TOLERANCE: f64 = 1e-10;

fn stiffness(mesh: &Mesh, tau: &[f64]) -> CsrMatrix {
    let local = par::map_range(mesh.n_cells(), |c| {
        let pts = mesh.cell_points(c);
        let area = geom::triangle_area(pts[0], pts[1], pts[2]);
        let g = barycentric_gradients(&pts);
        let k = 1.0 + tau[c];
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = k * area * geom::dot(g[i], g[j]);
            }
        }
        m
    });
    let mut triplets = Vec::with_capacity(9 * mesh.n_cells());
    for (cell, m) in mesh.cells().iter().zip(&local) {
        for i in 0..3 {
            for j in 0..3 {
                triplets.push((cell[i], cell[j], m[i][j]));
            }
        }
    }
    CsrMatrix::from_triplets(mesh.n_vertices(), mesh.n_vertices(), &triplets)
}

/// P1 solution of `∇·((1 + τ)∇φ) = 0` on `mesh` with `φ` prescribed on every
/// body boundary vertex and zero on the outer boundary.
pub fn solve_extension(mesh: &Mesh, tau: &[f64], boundary: &BTreeMap<usize, Point>) -> Result<Vec<Point>, AleError> {
    let components = mesh.connected_components();
    if components > 1 {
        return Err(AleError::Singular(components));
    }
    let mut fixed: Vec<Option<Point>> = vec![None; mesh.n_vertices()];
    for v in mesh.outer_boundary_vertices() {
        fixed[v] = Some([0.0, 0.0]);
    }
    for (t, tag) in mesh.tags().iter().enumerate() {
        if let BoundaryKind::Swimmer(_) = tag.kind {
            for e in mesh.boundary_edges().iter().filter(|e| e.tag == t) {
                for v in e.vertices {
                    fixed[v] = Some(*boundary.get(&v).ok_or(AleError::MissingBoundary(v))?);
                }
            }
        }
    }
    if fixed.iter().all(|f| f.is_none()) {
        return Ok(vec![[0.0, 0.0]; mesh.n_vertices()]);
    }
    if fixed.iter().flatten().all(|d| d[0] == 0.0 && d[1] == 0.0) {
        return Ok(vec![[0.0, 0.0]; mesh.n_vertices()]);
    }
    let k = stiffness(mesh, tau);
    let zero = vec![0.0; mesh.n_vertices()];
    let component = |c: usize| fixed.iter().map(|f| f.map(|d| d[c])).collect::<Vec<_>>();
    let (a, bx) = eliminate(&k, &zero, &component(0));
    let (_, by) = eliminate(&k, &zero, &component(1));
    let lu = SparseLu::factor(&a)?;
    let mut solutions = lu.solve_many(&[bx.clone(), by.clone()]);
    for (x, b) in solutions.iter_mut().zip([&bx, &by]) {
        if !x.iter().all(|v| v.is_finite()) {
            return Err(LinalgError::NonFinite.into());
        }
        let r = relative_residual(&a, x, b);
        if r > RESIDUAL_TOLERANCE {
            return Err(LinalgError::Residual { residual: r, tolerance: RESIDUAL_TOLERANCE }.into());
        }
    }
    Ok((0..mesh.n_vertices()).map(|v| [solutions[0][v], solutions[1][v]]).collect())
}

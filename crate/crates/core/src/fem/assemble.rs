use serde::{Deserialize, Serialize};

use super::basis::{barycentric_gradients, p2_gradients, p2_values};
use super::quadrature::{interval_gauss3, triangle_degree5};
use super::{DofMap, FemError, NodeClass};
use crate::geom::{self, Point};
use crate::linalg::CsrMatrix;
use crate::mesh::Mesh;
use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluidParams {
    /// Dynamic viscosity.
    pub mu: f64,
    /// Fluid density; zero gives the Stokes equations.
    pub rho: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TimeScheme {
    #[default]
    Bdf1,
    Bdf2,
}

/// Inputs to one assembly of the momentum and continuity equations.
pub struct Assembly<'a> {
    pub params: FluidParams,
    /// Time step; `None` drops the time derivative.
    pub dt: Option<f64>,
    pub scheme: TimeScheme,
    /// Previous velocities on the current nodes, newest first. BDF2 uses two.
    pub history: &'a [Vec<f64>],
    /// Convecting velocity (the latest iterate).
    pub u_conv: Option<&'a [f64]>,
    /// Mesh velocity.
    pub u_ale: Option<&'a [f64]>,
    /// Volume force density.
    pub force: &'a (dyn Fn(Point) -> Point + Sync),
    /// Traction on a Neumann tag.
    pub traction: &'a (dyn Fn(usize, Point) -> Point + Sync),
}

fn zero_force(_: Point) -> Point {
    [0.0, 0.0]
}

fn zero_traction(_: usize, _: Point) -> Point {
    [0.0, 0.0]
}

impl<'a> Assembly<'a> {
    /// Steady Stokes problem without forcing.
    pub fn stokes(mu: f64) -> Self {
        Assembly {
            params: FluidParams { mu, rho: 0.0 },
            dt: None,
            scheme: TimeScheme::Bdf1,
            history: &[],
            u_conv: None,
            u_ale: None,
            force: &zero_force,
            traction: &zero_traction,
        }
    }

    fn time_coefficients(&self) -> Option<(f64, [f64; 2])> {
        let dt = self.dt?;
        if self.params.rho == 0.0 || self.history.is_empty() {
            return None;
        }
        let bdf2 = self.scheme == TimeScheme::Bdf2 && self.history.len() >= 2;
        Some(if bdf2 { (1.5 / dt, [2.0 / dt, -0.5 / dt]) } else { (1.0 / dt, [1.0 / dt, 0.0]) })
    }
}

/// Unconstrained saddle-point system `[[A, Bᵀ], [B, 0]]` over all velocity
/// and pressure dofs, with `B = −∫ q ∇·v`.
#[derive(Clone, Debug)]
pub struct FullSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

/// Block view of a full system split into body-boundary (Γ) velocity dofs
/// and all other velocity dofs (I).
#[derive(Clone, Debug)]
pub struct SystemBlocks {
    pub a_ii: CsrMatrix,
    pub a_ig: CsrMatrix,
    pub a_gi: CsrMatrix,
    pub a_gg: CsrMatrix,
    pub b_i: CsrMatrix,
    pub b_g: CsrMatrix,
    pub g_i: Vec<f64>,
    pub g_g: Vec<f64>,
}

impl FullSystem {
    pub fn blocks(&self, dofmap: &DofMap) -> SystemBlocks {
        let (mut gamma, mut inner) = (Vec::new(), Vec::new());
        for node in 0..dofmap.n_nodes() {
            let target = if matches!(dofmap.node_class(node), NodeClass::Gamma(_)) { &mut gamma } else { &mut inner };
            target.extend([2 * node, 2 * node + 1]);
        }
        let pressure: Vec<usize> = (dofmap.n_velocity()..dofmap.n_total()).collect();
        SystemBlocks {
            a_ii: self.matrix.select(&inner, &inner),
            a_ig: self.matrix.select(&inner, &gamma),
            a_gi: self.matrix.select(&gamma, &inner),
            a_gg: self.matrix.select(&gamma, &gamma),
            b_i: self.matrix.select(&pressure, &inner),
            b_g: self.matrix.select(&pressure, &gamma),
            g_i: inner.iter().map(|&i| self.rhs[i]).collect(),
            g_g: gamma.iter().map(|&i| self.rhs[i]).collect(),
        }
    }
}

struct ElementSystem {
    dofs: [usize; 15],
    matrix: [[f64; 15]; 15],
    rhs: [f64; 15],
}

fn element(mesh: &Mesh, dofmap: &DofMap, input: &Assembly, time: Option<(f64, [f64; 2])>, cell: usize) -> ElementSystem {
    let pts = mesh.cell_points(cell);
    let area = geom::triangle_area(pts[0], pts[1], pts[2]);
    let g = barycentric_gradients(&pts);
    let nodes = dofmap.cell_nodes(cell);
    let verts = mesh.cells()[cell];
    let mut dofs = [0; 15];
    for k in 0..6 {
        dofs[2 * k] = 2 * nodes[k];
        dofs[2 * k + 1] = 2 * nodes[k] + 1;
    }
    for k in 0..3 {
        dofs[12 + k] = dofmap.pressure_dof(verts[k]);
    }
    let mu = input.params.mu;
    let rho = input.params.rho;
    let local = |u: &[f64], k: usize| [u[2 * nodes[k]], u[2 * nodes[k] + 1]];
    let mut m = [[0.0; 15]; 15];
    let mut r = [0.0; 15];
    for (l, w) in triangle_degree5() {
        let w = w * area;
        let n = p2_values(l);
        let dn = p2_gradients(l, &g);
        let x = [
            l[0] * pts[0][0] + l[1] * pts[1][0] + l[2] * pts[2][0],
            l[0] * pts[0][1] + l[1] * pts[1][1] + l[2] * pts[2][1],
        ];
        let at = |u: &[f64]| {
            let mut v = [0.0; 2];
            for k in 0..6 {
                let uk = local(u, k);
                v[0] += n[k] * uk[0];
                v[1] += n[k] * uk[1];
            }
            v
        };
        let mut adv = [0.0; 2];
        if rho != 0.0 {
            if let Some(uc) = input.u_conv {
                adv = at(uc);
            }
            if let Some(ua) = input.u_ale {
                let a = at(ua);
                adv = [adv[0] - a[0], adv[1] - a[1]];
            }
        }
        let mass = time.map_or(0.0, |(a0, _)| rho * a0);
        for a in 0..6 {
            for b in 0..6 {
                let grad = geom::dot(dn[a], dn[b]);
                let diag = mass * n[a] * n[b] + rho * n[a] * geom::dot(adv, dn[b]) + mu * grad;
                for c in 0..2 {
                    for d in 0..2 {
                        let mut v = mu * dn[a][d] * dn[b][c];
                        if c == d {
                            v += diag;
                        }
                        m[2 * a + c][2 * b + d] += w * v;
                    }
                }
            }
            for k in 0..3 {
                for c in 0..2 {
                    let v = -w * l[k] * dn[a][c];
                    m[2 * a + c][12 + k] += v;
                    m[12 + k][2 * a + c] += v;
                }
            }
        }
        let f = (input.force)(x);
        let mut hist = [0.0; 2];
        if let Some((_, coef)) = time {
            for (j, u) in input.history.iter().take(2).enumerate() {
                let v = at(u);
                hist[0] += rho * coef[j] * v[0];
                hist[1] += rho * coef[j] * v[1];
            }
        }
        for a in 0..6 {
            for c in 0..2 {
                r[2 * a + c] += w * n[a] * (f[c] + hist[c]);
            }
        }
    }
    ElementSystem { dofs, matrix: m, rhs: r }
}

/// Assembles the full velocity–pressure system on the current mesh.
pub fn assemble(mesh: &Mesh, dofmap: &DofMap, input: &Assembly) -> Result<FullSystem, FemError> {
    let nv = dofmap.n_velocity();
    for u in input.history.iter().map(|v| v.as_slice()).chain(input.u_conv).chain(input.u_ale) {
        if u.len() != nv {
            return Err(FemError::Dimension(format!("velocity vector of length {} for {nv} dofs", u.len())));
        }
    }
    let time = input.time_coefficients();
    let elements = par::map_range(mesh.n_cells(), |c| element(mesh, dofmap, input, time, c));
    let n = dofmap.n_total();
    let mut triplets = Vec::with_capacity(elements.len() * 15 * 15);
    let mut rhs = vec![0.0; n];
    for (c, e) in elements.iter().enumerate() {
        for i in 0..15 {
            for j in 0..15 {
                let v = e.matrix[i][j];
                if v != 0.0 || i == j {
                    triplets.push((e.dofs[i], e.dofs[j], v));
                }
                if !v.is_finite() {
                    return Err(FemError::NonFinite(c));
                }
            }
            rhs[e.dofs[i]] += e.rhs[i];
        }
    }
    // Traction on outflow edges.
    for edge in dofmap.neumann_edges() {
        let pts = mesh.cell_points(edge.cell);
        let (i, j) = (edge.local_edge, (edge.local_edge + 1) % 3);
        let len = geom::dist(pts[i], pts[j]);
        let nodes = dofmap.cell_nodes(edge.cell);
        for (s, w) in interval_gauss3() {
            let mut l = [0.0; 3];
            l[i] = 1.0 - s;
            l[j] = s;
            let x = [(1.0 - s) * pts[i][0] + s * pts[j][0], (1.0 - s) * pts[i][1] + s * pts[j][1]];
            let g = (input.traction)(edge.tag, x);
            let n = p2_values(l);
            for k in 0..6 {
                rhs[2 * nodes[k]] += w * len * n[k] * g[0];
                rhs[2 * nodes[k] + 1] += w * len * n[k] * g[1];
            }
        }
    }
    if let Some(i) = rhs.iter().position(|v| !v.is_finite()) {
        let cell = (0..mesh.n_cells()).find(|&c| elements[c].dofs.contains(&i)).unwrap_or(0);
        return Err(FemError::NonFinite(cell));
    }
    Ok(FullSystem { matrix: CsrMatrix::from_triplets(n, n, &triplets), rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::structured_rectangle;

    #[test]
    fn stokes_matrix_is_symmetric() {
        let m = structured_rectangle(1.0, 1.0, 3, 3);
        let d = DofMap::new(&m);
        let s = assemble(&m, &d, &Assembly::stokes(1.0)).unwrap();
        assert!(s.matrix.asymmetry() < 1e-12);
    }

    #[test]
    fn constants_are_divergence_free() {
        let m = structured_rectangle(2.0, 1.0, 4, 3);
        let d = DofMap::new(&m);
        let s = assemble(&m, &d, &Assembly::stokes(1.0)).unwrap();
        let u = d.interpolate(|_| [0.7, -1.3]);
        let blocks = s.blocks(&d);
        assert!(blocks.b_g.ncols == 0);
        let bu = blocks.b_i.mul_vec(&u);
        assert!(bu.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn convection_vanishes_when_mesh_follows_flow() {
        let m = structured_rectangle(1.0, 1.0, 3, 3);
        let d = DofMap::new(&m);
        let u = d.interpolate(|[x, y]| [y * y, x - y]);
        let hist = vec![u.clone()];
        let base = Assembly {
            params: FluidParams { mu: 0.5, rho: 2.0 },
            dt: Some(0.1),
            history: &hist,
            ..Assembly::stokes(0.5)
        };
        let with = Assembly { u_conv: Some(&u), u_ale: Some(&u), ..base };
        let a = assemble(&m, &d, &with).unwrap();
        let base = Assembly {
            params: FluidParams { mu: 0.5, rho: 2.0 },
            dt: Some(0.1),
            history: &hist,
            ..Assembly::stokes(0.5)
        };
        let b = assemble(&m, &d, &base).unwrap();
        assert_eq!(a.matrix.values, b.matrix.values);
    }

    #[test]
    fn mass_term_integrates_area() {
        // With u ≡ e_x the BDF1 history load sums to ρ/dt · area.
        let m = structured_rectangle(2.0, 1.0, 3, 2);
        let d = DofMap::new(&m);
        let hist = vec![d.interpolate(|_| [1.0, 0.0])];
        let a = Assembly { params: FluidParams { mu: 1.0, rho: 3.0 }, dt: Some(0.5), history: &hist, ..Assembly::stokes(1.0) };
        let s = assemble(&m, &d, &a).unwrap();
        let fx: f64 = (0..d.n_nodes()).map(|n| s.rhs[2 * n]).sum();
        assert!((fx - 3.0 / 0.5 * 2.0).abs() < 1e-12);
    }
}

use serde::{Deserialize, Serialize};

use super::Mesh;
use crate::geom::{self, Point};
use crate::par;

/// Normalized radius ratio `2·r_in / r_circ` of a triangle.
///
/// Equals 1 for an equilateral triangle and 0 for a degenerate one. Uses
/// `r_in = 2A/P` and `r_circ = abc/(4A)`, so `q = 16A² / (P·abc)`.
pub fn triangle_quality(a: Point, b: Point, c: Point) -> f64 {
    let area = geom::triangle_area(a, b, c).abs();
    let (la, lb, lc) = (geom::dist(b, c), geom::dist(c, a), geom::dist(a, b));
    let prod = la * lb * lc;
    if area == 0.0 || prod == 0.0 {
        return 0.0;
    }
    let q = 16.0 * area * area / ((la + lb + lc) * prod);
    q.clamp(0.0, 1.0)
}

pub fn cell_quality(mesh: &Mesh, cell: usize) -> f64 {
    let [a, b, c] = mesh.cell_points(cell);
    if geom::orient(a, b, c) <= 0.0 {
        return 0.0;
    }
    triangle_quality(a, b, c)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    pub per_cell: Vec<f64>,
    pub min_quality: f64,
    /// Lowest-index cell attaining `min_quality`.
    pub min_cell: usize,
}

pub fn quality_report(mesh: &Mesh) -> QualityReport {
    let per_cell = par::map_range(mesh.n_cells(), |c| cell_quality(mesh, c));
    let (min_cell, min_quality) = per_cell
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, q)| if q < best.1 { (i, q) } else { best });
    QualityReport { per_cell, min_quality, min_cell }
}

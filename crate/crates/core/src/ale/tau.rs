use crate::mesh::Mesh;

/// Per-cell diffusion weight `(1 − V_min/V_max) / (V_e/V_max)` that stiffens
/// small cells in the extension problem.
pub fn compute_tau(mesh: &Mesh) -> Vec<f64> {
    let areas: Vec<f64> = (0..mesh.n_cells()).map(|c| mesh.cell_area(c)).collect();
    let vmin = areas.iter().copied().fold(f64::INFINITY, f64::min);
    let vmax = areas.iter().copied().fold(0.0, f64::max);
    areas.iter().map(|&v| (1.0 - vmin / vmax) / (v / vmax)).collect()
}

use super::Mesh;
use crate::geom::{self, Point};

/// Uniform-grid index of cell bounding boxes for point location.
#[derive(Clone, Debug)]
pub struct PointLocator {
    origin: Point,
    cell_size: [f64; 2],
    dims: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl PointLocator {
    pub fn new(mesh: &Mesh) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in mesh.vertices() {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let n = (mesh.n_cells() as f64).sqrt().ceil().max(1.0);
        let extent = [(hi[0] - lo[0]).max(1e-12), (hi[1] - lo[1]).max(1e-12)];
        let aspect = (extent[0] / extent[1]).sqrt();
        let dims = [((n * aspect).ceil() as usize).max(1), ((n / aspect).ceil() as usize).max(1)];
        let cell_size = [extent[0] / dims[0] as f64, extent[1] / dims[1] as f64];
        let mut loc = PointLocator { origin: lo, cell_size, dims, buckets: vec![Vec::new(); dims[0] * dims[1]] };
        for c in 0..mesh.n_cells() {
            let pts = mesh.cell_points(c);
            let (mut a, mut b) = ([usize::MAX; 2], [0; 2]);
            for p in pts {
                let g = loc.bin(p);
                for k in 0..2 {
                    a[k] = a[k].min(g[k]);
                    b[k] = b[k].max(g[k]);
                }
            }
            for gy in a[1]..=b[1] {
                for gx in a[0]..=b[0] {
                    loc.buckets[gy * dims[0] + gx].push(c);
                }
            }
        }
        loc
    }

    fn bin(&self, p: Point) -> [usize; 2] {
        let mut g = [0; 2];
        for k in 0..2 {
            let t = ((p[k] - self.origin[k]) / self.cell_size[k]).floor();
            g[k] = (t.max(0.0) as usize).min(self.dims[k] - 1);
        }
        g
    }

    /// Cell containing `p` and its barycentric coordinates. Points within a
    /// small tolerance outside the mesh snap to the closest nearby cell;
    /// further points yield `None`.
    pub fn locate(&self, mesh: &Mesh, p: Point) -> Option<(usize, [f64; 3])> {
        let g = self.bin(p);
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for ring in 0..=2usize {
            let (x0, x1) = (g[0].saturating_sub(ring), (g[0] + ring).min(self.dims[0] - 1));
            let (y0, y1) = (g[1].saturating_sub(ring), (g[1] + ring).min(self.dims[1] - 1));
            for gy in y0..=y1 {
                for gx in x0..=x1 {
                    if ring > 0 && gx != x0 && gx != x1 && gy != y0 && gy != y1 {
                        continue;
                    }
                    for &c in &self.buckets[gy * self.dims[0] + gx] {
                        let [a, b, d] = mesh.cell_points(c);
                        let l = geom::barycentric(p, a, b, d);
                        let m = l[0].min(l[1]).min(l[2]);
                        if best.map_or(true, |(bc, _, bm)| m > bm || (m == bm && c < bc)) {
                            best = Some((c, l, m));
                        }
                    }
                }
            }
            if let Some((_, _, m)) = best {
                if m >= -1e-12 {
                    break;
                }
            }
        }
        match best {
            Some((c, l, m)) if m >= -1e-6 => {
                // Project slightly-outside points onto the cell.
                let clamped = l.map(|v| v.max(0.0));
                let s: f64 = clamped.iter().sum();
                Some((c, clamped.map(|v| v / s)))
            }
            _ => None,
        }
    }
}

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geom::{self, Point};
use crate::mesh::Mesh;

/// Distances from a seed set, exact zero on the seeds and saturated at
/// `d_max` outside the band.
#[derive(Clone, Debug, PartialEq)]
pub struct NarrowBandField {
    pub values: Vec<f64>,
    pub d_max: f64,
    /// Vertices in the order they were accepted.
    pub accepted: Vec<usize>,
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on value, then index.
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Value at `c` from known values at `a` and `b` assuming a planar front
/// crossing the triangle; `None` when the upwind direction leaves the
/// triangle.
fn triangle_update(c: Point, a: Point, ta: f64, b: Point, tb: f64) -> Option<f64> {
    let e1 = geom::sub(a, c);
    let e2 = geom::sub(b, c);
    let (g11, g12, g22) = (geom::dot(e1, e1), geom::dot(e1, e2), geom::dot(e2, e2));
    let det = g11 * g22 - g12 * g12;
    if det <= 0.0 {
        return None;
    }
    // Q = inverse Gram matrix.
    let (q11, q12, q22) = (g22 / det, -g12 / det, g11 / det);
    let qa = [q11 * ta + q12 * tb, q12 * ta + q22 * tb];
    let s1 = q11 + 2.0 * q12 + q22;
    let sa = qa[0] + qa[1];
    let aqa = ta * qa[0] + tb * qa[1];
    let disc = sa * sa - s1 * (aqa - 1.0);
    if disc < 0.0 {
        return None;
    }
    let t = (sa + disc.sqrt()) / s1;
    if t < ta.max(tb) {
        return None;
    }
    // Gradient g solves [e1 e2]^T g = (ta − t, tb − t); upwind needs −g
    // inside the cone spanned by e1 and e2, i.e. Q (t − ta, t − tb) ≥ 0.
    let (d1, d2) = (t - ta, t - tb);
    let alpha = q11 * d1 + q12 * d2;
    let beta = q12 * d1 + q22 * d2;
    if alpha >= 0.0 && beta >= 0.0 {
        Some(t)
    } else {
        None
    }
}

/// Eikonal distance from the `seeds` vertices, computed only up to `d_max`.
pub fn fast_march(mesh: &Mesh, seeds: &[usize], d_max: f64) -> NarrowBandField {
    let n = mesh.n_vertices();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (c, cell) in mesh.cells().iter().enumerate() {
        for &v in cell {
            incident[v].push(c);
        }
    }
    let x = mesh.vertices();
    let mut value = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for &s in seeds {
        value[s] = 0.0;
        heap.push(Entry(0.0, s));
    }
    let mut accepted = Vec::new();
    while let Some(Entry(t, v)) = heap.pop() {
        if done[v] || t > value[v] {
            continue;
        }
        if t > d_max {
            break;
        }
        done[v] = true;
        accepted.push(v);
        for &c in &incident[v] {
            let cell = mesh.cells()[c];
            for &w in &cell {
                if done[w] {
                    continue;
                }
                let others: Vec<usize> = cell.iter().copied().filter(|&u| u != w).collect();
                let mut best = value[w];
                for &u in &others {
                    if done[u] {
                        best = best.min(value[u] + geom::dist(x[u], x[w]));
                    }
                }
                let (a, b) = (others[0], others[1]);
                if done[a] && done[b] {
                    if let Some(tt) = triangle_update(x[w], x[a], value[a], x[b], value[b]) {
                        best = best.min(tt);
                    }
                }
                if best < value[w] {
                    value[w] = best;
                    heap.push(Entry(best, w));
                }
            }
        }
    }
    for (v, d) in value.iter_mut().enumerate() {
        if !done[v] || *d > d_max {
            *d = d_max;
        }
    }
    NarrowBandField { values: value, d_max, accepted }
}

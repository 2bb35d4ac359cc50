use std::collections::{BTreeMap, HashSet};

use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};

use super::{BoundaryEdge, BoundaryKind, BoundaryTag, Mesh, MeshError};
use crate::geom::{self, Point};

/// Minimum interior angle requested from Delaunay refinement.
pub(crate) const ANGLE_LIMIT_DEG: f64 = 28.0;
const MIN_HOLE_SEGMENTS: usize = 16;

/// Analytic hole shapes accepted by [`generate_channel`].
#[derive(Clone, Debug, PartialEq)]
pub enum HoleShape {
    Circle { center: Point, radius: f64 },
    /// Ellipse with semi-axes `(a, b)` rotated counter-clockwise by `angle`.
    Ellipse { center: Point, semi_axes: [f64; 2], angle: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hole {
    pub shape: HoleShape,
    /// Number of boundary segments; derived from the target size when `None`.
    pub segments: Option<usize>,
}

impl Hole {
    pub fn circle(center: Point, radius: f64) -> Self {
        Hole { shape: HoleShape::Circle { center, radius }, segments: None }
    }

    pub fn perimeter(&self) -> f64 {
        match self.shape {
            HoleShape::Circle { radius, .. } => 2.0 * std::f64::consts::PI * radius,
            HoleShape::Ellipse { semi_axes: [a, b], .. } => {
                let h = ((a - b) / (a + b)).powi(2);
                std::f64::consts::PI * (a + b) * (1.0 + 3.0 * h / (10.0 + (4.0 - 3.0 * h).sqrt()))
            }
        }
    }

    /// Counter-clockwise polygon with vertices on the exact curve.
    pub fn polygon(&self, target_h: f64) -> Vec<Point> {
        let n = self
            .segments
            .unwrap_or_else(|| ((self.perimeter() / target_h).ceil() as usize).max(MIN_HOLE_SEGMENTS));
        (0..n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                match self.shape {
                    HoleShape::Circle { center, radius } => [center[0] + radius * t.cos(), center[1] + radius * t.sin()],
                    HoleShape::Ellipse { center, semi_axes: [a, b], angle } => {
                        let (x, y) = (a * t.cos(), b * t.sin());
                        let (s, c) = angle.sin_cos();
                        [center[0] + c * x - s * y, center[1] + s * x + c * y]
                    }
                }
            })
            .collect()
    }

    /// Axis-aligned bounding box `[xmin, ymin, xmax, ymax]`.
    fn bounds(&self) -> [f64; 4] {
        match self.shape {
            HoleShape::Circle { center, radius } => {
                [center[0] - radius, center[1] - radius, center[0] + radius, center[1] + radius]
            }
            HoleShape::Ellipse { center, semi_axes: [a, b], angle } => {
                let (s, c) = angle.sin_cos();
                let hx = ((a * c).powi(2) + (b * s).powi(2)).sqrt();
                let hy = ((a * s).powi(2) + (b * c).powi(2)).sqrt();
                [center[0] - hx, center[1] - hy, center[0] + hx, center[1] + hy]
            }
        }
    }
}

/// Outer boundary polygon; side `i` runs from `corners[i]` to `corners[i+1]`
/// and carries `side_tags[i]`. Sides sharing a tag name share one tag.
#[derive(Clone, Debug, PartialEq)]
pub struct OuterBoundary {
    pub corners: Vec<Point>,
    pub side_tags: Vec<BoundaryTag>,
}

impl OuterBoundary {
    pub fn rectangle(length: f64, height: f64) -> Self {
        let tag = |name: &str| BoundaryTag { name: name.into(), kind: BoundaryKind::Wall };
        OuterBoundary {
            corners: vec![[0.0, 0.0], [length, 0.0], [length, height], [0.0, height]],
            side_tags: vec![tag("bottom"), tag("right"), tag("top"), tag("left")],
        }
    }
}

/// Closed polygons bounding one body; a body may consist of several
/// disconnected pieces (e.g. three spheres driven as one swimmer).
#[derive(Clone, Debug, PartialEq)]
pub struct BodyOutline {
    pub loops: Vec<Vec<Point>>,
}

/// Meshes a rectangle `[0, length] × [0, height]` with the given holes.
///
/// Rectangle sides are tagged `bottom`, `right`, `top`, `left` (kind wall);
/// hole `i` is tagged `body{i}` with kind `Swimmer(i)`.
pub fn generate_channel(length: f64, height: f64, holes: &[Hole], target_h: f64) -> Result<Mesh, MeshError> {
    if !(target_h > 0.0) || !target_h.is_finite() {
        return Err(MeshError::Geometry(format!("target size must be positive, got {target_h}")));
    }
    if !(length > 0.0 && height > 0.0) {
        return Err(MeshError::Geometry("channel dimensions must be positive".into()));
    }
    for (i, hole) in holes.iter().enumerate() {
        let [x0, y0, x1, y1] = hole.bounds();
        if !(x0 > 0.0 && y0 > 0.0 && x1 < length && y1 < height) {
            return Err(MeshError::Geometry(format!("hole {i} is not strictly inside the channel")));
        }
    }
    for i in 0..holes.len() {
        for j in (i + 1)..holes.len() {
            if let (HoleShape::Circle { center: a, radius: ra }, HoleShape::Circle { center: b, radius: rb }) =
                (&holes[i].shape, &holes[j].shape)
            {
                if geom::dist(*a, *b) <= ra + rb {
                    return Err(MeshError::Geometry(format!("holes {i} and {j} overlap")));
                }
            }
        }
    }
    let bodies: Vec<BodyOutline> =
        holes.iter().map(|h| BodyOutline { loops: vec![h.polygon(target_h)] }).collect();
    generate_domain(&OuterBoundary::rectangle(length, height), &bodies, target_h)
}

/// Meshes a polygonal domain with body holes. Outer sides are split into
/// segments of length at most `target_h`; body loops are used as given.
pub fn generate_domain(outer: &OuterBoundary, bodies: &[BodyOutline], target_h: f64) -> Result<Mesh, MeshError> {
    if !(target_h > 0.0) || !target_h.is_finite() {
        return Err(MeshError::Geometry(format!("target size must be positive, got {target_h}")));
    }
    let nc = outer.corners.len();
    if nc < 3 || outer.side_tags.len() != nc {
        return Err(MeshError::Geometry("outer boundary needs at least 3 corners and one tag per side".into()));
    }
    if geom::polygon_self_intersects(&outer.corners) {
        return Err(MeshError::Geometry("outer boundary self-intersects".into()));
    }

    let mut tags: Vec<BoundaryTag> = Vec::new();
    let mut tag_of_side = Vec::with_capacity(nc);
    for t in &outer.side_tags {
        let idx = match tags.iter().position(|x| x.name == t.name) {
            Some(i) => i,
            None => {
                tags.push(t.clone());
                tags.len() - 1
            }
        };
        tag_of_side.push(idx);
    }

    let mut points: Vec<Point> = Vec::new();
    let mut segments: Vec<([usize; 2], usize)> = Vec::new();
    // Outer sides.
    let first = points.len();
    for i in 0..nc {
        let (a, b) = (outer.corners[i], outer.corners[(i + 1) % nc]);
        let n = ((geom::dist(a, b) / target_h).ceil() as usize).max(1);
        for k in 0..n {
            let s = k as f64 / n as f64;
            points.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
        }
        let start = points.len() - n;
        for k in 0..n {
            let p = start + k;
            let q = if i == nc - 1 && k == n - 1 { first } else { p + 1 };
            segments.push(([p, q], tag_of_side[i]));
        }
    }
    let outer_poly: Vec<Point> = points.clone();

    // Body loops.
    let mut all_loops: Vec<(usize, Vec<Point>)> = Vec::new();
    for (b, body) in bodies.iter().enumerate() {
        tags.push(BoundaryTag { name: format!("body{b}"), kind: BoundaryKind::Swimmer(b) });
        let tag = tags.len() - 1;
        for lp in &body.loops {
            if lp.len() < 3 || geom::polygon_self_intersects(lp) {
                return Err(MeshError::Geometry(format!("body {b} has a degenerate or self-intersecting loop")));
            }
            for &p in lp {
                if !geom::point_in_polygon(p, &outer_poly) {
                    return Err(MeshError::Geometry(format!("body {b} is not strictly inside the domain")));
                }
            }
            let start = points.len();
            points.extend_from_slice(lp);
            for k in 0..lp.len() {
                segments.push(([start + k, start + (k + 1) % lp.len()], tag));
            }
            all_loops.push((b, lp.clone()));
        }
    }
    // Loops must not touch the outer boundary or each other.
    let outer_segs: Vec<[Point; 2]> = (0..outer_poly.len())
        .map(|k| [outer_poly[k], outer_poly[(k + 1) % outer_poly.len()]])
        .collect();
    for (i, (bi, li)) in all_loops.iter().enumerate() {
        for k in 0..li.len() {
            let (a, b) = (li[k], li[(k + 1) % li.len()]);
            if outer_segs.iter().any(|s| geom::segments_intersect(a, b, s[0], s[1])) {
                return Err(MeshError::Geometry(format!("body {bi} touches the outer boundary")));
            }
        }
        for (bj, lj) in all_loops.iter().skip(i + 1) {
            let touching = (0..li.len()).any(|k| {
                let (a, b) = (li[k], li[(k + 1) % li.len()]);
                (0..lj.len()).any(|m| geom::segments_intersect(a, b, lj[m], lj[(m + 1) % lj.len()]))
            });
            if touching || geom::point_in_polygon(li[0], lj) || geom::point_in_polygon(lj[0], li) {
                return Err(MeshError::Geometry(format!("bodies {bi} and {bj} overlap")));
            }
        }
    }

    let max_area = 3f64.sqrt() / 4.0 * target_h * target_h;
    let (vertices, cells) = triangulate_region(&points, &segments.iter().map(|s| s.0).collect::<Vec<_>>(), max_area)?;
    let boundary_edges = segments.into_iter().map(|(v, tag)| BoundaryEdge { vertices: v, tag }).collect();
    Mesh::new(vertices, cells, boundary_edges, tags)
}

/// Constrained Delaunay triangulation of the region enclosed by the given
/// segments (holes excluded by parity), refined to the angle limit and
/// `max_area` without splitting any input segment. Input points keep their
/// indices; Steiner points are appended.
pub(crate) fn triangulate_region(
    points: &[Point],
    segments: &[[usize; 2]],
    max_area: f64,
) -> Result<(Vec<Point>, Vec<[usize; 3]>), MeshError> {
    let input: Vec<Point2<f64>> = points.iter().map(|p| Point2::new(p[0], p[1])).collect();
    let mut cdt = ConstrainedDelaunayTriangulation::<Point2<f64>>::bulk_load_cdt(input, segments.to_vec())
        .map_err(|e| MeshError::Triangulation(format!("{e:?}")))?;
    if cdt.num_vertices() != points.len() {
        return Err(MeshError::Triangulation("duplicate input vertices".into()));
    }
    let params = RefinementParameters::new()
        .exclude_outer_faces(true)
        .keep_constraint_edges()
        .with_angle_limit(AngleLimit::from_deg(ANGLE_LIMIT_DEG))
        .with_max_allowed_area(max_area)
        .with_max_additional_vertices(20 * points.len() + 4_000_000);
    let result = cdt.refine(params);
    if !result.refinement_complete {
        log::debug!("Delaunay refinement stopped before reaching the angle limit everywhere");
    }
    let excluded: HashSet<_> = result.excluded_faces.iter().copied().collect();
    let mut used = vec![false; cdt.num_vertices()];
    let mut raw_cells = Vec::new();
    for face in cdt.inner_faces() {
        if excluded.contains(&face.fix()) {
            continue;
        }
        let vs = face.vertices().map(|v| v.fix().index());
        for &v in &vs {
            used[v] = true;
        }
        raw_cells.push(vs);
    }
    let all: Vec<Point> = cdt.vertices().map(|v| [v.position().x, v.position().y]).collect();
    // Input vertices are always kept so boundary indices stay stable.
    for u in used.iter_mut().take(points.len()) {
        *u = true;
    }
    let mut remap = BTreeMap::new();
    let mut vertices = Vec::new();
    for (i, p) in all.iter().enumerate() {
        if used[i] {
            remap.insert(i, vertices.len());
            vertices.push(*p);
        }
    }
    let mut cells: Vec<[usize; 3]> = raw_cells.into_iter().map(|c| c.map(|v| remap[&v])).collect();
    for c in &mut cells {
        if geom::orient(vertices[c[0]], vertices[c[1]], vertices[c[2]]) < 0.0 {
            c.swap(1, 2);
        }
    }
    Ok((vertices, cells))
}

/// Structured `nx × ny` rectangle split along alternating diagonals. Sides
/// are tagged like [`generate_channel`].
pub fn structured_rectangle(length: f64, height: f64, nx: usize, ny: usize) -> Mesh {
    let idx = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([length * i as f64 / nx as f64, height * j as f64 / ny as f64]);
        }
    }
    let mut cells = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            if (i + j) % 2 == 0 {
                cells.push([a, b, c]);
                cells.push([a, c, d]);
            } else {
                cells.push([a, b, d]);
                cells.push([b, c, d]);
            }
        }
    }
    let tag = |name: &str| BoundaryTag { name: name.into(), kind: BoundaryKind::Wall };
    let tags = vec![tag("bottom"), tag("right"), tag("top"), tag("left")];
    let mut be = Vec::new();
    for i in 0..nx {
        be.push(BoundaryEdge { vertices: [idx(i, 0), idx(i + 1, 0)], tag: 0 });
        be.push(BoundaryEdge { vertices: [idx(i + 1, ny), idx(i, ny)], tag: 2 });
    }
    for j in 0..ny {
        be.push(BoundaryEdge { vertices: [idx(nx, j), idx(nx, j + 1)], tag: 1 });
        be.push(BoundaryEdge { vertices: [idx(0, j + 1), idx(0, j)], tag: 3 });
    }
    Mesh::new(vertices, cells, be, tags).expect("structured mesh is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::quality_report;

    #[test]
    fn empty_channel_is_fine_enough() {
        let m = generate_channel(4.0, 1.0, &[], 0.25).unwrap();
        assert!(m.n_cells() >= 2 * 16 * 4, "only {} cells", m.n_cells());
        let q = quality_report(&m);
        assert!(q.min_quality > 0.3, "min quality {}", q.min_quality);
        assert!((m.total_area() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn disk_hole_is_tagged_loop() {
        let m = generate_channel(4.0, 1.0, &[Hole::circle([1.0, 0.5], 0.2)], 0.1).unwrap();
        let loops = m.swimmer_loops(0);
        assert_eq!(loops.len(), 1);
        let pts: Vec<Point> = loops[0].iter().map(|&v| m.vertices()[v]).collect();
        let perimeter = geom::polygon_perimeter(&pts);
        let exact = 2.0 * std::f64::consts::PI * 0.2;
        assert!((perimeter - exact).abs() / exact < 0.02);
        assert_eq!(m.tags()[m.tag_index("body0").unwrap()].kind, BoundaryKind::Swimmer(0));
    }

    #[test]
    fn touching_hole_rejected() {
        assert!(generate_channel(4.0, 1.0, &[Hole::circle([1.0, 0.8], 0.2)], 0.1).is_err());
        assert!(generate_channel(4.0, 1.0, &[Hole::circle([1.0, 0.5], 0.2), Hole::circle([1.3, 0.5], 0.2)], 0.1).is_err());
        assert!(generate_channel(4.0, 1.0, &[], 0.0).is_err());
    }

    #[test]
    fn structured_counts() {
        let m = structured_rectangle(1.0, 1.0, 4, 4);
        assert_eq!(m.n_cells(), 32);
        assert_eq!(m.boundary_edges().len(), 16);
    }
}

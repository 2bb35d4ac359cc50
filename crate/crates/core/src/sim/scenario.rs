//! Scenario files: a TOML description of the domain, fluid, bodies,
//! boundary data, collisions, time grid and output.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::expr::Expr;
use crate::ale::DEFAULT_QUALITY_THRESHOLD;
use crate::collision::CollisionParams;
use crate::fem::TimeScheme;
use crate::gaits::Gait;
use crate::geom::{self, Point};
use crate::mesh::{
    generate_domain, load_msh, BodyOutline, BoundaryKind, BoundaryTag, Hole, HoleShape, Mesh, MeshError,
    OuterBoundary,
};
use crate::rigid_body::body_to_lab;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("mesh: {0}")]
    Mesh(#[from] MeshError),
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid { field: field.into(), message: message.into() }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    pub mesh: MeshSpec,
    pub fluid: FluidSpec,
    #[serde(default)]
    pub boundary: Vec<BoundarySpec>,
    #[serde(default)]
    pub body: Vec<BodySpec>,
    #[serde(default)]
    pub collision: Option<CollisionSpec>,
    pub time: TimeSpec,
    #[serde(default)]
    pub ale: AleSpec,
    #[serde(default)]
    pub output: OutputSpec,
    /// Directory against which relative mesh paths are resolved.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MeshSpec {
    /// Rectangle `[0, length] × [0, height]` with sides `bottom`, `right`,
    /// `top`, `left`.
    Channel { length: f64, height: f64, h: f64 },
    /// Y-shaped channel of unit width: a horizontal inlet of length 3 that
    /// splits into two branches at ±45°. Sides are tagged `inflow`, `wall`,
    /// `outflow_lower` and `outflow_upper`.
    Branched { h: f64 },
    /// Gmsh 2.2 ASCII file; bodies use `shape = { type = "mesh" }`.
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluidSpec {
    pub mu: f64,
    #[serde(default)]
    pub rho: f64,
    /// Volume force density `f(t, x, y)`.
    #[serde(default)]
    pub force: Option<[Expr; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub tag: String,
    #[serde(flatten)]
    pub condition: BoundaryCondition,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BoundaryCondition {
    NoSlip,
    /// Prescribed velocity `h(t, x, y)`.
    Dirichlet { value: [Expr; 2] },
    /// Prescribed traction `g(t, x, y)`.
    Neumann { value: [Expr; 2] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ShapeSpec {
    Disk { center: Point, radius: f64 },
    /// Ellipse whose first semi-axis lies along the body x axis.
    Ellipse { center: Point, semi_axes: [f64; 2] },
    /// Three disks on the body x axis; radius and spacing come from the
    /// three-sphere gait. `center` is the central sphere.
    ThreeSphere { center: Point },
    /// Elliptic head centered at `head_center` with a rounded tail band of
    /// the given length and thickness along the body +x axis, starting at
    /// the rear of the head.
    Sperm { head_center: Point, head_semi_axes: [f64; 2], tail_length: f64, tail_thickness: f64 },
    /// Boundary loops taken from the mesh file.
    Mesh,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BodySpec {
    pub shape: ShapeSpec,
    #[serde(default = "one")]
    pub density: f64,
    #[serde(default)]
    pub gait: Gait,
    /// Initial orientation, counter-clockwise.
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub velocity: Point,
    #[serde(default)]
    pub omega: f64,
    /// Constant external force (e.g. weight minus buoyancy).
    #[serde(default)]
    pub force: Point,
    /// Boundary segment length; half the mesh size when absent.
    #[serde(default)]
    pub h: Option<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollisionSpec {
    pub w_col: f64,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub eps_wall: Option<f64>,
    #[serde(default)]
    pub d_max: Option<f64>,
    /// Velocity scale of the default stiffness.
    #[serde(default = "one")]
    pub u_ref: f64,
}

impl CollisionSpec {
    pub fn params(&self, mu: f64) -> CollisionParams {
        let mut p = CollisionParams::scaled(self.w_col, mu, self.u_ref);
        if let Some(e) = self.eps {
            p.eps = e;
        }
        if let Some(e) = self.eps_wall {
            p.eps_wall = e;
        }
        if let Some(d) = self.d_max {
            p.d_max = d;
        }
        p
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub t_final: f64,
    pub dt: f64,
    #[serde(default)]
    pub scheme: TimeScheme,
}

impl TimeSpec {
    pub fn n_steps(&self) -> usize {
        ((self.t_final / self.dt) - 1e-9).ceil().max(0.0) as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AleSpec {
    pub quality_threshold: f64,
    pub fixed_point_iterations: usize,
    /// Position change below which the fixed point stops early.
    pub fixed_point_tol: f64,
    pub picard_max: usize,
    pub picard_tol: f64,
    /// Fail instead of warning when an iteration does not converge.
    pub abort_on_nonconvergence: bool,
}

impl Default for AleSpec {
    fn default() -> Self {
        AleSpec {
            quality_threshold: DEFAULT_QUALITY_THRESHOLD,
            fixed_point_iterations: 3,
            fixed_point_tol: 1e-10,
            picard_max: 25,
            picard_tol: 1e-8,
            abort_on_nonconvergence: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    /// Steps between VTU snapshots; 0 keeps only the initial and final ones.
    pub vtu_every: usize,
    /// Steps between checkpoints; 0 writes one at the end only.
    pub checkpoint_every: usize,
    pub distance_fields: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { vtu_every: 10, checkpoint_every: 0, distance_fields: false }
    }
}

/// Mesh plus, for each body, the frame origin it was built around.
#[derive(Clone, Debug)]
pub struct Domain {
    pub mesh: Mesh,
    pub anchors: Vec<Point>,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self, ScenarioError> {
        let de = toml::Deserializer::new(text);
        let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            ScenarioError::Schema { path, message: e.into_inner().message().trim().to_string() }
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> Result<Self, ScenarioError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.to_path_buf(), source })?;
        let mut s = Self::from_toml(&text)?;
        s.base_dir = path.parent().map(Path::to_path_buf);
        Ok(s)
    }

    /// Checks everything that does not need the mesh.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !(self.fluid.mu > 0.0) {
            return Err(invalid("fluid.mu", "viscosity must be positive"));
        }
        if !(self.fluid.rho >= 0.0) {
            return Err(invalid("fluid.rho", "density must be non-negative"));
        }
        if !(self.time.dt > 0.0) || !self.time.dt.is_finite() {
            return Err(invalid("time.dt", "must be positive"));
        }
        if !(self.time.t_final == 0.0 || self.time.t_final >= self.time.dt) || !self.time.t_final.is_finite() {
            return Err(invalid("time.t_final", "must be zero or at least dt"));
        }
        match &self.mesh {
            MeshSpec::Channel { length, height, h } => {
                if !(*length > 0.0 && *height > 0.0 && *h > 0.0) {
                    return Err(invalid("mesh", "channel length, height and h must be positive"));
                }
            }
            MeshSpec::Branched { h } => {
                if !(*h > 0.0) {
                    return Err(invalid("mesh.h", "must be positive"));
                }
            }
            MeshSpec::File { .. } => {}
        }
        for (i, b) in self.body.iter().enumerate() {
            let field = |f: &str| format!("body[{i}].{f}");
            b.gait.validate().map_err(|e| invalid(field("gait"), e.to_string()))?;
            if !(b.density >= 0.0) {
                return Err(invalid(field("density"), "must be non-negative"));
            }
            if let Some(h) = b.h {
                if !(h > 0.0) {
                    return Err(invalid(field("h"), "must be positive"));
                }
            }
            let from_file = matches!(self.mesh, MeshSpec::File { .. });
            match (&b.shape, from_file) {
                (ShapeSpec::Mesh, false) => {
                    return Err(invalid(field("shape"), "shape `mesh` needs a mesh file"));
                }
                (ShapeSpec::Mesh, true) => {}
                (_, true) => return Err(invalid(field("shape"), "bodies of a mesh file must use shape `mesh`")),
                (ShapeSpec::Disk { radius, .. }, _) if !(*radius > 0.0) => {
                    return Err(invalid(field("shape.radius"), "must be positive"));
                }
                (ShapeSpec::Ellipse { semi_axes, .. }, _) if !(semi_axes[0] > 0.0 && semi_axes[1] > 0.0) => {
                    return Err(invalid(field("shape.semi_axes"), "must be positive"));
                }
                (ShapeSpec::ThreeSphere { .. }, _) if !matches!(b.gait, Gait::ThreeSphere(_)) => {
                    return Err(invalid(field("shape"), "shape `three_sphere` needs a three_sphere gait"));
                }
                (ShapeSpec::Sperm { head_semi_axes: [a, bb], tail_length, tail_thickness, .. }, _) => {
                    if !(*a > 0.0 && *bb > 0.0 && *tail_length > 0.0 && *tail_thickness > 0.0) {
                        return Err(invalid(field("shape"), "sperm dimensions must be positive"));
                    }
                    if *tail_thickness >= 2.0 * bb {
                        return Err(invalid(field("shape.tail_thickness"), "must be thinner than the head"));
                    }
                    if let Gait::SpermWave(g) = &b.gait {
                        if (g.junction - a).abs() > 1e-12 || (g.length - tail_length).abs() > 1e-12 {
                            return Err(invalid(
                                field("gait"),
                                "junction and length must equal the head semi-axis and tail length",
                            ));
                        }
                    }
                }
                _ => {}
            }
        }
        if let Some(c) = &self.collision {
            if !(c.w_col > 0.0) {
                return Err(invalid("collision.w_col", "must be positive"));
            }
            let p = c.params(self.fluid.mu);
            if !(p.eps >= 0.0 && p.eps_wall >= 0.0 && p.d_max >= p.w_col) {
                return Err(invalid("collision", "stiffness must be non-negative and d_max at least w_col"));
            }
        }
        let a = &self.ale;
        if !(a.quality_threshold > 0.0 && a.quality_threshold < 1.0) {
            return Err(invalid("ale.quality_threshold", "must lie in (0, 1)"));
        }
        if a.fixed_point_iterations == 0 || a.picard_max == 0 {
            return Err(invalid("ale", "iteration counts must be at least 1"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for (i, b) in self.boundary.iter().enumerate() {
            if !seen.insert(b.tag.as_str()) {
                return Err(invalid(format!("boundary[{i}].tag"), format!("tag `{}` listed twice", b.tag)));
            }
        }
        Ok(())
    }

    fn mesh_h(&self) -> Option<f64> {
        match self.mesh {
            MeshSpec::Channel { h, .. } | MeshSpec::Branched { h } => Some(h),
            MeshSpec::File { .. } => None,
        }
    }

    /// Generates or loads the mesh, applies the boundary table and checks
    /// that every swimmer tag has a body.
    pub fn build_domain(&self) -> Result<Domain, ScenarioError> {
        let (mut mesh, anchors) = match &self.mesh {
            MeshSpec::File { path } => {
                let path = match &self.base_dir {
                    Some(d) if path.is_relative() => d.join(path),
                    _ => path.clone(),
                };
                let mesh = load_msh(&path)?;
                let n = mesh.n_swimmer_tags();
                if n != self.body.len() {
                    return Err(invalid("body", format!("mesh has {n} swimmer tags but {} bodies", self.body.len())));
                }
                let anchors = (0..n)
                    .map(|b| {
                        let loops: Vec<Vec<Point>> = mesh
                            .swimmer_loops(b)
                            .iter()
                            .map(|l| l.iter().map(|&v| mesh.vertices()[v]).collect())
                            .collect();
                        area_centroid(&loops)
                    })
                    .collect();
                (mesh, anchors)
            }
            _ => {
                let h = self.mesh_h().unwrap();
                let outer = match self.mesh {
                    MeshSpec::Channel { length, height, .. } => OuterBoundary::rectangle(length, height),
                    _ => branched_channel(),
                };
                let mut outlines = Vec::new();
                let mut anchors = Vec::new();
                for (i, b) in self.body.iter().enumerate() {
                    let (anchor, loops) = body_outline(b, b.h.unwrap_or(0.5 * h))
                        .map_err(|m| invalid(format!("body[{i}].shape"), m))?;
                    anchors.push(anchor);
                    outlines.push(BodyOutline { loops });
                }
                (generate_domain(&outer, &outlines, h)?, anchors)
            }
        };
        for (i, b) in self.boundary.iter().enumerate() {
            let tag = mesh
                .tag_index(&b.tag)
                .ok_or_else(|| invalid(format!("boundary[{i}].tag"), format!("no boundary tag named `{}`", b.tag)))?;
            if let BoundaryKind::Swimmer(_) = mesh.tags()[tag].kind {
                return Err(invalid(format!("boundary[{i}].tag"), "body boundaries take no boundary condition"));
            }
            let kind = match b.condition {
                BoundaryCondition::NoSlip => BoundaryKind::Wall,
                BoundaryCondition::Dirichlet { .. } => BoundaryKind::Inflow,
                BoundaryCondition::Neumann { .. } => BoundaryKind::Outflow,
            };
            mesh.set_tag_kind(tag, kind);
        }
        Ok(Domain { mesh, anchors })
    }

    /// Dirichlet expression of a tag, if one was given.
    pub fn dirichlet(&self, tag_name: &str) -> Option<&[Expr; 2]> {
        self.boundary.iter().find(|b| b.tag == tag_name).and_then(|b| match &b.condition {
            BoundaryCondition::Dirichlet { value } => Some(value),
            _ => None,
        })
    }

    /// Neumann expression of a tag, if one was given.
    pub fn neumann(&self, tag_name: &str) -> Option<&[Expr; 2]> {
        self.boundary.iter().find(|b| b.tag == tag_name).and_then(|b| match &b.condition {
            BoundaryCondition::Neumann { value } => Some(value),
            _ => None,
        })
    }

    pub fn collision_params(&self) -> Option<CollisionParams> {
        self.collision.as_ref().map(|c| c.params(self.fluid.mu))
    }
}

fn area_centroid(loops: &[Vec<Point>]) -> Point {
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for l in loops {
        for k in 0..l.len() {
            let (p, q) = (l[k], l[(k + 1) % l.len()]);
            let w = geom::cross(p, q);
            a += w;
            cx += (p[0] + q[0]) * w;
            cy += (p[1] + q[1]) * w;
        }
    }
    [cx / (3.0 * a), cy / (3.0 * a)]
}

/// Outer boundary of the branched channel.
pub fn branched_channel() -> OuterBoundary {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let corners = vec![
        [0.0, 0.0],
        [3.0, 0.0],
        [5.0, -2.0],
        [5.0 + s, -2.0 + s],
        [3.0 + 2.0 * s - 0.5, 0.5],
        [5.0 + s, 3.0 - s],
        [5.0, 3.0],
        [3.0, 1.0],
        [0.0, 1.0],
    ];
    let tag = |name: &str, kind| BoundaryTag { name: name.into(), kind };
    let wall = || tag("wall", BoundaryKind::Wall);
    OuterBoundary {
        corners,
        side_tags: vec![
            wall(),
            wall(),
            tag("outflow_lower", BoundaryKind::Outflow),
            wall(),
            wall(),
            tag("outflow_upper", BoundaryKind::Outflow),
            wall(),
            wall(),
            tag("inflow", BoundaryKind::Inflow),
        ],
    }
}

/// Body-frame boundary loops of a shape and the lab-frame frame origin.
fn body_outline(b: &BodySpec, h: f64) -> Result<(Point, Vec<Vec<Point>>), String> {
    let (anchor, loops): (Point, Vec<Vec<Point>>) = match &b.shape {
        ShapeSpec::Disk { center, radius } => (*center, vec![Hole::circle([0.0, 0.0], *radius).polygon(h)]),
        ShapeSpec::Ellipse { center, semi_axes } => {
            let hole = Hole { shape: HoleShape::Ellipse { center: [0.0, 0.0], semi_axes: *semi_axes, angle: 0.0 }, segments: None };
            (*center, vec![hole.polygon(h)])
        }
        ShapeSpec::ThreeSphere { center } => {
            let Gait::ThreeSphere(g) = &b.gait else {
                return Err("shape `three_sphere` needs a three_sphere gait".into());
            };
            (*center, g.rest_centers().iter().map(|&c| Hole::circle(c, g.radius).polygon(h)).collect())
        }
        ShapeSpec::Sperm { head_center, head_semi_axes, tail_length, tail_thickness } => {
            (*head_center, vec![sperm_outline(*head_semi_axes, *tail_length, *tail_thickness, h)])
        }
        ShapeSpec::Mesh => return Err("shape `mesh` needs a mesh file".into()),
    };
    let lab = loops
        .into_iter()
        .map(|l| l.into_iter().map(|p| geom::add(anchor, body_to_lab(b.theta, p))).collect())
        .collect();
    Ok((anchor, lab))
}

/// Counter-clockwise outline of an elliptic head at the origin joined to a
/// tail band along +x whose far end is a half disk.
pub fn sperm_outline(head: [f64; 2], tail_length: f64, thickness: f64, h: f64) -> Vec<Point> {
    let [a, b] = head;
    let half = 0.5 * thickness;
    let phi0 = (half / b).asin();
    let x0 = a * phi0.cos();
    let x_end = a + tail_length;
    let mut pts = Vec::new();
    let sweep = 2.0 * PI - 2.0 * phi0;
    let arc = Hole { shape: HoleShape::Ellipse { center: [0.0, 0.0], semi_axes: head, angle: 0.0 }, segments: None }
        .perimeter()
        * sweep
        / (2.0 * PI);
    let n_arc = ((arc / h).ceil() as usize).max(16);
    for k in 0..=n_arc {
        let phi = phi0 + sweep * k as f64 / n_arc as f64;
        pts.push([a * phi.cos(), b * phi.sin()]);
    }
    let n_side = ((x_end - x0) / h).ceil().max(1.0) as usize;
    for k in 1..=n_side {
        pts.push([x0 + (x_end - x0) * k as f64 / n_side as f64, -half]);
    }
    let n_cap = ((PI * half / h).ceil() as usize).max(4);
    for k in 1..=n_cap {
        let phi = -0.5 * PI + PI * k as f64 / n_cap as f64;
        pts.push([x_end + half * phi.cos(), half * phi.sin()]);
    }
    for k in 1..n_side {
        pts.push([x_end - (x_end - x0) * k as f64 / n_side as f64, half]);
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [mesh]
        type = "channel"
        length = 4.0
        height = 2.0
        h = 0.25

        [fluid]
        mu = 1.0

        [[body]]
        shape = { type = "disk", center = [2.0, 1.0], radius = 0.3 }

        [time]
        t_final = 0.1
        dt = 0.05
    "#;

    #[test]
    fn minimal_scenario_parses_with_defaults() {
        let s = Scenario::from_toml(MINIMAL).unwrap();
        assert_eq!(s.body[0].gait, Gait::Passive);
        assert_eq!(s.body[0].density, 1.0);
        assert_eq!(s.ale.fixed_point_iterations, 3);
        assert_eq!(s.time.n_steps(), 2);
        let d = s.build_domain().unwrap();
        assert_eq!(d.mesh.n_swimmer_tags(), 1);
        assert_eq!(d.anchors, vec![[2.0, 1.0]]);
    }

    #[test]
    fn schema_error_names_the_field() {
        let text = MINIMAL.replace("dt = 0.05", "dt = \"fast\"");
        match Scenario::from_toml(&text) {
            Err(ScenarioError::Schema { path, .. }) => assert_eq!(path, "time.dt"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn expression_error_reports_position() {
        let text = MINIMAL.replace(
            "[time]",
            "[[boundary]]\ntag = \"left\"\ntype = \"dirichlet\"\nvalue = [\"1 + * y\", \"0\"]\n[time]",
        );
        let err = Scenario::from_toml(&text).unwrap_err().to_string();
        assert!(err.contains("boundary[0]"), "{err}");
        assert!(err.contains("position 4"), "{err}");
    }

    #[test]
    fn non_positive_dt_rejected() {
        let text = MINIMAL.replace("dt = 0.05", "dt = 0.0");
        assert!(matches!(Scenario::from_toml(&text), Err(ScenarioError::Invalid { .. })));
    }

    #[test]
    fn unknown_tag_rejected() {
        let text = MINIMAL.replace("[time]", "[[boundary]]\ntag = \"inlet\"\ntype = \"no_slip\"\n[time]");
        let s = Scenario::from_toml(&text).unwrap();
        assert!(matches!(s.build_domain(), Err(ScenarioError::Invalid { .. })));
    }

    #[test]
    fn missing_body_for_swimmer_tag_rejected() {
        let msh = "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$PhysicalNames\n2\n1 1 \"wall\"\n1 2 \"body0\"\n$EndPhysicalNames\n\
$Nodes\n8\n1 0 0 0\n2 3 0 0\n3 3 3 0\n4 0 3 0\n5 1 1 0\n6 2 1 0\n7 2 2 0\n8 1 2 0\n$EndNodes\n\
$Elements\n16\n1 1 2 1 1 1 2\n2 1 2 1 1 2 3\n3 1 2 1 1 3 4\n4 1 2 1 1 4 1\n5 1 2 2 2 5 6\n6 1 2 2 2 6 7\n7 1 2 2 2 7 8\n8 1 2 2 2 8 5\n\
9 2 2 0 1 1 2 6\n10 2 2 0 1 1 6 5\n11 2 2 0 1 2 3 7\n12 2 2 0 1 2 7 6\n13 2 2 0 1 3 4 8\n14 2 2 0 1 3 8 7\n15 2 2 0 1 4 1 5\n16 2 2 0 1 4 5 8\n$EndElements\n";
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("box.msh"), msh).unwrap();
        let text = r#"
            [mesh]
            type = "file"
            path = "box.msh"
            [fluid]
            mu = 1.0
            [time]
            t_final = 0.1
            dt = 0.1
        "#;
        let mut s = Scenario::from_toml(text).unwrap();
        s.base_dir = Some(dir.path().to_path_buf());
        match s.build_domain() {
            Err(ScenarioError::Invalid { field, .. }) => assert_eq!(field, "body"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn branched_channel_has_unit_width_branches() {
        let o = branched_channel();
        let c = &o.corners;
        assert!(geom::polygon_area(c) > 0.0);
        let width = |p: Point, a: Point, b: Point| geom::cross(geom::sub(b, a), geom::sub(p, a)).abs() / geom::dist(a, b);
        assert!((width(c[4], c[1], c[2]) - 1.0).abs() < 1e-12);
        assert!((width(c[4], c[7], c[6]) - 1.0).abs() < 1e-12);
        assert!((geom::dist(c[2], c[3]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sperm_outline_is_simple_and_ccw() {
        let p = sperm_outline([0.1, 0.06], 1.0, 0.02, 0.01);
        assert!(geom::polygon_area(&p) > 0.0);
        assert!(!geom::polygon_self_intersects(&p));
        let xmax = p.iter().map(|q| q[0]).fold(f64::MIN, f64::max);
        assert!((xmax - 1.11).abs() < 1e-12);
    }
}

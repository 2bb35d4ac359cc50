//! Rigid-body state, planar kinematics, mass properties and the coupled
//! fluid–body system.
//!
//! Angles and angular velocities are counter-clockwise positive.
//! [`rotation_matrix`] returns `[[cos θ, sin θ], [−sin θ, cos θ]]`, which
//! rotates clockwise by `θ`; body-frame vectors are therefore mapped to the
//! lab frame by its transpose ([`body_to_lab`]).

mod coupled;
mod projection;

pub use coupled::{assemble_coupled, solve_coupled, CoupledInput, CoupledSolution, ReducedSystem};
pub use projection::{build_projection, Projection};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fem::FemError;
use crate::gaits::Gait;
use crate::geom::{self, Point};
use crate::linalg::LinalgError;

#[derive(Debug, Error)]
pub enum RigidBodyError {
    #[error("boundary node {node} belongs to body {body}, which does not exist")]
    UnownedGamma { node: usize, body: usize },
    #[error("body polygon self-intersects")]
    SelfIntersecting,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

pub fn rotation_matrix(theta: f64) -> [[f64; 2]; 2] {
    let (s, c) = theta.sin_cos();
    [[c, s], [-s, c]]
}

/// Maps a body-frame vector to the lab frame for orientation `theta`.
pub fn body_to_lab(theta: f64, v: Point) -> Point {
    let r = rotation_matrix(theta);
    [r[0][0] * v[0] + r[1][0] * v[1], r[0][1] * v[0] + r[1][1] * v[1]]
}

/// Inverse of [`body_to_lab`].
pub fn lab_to_body(theta: f64, v: Point) -> Point {
    let r = rotation_matrix(theta);
    [r[0][0] * v[0] + r[0][1] * v[1], r[1][0] * v[0] + r[1][1] * v[1]]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MassProperties {
    pub area: f64,
    pub mass: f64,
    /// Polar moment about the centroid.
    pub inertia: f64,
    pub centroid: Point,
}

/// Area, mass, centroid and polar inertia of a uniform body bounded by one
/// or more simple counter-clockwise polygons.
pub fn compute_mass_inertia(loops: &[Vec<Point>], density: f64) -> Result<MassProperties, RigidBodyError> {
    let (mut area, mut cx, mut cy, mut j0) = (0.0, 0.0, 0.0, 0.0);
    for poly in loops {
        if geom::polygon_self_intersects(poly) {
            return Err(RigidBodyError::SelfIntersecting);
        }
        let n = poly.len();
        for i in 0..n {
            let (p, q) = (poly[i], poly[(i + 1) % n]);
            let c = geom::cross(p, q);
            area += 0.5 * c;
            cx += (p[0] + q[0]) * c / 6.0;
            cy += (p[1] + q[1]) * c / 6.0;
            j0 += c * (p[0] * p[0] + p[0] * q[0] + q[0] * q[0] + p[1] * p[1] + p[1] * q[1] + q[1] * q[1]) / 12.0;
        }
    }
    let centroid = [cx / area, cy / area];
    let inertia = density * (j0 - area * geom::dot(centroid, centroid));
    Ok(MassProperties { area, mass: density * area, inertia, centroid })
}

/// A swimmer or passive particle.
///
/// The body frame has its origin at `x_cm` and is rotated by `theta`.
/// `labels` are the body-frame positions of the boundary vertices in the
/// initial configuration and identify material points for the gait; `shape`
/// holds their current body-frame positions; `vertices` their mesh indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Body {
    pub id: usize,
    pub density: f64,
    pub mass: f64,
    pub inertia: f64,
    pub x_cm: Point,
    pub x_cm_ref: Point,
    pub theta: f64,
    pub ell: Point,
    pub omega: f64,
    pub gait: Gait,
    pub vertices: Vec<usize>,
    pub labels: Vec<Point>,
    pub shape: Vec<Point>,
}

impl Body {
    /// Builds a body at rest from its mesh boundary vertices. Mass and
    /// inertia are taken about the frame origin `x_cm`.
    pub fn new(
        id: usize,
        density: f64,
        gait: Gait,
        x_cm: Point,
        theta: f64,
        vertices: Vec<usize>,
        positions: &[Point],
        loops: &[Vec<Point>],
    ) -> Result<Self, RigidBodyError> {
        let props = compute_mass_inertia(loops, density)?;
        let offset = geom::sub(props.centroid, x_cm);
        let inertia = props.inertia + props.mass * geom::dot(offset, offset);
        let labels: Vec<Point> = positions.iter().map(|&x| lab_to_body(theta, geom::sub(x, x_cm))).collect();
        Ok(Body {
            id,
            density,
            mass: props.mass,
            inertia,
            x_cm,
            x_cm_ref: x_cm,
            theta,
            ell: [0.0, 0.0],
            omega: 0.0,
            gait,
            vertices,
            shape: labels.clone(),
            labels,
        })
    }

    /// Lab-frame position of boundary label `k`.
    pub fn position(&self, k: usize) -> Point {
        geom::add(self.x_cm, body_to_lab(self.theta, self.shape[k]))
    }

    /// Rigid velocity at a lab-frame point.
    pub fn rigid_velocity(&self, x: Point) -> Point {
        geom::add(self.ell, geom::scale(geom::perp(geom::sub(x, self.x_cm)), self.omega))
    }

    /// Lab-frame deformation velocity of label `k` at time `t`.
    pub fn deformation_velocity(&self, t: f64, k: usize) -> Point {
        body_to_lab(self.theta, self.gait.deformation_velocity(t, self.labels[k]))
    }

    /// Advances position and orientation with the current velocities and the
    /// shape with the gait evaluated at the midpoint of the step.
    pub fn advance(&mut self, t: f64, dt: f64) {
        self.advance_with(t, dt, self.ell, self.omega);
    }

    /// Like [`Body::advance`] with explicitly given frame velocities.
    pub fn advance_with(&mut self, t: f64, dt: f64, ell: Point, omega: f64) {
        self.x_cm = geom::add(self.x_cm, geom::scale(ell, dt));
        self.theta = geom::wrap_angle(self.theta + dt * omega);
        if self.gait.deforms_boundary() {
            let tm = t + 0.5 * dt;
            for k in 0..self.shape.len() {
                let v = self.gait.deformation_velocity(tm, self.labels[k]);
                self.shape[k] = geom::add(self.shape[k], geom::scale(v, dt));
            }
        }
    }

    /// Sets velocities from a coupled solve.
    pub fn set_velocity(&mut self, ell: Point, omega: f64) {
        self.ell = ell;
        self.omega = omega;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn disk(center: Point, r: f64, n: usize) -> Vec<Point> {
        (0..n).map(|k| {
            let a = 2.0 * PI * k as f64 / n as f64;
            [center[0] + r * a.cos(), center[1] + r * a.sin()]
        }).collect()
    }

    #[test]
    fn rotation_matrix_convention() {
        assert_eq!(rotation_matrix(0.0), [[1.0, 0.0], [-0.0, 1.0]]);
        let r = rotation_matrix(PI / 2.0);
        let v = [r[0][0] * 1.0, r[1][0] * 1.0];
        assert!((v[0]).abs() < 1e-15 && (v[1] + 1.0).abs() < 1e-15);
        let (a, b) = (rotation_matrix(0.7), rotation_matrix(-0.7));
        for i in 0..2 {
            for j in 0..2 {
                let p: f64 = (0..2).map(|k| a[i][k] * b[k][j]).sum();
                assert!((p - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
        // Body-to-lab is a counter-clockwise rotation.
        let w = body_to_lab(PI / 2.0, [1.0, 0.0]);
        assert!(w[0].abs() < 1e-15 && (w[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn disk_mass_properties() {
        let p = compute_mass_inertia(&[disk([0.3, -0.2], 0.5, 256)], 1.0).unwrap();
        let m = PI * 0.25;
        assert!((p.mass - m).abs() / m < 1e-3);
        assert!((p.inertia - 0.5 * m * 0.25).abs() / (0.5 * m * 0.25) < 2e-3);
        assert!((p.centroid[0] - 0.3).abs() < 1e-12 && (p.centroid[1] + 0.2).abs() < 1e-12);
    }

    #[test]
    fn symmetric_polygon_centroid_on_axis() {
        let poly = vec![[0.0, 0.0], [2.0, -1.0], [3.0, 0.0], [2.0, 1.0]];
        let p = compute_mass_inertia(&[poly.clone()], 2.0).unwrap();
        assert!(p.centroid[1].abs() < 1e-15);
        let moved: Vec<Point> = poly.iter().map(|&[x, y]| [x + 5.0, y - 1.0]).collect();
        let q = compute_mass_inertia(&[moved], 2.0).unwrap();
        assert!((p.mass - q.mass).abs() < 1e-12 && (p.inertia - q.inertia).abs() < 1e-12);
        assert!((q.centroid[0] - p.centroid[0] - 5.0).abs() < 1e-12);
    }

    fn rigid_body() -> Body {
        let pts = disk([1.0, 1.0], 0.2, 32);
        Body::new(0, 1.0, Gait::Passive, [1.0, 1.0], 0.0, (0..32).collect(), &pts, &[pts.clone()]).unwrap()
    }

    #[test]
    fn zero_rotation_keeps_angle() {
        let mut b = rigid_body();
        b.set_velocity([0.3, 0.0], 0.0);
        b.advance(0.0, 0.1);
        assert_eq!(b.theta, 0.0);
    }

    #[test]
    fn angle_wraps() {
        let mut b = rigid_body();
        let dt = 0.01;
        b.set_velocity([0.0, 0.0], PI / dt / 10.0);
        for k in 0..20 {
            b.advance(k as f64 * dt, dt);
            assert!(b.theta >= -PI && b.theta <= PI);
        }
        assert!(b.theta.sin().abs() < 1e-12 && (b.theta.cos() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kinematic_translation_is_linear() {
        let mut b = rigid_body();
        b.set_velocity([0.5, -0.25], 0.0);
        for k in 0..10 {
            b.advance(k as f64 * 0.1, 0.1);
        }
        assert!((b.x_cm[0] - 1.5).abs() < 1e-12 && (b.x_cm[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn rotation_preserves_distances_to_center() {
        let mut b = rigid_body();
        b.set_velocity([0.0, 0.0], 2.3);
        let before: Vec<f64> = (0..32).map(|k| geom::dist(b.position(k), b.x_cm)).collect();
        b.advance(0.0, 0.137);
        for k in 0..32 {
            assert!((geom::dist(b.position(k), b.x_cm) - before[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_translation_step() {
        let mut b = rigid_body();
        let start: Vec<Point> = (0..32).map(|k| b.position(k)).collect();
        b.set_velocity([1.0, 0.0], 0.0);
        b.advance(0.0, 0.1);
        for k in 0..32 {
            let d = geom::sub(b.position(k), start[k]);
            assert!((d[0] - 0.1).abs() < 1e-12 && d[1].abs() < 1e-12);
        }
    }
}

use super::{CollisionParams, ContactKind, ContactPair};
use crate::geom::{self, Point};

/// Quadratic ramp `((w − d)/w)²` inside the collision zone, zero outside.
pub fn activation(d: f64, w_col: f64) -> f64 {
    if d <= w_col {
        ((w_col - d) / w_col).powi(2)
    } else {
        0.0
    }
}

/// Force on the first body of a pair: `−ε A (X_j − X_i)`.
pub fn repulsion_force(pair: &ContactPair, params: &CollisionParams) -> Point {
    if !pair.active {
        return [0.0, 0.0];
    }
    let eps = match pair.kind {
        ContactKind::BodyBody(..) => params.eps,
        ContactKind::BodyWall(_) => params.eps_wall,
    };
    let a = activation(pair.distance, params.w_col);
    geom::scale(geom::sub(pair.x_j, pair.x_i), -eps * a)
}

/// Torque `−(X − x_CM) × F` of a force applied at `contact`.
pub fn repulsion_torque(x_cm: Point, contact: Point, force: Point) -> f64 {
    -geom::cross(geom::sub(contact, x_cm), force)
}

/// Total external load on one body. `torque` follows the sign convention of
/// [`repulsion_torque`].
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct External {
    pub force: Point,
    pub torque: f64,
    /// Part of `force` coming from other bodies.
    pub body_force: Point,
}

/// Sums pair forces and torques on every body.
pub fn total_external(x_cm: &[Point], contacts: &[ContactPair], params: &CollisionParams) -> Vec<External> {
    let mut out = vec![External::default(); x_cm.len()];
    for pair in contacts.iter().filter(|p| p.active) {
        let f = repulsion_force(pair, params);
        match pair.kind {
            ContactKind::BodyBody(i, j) => {
                let g = [-f[0], -f[1]];
                out[i].force = geom::add(out[i].force, f);
                out[i].body_force = geom::add(out[i].body_force, f);
                out[i].torque += repulsion_torque(x_cm[i], pair.x_i, f);
                out[j].force = geom::add(out[j].force, g);
                out[j].body_force = geom::add(out[j].body_force, g);
                out[j].torque += repulsion_torque(x_cm[j], pair.x_j, g);
            }
            ContactKind::BodyWall(i) => {
                out[i].force = geom::add(out[i].force, f);
                out[i].torque += repulsion_torque(x_cm[i], pair.x_i, f);
            }
        }
    }
    out
}

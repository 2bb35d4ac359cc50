//! Narrow-band distance fields, contact detection and repulsion forces.

mod contacts;
mod fast_march;
mod forces;

pub use contacts::{compute_fields, find_contacts, ContactKind, ContactPair, DistanceFields};
pub use fast_march::{fast_march, NarrowBandField};
pub use forces::{activation, repulsion_force, repulsion_torque, total_external, External};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionParams {
    /// Width of the zone in which repulsion acts.
    pub w_col: f64,
    /// Body–body stiffness.
    pub eps: f64,
    /// Body–wall stiffness.
    pub eps_wall: f64,
    /// Narrow-band cutoff of the distance fields.
    pub d_max: f64,
}

impl CollisionParams {
    /// Defaults scaled from viscosity and a reference velocity:
    /// `ε = ε′ = 10 μ U / w_col²` and `d_max = 2 w_col`.
    pub fn scaled(w_col: f64, mu: f64, u_ref: f64) -> Self {
        let eps = 10.0 * mu * u_ref / (w_col * w_col);
        CollisionParams { w_col, eps, eps_wall: eps, d_max: 2.0 * w_col }
    }
}

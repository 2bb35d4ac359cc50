//! Arbitrary Lagrangian–Eulerian finite elements for swimmers and rigid
//! particles in 2D incompressible flow.

pub mod ale;
pub mod collision;
pub mod fem;
pub mod gaits;
pub mod geom;
pub mod linalg;
pub mod mesh;
pub mod par;
pub mod rigid_body;
pub mod sim;

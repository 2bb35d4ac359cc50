//! Prescribed deformation velocities of the swimmer families.
//!
//! Deforming gaits are written in the body frame as functions of a
//! Lagrangian label (the body-frame position of a boundary point in the
//! initial configuration). The squirmer is a rigid body with a tangential
//! slip velocity that depends on the current boundary position.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::{self, Point};

#[derive(Debug, Error, PartialEq)]
pub enum GaitError {
    #[error("invalid gait parameter: {0}")]
    Parameter(String),
    #[error("squirmer velocity requested at the body center")]
    AtCenter,
}

/// Planar travelling wave on a flagellum of length `length` starting at
/// abscissa `junction`, with amplitude growing linearly toward the tip.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpermWave {
    /// Amplitude at the distal end.
    pub amplitude: f64,
    pub wavelength: f64,
    pub period: f64,
    pub length: f64,
    pub junction: f64,
    /// Time over which the amplitude ramps up linearly from zero.
    #[serde(default)]
    pub ramp_time: f64,
}

impl SpermWave {
    pub fn amplitude_at(&self, t: f64) -> f64 {
        if self.ramp_time > 0.0 {
            self.amplitude * (t / self.ramp_time).clamp(0.0, 1.0)
        } else {
            self.amplitude
        }
    }

    /// Lateral wave shape at abscissa `x`.
    pub fn shape(&self, t: f64, x: f64) -> f64 {
        self.amplitude_at(t) * (x - self.junction) / self.length * (2.0 * PI * (t / self.period - x / self.wavelength)).sin()
    }

    /// Deformation velocity at abscissa `x`; zero on the head (`x < junction`).
    pub fn velocity(&self, t: f64, x: f64) -> Point {
        if x <= self.junction {
            return [0.0, 0.0];
        }
        let a = self.amplitude_at(t) * (x - self.junction) / self.length;
        let phase = 2.0 * PI * (t / self.period - x / self.wavelength);
        [
            2.0 * PI / (4.0 * self.period) * a * a * (2.0 * PI / self.wavelength) * (2.0 * phase).cos(),
            2.0 * PI / self.period * a * phase.cos(),
        ]
    }

    fn validate(&self) -> Result<(), GaitError> {
        if !(self.amplitude > 0.0 && self.wavelength > 0.0 && self.period > 0.0 && self.length > 0.0) {
            return Err(GaitError::Parameter("sperm amplitude, wavelength, period and length must be positive".into()));
        }
        if self.ramp_time < 0.0 {
            return Err(GaitError::Parameter("ramp_time must be non-negative".into()));
        }
        Ok(())
    }
}

/// Three spheres on a line joined by two rods; the central sphere is the
/// body-frame origin. Each phase of length `phase_duration` retracts or
/// extends one rod by `amplitude` at constant rate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeSphere {
    pub radius: f64,
    /// Center-to-center rod length at rest.
    pub rest_length: f64,
    pub amplitude: f64,
    pub phase_duration: f64,
    /// Run the four phases in reverse order (time-mirrored stroke).
    #[serde(default)]
    pub reverse: bool,
}

impl ThreeSphere {
    fn forward(&self, t: f64) -> ([f64; 2], [f64; 2]) {
        let tau = self.phase_duration;
        let cycle = t.rem_euclid(4.0 * tau);
        let phase = ((cycle / tau).floor() as usize).min(3);
        let s = (cycle - phase as f64 * tau) / tau;
        let (l0, a, r) = (self.rest_length, self.amplitude, self.amplitude / tau);
        match phase {
            0 => ([l0 - a * s, l0], [-r, 0.0]),
            1 => ([l0 - a, l0 - a * s], [0.0, -r]),
            2 => ([l0 - a + a * s, l0 - a], [r, 0.0]),
            _ => ([l0, l0 - a + a * s], [0.0, r]),
        }
    }

    /// Left and right rod lengths and their rates of change at time `t`.
    pub fn schedule(&self, t: f64) -> ([f64; 2], [f64; 2]) {
        if self.reverse {
            let period = 4.0 * self.phase_duration;
            let (len, rate) = self.forward(period - t.rem_euclid(period));
            (len, [-rate[0], -rate[1]])
        } else {
            self.forward(t)
        }
    }

    /// Body-frame centers of the left, central and right spheres at rest.
    pub fn rest_centers(&self) -> [Point; 3] {
        [[-self.rest_length, 0.0], [0.0, 0.0], [self.rest_length, 0.0]]
    }

    /// Velocity of the sphere owning a label, relative to the central sphere.
    pub fn velocity(&self, t: f64, label: Point) -> Point {
        let (_, rate) = self.schedule(t);
        if label[0] < -0.5 * self.rest_length {
            [-rate[0], 0.0]
        } else if label[0] > 0.5 * self.rest_length {
            [rate[1], 0.0]
        } else {
            [0.0, 0.0]
        }
    }

    fn validate(&self) -> Result<(), GaitError> {
        if !(self.amplitude > 0.0 && self.amplitude < self.rest_length) {
            return Err(GaitError::Parameter("three-sphere amplitude must lie in (0, rest_length)".into()));
        }
        if !(self.phase_duration > 0.0 && self.radius > 0.0) {
            return Err(GaitError::Parameter("three-sphere radius and phase duration must be positive".into()));
        }
        if self.rest_length - self.amplitude <= 2.0 * self.radius {
            return Err(GaitError::Parameter("retracted rods would make spheres overlap".into()));
        }
        Ok(())
    }
}

/// Tangential slip of a circular squirmer swimming along `heading`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Squirmer {
    pub b1: f64,
    pub beta: f64,
    /// Unit swimming direction in the body frame.
    pub heading: Point,
}

impl Squirmer {
    /// Slip velocity at offset `r = x − x_CM` (any common frame).
    pub fn velocity(&self, r: Point, heading: Point) -> Result<Point, GaitError> {
        let n = geom::norm(r);
        if n == 0.0 {
            return Err(GaitError::AtCenter);
        }
        let rh = geom::scale(r, 1.0 / n);
        let c = geom::dot(heading, rh);
        let k = self.b1 * (1.0 + self.beta * c);
        Ok([k * (c * rh[0] - heading[0]), k * (c * rh[1] - heading[1])])
    }

    fn validate(&self) -> Result<(), GaitError> {
        if (geom::norm(self.heading) - 1.0).abs() > 1e-12 {
            return Err(GaitError::Parameter("squirmer heading must be a unit vector".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Gait {
    #[default]
    Passive,
    SpermWave(SpermWave),
    ThreeSphere(ThreeSphere),
    Squirmer(Squirmer),
}

impl Gait {
    pub fn validate(&self) -> Result<(), GaitError> {
        match self {
            Gait::Passive => Ok(()),
            Gait::SpermWave(g) => g.validate(),
            Gait::ThreeSphere(g) => g.validate(),
            Gait::Squirmer(g) => g.validate(),
        }
    }

    /// Whether the gait changes the body shape (as opposed to a slip velocity).
    pub fn deforms_boundary(&self) -> bool {
        matches!(self, Gait::SpermWave(_) | Gait::ThreeSphere(_))
    }

    /// Body-frame deformation velocity of the boundary point with the given
    /// label. Zero for rigid gaits.
    pub fn deformation_velocity(&self, t: f64, label: Point) -> Point {
        match self {
            Gait::SpermWave(g) => g.velocity(t, label[0]),
            Gait::ThreeSphere(g) => g.velocity(t, label),
            Gait::Passive | Gait::Squirmer(_) => [0.0, 0.0],
        }
    }
}

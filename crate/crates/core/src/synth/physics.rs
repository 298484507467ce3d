//! Planar ball flight over the table (length x height) and the side-on camera
//! projection into pixels.
//!
//! World coordinates: `x` runs along the table with the net at 0 and the
//! table ends at `±table_length / 2`; `z` is height above the table surface.

use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::trajectory::FrameSpec;

pub const TABLE_HEIGHT_M: f64 = 0.76;
pub const TABLE_WIDTH_M: f64 = 1.525;
pub const NET_HEIGHT_M: f64 = 0.1525;
pub const BALL_RADIUS_M: f64 = 0.02;
/// Fraction of horizontal speed kept (and reversed) when the ball hits the net.
pub const NET_REBOUND: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicsParams {
    pub gravity: f64,
    /// Quadratic drag, `a = -drag_coeff * |v| * v`.
    pub drag_coeff: f64,
    /// Constant downward acceleration from spin (negative for backspin).
    pub magnus_accel: f64,
    pub restitution: f64,
    pub table_length: f64,
}

impl Default for PhysicsParams {
    fn default() -> Self {
        Self { gravity: 9.81, drag_coeff: 0.10, magnus_accel: 0.0, restitution: 0.85, table_length: 2.74 }
    }
}

impl PhysicsParams {
    pub fn validate(&self) -> Result<(), SynthError> {
        let ok = self.gravity >= 0.0
            && self.gravity.is_finite()
            && self.drag_coeff >= 0.0
            && self.drag_coeff.is_finite()
            && self.magnus_accel.is_finite()
            && self.restitution > 0.0
            && self.restitution <= 1.0
            && self.table_length > 0.0
            && self.table_length.is_finite();
        if ok {
            Ok(())
        } else {
            Err(SynthError::InvalidParams(format!("{self:?}")))
        }
    }

    pub fn half_length(&self) -> f64 {
        self.table_length / 2.0
    }
}

/// Camera on the net axis, looking across the table at the ball's plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    /// Distance from the camera to the near table edge, mm.
    pub distance_to_table: f64,
    /// Lens height above the floor, mm.
    pub elevation: f64,
    pub width: f64,
    pub height: f64,
    pub fps: f64,
    pub horizontal_fov_deg: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            distance_to_table: 1750.0,
            elevation: 1400.0,
            width: 1920.0,
            height: 1080.0,
            fps: 120.0,
            horizontal_fov_deg: 100.0,
        }
    }
}

impl CameraModel {
    pub fn validate(&self) -> Result<(), SynthError> {
        let all_positive = [self.distance_to_table, self.elevation, self.width, self.height, self.fps]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if all_positive && self.horizontal_fov_deg > 0.0 && self.horizontal_fov_deg < 180.0 {
            Ok(())
        } else {
            Err(SynthError::InvalidParams(format!("{self:?}")))
        }
    }

    pub fn frame(&self) -> FrameSpec {
        FrameSpec { fps: self.fps, width: self.width, height: self.height }
    }

    /// Pixels per meter in the plane of the table's center line.
    pub fn scale(&self) -> f64 {
        let depth = self.distance_to_table / 1000.0 + TABLE_WIDTH_M / 2.0;
        (self.width / 2.0) / (depth * (self.horizontal_fov_deg.to_radians() / 2.0).tan())
    }

    /// Pixel row of the table surface.
    pub fn table_row(&self) -> f64 {
        self.height / 2.0 + (self.elevation / 1000.0 - TABLE_HEIGHT_M) * self.scale()
    }

    pub fn net_column(&self) -> f64 {
        self.width / 2.0
    }

    pub fn to_pixel(&self, x: f64, z: f64) -> (f64, f64) {
        let s = self.scale();
        (self.net_column() + x * s, self.table_row() - z * s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlightState {
    pub x: f64,
    pub z: f64,
    pub vx: f64,
    pub vz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactKind {
    Table,
    Net,
}

/// A contact during the step from `states[step]` to `states[step + 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact {
    pub kind: ContactKind,
    pub step: usize,
    /// Fraction of the step elapsed at the contact.
    pub fraction: f64,
    pub x: f64,
    pub z: f64,
    pub before: (f64, f64),
    pub after: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Flight {
    pub states: Vec<FlightState>,
    pub contacts: Vec<Contact>,
}

fn step(s: FlightState, p: &PhysicsParams, dt: f64, index: usize, contacts: &mut Vec<Contact>) -> FlightState {
    let speed = s.vx.hypot(s.vz);
    let vx = s.vx - p.drag_coeff * speed * s.vx * dt;
    let vz = s.vz + (-p.gravity - p.magnus_accel - p.drag_coeff * speed * s.vz) * dt;
    let mut n = FlightState { x: s.x + vx * dt, z: s.z + vz * dt, vx, vz };

    if s.z >= 0.0 && n.z < 0.0 && vz < 0.0 {
        let a = s.z / (s.z - n.z);
        let bx = s.x + a * (n.x - s.x);
        if bx.abs() <= p.half_length() {
            let up = -p.restitution * vz;
            contacts.push(Contact {
                kind: ContactKind::Table,
                step: index,
                fraction: a,
                x: bx,
                z: 0.0,
                before: (vx, vz),
                after: (vx, up),
            });
            n.vz = up;
            n.z = (1.0 - a) * dt * up;
        }
    }

    let plane = if n.vx > 0.0 { -BALL_RADIUS_M } else { BALL_RADIUS_M };
    if (s.x - plane) * (n.x - plane) < 0.0 || (n.x == plane && s.x != plane) {
        let a = (plane - s.x) / (n.x - s.x);
        let zc = s.z + a * (n.z - s.z);
        if zc < NET_HEIGHT_M {
            let back = -NET_REBOUND * n.vx;
            contacts.push(Contact {
                kind: ContactKind::Net,
                step: index,
                fraction: a,
                x: plane,
                z: zc,
                before: (n.vx, n.vz),
                after: (back, n.vz),
            });
            n = FlightState { x: plane, z: zc, vx: back, vz: n.vz };
        }
    }
    n
}

/// Integrates with semi-implicit Euler at `1 / fps` steps. A table bounce
/// happens where the ball crosses the table plane over the table; its time is
/// found by linear interpolation within the step and the vertical velocity is
/// scaled by `-restitution`. A ball meeting the net plane below the net top
/// is stopped there and sent back with [`NET_REBOUND`] of its speed.
///
/// `states[0]` is `start`; integration stops once `keep_going` returns false
/// for the latest state or after `max_steps` steps.
pub fn simulate_flight(
    start: FlightState,
    params: &PhysicsParams,
    fps: f64,
    max_steps: usize,
    mut keep_going: impl FnMut(&FlightState, &[Contact]) -> bool,
) -> Flight {
    let dt = 1.0 / fps;
    let mut flight = Flight { states: vec![start], contacts: Vec::new() };
    let mut s = start;
    for i in 0..max_steps {
        s = step(s, params, dt, i, &mut flight.contacts);
        flight.states.push(s);
        if !keep_going(&s, &flight.contacts) {
            break;
        }
    }
    flight
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn camera_geometry() {
        let cam = CameraModel::default();
        assert!((cam.scale() - 320.6).abs() < 0.1, "{}", cam.scale());
        assert!((cam.table_row() - 745.2).abs() < 0.1, "{}", cam.table_row());
        assert_eq!(cam.to_pixel(0.0, 0.0).0, 960.0);
    }

    #[test]
    fn net_stops_a_low_ball() {
        let p = PhysicsParams { gravity: 0.0, drag_coeff: 0.0, ..PhysicsParams::default() };
        let start = FlightState { x: -0.5, z: 0.1, vx: 5.0, vz: 0.0 };
        let f = simulate_flight(start, &p, 120.0, 40, |_, _| true);
        let net = f.contacts.iter().find(|c| c.kind == ContactKind::Net).unwrap();
        assert_eq!(net.x, -BALL_RADIUS_M);
        assert_eq!(net.after.0, -0.5);
        assert!(f.states.iter().all(|s| s.x <= -BALL_RADIUS_M));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(PhysicsParams { restitution: 1.2, ..PhysicsParams::default() }.validate().is_err());
        assert!(PhysicsParams { drag_coeff: -0.1, ..PhysicsParams::default() }.validate().is_err());
        assert!(CameraModel { fps: 0.0, ..CameraModel::default() }.validate().is_err());
    }
}

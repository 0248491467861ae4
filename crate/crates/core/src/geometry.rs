//! Planar vector algebra and the obstacle-frame transforms used by the
//! potential fields.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// Relative speeds below this are treated as "no approach direction".
pub const DEGENERATE_SPEED: f64 = 1e-9;

/// A planar vector. Depending on context this is a position (m), a velocity
/// (m/s) or a force in field units. Serialized as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at `angle` from the East axis.
    pub fn from_angle(angle: Angle) -> Self {
        let (s, c) = angle.radians().sin_cos();
        Self::new(c, s)
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    /// `None` for vectors shorter than `eps`.
    pub fn normalized(self, eps: f64) -> Option<Vec2> {
        let n = self.norm();
        (n > eps).then(|| self / n)
    }

    /// Direction of the vector, `atan2(y, x)`.
    pub fn angle(self) -> Angle {
        Angle::new(self.y.atan2(self.x))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, rhs: Vec2) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl SubAssign for Vec2 {
    fn sub_assign(&mut self, rhs: Vec2) {
        self.x -= rhs.x;
        self.y -= rhs.y;
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl Div<f64> for Vec2 {
    type Output = Vec2;
    fn div(self, k: f64) -> Vec2 {
        Vec2::new(self.x / k, self.y / k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// An angle in radians, always stored in (-π, π].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);

    pub fn new(radians: f64) -> Self {
        Angle(wrap_to_pi(radians))
    }

    pub fn from_degrees(degrees: f64) -> Self {
        Self::new(degrees.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn degrees(self) -> f64 {
        self.0.to_degrees()
    }

    /// Signed shortest rotation taking `from` onto `self`.
    pub fn difference(self, from: Angle) -> f64 {
        wrap_to_pi(self.0 - from.0)
    }
}

impl Add<f64> for Angle {
    type Output = Angle;
    fn add(self, rhs: f64) -> Angle {
        Angle::new(self.0 + rhs)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} rad", self.0)
    }
}

/// Maps any finite angle onto (-π, π].
pub fn wrap_to_pi(radians: f64) -> f64 {
    if radians > -PI && radians <= PI {
        return radians;
    }
    let r = radians.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// `R(θ)·v` with R = [[cos θ, -sin θ], [sin θ, cos θ]].
pub fn rotate(v: Vec2, theta: Angle) -> Vec2 {
    let (s, c) = theta.radians().sin_cos();
    Vec2::new(c * v.x - s * v.y, s * v.x + c * v.y)
}

/// Coordinates of `delta` (agent minus obstacle) in the field's own frame:
/// `X = Δx cos θ + Δy sin θ`, `Y = Δx sin θ − Δy cos θ`.
///
/// The map is a rotation composed with a reflection of Y, so it is an
/// isometry but not orientation-preserving. Forces are derived from this
/// exact map, never from a pure rotation.
pub fn to_obstacle_frame(delta: Vec2, theta: Angle) -> Vec2 {
    let (s, c) = theta.radians().sin_cos();
    Vec2::new(delta.x * c + delta.y * s, delta.x * s - delta.y * c)
}

/// Relative velocity of the agent with respect to the obstacle and its
/// inclination from the East axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeMotion {
    pub velocity: Vec2,
    pub theta: Angle,
    /// Set when the relative speed is below [`DEGENERATE_SPEED`]; `theta` is
    /// then zero by convention.
    pub degenerate: bool,
}

pub fn relative_velocity(agent_vel: Vec2, obstacle_vel: Vec2) -> RelativeMotion {
    let velocity = agent_vel - obstacle_vel;
    let degenerate = velocity.norm() < DEGENERATE_SPEED;
    let theta = if degenerate {
        Angle::ZERO
    } else {
        velocity.angle()
    };
    RelativeMotion {
        velocity,
        theta,
        degenerate,
    }
}

//! Attractive and repulsive guidance fields.
//!
//! The repulsive field around each obstacle is a Cauchy-profile bump with an
//! elliptical footprint, `k / (1 + (X/a)² + (Y/b)²)`, whose major axis is
//! aligned with the agent's velocity relative to the obstacle. The amplitude
//! `k` and the semi-major axis `a` are rescheduled every evaluation from the
//! cosine `ξ` between the line of sight and the relative velocity. The force
//! fed to guidance uses a softened denominator `u = 1 + Γ·s` instead of the
//! true `(1 + s)`, which moves the force maximum on the minor axis out to
//! roughly distance `b`.
//!
//! A classic circular repulsive field is provided as a comparison baseline.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{relative_velocity, to_obstacle_frame, Angle, Vec2};
use crate::vehicle::AgentState;

/// Agent and obstacle centres closer than this have no line of sight.
pub const COINCIDENT_DISTANCE: f64 = 1e-9;
/// Forces shorter than this carry no usable direction.
pub const NULL_FORCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("obstacle-coincident: agent position coincides with an obstacle centre")]
    ObstacleCoincident,
    #[error("null-force: net force too small to define a heading")]
    NullForce,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldGains {
    pub k_att: f64,
    pub k_rep0: f64,
    pub gamma: f64,
    /// The constant `c` in `a = b·(c + ξ)`.
    pub axis_offset: f64,
    /// Amplitude of the circular baseline field.
    pub k_base: f64,
    /// Baseline influence radius as a multiple of the obstacle's `b`.
    pub baseline_range: f64,
    /// Distance beyond which the attraction stops growing (m). `None` keeps
    /// the pure quadratic well everywhere.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attraction_saturation: Option<f64>,
}

impl Default for FieldGains {
    fn default() -> Self {
        Self {
            k_att: 0.008,
            k_rep0: 30.0,
            gamma: 0.34,
            axis_offset: 1.734,
            k_base: 1e5,
            baseline_range: 3.0,
            attraction_saturation: None,
        }
    }
}

impl FieldGains {
    /// Checks the numeric invariants; returns `(field, message)` on breach.
    pub fn validate(&self) -> Result<(), (&'static str, String)> {
        let checks = [
            ("k_att", self.k_att, self.k_att >= 0.0, "must be >= 0"),
            ("k_rep0", self.k_rep0, self.k_rep0 >= 0.0, "must be >= 0"),
            (
                "gamma",
                self.gamma,
                self.gamma > 0.0 && self.gamma <= 1.0,
                "must be in (0, 1]",
            ),
            (
                "axis_offset",
                self.axis_offset,
                self.axis_offset > 1.0,
                "must be > 1",
            ),
            ("k_base", self.k_base, self.k_base >= 0.0, "must be >= 0"),
            (
                "baseline_range",
                self.baseline_range,
                self.baseline_range > 0.0,
                "must be > 0",
            ),
        ];
        if let Some(d) = self.attraction_saturation {
            if !(d > 0.0 && d.is_finite()) {
                return Err(("attraction_saturation", "must be > 0".to_string()));
            }
        }
        for (name, value, ok, msg) in checks {
            if !ok || !value.is_finite() {
                return Err((name, msg.to_string()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstacleKind {
    #[default]
    Static,
    Dynamic,
    Agent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleSpec {
    pub position: Vec2,
    #[serde(default)]
    pub velocity: Vec2,
    /// Semi-minor axis of the field: the minimum allowable separation.
    pub b: f64,
    #[serde(default)]
    pub physical_radius: f64,
    #[serde(default)]
    pub kind: ObstacleKind,
}

impl ObstacleSpec {
    pub fn fixed(position: Vec2, b: f64) -> Self {
        Self {
            position,
            velocity: Vec2::ZERO,
            b,
            physical_radius: 0.0,
            kind: ObstacleKind::Static,
        }
    }

    pub fn moving(position: Vec2, velocity: Vec2, b: f64) -> Self {
        Self {
            position,
            velocity,
            b,
            physical_radius: 0.0,
            kind: ObstacleKind::Dynamic,
        }
    }

    pub fn with_radius(mut self, physical_radius: f64) -> Self {
        self.physical_radius = physical_radius;
        self
    }
}

/// Per-encounter shape of the repulsive field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RepulsiveParams {
    pub k_rep: f64,
    pub a: f64,
    pub theta: Angle,
    /// Cosine of the angle between line of sight and relative velocity.
    pub xi: f64,
}

/// `k_att·|pos − goal|²`, continued linearly (conic) beyond the saturation
/// distance when one is set.
pub fn attractive_potential(pos: Vec2, goal: Vec2, gains: &FieldGains) -> f64 {
    let d = pos.distance(goal);
    match gains.attraction_saturation {
        Some(limit) if d > limit => gains.k_att * limit * (2.0 * d - limit),
        _ => gains.k_att * d * d,
    }
}

/// `−∇U_att`: `2·k_att·(goal − pos)`, with magnitude capped at
/// `2·k_att·limit` under saturation.
pub fn attractive_force(pos: Vec2, goal: Vec2, gains: &FieldGains) -> Vec2 {
    let offset = goal - pos;
    match gains.attraction_saturation {
        Some(limit) if offset.norm() > limit => {
            offset * (2.0 * gains.k_att * limit / offset.norm())
        }
        _ => offset * (2.0 * gains.k_att),
    }
}

/// Amplitude schedule `k_rep0·(sin(πξ/2) + 1)`.
pub fn scheduled_amplitude(xi: f64, k_rep0: f64) -> f64 {
    k_rep0 * ((PI * xi / 2.0).sin() + 1.0)
}

/// Semi-major axis schedule `b·(axis_offset + ξ)`.
pub fn scheduled_major_axis(xi: f64, b: f64, axis_offset: f64) -> f64 {
    b * (axis_offset + xi)
}

pub fn adaptive_params(
    agent_pos: Vec2,
    agent_vel: Vec2,
    obstacle: &ObstacleSpec,
    gains: &FieldGains,
) -> Result<RepulsiveParams, FieldError> {
    let line_of_sight = obstacle.position - agent_pos;
    let range = line_of_sight.norm();
    if range <= COINCIDENT_DISTANCE {
        return Err(FieldError::ObstacleCoincident);
    }
    let motion = relative_velocity(agent_vel, obstacle.velocity);
    let xi = if motion.degenerate {
        0.0
    } else {
        let (s, c) = motion.theta.radians().sin_cos();
        ((line_of_sight.x * c + line_of_sight.y * s) / range).clamp(-1.0, 1.0)
    };
    Ok(RepulsiveParams {
        k_rep: scheduled_amplitude(xi, gains.k_rep0),
        a: scheduled_major_axis(xi, obstacle.b, gains.axis_offset),
        theta: motion.theta,
        xi,
    })
}

/// Squared elliptic radius `(X/a)² + (Y/b)²` and the frame coordinates.
fn elliptic_coordinates(
    pos: Vec2,
    params: &RepulsiveParams,
    obstacle: &ObstacleSpec,
) -> (Vec2, f64) {
    let local = to_obstacle_frame(pos - obstacle.position, params.theta);
    let s = (local.x / params.a).powi(2) + (local.y / obstacle.b).powi(2);
    (local, s)
}

pub fn repulsive_potential(pos: Vec2, params: &RepulsiveParams, obstacle: &ObstacleSpec) -> f64 {
    let (_, s) = elliptic_coordinates(pos, params, obstacle);
    params.k_rep / (1.0 + s)
}

/// Guidance force of one obstacle, pointing outward.
///
/// In the obstacle frame the components are `2k·u⁻²·X/a²` and `2k·u⁻²·Y/b²`
/// with `u = 1 + Γ·s`. They are carried back to the world frame through the
/// Jacobian of [`to_obstacle_frame`], whose columns are `(cos θ, sin θ)` for
/// X and `(sin θ, −cos θ)` for Y. With `Γ = 1` the result is exactly
/// `−∇U_rep`.
pub fn repulsive_force(
    pos: Vec2,
    params: &RepulsiveParams,
    obstacle: &ObstacleSpec,
    gains: &FieldGains,
) -> Vec2 {
    let (local, s) = elliptic_coordinates(pos, params, obstacle);
    let u = 1.0 + gains.gamma * s;
    let scale = 2.0 * params.k_rep / (u * u);
    let gx = local.x / (params.a * params.a);
    let gy = local.y / (obstacle.b * obstacle.b);
    let (sin, cos) = params.theta.radians().sin_cos();
    Vec2::new(gx * cos + gy * sin, gx * sin - gy * cos) * scale
}

/// Distance along the minor axis at which the guidance force peaks:
/// `b / √(3Γ)`.
pub fn force_maximum_radius(b: f64, gamma: f64) -> f64 {
    b / (3.0 * gamma).sqrt()
}

fn agent_velocity(agent: &AgentState) -> Vec2 {
    Vec2::from_angle(agent.heading) * agent.speed
}

/// Attraction plus every obstacle's adaptive repulsion.
pub fn net_force(
    agent: &AgentState,
    goal: Vec2,
    obstacles: &[ObstacleSpec],
    gains: &FieldGains,
) -> Result<Vec2, FieldError> {
    let velocity = agent_velocity(agent);
    let mut force = attractive_force(agent.position, goal, gains);
    for obstacle in obstacles {
        let params = adaptive_params(agent.position, velocity, obstacle, gains)?;
        force += repulsive_force(agent.position, &params, obstacle, gains);
    }
    Ok(force)
}

/// `atan2(F_y, F_x)`.
pub fn heading_command(force: Vec2) -> Result<Angle, FieldError> {
    if force.norm() <= NULL_FORCE {
        return Err(FieldError::NullForce);
    }
    Ok(force.angle())
}

/// Classic circular repulsion `k·(1/d − 1/d0)/d²`, radially outward, zero
/// beyond `d0`.
pub fn baseline_repulsive_force(
    pos: Vec2,
    obstacle: &ObstacleSpec,
    k_base: f64,
    d0: f64,
) -> Result<Vec2, FieldError> {
    let offset = pos - obstacle.position;
    let d = offset.norm();
    if d <= COINCIDENT_DISTANCE {
        return Err(FieldError::ObstacleCoincident);
    }
    if d >= d0 {
        return Ok(Vec2::ZERO);
    }
    let magnitude = k_base * (1.0 / d - 1.0 / d0) / (d * d);
    Ok(offset * (magnitude / d))
}

/// Attraction plus circular baseline repulsion with `d0 = baseline_range·b`.
pub fn baseline_net_force(
    agent: &AgentState,
    goal: Vec2,
    obstacles: &[ObstacleSpec],
    gains: &FieldGains,
) -> Result<Vec2, FieldError> {
    let mut force = attractive_force(agent.position, goal, gains);
    for obstacle in obstacles {
        force += baseline_repulsive_force(
            agent.position,
            obstacle,
            gains.k_base,
            gains.baseline_range * obstacle.b,
        )?;
    }
    Ok(force)
}

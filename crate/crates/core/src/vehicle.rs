//! Constant-speed fixed-wing kinematics.
//!
//! Two steppers: an idealized one that snaps the heading to the command, and
//! a coordinated-turn model (`ψ̇ = g/V · tan φ`) driven by a proportional
//! heading-to-roll controller with roll and roll-rate limits.

use serde::{Deserialize, Serialize};

use crate::geometry::{Angle, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub position: Vec2,
    pub heading: Angle,
    pub roll: Angle,
    pub speed: f64,
}

impl AgentState {
    pub fn new(position: Vec2, heading: Angle, speed: f64) -> Self {
        Self {
            position,
            heading,
            roll: Angle::ZERO,
            speed,
        }
    }

    pub fn velocity(&self) -> Vec2 {
        Vec2::from_angle(self.heading) * self.speed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleLimits {
    /// rad
    pub roll_limit: f64,
    /// Commanded roll per radian of heading error.
    pub heading_gain: f64,
    /// rad/s
    pub roll_rate_limit: f64,
    pub gravity: f64,
}

impl Default for VehicleLimits {
    fn default() -> Self {
        Self {
            roll_limit: 45f64.to_radians(),
            heading_gain: 1.2,
            roll_rate_limit: 2.0,
            gravity: 9.81,
        }
    }
}

impl VehicleLimits {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.roll_limit > 0.0 && self.roll_limit < std::f64::consts::FRAC_PI_2) {
            return Err("roll_limit must be in (0, pi/2)".into());
        }
        if !(self.heading_gain > 0.0 && self.heading_gain.is_finite()) {
            return Err("heading_gain must be > 0".into());
        }
        if !(self.roll_rate_limit > 0.0 && self.roll_rate_limit.is_finite()) {
            return Err("roll_rate_limit must be > 0".into());
        }
        if !(self.gravity > 0.0 && self.gravity.is_finite()) {
            return Err("gravity must be > 0".into());
        }
        Ok(())
    }
}

/// Turns instantly onto `heading_cmd`, then flies straight for `dt`.
pub fn step_direct(state: &AgentState, heading_cmd: Angle, dt: f64) -> AgentState {
    AgentState {
        position: state.position + Vec2::from_angle(heading_cmd) * (state.speed * dt),
        heading: heading_cmd,
        ..*state
    }
}

/// Roll the controller asks for, before rate limiting.
pub fn roll_command(state: &AgentState, heading_cmd: Angle, limits: &VehicleLimits) -> f64 {
    let error = heading_cmd.difference(state.heading);
    (limits.heading_gain * error).clamp(-limits.roll_limit, limits.roll_limit)
}

/// Slews roll toward the controller command, then integrates the
/// coordinated-turn kinematics over `dt` with one RK4 step at that roll.
pub fn step_coordinated(
    state: &AgentState,
    heading_cmd: Angle,
    limits: &VehicleLimits,
    dt: f64,
) -> AgentState {
    let target = roll_command(state, heading_cmd, limits);
    let max_change = limits.roll_rate_limit * dt;
    let current = state.roll.radians();
    let roll = (current + (target - current).clamp(-max_change, max_change))
        .clamp(-limits.roll_limit, limits.roll_limit);
    integrate_turn(state, roll, limits.gravity, dt)
}

/// One RK4 step of `ẋ = V cos ψ, ẏ = V sin ψ, ψ̇ = g/V · tan φ` at fixed roll.
pub fn integrate_turn(state: &AgentState, roll: f64, gravity: f64, dt: f64) -> AgentState {
    let v = state.speed;
    let turn_rate = gravity / v * roll.tan();
    let psi0 = state.heading.radians();
    let derivative = |psi: f64| Vec2::new(v * psi.cos(), v * psi.sin());

    let k1 = derivative(psi0);
    let k2 = derivative(psi0 + 0.5 * dt * turn_rate);
    let k3 = k2;
    let k4 = derivative(psi0 + dt * turn_rate);
    let displacement = (k1 + 2.0 * k2 + 2.0 * k3 + k4) * (dt / 6.0);

    AgentState {
        position: state.position + displacement,
        heading: Angle::new(psi0 + dt * turn_rate),
        roll: Angle::new(roll),
        speed: v,
    }
}

/// Radius of a steady coordinated turn, `V² / (g·tan φ)`.
pub fn turn_radius(speed: f64, roll: f64, gravity: f64) -> f64 {
    speed * speed / (gravity * roll.tan())
}

//! Reactive collision avoidance for constant-speed fixed-wing UAVs using
//! elliptical, velocity-aligned Cauchy repulsive fields with gains scheduled
//! on collision likelihood, plus a deterministic 2D simulator to exercise it
//! against a classic circular potential field.

pub mod cli;
pub mod engine;
pub mod fields;
pub mod geometry;
pub mod scenario;
pub mod vehicle;

pub use engine::{simulate, Guidance, RunMetrics, SimConfig, StepMode, TrajectoryLog, Verdict};
pub use fields::{FieldError, FieldGains, ObstacleKind, ObstacleSpec, RepulsiveParams};
pub use geometry::{Angle, Vec2};
pub use scenario::{builtin_scenarios, load_scenario, ScenarioConfig, ScenarioError};
pub use vehicle::{AgentState, VehicleLimits};

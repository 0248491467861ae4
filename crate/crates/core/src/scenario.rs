//! Scenario documents, bundled scenarios, and trajectory/metrics writers.
//!
//! Scenarios are JSON. Angles in documents are degrees; everything else is
//! SI. Omitted gains take the defaults of [`FieldGains`].

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{RunMetrics, StepMode, TrajectoryLog};
use crate::fields::{FieldGains, ObstacleKind, ObstacleSpec};
use crate::geometry::{Angle, Vec2};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse-error: {0}")]
    Parse(String),
    #[error("schema-error: {path}: {message}")]
    Schema { path: String, message: String },
    #[error("validation-error: {0}")]
    Validation(String),
    #[error("not found: no builtin scenario or file named '{0}'")]
    NotFound(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

fn default_speed() -> f64 {
    15.0
}

fn default_agent_radius() -> f64 {
    1.0
}

fn default_frame() -> String {
    "ENU".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub start: Vec2,
    pub goal: Vec2,
    #[serde(default = "default_speed")]
    pub speed: f64,
    /// Degrees from East; `None` points the agent at its goal.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_heading: Option<f64>,
    /// Body radius used for collision detection (m).
    #[serde(default = "default_agent_radius")]
    pub radius: f64,
}

impl AgentConfig {
    pub fn new(start: Vec2, goal: Vec2, speed: f64) -> Self {
        Self {
            start,
            goal,
            speed,
            initial_heading: None,
            radius: default_agent_radius(),
        }
    }

    pub fn initial_heading(&self) -> Angle {
        match self.initial_heading {
            Some(deg) => Angle::from_degrees(deg),
            None => (self.goal - self.start).angle(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub description: String,
    /// Illustrative geometry rather than a reference layout.
    #[serde(default)]
    pub invented: bool,
    #[serde(default = "default_frame")]
    pub frame: String,
    /// Stepping mode the scenario is meant to be run with.
    #[serde(default)]
    pub mode: StepMode,
    pub agents: Vec<AgentConfig>,
    #[serde(default)]
    pub obstacles: Vec<ObstacleSpec>,
    #[serde(default)]
    pub gains: FieldGains,
    /// Semi-minor axis other agents use when avoiding agent `i`.
    pub agent_b: Vec<f64>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        let fail = |msg: String| Err(ScenarioError::Validation(msg));
        if self.frame != "ENU" {
            return fail(format!("frame must be \"ENU\", got \"{}\"", self.frame));
        }
        if self.agents.is_empty() {
            return fail("at least one agent is required".into());
        }
        if self.agent_b.len() != self.agents.len() {
            return fail(format!(
                "agent_b has {} entries but there are {} agents",
                self.agent_b.len(),
                self.agents.len()
            ));
        }
        for (i, a) in self.agents.iter().enumerate() {
            if !a.start.is_finite() || !a.goal.is_finite() {
                return fail(format!("agents[{i}] start/goal must be finite"));
            }
            if !(a.speed > 0.0 && a.speed.is_finite()) {
                return fail(format!("agents[{i}].speed must be > 0"));
            }
            if !(a.radius >= 0.0 && a.radius.is_finite()) {
                return fail(format!("agents[{i}].radius must be >= 0"));
            }
            if a.start == a.goal {
                return fail(format!("agents[{i}] start and goal coincide"));
            }
            if a.initial_heading.is_some_and(|h| !h.is_finite()) {
                return fail(format!("agents[{i}].initial_heading must be finite"));
            }
        }
        for (i, b) in self.agent_b.iter().enumerate() {
            if !(*b > 0.0 && b.is_finite()) {
                return fail(format!("agent_b[{i}] must be > 0"));
            }
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if !o.position.is_finite() || !o.velocity.is_finite() {
                return fail(format!("obstacles[{i}] position/velocity must be finite"));
            }
            if !(o.b > 0.0 && o.b.is_finite()) {
                return fail(format!("obstacles[{i}].b must be > 0"));
            }
            if !(o.physical_radius >= 0.0 && o.physical_radius.is_finite()) {
                return fail(format!("obstacles[{i}].physical_radius must be >= 0"));
            }
            if o.physical_radius > o.b {
                return fail(format!("obstacles[{i}].physical_radius must not exceed b"));
            }
            if o.kind == ObstacleKind::Static && o.velocity != Vec2::ZERO {
                return fail(format!("obstacles[{i}] is static but has nonzero velocity"));
            }
        }
        if let Err((field, msg)) = self.gains.validate() {
            return fail(format!("gains.{field} {msg}"));
        }
        Ok(())
    }

    /// Agent pairs that start closer than the larger `agent_b`; reported,
    /// not rejected.
    pub fn warnings(&self) -> Vec<String> {
        let limit = self.agent_b.iter().copied().fold(0.0, f64::max);
        let mut out = Vec::new();
        for i in 0..self.agents.len() {
            for j in i + 1..self.agents.len() {
                let d = self.agents[i].start.distance(self.agents[j].start);
                if d <= limit {
                    out.push(format!("agents {i} and {j} start {d:.3} m apart"));
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

/// Parses and validates a scenario document.
pub fn load_scenario(document: &str) -> Result<ScenarioConfig, ScenarioError> {
    let value: serde_json::Value =
        serde_json::from_str(document).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    let scenario: ScenarioConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        ScenarioError::Schema {
            path: if path == "." { "<root>".into() } else { path },
            message: e.into_inner().to_string(),
        }
    })?;
    scenario.validate()?;
    Ok(scenario)
}

pub fn load_scenario_file(path: &Path) -> Result<ScenarioConfig, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_scenario(&text)
}

/// A builtin name, or else a path to a JSON document.
pub fn resolve_scenario(name_or_path: &str) -> Result<ScenarioConfig, ScenarioError> {
    if let Some(s) = builtin_scenarios()
        .into_iter()
        .find(|s| s.name == name_or_path)
    {
        return Ok(s);
    }
    let path = Path::new(name_or_path);
    if path.is_file() {
        load_scenario_file(path)
    } else {
        Err(ScenarioError::NotFound(name_or_path.to_string()))
    }
}

/// Saturation distance used by the bundled scenarios (m). With the tabulated
/// `k_att` this caps the attraction at 4.8 field units, the same order as
/// the repulsive peak.
pub const BUILTIN_ATTRACTION_SATURATION: f64 = 300.0;

fn single_agent(start: Vec2, goal: Vec2) -> Vec<AgentConfig> {
    vec![AgentConfig::new(start, goal, 15.0)]
}

pub fn builtin_scenarios() -> Vec<ScenarioConfig> {
    let v = Vec2::new;
    let gains = FieldGains {
        attraction_saturation: Some(BUILTIN_ATTRACTION_SATURATION),
        ..FieldGains::default()
    };

    let head_on = ScenarioConfig {
        name: "head_on".into(),
        description: "Single static obstacle on the midpoint of the start-goal segment; \
                      the agent starts 5 degrees off the goal bearing"
            .into(),
        invented: true,
        frame: default_frame(),
        mode: StepMode::Direct,
        agents: vec![AgentConfig {
            initial_heading: Some(5.0),
            ..AgentConfig::new(v(0.0, 0.0), v(800.0, 0.0), 15.0)
        }],
        obstacles: vec![ObstacleSpec::fixed(v(400.0, 0.0), 30.0).with_radius(10.0)],
        gains,
        agent_b: vec![30.0],
    };

    let narrow_gap = ScenarioConfig {
        name: "narrow_gap".into(),
        description: "Two static obstacles flanking the start-goal segment".into(),
        invented: true,
        frame: default_frame(),
        mode: StepMode::Direct,
        agents: single_agent(v(0.0, 0.0), v(800.0, 0.0)),
        obstacles: vec![
            ObstacleSpec::fixed(v(400.0, 35.0), 30.0).with_radius(10.0),
            ObstacleSpec::fixed(v(400.0, -35.0), 30.0).with_radius(10.0),
        ],
        gains,
        agent_b: vec![30.0],
    };

    let corners = [v(0.0, 0.0), v(800.0, 0.0), v(800.0, 800.0), v(0.0, 800.0)];
    let four_agent_swap = ScenarioConfig {
        name: "four_agent_swap".into(),
        description: "Four agents fly to the diagonally opposite corner".into(),
        invented: false,
        frame: default_frame(),
        mode: StepMode::Direct,
        agents: (0..4)
            .map(|i| AgentConfig::new(corners[i], corners[(i + 2) % 4], 15.0))
            .collect(),
        obstacles: Vec::new(),
        gains,
        agent_b: vec![30.0; 4],
    };

    let urban_dynamic = ScenarioConfig {
        name: "urban_dynamic".into(),
        description: "Three buildings and one constant-velocity intruder; coordinated-turn kinematics. \
                      The intruder start (600, 1150) is invented and puts it on a near-collision course; \
                      the agent starts facing East."
            .into(),
        invented: false,
        frame: default_frame(),
        mode: StepMode::Coordinated,
        agents: vec![AgentConfig {
            initial_heading: Some(0.0),
            ..AgentConfig::new(v(0.0, 0.0), v(800.0, 800.0), 15.0)
        }],
        obstacles: vec![
            ObstacleSpec::fixed(v(500.0, 550.0), 11.0).with_radius(5.0),
            ObstacleSpec::fixed(v(450.0, 500.0), 6.0).with_radius(3.0),
            ObstacleSpec::fixed(v(250.0, 250.0), 9.0).with_radius(4.0),
            ObstacleSpec::moving(v(600.0, 1150.0), v(0.0, -10.0), 20.0).with_radius(1.0),
        ],
        gains,
        agent_b: vec![20.0],
    };

    vec![head_on, narrow_gap, four_agent_swap, urban_dynamic]
}

/// `%.9g`-style formatting: 9 significant digits, trailing zeros trimmed.
pub fn format_sig9(value: f64) -> String {
    if value.is_nan() {
        return "nan".into();
    }
    if value.is_infinite() {
        return if value > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    if value == 0.0 {
        return "0".into();
    }
    const DIGITS: i32 = 9;
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, value);
    let (mantissa, exponent) = sci.split_once('e').expect("exponent present");
    let exponent: i32 = exponent.parse().expect("integer exponent");
    if (-5..DIGITS).contains(&exponent) {
        let decimals = (DIGITS - 1 - exponent).max(0) as usize;
        trim_zeros(format!("{value:.decimals$}"))
    } else {
        let mantissa = trim_zeros(mantissa.to_string());
        let sign = if exponent < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exponent.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub const TRAJECTORY_HEADER: &str = "t,agent,x,y,psi,phi,cmd_psi,fx,fy,min_sep";

/// Trajectory CSV as a string; one row per agent per step.
pub fn trajectory_csv(log: &TrajectoryLog) -> String {
    let mut out = String::with_capacity(64 * (log.steps.len() * log.agent_count() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for step in &log.steps {
        for (i, r) in step.agents.iter().enumerate() {
            let fields = [
                step.t,
                r.position.x,
                r.position.y,
                r.heading.radians(),
                r.roll.radians(),
                r.cmd_heading.radians(),
                r.force.x,
                r.force.y,
                r.min_separation(),
            ];
            let _ = write!(out, "{},{}", format_sig9(fields[0]), i);
            for f in &fields[1..] {
                out.push(',');
                out.push_str(&format_sig9(*f));
            }
            out.push('\n');
        }
    }
    out
}

pub fn write_trajectory(log: &TrajectoryLog, destination: &Path) -> Result<(), ScenarioError> {
    fs::write(destination, trajectory_csv(log)).map_err(|source| ScenarioError::Io {
        path: destination.to_path_buf(),
        source,
    })
}

pub fn metrics_json(metrics: &RunMetrics) -> String {
    serde_json::to_string_pretty(metrics).expect("metrics serialize") + "\n"
}

pub fn write_metrics(metrics: &RunMetrics, destination: &Path) -> Result<(), ScenarioError> {
    fs::write(destination, metrics_json(metrics)).map_err(|source| ScenarioError::Io {
        path: destination.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_takes_defaults() {
        let s = load_scenario(
            r#"{"name":"m","agents":[{"start":[0,0],"goal":[100,0]}],"agent_b":[30]}"#,
        )
        .unwrap();
        assert_eq!(s.gains, FieldGains::default());
        assert_eq!(s.gains.gamma, 0.34);
        assert_eq!(s.gains.axis_offset, 1.734);
        assert_eq!(s.gains.k_att, 0.008);
        assert_eq!(s.gains.k_rep0, 30.0);
        assert_eq!(s.frame, "ENU");
        assert_eq!(s.agents[0].speed, 15.0);
        assert!(s.obstacles.is_empty());
    }

    #[test]
    fn negative_b_is_a_validation_error() {
        let doc = r#"{"name":"m","agents":[{"start":[0,0],"goal":[100,0]}],"agent_b":[30],
                      "obstacles":[{"position":[50,0],"b":-5}]}"#;
        let err = load_scenario(doc).unwrap_err();
        assert_eq!(
            err.to_string(),
            "validation-error: obstacles[0].b must be > 0"
        );
    }

    #[test]
    fn error_classes() {
        assert!(matches!(
            load_scenario("{not json"),
            Err(ScenarioError::Parse(_))
        ));
        let err = load_scenario(
            r#"{"name":"m","agents":[{"start":[0,"x"],"goal":[1,0]}],"agent_b":[1]}"#,
        )
        .unwrap_err();
        match err {
            ScenarioError::Schema { path, .. } => assert_eq!(path, "agents[0].start[1]"),
            other => panic!("expected schema error, got {other}"),
        }
        let err =
            load_scenario(r#"{"name":"m","agents":[{"start":[0,0],"goal":[1,0]}]}"#).unwrap_err();
        assert!(matches!(err, ScenarioError::Schema { .. }), "{err}");
        let err = load_scenario(
            r#"{"name":"m","agents":[{"start":[0,0],"goal":[1,0]}],"agent_b":[1,2]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, ScenarioError::Validation(_)), "{err}");
        let err = load_scenario(r#"{"name":"m","agents":[],"agent_b":[]}"#).unwrap_err();
        assert!(matches!(err, ScenarioError::Validation(_)), "{err}");
    }

    #[test]
    fn four_agent_swap_matches_table() {
        let s = builtin_scenarios()
            .into_iter()
            .find(|s| s.name == "four_agent_swap")
            .unwrap();
        let starts: Vec<[f64; 2]> = s.agents.iter().map(|a| a.start.into()).collect();
        let goals: Vec<[f64; 2]> = s.agents.iter().map(|a| a.goal.into()).collect();
        assert_eq!(
            starts,
            [[0.0, 0.0], [800.0, 0.0], [800.0, 800.0], [0.0, 800.0]]
        );
        assert_eq!(
            goals,
            [[800.0, 800.0], [0.0, 800.0], [0.0, 0.0], [800.0, 0.0]]
        );
        assert_eq!(s.gains.k_att, 0.008);
        assert_eq!(s.gains.k_rep0, 30.0);
        assert_eq!(s.agent_b, [30.0; 4]);
    }

    #[test]
    fn urban_dynamic_matches_table() {
        let s = builtin_scenarios()
            .into_iter()
            .find(|s| s.name == "urban_dynamic")
            .unwrap();
        let b: Vec<f64> = s
            .obstacles
            .iter()
            .filter(|o| o.kind == ObstacleKind::Static)
            .map(|o| o.b)
            .collect();
        assert_eq!(b, [11.0, 6.0, 9.0]);
        let dynamic: Vec<&ObstacleSpec> = s
            .obstacles
            .iter()
            .filter(|o| o.kind == ObstacleKind::Dynamic)
            .collect();
        assert_eq!(dynamic.len(), 1);
        assert_eq!(dynamic[0].velocity, Vec2::new(0.0, -10.0));
        assert_eq!(dynamic[0].b, 20.0);
        assert_eq!(s.agents[0].start, Vec2::ZERO);
        assert_eq!(s.agents[0].goal, Vec2::new(800.0, 800.0));
        assert_eq!(s.agents[0].speed, 15.0);
        assert_eq!(s.mode, StepMode::Coordinated);
    }

    #[test]
    fn head_on_geometry() {
        let s = builtin_scenarios()
            .into_iter()
            .find(|s| s.name == "head_on")
            .unwrap();
        assert_eq!(s.obstacles[0].position, Vec2::new(400.0, 0.0));
        assert!(s.invented);
    }

    #[test]
    fn builtins_validate_and_round_trip() {
        for s in builtin_scenarios() {
            let reloaded = load_scenario(&s.to_json()).unwrap();
            assert_eq!(reloaded, s, "{}", s.name);
        }
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(0.0), "0");
        assert_eq!(format_sig9(1.5), "1.5");
        assert_eq!(format_sig9(800.0), "800");
        assert_eq!(format_sig9(0.05), "0.05");
        assert_eq!(format_sig9(std::f64::consts::PI), "3.14159265");
        assert_eq!(format_sig9(-123456.789123), "-123456.789");
        assert_eq!(format_sig9(1.0e-7), "1e-07");
        assert_eq!(format_sig9(1.23456789012e12), "1.23456789e+12");
        assert_eq!(format_sig9(123456789.4), "123456789");
        assert_eq!(format_sig9(f64::INFINITY), "inf");
    }
}

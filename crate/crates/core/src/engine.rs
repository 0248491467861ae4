//! Fixed-step, synchronous multi-agent simulation.
//!
//! Every step: scripted obstacles are moved by their constant velocity, each
//! active agent sees the scripted obstacles plus every other active agent,
//! all commands are computed from the same time-t snapshot, and only then is
//! any agent advanced. Agents that reach their goal are retired: they stop
//! moving and stop acting as obstacles for the rest of the run.

use serde::{Deserialize, Serialize};

use crate::fields::{baseline_net_force, heading_command, net_force, ObstacleKind, ObstacleSpec};
use crate::geometry::{Angle, Vec2};
use crate::scenario::ScenarioConfig;
use crate::vehicle::{step_coordinated, step_direct, AgentState, VehicleLimits};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepMode {
    #[default]
    Direct,
    Coordinated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Guidance {
    #[default]
    Proposed,
    Baseline,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub t_start: f64,
    pub t_max: f64,
    pub goal_radius: f64,
    pub stall_window: f64,
    pub stall_progress: f64,
    pub mode: StepMode,
    pub guidance: Guidance,
    pub limits: VehicleLimits,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            t_start: 0.0,
            t_max: 300.0,
            goal_radius: 10.0,
            stall_window: 20.0,
            stall_progress: 1.0,
            mode: StepMode::Direct,
            guidance: Guidance::Proposed,
            limits: VehicleLimits::default(),
        }
    }
}

impl SimConfig {
    /// Defaults with the stepping mode the scenario asks for.
    pub fn for_scenario(scenario: &ScenarioConfig) -> Self {
        Self {
            mode: scenario.mode,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err("dt must be > 0".into());
        }
        let span = self.t_max - self.t_start;
        if !(span > self.dt && span.is_finite()) {
            return Err("t_max must exceed t_start + dt".into());
        }
        if !(self.goal_radius > 0.0 && self.goal_radius.is_finite()) {
            return Err("goal_radius must be > 0".into());
        }
        if !(self.stall_window > 0.0 && self.stall_progress >= 0.0) {
            return Err("stall_window must be > 0 and stall_progress >= 0".into());
        }
        self.limits.validate()
    }
}

/// One agent at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentRecord {
    pub position: Vec2,
    pub heading: Angle,
    pub roll: Angle,
    pub cmd_heading: Angle,
    pub force: Vec2,
    /// Centre distance to each scripted obstacle, in scenario order.
    pub obstacle_separations: Vec<f64>,
    /// Centre distance to each agent; infinite for itself and retired peers.
    pub agent_separations: Vec<f64>,
    /// False once the agent has reached its goal.
    pub active: bool,
}

impl AgentRecord {
    pub fn min_separation(&self) -> f64 {
        self.obstacle_separations
            .iter()
            .chain(&self.agent_separations)
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub agents: Vec<AgentRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub dt: f64,
    pub steps: Vec<StepRecord>,
}

impl TrajectoryLog {
    pub fn agent_count(&self) -> usize {
        self.steps.first().map_or(0, |s| s.agents.len())
    }

    pub fn positions(&self, agent: usize) -> impl Iterator<Item = Vec2> + '_ {
        self.steps.iter().map(move |s| s.agents[agent].position)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactKind {
    Obstacle,
    Agent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Reached,
    Collision {
        agent: usize,
        with: ContactKind,
        index: usize,
        t: f64,
    },
    Stall {
        agent: usize,
        t: f64,
    },
    Timeout {
        t: f64,
    },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Reached => "reached",
            Verdict::Collision { .. } => "collision",
            Verdict::Stall { .. } => "stall",
            Verdict::Timeout { .. } => "timeout",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentMetrics {
    pub reached_goal: bool,
    pub time_to_goal: Option<f64>,
    /// `None` when nothing else was ever present.
    pub min_separation: Option<f64>,
    /// Closest approach to each scripted obstacle, in scenario order.
    pub obstacle_clearance: Vec<Option<f64>>,
    /// Closest approach to each other agent; `None` for itself.
    pub agent_clearance: Vec<Option<f64>>,
    /// Steps during which the agent was inside some obstacle's `b`.
    pub soft_violations: usize,
    pub max_cross_track: f64,
    pub path_length: f64,
    pub heading_jitter: f64,
    pub max_abs_roll: f64,
    pub stalled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    #[serde(flatten)]
    pub verdict: Verdict,
    pub t_end: f64,
    pub steps: usize,
    pub agents: Vec<AgentMetrics>,
}

impl RunMetrics {
    pub fn all_reached(&self) -> bool {
        matches!(self.verdict, Verdict::Reached)
    }

    pub fn min_separation(&self) -> Option<f64> {
        self.agents
            .iter()
            .filter_map(|a| a.min_separation)
            .reduce(f64::min)
    }

    pub fn max_cross_track(&self) -> f64 {
        self.agents
            .iter()
            .map(|a| a.max_cross_track)
            .fold(0.0, f64::max)
    }

    pub fn mean_heading_jitter(&self) -> f64 {
        if self.agents.is_empty() {
            return 0.0;
        }
        self.agents.iter().map(|a| a.heading_jitter).sum::<f64>() / self.agents.len() as f64
    }
}

/// Minimum centre distance over every logged instant and pair.
pub fn min_separation(log: &TrajectoryLog) -> f64 {
    log.steps
        .iter()
        .flat_map(|s| s.agents.iter().map(AgentRecord::min_separation))
        .fold(f64::INFINITY, f64::min)
}

/// Largest perpendicular distance of an agent's logged track from the line
/// through `start` and `goal`.
pub fn cross_track_deviation(log: &TrajectoryLog, agent: usize, start: Vec2, goal: Vec2) -> f64 {
    let Some(along) = (goal - start).normalized(0.0) else {
        return 0.0;
    };
    log.positions(agent)
        .map(|p| along.cross(p - start).abs())
        .fold(0.0, f64::max)
}

/// Mean absolute heading rate over the steps in which the agent was active.
pub fn heading_jitter(log: &TrajectoryLog, agent: usize) -> f64 {
    let mut total = 0.0;
    let mut count = 0usize;
    for pair in log.steps.windows(2) {
        let (a, b) = (&pair[0].agents[agent], &pair[1].agents[agent]);
        if !a.active {
            break;
        }
        total += b.heading.difference(a.heading).abs() / log.dt;
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        total / count as f64
    }
}

fn path_length(log: &TrajectoryLog, agent: usize) -> f64 {
    log.steps
        .windows(2)
        .map(|w| {
            w[1].agents[agent]
                .position
                .distance(w[0].agents[agent].position)
        })
        .sum()
}

struct Contact {
    agent: usize,
    with: ContactKind,
    index: usize,
}

fn agent_as_obstacle(state: &AgentState, b: f64, radius: f64) -> ObstacleSpec {
    ObstacleSpec {
        position: state.position,
        velocity: state.velocity(),
        b,
        physical_radius: radius,
        kind: ObstacleKind::Agent,
    }
}

fn canonical_order(a: &ObstacleSpec, b: &ObstacleSpec) -> std::cmp::Ordering {
    let key = |o: &ObstacleSpec| {
        [
            o.position.x,
            o.position.y,
            o.velocity.x,
            o.velocity.y,
            o.b,
            o.physical_radius,
        ]
    };
    key(a)
        .iter()
        .zip(key(b).iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Runs a scenario to completion.
pub fn simulate(scenario: &ScenarioConfig, sim: &SimConfig) -> (TrajectoryLog, RunMetrics) {
    let n = scenario.agents.len();
    let gains = &scenario.gains;
    let mut states: Vec<AgentState> = scenario
        .agents
        .iter()
        .map(|a| AgentState::new(a.start, a.initial_heading(), a.speed))
        .collect();
    let mut obstacles = scenario.obstacles.clone();
    let mut active = vec![true; n];
    let mut reached_at: Vec<Option<f64>> = vec![None; n];
    let mut stalled = vec![false; n];
    let mut goal_distance: Vec<Vec<f64>> = vec![Vec::new(); n];
    let stall_steps = (sim.stall_window / sim.dt).round().max(1.0) as usize;
    let mut steps = Vec::new();

    let mut k = 0usize;
    let verdict = loop {
        let t = sim.t_start + k as f64 * sim.dt;

        for (i, agent) in scenario.agents.iter().enumerate() {
            if active[i] && states[i].position.distance(agent.goal) <= sim.goal_radius {
                active[i] = false;
                reached_at[i] = Some(t);
            }
        }

        let mut contact = None;
        let mut records = Vec::with_capacity(n);
        for i in 0..n {
            let state = &states[i];
            let obstacle_separations: Vec<f64> = obstacles
                .iter()
                .map(|o| {
                    if active[i] {
                        state.position.distance(o.position)
                    } else {
                        f64::INFINITY
                    }
                })
                .collect();
            let agent_separations: Vec<f64> = (0..n)
                .map(|j| {
                    if j == i || !active[i] || !active[j] {
                        f64::INFINITY
                    } else {
                        state.position.distance(states[j].position)
                    }
                })
                .collect();

            if contact.is_none() && active[i] {
                let radius = scenario.agents[i].radius;
                contact = obstacle_separations
                    .iter()
                    .zip(&obstacles)
                    .position(|(&d, o)| d < o.physical_radius + radius)
                    .map(|index| Contact {
                        agent: i,
                        with: ContactKind::Obstacle,
                        index,
                    })
                    .or_else(|| {
                        agent_separations
                            .iter()
                            .enumerate()
                            .position(|(j, &d)| d < scenario.agents[j].radius + radius)
                            .map(|index| Contact {
                                agent: i,
                                with: ContactKind::Agent,
                                index,
                            })
                    });
            }

            let (force, cmd_heading) = if active[i] {
                let mut peers: Vec<ObstacleSpec> = (0..n)
                    .filter(|&j| j != i && active[j])
                    .map(|j| {
                        agent_as_obstacle(
                            &states[j],
                            scenario.agent_b[j],
                            scenario.agents[j].radius,
                        )
                    })
                    .collect();
                // Sum peers in a label-free order so relabelling agents is bit-exact.
                peers.sort_by(canonical_order);
                let mut seen = obstacles.clone();
                seen.extend(peers);
                let goal = scenario.agents[i].goal;
                let force = match sim.guidance {
                    Guidance::Proposed => net_force(state, goal, &seen, gains),
                    Guidance::Baseline => baseline_net_force(state, goal, &seen, gains),
                };
                let force = force.unwrap_or(Vec2::ZERO);
                (force, heading_command(force).unwrap_or(state.heading))
            } else {
                (Vec2::ZERO, state.heading)
            };

            records.push(AgentRecord {
                position: state.position,
                heading: state.heading,
                roll: state.roll,
                cmd_heading,
                force,
                obstacle_separations,
                agent_separations,
                active: active[i],
            });
        }

        let mut stall = None;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            let history = &mut goal_distance[i];
            history.push(states[i].position.distance(scenario.agents[i].goal));
            if history.len() > stall_steps {
                let progress =
                    history[history.len() - 1 - stall_steps] - history[history.len() - 1];
                if progress < sim.stall_progress && stall.is_none() {
                    stalled[i] = true;
                    stall = Some(i);
                }
            }
        }

        steps.push(StepRecord { t, agents: records });

        if active.iter().all(|a| !a) {
            break Verdict::Reached;
        }
        if let Some(c) = contact {
            break Verdict::Collision {
                agent: c.agent,
                with: c.with,
                index: c.index,
                t,
            };
        }
        if let Some(agent) = stall {
            break Verdict::Stall { agent, t };
        }
        if t >= sim.t_max {
            break Verdict::Timeout { t };
        }

        let commands: Vec<Angle> = steps[k].agents.iter().map(|r| r.cmd_heading).collect();
        for i in (0..n).filter(|&i| active[i]) {
            states[i] = match sim.mode {
                StepMode::Direct => step_direct(&states[i], commands[i], sim.dt),
                StepMode::Coordinated => {
                    step_coordinated(&states[i], commands[i], &sim.limits, sim.dt)
                }
            };
        }
        for o in obstacles.iter_mut() {
            o.position += o.velocity * sim.dt;
        }
        k += 1;
    };

    let log = TrajectoryLog { dt: sim.dt, steps };
    let agents = (0..n)
        .map(|i| {
            let cfg = &scenario.agents[i];
            let mut min_sep = f64::INFINITY;
            let mut soft_violations = 0;
            let mut max_abs_roll: f64 = 0.0;
            let mut obstacle_clearance = vec![f64::INFINITY; scenario.obstacles.len()];
            let mut agent_clearance = vec![f64::INFINITY; n];
            for step in &log.steps {
                let r = &step.agents[i];
                for (c, d) in obstacle_clearance.iter_mut().zip(&r.obstacle_separations) {
                    *c = c.min(*d);
                }
                for (c, d) in agent_clearance.iter_mut().zip(&r.agent_separations) {
                    *c = c.min(*d);
                }
                min_sep = min_sep.min(r.min_separation());
                max_abs_roll = max_abs_roll.max(r.roll.radians().abs());
                let inside_obstacle = r
                    .obstacle_separations
                    .iter()
                    .zip(&scenario.obstacles)
                    .any(|(&d, o)| d < o.b);
                let inside_agent = r
                    .agent_separations
                    .iter()
                    .zip(&scenario.agent_b)
                    .any(|(&d, &b)| d < b);
                if inside_obstacle || inside_agent {
                    soft_violations += 1;
                }
            }
            AgentMetrics {
                reached_goal: reached_at[i].is_some(),
                time_to_goal: reached_at[i].map(|t| t - sim.t_start),
                min_separation: finite(min_sep),
                obstacle_clearance: obstacle_clearance.into_iter().map(finite).collect(),
                agent_clearance: agent_clearance.into_iter().map(finite).collect(),
                soft_violations,
                max_cross_track: cross_track_deviation(&log, i, cfg.start, cfg.goal),
                path_length: path_length(&log, i),
                heading_jitter: heading_jitter(&log, i),
                max_abs_roll,
                stalled: stalled[i],
            }
        })
        .collect();
    let metrics = RunMetrics {
        verdict,
        t_end: log.steps.last().map_or(sim.t_start, |s| s.t),
        steps: log.steps.len(),
        agents,
    };
    (log, metrics)
}

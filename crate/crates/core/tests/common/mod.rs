#![allow(dead_code)]

use apf_guidance::geometry::rotate;
use apf_guidance::scenario::{builtin_scenarios, AgentConfig, BUILTIN_ATTRACTION_SATURATION};
use apf_guidance::{Angle, FieldGains, ScenarioConfig, StepMode, Vec2};

pub fn builtin(name: &str) -> ScenarioConfig {
    builtin_scenarios()
        .into_iter()
        .find(|s| s.name == name)
        .unwrap_or_else(|| panic!("no builtin {name}"))
}

pub fn tuned_gains() -> FieldGains {
    FieldGains {
        attraction_saturation: Some(BUILTIN_ATTRACTION_SATURATION),
        ..FieldGains::default()
    }
}

pub fn single_agent(start: Vec2, goal: Vec2) -> ScenarioConfig {
    ScenarioConfig {
        name: "single".into(),
        description: String::new(),
        invented: true,
        frame: "ENU".into(),
        mode: StepMode::Direct,
        agents: vec![AgentConfig::new(start, goal, 15.0)],
        obstacles: Vec::new(),
        gains: tuned_gains(),
        agent_b: vec![30.0],
    }
}

/// `count` agents evenly spaced on a circle, each flying to the antipode.
pub fn converging_ring(count: usize, radius: f64) -> ScenarioConfig {
    let centre = Vec2::new(400.0, 400.0);
    let agents = (0..count)
        .map(|i| {
            let phi = 2.0 * std::f64::consts::PI * i as f64 / count as f64;
            let offset = Vec2::from_angle(Angle::new(phi)) * radius;
            AgentConfig::new(centre + offset, centre - offset, 15.0)
        })
        .collect();
    ScenarioConfig {
        name: format!("ring_{count}"),
        description: String::new(),
        invented: true,
        frame: "ENU".into(),
        mode: StepMode::Direct,
        agents,
        obstacles: Vec::new(),
        gains: tuned_gains(),
        agent_b: vec![30.0; count],
    }
}

/// Rigidly rotates a scenario about the origin.
pub fn rotate_scenario(scenario: &ScenarioConfig, alpha: f64) -> ScenarioConfig {
    let r = Angle::new(alpha);
    let mut out = scenario.clone();
    for a in out.agents.iter_mut() {
        let heading = a.initial_heading();
        a.start = rotate(a.start, r);
        a.goal = rotate(a.goal, r);
        a.initial_heading = Some((heading + alpha).degrees());
    }
    for o in out.obstacles.iter_mut() {
        o.position = rotate(o.position, r);
        o.velocity = rotate(o.velocity, r);
    }
    out
}

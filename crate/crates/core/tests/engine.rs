mod common;

use apf_guidance::engine::{
    cross_track_deviation, heading_jitter, min_separation, AgentRecord, ContactKind, StepRecord,
};
use apf_guidance::scenario::AgentConfig;
use apf_guidance::vehicle::{integrate_turn, AgentState};
use apf_guidance::{
    simulate, Angle, ObstacleSpec, SimConfig, StepMode, TrajectoryLog, Vec2, Verdict,
};

use common::{builtin, single_agent};

fn record(position: Vec2, heading: f64, active: bool) -> AgentRecord {
    AgentRecord {
        position,
        heading: Angle::new(heading),
        roll: Angle::ZERO,
        cmd_heading: Angle::new(heading),
        force: Vec2::ZERO,
        obstacle_separations: Vec::new(),
        agent_separations: Vec::new(),
        active,
    }
}

#[test]
fn repeated_runs_are_identical() {
    for scenario in apf_guidance::builtin_scenarios() {
        let sim = SimConfig::for_scenario(&scenario);
        assert_eq!(
            simulate(&scenario, &sim),
            simulate(&scenario, &sim),
            "{}",
            scenario.name
        );
    }
}

#[test]
fn agent_order_does_not_matter() {
    let scenario = builtin("four_agent_swap");
    let order = [2usize, 0, 3, 1];
    let mut permuted = scenario.clone();
    permuted.agents = order.iter().map(|&i| scenario.agents[i].clone()).collect();
    permuted.agent_b = order.iter().map(|&i| scenario.agent_b[i]).collect();
    let sim = SimConfig::for_scenario(&scenario);
    let (a, ma) = simulate(&scenario, &sim);
    let (b, mb) = simulate(&permuted, &sim);
    assert_eq!(a.steps.len(), b.steps.len());
    assert_eq!(ma.verdict, mb.verdict);
    for (x, y) in a.steps.iter().zip(&b.steps) {
        for (slot, &i) in order.iter().enumerate() {
            assert_eq!(
                x.agents[i].position, y.agents[slot].position,
                "t={} agent {i}",
                x.t
            );
        }
    }
}

#[test]
fn start_time_only_shifts_the_clock() {
    let scenario = builtin("urban_dynamic");
    let sim = SimConfig::for_scenario(&scenario);
    let shift = 37.5;
    let shifted = SimConfig {
        t_start: -shift,
        t_max: sim.t_max - shift,
        ..sim
    };
    let (a, ma) = simulate(&scenario, &sim);
    let (b, mb) = simulate(&scenario, &shifted);
    assert_eq!(a.steps.len(), b.steps.len());
    for (x, y) in a.steps.iter().zip(&b.steps) {
        assert!((x.t - (y.t + shift)).abs() < 1e-9);
        assert_eq!(x.agents, y.agents);
    }
    assert_eq!(ma.agents[0].time_to_goal, mb.agents[0].time_to_goal);
}

#[test]
fn straight_flight_without_obstacles() {
    let scenario = single_agent(Vec2::ZERO, Vec2::new(600.0, 0.0));
    let (log, metrics) = simulate(&scenario, &SimConfig::default());
    assert_eq!(metrics.verdict, Verdict::Reached);
    for p in log.positions(0) {
        assert!(p.y.abs() < 1e-9);
    }
    let t = metrics.agents[0].time_to_goal.unwrap();
    // 590 m at 15 m/s, rounded up to the step.
    assert!((t - 39.35).abs() < 0.051, "{t}");
    assert_eq!(metrics.agents[0].max_cross_track, 0.0);
    assert_eq!(metrics.agents[0].min_separation, None);
}

#[test]
fn obstacle_astern_changes_nothing() {
    let free = single_agent(Vec2::ZERO, Vec2::new(700.0, 0.0));
    let mut astern = free.clone();
    astern
        .obstacles
        .push(ObstacleSpec::fixed(Vec2::new(-80.0, 0.0), 30.0));
    let sim = SimConfig::default();
    let (a, _) = simulate(&free, &sim);
    let (b, _) = simulate(&astern, &sim);
    assert_eq!(a.steps.len(), b.steps.len());
    for (x, y) in a.steps.iter().zip(&b.steps) {
        assert!(x.agents[0].position.distance(y.agents[0].position) <= 1e-9);
    }
}

#[test]
fn min_separation_matches_exhaustive_scan() {
    let scenario = builtin("four_agent_swap");
    let (log, metrics) = simulate(&scenario, &SimConfig::for_scenario(&scenario));
    let mut scan = f64::INFINITY;
    for step in &log.steps {
        for i in 0..4 {
            for j in (i + 1)..4 {
                if step.agents[i].active && step.agents[j].active {
                    scan = scan.min(step.agents[i].position.distance(step.agents[j].position));
                }
            }
        }
    }
    assert_eq!(min_separation(&log), scan);
    assert_eq!(metrics.min_separation(), Some(scan));
}

#[test]
fn min_separation_of_parked_pair() {
    let mut scenario = single_agent(Vec2::ZERO, Vec2::new(1000.0, 0.0));
    scenario.agents[0].speed = 0.0;
    let mut other = AgentConfig::new(Vec2::new(0.0, 50.0), Vec2::new(1000.0, 50.0), 0.0);
    other.radius = 1.0;
    scenario.agents.push(other);
    scenario.agent_b.push(30.0);
    let sim = SimConfig {
        t_max: 1.0,
        ..SimConfig::default()
    };
    let (log, _) = simulate(&scenario, &sim);
    assert_eq!(min_separation(&log), 50.0);

    let alone = single_agent(Vec2::ZERO, Vec2::new(1000.0, 0.0));
    let (log, _) = simulate(&alone, &sim);
    assert_eq!(min_separation(&log), f64::INFINITY);
}

#[test]
fn cross_track_examples() {
    let log = TrajectoryLog {
        dt: 1.0,
        steps: [(0.0, 0.0), (50.0, 12.0), (100.0, -20.0), (200.0, 0.0)]
            .iter()
            .enumerate()
            .map(|(k, &(x, y))| StepRecord {
                t: k as f64,
                agents: vec![record(Vec2::new(x, y), 0.0, true)],
            })
            .collect(),
    };
    assert_eq!(
        cross_track_deviation(&log, 0, Vec2::ZERO, Vec2::new(200.0, 0.0)),
        20.0
    );
    // Against y = x the farthest sample is (200, 0).
    let d = cross_track_deviation(&log, 0, Vec2::ZERO, Vec2::new(100.0, 100.0));
    assert!((d - 200.0 / 2f64.sqrt()).abs() < 1e-9, "{d}");
}

#[test]
fn jitter_of_steady_turn_is_turn_rate() {
    let roll = 45f64.to_radians();
    let dt = 0.05;
    let mut state = AgentState::new(Vec2::ZERO, Angle::ZERO, 15.0);
    let mut steps = Vec::new();
    for k in 0..400 {
        steps.push(StepRecord {
            t: k as f64 * dt,
            agents: vec![record(state.position, state.heading.radians(), true)],
        });
        state = integrate_turn(&state, roll, 9.81, dt);
    }
    let log = TrajectoryLog { dt, steps };
    let j = heading_jitter(&log, 0);
    assert!((j - 0.654).abs() / 0.654 < 0.01, "{j}");
}

#[test]
fn jitter_ignores_retired_steps() {
    let headings = [(0.0, true), (0.1, true), (0.2, false), (3.0, false)];
    let log = TrajectoryLog {
        dt: 0.5,
        steps: headings
            .iter()
            .enumerate()
            .map(|(k, &(h, active))| StepRecord {
                t: k as f64,
                agents: vec![record(Vec2::ZERO, h, active)],
            })
            .collect(),
    };
    assert!((heading_jitter(&log, 0) - 0.2).abs() < 1e-12);
}

#[test]
fn collision_verdict() {
    let mut scenario = builtin("head_on");
    scenario.gains.k_rep0 = 0.0;
    let (log, metrics) = simulate(&scenario, &SimConfig::for_scenario(&scenario));
    match metrics.verdict {
        Verdict::Collision {
            agent: 0,
            with: ContactKind::Obstacle,
            index: 0,
            t,
        } => {
            assert_eq!(t, log.steps.last().unwrap().t);
        }
        other => panic!("{other:?}"),
    }
    let last = &log.steps.last().unwrap().agents[0];
    assert!(last.obstacle_separations[0] < 11.0);
}

#[test]
fn agents_collide_with_each_other() {
    let mut scenario = single_agent(Vec2::ZERO, Vec2::new(400.0, 0.0));
    scenario
        .agents
        .push(AgentConfig::new(Vec2::new(400.0, 0.0), Vec2::ZERO, 15.0));
    scenario.agent_b = vec![30.0, 30.0];
    scenario.gains.k_rep0 = 0.0;
    let (_, metrics) = simulate(&scenario, &SimConfig::default());
    assert!(
        matches!(
            metrics.verdict,
            Verdict::Collision {
                with: ContactKind::Agent,
                ..
            }
        ),
        "{:?}",
        metrics.verdict
    );
}

#[test]
fn stall_verdict_after_window() {
    let mut scenario = single_agent(Vec2::ZERO, Vec2::new(500.0, 0.0));
    scenario.agents[0].speed = 0.0;
    let (_, metrics) = simulate(&scenario, &SimConfig::default());
    match metrics.verdict {
        Verdict::Stall { agent: 0, t } => assert!((t - 20.0).abs() < 1e-9, "{t}"),
        other => panic!("{other:?}"),
    }
    assert!(metrics.agents[0].stalled);
}

#[test]
fn timeout_verdict() {
    let scenario = single_agent(Vec2::ZERO, Vec2::new(5000.0, 0.0));
    let sim = SimConfig {
        t_max: 10.0,
        ..SimConfig::default()
    };
    let (log, metrics) = simulate(&scenario, &sim);
    assert!(matches!(metrics.verdict, Verdict::Timeout { t } if (t - 10.0).abs() < 1e-9));
    assert_eq!(log.steps.len(), 201);
    assert!(!metrics.all_reached());
}

#[test]
fn coordinated_agent_turns_around() {
    let mut scenario = single_agent(Vec2::ZERO, Vec2::new(600.0, 0.0));
    scenario.mode = StepMode::Coordinated;
    scenario.agents[0].initial_heading = Some(180.0);
    let sim = SimConfig::for_scenario(&scenario);
    let (log, metrics) = simulate(&scenario, &sim);
    assert_eq!(metrics.verdict, Verdict::Reached);
    assert!(metrics.agents[0].max_abs_roll <= sim.limits.roll_limit);
    assert!(metrics.agents[0].max_abs_roll > 0.7);
    let end = log.steps.last().unwrap().agents[0].position;
    assert!(end.distance(Vec2::new(600.0, 0.0)) <= sim.goal_radius);
}

#[test]
fn retired_agent_is_not_an_obstacle() {
    let scenario = builtin("four_agent_swap");
    let (log, _) = simulate(&scenario, &SimConfig::for_scenario(&scenario));
    for step in &log.steps {
        for (i, r) in step.agents.iter().enumerate() {
            for (j, d) in r.agent_separations.iter().enumerate() {
                if i == j || !r.active || !step.agents[j].active {
                    assert_eq!(*d, f64::INFINITY);
                }
            }
        }
    }
}

//! Plan execution: the WET robot's mission controller plus the other agents.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::rvo::{candidate_ttc, noncooperative_ttc, rvo_velocity, rvo_velocity_by, RvoParams};
use super::trace::{Collision, EdgeTraversal, Sample, SimTrace};
use super::world::{drive_axis, step, AgentKind, AgentState, ChargingModel, Command, Controller, WorldState, WorldView};
use crate::error::{Error, Result};
use crate::models::geometry::angle_diff_deg;
use crate::models::{Position2D, Vec2};
use crate::planner::Plan;
use crate::scenario::{Arena, Scenario};

/// Simulator knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub dt: f64,
    /// Distance at which an anchor counts as reached, meters.
    pub arrival_tolerance: f64,
    /// Largest heading error at which the robot still drives, degrees.
    pub align_tolerance_deg: f64,
    /// Only agents within this clearance are considered by the local planner, meters.
    pub sense_range: f64,
    pub emergency_stop: bool,
    /// Halt if the chosen velocity would hit a noncooperative agent sooner than this.
    pub estop_ttc_s: f64,
    /// Give up after this multiple of the planned mission time.
    pub dnf_factor: f64,
    /// Lower bound on the give-up time, seconds.
    pub dnf_floor_s: f64,
    /// Record every n-th step.
    pub sample_stride: usize,
    /// Extra cost of a 90 degree turn when picking an evasive velocity, in units of max speed.
    pub turn_cost: f64,
    pub rvo: RvoParams,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            arrival_tolerance: 0.1,
            align_tolerance_deg: 5.0,
            sense_range: 4.0,
            emergency_stop: true,
            estop_ttc_s: 1.0,
            dnf_factor: 10.0,
            dnf_floor_s: 60.0,
            sample_stride: 1,
            turn_cost: 0.5,
            rvo: RvoParams::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.dt > 0.0
            && self.dt <= 0.2
            && self.arrival_tolerance > 0.0
            && self.align_tolerance_deg >= 0.0
            && self.align_tolerance_deg < 90.0
            && self.sense_range > 0.0
            && self.estop_ttc_s >= 0.0
            && self.dnf_factor >= 1.0
            && self.dnf_floor_s >= 0.0
            && self.sample_stride >= 1
            && self.turn_cost >= 0.0
            && self.rvo.samples >= 6
            && self.rvo.horizon_s > 0.0
            && self.rvo.safety_margin >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid simulator settings: {self:?}")))
        }
    }
}

/// Agents within `range` clearance of agent `me`.
fn neighbors(agents: &[AgentState], me: usize, range: f64) -> Vec<AgentState> {
    let a = &agents[me];
    agents
        .iter()
        .enumerate()
        .filter(|&(i, o)| i != me && o.position.distance(a.position) - o.radius - a.radius <= range)
        .map(|(_, o)| *o)
        .collect()
}

/// Velocity that heads for `target`, landing exactly on it when within one step.
fn seek(pos: Position2D, target: Position2D, max_speed: f64, dt: f64) -> Vec2 {
    let d = target - pos;
    let dist = d.norm();
    if dist <= 0.0 {
        return Vec2::ZERO;
    }
    d * (max_speed.min(dist / dt) / dist)
}

#[derive(Debug, Clone)]
struct Waypoint {
    position: Position2D,
    anchor: Option<usize>,
    /// (beam, steps) pairs in codebook order.
    dwell: Vec<(usize, u64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Travel,
    Settle,
    Charge { item: usize, left: u64 },
    Done,
}

/// Drives the WET robot through a plan.
pub struct MissionController {
    waypoints: Vec<Waypoint>,
    current: usize,
    phase: Phase,
    departed_at: f64,
    dt: f64,
    angular_speed: f64,
    cfg: SimConfig,
    beam_centers: Vec<f64>,
    pub edges: Vec<EdgeTraversal>,
    pub completion_s: Option<f64>,
    pub estop_steps: usize,
    pub charge_steps: u64,
}

impl MissionController {
    fn new(waypoints: Vec<Waypoint>, beam_centers: Vec<f64>, angular_speed: f64, cfg: SimConfig) -> Self {
        let phase = if waypoints.is_empty() { Phase::Done } else { Phase::Travel };
        Self {
            completion_s: if waypoints.is_empty() { Some(0.0) } else { None },
            waypoints,
            current: 0,
            phase,
            departed_at: 0.0,
            dt: cfg.dt,
            angular_speed,
            cfg,
            beam_centers,
            edges: Vec::new(),
            estop_steps: 0,
            charge_steps: 0,
        }
    }

    pub fn done(&self) -> bool {
        self.phase == Phase::Done
    }

    fn depart(&mut self, now: f64) {
        self.current += 1;
        self.departed_at = now;
        self.phase = Phase::Travel;
    }

    fn start_dwell(&mut self, now: f64) {
        self.phase = match self.waypoints[self.current].dwell.first() {
            Some(&(_, left)) => Phase::Charge { item: 0, left },
            None => {
                self.depart(now);
                return;
            }
        };
    }

    /// RVO plus emergency stop around a preferred velocity.
    ///
    /// When evading, candidates that need less turning rank higher, so the
    /// robot commits to a direction it can drive now instead of dithering.
    fn safe_velocity(&mut self, me: &AgentState, near: &[AgentState], preferred: Vec2) -> Vec2 {
        let p = preferred.clamp_norm(me.max_speed);
        let weight = self.cfg.turn_cost * me.max_speed / 90.0;
        let heading = me.heading_deg;
        let turn = |v: Vec2| {
            if v.norm() > 1e-12 {
                angle_diff_deg(heading, drive_axis(heading, v.angle_deg())).abs()
            } else {
                0.0
            }
        };
        // turning happens in place, so a candidate only starts moving once aligned
        let (omega, tol, dt) = (self.angular_speed, self.cfg.align_tolerance_deg, self.dt);
        let delay = |v: Vec2| ((turn(v) - tol).max(0.0) / (omega * dt)).ceil() * dt;
        let mut v = rvo_velocity_by(me, near, preferred, me.max_speed, &self.cfg.rvo, delay, |v| {
            (v - p).norm() + weight * turn(v)
        });
        if self.cfg.emergency_stop && v != Vec2::ZERO {
            let ttc = noncooperative_ttc(me, near, v, &self.cfg.rvo);
            if ttc < self.cfg.estop_ttc_s && noncooperative_ttc(me, near, Vec2::ZERO, &self.cfg.rvo) >= self.cfg.estop_ttc_s {
                v = Vec2::ZERO;
                self.estop_steps += 1;
            }
        }
        v
    }

    /// Whether standing still at `q` is clear of everybody for the RVO horizon.
    fn can_park_at(&self, me: &AgentState, near: &[AgentState], q: Position2D) -> bool {
        let parked = AgentState {
            position: q,
            velocity: Vec2::ZERO,
            ..*me
        };
        near.iter()
            .all(|o| candidate_ttc(&parked, o, Vec2::ZERO, &self.cfg.rvo) > self.cfg.rvo.horizon_s)
    }

    fn goto(&mut self, me: &AgentState, near: &[AgentState], target: Position2D) -> Command {
        // the velocity model assumes we keep going; near the target we stop there instead
        let close = me.position.distance(target) <= 2.0 * me.radius;
        let preferred = if close && !self.can_park_at(me, near, target) {
            Vec2::ZERO
        } else {
            seek(me.position, target, me.max_speed, self.dt)
        };
        let v = self.safe_velocity(me, near, preferred);
        let dock = (v == preferred && me.position.distance(target) <= me.max_speed * self.dt).then_some(target);
        Command {
            velocity: v,
            dock,
            ..Default::default()
        }
    }
}

impl Controller for MissionController {
    fn command(&mut self, me: usize, view: &WorldView<'_>, _rng: &mut ChaCha8Rng) -> Command {
        let now = view.time;
        let agent = &view.agents[me];
        let near = neighbors(view.agents, me, self.cfg.sense_range);
        // phase transitions triggered by the current state
        loop {
            match self.phase {
                Phase::Done => break,
                Phase::Travel => {
                    let wp = &self.waypoints[self.current];
                    if agent.position.distance(wp.position) > self.cfg.arrival_tolerance {
                        break;
                    }
                    if let (Some(to), Some(prev)) = (wp.anchor, self.current.checked_sub(1)) {
                        if let Some(from) = self.waypoints[prev].anchor {
                            self.edges.push(EdgeTraversal {
                                from,
                                to,
                                depart_s: self.departed_at,
                                arrive_s: now,
                            });
                        }
                    }
                    self.phase = Phase::Settle;
                }
                Phase::Settle => {
                    if agent.position != self.waypoints[self.current].position {
                        break;
                    }
                    // the mission ends parked on the start pose, not near it
                    if self.current + 1 == self.waypoints.len() {
                        self.completion_s = Some(now);
                        self.phase = Phase::Done;
                    } else {
                        self.start_dwell(now);
                    }
                }
                Phase::Charge { item, left } => {
                    if left > 0 {
                        break;
                    }
                    let wp = &self.waypoints[self.current];
                    match wp.dwell.get(item + 1) {
                        Some(&(_, steps)) => self.phase = Phase::Charge { item: item + 1, left: steps },
                        None => self.depart(now),
                    }
                }
            }
        }
        match self.phase {
            Phase::Done => {
                let v = self.safe_velocity(agent, &near, Vec2::ZERO);
                Command {
                    velocity: v,
                    ..Default::default()
                }
            }
            Phase::Travel | Phase::Settle => {
                let target = self.waypoints[self.current].position;
                self.goto(agent, &near, target)
            }
            Phase::Charge { item, left } => {
                let wp = &self.waypoints[self.current];
                let target = wp.position;
                if agent.position != target {
                    return self.goto(agent, &near, target);
                }
                let beam = wp.dwell[item].0;
                let center = self.beam_centers[beam];
                let v = self.safe_velocity(agent, &near, Vec2::ZERO);
                if v != Vec2::ZERO {
                    return Command {
                        velocity: v,
                        ..Default::default()
                    };
                }
                let aligned = angle_diff_deg(agent.heading_deg, center).abs() <= 1e-9;
                if aligned {
                    self.phase = Phase::Charge { item, left: left - 1 };
                    self.charge_steps += 1;
                }
                Command {
                    heading_deg: Some(center),
                    charge_beam: aligned.then_some(beam),
                    ..Default::default()
                }
            }
        }
    }
}

/// Random-waypoint wanderer that ignores everybody.
pub struct WanderController {
    arena: Arena,
    margin: f64,
    speed: f64,
    dt: f64,
    target: Option<Position2D>,
}

impl WanderController {
    pub fn new(arena: Arena, margin: f64, speed: f64, dt: f64) -> Self {
        Self {
            arena,
            margin,
            speed,
            dt,
            target: None,
        }
    }
}

impl Controller for WanderController {
    fn command(&mut self, me: usize, view: &WorldView<'_>, rng: &mut ChaCha8Rng) -> Command {
        let pos = view.agents[me].position;
        let reached = self.target.is_none_or(|t| t.distance(pos) <= self.speed * self.dt);
        if reached {
            self.target = Some(self.arena.sample(rng, self.margin));
        }
        let t = self.target.unwrap_or(pos);
        Command {
            velocity: seek(pos, t, self.speed, self.dt),
            ..Default::default()
        }
    }
}

/// Goal seeker that avoids others with RVO.
pub struct CooperativeController {
    pub goal: Position2D,
    pub cfg: SimConfig,
}

impl Controller for CooperativeController {
    fn command(&mut self, me: usize, view: &WorldView<'_>, _rng: &mut ChaCha8Rng) -> Command {
        let a = &view.agents[me];
        let near = neighbors(view.agents, me, self.cfg.sense_range);
        let preferred = seek(a.position, self.goal, a.max_speed, self.cfg.dt);
        Command {
            velocity: rvo_velocity(a, &near, preferred, a.max_speed, &self.cfg.rvo),
            ..Default::default()
        }
    }
}

/// Records collision onsets: pairs that start overlapping this step.
pub(crate) struct CollisionMonitor {
    touching: Vec<Vec<bool>>,
}

impl CollisionMonitor {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            touching: vec![vec![false; n]; n],
        }
    }

    pub(crate) fn check(&mut self, time: f64, agents: &[AgentState], out: &mut Vec<Collision>) {
        for i in 0..agents.len() {
            for j in i + 1..agents.len() {
                let d = agents[i].position.distance(agents[j].position);
                let hit = d < agents[i].radius + agents[j].radius;
                if hit && !self.touching[i][j] {
                    out.push(Collision {
                        time,
                        a: i,
                        b: j,
                        distance: d,
                    });
                }
                self.touching[i][j] = hit;
            }
        }
    }
}

fn snapshot(world: &WorldState) -> Sample {
    Sample {
        time: world.time,
        agents: world.agents.iter().map(|a| (a.position, a.heading_deg, a.velocity)).collect(),
        harvested_j: world.harvested_j.clone(),
    }
}

/// Places `count` movers uniformly in the arena, away from the robot and each other.
fn place_movers(
    arena: &Arena,
    count: usize,
    radius: f64,
    keep_clear: &[(Position2D, f64)],
    rng: &mut ChaCha8Rng,
) -> Vec<Position2D> {
    let mut out: Vec<Position2D> = Vec::with_capacity(count);
    for _ in 0..count {
        let mut p = arena.sample(rng, radius);
        for _ in 0..1000 {
            let clear = keep_clear.iter().all(|&(c, r)| c.distance(p) > r + radius)
                && out.iter().all(|&o| o.distance(p) > 2.0 * radius + 0.1);
            if clear {
                break;
            }
            p = arena.sample(rng, radius);
        }
        out.push(p);
    }
    out
}

/// Straight-line time from the start pose to the first anchor and back.
pub fn home_legs_s(plan: &Plan, scenario: &Scenario) -> f64 {
    plan.tour.first().map_or(0.0, |&d| {
        2.0 * plan.anchors[d].position.distance(scenario.robot.start) / scenario.robot.linear_speed
    })
}

/// Driving time the model predicts for the whole mission: the ring plus both home legs.
pub fn ideal_motion_s(plan: &Plan, scenario: &Scenario) -> f64 {
    plan.motion_s + home_legs_s(plan, scenario)
}

/// Dwell steps for `t` seconds: whole steps, rounded up, with exact multiples
/// of `dt` kept exact despite division noise.
fn dwell_steps(t: f64, dt: f64) -> u64 {
    (t / dt - 1e-9).ceil().max(0.0) as u64
}

/// Executes `plan` in the scenario's world.
///
/// The robot drives from its start pose to the first anchor of the tour,
/// charges there, visits the rest of the ring, closes the ring and returns to
/// its start pose. Noncooperative movers wander the arena, seeded by `seed`.
pub fn run_mission(plan: &Plan, scenario: &Scenario, seed: u64, dt: f64) -> Result<SimTrace> {
    let mut cfg = scenario.sim;
    cfg.dt = dt;
    cfg.validate()?;
    plan.validate_structure()?;
    if plan.schedule.beams() != scenario.codebook.len() {
        return Err(Error::DimensionMismatch {
            expected: scenario.codebook.len(),
            got: plan.schedule.beams(),
        });
    }
    let robot = &scenario.robot;
    let start = robot.start;
    let anchors = &plan.anchors;

    let mut waypoints = Vec::new();
    let visit = |m: usize| Waypoint {
        position: anchors[m].position,
        anchor: Some(m),
        dwell: (0..plan.schedule.beams())
            .filter(|&n| plan.schedule.t[n][m] > 0.0)
            .map(|n| (n, dwell_steps(plan.schedule.t[n][m], dt)))
            .collect(),
    };
    if let Some(&depot) = plan.tour.first() {
        waypoints.extend(plan.tour.iter().map(|&m| visit(m)));
        if plan.tour.len() > 1 {
            waypoints.push(Waypoint {
                dwell: Vec::new(),
                ..visit(depot)
            });
        }
        waypoints.push(Waypoint {
            position: start,
            anchor: None,
            dwell: Vec::new(),
        });
    }
    let budget = (cfg.dnf_factor * (plan.planned_completion_s + home_legs_s(plan, scenario))).max(cfg.dnf_floor_s);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let obstacles = &scenario.obstacles;
    let mut keep_clear = vec![(start, robot.body_radius + 0.5)];
    keep_clear.extend(anchors.iter().map(|a| (a.position, robot.body_radius + 0.2)));
    let movers = place_movers(&scenario.arena, obstacles.count, obstacles.radius, &keep_clear, &mut rng);

    let mut agents = vec![AgentState::new(
        start,
        robot.heading_deg,
        robot.body_radius,
        robot.linear_speed,
        AgentKind::WetRobot,
    )];
    agents.extend(
        movers
            .iter()
            .map(|&p| AgentState::new(p, 0.0, obstacles.radius, obstacles.speed, AgentKind::Noncooperative)),
    );
    let k = scenario.ehs.len();
    let mut world = WorldState {
        time: 0.0,
        agents,
        ehs: scenario.ehs.clone(),
        harvested_j: vec![0.0; k],
        rng,
        charging: ChargingModel {
            codebook: scenario.codebook.clone(),
            channel: scenario.channel,
            harvest: scenario.harvest,
        },
        angular_speed: robot.angular_speed,
        align_tolerance_deg: cfg.align_tolerance_deg,
    };

    let centers = scenario.codebook.sectors.iter().map(|s| s.center_deg()).collect();
    let mut mission = MissionController::new(waypoints, centers, robot.angular_speed, cfg);
    let mut movers: Vec<WanderController> = (0..obstacles.count)
        .map(|_| WanderController::new(scenario.arena, obstacles.radius, obstacles.speed, dt))
        .collect();

    let mut trace = SimTrace::new(&world, scenario.ehs.iter().map(|e| e.requirement_j).collect());
    let mut monitor = CollisionMonitor::new(world.agents.len());
    monitor.check(world.time, &world.agents, &mut trace.collisions);
    trace.samples.push(snapshot(&world));
    let mut steps: u64 = 0;
    while !mission.done() && world.time <= budget {
        let mut controllers: Vec<&mut dyn Controller> = Vec::with_capacity(world.agents.len());
        controllers.push(&mut mission);
        controllers.extend(movers.iter_mut().map(|m| m as &mut dyn Controller));
        step(&mut world, dt, &mut controllers)?;
        steps += 1;
        monitor.check(world.time, &world.agents, &mut trace.collisions);
        if steps.is_multiple_of(cfg.sample_stride as u64) {
            trace.samples.push(snapshot(&world));
        }
    }
    if !steps.is_multiple_of(cfg.sample_stride as u64) {
        trace.samples.push(snapshot(&world));
    }
    trace.completion_s = mission.completion_s;
    for e in &mission.edges {
        trace.edge_times.entry((e.from, e.to)).or_insert(e.arrive_s - e.depart_s);
    }
    trace.edge_log = mission.edges;
    trace.estop_steps = mission.estop_steps;
    trace.charging_s = mission.charge_steps as f64 * dt;
    trace.harvested_j = world.harvested_j.clone();
    trace.end_time_s = world.time;
    Ok(trace)
}

/// Agents swapping places across a circle, all running RVO.
///
/// Start positions are jittered by up to 0.2 m from `seed`. Returns the trace
/// once everybody is within `arrival_tolerance` of its goal or `max_time_s` passes.
pub fn run_crossing(agents: usize, circle_radius: f64, seed: u64, cfg: &SimConfig, max_time_s: f64) -> Result<SimTrace> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut states = Vec::with_capacity(agents);
    let mut controllers: Vec<CooperativeController> = Vec::with_capacity(agents);
    for i in 0..agents {
        let ang = 360.0 * i as f64 / agents as f64;
        let jitter = Vec2::new(rng.gen_range(-0.2..=0.2), rng.gen_range(-0.2..=0.2));
        let p = Vec2::from_angle_deg(ang) * circle_radius + jitter;
        let goal = Vec2::from_angle_deg(ang) * -circle_radius;
        states.push(AgentState::new(p, ang + 180.0, 0.18, 0.2, AgentKind::Cooperative));
        controllers.push(CooperativeController { goal, cfg: *cfg });
    }
    let goals: Vec<Position2D> = (0..agents)
        .map(|i| Vec2::from_angle_deg(360.0 * i as f64 / agents as f64) * -circle_radius)
        .collect();
    let mut world = WorldState {
        time: 0.0,
        agents: states,
        ehs: Vec::new(),
        harvested_j: Vec::new(),
        rng,
        charging: ChargingModel {
            codebook: crate::models::Codebook::omni(),
            channel: Default::default(),
            harvest: Default::default(),
        },
        angular_speed: 90.0,
        align_tolerance_deg: cfg.align_tolerance_deg,
    };
    let mut trace = SimTrace::new(&world, Vec::new());
    let mut monitor = CollisionMonitor::new(agents);
    trace.samples.push(snapshot(&world));
    while world.time <= max_time_s {
        let arrived = world
            .agents
            .iter()
            .zip(&goals)
            .all(|(a, g)| a.position.distance(*g) <= cfg.arrival_tolerance);
        if arrived {
            trace.completion_s = Some(world.time);
            break;
        }
        let mut refs: Vec<&mut dyn Controller> = controllers.iter_mut().map(|c| c as &mut dyn Controller).collect();
        step(&mut world, cfg.dt, &mut refs)?;
        monitor.check(world.time, &world.agents, &mut trace.collisions);
        trace.samples.push(snapshot(&world));
    }
    trace.end_time_s = world.time;
    Ok(trace)
}

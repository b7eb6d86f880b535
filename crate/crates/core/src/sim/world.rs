//! World state and fixed-step integration.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::geometry::angle_diff_deg;
use crate::models::{
    harvested_power_w, received_power_w, ChannelParams, Codebook, EnergyHarvester, HarvestParams, Position2D, Vec2,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    /// Differential drive: turns in place, translates along its heading axis.
    WetRobot,
    /// Holonomic and oblivious to everybody else.
    Noncooperative,
    /// Holonomic and shares avoidance effort.
    Cooperative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub position: Position2D,
    pub heading_deg: f64,
    pub velocity: Vec2,
    pub radius: f64,
    pub max_speed: f64,
    pub kind: AgentKind,
}

impl AgentState {
    pub fn new(position: Position2D, heading_deg: f64, radius: f64, max_speed: f64, kind: AgentKind) -> Self {
        Self {
            position,
            heading_deg,
            velocity: Vec2::ZERO,
            radius,
            max_speed,
            kind,
        }
    }
}

/// What the WET robot radiates with and what the harvesters do with it.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargingModel {
    pub codebook: Codebook,
    pub channel: ChannelParams,
    pub harvest: HarvestParams,
}

#[derive(Debug, Clone)]
pub struct WorldState {
    pub time: f64,
    pub agents: Vec<AgentState>,
    pub ehs: Vec<EnergyHarvester>,
    pub harvested_j: Vec<f64>,
    pub rng: ChaCha8Rng,
    pub charging: ChargingModel,
    /// Turn rate of differential-drive agents, deg/s.
    pub angular_speed: f64,
    /// Largest heading error at which a differential-drive agent still translates, degrees.
    pub align_tolerance_deg: f64,
}

/// One agent's wishes for the coming step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Command {
    pub velocity: Vec2,
    /// Heading to turn toward when not translating.
    pub heading_deg: Option<f64>,
    /// Land exactly here if the point is reachable this step.
    pub dock: Option<Position2D>,
    /// Radiate on this codebook beam if stationary and aligned with its center.
    pub charge_beam: Option<usize>,
}

/// Read-only view handed to controllers.
pub struct WorldView<'a> {
    pub time: f64,
    pub agents: &'a [AgentState],
}

pub trait Controller {
    fn command(&mut self, me: usize, view: &WorldView<'_>, rng: &mut ChaCha8Rng) -> Command;
}

/// Heading reached after turning from `from` toward `to` for at most `max_turn` degrees.
pub(crate) fn turn_toward(from: f64, to: f64, max_turn: f64) -> f64 {
    let err = angle_diff_deg(from, to);
    if err.abs() <= max_turn {
        crate::models::geometry::normalize_deg(to)
    } else {
        crate::models::geometry::normalize_deg(from + max_turn * err.signum())
    }
}

/// Heading that needs the least turning to drive along `dir`, forward or reversed.
pub(crate) fn drive_axis(heading: f64, dir_deg: f64) -> f64 {
    if angle_diff_deg(dir_deg, heading).abs() <= 90.0 {
        dir_deg
    } else {
        dir_deg + 180.0
    }
}

/// Advances the world by `dt`, asking each agent's controller for a command.
///
/// Commands are collected against the same snapshot, then applied. Returns the
/// commands so callers can log them.
pub fn step(world: &mut WorldState, dt: f64, controllers: &mut [&mut dyn Controller]) -> Result<Vec<Command>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be > 0, got {dt}")));
    }
    if controllers.len() != world.agents.len() {
        return Err(Error::DimensionMismatch { expected: world.agents.len(), got: controllers.len() });
    }
    let commands: Vec<Command> = {
        let view = WorldView {
            time: world.time,
            agents: &world.agents,
        };
        controllers
            .iter_mut()
            .enumerate()
            .map(|(i, c)| c.command(i, &view, &mut world.rng))
            .collect()
    };
    let max_turn = world.angular_speed * dt;
    for (agent, cmd) in world.agents.iter_mut().zip(&commands) {
        let v = cmd.velocity.clamp_norm(agent.max_speed);
        match agent.kind {
            AgentKind::WetRobot => {
                let start = agent.position;
                if v.norm() > 1e-12 {
                    let axis = drive_axis(agent.heading_deg, v.angle_deg());
                    agent.heading_deg = turn_toward(agent.heading_deg, axis, max_turn);
                    let err = angle_diff_deg(axis, agent.heading_deg);
                    if err.abs() <= world.align_tolerance_deg {
                        let heading = Vec2::from_angle_deg(agent.heading_deg);
                        let along = v.dot(heading);
                        match cmd.dock {
                            Some(p) if p.distance(start) <= agent.max_speed * dt + 1e-12 => agent.position = p,
                            _ => agent.position += heading * (along * dt),
                        }
                    }
                } else if let Some(h) = cmd.heading_deg {
                    agent.heading_deg = turn_toward(agent.heading_deg, h, max_turn);
                }
                agent.velocity = (agent.position - start) * (1.0 / dt);
                if let Some(n) = cmd.charge_beam {
                    let still = agent.position == start;
                    if let Some(sector) = world.charging.codebook.sectors.get(n) {
                        let aligned = angle_diff_deg(sector.center_deg(), agent.heading_deg).abs() <= 1e-9;
                        if still && aligned {
                            for (acc, eh) in world.harvested_j.iter_mut().zip(&world.ehs) {
                                let p = received_power_w(&world.charging.channel, sector, agent.position, eh.position);
                                *acc += dt * harvested_power_w(p, &world.charging.harvest);
                            }
                        }
                    }
                }
            }
            AgentKind::Noncooperative | AgentKind::Cooperative => {
                agent.position += v * dt;
                agent.velocity = v;
                if v.norm() > 1e-12 {
                    agent.heading_deg = v.angle_deg();
                }
            }
        }
    }
    world.time += dt;
    Ok(commands)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    struct Fixed(Command);
    impl Controller for Fixed {
        fn command(&mut self, _: usize, _: &WorldView<'_>, _: &mut ChaCha8Rng) -> Command {
            self.0
        }
    }

    fn world(agents: Vec<AgentState>, ehs: Vec<EnergyHarvester>) -> WorldState {
        let k = ehs.len();
        WorldState {
            time: 0.0,
            agents,
            ehs,
            harvested_j: vec![0.0; k],
            rng: ChaCha8Rng::seed_from_u64(0),
            charging: ChargingModel {
                codebook: Codebook::three_sector(),
                channel: ChannelParams::default(),
                harvest: HarvestParams::default(),
            },
            angular_speed: 90.0,
            align_tolerance_deg: 5.0,
        }
    }

    fn robot() -> AgentState {
        AgentState::new(Vec2::ZERO, 0.0, 0.18, 0.2, AgentKind::WetRobot)
    }

    #[test]
    fn aligned_robot_translates() {
        let mut w = world(vec![robot()], vec![]);
        let mut f = Fixed(Command {
            velocity: Vec2::new(0.2, 0.0),
            ..Default::default()
        });
        step(&mut w, 0.1, &mut [&mut f]).unwrap();
        assert!((w.agents[0].position.x - 0.02).abs() < 1e-15);
        assert_eq!(w.agents[0].position.y, 0.0);
        assert!((w.time - 0.1).abs() < 1e-15);
    }

    #[test]
    fn misaligned_robot_turns_first() {
        let mut w = world(vec![robot()], vec![]);
        let mut f = Fixed(Command {
            velocity: Vec2::new(0.0, 0.2),
            ..Default::default()
        });
        step(&mut w, 0.5, &mut [&mut f]).unwrap();
        assert_eq!(w.agents[0].position, Vec2::ZERO);
        assert!((w.agents[0].heading_deg - 45.0).abs() < 1e-9);
        step(&mut w, 0.5, &mut [&mut f]).unwrap();
        assert!((w.agents[0].heading_deg - 90.0).abs() < 1e-9);
        assert!((w.agents[0].position.y - 0.1).abs() < 1e-12);
    }

    #[test]
    fn reverse_driving_needs_no_turn() {
        let mut w = world(vec![robot()], vec![]);
        let mut f = Fixed(Command {
            velocity: Vec2::new(-0.2, 0.0),
            ..Default::default()
        });
        step(&mut w, 1.0, &mut [&mut f]).unwrap();
        assert!((w.agents[0].position.x + 0.2).abs() < 1e-12);
        assert_eq!(w.agents[0].heading_deg, 0.0);
    }

    #[test]
    fn speed_is_capped() {
        let mut w = world(vec![robot()], vec![]);
        let mut f = Fixed(Command {
            velocity: Vec2::new(5.0, 0.0),
            ..Default::default()
        });
        step(&mut w, 0.05, &mut [&mut f]).unwrap();
        assert!(w.agents[0].velocity.norm() <= 0.2 + 1e-12);
    }

    #[test]
    fn stationary_charging_accrues_dt_times_yield() {
        // beam 0 is centered on 0 deg
        let eh = EnergyHarvester::new(1.0, 0.0, 1.0);
        let mut w = world(vec![robot()], vec![eh]);
        let mut f = Fixed(Command {
            charge_beam: Some(0),
            ..Default::default()
        });
        step(&mut w, 1.0, &mut [&mut f]).unwrap();
        let p = received_power_w(&ChannelParams::default(), &Codebook::three_sector().sectors[0], Vec2::ZERO, eh.position);
        let expect = harvested_power_w(p, &HarvestParams::default());
        assert!((w.harvested_j[0] - expect).abs() < 1e-15);
        assert!(expect > 1e-3);
    }

    #[test]
    fn misaligned_beam_does_not_charge() {
        let eh = EnergyHarvester::new(1.0, 0.0, 1.0);
        let mut w = world(vec![robot()], vec![eh]);
        let mut f = Fixed(Command {
            charge_beam: Some(1),
            ..Default::default()
        });
        step(&mut w, 1.0, &mut [&mut f]).unwrap();
        assert_eq!(w.harvested_j[0], 0.0);
    }

    #[test]
    fn zero_dt_rejected() {
        let mut w = world(vec![robot()], vec![]);
        let mut f = Fixed(Command::default());
        assert!(step(&mut w, 0.0, &mut [&mut f]).is_err());
    }

    #[test]
    fn turn_toward_takes_short_way() {
        assert!((turn_toward(350.0, 10.0, 5.0) - 355.0).abs() < 1e-12);
        assert_eq!(turn_toward(350.0, 10.0, 30.0), 10.0);
        assert_eq!(drive_axis(0.0, 170.0), 350.0);
    }
}

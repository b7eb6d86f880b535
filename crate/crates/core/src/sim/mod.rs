//! 2D execution of a plan among moving agents.
//!
//! The WET robot is a rotate-then-translate differential drive steered by a
//! sampled RVO local planner with an emergency stop. Other agents are either
//! noncooperative random-waypoint movers or cooperative RVO agents.

mod mission;
mod rvo;
mod trace;
mod world;

pub use mission::{home_legs_s, ideal_motion_s, run_crossing, run_mission, CooperativeController, MissionController, SimConfig, WanderController};
pub use rvo::{candidate_ttc, candidates, noncooperative_ttc, rvo_velocity, rvo_velocity_by, time_to_collision, RvoParams};
pub use trace::{extract_edge_times, Collision, EdgeTime, EdgeTraversal, Sample, SimTrace, TraceSummary};
pub use world::{step, AgentKind, AgentState, ChargingModel, Command, Controller, WorldState, WorldView};

//! Planning and simulation toolkit for a mobile wireless-energy-transfer (WET) robot.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`models`]: channel, beam, harvesting and motion-time models.
//! 2. [`anchors`]: DBSCAN clustering of the energy harvesters and Chebyshev-center
//!    placement of candidate charging anchors.
//! 3. [`planner`]: anchor selection by iterated local search, exact routing by
//!    branch-and-bound, and charging-time/beam allocation by linear programming.
//! 4. [`sim`] and [`hil`]: execution in a 2D world with reciprocal velocity
//!    obstacle avoidance, and the measure/refit/re-plan loop.
//!
//! [`scenario`] and [`report`] hold the file formats shared with the CLI.

// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anchors;
pub mod error;
pub mod hil;
pub mod models;
pub mod pipeline;
pub mod planner;
pub mod report;
pub mod scenario;
pub mod sim;

pub use error::{Error, Result};
pub use models::{
    BeamSector, ChannelParams, Codebook, DistanceMatrix, EnergyHarvester, HarvestParams,
    Position2D, RobotParams, Vec2,
};
pub use planner::{Plan, PlanningProblem};

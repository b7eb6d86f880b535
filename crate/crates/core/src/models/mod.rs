//! Physical and geometric models: positions, channel gain, beam coverage,
//! nonlinear energy harvesting, and robot motion time.

mod beam;
mod channel;
pub(crate) mod geometry;
mod harvest;
mod motion;

pub use beam::{beam_covers, BeamSector, Codebook};
pub use channel::{pathloss_db, received_power_w, ChannelParams, MIN_DISTANCE_M};
pub use geometry::{Position2D, Vec2};
pub use harvest::{harvested_power_w, HarvestParams};
pub use motion::{motion_time_s, DistanceMatrix, EnergyHarvester, RobotParams};

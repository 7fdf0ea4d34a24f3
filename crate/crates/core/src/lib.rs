//! Low-fidelity UAV flight-path simulation and pseudo-random two-obstacle
//! scenario generation.
//!
//! The pipeline: [`testgen`] places two cuboid obstacles across the mission
//! segment that crosses the obstacle arena, [`sim`] flies the UAV through the
//! scene using the analytic depth camera in [`render`] and the histogram
//! planner in [`planner`], and [`eval`] keeps the scenarios whose predicted
//! minimum clearance falls under the safety threshold.

pub mod error;
pub mod eval;
pub mod geom;
pub mod planner;
pub mod plot;
pub mod render;
pub mod sim;
pub mod testgen;

pub use error::{ConfigError, GenError, GeomError};
pub use geom::{ArenaRect, CuboidObstacle, FlightSegment, Pose, Vec2, Vec3};

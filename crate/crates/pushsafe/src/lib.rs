//! Contact-force prediction and actuation-safety analysis for a planar
//! aerial manipulator pushing on oriented surfaces.
//!
//! An underactuated multirotor with a rigid pusher link can only exert a
//! normal force on a surface by rolling towards it; the roll angle, the
//! contact force and the per-rotor thrusts are then coupled through static
//! equilibrium. This crate provides:
//!
//! - [`model`]: the closed-form equilibrium — contact force, total thrust
//!   and the inner/outer rotor-pair split as functions of the surface
//!   orientation `beta0` and the commanded roll `phi0`;
//! - [`safety`]: saturation limits calibrated from hover data, the
//!   safe/critical/failure interaction zones, and the risk ratio
//!   `lambda = phi0 / phi_u`;
//! - [`planner`]: risk-ordered experiment campaigns with stop-on-failure
//!   execution;
//! - [`sim`]: a quasi-static planar contact simulator that independently
//!   cross-checks the closed forms — the predicted equilibrium is a fixed
//!   point of its dynamics, and infeasible commands show up as persistent
//!   rotor saturation;
//! - [`flightlog`] and [`config`]: log validation and run configuration;
//! - [`cli`]: the `pushsafe` command-line surface.
//!
//! Angles are degrees at every public interface and radians internally.
//! Forces are Newtons, lengths meters.

pub mod cli;
pub mod config;
pub mod error;
pub mod flightlog;
pub mod model;
pub mod planner;
pub mod safety;
pub mod sim;

pub use config::RunConfig;
pub use error::{Error, Result};
pub use flightlog::{validate_log, FlightLog, LogValidation};
pub use model::{EquilibriumSolution, OperationPoint, VehicleParams};
pub use planner::{build_plan, execute_plan, CampaignPlan, CampaignReport, ExperimentCase};
pub use safety::{classify, risk, zone_table, ActuationLimits, Assessment, ZoneBoundaries};
pub use sim::{run_to_equilibrium, SimConfig, SimResult};

//! Planning and simulation for a fuel-constrained UAV supported by a mobile
//! refueling UGV.
//!
//! * [`offline`]: nearest-neighbor + 2-opt tour, greedy split into refuel segments.
//! * [`online`]: string-model site backtracking, skips, abandonment and segment repair.
//! * [`sim`]: fixed-step closed-loop simulator with JSON-lines traces and metrics.
//! * [`scenario`] and [`batch`]: scenario files, seeded generation and sweeps.

pub mod batch;
pub mod error;
pub mod geometry;
pub mod model;
pub mod offline;
pub mod online;
pub mod rng;
pub mod scenario;
pub mod sim;

pub use error::{GeometryError, ModelError, OnlineError, PlanError, ScenarioError, SimError};
pub use geometry::{Point2D, Polyline};
pub use model::{CostModel, Scenario, TargetId, TargetSite, VehicleParams, WorldBounds};
pub use offline::{plan_mission, validate_plan, MissionPlan, SegmentPlan, Tour};
pub use online::{CaseEvent, CaseKind, Mode, OnlinePlanner, SegmentState};
pub use rng::SplitMix64;
pub use scenario::{emit_scenario, generate_scenario, parse_scenario, ScenarioGenerator};
pub use sim::{run, run_with_plan, Metrics, RunReport, SimConfig, Simulation};

use thiserror::Error;

use crate::model::TargetId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("polyline needs at least 2 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("zero-length edge after vertex {0}")]
    ZeroLengthEdge(usize),
    #[error("vertex {0} has a non-finite coordinate")]
    NonFinite(usize),
    #[error("arc {arc} outside [0, {length}]")]
    ArcOutOfRange { arc: f64, length: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{field} must be positive and finite, got {value}")]
    NonPositive { field: &'static str, value: f64 },
    #[error("duplicate target id {0}")]
    DuplicateTarget(TargetId),
    #[error("target {id} at ({x}, {y}) lies outside the world bounds")]
    OutOfBounds { id: TargetId, x: f64, y: f64 },
    #[error("depot lies outside the world bounds")]
    DepotOutOfBounds,
    #[error("target {0} coincides with the depot")]
    TargetAtDepot(TargetId),
    #[error("target {0} has an invalid processing cost")]
    InvalidCost(TargetId),
    #[error("world bounds are empty or non-finite")]
    InvalidBounds,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("scenario has no targets")]
    NoTargets,
    #[error("site discretization step must be positive, got {0}")]
    InvalidStep(f64),
    #[error("no feasible refuel site ahead of tour arc {arc:.3} m")]
    Infeasible { arc: f64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OnlineError {
    #[error("fuel would drop to {fuel} (invariant violation)")]
    NegativeFuel { fuel: f64 },
    #[error("operation requires mode {expected}, segment is in {actual}")]
    WrongMode {
        expected: &'static str,
        actual: &'static str,
    },
    #[error("segment of length {length} exceeds capacity {capacity}; repair first")]
    OverLength { length: f64, capacity: f64 },
    #[error("target {0} cannot be reached from the rendezvous site within one tank")]
    PermanentlyInfeasible(TargetId),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("the offline plan is invalid: {0}")]
    InvalidPlan(String),
    #[error("time step must be positive, got {0}")]
    InvalidStep(f64),
    #[error("mission exceeded {limit:.1} s; unprocessed targets {unprocessed:?}")]
    Timeout {
        limit: f64,
        unprocessed: Vec<TargetId>,
    },
    #[error(
        "no target progress across {segments} consecutive segments; unprocessed {unprocessed:?}"
    )]
    Stalled {
        segments: usize,
        unprocessed: Vec<TargetId>,
    },
    #[error("invariant violated at t={t:.4} s: {what}")]
    InvariantViolation { t: f64, what: String },
    #[error(transparent)]
    Online(#[from] OnlineError),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error("invalid scenario: {0}")]
    Invalid(#[from] ModelError),
    #[error("cannot place {requested} targets with separation {separation} m (placed {placed})")]
    Crowded {
        requested: usize,
        placed: usize,
        separation: f64,
    },
    #[error("target count must be at least 1")]
    NoTargets,
}

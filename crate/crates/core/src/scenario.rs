//! Scenario documents (TOML) and seeded random scenario generation.
//!
//! ```toml
//! [world]
//! x_min = 0.0
//! y_min = 0.0
//! x_max = 50.0
//! y_max = 50.0
//!
//! [depot]
//! x = 25.0
//! y = 25.0
//!
//! [vehicle]
//! v_uav = 2.0
//! v_ugv = 1.0
//! fuel_capacity = 50.0
//! fuel_per_meter = 1.0
//!
//! [cost_model]
//! kind = "uniform"   # or "explicit", "lognormal" (mu, sigma)
//! lo = 0.0
//! hi = 20.0
//! seed = 7
//!
//! [[targets]]
//! id = 1
//! x = 10.0
//! y = 5.0
//! tau = 3.5          # optional unless kind = "explicit"; wins over the distribution
//! ```
//!
//! `[world]` and `[vehicle]` fall back to the defaults (50 x 50 m, 2 / 1 m/s,
//! U = 50, 1 fuel/m) when absent. Seeds are TOML integers; values above
//! `i64::MAX` are stored as their two's-complement `i64`.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, ScenarioError};
use crate::geometry::Point2D;
use crate::model::{CostModel, Scenario, TargetId, TargetSite, VehicleParams, WorldBounds};
use crate::rng::SplitMix64;

/// Mixed into a generation seed to derive the cost seed, so positions and costs
/// come from independent streams.
pub const COST_SEED_MIX: u64 = 0xC0FF_EE00_D15E_A5E5;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    #[serde(default)]
    world: WorldBounds,
    depot: PointDoc,
    #[serde(default)]
    vehicle: VehicleParams,
    #[serde(default = "explicit_doc")]
    cost_model: CostDoc,
    #[serde(default)]
    targets: Vec<TargetDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PointDoc {
    x: f64,
    y: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostDoc {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<i64>,
}

fn explicit_doc() -> CostDoc {
    CostDoc {
        kind: "explicit".into(),
        lo: None,
        hi: None,
        mu: None,
        sigma: None,
        seed: None,
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetDoc {
    id: TargetId,
    x: f64,
    y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau: Option<f64>,
}

fn need(v: Option<f64>, field: &str) -> Result<f64, ScenarioError> {
    v.ok_or_else(|| ScenarioError::MissingField(format!("cost_model.{field}")))
}

impl CostDoc {
    fn to_model(&self) -> Result<CostModel, ScenarioError> {
        let seed = || {
            self.seed
                .map(|s| s as u64)
                .ok_or_else(|| ScenarioError::MissingField("cost_model.seed".into()))
        };
        match self.kind.as_str() {
            "explicit" => Ok(CostModel::Explicit),
            "uniform" => {
                let (lo, hi) = (need(self.lo, "lo")?, need(self.hi, "hi")?);
                if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi >= lo) {
                    return Err(ScenarioError::Parse(format!(
                        "cost_model: uniform bounds must satisfy 0 <= lo <= hi, got ({lo}, {hi})"
                    )));
                }
                Ok(CostModel::Uniform {
                    lo,
                    hi,
                    seed: seed()?,
                })
            }
            "lognormal" => {
                let (mu, sigma) = (need(self.mu, "mu")?, need(self.sigma, "sigma")?);
                if !(mu.is_finite() && sigma.is_finite() && sigma >= 0.0) {
                    return Err(ScenarioError::Parse(format!(
                        "cost_model: lognormal needs finite mu and sigma >= 0, got ({mu}, {sigma})"
                    )));
                }
                Ok(CostModel::Lognormal {
                    mu,
                    sigma,
                    seed: seed()?,
                })
            }
            other => Err(ScenarioError::Parse(format!(
                "cost_model.kind: unknown kind `{other}` (expected explicit, uniform or lognormal)"
            ))),
        }
    }

    fn from_model(m: &CostModel) -> Self {
        let mut d = explicit_doc();
        match *m {
            CostModel::Explicit => {}
            CostModel::Uniform { lo, hi, seed } => {
                d.kind = "uniform".into();
                d.lo = Some(lo);
                d.hi = Some(hi);
                d.seed = Some(seed as i64);
            }
            CostModel::Lognormal { mu, sigma, seed } => {
                d.kind = "lognormal".into();
                d.mu = Some(mu);
                d.sigma = Some(sigma);
                d.seed = Some(seed as i64);
            }
        }
        d
    }
}

/// Parses and validates a scenario document. Distribution costs are sampled
/// once here, in target order, with the declared seed.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let doc: Doc = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    scenario_from_doc(doc, None)
}

/// Like [`parse_scenario`], replacing the cost model's seed first.
pub fn parse_scenario_with_seed(text: &str, seed: u64) -> Result<Scenario, ScenarioError> {
    let doc: Doc = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    scenario_from_doc(doc, Some(seed))
}

fn scenario_from_doc(doc: Doc, seed: Option<u64>) -> Result<Scenario, ScenarioError> {
    let mut cost_model = doc.cost_model.to_model()?;
    if let Some(s) = seed {
        cost_model = cost_model.with_seed(s);
    }
    let sampled = cost_model.sample(doc.targets.len());
    let mut costs = Vec::with_capacity(doc.targets.len());
    for (i, t) in doc.targets.iter().enumerate() {
        match (t.tau, sampled.get(i)) {
            (Some(tau), _) => costs.push(tau),
            (None, Some(&tau)) => costs.push(tau),
            (None, None) => {
                return Err(ScenarioError::MissingField(format!(
                    "targets[{i}].tau (target {}; cost_model is explicit)",
                    t.id
                )))
            }
        }
    }
    let targets = doc
        .targets
        .iter()
        .map(|t| TargetSite {
            id: t.id,
            position: Point2D::new(t.x, t.y),
        })
        .collect();
    Ok(Scenario::new(
        doc.world,
        Point2D::new(doc.depot.x, doc.depot.y),
        doc.vehicle,
        cost_model,
        targets,
        costs,
    )?)
}

/// Serializes a scenario with every cost written out, so parsing the result
/// gives back an equal scenario.
pub fn emit_scenario(s: &Scenario) -> String {
    let doc = Doc {
        world: s.bounds,
        depot: PointDoc {
            x: s.depot.x,
            y: s.depot.y,
        },
        vehicle: s.params,
        cost_model: CostDoc::from_model(&s.cost_model),
        targets: s
            .targets()
            .iter()
            .zip(s.processing_costs())
            .map(|(t, &tau)| TargetDoc {
                id: t.id,
                x: t.position.x,
                y: t.position.y,
                tau: Some(tau),
            })
            .collect(),
    };
    toml::to_string(&doc).expect("scenario documents serialize")
}

/// Random scenario factory. Targets are drawn uniformly in `bounds` by
/// rejection, keeping `min_separation` from each other and from the depot.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioGenerator {
    pub bounds: WorldBounds,
    pub params: VehicleParams,
    /// `None` puts the depot at the center of the world.
    pub depot: Option<Point2D>,
    /// Cost distribution; its seed is replaced per scenario.
    pub cost_model: CostModel,
    pub min_separation: f64,
    /// Rejection attempts allowed per target.
    pub attempts_per_target: usize,
}

impl Default for ScenarioGenerator {
    fn default() -> Self {
        Self {
            bounds: WorldBounds::default(),
            params: VehicleParams::default(),
            depot: None,
            cost_model: CostModel::Uniform {
                lo: 0.0,
                hi: 25.0,
                seed: 0,
            },
            min_separation: 0.5,
            attempts_per_target: 1000,
        }
    }
}

impl ScenarioGenerator {
    pub fn generate(&self, n_targets: usize, seed: u64) -> Result<Scenario, ScenarioError> {
        if n_targets == 0 {
            return Err(ScenarioError::NoTargets);
        }
        let b = self.bounds;
        let depot = self.depot.unwrap_or_else(|| b.center());
        let mut rng = SplitMix64::new(seed);
        let mut points: Vec<Point2D> = Vec::with_capacity(n_targets);
        let mut attempts = 0usize;
        let budget = self.attempts_per_target.saturating_mul(n_targets);
        while points.len() < n_targets {
            if attempts >= budget {
                return Err(ScenarioError::Crowded {
                    requested: n_targets,
                    placed: points.len(),
                    separation: self.min_separation,
                });
            }
            attempts += 1;
            let p = Point2D::new(rng.uniform(b.x_min, b.x_max), rng.uniform(b.y_min, b.y_max));
            let sep = self.min_separation.max(f64::MIN_POSITIVE);
            if p.distance(&depot) < sep || points.iter().any(|q| q.distance(&p) < sep) {
                continue;
            }
            points.push(p);
        }
        let cost_model = self.cost_model.with_seed(seed ^ COST_SEED_MIX);
        let costs = match cost_model {
            CostModel::Explicit => vec![0.0; n_targets],
            _ => cost_model.sample(n_targets),
        };
        let targets = points
            .into_iter()
            .enumerate()
            .map(|(i, position)| TargetSite {
                id: i as TargetId + 1,
                position,
            })
            .collect();
        Scenario::new(b, depot, self.params, cost_model, targets, costs)
            .map_err(|e: ModelError| e.into())
    }
}

/// [`ScenarioGenerator::generate`] with default costs and separation.
pub fn generate_scenario(
    n_targets: usize,
    bounds: WorldBounds,
    params: VehicleParams,
    seed: u64,
) -> Result<Scenario, ScenarioError> {
    ScenarioGenerator {
        bounds,
        params,
        ..Default::default()
    }
    .generate(n_targets, seed)
}

//! Mission model: vehicle parameters, targets, scenarios and shared tolerances.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::geometry::Point2D;
use crate::rng::SplitMix64;

/// Tolerance for arc-length and position comparisons, meters.
pub const EPS_GEOM: f64 = 1e-9;
/// Tolerance for fuel comparisons, fuel units.
pub const EPS_FUEL: f64 = 1e-9;
/// Slack allowed on the ground-vehicle arrival race, seconds.
pub const EPS_TIME: f64 = 1e-6;

pub type TargetId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VehicleParams {
    /// UAV ground speed, m/s.
    pub v_uav: f64,
    /// UGV maximum speed, m/s.
    pub v_ugv: f64,
    /// Tank capacity `U`, fuel units.
    pub fuel_capacity: f64,
    /// Fuel burned per meter of flight.
    pub fuel_per_meter: f64,
    /// Optional cap on the UGV leg between consecutive refuel sites, meters.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_max: Option<f64>,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            v_uav: 2.0,
            v_ugv: 1.0,
            fuel_capacity: 50.0,
            fuel_per_meter: 1.0,
            r_max: None,
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let checks = [
            ("v_uav", self.v_uav),
            ("v_ugv", self.v_ugv),
            ("fuel_capacity", self.fuel_capacity),
            ("fuel_per_meter", self.fuel_per_meter),
        ];
        for (field, value) in checks {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::NonPositive { field, value });
            }
        }
        if let Some(r) = self.r_max {
            if !(r.is_finite() && r > 0.0) {
                return Err(ModelError::NonPositive {
                    field: "r_max",
                    value: r,
                });
            }
        }
        Ok(())
    }

    /// Fuel burned per second while airborne, whatever the maneuver.
    pub fn burn_rate(&self) -> f64 {
        self.fuel_per_meter * self.v_uav
    }

    /// Flight distance a full tank buys, meters.
    pub fn flight_range(&self) -> f64 {
        self.fuel_capacity / self.fuel_per_meter
    }

    /// Seconds of flight left on `fuel` units.
    pub fn endurance(&self, fuel: f64) -> f64 {
        fuel / self.burn_rate()
    }

    /// Distance the UGV covers during one full-tank endurance.
    pub fn endurance_range(&self) -> f64 {
        self.v_ugv * self.fuel_capacity / self.burn_rate()
    }

    /// Effective site-to-site limit `R`: the endurance range, capped by `r_max` if set.
    pub fn site_range(&self) -> f64 {
        match self.r_max {
            Some(r) => r.min(self.endurance_range()),
            None => self.endurance_range(),
        }
    }
}

/// What the planners know about a target: where it is, not what it costs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSite {
    pub id: TargetId,
    pub position: Point2D,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldBounds {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Default for WorldBounds {
    fn default() -> Self {
        Self::square(50.0)
    }
}

impl WorldBounds {
    pub fn square(side: f64) -> Self {
        Self {
            x_min: 0.0,
            y_min: 0.0,
            x_max: side,
            y_max: side,
        }
    }

    pub fn contains(&self, p: &Point2D) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn center(&self) -> Point2D {
        Point2D::new(
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        )
    }

    fn is_valid(&self) -> bool {
        [self.x_min, self.y_min, self.x_max, self.y_max]
            .iter()
            .all(|v| v.is_finite())
            && self.x_max > self.x_min
            && self.y_max > self.y_min
    }
}

/// How hidden processing costs are produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CostModel {
    /// Every target carries its own `tau`.
    Explicit,
    Uniform {
        lo: f64,
        hi: f64,
        seed: u64,
    },
    /// `exp(N(mu, sigma^2))`.
    Lognormal {
        mu: f64,
        sigma: f64,
        seed: u64,
    },
}

impl CostModel {
    /// Draws `n` costs in target order. Explicit models yield nothing.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        match *self {
            CostModel::Explicit => Vec::new(),
            CostModel::Uniform { lo, hi, seed } => {
                let mut rng = SplitMix64::new(seed);
                (0..n).map(|_| lo + (hi - lo) * rng.next_f64()).collect()
            }
            CostModel::Lognormal { mu, sigma, seed } => {
                let mut rng = SplitMix64::new(seed);
                (0..n)
                    .map(|_| (mu + sigma * rng.next_standard_normal()).exp())
                    .collect()
            }
        }
    }

    pub fn with_seed(&self, new_seed: u64) -> CostModel {
        match *self {
            CostModel::Explicit => CostModel::Explicit,
            CostModel::Uniform { lo, hi, .. } => CostModel::Uniform {
                lo,
                hi,
                seed: new_seed,
            },
            CostModel::Lognormal { mu, sigma, .. } => CostModel::Lognormal {
                mu,
                sigma,
                seed: new_seed,
            },
        }
    }
}

/// A complete mission instance.
///
/// Processing costs are kept apart from [`TargetSite`]s: planners take
/// `targets()`, and only the simulator's target ledger reads the costs.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub bounds: WorldBounds,
    pub depot: Point2D,
    pub params: VehicleParams,
    pub cost_model: CostModel,
    targets: Vec<TargetSite>,
    costs: Vec<f64>,
}

impl Scenario {
    /// `costs[i]` is the true processing cost of `targets[i]`.
    pub fn new(
        bounds: WorldBounds,
        depot: Point2D,
        params: VehicleParams,
        cost_model: CostModel,
        targets: Vec<TargetSite>,
        costs: Vec<f64>,
    ) -> Result<Self, ModelError> {
        if !bounds.is_valid() {
            return Err(ModelError::InvalidBounds);
        }
        params.validate()?;
        if !depot.is_finite() || !bounds.contains(&depot) {
            return Err(ModelError::DepotOutOfBounds);
        }
        assert_eq!(targets.len(), costs.len(), "one cost per target");
        let mut seen = BTreeSet::new();
        for (t, &tau) in targets.iter().zip(&costs) {
            if !seen.insert(t.id) {
                return Err(ModelError::DuplicateTarget(t.id));
            }
            if !t.position.is_finite() || !bounds.contains(&t.position) {
                return Err(ModelError::OutOfBounds {
                    id: t.id,
                    x: t.position.x,
                    y: t.position.y,
                });
            }
            if t.position.distance(&depot) <= EPS_GEOM {
                return Err(ModelError::TargetAtDepot(t.id));
            }
            if tau.is_nan() || tau < 0.0 {
                return Err(ModelError::InvalidCost(t.id));
            }
        }
        Ok(Self {
            bounds,
            depot,
            params,
            cost_model,
            targets,
            costs,
        })
    }

    /// Convenience constructor with explicit costs and default 50 x 50 m bounds.
    pub fn with_costs(
        depot: Point2D,
        params: VehicleParams,
        targets: &[(TargetId, Point2D, f64)],
    ) -> Result<Self, ModelError> {
        let sites = targets
            .iter()
            .map(|&(id, position, _)| TargetSite { id, position })
            .collect();
        let costs = targets.iter().map(|t| t.2).collect();
        Self::new(
            WorldBounds::default(),
            depot,
            params,
            CostModel::Explicit,
            sites,
            costs,
        )
    }

    pub fn targets(&self) -> &[TargetSite] {
        &self.targets
    }

    pub fn target(&self, id: TargetId) -> Option<&TargetSite> {
        self.targets.iter().find(|t| t.id == id)
    }

    /// Ground truth processing cost. Harness use only.
    pub fn processing_cost(&self, id: TargetId) -> Option<f64> {
        self.targets
            .iter()
            .position(|t| t.id == id)
            .map(|i| self.costs[i])
    }

    pub fn processing_costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn target_ids(&self) -> BTreeSet<TargetId> {
        self.targets.iter().map(|t| t.id).collect()
    }

    pub fn with_params(&self, params: VehicleParams) -> Result<Self, ModelError> {
        Self::new(
            self.bounds,
            self.depot,
            params,
            self.cost_model.clone(),
            self.targets.clone(),
            self.costs.clone(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_quantities_for_default_vehicle() {
        let p = VehicleParams::default();
        assert_eq!(p.burn_rate(), 2.0);
        assert_eq!(p.endurance_range(), 25.0);
        assert_eq!(p.site_range(), 25.0);
        assert_eq!(p.endurance(10.0), 5.0);
        let capped = VehicleParams {
            r_max: Some(10.0),
            ..p
        };
        assert_eq!(capped.site_range(), 10.0);
    }

    #[test]
    fn rejects_bad_params() {
        let p = VehicleParams {
            v_ugv: 0.0,
            ..Default::default()
        };
        assert!(matches!(
            p.validate(),
            Err(ModelError::NonPositive { field: "v_ugv", .. })
        ));
    }

    #[test]
    fn scenario_validation() {
        let p = VehicleParams::default();
        let o = Point2D::new(0.0, 0.0);
        let dup = Scenario::with_costs(
            o,
            p,
            &[
                (1, Point2D::new(1.0, 1.0), 0.0),
                (1, Point2D::new(2.0, 2.0), 0.0),
            ],
        );
        assert_eq!(dup.unwrap_err(), ModelError::DuplicateTarget(1));
        let oob = Scenario::with_costs(o, p, &[(3, Point2D::new(60.0, 1.0), 0.0)]);
        assert!(matches!(oob, Err(ModelError::OutOfBounds { id: 3, .. })));
        let neg = Scenario::with_costs(o, p, &[(3, Point2D::new(6.0, 1.0), -1.0)]);
        assert_eq!(neg.unwrap_err(), ModelError::InvalidCost(3));
    }

    #[test]
    fn sampled_costs_are_seeded() {
        let m = CostModel::Uniform {
            lo: 0.0,
            hi: 20.0,
            seed: 7,
        };
        let a = m.sample(10);
        assert_eq!(a, m.sample(10));
        assert!(a.iter().all(|&c| (0.0..20.0).contains(&c)));
        assert_ne!(a, m.with_seed(8).sample(10));
        let ln = CostModel::Lognormal {
            mu: 1.0,
            sigma: 0.5,
            seed: 3,
        };
        assert!(ln.sample(50).iter().all(|&c| c > 0.0));
    }
}

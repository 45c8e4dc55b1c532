//! Hand-built golden scenarios shared by the integration and acceptance tests.
#![allow(dead_code)]

use fcurp_core::model::{TargetSite, VehicleParams};
use fcurp_core::offline::{MissionPlan, SegmentPlan};
use fcurp_core::{Point2D, Scenario};

pub fn p(x: f64, y: f64) -> Point2D {
    Point2D::new(x, y)
}

pub fn site(id: u32, x: f64, y: f64) -> TargetSite {
    TargetSite {
        id,
        position: p(x, y),
    }
}

/// One target at (10,0) on the segment (0,0) -> (20,0), then home.
pub fn baseline(tau: f64) -> (Scenario, MissionPlan) {
    let s = Scenario::with_costs(
        p(0.0, 0.0),
        VehicleParams::default(),
        &[(1, p(10.0, 0.0), tau)],
    )
    .unwrap();
    let plan = MissionPlan::from_segments(vec![
        SegmentPlan::from_stops(0, p(0.0, 0.0), &[site(1, 10.0, 0.0)], p(20.0, 0.0)).unwrap(),
        SegmentPlan::from_stops(1, p(20.0, 0.0), &[], p(0.0, 0.0)).unwrap(),
    ]);
    (s, plan)
}

/// Two targets where the second is skipped: v_ugv = 2, U = 30, tau1 = 16.
pub fn skip_scenario() -> (Scenario, MissionPlan) {
    let params = VehicleParams {
        v_ugv: 2.0,
        fuel_capacity: 30.0,
        ..Default::default()
    };
    let s = Scenario::with_costs(
        p(0.0, 0.0),
        params,
        &[(1, p(10.0, 0.0), 16.0), (2, p(15.0, 0.0), 2.0)],
    )
    .unwrap();
    let plan = MissionPlan::from_segments(vec![
        SegmentPlan::from_stops(
            0,
            p(0.0, 0.0),
            &[site(1, 10.0, 0.0), site(2, 15.0, 0.0)],
            p(20.0, 0.0),
        )
        .unwrap(),
        SegmentPlan::from_stops(1, p(20.0, 0.0), &[], p(0.0, 0.0)).unwrap(),
    ]);
    (s, plan)
}

pub fn collinear() -> Scenario {
    Scenario::with_costs(
        p(0.0, 0.0),
        VehicleParams::default(),
        &[
            (1, p(10.0, 0.0), 0.0),
            (2, p(20.0, 0.0), 0.0),
            (3, p(30.0, 0.0), 0.0),
            (4, p(40.0, 0.0), 0.0),
        ],
    )
    .unwrap()
}

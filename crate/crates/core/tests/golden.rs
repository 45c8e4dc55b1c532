mod common;

use common::{baseline, collinear, p, site, skip_scenario};
use fcurp_core::model::VehicleParams;
use fcurp_core::offline::{build_tour, plan_mission, SegmentPlan};
use fcurp_core::online::{transfer_and_repair, CaseKind};
use fcurp_core::sim::{
    read_trace, run_with_plan, trace_to_string as trace_text, Event, Metrics, RunReport, SimConfig,
    TraceRecord,
};
use fcurp_core::{MissionPlan, Scenario};

const DT: f64 = 0.05;

fn sim(s: &Scenario, plan: &MissionPlan, dt: f64) -> RunReport {
    let cfg = SimConfig {
        dt,
        ..Default::default()
    };
    run_with_plan(s, plan, &cfg).expect("mission completes")
}

fn events(r: &RunReport) -> Vec<(f64, Event)> {
    r.trace
        .iter()
        .filter_map(|rec| match rec {
            TraceRecord::Event(e) => Some((e.t, e.event.clone())),
            _ => None,
        })
        .collect()
}

fn first_refuel(r: &RunReport) -> (f64, [f64; 2], f64) {
    events(r)
        .into_iter()
        .find_map(|(t, e)| match e {
            Event::Refuel { site, fuel, .. } => Some((t, site, fuel)),
            _ => None,
        })
        .expect("a rendezvous")
}

fn near(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn case1_follows_offline_plan() {
    let (s, plan) = baseline(25.0);
    let r = sim(&s, &plan, DT);
    assert_eq!(r.metrics.backtrack_episodes, 0);
    assert!(near(r.metrics.uav_distance, 40.0, 40.0 * 1e-6));
    // transit 10 m, process 12.5 s, transit 10 m, home 20 m at 2 m/s
    assert!(near(r.metrics.mission_time, 32.5, 1e-9));
    assert_eq!(r.metrics.case_count(1), 2);
    assert_eq!(r.metrics.rendezvous_count, 1);
}

#[test]
fn case2_single_backtrack_to_15() {
    let (s, plan) = baseline(35.0);
    let r = sim(&s, &plan, DT);
    assert_eq!(r.metrics.backtrack_episodes, 1);
    let (t, site, fuel) = first_refuel(&r);
    assert!(near(site[0], 15.0, 2.0 * DT) && site[1] == 0.0);
    assert!(near(fuel, 0.0, 2.0 * DT));
    assert!(near(t, 25.0, DT));
    assert_eq!(r.cases[0].kind, CaseKind::BacktrackAllVisited);
}

#[test]
fn case3_skip_then_deferred_completion() {
    let (s, plan) = skip_scenario();
    let r = sim(&s, &plan, DT);
    let ev = events(&r);
    let (t_skip, _) = ev
        .iter()
        .find(|(_, e)| matches!(e, Event::Skip { target: 2, .. }))
        .expect("t2 skipped");
    // site arc = 10 + fuel crosses 15 when fuel hits 5, at t = 12.5
    assert!(near(*t_skip, 12.5, DT + 1e-9));
    let done_seg1 = ev.iter().any(|(_, e)| {
        matches!(
            e,
            Event::Complete {
                segment: 1,
                target: 2
            }
        )
    });
    assert!(done_seg1);
    let seg0: Vec<_> = r
        .cases
        .iter()
        .filter(|c| c.segment == 0)
        .map(|c| c.kind)
        .collect();
    assert_eq!(seg0, vec![CaseKind::BacktrackSkip]);
    let (_, site, _) = first_refuel(&r);
    assert!(near(site[0], 14.0, 2.0 * DT));
}

#[test]
fn case4_race_meets_at_15() {
    let (s, plan) = baseline(40.0);
    let r = sim(&s, &plan, DT);
    let ev = events(&r);
    let (t_ab, _) = ev
        .iter()
        .find(|(_, e)| matches!(e, Event::Abandon { target: 1, .. }))
        .expect("abandonment");
    // string taut at t = 20; race equality at s = 2.5
    assert!(near(*t_ab, 22.5, DT + 1e-9));
    let (t_rv, site, _) = first_refuel(&r);
    assert!(near(site[0], 15.0, 2.0 * DT));
    assert!(near(t_rv, 25.0, DT));
    assert_eq!(r.metrics.abandonments, 1);
    assert!(ev.iter().any(|(_, e)| matches!(
        e,
        Event::Complete {
            segment: 1,
            target: 1
        }
    )));
    assert_eq!(r.cases[0].kind, CaseKind::AbandonRendezvous);
}

#[test]
fn case4_both_vehicles_arrive_together() {
    let (s, plan) = baseline(40.0);
    let r = sim(&s, &plan, DT);
    let (t_rv, site, _) = first_refuel(&r);
    // UAV arrival: extrapolate the last segment-0 tick forward at v_uav
    let last = r
        .trace
        .iter()
        .rev()
        .filter_map(|rec| match rec {
            TraceRecord::Tick(t) if t.seg == 0 => Some(t.clone()),
            _ => None,
        })
        .next()
        .unwrap();
    let uav_at = last.t + (last.uav[0] - site[0]).abs() / s.params.v_uav;
    assert!(
        (uav_at - t_rv).abs() <= DT + 1e-9,
        "uav {uav_at} ugv {t_rv}"
    );
}

#[test]
fn case5_terminal_pulled_back_10m() {
    let params = VehicleParams {
        v_ugv: 2.0,
        ..Default::default()
    };
    let next = SegmentPlan::from_stops(1, p(30.0, 10.0), &[], p(30.0, 30.0)).unwrap();
    let rep = transfer_and_repair(
        1,
        p(0.0, 0.0),
        &[site(7, 30.0, 0.0)],
        Some(&next),
        p(0.0, 0.0),
        &params,
    )
    .unwrap();
    assert!(rep.repaired);
    assert!(near(rep.backtracked, 10.0, 1e-9));
    assert!(rep.segment.terminal().approx_eq(&p(30.0, 20.0), 1e-9));
    assert!(near(rep.segment.length(), 50.0, 1e-9));
    assert!(rep.shed.is_empty());
}

#[test]
fn offline_collinear() {
    let s = collinear();
    let tour = build_tour(&s).unwrap();
    assert!(near(tour.length(), 80.0, 1e-9));
    let plan = plan_mission(&s).unwrap();
    let lengths: Vec<f64> = plan.segments.iter().map(|g| g.length()).collect();
    assert_eq!(lengths.len(), 3);
    for (l, want) in lengths.iter().zip([25.0, 50.0, 5.0]) {
        assert!(near(*l, want, 1e-9), "{lengths:?}");
    }
    assert!(plan.refuel_sites[1].approx_eq(&p(25.0, 0.0), 1e-9));
    assert!(plan.refuel_sites[2].approx_eq(&p(5.0, 0.0), 1e-9));
    let parts: Vec<Vec<u32>> = plan
        .segments
        .iter()
        .map(|g| g.targets().iter().map(|t| t.id).collect())
        .collect();
    assert_eq!(parts, vec![vec![1, 2], vec![3, 4], vec![]]);
}

#[test]
fn single_target_beyond_one_tank() {
    let s = Scenario::with_costs(
        p(0.0, 0.0),
        VehicleParams::default(),
        &[(1, p(30.0, 0.0), 0.0)],
    )
    .unwrap();
    let plan = plan_mission(&s).unwrap();
    assert_eq!(plan.segments.len(), 2);
    assert!(near(plan.segments[0].length(), 50.0, 1e-9));
    assert!(plan.refuel_sites[1].approx_eq(&p(10.0, 0.0), 1e-9));
}

#[test]
fn zero_cost_mission_is_the_offline_tour() {
    let s = Scenario::with_costs(
        p(0.0, 0.0),
        VehicleParams::default(),
        &[(1, p(10.0, 0.0), 0.0)],
    )
    .unwrap();
    let plan = plan_mission(&s).unwrap();
    let r = run_with_plan(&s, &plan, &SimConfig::default()).unwrap();
    assert!(near(r.metrics.uav_distance, 20.0, 1e-9));
    assert_eq!(r.metrics.backtrack_episodes, 0);
    assert_eq!(r.metrics.case_count(1), plan.segments.len() as u64);
}

#[test]
fn identical_inputs_give_identical_traces() {
    for (s, plan) in [baseline(40.0), skip_scenario()] {
        let a = trace_text(&sim(&s, &plan, DT).trace);
        let b = trace_text(&sim(&s, &plan, DT).trace);
        assert_eq!(a, b);
    }
}

#[test]
fn halving_dt_keeps_case_sequence() {
    for (s, plan) in [
        baseline(25.0),
        baseline(35.0),
        baseline(40.0),
        skip_scenario(),
    ] {
        let coarse = sim(&s, &plan, DT);
        let fine = sim(&s, &plan, DT / 2.0);
        let seq = |r: &RunReport| {
            r.cases
                .iter()
                .map(|c| (c.segment, c.kind, c.targets.clone()))
                .collect::<Vec<_>>()
        };
        assert_eq!(seq(&coarse), seq(&fine));
        let n_events = events(&coarse).len() as f64;
        assert!(
            (coarse.metrics.mission_time - fine.metrics.mission_time).abs() < 2.0 * DT * n_events
        );
    }
}

#[test]
fn metrics_are_a_fold_of_the_trace() {
    for (s, plan) in [baseline(35.0), baseline(40.0), skip_scenario()] {
        let r = sim(&s, &plan, DT);
        assert_eq!(Metrics::from_trace(&r.trace), r.metrics);
        let text = trace_text(&r.trace);
        let back = read_trace(text.as_bytes()).unwrap();
        assert_eq!(back, r.trace);
    }
}

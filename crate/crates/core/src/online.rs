//! Online replanning of refuel sites while targets burn unknown fuel.
//!
//! Each active segment is treated as a string from the UAV to the upcoming
//! refuel site, laid along the segment path. The string is as long as the fuel
//! left (in meters of flight). Transit shortens both ends equally. Processing
//! only shortens the string, so once the slack is gone the site is pulled back
//! along the path toward the UAV. Pending targets the site passes over are
//! deferred. If holding the site any further would leave the UGV unable to reach
//! it before the tank runs dry, the current target is abandoned and both vehicles
//! head for the site.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::OnlineError;
use crate::geometry::{farthest_within_radius, pursue, Point2D};
use crate::model::{TargetId, TargetSite, VehicleParams, EPS_FUEL, EPS_GEOM, EPS_TIME};
use crate::offline::{PlannedTarget, SegmentPlan};

/// Excess fuel `z_k = U - U_k * fuel_per_meter` of a segment.
pub fn slack(seg: &SegmentPlan, params: &VehicleParams) -> Result<f64, OnlineError> {
    let need = seg.length() * params.fuel_per_meter;
    if need > params.fuel_capacity + EPS_FUEL {
        return Err(OnlineError::OverLength {
            length: seg.length(),
            capacity: params.flight_range(),
        });
    }
    Ok(params.fuel_capacity - need)
}

/// Site arc that keeps the string taut: never ahead of `site_arc`, never behind the UAV.
pub fn backtrack_site(uav_arc: f64, site_arc: f64, fuel: f64, params: &VehicleParams) -> f64 {
    let reach = uav_arc + fuel.max(0.0) / params.fuel_per_meter;
    site_arc.min(reach).max(uav_arc)
}

/// True when the UGV can get to `site` no later than the UAV runs out of fuel.
pub fn ugv_reachable(ugv: Point2D, site: Point2D, fuel: f64, params: &VehicleParams) -> bool {
    ugv.distance(&site) / params.v_ugv <= params.endurance(fuel) + EPS_TIME
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Transit,
    Processing(TargetId),
    ToRendezvous,
    /// At the site, airborne, waiting for the UGV.
    Hovering,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Transit => "transit",
            Mode::Processing(_) => "processing",
            Mode::ToRendezvous => "to_rendezvous",
            Mode::Hovering => "hovering",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CaseKind {
    NoReplan = 1,
    BacktrackAllVisited = 2,
    BacktrackSkip = 3,
    AbandonRendezvous = 4,
    SegmentRepair = 5,
}

impl CaseKind {
    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn from_number(n: u8) -> Option<Self> {
        Some(match n {
            1 => CaseKind::NoReplan,
            2 => CaseKind::BacktrackAllVisited,
            3 => CaseKind::BacktrackSkip,
            4 => CaseKind::AbandonRendezvous,
            5 => CaseKind::SegmentRepair,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseEvent {
    pub kind: CaseKind,
    pub time: f64,
    pub segment: usize,
    pub targets: Vec<TargetId>,
}

/// What happened over a segment's lifetime, for classification.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SegmentHistory {
    pub repaired: bool,
    pub site_moved: bool,
    pub skipped: Vec<TargetId>,
    pub abandoned: Option<TargetId>,
    pub processed: Vec<TargetId>,
    pub planned: usize,
}

/// Case labels for a finished segment: optionally `SegmentRepair`, then exactly one of 1-4.
pub fn classify_segment_outcome(history: &SegmentHistory) -> Vec<CaseKind> {
    let mut out = Vec::with_capacity(2);
    if history.repaired {
        out.push(CaseKind::SegmentRepair);
    }
    out.push(if history.abandoned.is_some() {
        CaseKind::AbandonRendezvous
    } else if !history.skipped.is_empty() {
        CaseKind::BacktrackSkip
    } else if history.site_moved {
        CaseKind::BacktrackAllVisited
    } else {
        CaseKind::NoReplan
    });
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Arrival {
    Target(TargetId),
    Site,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransitOutcome {
    /// Fuel actually burned; the rest of the budget belongs to the next sub-step.
    pub used: f64,
    pub arrived: Option<Arrival>,
}

/// Fuel burned on the current target this sub-step, and whether it finished.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProcessingTick {
    pub burned: f64,
    pub completed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Abandonment {
    pub target: TargetId,
    /// Targets newly deferred by this abandonment: the current one, then the rest.
    pub deferred: Vec<TargetId>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProcessingOutcome {
    pub backtracked: bool,
    pub skipped: Vec<TargetId>,
    pub completed: Option<TargetId>,
    pub abandoned: Option<Abandonment>,
}

/// Live state of the active segment.
#[derive(Clone, Debug)]
pub struct SegmentState {
    plan: SegmentPlan,
    uav_arc: f64,
    fuel: f64,
    site_arc: f64,
    /// Indices into `plan.targets()` not yet reached, in visit order.
    pending: VecDeque<usize>,
    current: Option<usize>,
    deferred: Vec<usize>,
    mode: Mode,
    history: SegmentHistory,
}

impl SegmentState {
    /// Fresh segment on a full tank.
    pub fn new(plan: SegmentPlan, params: &VehicleParams, repaired: bool) -> Self {
        Self::with_fuel(plan, params.fuel_capacity, repaired)
    }

    pub fn with_fuel(plan: SegmentPlan, fuel: f64, repaired: bool) -> Self {
        let n = plan.targets().len();
        let site_arc = plan.length();
        Self {
            plan,
            uav_arc: 0.0,
            fuel,
            site_arc,
            pending: (0..n).collect(),
            current: None,
            deferred: Vec::new(),
            mode: Mode::Transit,
            history: SegmentHistory {
                repaired,
                planned: n,
                ..Default::default()
            },
        }
    }

    pub fn plan(&self) -> &SegmentPlan {
        &self.plan
    }

    pub fn uav_arc(&self) -> f64 {
        self.uav_arc
    }

    pub fn fuel(&self) -> f64 {
        self.fuel
    }

    pub fn site_arc(&self) -> f64 {
        self.site_arc
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn history(&self) -> &SegmentHistory {
        &self.history
    }

    pub fn uav_position(&self) -> Point2D {
        self.plan.path().point_at_clamped(self.uav_arc)
    }

    pub fn site_position(&self) -> Point2D {
        self.plan.path().point_at_clamped(self.site_arc)
    }

    pub fn pending_targets(&self) -> Vec<PlannedTarget> {
        self.pending
            .iter()
            .map(|&i| self.plan.targets()[i])
            .collect()
    }

    pub fn current_target(&self) -> Option<PlannedTarget> {
        self.current.map(|i| self.plan.targets()[i])
    }

    /// Deferred targets in original visit order.
    pub fn deferred_targets(&self) -> Vec<TargetSite> {
        let mut idx = self.deferred.clone();
        idx.sort_unstable();
        idx.into_iter()
            .map(|i| {
                let t = self.plan.targets()[i];
                TargetSite {
                    id: t.id,
                    position: t.position,
                }
            })
            .collect()
    }

    /// Remaining string slack in meters, `fuel/fpm - (site_arc - uav_arc)`.
    pub fn string_slack(&self, params: &VehicleParams) -> f64 {
        self.fuel / params.fuel_per_meter - (self.site_arc - self.uav_arc)
    }

    fn burn(&mut self, amount: f64) -> Result<(), OnlineError> {
        let fuel = self.fuel - amount;
        if fuel < -EPS_FUEL {
            return Err(OnlineError::NegativeFuel { fuel });
        }
        self.fuel = fuel.max(0.0);
        Ok(())
    }

    fn wrong_mode(&self, expected: &'static str) -> OnlineError {
        OnlineError::WrongMode {
            expected,
            actual: self.mode.name(),
        }
    }

    /// Advances the UAV along the path with at most `budget` fuel, stopping exactly
    /// on the next pending target or the site.
    pub fn on_transit_tick(
        &mut self,
        budget: f64,
        params: &VehicleParams,
    ) -> Result<TransitOutcome, OnlineError> {
        if !matches!(self.mode, Mode::Transit | Mode::ToRendezvous) {
            return Err(self.wrong_mode("transit"));
        }
        let next_target = match self.mode {
            Mode::Transit => self.pending.front().copied(),
            _ => None,
        };
        let stop_arc = next_target
            .map(|i| self.plan.targets()[i].arc.min(self.site_arc))
            .unwrap_or(self.site_arc);
        let gap = (stop_arc - self.uav_arc).max(0.0);
        let affordable = budget.max(0.0) / params.fuel_per_meter;

        if affordable < gap - EPS_GEOM {
            self.burn(budget)?;
            self.uav_arc += affordable;
            return Ok(TransitOutcome {
                used: budget,
                arrived: None,
            });
        }
        let used = gap * params.fuel_per_meter;
        self.burn(used)?;
        self.uav_arc = stop_arc;
        let arrived = match next_target {
            Some(i) if self.plan.targets()[i].arc <= self.site_arc + EPS_GEOM => {
                self.pending.pop_front();
                self.current = Some(i);
                let id = self.plan.targets()[i].id;
                self.mode = Mode::Processing(id);
                Arrival::Target(id)
            }
            _ => {
                self.mode = Mode::Hovering;
                Arrival::Site
            }
        };
        Ok(TransitOutcome {
            used,
            arrived: Some(arrived),
        })
    }

    /// Applies one processing sub-step.
    ///
    /// `ugv` is the UGV position at the start of the sub-step; the UGV is assumed
    /// to pursue the (updated) site at full speed, as the simulator does. The
    /// abandonment check looks one tick of `lookahead_fuel` ahead.
    pub fn on_processing_tick(
        &mut self,
        ugv: Point2D,
        tick: ProcessingTick,
        lookahead_fuel: f64,
        params: &VehicleParams,
    ) -> Result<ProcessingOutcome, OnlineError> {
        let Mode::Processing(id) = self.mode else {
            return Err(self.wrong_mode("processing"));
        };
        let mut out = ProcessingOutcome::default();
        self.burn(tick.burned)?;

        let site = backtrack_site(self.uav_arc, self.site_arc, self.fuel, params);
        if site < self.site_arc - EPS_GEOM {
            out.backtracked = true;
            self.history.site_moved = true;
        }
        self.site_arc = self.site_arc.min(site);

        // pending targets are in arc order; skipped ones are at the back
        let mut skipped = Vec::new();
        while let Some(&i) = self.pending.back() {
            if self.plan.targets()[i].arc > self.site_arc + EPS_GEOM {
                self.pending.pop_back();
                skipped.push(i);
            } else {
                break;
            }
        }
        skipped.reverse();
        for &i in &skipped {
            let tid = self.plan.targets()[i].id;
            out.skipped.push(tid);
            self.history.skipped.push(tid);
        }
        self.deferred.extend(skipped);

        if tick.completed {
            self.current = None;
            self.history.processed.push(id);
            self.mode = Mode::Transit;
            out.completed = Some(id);
            return Ok(out);
        }

        let h = tick.burned / params.burn_rate();
        let ugv_now = pursue(ugv, self.site_position(), params.v_ugv * h);
        if !ugv_reachable(ugv_now, self.site_position(), self.fuel, params)
            || !self.next_tick_safe(ugv_now, lookahead_fuel, params)
        {
            out.abandoned = Some(self.abandon());
        }
        Ok(out)
    }

    /// Whether one more processing tick of `lookahead_fuel` keeps the site reachable.
    pub fn next_tick_safe(
        &self,
        ugv: Point2D,
        lookahead_fuel: f64,
        params: &VehicleParams,
    ) -> bool {
        let fuel = self.fuel - lookahead_fuel;
        if fuel < -EPS_FUEL {
            return false;
        }
        let arc = backtrack_site(self.uav_arc, self.site_arc, fuel, params);
        let site = self.plan.path().point_at_clamped(arc);
        let h = lookahead_fuel / params.burn_rate();
        let ugv_next = pursue(ugv, site, params.v_ugv * h);
        ugv_reachable(ugv_next, site, fuel, params)
    }

    /// Screens a target the UAV has just reached: if even one tick of processing
    /// would break reachability, give it up before burning anything on it.
    pub fn screen_arrival(
        &mut self,
        ugv: Point2D,
        lookahead_fuel: f64,
        params: &VehicleParams,
    ) -> Option<Abandonment> {
        if !matches!(self.mode, Mode::Processing(_)) {
            return None;
        }
        if self.next_tick_safe(ugv, lookahead_fuel, params) {
            None
        } else {
            Some(self.abandon())
        }
    }

    fn abandon(&mut self) -> Abandonment {
        let cur = self.current.take().expect("abandon while processing");
        let target = self.plan.targets()[cur].id;
        let mut moved = vec![cur];
        moved.extend(self.pending.drain(..));
        let deferred = moved.iter().map(|&i| self.plan.targets()[i].id).collect();
        self.deferred.extend(moved);
        self.history.abandoned = Some(target);
        self.mode = Mode::ToRendezvous;
        Abandonment { target, deferred }
    }

    /// Burns fuel while waiting at the site.
    pub fn on_hover_tick(&mut self, burned: f64) -> Result<(), OnlineError> {
        if self.mode != Mode::Hovering {
            return Err(self.wrong_mode("hovering"));
        }
        self.burn(burned)
    }

    pub fn refill(&mut self, params: &VehicleParams) {
        self.fuel = params.fuel_capacity;
    }
}

/// Result of preparing the next segment at a rendezvous.
#[derive(Clone, Debug, PartialEq)]
pub struct Repair {
    pub segment: SegmentPlan,
    /// Targets pushed past the repaired terminal site, in order.
    pub shed: Vec<TargetSite>,
    pub repaired: bool,
    /// Meters the terminal site was pulled back along the path.
    pub backtracked: f64,
}

/// Builds the segment that starts at the actual rendezvous `start`: deferred
/// targets first, then the remaining targets of `next`, ending at its planned site
/// (or at `depot` when no planned segment is left).
///
/// If the path is longer than one tank or its end site is beyond `R` from the
/// start, the terminal site is pulled back along the path to the farthest point
/// satisfying both; targets it passes over are shed, in order, to the following
/// segment.
pub fn transfer_and_repair(
    index: usize,
    start: Point2D,
    deferred: &[TargetSite],
    next: Option<&SegmentPlan>,
    depot: Point2D,
    params: &VehicleParams,
) -> Result<Repair, OnlineError> {
    let mut targets: Vec<TargetSite> = deferred.to_vec();
    let terminal = match next {
        Some(seg) => {
            targets.extend(seg.target_sites());
            seg.terminal()
        }
        None => depot,
    };
    let seg = SegmentPlan::from_stops(index, start, &targets, terminal)?;
    let reach = params.flight_range();
    let range = params.site_range();
    let length = seg.length();
    if length <= reach + EPS_GEOM && start.distance(&terminal) <= range + EPS_GEOM {
        return Ok(Repair {
            segment: seg,
            shed: Vec::new(),
            repaired: false,
            backtracked: 0.0,
        });
    }

    let path = seg.path();
    let verts = path.vertices();
    let mut best = 0.0f64;
    for e in 0..path.edge_count() {
        let s0 = path.vertex_arc(e);
        if s0 > reach + EPS_GEOM {
            break;
        }
        let (a, b) = (verts[e], verts[e + 1]);
        let len = a.distance(&b);
        let u = ((b.x - a.x) / len, (b.y - a.y) / len);
        let t_max = len.min(reach - s0);
        if let Some(t) = farthest_within_radius(a, u, t_max, start, range) {
            best = best.max(s0 + t);
        }
    }
    if best <= EPS_GEOM {
        return Err(match targets.first() {
            Some(t) => OnlineError::PermanentlyInfeasible(t.id),
            None => OnlineError::OverLength {
                length,
                capacity: reach,
            },
        });
    }

    let cut = targets
        .iter()
        .zip(seg.targets())
        .take_while(|(_, p)| p.arc <= best + EPS_GEOM)
        .count();
    let new_terminal = path.point_at_clamped(best);
    let segment = SegmentPlan::from_stops(index, start, &targets[..cut], new_terminal)?;
    Ok(Repair {
        segment,
        shed: targets[cut..].to_vec(),
        repaired: true,
        backtracked: length - best,
    })
}

/// Summary of a finished segment handed back to the mission layer.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentOutcome {
    pub index: usize,
    pub rendezvous: Point2D,
    pub deferred: Vec<TargetSite>,
    pub cases: Vec<CaseKind>,
    pub history: SegmentHistory,
}

/// Mission-level driver: the queue of offline segments, targets carried over
/// between segments and the active [`SegmentState`].
#[derive(Clone, Debug)]
pub struct OnlinePlanner {
    params: VehicleParams,
    depot: Point2D,
    queue: VecDeque<SegmentPlan>,
    carry: Vec<TargetSite>,
    active: SegmentState,
    activations: usize,
}

/// Report of an activation (a fresh segment after rendezvous).
#[derive(Clone, Debug, PartialEq)]
pub struct Activation {
    pub index: usize,
    pub repaired: bool,
    pub backtracked: f64,
    pub shed: Vec<TargetId>,
}

impl OnlinePlanner {
    pub fn new(
        segments: Vec<SegmentPlan>,
        depot: Point2D,
        params: VehicleParams,
    ) -> Result<(Self, Activation), OnlineError> {
        let mut queue: VecDeque<SegmentPlan> = segments.into();
        let first = queue.pop_front();
        let rep = transfer_and_repair(0, depot, &[], first.as_ref(), depot, &params)?;
        let act = Activation {
            index: 0,
            repaired: rep.repaired,
            backtracked: rep.backtracked,
            shed: rep.shed.iter().map(|t| t.id).collect(),
        };
        let planner = Self {
            params,
            depot,
            queue,
            carry: rep.shed,
            active: SegmentState::new(rep.segment, &params, rep.repaired),
            activations: 1,
        };
        Ok((planner, act))
    }

    pub fn active(&self) -> &SegmentState {
        &self.active
    }

    pub fn active_mut(&mut self) -> &mut SegmentState {
        &mut self.active
    }

    pub fn params(&self) -> &VehicleParams {
        &self.params
    }

    pub fn remaining_segments(&self) -> usize {
        self.queue.len()
    }

    /// Targets not yet in the active segment, in visit order.
    pub fn queued_targets(&self) -> Vec<TargetId> {
        self.carry
            .iter()
            .map(|t| t.id)
            .chain(
                self.queue
                    .iter()
                    .flat_map(|s| s.targets().iter().map(|t| t.id)),
            )
            .collect()
    }

    /// True once the UAV is hovering over the depot with nothing left to do.
    pub fn mission_complete(&self) -> bool {
        self.active.mode() == Mode::Hovering
            && self.queue.is_empty()
            && self.carry.is_empty()
            && self.active.deferred.is_empty()
            && self.active.site_position().approx_eq(&self.depot, EPS_GEOM)
    }

    /// Closes the active segment at its rendezvous and activates the next one.
    pub fn rendezvous(&mut self) -> Result<(SegmentOutcome, Activation), OnlineError> {
        let outcome = self.close_active();
        let mut carry = outcome.deferred.clone();
        carry.append(&mut self.carry);
        let next = self.queue.pop_front();
        let index = self.activations;
        let rep = transfer_and_repair(
            index,
            outcome.rendezvous,
            &carry,
            next.as_ref(),
            self.depot,
            &self.params,
        )?;
        self.activations += 1;
        let act = Activation {
            index,
            repaired: rep.repaired,
            backtracked: rep.backtracked,
            shed: rep.shed.iter().map(|t| t.id).collect(),
        };
        self.carry = rep.shed;
        self.active = SegmentState::new(rep.segment, &self.params, rep.repaired);
        Ok((outcome, act))
    }

    /// Outcome of the active segment as it stands (used at mission end).
    pub fn close_active(&self) -> SegmentOutcome {
        SegmentOutcome {
            index: self.active.plan().index,
            rendezvous: self.active.site_position(),
            deferred: self.active.deferred_targets(),
            cases: classify_segment_outcome(&self.active.history),
            history: self.active.history.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point2D {
        Point2D::new(x, y)
    }

    fn site(id: TargetId, x: f64, y: f64) -> TargetSite {
        TargetSite {
            id,
            position: p(x, y),
        }
    }

    fn baseline() -> SegmentPlan {
        SegmentPlan::from_stops(0, p(0.0, 0.0), &[site(1, 10.0, 0.0)], p(20.0, 0.0)).unwrap()
    }

    fn at_target(fuel: f64) -> SegmentState {
        let params = VehicleParams::default();
        let mut s = SegmentState::new(baseline(), &params, false);
        let out = s.on_transit_tick(10.0, &params).unwrap();
        assert_eq!(out.arrived, Some(Arrival::Target(1)));
        s.fuel = fuel;
        s
    }

    #[test]
    fn slack_values() {
        let params = VehicleParams::default();
        let seg20 = SegmentPlan::from_stops(0, p(0.0, 0.0), &[], p(20.0, 0.0)).unwrap();
        assert_eq!(slack(&seg20, &params).unwrap(), 30.0);
        let seg50 = SegmentPlan::from_stops(0, p(0.0, 0.0), &[], p(50.0, 0.0)).unwrap();
        assert_eq!(slack(&seg50, &params).unwrap(), 0.0);
        let seg0 = SegmentPlan::from_stops(0, p(3.0, 3.0), &[], p(3.0, 3.0)).unwrap();
        assert_eq!(slack(&seg0, &params).unwrap(), 50.0);
        let seg60 = SegmentPlan::from_stops(0, p(0.0, 0.0), &[], p(60.0, 0.0)).unwrap();
        assert!(matches!(
            slack(&seg60, &params),
            Err(OnlineError::OverLength { .. })
        ));
    }

    #[test]
    fn backtrack_examples() {
        let params = VehicleParams::default();
        assert_eq!(backtrack_site(10.0, 20.0, 35.0, &params), 20.0);
        assert_eq!(backtrack_site(10.0, 20.0, 5.0, &params), 15.0);
        assert_eq!(backtrack_site(10.0, 20.0, 0.0, &params), 10.0);
        assert_eq!(backtrack_site(10.0, 20.0, -1.0, &params), 10.0);
    }

    #[test]
    fn reachability_examples() {
        let params = VehicleParams::default();
        assert!(ugv_reachable(p(0.0, 0.0), p(4.0, 3.0), 12.0, &params));
        assert!(!ugv_reachable(p(0.0, 0.0), p(4.0, 3.0), 8.0, &params));
        assert!(ugv_reachable(p(4.0, 3.0), p(4.0, 3.0), 0.0, &params));
        // boundary: 5 s each way
        assert!(ugv_reachable(p(0.0, 0.0), p(4.0, 3.0), 10.0, &params));
    }

    #[test]
    fn transit_advances_proportionally() {
        let params = VehicleParams::default();
        let mut s = SegmentState::new(baseline(), &params, false);
        let out = s.on_transit_tick(2.0, &params).unwrap();
        assert_eq!(
            out,
            TransitOutcome {
                used: 2.0,
                arrived: None
            }
        );
        assert_eq!(s.uav_arc(), 2.0);
        assert_eq!(s.fuel(), 48.0);
        assert_eq!(s.site_arc(), 20.0);
    }

    #[test]
    fn transit_splits_at_target() {
        let params = VehicleParams::default();
        let mut s = SegmentState::new(baseline(), &params, false);
        s.uav_arc = 9.5;
        let out = s.on_transit_tick(1.0, &params).unwrap();
        assert_eq!(out.used, 0.5);
        assert_eq!(out.arrived, Some(Arrival::Target(1)));
        assert_eq!(s.uav_arc(), 10.0);
        assert_eq!(s.fuel(), 49.5);
        // the rest of the tick goes to processing
        s.on_processing_tick(
            p(20.0, 0.0),
            ProcessingTick {
                burned: 0.5,
                completed: false,
            },
            0.1,
            &params,
        )
        .unwrap();
        assert_eq!(s.fuel(), 49.0);
    }

    #[test]
    fn transit_at_site_requests_rendezvous() {
        let params = VehicleParams::default();
        let seg = SegmentPlan::from_stops(0, p(0.0, 0.0), &[], p(5.0, 0.0)).unwrap();
        let mut s = SegmentState::new(seg, &params, false);
        s.uav_arc = 5.0;
        let out = s.on_transit_tick(1.0, &params).unwrap();
        assert_eq!(
            out,
            TransitOutcome {
                used: 0.0,
                arrived: Some(Arrival::Site)
            }
        );
        assert_eq!(s.mode(), Mode::Hovering);
    }

    #[test]
    fn transit_rejects_overdraw() {
        let params = VehicleParams::default();
        let mut s = SegmentState::with_fuel(baseline(), 1.0, false);
        assert!(matches!(
            s.on_transit_tick(2.0, &params),
            Err(OnlineError::NegativeFuel { .. })
        ));
    }

    #[test]
    fn processing_backtracks_when_taut() {
        let params = VehicleParams::default();
        let mut s = at_target(10.0);
        let out = s
            .on_processing_tick(
                p(20.0, 0.0),
                ProcessingTick {
                    burned: 5.0,
                    completed: true,
                },
                0.1,
                &params,
            )
            .unwrap();
        assert!(out.backtracked);
        assert_eq!(s.site_arc(), 15.0);
        assert_eq!(s.site_position(), p(15.0, 0.0));
        assert_eq!(s.mode(), Mode::Transit);
        assert!(s.string_slack(&params).abs() < 1e-12);
    }

    #[test]
    fn processing_with_slack_keeps_site() {
        let params = VehicleParams::default();
        let mut s = at_target(40.0);
        let out = s
            .on_processing_tick(
                p(20.0, 0.0),
                ProcessingTick {
                    burned: 25.0,
                    completed: true,
                },
                0.1,
                &params,
            )
            .unwrap();
        assert!(!out.backtracked);
        assert_eq!(s.site_arc(), 20.0);
        assert_eq!(
            classify_segment_outcome(s.history()),
            vec![CaseKind::NoReplan]
        );
    }

    #[test]
    fn processing_wrong_mode() {
        let params = VehicleParams::default();
        let mut s = SegmentState::new(baseline(), &params, false);
        let err = s
            .on_processing_tick(
                p(0.0, 0.0),
                ProcessingTick {
                    burned: 0.1,
                    completed: false,
                },
                0.1,
                &params,
            )
            .unwrap_err();
        assert_eq!(
            err,
            OnlineError::WrongMode {
                expected: "processing",
                actual: "transit"
            }
        );
    }

    #[test]
    fn skip_then_abandon_preserves_order() {
        // t1 at 10, t2 at 15, site at 20; UGV far away so abandonment follows the skip
        let params = VehicleParams::default();
        let seg = SegmentPlan::from_stops(
            0,
            p(0.0, 0.0),
            &[site(1, 10.0, 0.0), site(2, 15.0, 0.0)],
            p(20.0, 0.0),
        )
        .unwrap();
        let mut s = SegmentState::new(seg, &params, false);
        s.on_transit_tick(10.0, &params).unwrap();
        s.fuel = 4.0;
        let out = s
            .on_processing_tick(
                p(20.0, 0.0),
                ProcessingTick {
                    burned: 0.1,
                    completed: false,
                },
                0.1,
                &params,
            )
            .unwrap();
        assert_eq!(out.skipped, vec![2]);
        let ab = out.abandoned.expect("UGV 6 m out with 1.95 s of fuel");
        assert_eq!(ab.target, 1);
        assert_eq!(ab.deferred, vec![1]);
        assert_eq!(s.mode(), Mode::ToRendezvous);
        let ids: Vec<_> = s.deferred_targets().iter().map(|t| t.id).collect();
        assert_eq!(ids, vec![1, 2]);
        assert_eq!(
            classify_segment_outcome(s.history()),
            vec![CaseKind::AbandonRendezvous]
        );
    }

    #[test]
    fn classification_table() {
        let mut h = SegmentHistory::default();
        assert_eq!(classify_segment_outcome(&h), vec![CaseKind::NoReplan]);
        h.site_moved = true;
        assert_eq!(
            classify_segment_outcome(&h),
            vec![CaseKind::BacktrackAllVisited]
        );
        h.skipped.push(3);
        assert_eq!(classify_segment_outcome(&h), vec![CaseKind::BacktrackSkip]);
        h.abandoned = Some(1);
        h.repaired = true;
        assert_eq!(
            classify_segment_outcome(&h),
            vec![CaseKind::SegmentRepair, CaseKind::AbandonRendezvous]
        );
    }

    #[test]
    fn transfer_identity_when_nothing_deferred() {
        let params = VehicleParams::default();
        let next =
            SegmentPlan::from_stops(3, p(20.0, 0.0), &[site(4, 25.0, 5.0)], p(30.0, 0.0)).unwrap();
        let rep =
            transfer_and_repair(3, p(20.0, 0.0), &[], Some(&next), p(0.0, 0.0), &params).unwrap();
        assert_eq!(rep.segment, next);
        assert!(!rep.repaired);
        assert!(rep.shed.is_empty());
    }

    #[test]
    fn transfer_prefixes_deferred() {
        let params = VehicleParams {
            v_ugv: 2.0,
            ..Default::default()
        };
        let next =
            SegmentPlan::from_stops(1, p(20.0, 0.0), &[site(9, 30.0, 0.0)], p(40.0, 0.0)).unwrap();
        let rep = transfer_and_repair(
            1,
            p(14.0, 0.0),
            &[site(2, 15.0, 0.0)],
            Some(&next),
            p(0.0, 0.0),
            &params,
        )
        .unwrap();
        assert_eq!(
            rep.segment.path().vertices(),
            &[p(14.0, 0.0), p(15.0, 0.0), p(30.0, 0.0), p(40.0, 0.0)]
        );
        assert_eq!(rep.segment.length(), 26.0);
        assert!(!rep.repaired);
        let ids: Vec<_> = rep.segment.targets().iter().map(|t| t.id).collect();
        assert_eq!(ids, vec![2, 9]);
    }

    #[test]
    fn repair_backtracks_terminal_on_final_leg() {
        let params = VehicleParams {
            v_ugv: 2.0,
            ..Default::default()
        };
        let next = SegmentPlan::from_stops(1, p(10.0, 10.0), &[], p(30.0, 30.0)).unwrap();
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
        assert!((rep.backtracked - 10.0).abs() < 1e-12);
        assert!((rep.segment.length() - 50.0).abs() < 1e-12);
        assert!(rep.segment.terminal().approx_eq(&p(30.0, 20.0), 1e-12));
        assert!(rep.shed.is_empty());
    }

    #[test]
    fn repair_sheds_targets_beyond_range() {
        // R = 25: only the first 25 m of the outbound leg qualify
        let params = VehicleParams::default();
        let next = SegmentPlan::from_stops(1, p(20.0, 0.0), &[], p(60.0, 0.0)).unwrap();
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
        assert!(rep.segment.terminal().approx_eq(&p(25.0, 0.0), 1e-12));
        assert_eq!(rep.shed, vec![site(7, 30.0, 0.0)]);
        assert!(rep.segment.targets().is_empty());
    }
}

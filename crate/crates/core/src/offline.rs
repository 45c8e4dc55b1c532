//! Offline planning: a closed TSP tour over the targets, cut into segments that
//! each fit one tank and whose end sites the UGV can link within `R`.
//!
//! Processing is assumed free at this stage. The tour is built nearest-neighbor
//! first (ties to the lowest id) and then polished with first-improvement 2-opt.
//! Refuel sites go at the farthest feasible arc along the tour, chosen among the
//! tour vertices and a regular grid of step `delta`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, PlanError};
use crate::geometry::{Point2D, Polyline};
use crate::model::{Scenario, TargetId, TargetSite, VehicleParams, EPS_GEOM};

/// Default spacing of candidate refuel sites along the tour, meters.
pub const DEFAULT_SITE_STEP: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct Tour {
    order: Vec<TargetSite>,
    path: Polyline,
    arcs: Vec<f64>,
}

impl Tour {
    /// Closed tour `depot -> order... -> depot`.
    pub fn from_order(depot: Point2D, order: Vec<TargetSite>) -> Result<Self, GeometryError> {
        let mut pts = Vec::with_capacity(order.len() + 2);
        pts.push(depot);
        pts.extend(order.iter().map(|t| t.position));
        pts.push(depot);
        let (path, map) = Polyline::from_points_dedup(&pts)?;
        let arcs = map[1..=order.len()]
            .iter()
            .map(|&v| path.vertex_arc(v))
            .collect();
        Ok(Self { order, path, arcs })
    }

    pub fn order(&self) -> &[TargetSite] {
        &self.order
    }

    pub fn path(&self) -> &Polyline {
        &self.path
    }

    /// Arc length at which each target of `order()` is reached.
    pub fn target_arcs(&self) -> &[f64] {
        &self.arcs
    }

    pub fn length(&self) -> f64 {
        self.path.length()
    }

    pub fn depot(&self) -> Point2D {
        self.path.first()
    }
}

pub fn build_tour(scenario: &Scenario) -> Result<Tour, PlanError> {
    build_tour_from(scenario.depot, scenario.targets())
}

pub fn build_tour_from(depot: Point2D, targets: &[TargetSite]) -> Result<Tour, PlanError> {
    if targets.is_empty() {
        return Err(PlanError::NoTargets);
    }
    let mut remaining: Vec<TargetSite> = targets.to_vec();
    remaining.sort_by_key(|t| t.id);

    let mut order = Vec::with_capacity(remaining.len());
    let mut here = depot;
    while !remaining.is_empty() {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, t) in remaining.iter().enumerate() {
            let d = here.distance(&t.position);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        let t = remaining.remove(best);
        here = t.position;
        order.push(t);
    }

    two_opt(depot, &mut order);
    Ok(Tour::from_order(depot, order)?)
}

/// First-improvement 2-opt with the depot pinned at the start of the closed tour.
fn two_opt(depot: Point2D, order: &mut [TargetSite]) {
    let m = order.len() + 1;
    if m < 4 {
        return;
    }
    let pos = |order: &[TargetSite], k: usize| -> Point2D {
        if k.is_multiple_of(m) {
            depot
        } else {
            order[k - 1].position
        }
    };
    'search: loop {
        for i in 0..m - 1 {
            for j in i + 2..m {
                if i == 0 && j == m - 1 {
                    continue;
                }
                let a = pos(order, i);
                let b = pos(order, i + 1);
                let c = pos(order, j);
                let d = pos(order, (j + 1) % m);
                let delta = a.distance(&c) + b.distance(&d) - a.distance(&b) - c.distance(&d);
                if delta < -EPS_GEOM {
                    // reverse tour positions i+1..=j, i.e. order[i..j]
                    order[i..j].reverse();
                    continue 'search;
                }
            }
        }
        break;
    }
}

/// Best improvement any single 2-opt exchange could make on the tour
/// (negative means the tour is not 2-opt optimal).
pub fn best_two_opt_delta(tour: &Tour) -> f64 {
    let mut pts = vec![tour.depot()];
    pts.extend(tour.order().iter().map(|t| t.position));
    let m = pts.len();
    let mut best = 0.0f64;
    for i in 0..m.saturating_sub(1) {
        for j in i + 2..m {
            if i == 0 && j == m - 1 {
                continue;
            }
            let (a, b, c, d) = (pts[i], pts[i + 1], pts[j], pts[(j + 1) % m]);
            best = best.min(a.distance(&c) + b.distance(&d) - a.distance(&b) - c.distance(&d));
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannedTarget {
    pub id: TargetId,
    pub position: Point2D,
    /// Arc length along the segment path.
    pub arc: f64,
}

/// One refuel-to-refuel leg of the UAV path.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentPlan {
    pub index: usize,
    path: Polyline,
    targets: Vec<PlannedTarget>,
}

impl SegmentPlan {
    /// Path through `start`, each target in order, then `terminal`. Coincident
    /// consecutive points share a vertex.
    pub fn from_stops(
        index: usize,
        start: Point2D,
        targets: &[TargetSite],
        terminal: Point2D,
    ) -> Result<Self, GeometryError> {
        let mut pts = Vec::with_capacity(targets.len() + 2);
        pts.push(start);
        pts.extend(targets.iter().map(|t| t.position));
        pts.push(terminal);
        let (path, map) = Polyline::from_points_dedup(&pts)?;
        let targets = targets
            .iter()
            .zip(&map[1..=targets.len()])
            .map(|(t, &v)| PlannedTarget {
                id: t.id,
                position: t.position,
                arc: path.vertex_arc(v),
            })
            .collect();
        Ok(Self {
            index,
            path,
            targets,
        })
    }

    pub fn path(&self) -> &Polyline {
        &self.path
    }

    pub fn targets(&self) -> &[PlannedTarget] {
        &self.targets
    }

    pub fn target_sites(&self) -> Vec<TargetSite> {
        self.targets
            .iter()
            .map(|t| TargetSite {
                id: t.id,
                position: t.position,
            })
            .collect()
    }

    /// `U_k`, meters.
    pub fn length(&self) -> f64 {
        self.path.length()
    }

    pub fn start(&self) -> Point2D {
        self.path.first()
    }

    pub fn terminal(&self) -> Point2D {
        self.path.last()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MissionPlan {
    pub segments: Vec<SegmentPlan>,
    /// Segment end points in order, starting and ending at the depot.
    pub refuel_sites: Vec<Point2D>,
}

impl MissionPlan {
    pub fn from_segments(segments: Vec<SegmentPlan>) -> Self {
        let mut refuel_sites: Vec<Point2D> = segments.iter().map(|s| s.start()).collect();
        if let Some(last) = segments.last() {
            refuel_sites.push(last.terminal());
        }
        Self {
            segments,
            refuel_sites,
        }
    }

    pub fn total_length(&self) -> f64 {
        self.segments.iter().map(|s| s.length()).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&PlanDoc::from(self)).expect("plan serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let doc: PlanDoc = serde_json::from_str(text).map_err(|e| e.to_string())?;
        doc.try_into()
    }
}

pub fn split_tour(
    tour: &Tour,
    params: &VehicleParams,
    delta: f64,
) -> Result<MissionPlan, PlanError> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(PlanError::InvalidStep(delta));
    }
    let path = tour.path();
    let total = path.length();
    let reach = params.flight_range();
    let range = params.site_range();

    let mut candidates: Vec<f64> = path.cumulative_arc().to_vec();
    let steps = (total / delta).floor() as usize;
    candidates.extend((1..=steps).map(|k| k as f64 * delta).filter(|&a| a < total));
    candidates.sort_by(f64::total_cmp);
    candidates.dedup_by(|a, b| (*a - *b).abs() <= EPS_GEOM);

    let arcs = tour.target_arcs();
    let order = tour.order();
    let mut segments = Vec::new();
    let mut prev_arc = 0.0;
    let mut prev_site = tour.depot();
    let mut next_target = 0;
    while prev_arc < total - EPS_GEOM {
        let lo = candidates.partition_point(|&a| a <= prev_arc + EPS_GEOM);
        let hi = candidates.partition_point(|&a| a <= prev_arc + reach + EPS_GEOM);
        let cut = candidates[lo..hi]
            .iter()
            .rev()
            .copied()
            .find(|&a| path.point_at_clamped(a).distance(&prev_site) <= range + EPS_GEOM);
        let Some(cut) = cut else {
            return Err(PlanError::Infeasible { arc: prev_arc });
        };
        let site = path.point_at_clamped(cut);
        let first = next_target;
        while next_target < order.len() && arcs[next_target] <= cut + EPS_GEOM {
            next_target += 1;
        }
        segments.push(SegmentPlan::from_stops(
            segments.len(),
            prev_site,
            &order[first..next_target],
            site,
        )?);
        prev_arc = cut;
        prev_site = site;
    }
    Ok(MissionPlan::from_segments(segments))
}

/// Tour then split, with the default site step.
pub fn plan_mission(scenario: &Scenario) -> Result<MissionPlan, PlanError> {
    let tour = build_tour(scenario)?;
    split_tour(&tour, &scenario.params, DEFAULT_SITE_STEP)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    NoSegments,
    SegmentOverLength {
        segment: usize,
        length: f64,
        limit: f64,
    },
    SiteGapExceedsRange {
        segment: usize,
        gap: f64,
        range: f64,
    },
    ChainBreak {
        segment: usize,
    },
    StartNotAtDepot,
    EndNotAtDepot,
    SiteListMismatch,
    UncoveredTarget {
        id: TargetId,
    },
    DuplicatedTarget {
        id: TargetId,
    },
    UnknownTarget {
        id: TargetId,
    },
    TargetOffPath {
        segment: usize,
        id: TargetId,
    },
    TargetOrder {
        segment: usize,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_plan(plan: &MissionPlan, scenario: &Scenario) -> ValidationReport {
    let params = &scenario.params;
    let mut v = Vec::new();
    let Some(first) = plan.segments.first() else {
        return ValidationReport {
            violations: vec![Violation::NoSegments],
        };
    };
    let last = plan.segments.last().unwrap();
    if !first.start().approx_eq(&scenario.depot, EPS_GEOM) {
        v.push(Violation::StartNotAtDepot);
    }
    if !last.terminal().approx_eq(&scenario.depot, EPS_GEOM) {
        v.push(Violation::EndNotAtDepot);
    }
    let expected_sites = MissionPlan::from_segments(plan.segments.clone()).refuel_sites;
    if expected_sites.len() != plan.refuel_sites.len()
        || expected_sites
            .iter()
            .zip(&plan.refuel_sites)
            .any(|(a, b)| !a.approx_eq(b, EPS_GEOM))
    {
        v.push(Violation::SiteListMismatch);
    }

    let limit = params.flight_range();
    let range = params.site_range();
    let mut seen: BTreeMap<TargetId, usize> = BTreeMap::new();
    for (k, seg) in plan.segments.iter().enumerate() {
        if seg.length() > limit + EPS_GEOM {
            v.push(Violation::SegmentOverLength {
                segment: k,
                length: seg.length(),
                limit,
            });
        }
        let gap = seg.start().distance(&seg.terminal());
        if gap > range + EPS_GEOM {
            v.push(Violation::SiteGapExceedsRange {
                segment: k,
                gap,
                range,
            });
        }
        if k > 0
            && !plan.segments[k - 1]
                .terminal()
                .approx_eq(&seg.start(), EPS_GEOM)
        {
            v.push(Violation::ChainBreak { segment: k });
        }
        if seg
            .targets()
            .windows(2)
            .any(|w| w[1].arc < w[0].arc - EPS_GEOM)
        {
            v.push(Violation::TargetOrder { segment: k });
        }
        for t in seg.targets() {
            *seen.entry(t.id).or_default() += 1;
            let on_path = seg
                .path()
                .point_at_arc(t.arc)
                .map(|p| p.approx_eq(&t.position, 1e-6))
                .unwrap_or(false);
            let known = scenario
                .target(t.id)
                .map(|s| s.position.approx_eq(&t.position, 1e-6));
            match known {
                None => v.push(Violation::UnknownTarget { id: t.id }),
                Some(false) => v.push(Violation::TargetOffPath {
                    segment: k,
                    id: t.id,
                }),
                Some(true) if !on_path => v.push(Violation::TargetOffPath {
                    segment: k,
                    id: t.id,
                }),
                _ => {}
            }
        }
    }
    for t in scenario.targets() {
        match seen.get(&t.id) {
            None => v.push(Violation::UncoveredTarget { id: t.id }),
            Some(&n) if n > 1 => v.push(Violation::DuplicatedTarget { id: t.id }),
            _ => {}
        }
    }
    ValidationReport { violations: v }
}

// JSON document form of a plan.

#[derive(Serialize, Deserialize)]
struct PlanDoc {
    segments: Vec<SegmentDoc>,
    refuel_sites: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct SegmentDoc {
    index: usize,
    length: f64,
    path: Vec<[f64; 2]>,
    targets: Vec<TargetDoc>,
}

#[derive(Serialize, Deserialize)]
struct TargetDoc {
    id: TargetId,
    x: f64,
    y: f64,
    arc: f64,
}

impl From<&MissionPlan> for PlanDoc {
    fn from(plan: &MissionPlan) -> Self {
        PlanDoc {
            segments: plan
                .segments
                .iter()
                .map(|s| SegmentDoc {
                    index: s.index,
                    length: s.length(),
                    path: s.path().vertices().iter().map(|p| [p.x, p.y]).collect(),
                    targets: s
                        .targets()
                        .iter()
                        .map(|t| TargetDoc {
                            id: t.id,
                            x: t.position.x,
                            y: t.position.y,
                            arc: t.arc,
                        })
                        .collect(),
                })
                .collect(),
            refuel_sites: plan.refuel_sites.iter().map(|p| [p.x, p.y]).collect(),
        }
    }
}

impl TryFrom<PlanDoc> for MissionPlan {
    type Error = String;

    fn try_from(doc: PlanDoc) -> Result<Self, String> {
        let mut segments = Vec::with_capacity(doc.segments.len());
        for s in doc.segments {
            let (start, terminal) = match (s.path.first(), s.path.last()) {
                (Some(a), Some(b)) => (Point2D::new(a[0], a[1]), Point2D::new(b[0], b[1])),
                _ => return Err(format!("segment {} has an empty path", s.index)),
            };
            let sites: Vec<TargetSite> = s
                .targets
                .iter()
                .map(|t| TargetSite {
                    id: t.id,
                    position: Point2D::new(t.x, t.y),
                })
                .collect();
            let seg = SegmentPlan::from_stops(s.index, start, &sites, terminal)
                .map_err(|e| format!("segment {}: {e}", s.index))?;
            if (seg.length() - s.length).abs() > 1e-6 {
                return Err(format!(
                    "segment {} length {} disagrees with its path ({})",
                    s.index,
                    s.length,
                    seg.length()
                ));
            }
            segments.push(seg);
        }
        Ok(MissionPlan {
            segments,
            refuel_sites: doc
                .refuel_sites
                .iter()
                .map(|p| Point2D::new(p[0], p[1]))
                .collect(),
        })
    }
}

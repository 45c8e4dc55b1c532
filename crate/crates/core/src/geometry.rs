//! Planar points and arc-length parametrized polylines.

use serde::{Deserialize, Serialize};

use crate::error::GeometryError;
use crate::model::EPS_GEOM;

/// A position on the flat mission terrain, in meters.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lerp(&self, other: &Point2D, t: f64) -> Point2D {
        Point2D::new(
            self.x + (other.x - self.x) * t,
            self.y + (other.y - self.y) * t,
        )
    }

    pub fn approx_eq(&self, other: &Point2D, eps: f64) -> bool {
        self.distance(other) <= eps
    }
}

impl From<(f64, f64)> for Point2D {
    fn from((x, y): (f64, f64)) -> Self {
        Point2D::new(x, y)
    }
}

/// Moves `from` straight toward `goal` by at most `max_step` meters, stopping on the goal.
///
/// This is the kinematic point model used for the ground vehicle; the planner's
/// reachability lookahead and the simulator both call it so their predictions agree.
pub fn pursue(from: Point2D, goal: Point2D, max_step: f64) -> Point2D {
    let d = from.distance(&goal);
    if d <= max_step || d == 0.0 {
        goal
    } else {
        from.lerp(&goal, max_step / d)
    }
}

/// An open polyline with precomputed cumulative arc lengths.
///
/// Built through [`Polyline::new`], consecutive vertices are distinct. The only
/// exception is the single-vertex form produced by [`Polyline::from_points_dedup`]
/// when every input point coincides, which has zero length.
#[derive(Clone, Debug, PartialEq)]
pub struct Polyline {
    vertices: Vec<Point2D>,
    cumulative_arc: Vec<f64>,
}

impl Polyline {
    pub fn new(vertices: Vec<Point2D>) -> Result<Self, GeometryError> {
        if vertices.len() < 2 {
            return Err(GeometryError::TooFewVertices(vertices.len()));
        }
        if let Some(i) = vertices.iter().position(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite(i));
        }
        let mut cumulative_arc = Vec::with_capacity(vertices.len());
        cumulative_arc.push(0.0);
        for (i, w) in vertices.windows(2).enumerate() {
            let len = w[0].distance(&w[1]);
            if len <= EPS_GEOM {
                return Err(GeometryError::ZeroLengthEdge(i));
            }
            cumulative_arc.push(cumulative_arc[i] + len);
        }
        Ok(Self {
            vertices,
            cumulative_arc,
        })
    }

    /// Builds a polyline after collapsing consecutive points that lie within `EPS_GEOM`.
    ///
    /// Returns the polyline and, for each input point, the index of the vertex it
    /// collapsed onto.
    pub fn from_points_dedup(points: &[Point2D]) -> Result<(Self, Vec<usize>), GeometryError> {
        if points.is_empty() {
            return Err(GeometryError::TooFewVertices(0));
        }
        if let Some(i) = points.iter().position(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite(i));
        }
        let mut vertices: Vec<Point2D> = Vec::with_capacity(points.len());
        let mut map = Vec::with_capacity(points.len());
        for p in points {
            match vertices.last() {
                Some(last) if last.distance(p) <= EPS_GEOM => {}
                _ => vertices.push(*p),
            }
            map.push(vertices.len() - 1);
        }
        if vertices.len() == 1 {
            return Ok((
                Self {
                    vertices,
                    cumulative_arc: vec![0.0],
                },
                map,
            ));
        }
        Ok((Self::new(vertices)?, map))
    }

    pub fn vertices(&self) -> &[Point2D] {
        &self.vertices
    }

    pub fn cumulative_arc(&self) -> &[f64] {
        &self.cumulative_arc
    }

    pub fn first(&self) -> Point2D {
        self.vertices[0]
    }

    pub fn last(&self) -> Point2D {
        self.vertices[self.vertices.len() - 1]
    }

    pub fn length(&self) -> f64 {
        self.cumulative_arc[self.cumulative_arc.len() - 1]
    }

    pub fn edge_count(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Arc length at the start of vertex `i`.
    pub fn vertex_arc(&self, i: usize) -> f64 {
        self.cumulative_arc[i]
    }

    pub fn reversed(&self) -> Polyline {
        let mut v = self.vertices.clone();
        v.reverse();
        if v.len() == 1 {
            return self.clone();
        }
        Polyline::new(v).expect("reversal preserves validity")
    }

    /// Point at arc length `s`. Values within `EPS_GEOM` outside `[0, L]` are clamped.
    pub fn point_at_arc(&self, s: f64) -> Result<Point2D, GeometryError> {
        let len = self.length();
        if !s.is_finite() || s < -EPS_GEOM || s > len + EPS_GEOM {
            return Err(GeometryError::ArcOutOfRange {
                arc: s,
                length: len,
            });
        }
        Ok(self.point_at_clamped(s))
    }

    /// Same as [`point_at_arc`](Self::point_at_arc) but clamps any input into range.
    pub fn point_at_clamped(&self, s: f64) -> Point2D {
        let len = self.length();
        if s <= 0.0 || self.vertices.len() == 1 {
            return self.first();
        }
        if s >= len {
            return self.last();
        }
        // first cumulative arc strictly greater than s
        let hi = self.cumulative_arc.partition_point(|&a| a <= s);
        let i = hi - 1;
        let edge = self.cumulative_arc[hi] - self.cumulative_arc[i];
        let t = (s - self.cumulative_arc[i]) / edge;
        self.vertices[i].lerp(&self.vertices[hi], t)
    }

    /// Sub-polyline between arcs `a <= b`. Interior vertices strictly between the
    /// two arcs are kept.
    pub fn slice(&self, a: f64, b: f64) -> Result<Polyline, GeometryError> {
        let start = self.point_at_arc(a)?;
        let end = self.point_at_arc(b)?;
        let mut pts = vec![start];
        for (v, &arc) in self.vertices.iter().zip(&self.cumulative_arc) {
            if arc > a + EPS_GEOM && arc < b - EPS_GEOM {
                pts.push(*v);
            }
        }
        pts.push(end);
        Ok(Polyline::from_points_dedup(&pts)?.0)
    }
}

/// Largest `t` in `[0, t_max]` such that `|a + t*u - center| <= radius`, where `u` is a
/// unit vector. Returns `None` if no such `t` exists.
pub(crate) fn farthest_within_radius(
    a: Point2D,
    u: (f64, f64),
    t_max: f64,
    center: Point2D,
    radius: f64,
) -> Option<f64> {
    // |w + t u|^2 <= r^2 with w = a - center
    let wx = a.x - center.x;
    let wy = a.y - center.y;
    let b = wx * u.0 + wy * u.1;
    let c = wx * wx + wy * wy - radius * radius;
    let disc = b * b - c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let lo = -b - sq;
    let hi = -b + sq;
    if hi < 0.0 || lo > t_max {
        return None;
    }
    Some(hi.min(t_max))
}

//! Planar poses, oriented boxes, separating-axis overlap tests, cubic Bézier
//! curves and polylines.

use std::f64::consts::PI;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{ArgusError, Result};

pub type Point2 = Vector2<f64>;

/// Wraps an angle into (−π, π].
pub fn normalize_angle(angle: f64) -> f64 {
    let wrapped = angle.rem_euclid(2.0 * PI);
    if wrapped > PI {
        wrapped - 2.0 * PI
    } else {
        wrapped
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawPose")]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

#[derive(Deserialize)]
struct RawPose {
    x: f64,
    y: f64,
    theta: f64,
}

impl From<RawPose> for Pose2 {
    fn from(raw: RawPose) -> Self {
        Pose2::new(raw.x, raw.y, raw.theta)
    }
}

impl Pose2 {
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    pub fn heading(&self) -> Point2 {
        Point2::new(self.theta.cos(), self.theta.sin())
    }

    /// Expresses a world point in this pose's frame (x forward, y left).
    pub fn to_local(&self, p: &Point2) -> Point2 {
        let d = p - self.position();
        let (s, c) = self.theta.sin_cos();
        Point2::new(c * d.x + s * d.y, -s * d.x + c * d.y)
    }
}

/// Rectangle footprint of an actor or virtual region at one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrientedBox {
    pub center: Pose2,
    pub length: f64,
    pub width: f64,
    pub speed: f64,
}

impl OrientedBox {
    pub fn new(center: Pose2, length: f64, width: f64, speed: f64) -> Result<Self> {
        let valid = |v: f64| v.is_finite() && v > 0.0;
        if !valid(length) || !valid(width) {
            return Err(ArgusError::InvalidArgument(format!(
                "box dimensions must be positive, got {length}×{width}"
            )));
        }
        if !(speed.is_finite() && speed >= 0.0) {
            return Err(ArgusError::InvalidArgument(format!(
                "box speed must be non-negative, got {speed}"
            )));
        }
        Ok(Self {
            center,
            length,
            width,
            speed,
        })
    }

    pub fn position(&self) -> Point2 {
        self.center.position()
    }

    /// Unit vectors along the box length and width.
    pub fn axes(&self) -> [Point2; 2] {
        let (s, c) = self.center.theta.sin_cos();
        [Point2::new(c, s), Point2::new(-s, c)]
    }

    /// Corners in counter-clockwise order starting front-left.
    pub fn corners(&self) -> [Point2; 4] {
        let [u, v] = self.axes();
        let hl = u * (self.length / 2.0);
        let hw = v * (self.width / 2.0);
        let c = self.position();
        [c + hl + hw, c - hl + hw, c - hl - hw, c + hl - hw]
    }

    /// Closed containment test.
    pub fn contains(&self, p: &Point2) -> bool {
        let local = self.center.to_local(p);
        local.x.abs() <= self.length / 2.0 && local.y.abs() <= self.width / 2.0
    }

    /// Half extent of the footprint projected on a unit direction.
    pub fn half_extent_along(&self, dir: &Point2) -> f64 {
        let [u, v] = self.axes();
        (self.length / 2.0) * u.dot(dir).abs() + (self.width / 2.0) * v.dot(dir).abs()
    }
}

/// Smallest overlap of the two projected intervals over all four candidate
/// axes. Positive means penetration depth, negative means separation
/// distance along the best separating axis.
pub fn sat_overlap_depth(a: &OrientedBox, b: &OrientedBox) -> f64 {
    let d = b.position() - a.position();
    let mut depth = f64::INFINITY;
    for axis in a.axes().iter().chain(b.axes().iter()) {
        let reach = a.half_extent_along(axis) + b.half_extent_along(axis);
        depth = depth.min(reach - d.dot(axis).abs());
    }
    depth
}

/// Closed-set overlap test: boxes that merely touch intersect.
pub fn sat_intersects(a: &OrientedBox, b: &OrientedBox) -> bool {
    sat_overlap_depth(a, b) >= 0.0
}

/// Scales length and width by `factor` around an unchanged centre.
pub fn enlarge_box(b: &OrientedBox, factor: f64) -> Result<OrientedBox> {
    if !(factor.is_finite() && factor >= 1.0) {
        return Err(ArgusError::InvalidArgument(format!(
            "enlargement factor must be >= 1, got {factor}"
        )));
    }
    Ok(OrientedBox {
        length: b.length * factor,
        width: b.width * factor,
        ..*b
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BezierControl {
    pub p0: Point2,
    pub p1: Point2,
    pub p2: Point2,
    pub p3: Point2,
}

impl BezierControl {
    pub fn eval(&self, zeta: f64) -> Point2 {
        let u = 1.0 - zeta;
        self.p0 * (u * u * u)
            + self.p1 * (3.0 * u * u * zeta)
            + self.p2 * (3.0 * u * zeta * zeta)
            + self.p3 * (zeta * zeta * zeta)
    }

    /// `n` samples at uniform parameter spacing; endpoints are exact.
    pub fn sample(&self, n: usize) -> Result<Vec<Point2>> {
        if n < 2 {
            return Err(ArgusError::InvalidArgument(format!(
                "bezier sampling needs at least 2 points, got {n}"
            )));
        }
        let last = n - 1;
        Ok((0..n)
            .map(|i| match i {
                0 => self.p0,
                i if i == last => self.p3,
                i => self.eval(i as f64 / last as f64),
            })
            .collect())
    }
}

pub fn bezier_sample(c: &BezierControl, n: usize) -> Result<Vec<Point2>> {
    c.sample(n)
}

/// Projection of a point onto a polyline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolylineProjection {
    /// Arc length of the foot point from the polyline start. Points beyond
    /// either end are projected onto the extended end segments.
    pub station: f64,
    /// Signed lateral offset, positive to the left of travel.
    pub lateral: f64,
    /// Tangent heading at the foot point.
    pub heading: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2>", into = "Vec<Point2>")]
pub struct Polyline {
    points: Vec<Point2>,
    cumulative: Vec<f64>,
}

impl TryFrom<Vec<Point2>> for Polyline {
    type Error = ArgusError;

    fn try_from(points: Vec<Point2>) -> Result<Self> {
        Polyline::new(points)
    }
}

impl From<Polyline> for Vec<Point2> {
    fn from(line: Polyline) -> Self {
        line.points
    }
}

impl Polyline {
    /// Builds a polyline, dropping consecutive duplicate vertices.
    pub fn new(raw: Vec<Point2>) -> Result<Self> {
        let mut points: Vec<Point2> = Vec::with_capacity(raw.len());
        for p in raw {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(ArgusError::InvalidArgument("non-finite polyline vertex".into()));
            }
            if points.last().is_none_or(|q| (p - q).norm() > 1e-9) {
                points.push(p);
            }
        }
        if points.len() < 2 {
            return Err(ArgusError::InvalidArgument(
                "polyline needs at least two distinct vertices".into(),
            ));
        }
        let mut cumulative = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in points.windows(2) {
            acc += (w[1] - w[0]).norm();
            cumulative.push(acc);
        }
        Ok(Self { points, cumulative })
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn length(&self) -> f64 {
        *self.cumulative.last().unwrap_or(&0.0)
    }

    fn segment_heading(&self, i: usize) -> f64 {
        let d = self.points[i + 1] - self.points[i];
        d.y.atan2(d.x)
    }

    /// Point and tangent heading at an arc length; extrapolates linearly past
    /// either end.
    pub fn pose_at(&self, station: f64) -> Pose2 {
        let nseg = self.points.len() - 1;
        let i = match self
            .cumulative
            .binary_search_by(|c| c.total_cmp(&station))
        {
            Ok(i) => i.min(nseg - 1),
            Err(i) => i.saturating_sub(1).min(nseg - 1),
        };
        let a = self.points[i];
        let b = self.points[i + 1];
        let seg_len = self.cumulative[i + 1] - self.cumulative[i];
        let t = (station - self.cumulative[i]) / seg_len;
        let p = a + (b - a) * t;
        Pose2::new(p.x, p.y, self.segment_heading(i))
    }

    pub fn project(&self, p: &Point2) -> PolylineProjection {
        let nseg = self.points.len() - 1;
        let mut best: Option<(f64, PolylineProjection)> = None;
        for i in 0..nseg {
            let a = self.points[i];
            let b = self.points[i + 1];
            let ab = b - a;
            let len = ab.norm();
            let dir = ab / len;
            let mut t = (p - a).dot(&dir);
            if i > 0 {
                t = t.max(0.0);
            }
            if i + 1 < nseg {
                t = t.min(len);
            }
            let foot = a + dir * t;
            let offset = p - foot;
            let dist = offset.norm();
            let lateral = dir.x * offset.y - dir.y * offset.x;
            let cand = PolylineProjection {
                station: self.cumulative[i] + t,
                lateral,
                heading: dir.y.atan2(dir.x),
            };
            if best.as_ref().is_none_or(|(d, _)| dist < *d - 1e-12) {
                best = Some((dist, cand));
            }
        }
        best.map(|(_, proj)| proj).expect("polyline has a segment")
    }

    /// Shortest distance from `p` to any segment (no extrapolation).
    pub fn distance_to(&self, p: &Point2) -> f64 {
        self.points
            .windows(2)
            .map(|w| point_segment_distance(p, &w[0], &w[1]))
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn point_segment_distance(p: &Point2, a: &Point2, b: &Point2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

use crate::error::Result;
use crate::geometry::{BezierControl, Point2, Pose2};
use crate::scenario::RoadMap;

/// Intersection of the forward heading ray from `a` and the backward heading
/// ray into `b`. Rejected when nearly parallel, behind either pose, or far
/// beyond the chord.
fn heading_ray_intersection(a: &Pose2, b: &Pose2) -> Option<Point2> {
    let da = a.heading();
    let db = b.heading();
    let cross = da.x * db.y - da.y * db.x;
    if cross.abs() < 1e-6 {
        return None;
    }
    let w = b.position() - a.position();
    // a + s·da = b − u·db
    let s = (w.x * db.y - w.y * db.x) / cross;
    let u = (da.x * w.y - da.y * w.x) / cross;
    let chord = w.norm();
    (s > 0.0 && u > 0.0 && s <= 2.0 * chord && u <= 2.0 * chord).then(|| a.position() + da * s)
}

/// Nearest point on the drivable strip of the closest lane.
fn project_to_drivable(p: Point2, map: &RoadMap) -> Point2 {
    if map.is_drivable(&p) {
        return p;
    }
    let Some(lane) = map.nearest_lane(&p) else {
        return p;
    };
    let proj = lane.centerline.project(&p);
    let station = proj.station.clamp(0.0, lane.centerline.length());
    let foot = lane.centerline.pose_at(station);
    let normal = Point2::new(-foot.theta.sin(), foot.theta.cos());
    let lateral = proj.lateral.clamp(-lane.width / 2.0, lane.width / 2.0);
    foot.position() + normal * lateral
}

pub fn bezier_controls(ego: &Pose2, nav: &Pose2, map: &RoadMap) -> BezierControl {
    let p0 = ego.position();
    let p3 = nav.position();
    match heading_ray_intersection(ego, nav) {
        Some(x) => {
            let x = project_to_drivable(x, map);
            BezierControl { p0, p1: x, p2: x, p3 }
        }
        None => BezierControl {
            p0,
            p1: p0 + (p3 - p0) / 3.0,
            p2: p0 + (p3 - p0) * 2.0 / 3.0,
            p3,
        },
    }
}

/// Dense reference waypoints from the ego to the navigation point.
pub fn dense_waypoints(ego: &Pose2, nav: &Pose2, map: &RoadMap, n: usize) -> Result<Vec<Point2>> {
    bezier_controls(ego, nav, map).sample(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polyline;
    use crate::scenario::Lane;
    use std::f64::consts::FRAC_PI_2;

    fn straight_map() -> RoadMap {
        RoadMap {
            lanes: vec![Lane {
                id: "a".into(),
                centerline: Polyline::new(vec![Point2::new(-10.0, 0.0), Point2::new(100.0, 0.0)]).unwrap(),
                width: 3.5,
                speed_limit: 10.0,
            }],
            boundaries: vec![],
        }
    }

    fn corner_map() -> RoadMap {
        let strip = |id: &str, a: Point2, b: Point2| Lane {
            id: id.into(),
            centerline: Polyline::new(vec![a, b]).unwrap(),
            width: 8.0,
            speed_limit: 10.0,
        };
        RoadMap {
            lanes: vec![
                strip("east", Point2::new(-5.0, 0.0), Point2::new(24.0, 0.0)),
                strip("north", Point2::new(20.0, -4.0), Point2::new(20.0, 30.0)),
            ],
            boundaries: vec![],
        }
    }

    #[test]
    fn nav_straight_ahead_stays_on_heading() {
        let ego = Pose2::new(0.0, 0.0, 0.0);
        let nav = Pose2::new(30.0, 0.0, 0.0);
        let pts = dense_waypoints(&ego, &nav, &straight_map(), 31).unwrap();
        assert!(pts.iter().all(|p| p.y == 0.0));
        assert!(pts.windows(2).all(|w| w[1].x > w[0].x));
    }

    #[test]
    fn two_samples_are_the_endpoints() {
        let ego = Pose2::new(1.0, 2.0, 0.3);
        let nav = Pose2::new(20.0, 5.0, 0.0);
        let pts = dense_waypoints(&ego, &nav, &straight_map(), 2).unwrap();
        assert_eq!(pts, vec![ego.position(), nav.position()]);
    }

    #[test]
    fn right_angle_turn_uses_ray_intersection() {
        let ego = Pose2::new(0.0, 0.0, 0.0);
        let nav = Pose2::new(20.0, 20.0, FRAC_PI_2);
        let map = corner_map();
        let c = bezier_controls(&ego, &nav, &map);
        approx::assert_relative_eq!(c.p1, Point2::new(20.0, 0.0), epsilon = 1e-9);
        assert_eq!(c.p1, c.p2);
        let pts = dense_waypoints(&ego, &nav, &map, 60).unwrap();
        assert!(pts.iter().all(|p| map.is_drivable(p)), "curve leaves the corridor");
    }

    #[test]
    fn parallel_headings_fall_back_to_chord_thirds() {
        let ego = Pose2::new(0.0, 0.0, 0.0);
        let nav = Pose2::new(30.0, 3.0, 0.0);
        let c = bezier_controls(&ego, &nav, &straight_map());
        assert_eq!(c.p1, Point2::new(10.0, 1.0));
        assert_eq!(c.p2, Point2::new(20.0, 2.0));
    }
}

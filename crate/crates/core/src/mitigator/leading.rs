use crate::geometry::{sat_intersects, OrientedBox, Point2, Polyline, Pose2};
use crate::monitor::HazardReport;
use crate::scenario::ActorKind;
use crate::world::BevSnapshot;

use super::idm::LeadingActor;

/// Where a participant sits relative to the rerouted path.
struct PathPlacement {
    station: f64,
    lateral: f64,
    heading: f64,
}

fn place(path: &Polyline, p: &Point2) -> PathPlacement {
    let proj = path.project(p);
    PathPlacement {
        station: proj.station,
        lateral: proj.lateral,
        heading: proj.heading,
    }
}

fn unit(theta: f64) -> Point2 {
    Point2::new(theta.cos(), theta.sin())
}

/// Rectangles covering the path, `half_width` to each side.
fn corridor(path: &Polyline, half_width: f64) -> Vec<OrientedBox> {
    path.points()
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            let mid = (w[0] + w[1]) / 2.0;
            OrientedBox {
                center: Pose2::new(mid.x, mid.y, d.y.atan2(d.x)),
                length: d.norm(),
                width: 2.0 * half_width,
                speed: 0.0,
            }
        })
        .collect()
}

/// Gap and relative speed of a box ahead of the ego along the path; `None`
/// if the box centre is not ahead of the ego centre.
fn measure(path: &Polyline, ego: &OrientedBox, ego_station: f64, id: &str, other: &OrientedBox) -> Option<LeadingActor> {
    let at = place(path, &other.position());
    if at.station <= ego_station {
        return None;
    }
    let tangent = unit(at.heading);
    let gap = at.station - ego_station - ego.length / 2.0 - other.half_extent_along(&tangent);
    let along = other.speed * (other.center.theta - at.heading).cos();
    Some(LeadingActor {
        id: id.to_string(),
        net_gap: gap.max(0.0),
        rel_speed: ego.speed - along,
    })
}

/// Whether a box moving at constant velocity touches the corridor within
/// `horizon_s` seconds.
fn reaches_corridor(b: &OrientedBox, lanes: &[OrientedBox], horizon_s: f64) -> bool {
    const STEP_S: f64 = 0.25;
    let steps = (horizon_s / STEP_S).ceil().max(0.0) as usize;
    let velocity = b.center.heading() * b.speed;
    (0..=steps).any(|k| {
        let p = b.position() + velocity * (k as f64 * STEP_S).min(horizon_s);
        let moved = OrientedBox {
            center: Pose2::new(p.x, p.y, b.center.theta),
            ..*b
        };
        lanes.iter().any(|c| sat_intersects(c, &moved))
    })
}

/// Leading actors for the IDM along the rerouted waypoints: the nearest
/// vehicle ahead inside the corridor, actors predicted to collide that are
/// ahead and reach the corridor within the horizon, static obstacles
/// touching the corridor, and active stop regions ahead. Stop regions are
/// measured to their centre plus `s0`, so the IDM standstill point puts the
/// ego's front at the region centre.
pub fn augment_leading_actors(
    snapshot: &BevSnapshot,
    report: &HazardReport,
    rerouted: &[Point2],
    corridor_margin: f64,
    s0: f64,
    horizon_s: f64,
) -> Vec<LeadingActor> {
    let Ok(path) = Polyline::new(rerouted.to_vec()) else {
        return Vec::new();
    };
    let ego = &snapshot.ego.bbox;
    let ego_station = place(&path, &ego.position()).station;
    let half_corridor = ego.width / 2.0 + corridor_margin;
    let lanes = corridor(&path, half_corridor);
    let mut out: Vec<LeadingActor> = Vec::new();
    let mut push = |lead: LeadingActor| {
        if !out.iter().any(|l| l.id == lead.id) {
            out.push(lead);
        }
    };

    let nearest_vehicle = snapshot
        .others
        .iter()
        .filter(|p| p.kind == ActorKind::Vehicle)
        .filter(|p| {
            let at = place(&path, &p.bbox.position());
            let normal = unit(at.heading + std::f64::consts::FRAC_PI_2);
            at.lateral.abs() - p.bbox.half_extent_along(&normal) <= half_corridor
        })
        .filter_map(|p| measure(&path, ego, ego_station, &p.id, &p.bbox))
        .min_by(|a, b| a.net_gap.total_cmp(&b.net_gap).then_with(|| a.id.cmp(&b.id)));
    if let Some(lead) = nearest_vehicle {
        push(lead);
    }

    for p in snapshot
        .others
        .iter()
        .filter(|p| report.colliding_actors.contains(&p.id))
        .filter(|p| reaches_corridor(&p.bbox, &lanes, horizon_s))
    {
        if let Some(lead) = measure(&path, ego, ego_station, &p.id, &p.bbox) {
            push(lead);
        }
    }

    for p in snapshot
        .others
        .iter()
        .filter(|p| p.kind == ActorKind::StaticObstacle)
        .filter(|p| lanes.iter().any(|c| sat_intersects(c, &p.bbox)))
    {
        if let Some(lead) = measure(&path, ego, ego_station, &p.id, &p.bbox) {
            push(lead);
        }
    }

    for (sig, region) in snapshot.active_regions() {
        let at = place(&path, &region.position());
        if at.station <= ego_station {
            continue;
        }
        let gap = at.station - ego_station - ego.length / 2.0 + s0;
        push(LeadingActor {
            id: sig.id.clone(),
            net_gap: gap.max(0.0),
            rel_speed: ego.speed,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{RoadMap, SignalKind};
    use crate::world::{Participant, StopSignal, EGO_ID};
    use std::collections::BTreeSet;
    use std::sync::Arc;

    fn part(id: &str, kind: ActorKind, x: f64, y: f64, v: f64) -> Participant {
        Participant {
            id: id.into(),
            kind,
            bbox: OrientedBox {
                center: Pose2::new(x, y, 0.0),
                length: 4.0,
                width: 2.0,
                speed: v,
            },
            behavior: None,
        }
    }

    fn snap(others: Vec<Participant>, signals: Vec<StopSignal>) -> BevSnapshot {
        BevSnapshot {
            frame: 0,
            time: 0.0,
            dt: 0.05,
            ego: part(EGO_ID, ActorKind::EgoVehicle, 0.0, 0.0, 6.0),
            ego_wheelbase: 2.5,
            others,
            signals,
            map: Arc::new(RoadMap {
                lanes: vec![],
                boundaries: vec![],
            }),
        }
    }

    fn path() -> Vec<Point2> {
        (0..=40).map(|i| Point2::new(i as f64, 0.0)).collect()
    }

    fn report(colliding: &[&str]) -> HazardReport {
        HazardReport {
            frame: 0,
            min_collision_frame: None,
            collision_flag: false,
            sigvio_flag: false,
            stalling_flag: false,
            colliding_actors: colliding.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>(),
        }
    }

    #[test]
    fn empty_road_has_no_leaders() {
        assert!(augment_leading_actors(&snap(vec![], vec![]), &report(&[]), &path(), 0.5, 4.0, 3.0).is_empty());
    }

    #[test]
    fn vehicle_ahead_gap_subtracts_half_lengths() {
        let s = snap(vec![part("lead", ActorKind::Vehicle, 20.0, 0.0, 4.0)], vec![]);
        let leads = augment_leading_actors(&s, &report(&[]), &path(), 0.5, 4.0, 3.0);
        assert_eq!(leads.len(), 1);
        approx::assert_relative_eq!(leads[0].net_gap, 16.0, epsilon = 1e-12);
        approx::assert_relative_eq!(leads[0].rel_speed, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn only_nearest_vehicle_in_corridor_counts() {
        let s = snap(
            vec![
                part("far", ActorKind::Vehicle, 30.0, 0.0, 4.0),
                part("near", ActorKind::Vehicle, 15.0, 0.0, 4.0),
                part("beside", ActorKind::Vehicle, 8.0, 3.6, 4.0),
                part("behind", ActorKind::Vehicle, -10.0, 0.0, 4.0),
            ],
            vec![],
        );
        let leads = augment_leading_actors(&s, &report(&[]), &path(), 0.5, 4.0, 3.0);
        let ids: Vec<&str> = leads.iter().map(|l| l.id.as_str()).collect();
        assert_eq!(ids, vec!["near"]);
    }

    #[test]
    fn colliding_pedestrian_heading_for_the_path_is_included() {
        let mut ped = part("ped", ActorKind::Pedestrian, 12.0, 5.0, 1.5);
        ped.bbox.center = Pose2::new(12.0, 5.0, -std::f64::consts::FRAC_PI_2);
        ped.bbox.length = 0.6;
        ped.bbox.width = 0.6;
        let s = snap(vec![ped], vec![]);
        assert!(augment_leading_actors(&s, &report(&[]), &path(), 0.5, 4.0, 3.0).is_empty());
        let leads = augment_leading_actors(&s, &report(&["ped"]), &path(), 0.5, 4.0, 3.0);
        assert_eq!(leads.len(), 1);
        assert_eq!(leads[0].id, "ped");
    }

    #[test]
    fn colliding_pedestrian_walking_alongside_is_ignored() {
        let s = snap(vec![part("ped", ActorKind::Pedestrian, 12.0, 5.0, 1.5)], vec![]);
        assert!(augment_leading_actors(&s, &report(&["ped"]), &path(), 0.5, 4.0, 3.0).is_empty());
    }

    #[test]
    fn stop_region_is_a_static_virtual_leader() {
        let sig = StopSignal {
            id: "stop".into(),
            kind: SignalKind::StopSign,
            pose: Pose2::new(15.0, 0.0, 0.0),
            lane: "a".into(),
            active: true,
        };
        let leads = augment_leading_actors(&snap(vec![], vec![sig]), &report(&[]), &path(), 0.5, 4.0, 3.0);
        assert_eq!(leads.len(), 1);
        assert_eq!(leads[0].rel_speed, 6.0);
        approx::assert_relative_eq!(leads[0].net_gap, 15.0 - 2.0 + 4.0, epsilon = 1e-12);
    }

    #[test]
    fn obstacle_touching_corridor_is_included() {
        let s = snap(
            vec![
                part("cone", ActorKind::StaticObstacle, 10.0, 2.4, 0.0),
                part("kerb", ActorKind::StaticObstacle, 10.0, 4.0, 0.0),
            ],
            vec![],
        );
        let leads = augment_leading_actors(&s, &report(&[]), &path(), 0.5, 4.0, 3.0);
        let ids: Vec<&str> = leads.iter().map(|l| l.id.as_str()).collect();
        assert_eq!(ids, vec!["cone"]);
    }
}

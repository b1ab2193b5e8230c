//! Write-only SVG views of a run.

use std::fmt::Write as _;

use crate::gate::Owner;
use crate::geometry::{OrientedBox, Point2};
use crate::scenario::ActorKind;

use super::trace::RunTrace;

const WIDTH: f64 = 1000.0;
const PAD: f64 = 20.0;

struct Frame2 {
    min: Point2,
    scale: f64,
    height: f64,
}

impl Frame2 {
    fn fit(points: impl Iterator<Item = Point2>) -> Self {
        let (mut lo, mut hi) = (Point2::new(f64::MAX, f64::MAX), Point2::new(f64::MIN, f64::MIN));
        for p in points {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        if lo.x > hi.x {
            lo = Point2::new(0.0, 0.0);
            hi = Point2::new(1.0, 1.0);
        }
        let span_x = (hi.x - lo.x).max(1.0);
        let scale = (WIDTH - 2.0 * PAD) / span_x;
        Self {
            min: lo,
            scale,
            height: (hi.y - lo.y).max(1.0) * scale + 2.0 * PAD,
        }
    }

    /// World to image coordinates, y pointing up.
    fn px(&self, p: &Point2) -> (f64, f64) {
        (
            PAD + (p.x - self.min.x) * self.scale,
            self.height - PAD - (p.y - self.min.y) * self.scale,
        )
    }

    fn polyline(&self, out: &mut String, pts: &[Point2], style: &str) {
        let coords: Vec<String> = pts
            .iter()
            .map(|p| {
                let (x, y) = self.px(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" {style}/>"#, coords.join(" "));
    }

    fn rect(&self, out: &mut String, b: &OrientedBox, style: &str) {
        let corners: Vec<String> = b
            .corners()
            .iter()
            .map(|p| {
                let (x, y) = self.px(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(out, r#"<polygon points="{}" {style}/>"#, corners.join(" "));
    }
}

fn actor_fill(kind: ActorKind) -> &'static str {
    match kind {
        ActorKind::Pedestrian => "#e69f00",
        ActorKind::StaticObstacle => "#777777",
        ActorKind::Vehicle | ActorKind::EgoVehicle => "#56b4e9",
    }
}

/// Overhead view: road, route, the ego path coloured by owner, actors at
/// the start (faint) and end of the run, stop regions and violation marks.
pub fn overhead_svg(trace: &RunTrace) -> String {
    let sc = &trace.header.scenario;
    let bounds = sc
        .map
        .boundaries
        .iter()
        .flat_map(|b| b.points().iter().copied())
        .chain(sc.route.points().iter().copied())
        .chain(trace.frames.iter().map(|f| f.ego.position()));
    let fr = Frame2::fit(bounds);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{:.0}" viewBox="0 0 {WIDTH} {:.2}">"#,
        fr.height, fr.height
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for b in &sc.map.boundaries {
        fr.polyline(&mut out, b.points(), r##"stroke="#222" stroke-width="2""##);
    }
    for lane in &sc.map.lanes {
        fr.polyline(&mut out, lane.centerline.points(), r##"stroke="#bbb" stroke-dasharray="6 6""##);
    }
    fr.polyline(&mut out, sc.route.points(), r##"stroke="#0072b2" stroke-width="1" opacity="0.5""##);
    if let Some(first) = trace.frames.first() {
        for s in &first.signals {
            fr.rect(&mut out, &s.region(), r##"fill="#d55e00" opacity="0.3""##);
        }
        for a in &first.actors {
            fr.rect(&mut out, &a.bbox, &format!(r#"fill="{}" opacity="0.25""#, actor_fill(a.kind)));
        }
    }
    // Ego path split into runs of constant owner.
    let mut run: Vec<Point2> = Vec::new();
    let mut owner = trace.frames.first().map(|f| f.owner);
    let colour = |o: Option<Owner>| if o == Some(Owner::Mitigator) { "#cc0000" } else { "#000000" };
    for f in &trace.frames {
        if Some(f.owner) != owner {
            if let Some(&tail) = run.last() {
                fr.polyline(&mut out, &run, &format!(r#"stroke="{}" stroke-width="2""#, colour(owner)));
                run = vec![tail];
            }
            owner = Some(f.owner);
        }
        run.push(f.ego.position());
    }
    if run.len() > 1 {
        fr.polyline(&mut out, &run, &format!(r#"stroke="{}" stroke-width="2""#, colour(owner)));
    }
    if let Some(last) = trace.frames.last() {
        for a in &last.actors {
            fr.rect(&mut out, &a.bbox, &format!(r#"fill="{}""#, actor_fill(a.kind)));
        }
        fr.rect(&mut out, &last.ego, r##"fill="none" stroke="#000" stroke-width="1.5""##);
    }
    for f in trace.frames.iter().filter(|f| !f.violations.is_empty()) {
        let (x, y) = fr.px(&f.ego.position());
        let _ = writeln!(out, r##"<circle cx="{x:.2}" cy="{y:.2}" r="6" fill="none" stroke="#d00" stroke-width="2"/>"##);
    }
    out.push_str("</svg>\n");
    out
}

/// Ego speed and nearest leading-actor gap against time, with takeover
/// spans shaded.
pub fn timeseries_svg(trace: &RunTrace) -> String {
    const PANEL: f64 = 180.0;
    let t_end = trace.frames.last().map_or(1.0, |f| f.time.max(1e-9));
    let v_max = trace.frames.iter().map(|f| f.ego.speed).fold(1.0, f64::max);
    let gaps: Vec<(f64, f64)> = trace
        .frames
        .iter()
        .filter_map(|f| {
            let m = f.mitigation.as_ref()?;
            let g = m.leading.iter().map(|l| l.net_gap).reduce(f64::min)?;
            Some((f.time, g))
        })
        .collect();
    let g_max = gaps.iter().map(|g| g.1).fold(1.0, f64::max);
    let x = |t: f64| PAD + t / t_end * (WIDTH - 2.0 * PAD);
    let height = 2.0 * PANEL + 3.0 * PAD;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for f in trace.frames.iter().filter(|f| f.owner == Owner::Mitigator) {
        let w = (x(f.time + trace.header.scenario.dt()) - x(f.time)).max(0.5);
        let _ = writeln!(
            out,
            r##"<rect x="{:.2}" y="{PAD}" width="{w:.2}" height="{:.2}" fill="#fdd"/>"##,
            x(f.time),
            height - 2.0 * PAD
        );
    }
    let series = |out: &mut String, top: f64, max: f64, pts: &[(f64, f64)], colour: &str, label: &str| {
        let _ = writeln!(
            out,
            r##"<rect x="{PAD}" y="{top}" width="{:.2}" height="{PANEL}" fill="none" stroke="#999"/>"##,
            WIDTH - 2.0 * PAD
        );
        let _ = writeln!(out, r#"<text x="{}" y="{}" font-size="12">{label} (max {max:.1})</text>"#, PAD + 4.0, top + 14.0);
        let coords: Vec<String> = pts
            .iter()
            .map(|&(t, v)| format!("{:.2},{:.2}", x(t), top + PANEL - v / max * PANEL))
            .collect();
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#, coords.join(" "));
    };
    let speed: Vec<(f64, f64)> = trace.frames.iter().map(|f| (f.time, f.ego.speed)).collect();
    series(&mut out, PAD, v_max, &speed, "#0072b2", "ego speed m/s");
    series(&mut out, 2.0 * PAD + PANEL, g_max, &gaps, "#009e73", "leading gap m");
    out.push_str("</svg>\n");
    out
}

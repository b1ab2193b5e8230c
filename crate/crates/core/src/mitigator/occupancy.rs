use serde::{Deserialize, Serialize};

use crate::geometry::{sat_overlap_depth, OrientedBox, Point2, Polyline, Pose2};

/// Overlaps thinner than this do not block a cell, so footprints aligned
/// with cell edges only block the cells they cover.
const OVERLAP_TOLERANCE: f64 = 1e-9;

/// Square grid of traversable/blocked cells centred on the ego, axis-aligned
/// in the world frame. Cell (col, row) covers
/// `[min.x + col·cs, min.x + (col+1)·cs] × [min.y + row·cs, min.y + (row+1)·cs]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupancyMap {
    pub origin: Pose2,
    pub cell_size: f64,
    pub half_extent: f64,
    pub dim: usize,
    blocked: Vec<bool>,
}

pub type Cell = (usize, usize);

impl OccupancyMap {
    pub fn new(origin: Pose2, half_extent: f64, cell_size: f64) -> Self {
        let dim = (2.0 * half_extent / cell_size).ceil() as usize;
        Self {
            origin,
            cell_size,
            half_extent,
            dim,
            blocked: vec![false; dim * dim],
        }
    }

    pub fn min_corner(&self) -> Point2 {
        Point2::new(self.origin.x - self.half_extent, self.origin.y - self.half_extent)
    }

    pub fn index(&self, (col, row): Cell) -> usize {
        row * self.dim + col
    }

    pub fn cell_of(&self, p: &Point2) -> Option<Cell> {
        let rel = (p - self.min_corner()) / self.cell_size;
        let (c, r) = (rel.x.floor(), rel.y.floor());
        let limit = self.dim as f64;
        (c >= 0.0 && r >= 0.0 && c < limit && r < limit).then_some((c as usize, r as usize))
    }

    pub fn cell_center(&self, (col, row): Cell) -> Point2 {
        self.min_corner() + Point2::new(col as f64 + 0.5, row as f64 + 0.5) * self.cell_size
    }

    pub fn cell_box(&self, cell: Cell) -> OrientedBox {
        let c = self.cell_center(cell);
        OrientedBox {
            center: Pose2::new(c.x, c.y, 0.0),
            length: self.cell_size,
            width: self.cell_size,
            speed: 0.0,
        }
    }

    pub fn is_blocked(&self, cell: Cell) -> bool {
        self.blocked[self.index(cell)]
    }

    pub fn set_blocked(&mut self, cell: Cell) {
        let i = self.index(cell);
        self.blocked[i] = true;
    }

    /// Points outside the grid count as traversable.
    pub fn is_traversable_point(&self, p: &Point2) -> bool {
        self.cell_of(p).is_none_or(|c| !self.is_blocked(c))
    }

    pub fn blocked_count(&self) -> usize {
        self.blocked.iter().filter(|&&b| b).count()
    }

    /// Blocks every cell whose interior overlaps the footprint.
    pub fn block_footprint(&mut self, footprint: &OrientedBox) {
        let corners = footprint.corners();
        let lo = self.min_corner();
        let span = |f: fn(&Point2) -> f64| {
            let vals = corners.iter().map(f);
            let (mn, mx) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
            (mn, mx)
        };
        let (xmin, xmax) = span(|p| p.x);
        let (ymin, ymax) = span(|p| p.y);
        let to_range = |mn: f64, mx: f64, base: f64| {
            let a = ((mn - base) / self.cell_size).floor().max(0.0);
            let b = ((mx - base) / self.cell_size).floor().min(self.dim as f64 - 1.0);
            (a as i64, b as i64)
        };
        let (c0, c1) = to_range(xmin, xmax, lo.x);
        let (r0, r1) = to_range(ymin, ymax, lo.y);
        for row in r0..=r1 {
            for col in c0..=c1 {
                let cell = (col as usize, row as usize);
                if sat_overlap_depth(&self.cell_box(cell), footprint) > OVERLAP_TOLERANCE {
                    self.set_blocked(cell);
                }
            }
        }
    }
}

/// Obstacle footprint grown by `margin` on every side.
pub fn inflate(b: &OrientedBox, margin: f64) -> OrientedBox {
    OrientedBox {
        length: b.length + 2.0 * margin,
        width: b.width + 2.0 * margin,
        ..*b
    }
}

/// Rectangles covering a polyline with the given half-width, one per
/// segment, extended past each vertex so consecutive bands join.
pub fn boundary_bands(line: &Polyline, half_width: f64) -> Vec<OrientedBox> {
    line.points()
        .windows(2)
        .map(|w| {
            let d = w[1] - w[0];
            let mid = (w[0] + w[1]) / 2.0;
            OrientedBox {
                center: Pose2::new(mid.x, mid.y, d.y.atan2(d.x)),
                length: d.norm() + 2.0 * half_width,
                width: 2.0 * half_width,
                speed: 0.0,
            }
        })
        .collect()
}

/// Half-width of the band a boundary line is drawn with, so a line lying on
/// a cell edge still blocks the cells on both sides.
pub const BOUNDARY_HALF_WIDTH: f64 = 0.01;

/// Occupancy map around the ego: static obstacles inflated by half the ego
/// length, boundaries blocking every cell they cross.
pub fn build_occupancy(
    ego: &Pose2,
    perception: f64,
    cell_size: f64,
    obstacles: &[OrientedBox],
    boundaries: &[Polyline],
    ego_length: f64,
) -> OccupancyMap {
    let mut map = OccupancyMap::new(*ego, perception, cell_size);
    for ob in obstacles {
        map.block_footprint(&inflate(ob, ego_length / 2.0));
    }
    for line in boundaries {
        for band in boundary_bands(line, BOUNDARY_HALF_WIDTH) {
            map.block_footprint(&band);
        }
    }
    map
}

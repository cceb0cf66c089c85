use crate::geometry::{point_segment_distance, LaneSpline, Point};

/// Polyline sample spacing along the route.
const POLY_STEP: f64 = 0.25;
/// Upper bound on the gap between polyline and curve distances, with room
/// for tight turns; segments this close to the best one get refined.
const POLY_SLACK: f64 = 0.02;
const CELL: f64 = 2.0;

/// Dense polyline of a route with a uniform cell grid over its segments, for
/// nearest-distance queries.
#[derive(Clone, Debug)]
pub struct RouteIndex {
    spline: LaneSpline,
    s: Vec<f64>,
    pts: Vec<Point>,
    origin: Point,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<u32>>,
}

impl RouteIndex {
    pub fn new(route: &LaneSpline) -> Self {
        let s = route.sample_arclengths(POLY_STEP);
        let pts: Vec<Point> = s.iter().map(|&si| route.eval_clamped(si)).collect();
        let (mut lo, mut hi) = (pts[0], pts[0]);
        for p in &pts {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let nx = ((hi.x - lo.x) / CELL).floor() as usize + 1;
        let ny = ((hi.y - lo.y) / CELL).floor() as usize + 1;
        let mut cells = vec![Vec::new(); nx * ny];
        for i in 0..pts.len() - 1 {
            let (a, b) = (pts[i], pts[i + 1]);
            let (cx0, cy0) = cell_of(lo, a.x.min(b.x), a.y.min(b.y));
            let (cx1, cy1) = cell_of(lo, a.x.max(b.x), a.y.max(b.y));
            for cy in cy0..=cy1.min(ny as i64 - 1) {
                for cx in cx0..=cx1.min(nx as i64 - 1) {
                    cells[cy as usize * nx + cx as usize].push(i as u32);
                }
            }
        }
        Self {
            spline: route.clone(),
            s,
            pts,
            origin: lo,
            nx,
            ny,
            cells,
        }
    }

    pub fn spline(&self) -> &LaneSpline {
        &self.spline
    }

    /// Global minimum distance from `p` to the route.
    pub fn distance(&self, p: Point) -> f64 {
        let polys: Vec<(usize, f64)> = (0..self.pts.len() - 1).map(|i| (i, self.poly(i, p))).collect();
        self.refine(p, &polys)
    }

    /// Distance from `p` to the route if it can be at most `limit`; `None`
    /// when it is certainly larger. Agrees bit for bit with
    /// [`distance`](Self::distance) whenever it returns a value.
    pub fn distance_within(&self, p: Point, limit: f64) -> Option<f64> {
        let reach = limit + 2.0 * POLY_SLACK;
        let (cx0, cy0) = cell_of(self.origin, p.x - reach, p.y - reach);
        let (cx1, cy1) = cell_of(self.origin, p.x + reach, p.y + reach);
        let (cx0, cy0) = (cx0.max(0), cy0.max(0));
        let (cx1, cy1) = (cx1.min(self.nx as i64 - 1), cy1.min(self.ny as i64 - 1));
        if cx0 > cx1 || cy0 > cy1 {
            return None;
        }
        let mut polys: Vec<(usize, f64)> = Vec::new();
        for cy in cy0..=cy1 {
            for cx in cx0..=cx1 {
                for &i in &self.cells[cy as usize * self.nx + cx as usize] {
                    polys.push((i as usize, self.poly(i as usize, p)));
                }
            }
        }
        let best = polys.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
        if best > limit + POLY_SLACK {
            return None;
        }
        polys.sort_unstable_by_key(|x| x.0);
        polys.dedup_by_key(|x| x.0);
        Some(self.refine(p, &polys))
    }

    fn poly(&self, i: usize, p: Point) -> f64 {
        point_segment_distance(p, self.pts[i], self.pts[i + 1]).0
    }

    /// Refines every segment within the slack of the best polyline distance
    /// on the curve itself. `polys` must contain all such segments.
    fn refine(&self, p: Point, polys: &[(usize, f64)]) -> f64 {
        let best = polys.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
        let len = self.spline.length();
        let mut d = f64::INFINITY;
        for &(i, pd) in polys {
            if pd <= best + POLY_SLACK {
                let lo = (self.s[i] - 0.5 * POLY_STEP).max(0.0);
                let hi = (self.s[i + 1] + 0.5 * POLY_STEP).min(len);
                d = d.min(self.spline.distance_near(p, lo, hi));
            }
        }
        d
    }
}

fn cell_of(origin: Point, x: f64, y: f64) -> (i64, i64) {
    (
        ((x - origin.x) / CELL).floor() as i64,
        ((y - origin.y) / CELL).floor() as i64,
    )
}

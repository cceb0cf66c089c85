//! Arc-length intervals of a curve that fall outside (or inside) a region.

use serde::{Deserialize, Serialize};

use super::{LaneSpline, Point, Region};

/// Closed arc-length interval `[lo, hi]` in meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi);
        Self { lo, hi }
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, s: f64) -> bool {
        self.lo <= s && s <= self.hi
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

pub fn total_length(intervals: &[Interval]) -> f64 {
    intervals.iter().map(Interval::length).sum()
}

/// Union of two sorted, disjoint interval lists, merging anything that
/// touches.
pub fn union(a: &[Interval], b: &[Interval]) -> Vec<Interval> {
    let mut all: Vec<Interval> = a.iter().chain(b).copied().collect();
    all.sort_by(|x, y| x.lo.total_cmp(&y.lo));
    let mut out: Vec<Interval> = Vec::with_capacity(all.len());
    for iv in all {
        match out.last_mut() {
            Some(last) if iv.lo <= last.hi => last.hi = last.hi.max(iv.hi),
            _ => out.push(iv),
        }
    }
    out
}

/// A curve sampled at a fixed arc-length step.
///
/// Each sample stands for the cell between the midpoints to its neighbours,
/// so a run of samples maps to an interval whose ends sit halfway between
/// the last sample of one class and the first sample of the other.
#[derive(Clone, Debug)]
pub struct SampledCurve {
    s: Vec<f64>,
    points: Vec<Point>,
    length: f64,
    min: Point,
    max: Point,
}

impl SampledCurve {
    pub fn new(spline: &LaneSpline, step: f64) -> Self {
        assert!(step > 0.0, "sampling step must be positive");
        let s = spline.sample_arclengths(step);
        let points: Vec<Point> = s.iter().map(|&si| spline.eval_clamped(si)).collect();
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        Self {
            s,
            points,
            length: spline.length(),
            min,
            max,
        }
    }

    pub fn arclengths(&self) -> &[f64] {
        &self.s
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Cheap rejection: whether the samples' bounding box reaches the square
    /// circumscribing the disc at `center` with `radius`.
    pub fn near_disc(&self, center: Point, radius: f64) -> bool {
        center.x + radius >= self.min.x
            && center.x - radius <= self.max.x
            && center.y + radius >= self.min.y
            && center.y - radius <= self.max.y
    }

    /// Maximal intervals whose samples are outside `region`.
    pub fn outside<R: Region + ?Sized>(&self, region: &R) -> Vec<Interval> {
        self.runs(|p| !region.contains(p))
    }

    /// Maximal intervals whose samples are inside `region`.
    pub fn inside<R: Region + ?Sized>(&self, region: &R) -> Vec<Interval> {
        self.runs(|p| region.contains(p))
    }

    fn runs(&self, mut selected: impl FnMut(Point) -> bool) -> Vec<Interval> {
        let n = self.s.len();
        let cell_lo = |i: usize| if i == 0 { 0.0 } else { 0.5 * (self.s[i - 1] + self.s[i]) };
        let cell_hi = |i: usize| {
            if i + 1 == n {
                self.length
            } else {
                0.5 * (self.s[i] + self.s[i + 1])
            }
        };
        let mut out = Vec::new();
        let mut start: Option<usize> = None;
        for (i, &p) in self.points.iter().enumerate() {
            match (selected(p), start) {
                (true, None) => start = Some(i),
                (false, Some(a)) => {
                    out.push(Interval::new(cell_lo(a), cell_hi(i - 1)));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(a) = start {
            out.push(Interval::new(cell_lo(a), cell_hi(n - 1)));
        }
        out
    }
}

/// Sorted, disjoint arc-length intervals of `spline` lying outside `visible`,
/// sampled every `step` meters.
pub fn unobserved_intervals<R: Region + ?Sized>(spline: &LaneSpline, visible: &R, step: f64) -> Vec<Interval> {
    SampledCurve::new(spline, step).outside(visible)
}

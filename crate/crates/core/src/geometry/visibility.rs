//! Observable-region computation by ray casting.
//!
//! Rays are cast from the sensor origin at a fixed angular resolution; each
//! ray stops at the nearest occluder edge or at the sensor's maximum range.
//! The ray endpoints, in angular order, form a star-shaped polygon. Keeping
//! the ray layout around gives an O(1) containment test.

use std::f64::consts::{PI, TAU};

use super::{GeometryError, Point, Polygon, Region};

/// Range, field of view and ray spacing of a planar range sensor.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SensorModel {
    pub max_range: f64,
    /// Full opening angle in radians; `2π` is omnidirectional.
    pub fov: f64,
    /// Angle between neighbouring rays, radians.
    pub angular_resolution: f64,
}

impl SensorModel {
    pub fn new(max_range: f64, fov: f64, angular_resolution: f64) -> Result<Self, GeometryError> {
        let s = Self {
            max_range,
            fov,
            angular_resolution,
        };
        s.validate()?;
        Ok(s)
    }

    /// 50 m omnidirectional lidar with 0.25° ray spacing.
    pub fn omnidirectional(max_range: f64) -> Self {
        Self {
            max_range,
            fov: TAU,
            angular_resolution: 0.25_f64.to_radians(),
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.max_range > 0.0 && self.max_range.is_finite()) {
            return Err(GeometryError::InvalidSensor(format!(
                "max_range must be positive, got {}",
                self.max_range
            )));
        }
        if !(self.fov > 0.0 && self.fov <= TAU + 1e-12) {
            return Err(GeometryError::InvalidSensor(format!(
                "fov must be in (0, 2π], got {}",
                self.fov
            )));
        }
        if !(self.angular_resolution > 0.0 && self.angular_resolution <= self.fov) {
            return Err(GeometryError::InvalidSensor(format!(
                "angular_resolution must be in (0, fov], got {}",
                self.angular_resolution
            )));
        }
        Ok(())
    }

    fn is_omnidirectional(&self) -> bool {
        self.fov >= TAU - 1e-12
    }
}

impl Default for SensorModel {
    fn default() -> Self {
        Self::omnidirectional(50.0)
    }
}

/// The observable polygon plus the ray layout it was built from.
#[derive(Clone, Debug)]
pub struct VisibilityPolygon {
    origin: Point,
    polygon: Polygon,
    /// Ray endpoints in angular order.
    endpoints: Vec<Point>,
    /// Index of the occluder each ray stopped on, if any.
    hits: Vec<Option<usize>>,
    start_angle: f64,
    step: f64,
    full_circle: bool,
    fov: f64,
    max_range: f64,
}

impl VisibilityPolygon {
    pub fn polygon(&self) -> &Polygon {
        &self.polygon
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn area(&self) -> f64 {
        self.polygon.area()
    }

    /// Indices of occluders that at least one ray stopped on, ascending.
    pub fn seen_occluders(&self) -> Vec<usize> {
        let mut seen: Vec<usize> = self.hits.iter().flatten().copied().collect();
        seen.sort_unstable();
        seen.dedup();
        seen
    }

    fn fast_contains(&self, p: Point) -> bool {
        let d = p - self.origin;
        let r2 = d.norm_squared();
        if r2 == 0.0 {
            return true;
        }
        if r2 > self.max_range * self.max_range {
            return false;
        }
        let rel = (d.angle() - self.start_angle).rem_euclid(TAU);
        let n = self.endpoints.len();
        let (k, k2) = if self.full_circle {
            let k = ((rel / self.step).floor() as usize).min(n - 1);
            (k, (k + 1) % n)
        } else {
            if rel > self.fov + 1e-12 {
                return false;
            }
            let k = ((rel / self.step).floor() as usize).min(n - 2);
            (k, k + 1)
        };
        let a = self.endpoints[k];
        let b = self.endpoints[k2];
        (b - a).cross(p - a) >= -1e-12
    }
}

impl Region for VisibilityPolygon {
    fn contains(&self, p: Point) -> bool {
        self.fast_contains(p)
    }
}

/// Casts rays from `origin` and returns the observable polygon.
///
/// Fails if `origin` lies inside (or on) any occluder.
pub fn visibility_polygon(
    origin: Point,
    heading: f64,
    occluders: &[Polygon],
    sensor: &SensorModel,
) -> Result<VisibilityPolygon, GeometryError> {
    sensor.validate()?;
    for (i, occ) in occluders.iter().enumerate() {
        if occ.contains_point(origin) {
            return Err(GeometryError::OriginInsideOccluder { index: i });
        }
    }

    let full_circle = sensor.is_omnidirectional();
    let (start_angle, step, n_rays) = if full_circle {
        let n = (TAU / sensor.angular_resolution).round().max(3.0) as usize;
        (heading, TAU / n as f64, n)
    } else {
        let intervals = (sensor.fov / sensor.angular_resolution - 1e-9).ceil().max(1.0) as usize;
        (heading - 0.5 * sensor.fov, sensor.fov / intervals as f64, intervals + 1)
    };

    // Only edges that can be reached within range matter.
    let edges: Vec<(Point, Point, usize)> = occluders
        .iter()
        .enumerate()
        .filter(|(_, occ)| occ.boundary_distance(origin) <= sensor.max_range)
        .flat_map(|(i, occ)| occ.edges().map(move |(a, b)| (a, b, i)))
        .collect();

    let mut endpoints = Vec::with_capacity(n_rays);
    let mut hits = Vec::with_capacity(n_rays);
    for k in 0..n_rays {
        let dir = Point::from_angle(start_angle + step * k as f64);
        let mut best = sensor.max_range;
        let mut hit = None;
        for &(a, b, idx) in &edges {
            if let Some(t) = ray_segment(origin, dir, a, b) {
                if t < best {
                    best = t;
                    hit = Some(idx);
                }
            }
        }
        endpoints.push(origin + dir * best);
        hits.push(hit);
    }

    let mut ring = Vec::with_capacity(n_rays + 1);
    if !full_circle {
        ring.push(origin);
    }
    ring.extend_from_slice(&endpoints);

    Ok(VisibilityPolygon {
        origin,
        polygon: Polygon::from_ccw_unchecked(ring),
        endpoints,
        hits,
        start_angle,
        step,
        full_circle,
        fov: sensor.fov.min(TAU),
        max_range: sensor.max_range,
    })
}

/// Distance along the unit ray `origin + t dir` to segment `a-b`, if hit.
#[inline]
fn ray_segment(origin: Point, dir: Point, a: Point, b: Point) -> Option<f64> {
    let e = b - a;
    let denom = dir.cross(e);
    if denom.abs() < 1e-15 {
        return None;
    }
    let ao = a - origin;
    let t = ao.cross(e) / denom;
    let u = ao.cross(dir) / denom;
    if t >= 0.0 && (0.0..=1.0).contains(&u) {
        Some(t)
    } else {
        None
    }
}

/// Normalizes an angle to `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w <= -PI {
        w + TAU
    } else {
        w
    }
}

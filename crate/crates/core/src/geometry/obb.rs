use super::{GeometryError, Point, Polygon, Region};

/// Vehicle footprint, meters.
pub const VEHICLE_LENGTH: f64 = 4.88;
pub const VEHICLE_WIDTH: f64 = 1.86;

/// Rectangle of `length` x `width` centered at `center`, long axis along `heading`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrientedBox {
    pub center: Point,
    pub heading: f64,
    pub length: f64,
    pub width: f64,
}

impl OrientedBox {
    pub fn new(center: Point, heading: f64, length: f64, width: f64) -> Result<Self, GeometryError> {
        if !(length > 0.0 && width > 0.0) {
            return Err(GeometryError::InvalidBox { length, width });
        }
        Ok(Self {
            center,
            heading,
            length,
            width,
        })
    }

    /// A vehicle-sized box.
    pub fn vehicle(center: Point, heading: f64) -> Self {
        Self {
            center,
            heading,
            length: VEHICLE_LENGTH,
            width: VEHICLE_WIDTH,
        }
    }

    /// Unit vectors along the long and short axes.
    pub fn axes(&self) -> (Point, Point) {
        let u = Point::from_angle(self.heading);
        (u, u.perp())
    }

    /// Corners in counter-clockwise order.
    pub fn corners(&self) -> [Point; 4] {
        let (u, v) = self.axes();
        let hu = u * (0.5 * self.length);
        let hv = v * (0.5 * self.width);
        let c = self.center;
        [c - hu - hv, c + hu - hv, c + hu + hv, c - hu + hv]
    }

    pub fn to_polygon(&self) -> Polygon {
        Polygon::from_ccw_unchecked(self.corners().to_vec())
    }

    /// Radius of the circumscribed circle.
    pub fn radius(&self) -> f64 {
        0.5 * self.length.hypot(self.width)
    }

    pub fn contains_point(&self, p: Point) -> bool {
        let (u, v) = self.axes();
        let d = p - self.center;
        d.dot(u).abs() <= 0.5 * self.length && d.dot(v).abs() <= 0.5 * self.width
    }

    /// Separating-axis test over the four edge normals.
    pub fn overlaps(&self, other: &OrientedBox) -> bool {
        let d = other.center - self.center;
        if d.norm() > self.radius() + other.radius() {
            return false;
        }
        let (au, av) = self.axes();
        let (bu, bv) = other.axes();
        let (ahl, ahw) = (0.5 * self.length, 0.5 * self.width);
        let (bhl, bhw) = (0.5 * other.length, 0.5 * other.width);
        for axis in [au, av, bu, bv] {
            let ra = ahl * au.dot(axis).abs() + ahw * av.dot(axis).abs();
            let rb = bhl * bu.dot(axis).abs() + bhw * bv.dot(axis).abs();
            if d.dot(axis).abs() > ra + rb {
                return false;
            }
        }
        true
    }
}

impl Region for OrientedBox {
    fn contains(&self, p: Point) -> bool {
        self.contains_point(p)
    }
}

/// Whether two boxes intersect.
pub fn box_overlap(a: &OrientedBox, b: &OrientedBox) -> bool {
    a.overlaps(b)
}

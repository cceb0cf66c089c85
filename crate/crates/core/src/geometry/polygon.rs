use super::point::{point_segment_distance, segments_intersect};
use super::{GeometryError, Point, Region};

/// Simple polygon with counter-clockwise vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    /// Validates simplicity and orientation; clockwise input is reversed.
    pub fn new(mut vertices: Vec<Point>) -> Result<Self, GeometryError> {
        if vertices.len() < 3 {
            return Err(GeometryError::InvalidPolygon(format!(
                "{} vertices, need at least 3",
                vertices.len()
            )));
        }
        if vertices.iter().any(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(GeometryError::InvalidPolygon("non-finite vertex".into()));
        }
        let area = signed_area(&vertices);
        if area.abs() <= 1e-12 {
            return Err(GeometryError::InvalidPolygon("zero area".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        let poly = Self { vertices };
        if !poly.is_simple() {
            return Err(GeometryError::InvalidPolygon("self-intersecting".into()));
        }
        Ok(poly)
    }

    /// Skips validation. Callers guarantee a simple CCW ring.
    pub(crate) fn from_ccw_unchecked(vertices: Vec<Point>) -> Self {
        Self { vertices }
    }

    pub fn rectangle(min: Point, max: Point) -> Result<Self, GeometryError> {
        Self::new(vec![min, Point::new(max.x, min.y), max, Point::new(min.x, max.y)])
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    /// Axis-aligned bounds `(min, max)`.
    pub fn bounds(&self) -> (Point, Point) {
        let mut min = Point::new(f64::INFINITY, f64::INFINITY);
        let mut max = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.vertices {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        (min, max)
    }

    /// Even-odd containment; boundary points count as inside.
    pub fn contains_point(&self, p: Point) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[j];
            if point_segment_distance(p, a, b).0 <= 1e-12 {
                return true;
            }
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    /// Distance from `p` to the boundary (zero on the boundary).
    pub fn boundary_distance(&self, p: Point) -> f64 {
        self.edges()
            .map(|(a, b)| point_segment_distance(p, a, b).0)
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance from `p` to the polygon region (zero inside).
    pub fn distance_to(&self, p: Point) -> f64 {
        if self.contains_point(p) {
            0.0
        } else {
            self.boundary_distance(p)
        }
    }

    fn is_simple(&self) -> bool {
        let n = self.vertices.len();
        for i in 0..n {
            let (a1, a2) = (self.vertices[i], self.vertices[(i + 1) % n]);
            for j in (i + 1)..n {
                // adjacent edges share a vertex
                if j == i + 1 || (i == 0 && j == n - 1) {
                    continue;
                }
                let (b1, b2) = (self.vertices[j], self.vertices[(j + 1) % n]);
                if segments_intersect(a1, a2, b1, b2) {
                    return false;
                }
            }
        }
        true
    }
}

impl Region for Polygon {
    fn contains(&self, p: Point) -> bool {
        self.contains_point(p)
    }
}

fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i].cross(v[(i + 1) % n])).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clockwise_input_is_reoriented() {
        let p = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
        ])
        .unwrap();
        assert!((p.area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bowtie_rejected() {
        let r = Polygon::new(vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ]);
        assert!(matches!(r, Err(GeometryError::InvalidPolygon(_))));
    }

    #[test]
    fn containment_and_distance() {
        let sq = Polygon::rectangle(Point::new(0.0, 0.0), Point::new(2.0, 2.0)).unwrap();
        assert!(sq.contains_point(Point::new(1.0, 1.0)));
        assert!(sq.contains_point(Point::new(2.0, 1.0)));
        assert!(!sq.contains_point(Point::new(3.0, 1.0)));
        assert!((sq.distance_to(Point::new(5.0, 1.0)) - 3.0).abs() < 1e-12);
        assert_eq!(sq.distance_to(Point::new(1.0, 1.0)), 0.0);
    }
}

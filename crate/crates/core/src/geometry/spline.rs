//! Arc-length parameterized natural cubic splines.
//!
//! Waypoints are interpolated by a natural cubic in the cumulative chord
//! length `t`. A lookup table of `(t, s)` pairs (64 per segment, integrated
//! with 5-point Gauss-Legendre) maps arc length back to `t`; each lookup is
//! finished with Newton steps on the exact segment integral, so `eval(s)` is
//! arc-length parameterized to well below a micrometer.

use super::{GeometryError, Point};

const LUT_SAMPLES_PER_SEGMENT: usize = 64;
const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITERS: usize = 8;
/// Tolerance for `s` slightly outside `[0, length]` from round-off.
const DOMAIN_SLACK: f64 = 1e-9;

const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

/// A lane centerline `c(s)`, `s` in `[0, length]`.
#[derive(Clone, Debug)]
pub struct LaneSpline {
    control_points: Vec<Point>,
    knots: Vec<f64>,
    /// Per segment: `c(t) = a + b u + c u^2 + d u^3` with `u = t - knots[i]`.
    coeffs: Vec<[Point; 4]>,
    lut_t: Vec<f64>,
    lut_s: Vec<f64>,
    length: f64,
}

impl PartialEq for LaneSpline {
    fn eq(&self, other: &Self) -> bool {
        // Everything else is derived deterministically from the waypoints.
        self.control_points == other.control_points
    }
}

impl LaneSpline {
    pub fn from_waypoints(points: &[Point]) -> Result<Self, GeometryError> {
        if points.len() < 2 {
            return Err(GeometryError::TooFewPoints(points.len()));
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[0].distance(w[1]) <= 1e-9 {
                return Err(GeometryError::DegenerateInput { index: i + 1 });
            }
            if !(w[1].x.is_finite() && w[1].y.is_finite()) {
                return Err(GeometryError::DegenerateInput { index: i + 1 });
            }
        }

        let mut knots = Vec::with_capacity(points.len());
        knots.push(0.0);
        for w in points.windows(2) {
            let last = *knots.last().unwrap();
            knots.push(last + w[0].distance(w[1]));
        }
        let coeffs = natural_cubic(points, &knots);

        let mut spline = Self {
            control_points: points.to_vec(),
            knots,
            coeffs,
            lut_t: Vec::new(),
            lut_s: Vec::new(),
            length: 0.0,
        };
        spline.build_lut();
        Ok(spline)
    }

    fn build_lut(&mut self) {
        let n_seg = self.coeffs.len();
        let mut lut_t = Vec::with_capacity(n_seg * LUT_SAMPLES_PER_SEGMENT + 1);
        let mut lut_s = Vec::with_capacity(n_seg * LUT_SAMPLES_PER_SEGMENT + 1);
        let mut s = 0.0;
        lut_t.push(0.0);
        lut_s.push(0.0);
        for seg in 0..n_seg {
            let t0 = self.knots[seg];
            let h = self.knots[seg + 1] - t0;
            for k in 0..LUT_SAMPLES_PER_SEGMENT {
                let a = t0 + h * k as f64 / LUT_SAMPLES_PER_SEGMENT as f64;
                let b = if k + 1 == LUT_SAMPLES_PER_SEGMENT {
                    self.knots[seg + 1]
                } else {
                    t0 + h * (k + 1) as f64 / LUT_SAMPLES_PER_SEGMENT as f64
                };
                s += self.speed_integral(seg, a, b);
                lut_t.push(b);
                lut_s.push(s);
            }
        }
        self.length = s;
        self.lut_t = lut_t;
        self.lut_s = lut_s;
    }

    pub fn control_points(&self) -> &[Point] {
        &self.control_points
    }

    /// Total arc length `s̄`.
    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn start(&self) -> Point {
        self.control_points[0]
    }

    pub fn end(&self) -> Point {
        *self.control_points.last().unwrap()
    }

    fn check_domain(&self, s: f64) -> Result<f64, GeometryError> {
        if s.is_nan() || s < -DOMAIN_SLACK || s > self.length + DOMAIN_SLACK {
            return Err(GeometryError::OutOfDomain { s, length: self.length });
        }
        Ok(s.clamp(0.0, self.length))
    }

    /// Point at arc length `s`.
    pub fn eval(&self, s: f64) -> Result<Point, GeometryError> {
        let s = self.check_domain(s)?;
        Ok(self.eval_clamped(s))
    }

    /// Like [`eval`](Self::eval) but clamps `s` into `[0, length]`.
    pub fn eval_clamped(&self, s: f64) -> Point {
        let (seg, t) = self.param_at(s);
        self.position(seg, t)
    }

    /// Unit tangent `∂c/∂s` at arc length `s`.
    pub fn tangent(&self, s: f64) -> Result<Point, GeometryError> {
        let s = self.check_domain(s)?;
        Ok(self.tangent_clamped(s))
    }

    pub fn tangent_clamped(&self, s: f64) -> Point {
        let (seg, t) = self.param_at(s);
        self.derivative(seg, t).normalized()
    }

    /// Unit normal: the tangent rotated by +90 degrees.
    pub fn perpendicular(&self, s: f64) -> Result<Point, GeometryError> {
        Ok(self.tangent(s)?.perp())
    }

    /// Position and unit tangent at `s` (clamped), from a single parameter solve.
    pub fn pose_clamped(&self, s: f64) -> (Point, Point) {
        let (seg, t) = self.param_at(s);
        (self.position(seg, t), self.derivative(seg, t).normalized())
    }

    /// Heading angle of the tangent at `s` (clamped).
    pub fn heading_clamped(&self, s: f64) -> f64 {
        self.tangent_clamped(s).angle()
    }

    /// Minimum distance from `p` to the curve restricted to `[s_lo, s_hi]`,
    /// by golden-section search. Assumes the distance is unimodal on the
    /// bracket, which holds for brackets of a few meters around a projection.
    pub fn distance_near(&self, p: Point, s_lo: f64, s_hi: f64) -> f64 {
        let t_lo = self.param_at(s_lo.min(s_hi)).1;
        let t_hi = self.param_at(s_lo.max(s_hi)).1;
        let f = |t: f64| {
            let seg = self.segment_of(t);
            self.position(seg, t).distance_squared(p)
        };
        const INV_PHI: f64 = 0.618_033_988_749_894_9;
        let (mut a, mut b) = (t_lo, t_hi);
        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        for _ in 0..48 {
            if b - a < 1e-10 {
                break;
            }
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - INV_PHI * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + INV_PHI * (b - a);
                fd = f(d);
            }
        }
        let best = f(a).min(f(b)).min(fc).min(fd);
        best.sqrt()
    }

    /// Points at arc lengths `0, step, 2 step, ...` plus the end point.
    pub fn sample_arclengths(&self, step: f64) -> Vec<f64> {
        let n = (self.length / step).floor() as usize;
        let mut out: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
        if self.length - out[n] > 1e-9 {
            out.push(self.length);
        } else {
            out[n] = self.length;
        }
        out
    }

    fn segment_of(&self, t: f64) -> usize {
        let idx = self.knots.partition_point(|&k| k <= t);
        idx.saturating_sub(1).min(self.coeffs.len() - 1)
    }

    /// Internal parameter `(segment, t)` for arc length `s` (clamped).
    fn param_at(&self, s: f64) -> (usize, f64) {
        if s <= 0.0 {
            return (0, 0.0);
        }
        let last = self.lut_s.len() - 1;
        if s >= self.length {
            return (self.coeffs.len() - 1, self.lut_t[last]);
        }
        let j = self.lut_s.partition_point(|&x| x <= s).clamp(1, last) - 1;
        let seg = j / LUT_SAMPLES_PER_SEGMENT;
        let (t0, t1) = (self.lut_t[j], self.lut_t[j + 1]);
        let (s0, s1) = (self.lut_s[j], self.lut_s[j + 1]);
        let mut t = t0 + (s - s0) / (s1 - s0) * (t1 - t0);
        for _ in 0..NEWTON_MAX_ITERS {
            let err = s0 + self.speed_integral(seg, t0, t) - s;
            if err.abs() < NEWTON_TOL {
                break;
            }
            let speed = self.derivative(seg, t).norm();
            t = (t - err / speed).clamp(t0, t1);
        }
        (seg, t)
    }

    #[inline]
    fn position(&self, seg: usize, t: f64) -> Point {
        let [a, b, c, d] = self.coeffs[seg];
        let u = t - self.knots[seg];
        a + (b + (c + d * u) * u) * u
    }

    #[inline]
    fn derivative(&self, seg: usize, t: f64) -> Point {
        let [_, b, c, d] = self.coeffs[seg];
        let u = t - self.knots[seg];
        b + (c * 2.0 + d * (3.0 * u)) * u
    }

    fn speed_integral(&self, seg: usize, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
            acc += w * self.derivative(seg, mid + half * x).norm();
        }
        acc * half
    }
}

/// Natural cubic interpolation of `points` at parameters `knots`, solved per
/// coordinate with the Thomas algorithm.
fn natural_cubic(points: &[Point], knots: &[f64]) -> Vec<[Point; 4]> {
    let n = points.len();
    let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
    // Second derivatives; zero at both ends.
    let mut m = vec![Point::ORIGIN; n];
    if n > 2 {
        let inner = n - 2;
        let mut diag = vec![0.0; inner];
        let mut upper = vec![0.0; inner];
        let mut rhs = vec![Point::ORIGIN; inner];
        for k in 0..inner {
            let i = k + 1;
            diag[k] = 2.0 * (h[i - 1] + h[i]);
            upper[k] = h[i];
            let slope_r = (points[i + 1] - points[i]) * (1.0 / h[i]);
            let slope_l = (points[i] - points[i - 1]) * (1.0 / h[i - 1]);
            rhs[k] = (slope_r - slope_l) * 6.0;
        }
        // forward sweep; sub-diagonal entry of row k is h[k]
        for k in 1..inner {
            let w = h[k] / diag[k - 1];
            diag[k] -= w * upper[k - 1];
            let prev = rhs[k - 1];
            rhs[k] = rhs[k] - prev * w;
        }
        m[inner] = rhs[inner - 1] * (1.0 / diag[inner - 1]);
        for k in (0..inner - 1).rev() {
            m[k + 1] = (rhs[k] - m[k + 2] * upper[k]) * (1.0 / diag[k]);
        }
    }

    (0..n - 1)
        .map(|i| {
            let hi = h[i];
            let a = points[i];
            let b = (points[i + 1] - points[i]) * (1.0 / hi) - (m[i] * 2.0 + m[i + 1]) * (hi / 6.0);
            let c = m[i] * 0.5;
            let d = (m[i + 1] - m[i]) * (1.0 / (6.0 * hi));
            [a, b, c, d]
        })
        .collect()
}

//! Path geometry: cubic Bézier construction, arc-length parameterization,
//! tangents and perpendicular offsets.
//!
//! A propagator's base path is one cubic segment. Straight connections put
//! the control points at the thirds; curved connections place them at
//! distance `k = 0.3915 * looseness * |to - from|` along the `out`/`in`
//! directions, with angles measured in the diagram frame (0 degrees right,
//! 90 up). `in` names the direction from the end vertex toward its control
//! point, so a path entering from above has `in = 90`.
//!
//! Arc length is tabulated by recursive subdivision until the control
//! polygon hugs the chord, and queries invert the table by binary search.

use crate::units::PT_PER_CM;
use std::fmt;
use thiserror::Error;

/// Distance factor from endpoint to control point per unit of looseness and
/// endpoint separation. The single magic constant of the curve model.
pub const CURVE_CONTROL_FACTOR: f64 = 0.3915;

/// Base looseness of `half left`/`half right`, tuned so the rendered arc
/// apex lands within 1% of a true semicircle.
pub const HALF_BEND_LOOSENESS: f64 = 1.7;

/// Base looseness of the quarter bends.
pub const QUARTER_BEND_LOOSENESS: f64 = 1.0;

/// Control distance used for a self-loop, where the endpoint separation is
/// zero and the usual `k` would collapse the curve to a point.
const SELF_LOOP_SPAN_CM: f64 = 1.0;

/// Subdivision stops when the control polygon exceeds the chord by less
/// than 0.01pt.
const FLATNESS_TOL_CM: f64 = 0.01 / PT_PER_CM;

const MAX_SUBDIV_DEPTH: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn normalized(self) -> Point {
        let n = self.norm();
        if n == 0.0 {
            Point::new(1.0, 0.0)
        } else {
            self * (1.0 / n)
        }
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    /// Rotation by +90 degrees (counterclockwise).
    pub fn rot90(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn rotate_deg(self, deg: f64) -> Point {
        let (s, c) = deg.to_radians().sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    /// Angle of this vector in degrees, in `(-180, 180]`.
    pub fn angle_deg(self) -> f64 {
        self.y.atan2(self.x).to_degrees()
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl std::ops::Mul<f64> for Point {
    type Output = Point;
    fn mul(self, f: f64) -> Point {
        Point::new(self.x * f, self.y * f)
    }
}

impl std::ops::Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Side relative to the direction of travel along a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BendKind {
    HalfLeft,
    HalfRight,
    QuarterLeft,
    QuarterRight,
}

/// Tangent angles and looseness for an explicit curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSpec {
    pub out_deg: f64,
    pub in_deg: f64,
    pub looseness: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicBezier {
    pub p0: Point,
    pub c1: Point,
    pub c2: Point,
    pub p3: Point,
}

impl CubicBezier {
    pub fn point_at(&self, t: f64) -> Point {
        let u = 1.0 - t;
        let b0 = u * u * u;
        let b1 = 3.0 * u * u * t;
        let b2 = 3.0 * u * t * t;
        let b3 = t * t * t;
        Point::new(
            b0 * self.p0.x + b1 * self.c1.x + b2 * self.c2.x + b3 * self.p3.x,
            b0 * self.p0.y + b1 * self.c1.y + b2 * self.c2.y + b3 * self.p3.y,
        )
    }

    pub fn deriv_at(&self, t: f64) -> Point {
        let u = 1.0 - t;
        let d0 = (self.c1 - self.p0) * 3.0 * u * u;
        let d1 = (self.c2 - self.c1) * 6.0 * u * t;
        let d2 = (self.p3 - self.c2) * 3.0 * t * t;
        (d0 + d1) + d2
    }

    fn split(&self) -> (CubicBezier, CubicBezier) {
        let mid = |a: Point, b: Point| (a + b) * 0.5;
        let ab = mid(self.p0, self.c1);
        let bc = mid(self.c1, self.c2);
        let cd = mid(self.c2, self.p3);
        let abc = mid(ab, bc);
        let bcd = mid(bc, cd);
        let abcd = mid(abc, bcd);
        (
            CubicBezier {
                p0: self.p0,
                c1: ab,
                c2: abc,
                p3: abcd,
            },
            CubicBezier {
                p0: abcd,
                c1: bcd,
                c2: cd,
                p3: self.p3,
            },
        )
    }

    fn chord(&self) -> f64 {
        self.p0.dist(self.p3)
    }

    fn poly_len(&self) -> f64 {
        self.p0.dist(self.c1) + self.c1.dist(self.c2) + self.c2.dist(self.p3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Sample {
    /// Global parameter across the whole segment chain, in `0..=1`.
    t: f64,
    /// Cumulative arc length up to `t`.
    len: f64,
    pt: Point,
}

/// A chain of cubic segments with a monotone arc-length table.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGeom {
    segments: Vec<CubicBezier>,
    samples: Vec<Sample>,
    total_len: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("propagator endpoints coincide; give `out`/`in` angles to draw a loop")]
    DegenerateEndpoints,
}

impl fmt::Display for PathGeom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "PathGeom({} segs, len {:.4})",
            self.segments.len(),
            self.total_len
        )
    }
}

/// Builds the base path for a propagator. Without a curve spec this is a
/// straight segment with control points at the thirds.
pub fn base_path(from: Point, to: Point, curve: Option<CurveSpec>) -> Result<PathGeom, GeomError> {
    let seg = match curve {
        None => {
            if from.dist(to) == 0.0 {
                return Err(GeomError::DegenerateEndpoints);
            }
            let d = to - from;
            CubicBezier {
                p0: from,
                c1: from + d * (1.0 / 3.0),
                c2: from + d * (2.0 / 3.0),
                p3: to,
            }
        }
        Some(spec) => {
            let mut d = from.dist(to);
            if d == 0.0 {
                d = SELF_LOOP_SPAN_CM;
            }
            let k = CURVE_CONTROL_FACTOR * spec.looseness * d;
            let (so, co) = spec.out_deg.to_radians().sin_cos();
            let (si, ci) = spec.in_deg.to_radians().sin_cos();
            CubicBezier {
                p0: from,
                c1: from + Point::new(co, so) * k,
                c2: to + Point::new(ci, si) * k,
                p3: to,
            }
        }
    };
    Ok(PathGeom::from_segments(vec![seg]))
}

/// Expands a bend shorthand into `(out, in, base_looseness)` relative to the
/// straight direction from `from` to `to`. An explicit user looseness
/// multiplies the returned base value.
pub fn desugar_bend(kind: BendKind, from: Point, to: Point) -> (f64, f64, f64) {
    let theta = (to - from).angle_deg();
    match kind {
        BendKind::HalfLeft => (theta + 90.0, theta + 90.0, HALF_BEND_LOOSENESS),
        BendKind::HalfRight => (theta - 90.0, theta - 90.0, HALF_BEND_LOOSENESS),
        BendKind::QuarterLeft => (theta + 45.0, theta + 135.0, QUARTER_BEND_LOOSENESS),
        BendKind::QuarterRight => (theta - 45.0, theta - 135.0, QUARTER_BEND_LOOSENESS),
    }
}

impl PathGeom {
    pub fn from_segments(segments: Vec<CubicBezier>) -> PathGeom {
        assert!(!segments.is_empty(), "a path needs at least one segment");
        let n = segments.len() as f64;
        let mut samples = vec![Sample {
            t: 0.0,
            len: 0.0,
            pt: segments[0].p0,
        }];
        let mut cum = 0.0;
        for (i, seg) in segments.iter().enumerate() {
            let t0 = i as f64 / n;
            let t1 = (i + 1) as f64 / n;
            subdivide(seg, t0, t1, 0, &mut cum, &mut samples);
        }
        PathGeom {
            segments,
            total_len: cum,
            samples,
        }
    }

    pub fn total_len(&self) -> f64 {
        self.total_len
    }

    pub fn start(&self) -> Point {
        self.segments[0].p0
    }

    pub fn end(&self) -> Point {
        self.segments[self.segments.len() - 1].p3
    }

    pub fn segments(&self) -> &[CubicBezier] {
        &self.segments
    }

    /// The subdivision breakpoints as a polyline. Straight paths collapse to
    /// their two endpoints; curved paths are flat to the subdivision
    /// tolerance.
    pub fn flatten(&self) -> Vec<Point> {
        self.samples.iter().map(|s| s.pt).collect()
    }

    /// Point and unit tangent at arc-length fraction `s` (not parameter t).
    /// The endpoints are returned exactly at `s <= 0` and `s >= 1`.
    pub fn point_at(&self, s: f64) -> (Point, Point) {
        if s <= 0.0 {
            return (self.start(), self.tangent_at_param(0.0));
        }
        if s >= 1.0 {
            return (self.end(), self.tangent_at_param(1.0));
        }
        let t = self.param_at_fraction(s);
        (self.eval(t), self.tangent_at_param(t))
    }

    /// Perpendicular offset from the path: the tangent rotated +90 degrees
    /// for `Left`, -90 for `Right`, scaled by `dist`.
    pub fn offset_point(&self, s: f64, side: Side, dist: f64) -> Point {
        let (pt, tan) = self.point_at(s);
        let normal = match side {
            Side::Left => tan.rot90(),
            Side::Right => -tan.rot90(),
        };
        pt + normal * dist
    }

    /// Inverts the arc-length table: global parameter for a length fraction.
    fn param_at_fraction(&self, s: f64) -> f64 {
        let target = s * self.total_len;
        let mut lo = 0usize;
        let mut hi = self.samples.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.samples[mid].len < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let a = &self.samples[lo];
        let b = &self.samples[hi];
        let dl = b.len - a.len;
        let frac = if dl > 0.0 { (target - a.len) / dl } else { 0.0 };
        a.t + frac * (b.t - a.t)
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let n = self.segments.len();
        let u = (t.clamp(0.0, 1.0)) * n as f64;
        let idx = (u.floor() as usize).min(n - 1);
        (idx, u - idx as f64)
    }

    fn eval(&self, t: f64) -> Point {
        let (idx, local) = self.locate(t);
        self.segments[idx].point_at(local)
    }

    fn tangent_at_param(&self, t: f64) -> Point {
        let (idx, local) = self.locate(t);
        let seg = &self.segments[idx];
        let d = seg.deriv_at(local);
        if d.norm() > 1e-12 {
            return d.normalized();
        }
        // Degenerate derivative (coincident control points): fall back to a
        // nearby parameter, then to the chord.
        let eps = 1e-6;
        let d = seg.point_at((local + eps).min(1.0)) - seg.point_at((local - eps).max(0.0));
        if d.norm() > 1e-15 {
            d.normalized()
        } else {
            (seg.p3 - seg.p0).normalized()
        }
    }
}

fn subdivide(
    seg: &CubicBezier,
    t0: f64,
    t1: f64,
    depth: u32,
    cum: &mut f64,
    out: &mut Vec<Sample>,
) {
    let chord = seg.chord();
    let poly = seg.poly_len();
    // Stop when the piece is flat and traversed at near-uniform speed; the
    // latter keeps the linear t-interpolation of the inversion accurate.
    let v0 = seg.deriv_at(0.0).norm();
    let vm = seg.deriv_at(0.5).norm();
    let v1 = seg.deriv_at(1.0).norm();
    let vmax = v0.max(vm).max(v1);
    let vmin = v0.min(vm).min(v1);
    let uniform_speed = vmax <= vmin * 1.01 || vmax < 1e-12;
    if (poly - chord < FLATNESS_TOL_CM && uniform_speed) || depth >= MAX_SUBDIV_DEPTH {
        let len = gauss_len(seg);
        if len > 0.0 {
            *cum += len;
            out.push(Sample {
                t: t1,
                len: *cum,
                pt: seg.p3,
            });
        }
        return;
    }
    let (a, b) = seg.split();
    let tm = 0.5 * (t0 + t1);
    subdivide(&a, t0, tm, depth + 1, cum, out);
    subdivide(&b, tm, t1, depth + 1, cum, out);
}

/// Four-point Gauss-Legendre quadrature of the speed, accurate well past
/// the table tolerance for near-flat pieces.
fn gauss_len(seg: &CubicBezier) -> f64 {
    const NODES: [(f64, f64); 4] = [
        (-0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
        (-0.339_981_043_584_856_3, 0.652_145_154_862_546_2),
        (0.339_981_043_584_856_3, 0.652_145_154_862_546_2),
        (0.861_136_311_594_052_6, 0.347_854_845_137_453_85),
    ];
    0.5 * NODES
        .iter()
        .map(|&(x, w)| w * seg.deriv_at(0.5 * (x + 1.0)).norm())
        .sum::<f64>()
}

//! Exact planar primitives: points, closed segments, boxes, annuli.
//!
//! Intersection *decisions* use exact-sign orientation predicates so that
//! downstream union-find merges are consistent; intersection *points* are
//! computed in floating point afterwards.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        debug_assert!(x.is_finite() && y.is_finite());
        Point { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A closed line segment. `a == b` is allowed and models a degenerate
/// zero-length stick, which is treated as an isolated point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point,
    pub b: Point,
}

impl Segment {
    pub fn new(a: Point, b: Point) -> Self {
        Segment { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.dist(&self.b)
    }

    pub fn is_degenerate(&self) -> bool {
        self.a == self.b
    }

    fn bbox(&self) -> (f64, f64, f64, f64) {
        (
            self.a.x.min(self.b.x),
            self.a.y.min(self.b.y),
            self.a.x.max(self.b.x),
            self.a.y.max(self.b.y),
        )
    }
}

/// Axis-aligned box `[lo.x, hi.x] x [lo.y, hi.y]` with nonempty interior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box2 {
    pub lo: Point,
    pub hi: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
    Top,
    Bottom,
}

impl Box2 {
    pub fn new(lo: Point, hi: Point) -> Self {
        assert!(lo.x < hi.x && lo.y < hi.y, "box must have nonempty interior");
        Box2 { lo, hi }
    }

    /// The centered box `B_s = [-s, s]^2`.
    pub fn centered(s: f64) -> Self {
        Box2::new(Point::new(-s, -s), Point::new(s, s))
    }

    pub fn from_coords(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Box2::new(Point::new(x0, y0), Point::new(x1, y1))
    }

    pub fn center(&self) -> Point {
        Point::new((self.lo.x + self.hi.x) / 2.0, (self.lo.y + self.hi.y) / 2.0)
    }

    pub fn area(&self) -> f64 {
        (self.hi.x - self.lo.x) * (self.hi.y - self.lo.y)
    }

    pub fn width(&self) -> f64 {
        self.hi.x - self.lo.x
    }

    pub fn height(&self) -> f64 {
        self.hi.y - self.lo.y
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.x >= self.lo.x && p.x <= self.hi.x && p.y >= self.lo.y && p.y <= self.hi.y
    }

    pub fn contains_box(&self, other: &Box2) -> bool {
        self.contains(&other.lo) && self.contains(&other.hi)
    }

    pub fn strictly_contains_box(&self, other: &Box2) -> bool {
        other.lo.x > self.lo.x && other.lo.y > self.lo.y && other.hi.x < self.hi.x && other.hi.y < self.hi.y
    }

    pub fn grow(&self, m: f64) -> Box2 {
        Box2::new(
            Point::new(self.lo.x - m, self.lo.y - m),
            Point::new(self.hi.x + m, self.hi.y + m),
        )
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Box2 {
        Box2::new(
            Point::new(self.lo.x + dx, self.lo.y + dy),
            Point::new(self.hi.x + dx, self.hi.y + dy),
        )
    }

    /// The closed 1-dimensional side as a segment (corners included).
    pub fn side_segment(&self, side: Side) -> Segment {
        match side {
            Side::Left => Segment::new(Point::new(self.lo.x, self.lo.y), Point::new(self.lo.x, self.hi.y)),
            Side::Right => Segment::new(Point::new(self.hi.x, self.lo.y), Point::new(self.hi.x, self.hi.y)),
            Side::Bottom => Segment::new(Point::new(self.lo.x, self.lo.y), Point::new(self.hi.x, self.lo.y)),
            Side::Top => Segment::new(Point::new(self.lo.x, self.hi.y), Point::new(self.hi.x, self.hi.y)),
        }
    }

    pub fn intersects_segment(&self, s: &Segment) -> bool {
        clip_segment_to_box(s, self).is_some()
    }
}

/// `A = outer \ inner`, both boxes centered on the same point with the
/// inner box strictly inside the outer one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annulus {
    pub inner: Box2,
    pub outer: Box2,
}

impl Annulus {
    pub fn new(inner: Box2, outer: Box2) -> Self {
        assert!(outer.strictly_contains_box(&inner), "inner box must be strictly inside outer");
        let ci = inner.center();
        let co = outer.center();
        assert!(
            (ci.x - co.x).abs() < 1e-9 && (ci.y - co.y).abs() < 1e-9,
            "inner and outer boxes must share a center"
        );
        Annulus { inner, outer }
    }

    /// The annulus `A_{s,t} = B_t \ B_s` centered at the origin.
    pub fn centered(s: f64, t: f64) -> Self {
        Annulus::new(Box2::centered(s), Box2::centered(t))
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Annulus {
        Annulus::new(self.inner.translate(dx, dy), self.outer.translate(dx, dy))
    }

    pub fn center(&self) -> Point {
        self.inner.center()
    }
}

/// Exact sign of the orientation determinant of `(a, b, c)`.
/// Positive for counter-clockwise, zero for collinear.
pub fn orient(a: &Point, b: &Point, c: &Point) -> f64 {
    robust::orient2d(
        robust::Coord { x: a.x, y: a.y },
        robust::Coord { x: b.x, y: b.y },
        robust::Coord { x: c.x, y: c.y },
    )
}

fn on_segment_collinear(p: &Point, s: &Segment) -> bool {
    // assumes p collinear with s
    p.x >= s.a.x.min(s.b.x)
        && p.x <= s.a.x.max(s.b.x)
        && p.y >= s.a.y.min(s.b.y)
        && p.y <= s.a.y.max(s.b.y)
}

/// Do two closed segments share at least one point? Exact decision.
pub fn segments_intersect_decision(s1: &Segment, s2: &Segment) -> bool {
    let (ax0, ay0, ax1, ay1) = s1.bbox();
    let (bx0, by0, bx1, by1) = s2.bbox();
    if ax1 < bx0 || bx1 < ax0 || ay1 < by0 || by1 < ay0 {
        return false;
    }
    if s1.is_degenerate() && s2.is_degenerate() {
        return s1.a == s2.a;
    }
    if s1.is_degenerate() {
        return orient(&s2.a, &s2.b, &s1.a) == 0.0 && on_segment_collinear(&s1.a, s2);
    }
    if s2.is_degenerate() {
        return orient(&s1.a, &s1.b, &s2.a) == 0.0 && on_segment_collinear(&s2.a, s1);
    }
    let d1 = orient(&s2.a, &s2.b, &s1.a);
    let d2 = orient(&s2.a, &s2.b, &s1.b);
    let d3 = orient(&s1.a, &s1.b, &s2.a);
    let d4 = orient(&s1.a, &s1.b, &s2.b);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment_collinear(&s1.a, s2))
        || (d2 == 0.0 && on_segment_collinear(&s1.b, s2))
        || (d3 == 0.0 && on_segment_collinear(&s2.a, s1))
        || (d4 == 0.0 && on_segment_collinear(&s2.b, s1))
}

/// Intersection of closed segments: some shared point if any exists.
/// For overlapping collinear segments an arbitrary shared point is returned.
/// The decision is exact; the returned coordinates are floating point and lie
/// on both segments to within ~1e-12 absolute.
pub fn segments_intersect(s1: &Segment, s2: &Segment) -> Option<Point> {
    if !segments_intersect_decision(s1, s2) {
        return None;
    }
    // endpoint/degenerate contacts first: those points are exact
    for p in [&s1.a, &s1.b] {
        if orient(&s2.a, &s2.b, p) == 0.0 && on_segment_collinear(p, s2) {
            return Some(*p);
        }
    }
    for p in [&s2.a, &s2.b] {
        if orient(&s1.a, &s1.b, p) == 0.0 && on_segment_collinear(p, s1) {
            return Some(*p);
        }
    }
    // proper crossing: solve the 2x2 system in floating point
    let (x1, y1) = (s1.a.x, s1.a.y);
    let (x2, y2) = (s1.b.x, s1.b.y);
    let (x3, y3) = (s2.a.x, s2.a.y);
    let (x4, y4) = (s2.b.x, s2.b.y);
    let denom = (x1 - x2) * (y3 - y4) - (y1 - y2) * (x3 - x4);
    let t = ((x1 - x3) * (y3 - y4) - (y1 - y3) * (x3 - x4)) / denom;
    let t = t.clamp(0.0, 1.0);
    Some(Point::new(x1 + t * (x2 - x1), y1 + t * (y2 - y1)))
}

/// Parametric interval `[t0, t1] ⊆ [0, 1]` of `s` inside the closed box
/// (Liang–Barsky). `None` if disjoint.
pub fn clip_params(s: &Segment, b: &Box2) -> Option<(f64, f64)> {
    let dx = s.b.x - s.a.x;
    let dy = s.b.y - s.a.y;
    let mut t0 = 0.0_f64;
    let mut t1 = 1.0_f64;
    let checks = [
        (-dx, s.a.x - b.lo.x),
        (dx, b.hi.x - s.a.x),
        (-dy, s.a.y - b.lo.y),
        (dy, b.hi.y - s.a.y),
    ];
    for (p, q) in checks {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                if r > t1 {
                    return None;
                }
                if r > t0 {
                    t0 = r;
                }
            } else {
                if r < t0 {
                    return None;
                }
                if r < t1 {
                    t1 = r;
                }
            }
        }
    }
    Some((t0, t1))
}

pub fn point_at(s: &Segment, t: f64) -> Point {
    // exact at the ends so unclipped endpoints (and the contacts they carry,
    // e.g. polygon corners) survive clipping bit-for-bit
    if t == 0.0 {
        return s.a;
    }
    if t == 1.0 {
        return s.b;
    }
    Point::new(s.a.x + t * (s.b.x - s.a.x), s.a.y + t * (s.b.y - s.a.y))
}

/// The (possibly degenerate) portion of `s` inside the closed box.
pub fn clip_segment_to_box(s: &Segment, b: &Box2) -> Option<Segment> {
    let (t0, t1) = clip_params(s, b)?;
    Some(Segment::new(point_at(s, t0), point_at(s, t1)))
}

/// Does the portion of `s` inside `b` meet the closed 1-dimensional side?
pub fn segment_touches_side(s: &Segment, b: &Box2, side: Side) -> bool {
    let clipped = match clip_segment_to_box(s, b) {
        Some(c) => c,
        None => return false,
    };
    segments_intersect_decision(&clipped, &b.side_segment(side))
}

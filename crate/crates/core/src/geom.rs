//! Planar primitives: points, disks, fat triangles and the predicates the
//! rest of the crate is built on.
//!
//! All predicates work on closed sets. Disk tests compare squared
//! quantities; triangle tests use orientation signs.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

/// Default fatness constant for triangle runs.
pub const DEFAULT_ALPHA: f64 = PI / 6.0;

const TAU: f64 = 2.0 * PI;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    #[inline]
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    #[inline]
    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.norm2().sqrt()
    }

    #[inline]
    pub fn dist2(self, o: Point) -> f64 {
        (self - o).norm2()
    }

    #[inline]
    pub fn dist(self, o: Point) -> f64 {
        self.dist2(o).sqrt()
    }

    /// Unit vector at angle `theta`.
    #[inline]
    pub fn polar(theta: f64) -> Point {
        let (s, c) = theta.sin_cos();
        Point::new(c, s)
    }

    /// Angle of the vector in `[0, 2π)`.
    #[inline]
    pub fn angle(self) -> f64 {
        normalize_angle(self.y.atan2(self.x))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    #[inline]
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point {
    type Output = Point;
    #[inline]
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    #[inline]
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// Maps any angle into `[0, 2π)`.
#[inline]
pub fn normalize_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Twice the signed area of `(a, b, c)`; positive when counterclockwise.
#[inline]
pub fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

/// Axis-aligned bounding box, closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bbox {
    pub min: Point,
    pub max: Point,
}

impl Bbox {
    pub fn empty() -> Self {
        Self {
            min: Point::new(f64::INFINITY, f64::INFINITY),
            max: Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn of_points(pts: &[Point]) -> Self {
        let mut b = Self::empty();
        for &p in pts {
            b.add(p);
        }
        b
    }

    #[inline]
    pub fn add(&mut self, p: Point) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
    }

    pub fn union(&mut self, o: &Bbox) {
        self.add(o.min);
        self.add(o.max);
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    #[inline]
    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    #[inline]
    pub fn overlaps(&self, o: &Bbox) -> bool {
        self.min.x <= o.max.x && o.min.x <= self.max.x && self.min.y <= o.max.y && o.min.y <= self.max.y
    }

    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Euclidean distance from `p` to the box (0 inside).
    #[inline]
    pub fn dist2_to(&self, p: Point) -> f64 {
        let dx = (self.min.x - p.x).max(0.0).max(p.x - self.max.x);
        let dy = (self.min.y - p.y).max(0.0).max(p.y - self.max.y);
        dx * dx + dy * dy
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            self.min,
            Point::new(self.max.x, self.min.y),
            self.max,
            Point::new(self.min.x, self.max.y),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: Point,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Point, radius: f64) -> Result<Self> {
        if !center.is_finite() || !radius.is_finite() || radius <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "disk needs a finite center and positive radius, got ({}, {}) r={}",
                center.x, center.y, radius
            )));
        }
        Ok(Self { center, radius })
    }

    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        self.center.dist2(p) <= self.radius * self.radius
    }

    /// True when `p` lies inside with a relative safety margin.
    #[inline]
    pub fn contains_strictly(&self, p: Point) -> bool {
        let r = self.radius * (1.0 - 1e-9);
        self.center.dist2(p) <= r * r
    }

    #[inline]
    pub fn intersects(&self, o: &Disk) -> bool {
        let s = self.radius + o.radius;
        self.center.dist2(o.center) <= s * s
    }

    pub fn bbox(&self) -> Bbox {
        let r = Point::new(self.radius, self.radius);
        Bbox { min: self.center - r, max: self.center + r }
    }
}

/// Triangle with vertices stored counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub v: [Point; 3],
}

impl Triangle {
    /// Builds a triangle, reordering the vertices counterclockwise.
    pub fn new(a: Point, b: Point, c: Point) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::InvalidInput("triangle vertex is not finite".into()));
        }
        let o = orient(a, b, c);
        if o == 0.0 || !o.is_finite() {
            return Err(Error::InvalidInput("degenerate triangle".into()));
        }
        let v = if o > 0.0 { [a, b, c] } else { [a, c, b] };
        Ok(Self { v })
    }

    #[inline]
    pub fn edge(&self, i: usize) -> (Point, Point) {
        (self.v[i], self.v[(i + 1) % 3])
    }

    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        orient(self.v[0], self.v[1], p) >= 0.0
            && orient(self.v[1], self.v[2], p) >= 0.0
            && orient(self.v[2], self.v[0], p) >= 0.0
    }

    /// Inside with every edge at least `1e-9 * size` away.
    pub fn contains_strictly(&self, p: Point) -> bool {
        let margin = 1e-9 * self.bbox().width().max(self.bbox().height());
        (0..3).all(|i| {
            let (a, b) = self.edge(i);
            let len = a.dist(b);
            orient(a, b, p) >= margin * len
        })
    }

    pub fn centroid(&self) -> Point {
        (self.v[0] + self.v[1] + self.v[2]) * (1.0 / 3.0)
    }

    pub fn area(&self) -> f64 {
        0.5 * orient(self.v[0], self.v[1], self.v[2])
    }

    pub fn bbox(&self) -> Bbox {
        Bbox::of_points(&self.v)
    }

    /// Interior angle at vertex `i`.
    pub fn angle_at(&self, i: usize) -> f64 {
        let p = self.v[i];
        let a = self.v[(i + 1) % 3] - p;
        let b = self.v[(i + 2) % 3] - p;
        a.cross(b).abs().atan2(a.dot(b))
    }

    pub fn intersects(&self, o: &Triangle) -> bool {
        if !self.bbox().overlaps(&o.bbox()) {
            return false;
        }
        for i in 0..3 {
            let (a, b) = self.edge(i);
            for j in 0..3 {
                let (c, d) = o.edge(j);
                if segments_intersect(a, b, c, d) {
                    return true;
                }
            }
        }
        self.contains(o.v[0]) || o.contains(self.v[0])
    }

    /// Closed triangle meets the closed segment `ab`.
    pub fn meets_segment(&self, a: Point, b: Point) -> bool {
        if self.contains(a) || self.contains(b) {
            return true;
        }
        (0..3).any(|i| {
            let (c, d) = self.edge(i);
            segments_intersect(a, b, c, d)
        })
    }

    /// Distance from the triangle to segment `ab` (0 when they meet).
    pub fn dist_to_segment(&self, a: Point, b: Point) -> f64 {
        if self.meets_segment(a, b) {
            return 0.0;
        }
        (0..3)
            .map(|i| {
                let (c, d) = self.edge(i);
                segment_segment_dist(a, b, c, d)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

/// Node type of the implicit graph. The object id is its index in the
/// input slice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeomObject {
    Disk(Disk),
    Triangle(Triangle),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ObjectKind {
    Disks,
    Triangles,
}

impl GeomObject {
    pub fn kind(&self) -> ObjectKind {
        match self {
            GeomObject::Disk(_) => ObjectKind::Disks,
            GeomObject::Triangle(_) => ObjectKind::Triangles,
        }
    }

    pub fn bbox(&self) -> Bbox {
        match self {
            GeomObject::Disk(d) => d.bbox(),
            GeomObject::Triangle(t) => t.bbox(),
        }
    }

    /// Side of the smallest axis-aligned enclosing square.
    pub fn size(&self) -> f64 {
        match self {
            GeomObject::Disk(d) => 2.0 * d.radius,
            GeomObject::Triangle(t) => {
                let b = t.bbox();
                b.width().max(b.height())
            }
        }
    }

    /// Reference point used to seed quadtrees: the center of a disk or
    /// the centroid of a triangle. Always strictly inside the object.
    pub fn ref_point(&self) -> Point {
        match self {
            GeomObject::Disk(d) => d.center,
            GeomObject::Triangle(t) => t.centroid(),
        }
    }

    #[inline]
    pub fn contains(&self, p: Point) -> bool {
        match self {
            GeomObject::Disk(d) => d.contains(p),
            GeomObject::Triangle(t) => t.contains(p),
        }
    }

    #[inline]
    pub fn contains_strictly(&self, p: Point) -> bool {
        match self {
            GeomObject::Disk(d) => d.contains_strictly(p),
            GeomObject::Triangle(t) => t.contains_strictly(p),
        }
    }

    /// Same-kind intersection test. Mixed kinds never intersect here; use
    /// [`objects_intersect`] for a checked version.
    #[inline]
    pub fn intersects(&self, o: &GeomObject) -> bool {
        match (self, o) {
            (GeomObject::Disk(a), GeomObject::Disk(b)) => a.intersects(b),
            (GeomObject::Triangle(a), GeomObject::Triangle(b)) => a.intersects(b),
            _ => false,
        }
    }

    /// Distance from the object to the closed segment `ab`.
    pub fn dist_to_segment(&self, a: Point, b: Point) -> f64 {
        match self {
            GeomObject::Disk(d) => (point_segment_dist(d.center, a, b) - d.radius).max(0.0),
            GeomObject::Triangle(t) => t.dist_to_segment(a, b),
        }
    }

    pub fn as_disk(&self) -> Option<&Disk> {
        match self {
            GeomObject::Disk(d) => Some(d),
            _ => None,
        }
    }

    pub fn as_triangle(&self) -> Option<&Triangle> {
        match self {
            GeomObject::Triangle(t) => Some(t),
            _ => None,
        }
    }

    pub fn translate_scale(&self, shift: Point, scale: f64) -> GeomObject {
        let f = |p: Point| (p + shift) * scale;
        match self {
            GeomObject::Disk(d) => GeomObject::Disk(Disk { center: f(d.center), radius: d.radius * scale }),
            GeomObject::Triangle(t) => GeomObject::Triangle(Triangle { v: [f(t.v[0]), f(t.v[1]), f(t.v[2])] }),
        }
    }
}

pub fn size(obj: &GeomObject) -> f64 {
    obj.size()
}

pub fn objects_intersect(a: &GeomObject, b: &GeomObject) -> Result<bool> {
    if a.kind() != b.kind() {
        return Err(Error::MixedKinds);
    }
    Ok(a.intersects(b))
}

pub fn min_angle(t: &Triangle) -> Result<f64> {
    if t.area().abs() <= f64::EPSILON * t.bbox().width().max(t.bbox().height()).powi(2) {
        return Err(Error::InvalidInput("degenerate triangle".into()));
    }
    Ok((0..3).map(|i| t.angle_at(i)).fold(f64::INFINITY, f64::min))
}

#[inline]
fn on_segment_bbox(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed segment intersection.
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0)) {
        return true;
    }
    (o1 == 0.0 && on_segment_bbox(a, b, c))
        || (o2 == 0.0 && on_segment_bbox(a, b, d))
        || (o3 == 0.0 && on_segment_bbox(c, d, a))
        || (o4 == 0.0 && on_segment_bbox(c, d, b))
}

pub fn point_segment_dist(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let l2 = ab.norm2();
    if l2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / l2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

pub fn segment_segment_dist(a: Point, b: Point, c: Point, d: Point) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_dist(a, c, d)
        .min(point_segment_dist(b, c, d))
        .min(point_segment_dist(c, a, b))
        .min(point_segment_dist(d, a, b))
}

/// Intersection points of two circles. Coincident circles report none.
pub fn circle_intersections(c1: Point, r1: f64, c2: Point, r2: f64) -> Vec<Point> {
    let (pts, n) = circle_intersections_fixed(c1, r1, c2, r2);
    pts[..n].to_vec()
}

/// Allocation-free form of [`circle_intersections`]: the points and their count.
#[inline]
pub fn circle_intersections_fixed(c1: Point, r1: f64, c2: Point, r2: f64) -> ([Point; 2], usize) {
    let none = ([Point::new(0.0, 0.0); 2], 0);
    let d2 = c1.dist2(c2);
    let d = d2.sqrt();
    if d == 0.0 {
        return none;
    }
    let rs = r1 + r2;
    let rd = (r1 - r2).abs();
    let tol = 1e-12 * rs;
    if d > rs + tol || d < rd - tol {
        return none;
    }
    let a = (r1 * r1 - r2 * r2 + d2) / (2.0 * d);
    let h2 = r1 * r1 - a * a;
    let u = (c2 - c1) * (1.0 / d);
    let base = c1 + u * a;
    if h2 <= (tol * r1).max(0.0) {
        return ([base, base], 1);
    }
    let h = h2.sqrt();
    let perp = Point::new(-u.y, u.x);
    ([base + perp * h, base - perp * h], 2)
}

/// Intersection point of the lines through `a,b` and `c,d`, if not parallel.
pub fn line_intersection(a: Point, b: Point, c: Point, d: Point) -> Option<Point> {
    let r = b - a;
    let s = d - c;
    let den = r.cross(s);
    if den == 0.0 {
        return None;
    }
    let t = (c - a).cross(s) / den;
    Some(a + r * t)
}

/// The set of canonical directions `{i * alpha/2 : 0 <= i <= floor(4π/alpha)}`.
#[derive(Debug, Clone)]
pub struct CanonicalDirectionSet {
    pub alpha: f64,
    pub angles: Vec<f64>,
    /// Index of the undirected line class (angle mod π) of each direction.
    pub line_class: Vec<usize>,
    pub line_angles: Vec<f64>,
}

impl CanonicalDirectionSet {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= PI / 3.0) {
            return Err(Error::InvalidInput(format!("fatness constant {alpha} outside (0, π/3]")));
        }
        let step = alpha / 2.0;
        let count = (4.0 * PI / alpha).floor() as usize + 1;
        let angles: Vec<f64> = (0..count).map(|i| i as f64 * step).collect();
        let mut line_angles: Vec<f64> = Vec::new();
        let mut line_class = Vec::with_capacity(count);
        for &a in &angles {
            let m = a.rem_euclid(PI);
            let m = if PI - m < 1e-9 { 0.0 } else { m };
            let idx = match line_angles.iter().position(|&l| (l - m).abs() < 1e-9) {
                Some(i) => i,
                None => {
                    line_angles.push(m);
                    line_angles.len() - 1
                }
            };
            line_class.push(idx);
        }
        Ok(Self { alpha, angles, line_class, line_angles })
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    /// Index of the canonical direction closest to `theta` (mod 2π).
    pub fn nearest(&self, theta: f64) -> usize {
        let t = normalize_angle(theta);
        let step = self.alpha / 2.0;
        let k = (t / step).round() as isize;
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for cand in [k - 1, k, k + 1] {
            if cand < 0 || cand as usize >= self.angles.len() {
                continue;
            }
            let d = angular_distance(self.angles[cand as usize], t);
            if d < best_d {
                best_d = d;
                best = cand as usize;
            }
        }
        if angular_distance(self.angles[0], t) < best_d {
            best = 0;
        }
        best
    }
}

#[inline]
pub fn angular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// A chord from a triangle vertex to the opposite side in a canonical direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chord {
    pub from: Point,
    pub to: Point,
    pub dir: usize,
    pub vertex: usize,
}

/// Three canonical chords (one per vertex) and the point set P(Δ): the
/// three vertices followed by the three chord endpoints.
#[derive(Debug, Clone, Copy)]
pub struct ChordSet {
    pub chords: [Chord; 3],
    pub points: [Point; 6],
}

/// Canonical chord from vertex `i`: the canonical direction closest to the
/// angle bisector at that vertex.
pub fn chord_from_vertex(t: &Triangle, i: usize, dirs: &CanonicalDirectionSet) -> Result<Chord> {
    let p = t.v[i];
    let a = t.v[(i + 1) % 3];
    let b = t.v[(i + 2) % 3];
    let start = (a - p).angle();
    let width = t.angle_at(i);
    let k = dirs.nearest(start + width / 2.0);
    let offset = (dirs.angles[k] - start).rem_euclid(TAU);
    if !(offset > 0.0 && offset < width) {
        return Err(Error::Invariant(format!(
            "vertex {i} admits no canonical chord (angle {width}, alpha {})",
            dirs.alpha
        )));
    }
    let dir = Point::polar(dirs.angles[k]);
    let hit = line_intersection(p, p + dir, a, b)
        .ok_or_else(|| Error::Invariant("canonical chord parallel to opposite side".into()))?;
    Ok(Chord { from: p, to: hit, dir: k, vertex: i })
}

pub fn canonical_chords(t: &Triangle, dirs: &CanonicalDirectionSet) -> Result<ChordSet> {
    let c0 = chord_from_vertex(t, 0, dirs)?;
    let c1 = chord_from_vertex(t, 1, dirs)?;
    let c2 = chord_from_vertex(t, 2, dirs)?;
    Ok(ChordSet {
        chords: [c0, c1, c2],
        points: [t.v[0], t.v[1], t.v[2], c0.to, c1.to, c2.to],
    })
}

//! Unions of stabbed cliques.
//!
//! A clique with stab point `p` has a union that is star-shaped about `p`, so
//! its boundary is the graph of `ρ(θ) = max_i ρ_i(θ)` in polar coordinates,
//! where `ρ_i(θ)` is the distance from `p` to the boundary of member `i`
//! along direction `θ`. The envelope is stored as a cyclic sequence of
//! pieces, each a start angle and the member (and, for triangles, the edge)
//! attaining the maximum until the next start.

use std::f64::consts::TAU;

use crate::geom::{circle_intersections_fixed, line_intersection, normalize_angle, segments_intersect, Bbox, GeomObject, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Src {
    pub obj: u32,
    /// Edge index for triangles, 0 for disks.
    pub edge: u8,
}

#[derive(Debug, Clone)]
pub struct Flower {
    pub stab: Point,
    /// Strictly increasing start angles in `[0, 2π)`. The last piece wraps
    /// around to the first start.
    pub starts: Vec<f64>,
    pub srcs: Vec<Src>,
    /// Bounding box of the union.
    pub bbox: Bbox,
}

/// Distance from `p` to the boundary of the source along direction `u`.
#[inline]
pub fn radial(objs: &[GeomObject], s: Src, p: Point, u: Point) -> f64 {
    match &objs[s.obj as usize] {
        GeomObject::Disk(d) => {
            let w = d.center - p;
            let b = u.dot(w);
            let disc = d.radius * d.radius - w.norm2() + b * b;
            b + disc.max(0.0).sqrt()
        }
        GeomObject::Triangle(t) => {
            let (a, b) = t.edge(s.edge as usize);
            let e = b - a;
            let den = u.cross(e);
            if den <= 0.0 {
                return f64::INFINITY;
            }
            (a - p).cross(e) / den
        }
    }
}

fn single(objs: &[GeomObject], obj: u32, p: Point) -> (Vec<f64>, Vec<Src>) {
    match &objs[obj as usize] {
        GeomObject::Disk(_) => (vec![0.0], vec![Src { obj, edge: 0 }]),
        GeomObject::Triangle(t) => {
            let mut v: Vec<(f64, Src)> = (0..3).map(|i| ((t.v[i] - p).angle(), Src { obj, edge: i as u8 })).collect();
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            (v.iter().map(|x| x.0).collect(), v.iter().map(|x| x.1).collect())
        }
    }
}

#[inline]
fn index_at(starts: &[f64], theta: f64) -> usize {
    let k = starts.partition_point(|&s| s <= theta);
    if k == 0 {
        starts.len() - 1
    } else {
        k - 1
    }
}

/// Angles at which the radial functions of two sources may cross.
fn crossings(objs: &[GeomObject], p: Point, a: Src, b: Src, out: &mut Vec<f64>) {
    out.clear();
    match (&objs[a.obj as usize], &objs[b.obj as usize]) {
        (GeomObject::Disk(d1), GeomObject::Disk(d2)) => {
            let (pts, n) = circle_intersections_fixed(d1.center, d1.radius, d2.center, d2.radius);
            for &q in &pts[..n] {
                if q != p {
                    out.push((q - p).angle());
                }
            }
        }
        (GeomObject::Triangle(t1), GeomObject::Triangle(t2)) => {
            let (a1, b1) = t1.edge(a.edge as usize);
            let (a2, b2) = t2.edge(b.edge as usize);
            if let Some(q) = line_intersection(a1, b1, a2, b2) {
                if q != p {
                    out.push((q - p).angle());
                }
            }
        }
        _ => {}
    }
}

fn push_piece(starts: &mut Vec<f64>, srcs: &mut Vec<Src>, at: f64, s: Src) {
    if srcs.last() != Some(&s) {
        starts.push(at);
        srcs.push(s);
    }
}

fn coalesce_wrap(starts: &mut Vec<f64>, srcs: &mut Vec<Src>) {
    if srcs.len() > 1 && srcs[0] == srcs[srcs.len() - 1] {
        starts.remove(0);
        srcs.remove(0);
    }
}

fn merge(objs: &[GeomObject], p: Point, a: (&[f64], &[Src]), b: (&[f64], &[Src])) -> (Vec<f64>, Vec<Src>) {
    let mut bps = Vec::with_capacity(a.0.len() + b.0.len() + 1);
    bps.push(0.0);
    let (mut i, mut j) = (0, 0);
    while i < a.0.len() || j < b.0.len() {
        let x = if j >= b.0.len() || (i < a.0.len() && a.0[i] <= b.0[j]) {
            i += 1;
            a.0[i - 1]
        } else {
            j += 1;
            b.0[j - 1]
        };
        if *bps.last().unwrap() != x {
            bps.push(x);
        }
    }
    let mut starts = Vec::with_capacity(bps.len());
    let mut srcs = Vec::with_capacity(bps.len());
    let mut cross = Vec::with_capacity(2);
    for k in 0..bps.len() {
        let lo = bps[k];
        let hi = if k + 1 < bps.len() { bps[k + 1] } else { TAU };
        let fa = a.1[index_at(a.0, lo)];
        let fb = b.1[index_at(b.0, lo)];
        if fa == fb {
            push_piece(&mut starts, &mut srcs, lo, fa);
            continue;
        }
        crossings(objs, p, fa, fb, &mut cross);
        cross.retain(|&t| t > lo && t < hi);
        cross.sort_by(|x, y| x.total_cmp(y));
        let mut s = lo;
        for e in cross.iter().copied().chain(std::iter::once(hi)) {
            let u = Point::polar(0.5 * (s + e));
            let va = radial(objs, fa, p, u);
            let vb = radial(objs, fb, p, u);
            let tol = 1e-12 * va.max(vb);
            let w = if va > vb + tol {
                fa
            } else if vb > va + tol {
                fb
            } else if fa.obj <= fb.obj {
                fa
            } else {
                fb
            };
            push_piece(&mut starts, &mut srcs, s, w);
            s = e;
        }
    }
    coalesce_wrap(&mut starts, &mut srcs);
    (starts, srcs)
}

fn envelope(objs: &[GeomObject], members: &[u32], p: Point) -> (Vec<f64>, Vec<Src>) {
    if members.len() == 1 {
        return single(objs, members[0], p);
    }
    let mid = members.len() / 2;
    let l = envelope(objs, &members[..mid], p);
    let r = envelope(objs, &members[mid..], p);
    merge(objs, p, (&l.0, &l.1), (&r.0, &r.1))
}

/// A maximal boundary piece of a flower.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    /// Counterclockwise arc of a circle from angle `a0` sweeping `sweep`.
    Arc { c: Point, r: f64, a0: f64, sweep: f64 },
    Seg { a: Point, b: Point },
}

const ARC_TOL: f64 = 1e-12;

#[inline]
fn on_arc(ang: f64, a0: f64, sweep: f64) -> bool {
    let d = normalize_angle(ang - a0);
    d <= sweep + ARC_TOL || d >= TAU - ARC_TOL
}

impl Piece {
    pub fn bbox(&self) -> Bbox {
        match *self {
            Piece::Seg { a, b } => Bbox::of_points(&[a, b]),
            Piece::Arc { c, r, a0, sweep } => {
                let mut b = Bbox::empty();
                b.add(c + Point::polar(a0) * r);
                b.add(c + Point::polar(a0 + sweep) * r);
                for k in 0..4 {
                    let t = k as f64 * std::f64::consts::FRAC_PI_2;
                    if normalize_angle(t - a0) <= sweep {
                        b.add(c + Point::polar(t) * r);
                    }
                }
                b
            }
        }
    }

    /// Number of intersection points with another piece (a shared segment
    /// overlap counts once).
    pub fn crossings_with(&self, o: &Piece) -> usize {
        match (*self, *o) {
            (Piece::Arc { c, r, a0, sweep }, Piece::Arc { c: c2, r: r2, a0: b0, sweep: s2 }) => {
                let (pts, n) = circle_intersections_fixed(c, r, c2, r2);
                pts[..n].iter().filter(|&&x| on_arc((x - c).angle(), a0, sweep) && on_arc((x - c2).angle(), b0, s2)).count()
            }
            (Piece::Seg { a, b }, Piece::Seg { a: c, b: d }) => segments_intersect(a, b, c, d) as usize,
            (Piece::Arc { c, r, a0, sweep }, Piece::Seg { a, b }) | (Piece::Seg { a, b }, Piece::Arc { c, r, a0, sweep }) => {
                arc_segment_points(c, r, a0, sweep, a, b)
            }
        }
    }
}

fn arc_segment_points(c: Point, r: f64, a0: f64, sweep: f64, a: Point, b: Point) -> usize {
    let d = b - a;
    let f = a - c;
    let qa = d.norm2();
    if qa == 0.0 {
        return 0;
    }
    let qb = 2.0 * f.dot(d);
    let qc = f.norm2() - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return 0;
    }
    let sq = disc.sqrt();
    let mut n = 0;
    let roots = [(-qb - sq) / (2.0 * qa), (-qb + sq) / (2.0 * qa)];
    for (k, &t) in roots.iter().enumerate() {
        if k == 1 && sq == 0.0 {
            break;
        }
        if (-ARC_TOL..=1.0 + ARC_TOL).contains(&t) && on_arc((a + d * t - c).angle(), a0, sweep) {
            n += 1;
        }
    }
    n
}

impl Flower {
    /// Builds the union boundary of `members`, all of which contain `stab`
    /// in their interior.
    pub fn build(objs: &[GeomObject], members: &[u32], stab: Point) -> Self {
        assert!(!members.is_empty());
        let (starts, srcs) = envelope(objs, members, stab);
        let mut bbox = Bbox::empty();
        for &m in members {
            bbox.union(&objs[m as usize].bbox());
        }
        Self { stab, starts, srcs, bbox }
    }

    pub fn len(&self) -> usize {
        self.srcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.srcs.is_empty()
    }

    /// Index of the piece covering direction `theta`.
    pub fn piece_at(&self, theta: f64) -> usize {
        index_at(&self.starts, theta)
    }

    /// Flower radius in direction `theta`.
    pub fn radius_at(&self, objs: &[GeomObject], theta: f64) -> f64 {
        radial(objs, self.srcs[self.piece_at(theta)], self.stab, Point::polar(theta))
    }

    /// A member containing `q`, if `q` lies in the union.
    pub fn locate(&self, objs: &[GeomObject], q: Point) -> Option<u32> {
        if !self.bbox.contains(q) {
            return None;
        }
        let d = q - self.stab;
        if d.norm2() == 0.0 {
            return Some(self.srcs[0].obj);
        }
        let m = self.srcs.len();
        let k = self.piece_at(d.angle());
        for j in [k, (k + 1) % m, (k + m - 1) % m] {
            let obj = self.srcs[j].obj;
            if objs[obj as usize].contains(q) {
                return Some(obj);
            }
        }
        None
    }

    /// The boundary as geometric pieces, each with its source object.
    pub fn pieces(&self, objs: &[GeomObject]) -> Vec<(Piece, u32)> {
        let m = self.srcs.len();
        let mut out = Vec::with_capacity(m);
        for k in 0..m {
            let s = self.srcs[k];
            let t0 = self.starts[k];
            let t1 = if k + 1 < m { self.starts[k + 1] } else { self.starts[0] + TAU };
            let u0 = Point::polar(t0);
            let u1 = Point::polar(t1);
            let p0 = self.stab + u0 * radial(objs, s, self.stab, u0);
            let p1 = self.stab + u1 * radial(objs, s, self.stab, u1);
            let piece = match &objs[s.obj as usize] {
                GeomObject::Disk(d) => {
                    let a0 = (p0 - d.center).angle();
                    let sweep = if m == 1 { TAU } else { normalize_angle((p1 - d.center).angle() - a0) };
                    Piece::Arc { c: d.center, r: d.radius, a0, sweep }
                }
                GeomObject::Triangle(_) => Piece::Seg { a: p0, b: p1 },
            };
            out.push((piece, s.obj));
        }
        out
    }
}

/// Segment tree over the members of a clique (sorted by id) with a union
/// envelope at every node, answering "lowest member id containing q".
#[derive(Debug, Clone)]
pub struct FlowerTree {
    members: Vec<u32>,
    /// Node envelopes in heap order; node `k` covers `ranges[k]`.
    nodes: Vec<Flower>,
    ranges: Vec<(u32, u32)>,
}

impl FlowerTree {
    pub fn build(objs: &[GeomObject], members: &[u32], stab: Point) -> Self {
        let mut members = members.to_vec();
        members.sort_unstable();
        let mut t = Self { members, nodes: Vec::new(), ranges: Vec::new() };
        t.build_node(objs, stab, 0, t.members.len());
        t
    }

    fn build_node(&mut self, objs: &[GeomObject], stab: Point, lo: usize, hi: usize) -> usize {
        let id = self.nodes.len();
        let f = Flower::build(objs, &self.members[lo..hi], stab);
        self.nodes.push(f);
        self.ranges.push((lo as u32, hi as u32));
        if hi - lo > 1 {
            let mid = (lo + hi) / 2;
            self.build_node(objs, stab, lo, mid);
            self.build_node(objs, stab, mid, hi);
        }
        id
    }

    pub fn root(&self) -> &Flower {
        &self.nodes[0]
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    /// Lowest member id containing `q`.
    pub fn lowest_containing(&self, objs: &[GeomObject], q: Point) -> Option<u32> {
        self.query(objs, q, 0, u32::MAX)
    }

    /// Lowest member id containing `q` and below `bound`.
    pub fn lowest_containing_below(&self, objs: &[GeomObject], q: Point, bound: u32) -> Option<u32> {
        self.query(objs, q, 0, bound)
    }

    fn query(&self, objs: &[GeomObject], q: Point, node: usize, bound: u32) -> Option<u32> {
        let (lo, hi) = self.ranges[node];
        if self.members[lo as usize] >= bound {
            return None;
        }
        if hi - lo == 1 {
            let m = self.members[lo as usize];
            return objs[m as usize].contains(q).then_some(m);
        }
        self.nodes[node].locate(objs, q)?;
        // preorder layout: left child follows, right child after the left subtree
        let left = node + 1;
        let mid = (lo + hi) / 2;
        let right = left + 2 * (mid - lo) as usize - 1;
        self.query(objs, q, left, bound).or_else(|| self.query(objs, q, right, bound))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Disk, Triangle};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn disk(x: f64, y: f64, r: f64) -> GeomObject {
        GeomObject::Disk(Disk::new(Point::new(x, y), r).unwrap())
    }

    #[test]
    fn singleton_disk_is_full_circle() {
        let objs = vec![disk(0.0, 0.0, 1.0)];
        let f = Flower::build(&objs, &[0], Point::new(0.2, 0.1));
        assert_eq!(f.len(), 1);
        match f.pieces(&objs)[0].0 {
            Piece::Arc { sweep, .. } => assert_eq!(sweep, TAU),
            _ => panic!(),
        }
    }

    #[test]
    fn two_unit_disks() {
        let objs = vec![disk(0.0, 0.0, 1.0), disk(1.0, 0.0, 1.0)];
        let f = Flower::build(&objs, &[0, 1], Point::new(0.5, 0.0));
        assert_eq!(f.len(), 2);
        let h = 3f64.sqrt() / 2.0;
        let ends: Vec<Point> = f
            .pieces(&objs)
            .iter()
            .map(|(p, _)| match *p {
                Piece::Arc { c, r, a0, .. } => c + Point::polar(a0) * r,
                _ => panic!(),
            })
            .collect();
        for e in ends {
            assert!((e.x - 0.5).abs() < 1e-9 && (e.y.abs() - h).abs() < 1e-9);
        }
    }

    #[test]
    fn identical_disks_give_one_piece() {
        let objs = vec![disk(0.3, 0.3, 0.2), disk(0.3, 0.3, 0.2)];
        let f = Flower::build(&objs, &[0, 1], Point::new(0.3, 0.3));
        assert_eq!(f.len(), 1);
        assert_eq!(f.srcs[0].obj, 0);
    }

    #[test]
    fn single_triangle_has_three_segments() {
        let t = Triangle::new(Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.5, 0.9)).unwrap();
        let objs = vec![GeomObject::Triangle(t)];
        let f = Flower::build(&objs, &[0], t.centroid());
        assert_eq!(f.len(), 3);
        for (p, _) in f.pieces(&objs) {
            let Piece::Seg { a, b } = p else { panic!() };
            assert!(t.v.iter().any(|v| v.dist(a) < 1e-12));
            assert!(t.v.iter().any(|v| v.dist(b) < 1e-12));
        }
    }

    fn random_clique(rng: &mut ChaCha8Rng, tri: bool, m: usize) -> (Vec<GeomObject>, Point) {
        let p = Point::new(0.5, 0.5);
        let objs = (0..m)
            .map(|_| {
                if tri {
                    loop {
                        let c = p + Point::polar(rng.gen_range(0.0..TAU)) * rng.gen_range(0.0..0.05);
                        let r = rng.gen_range(0.08..0.3);
                        let a0 = rng.gen_range(0.0..TAU);
                        let v: Vec<Point> = (0..3).map(|k| c + Point::polar(a0 + k as f64 * TAU / 3.0 + rng.gen_range(-0.4..0.4)) * r).collect();
                        if let Ok(t) = Triangle::new(v[0], v[1], v[2]) {
                            if t.contains_strictly(p) {
                                return GeomObject::Triangle(t);
                            }
                        }
                    }
                } else {
                    let r = rng.gen_range(0.05..0.3);
                    let c = p + Point::polar(rng.gen_range(0.0..TAU)) * rng.gen_range(0.0..r * 0.95);
                    GeomObject::Disk(Disk::new(c, r).unwrap())
                }
            })
            .collect();
        (objs, p)
    }

    #[test]
    fn envelope_matches_radial_max() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..60 {
            let tri = trial % 2 == 1;
            let m = 1 + trial % 25;
            let (objs, p) = random_clique(&mut rng, tri, m);
            let members: Vec<u32> = (0..m as u32).collect();
            let f = Flower::build(&objs, &members, p);
            for w in f.starts.windows(2) {
                assert!(w[0] < w[1]);
            }
            if tri {
                assert!(f.len() <= 20 * m);
            } else {
                assert!(f.len() <= 6 * m);
            }
            for k in 0..f.len() {
                let j = (k + 1) % f.len();
                assert!(f.len() == 1 || f.srcs[k] != f.srcs[j]);
            }
            for s in 0..720 {
                let th = (s as f64 + 0.37) * TAU / 720.0;
                let u = Point::polar(th);
                let want = members.iter().map(|&i| match &objs[i as usize] {
                    GeomObject::Disk(_) => radial(&objs, Src { obj: i, edge: 0 }, p, u),
                    GeomObject::Triangle(_) => (0..3).map(|e| radial(&objs, Src { obj: i, edge: e }, p, u)).fold(f64::INFINITY, f64::min),
                });
                let want = want.fold(0.0, f64::max);
                let got = f.radius_at(&objs, th);
                assert!((got - want).abs() <= 1e-9 * want.max(1.0), "trial {trial} θ={th} got {got} want {want}");
            }
            let tree = FlowerTree::build(&objs, &members, p);
            for _ in 0..300 {
                let q = Point::new(rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9));
                let inside = objs.iter().any(|o| o.contains(q));
                let loc = f.locate(&objs, q);
                assert_eq!(loc.is_some(), inside);
                if let Some(m) = loc {
                    assert!(objs[m as usize].contains(q));
                }
                let lowest = (0..m as u32).find(|&i| objs[i as usize].contains(q));
                assert_eq!(tree.lowest_containing(&objs, q), lowest);
            }
        }
    }

    #[test]
    fn arc_and_segment_crossings() {
        let a = Piece::Arc { c: Point::new(0.0, 0.0), r: 1.0, a0: 0.0, sweep: TAU };
        let b = Piece::Arc { c: Point::new(1.5, 0.0), r: 1.0, a0: 0.0, sweep: TAU };
        assert_eq!(a.crossings_with(&b), 2);
        let upper = Piece::Arc { c: Point::new(1.5, 0.0), r: 1.0, a0: 0.0, sweep: std::f64::consts::PI };
        assert_eq!(a.crossings_with(&upper), 1);
        let s = Piece::Seg { a: Point::new(-2.0, 0.0), b: Point::new(2.0, 0.0) };
        assert_eq!(a.crossings_with(&s), 2);
        assert_eq!(upper.crossings_with(&Piece::Seg { a: Point::new(-2.0, 0.0), b: Point::new(3.0, 0.0) }), 2);
        assert_eq!(upper.crossings_with(&s), 1);
        let s2 = Piece::Seg { a: Point::new(0.0, -2.0), b: Point::new(0.0, 2.0) };
        assert_eq!(s.crossings_with(&s2), 1);
        let bb = upper.bbox();
        assert!((bb.max.y - 1.0).abs() < 1e-12 && bb.min.y.abs() < 1e-12);
    }
}

//! Emptiness queries with fat query triangles over a static point set.
//!
//! A fat triangle splits into four semi-canonical triangles: a canonical
//! chord from vertex 0 cuts it in two, and in each part a canonical chord
//! from the far vertex meets the first chord. Each part has an apex whose
//! two edges run along canonical lines `L1`, `L2`. In the skew coordinates
//! `p = u d1 + v d2` (after flipping signs) the part is a quadrant
//! `u >= u0, v >= v0` cut by one line of negative slope, so it is nonempty
//! iff the minimum of a positive linear form over the quadrant is small
//! enough. That minimum is found with an x-tree on `u`, a y-tree on `v`
//! inside every x-node, and a lower-left convex chain at every y-node.

use std::cell::OnceCell;

use crate::geom::{chord_from_vertex, CanonicalDirectionSet, Point, Triangle};
use crate::Result;

/// Triangle with edges `apex-b` and `apex-c` on canonical lines.
#[derive(Debug, Clone, Copy)]
pub struct SemiCanonical {
    pub apex: Point,
    pub b: Point,
    pub c: Point,
    pub class_b: usize,
    pub class_c: usize,
}

impl SemiCanonical {
    pub fn triangle(&self) -> Result<Triangle> {
        Triangle::new(self.apex, self.b, self.c)
    }
}

/// The four semi-canonical parts of a fat triangle.
pub fn semi_canonical_pieces(t: &Triangle, dirs: &CanonicalDirectionSet) -> Result<[SemiCanonical; 4]> {
    let [v0, v1, v2] = t.v;
    let c0 = chord_from_vertex(t, 0, dirs)?;
    let h = c0.to;
    let k0 = dirs.line_class[c0.dir];
    // both halves keep the counterclockwise order of `t`
    let t1 = Triangle { v: [v0, v1, h] };
    let t2 = Triangle { v: [v0, h, v2] };
    let c1 = chord_from_vertex(&t1, 1, dirs)?;
    let c2 = chord_from_vertex(&t2, 2, dirs)?;
    let (g1, k1) = (c1.to, dirs.line_class[c1.dir]);
    let (g2, k2) = (c2.to, dirs.line_class[c2.dir]);
    Ok([
        SemiCanonical { apex: g1, b: v0, c: v1, class_b: k0, class_c: k1 },
        SemiCanonical { apex: g1, b: h, c: v1, class_b: k0, class_c: k1 },
        SemiCanonical { apex: g2, b: v0, c: v2, class_b: k0, class_c: k2 },
        SemiCanonical { apex: g2, b: h, c: v2, class_b: k0, class_c: k2 },
    ])
}

/// Lower-left convex chain of points sorted by `(u, v)`: the points that
/// minimise some positive linear form.
fn lower_left_chain(pts: &[(f64, f64, u32)], out: &mut Vec<(f64, f64, u32)>) {
    let start = out.len();
    for &p in pts {
        while out.len() >= start + 2 {
            let a = out[out.len() - 2];
            let b = out[out.len() - 1];
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross <= 0.0 {
                out.pop();
            } else {
                break;
            }
        }
        out.push(p);
    }
    let lowest = (start..out.len()).min_by(|&i, &j| out[i].1.total_cmp(&out[j].1).then(i.cmp(&j))).unwrap_or(start);
    out.truncate(lowest + 1);
}

/// Index of the chain point minimising `w . p`.
fn chain_min(chain: &[(f64, f64, u32)], w: (f64, f64)) -> usize {
    let f = |p: &(f64, f64, u32)| w.0 * p.0 + w.1 * p.1;
    let (mut lo, mut hi) = (0, chain.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if f(&chain[mid + 1]) < f(&chain[mid]) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Segment tree over points sorted by `v` with a chain at every node.
#[derive(Debug)]
struct YTree {
    vs: Vec<f64>,
    size: usize,
    start: Vec<u32>,
    chains: Vec<(f64, f64, u32)>,
}

impl YTree {
    fn build(by_v: &[(f64, f64, u32)]) -> Self {
        let n = by_v.len();
        let size = n.next_power_of_two();
        let mut nodes: Vec<Vec<(f64, f64, u32)>> = vec![Vec::new(); 2 * size];
        for (k, &p) in by_v.iter().enumerate() {
            nodes[size + k] = vec![p];
        }
        let mut merged = Vec::new();
        for k in (1..size).rev() {
            merged.clear();
            let (a, b) = (&nodes[2 * k], &nodes[2 * k + 1]);
            let (mut i, mut j) = (0, 0);
            while i < a.len() || j < b.len() {
                let take_a = j == b.len() || (i < a.len() && (a[i].0, a[i].1) <= (b[j].0, b[j].1));
                if take_a {
                    merged.push(a[i]);
                    i += 1;
                } else {
                    merged.push(b[j]);
                    j += 1;
                }
            }
            let mut out = Vec::with_capacity(merged.len());
            lower_left_chain(&merged, &mut out);
            nodes[k] = out;
        }
        let mut start = Vec::with_capacity(2 * size + 1);
        let mut chains = Vec::new();
        for c in &nodes {
            start.push(chains.len() as u32);
            chains.extend_from_slice(c);
        }
        start.push(chains.len() as u32);
        Self { vs: by_v.iter().map(|p| p.1).collect(), size, start, chains }
    }

    fn query(&self, v0: f64, w: (f64, f64), best: &mut Option<(f64, u32)>) {
        let mut l = self.vs.partition_point(|&v| v < v0) + self.size;
        let mut r = self.vs.len() + self.size;
        let mut visit = |k: usize| {
            let c = &self.chains[self.start[k] as usize..self.start[k + 1] as usize];
            if c.is_empty() {
                return;
            }
            let p = c[chain_min(c, w)];
            let val = w.0 * p.0 + w.1 * p.1;
            if best.is_none_or(|(b, _)| val < b) {
                *best = Some((val, p.2));
            }
        };
        while l < r {
            if l & 1 == 1 {
                visit(l);
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                visit(r);
            }
            l >>= 1;
            r >>= 1;
        }
    }
}

/// Three-level structure for one skew frame and sign pattern.
#[derive(Debug)]
struct QuadrantIndex {
    us: Vec<f64>,
    size: usize,
    ytrees: Vec<Option<YTree>>,
}

impl QuadrantIndex {
    fn build(pts: Vec<(f64, f64, u32)>) -> Self {
        let mut by_u = pts;
        by_u.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let n = by_u.len();
        let size = n.next_power_of_two().max(1);
        // points of every x-node, sorted by v
        let mut lists: Vec<Vec<(f64, f64, u32)>> = vec![Vec::new(); 2 * size];
        for (k, &p) in by_u.iter().enumerate() {
            lists[size + k] = vec![p];
        }
        for k in (1..size).rev() {
            let (a, b) = (&lists[2 * k], &lists[2 * k + 1]);
            let mut m = Vec::with_capacity(a.len() + b.len());
            let (mut i, mut j) = (0, 0);
            while i < a.len() || j < b.len() {
                if j == b.len() || (i < a.len() && a[i].1 <= b[j].1) {
                    m.push(a[i]);
                    i += 1;
                } else {
                    m.push(b[j]);
                    j += 1;
                }
            }
            lists[k] = m;
        }
        let ytrees = lists.iter().map(|l| (!l.is_empty()).then(|| YTree::build(l))).collect();
        Self { us: by_u.iter().map(|p| p.0).collect(), size, ytrees }
    }

    /// Point minimising `w . p` over `u >= u0, v >= v0`.
    fn query(&self, u0: f64, v0: f64, w: (f64, f64)) -> Option<(f64, u32)> {
        let mut best = None;
        let mut l = self.us.partition_point(|&u| u < u0) + self.size;
        let mut r = self.us.len() + self.size;
        while l < r {
            if l & 1 == 1 {
                if let Some(t) = &self.ytrees[l] {
                    t.query(v0, w, &mut best);
                }
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                if let Some(t) = &self.ytrees[r] {
                    t.query(v0, w, &mut best);
                }
            }
            l >>= 1;
            r >>= 1;
        }
        best
    }
}

#[derive(Debug)]
pub struct EmptinessIndex {
    points: Vec<Point>,
    dirs: CanonicalDirectionSet,
    frames: Vec<OnceCell<QuadrantIndex>>,
}

impl EmptinessIndex {
    pub fn build(points: Vec<Point>, dirs: &CanonicalDirectionSet) -> Self {
        let nc = dirs.line_angles.len();
        Self { points, dirs: dirs.clone(), frames: (0..nc * nc * 4).map(|_| OnceCell::new()).collect() }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    fn basis(&self, k1: usize, k2: usize) -> (Point, Point, f64) {
        let d1 = Point::polar(self.dirs.line_angles[k1]);
        let d2 = Point::polar(self.dirs.line_angles[k2]);
        (d1, d2, d1.cross(d2))
    }

    fn frame(&self, k1: usize, k2: usize, signs: usize) -> &QuadrantIndex {
        let nc = self.dirs.line_angles.len();
        self.frames[(k1 * nc + k2) * 4 + signs].get_or_init(|| {
            let (d1, d2, det) = self.basis(k1, k2);
            let su = if signs & 1 == 1 { -1.0 } else { 1.0 };
            let sv = if signs & 2 == 2 { -1.0 } else { 1.0 };
            let pts = self
                .points
                .iter()
                .enumerate()
                .map(|(i, &p)| (su * p.cross(d2) / det, sv * d1.cross(p) / det, i as u32))
                .collect();
            QuadrantIndex::build(pts)
        })
    }

    /// Index of a stored point inside the closed piece.
    pub fn query_piece(&self, s: &SemiCanonical) -> Option<usize> {
        let (k1, k2) = (s.class_b.min(s.class_c), s.class_b.max(s.class_c));
        let (d1, d2, det) = self.basis(k1, k2);
        let uv = |p: Point| (p.cross(d2) / det, d1.cross(p) / det);
        let a = uv(s.apex);
        let (pu, pv) = if s.class_b == k1 { (uv(s.b), uv(s.c)) } else { (uv(s.c), uv(s.b)) };
        let du = pu.0 - a.0;
        let dv = pv.1 - a.1;
        let su = if du < 0.0 { -1.0 } else { 1.0 };
        let sv = if dv < 0.0 { -1.0 } else { 1.0 };
        let signs = (su < 0.0) as usize | (((sv < 0.0) as usize) << 1);
        let apex = (su * a.0, sv * a.1);
        let w = (1.0 / du.abs(), 1.0 / dv.abs());
        let (val, id) = self.frame(k1, k2, signs).query(apex.0, apex.1, w)?;
        (val <= w.0 * apex.0 + w.1 * apex.1 + 1.0).then_some(id as usize)
    }

    /// Index of some stored point inside the closed fat triangle `q`.
    pub fn query(&self, q: &Triangle) -> Result<Option<usize>> {
        for s in semi_canonical_pieces(q, &self.dirs)? {
            if let Some(i) = self.query_piece(&s) {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }
}

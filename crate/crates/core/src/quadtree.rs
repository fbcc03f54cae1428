//! Compressed quadtrees and skip quadtrees over reference points.
//!
//! Points are snapped to a `2^32 x 2^32` lattice spanning the root cell.
//! Cells are addressed by depth below the root and lattice corner, and
//! Z-order keys interleave the x bits with the *complemented* y bits so that
//! sorting yields the quadrant order NW, NE, SW, SE at every level.
//!
//! A skip quadtree keeps the sequence `P_0 ⊃ P_1 ⊃ ... ⊃ P_t` (every other
//! point of the Z-order dropped, starting with the first) and one node per
//! region of each compressed subdivision `Q_i`. The root is `Q_t = {σ0}`.

use crate::error::{Error, Result};
use crate::geom::{Bbox, GeomObject, Point};
use crate::grids::{pow2, GridCell, GridFamily};

pub const LATTICE_BITS: u32 = 32;
const LATTICE_MAX: f64 = 4294967295.0;

#[inline]
fn spread(v: u32) -> u64 {
    let mut x = v as u64;
    x = (x | (x << 16)) & 0x0000_ffff_0000_ffff;
    x = (x | (x << 8)) & 0x00ff_00ff_00ff_00ff;
    x = (x | (x << 4)) & 0x0f0f_0f0f_0f0f_0f0f;
    x = (x | (x << 2)) & 0x3333_3333_3333_3333;
    (x | (x << 1)) & 0x5555_5555_5555_5555
}

/// Z-order key with quadrant order NW, NE, SW, SE.
#[inline]
pub fn zkey(x: u32, y: u32) -> u64 {
    spread(x) | (spread(!y) << 1)
}

/// A lattice cell: `depth` levels below the root, lower-left corner `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QCell {
    pub depth: u8,
    pub x: u32,
    pub y: u32,
}

impl QCell {
    pub const ROOT: QCell = QCell { depth: 0, x: 0, y: 0 };

    #[inline]
    pub fn side(&self) -> u64 {
        1u64 << (LATTICE_BITS - self.depth as u32)
    }

    #[inline]
    pub fn contains(&self, x: u32, y: u32) -> bool {
        let s = self.side();
        ((x as u64).wrapping_sub(self.x as u64)) < s && ((y as u64).wrapping_sub(self.y as u64)) < s
    }

    pub fn contains_cell(&self, o: &QCell) -> bool {
        o.depth >= self.depth && self.contains(o.x, o.y)
    }

    /// Quadrant index (NW=0, NE=1, SW=2, SE=3) of a lattice point.
    #[inline]
    pub fn quadrant_of(&self, x: u32, y: u32) -> usize {
        let b = LATTICE_BITS - 1 - self.depth as u32;
        let xb = ((x >> b) & 1) as usize;
        let yb = ((y >> b) & 1) as usize;
        ((1 - yb) << 1) | xb
    }

    pub fn child(&self, q: usize) -> QCell {
        let half = (self.side() >> 1) as u32;
        let xb = (q & 1) as u32;
        let yb = 1 - ((q >> 1) & 1) as u32;
        QCell { depth: self.depth + 1, x: self.x + xb * half, y: self.y + yb * half }
    }

    /// Half-open range of Z-order keys covered by the cell.
    pub fn key_range(&self) -> (u64, u128) {
        let shift = 2 * (LATTICE_BITS - self.depth as u32);
        if shift >= 64 {
            return (0, 1u128 << 64);
        }
        let start = (zkey(self.x, self.y) >> shift) << shift;
        (start, start as u128 + (1u128 << shift))
    }

    /// Smallest cell containing two distinct lattice points.
    pub fn common(a: (u32, u32), b: (u32, u32)) -> QCell {
        let diff = (a.0 ^ b.0) | (a.1 ^ b.1);
        let depth = diff.leading_zeros();
        if depth >= LATTICE_BITS {
            return QCell { depth: LATTICE_BITS as u8, x: a.0, y: a.1 };
        }
        let mask = !((1u64 << (LATTICE_BITS - depth)) - 1) as u32;
        QCell { depth: depth as u8, x: a.0 & mask, y: a.1 & mask }
    }
}

/// A square cell or a donut (cell minus a strictly smaller nested cell).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub outer: QCell,
    pub hole: Option<QCell>,
}

impl Region {
    #[inline]
    pub fn contains(&self, x: u32, y: u32) -> bool {
        self.outer.contains(x, y) && !self.hole.is_some_and(|h| h.contains(x, y))
    }

    /// Disjoint key intervals covered by the region (one or two).
    fn key_intervals(&self) -> [(u64, u128); 2] {
        let (s, e) = self.outer.key_range();
        match self.hole {
            None => [(s, e), (0, 0)],
            Some(h) => {
                let (hs, he) = h.key_range();
                [(s, hs as u128), (if he >= (1u128 << 64) { u64::MAX } else { he as u64 }, e)]
            }
        }
    }

    /// A lattice point inside the region.
    pub fn sample(&self) -> (u32, u32) {
        match self.hole {
            None => (self.outer.x, self.outer.y),
            Some(h) => {
                let q = self.outer.quadrant_of(h.x, h.y);
                let c = self.outer.child((q + 1) % 4);
                (c.x, c.y)
            }
        }
    }
}

/// Mapping between real coordinates and the lattice of a root grid cell.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub root: GridCell,
    pub origin: Point,
    pub unit: f64,
    inv_unit: f64,
}

impl Frame {
    pub fn new(root: GridCell, fam: &GridFamily) -> Self {
        let origin = fam.cell_min(&root);
        let unit = pow2(root.level - LATTICE_BITS as i32);
        Self { root, origin, unit, inv_unit: pow2(LATTICE_BITS as i32 - root.level) }
    }

    #[inline]
    pub fn to_lattice(&self, p: Point) -> (u32, u32) {
        let fx = ((p.x - self.origin.x) * self.inv_unit).floor().clamp(0.0, LATTICE_MAX);
        let fy = ((p.y - self.origin.y) * self.inv_unit).floor().clamp(0.0, LATTICE_MAX);
        (fx as u32, fy as u32)
    }

    pub fn in_root(&self, p: Point) -> bool {
        let fx = (p.x - self.origin.x) * self.inv_unit;
        let fy = (p.y - self.origin.y) * self.inv_unit;
        (0.0..=LATTICE_MAX).contains(&fx.floor()) && (0.0..=LATTICE_MAX).contains(&fy.floor())
    }

    pub fn cell_rect(&self, c: &QCell) -> Bbox {
        let s = c.side() as f64 * self.unit;
        let min = Point::new(self.origin.x + c.x as f64 * self.unit, self.origin.y + c.y as f64 * self.unit);
        Bbox { min, max: Point::new(min.x + s, min.y + s) }
    }

    pub fn cell_side(&self, c: &QCell) -> f64 {
        c.side() as f64 * self.unit
    }

    pub fn to_grid_cell(&self, c: &QCell) -> GridCell {
        let d = c.depth as u32;
        let sh = LATTICE_BITS - d;
        GridCell {
            grid: self.root.grid,
            level: self.root.level - d as i32,
            i: (self.root.i << d) + ((c.x as u64) >> sh) as i64,
            j: (self.root.j << d) + ((c.y as u64) >> sh) as i64,
        }
    }
}

/// Sorts `points` (all inside `root`) in Z-order and returns the permutation.
pub fn zorder_sort(points: &[Point], root: &GridCell, fam: &GridFamily) -> Result<Vec<usize>> {
    let frame = Frame::new(*root, fam);
    let cell = fam.cell_bounds(root);
    let mut keyed = Vec::with_capacity(points.len());
    for (i, &p) in points.iter().enumerate() {
        if !(p.x >= cell.min.x && p.x < cell.max.x && p.y >= cell.min.y && p.y < cell.max.y) {
            return Err(Error::InvalidInput(format!("point {i} ({}, {}) lies outside the root cell", p.x, p.y)));
        }
        let (x, y) = frame.to_lattice(p);
        keyed.push((zkey(x, y), i));
    }
    keyed.sort_unstable();
    Ok(keyed.into_iter().map(|(_, i)| i).collect())
}

#[derive(Debug, Clone, Copy)]
struct LPoint {
    key: u64,
    x: u32,
    y: u32,
}

/// Leaf regions of the compressed quadtree of `pts` (Z-sorted, distinct)
/// with root cell `QCell::ROOT`. Each region carries the index of the point
/// it holds, if any.
fn subdivision(pts: &[LPoint], idx: &[u32]) -> Vec<(Region, Option<u32>)> {
    let mut out = Vec::with_capacity(3 * pts.len() + 1);
    let mut stack = vec![(0usize, pts.len(), QCell::ROOT)];
    while let Some((lo, hi, cell)) = stack.pop() {
        match hi - lo {
            0 => out.push((Region { outer: cell, hole: None }, None)),
            1 => out.push((Region { outer: cell, hole: None }, Some(idx[lo]))),
            _ => {
                let a = pts[lo];
                let b = pts[hi - 1];
                let lca = QCell::common((a.x, a.y), (b.x, b.y));
                if lca != cell {
                    out.push((Region { outer: cell, hole: Some(lca) }, None));
                }
                let mut start = lo;
                let mut parts = [(0, 0); 4];
                for (q, part) in parts.iter_mut().enumerate() {
                    let end = start + pts[start..hi].partition_point(|p| lca.quadrant_of(p.x, p.y) <= q);
                    *part = (start, end);
                    start = end;
                }
                for q in (0..4).rev() {
                    stack.push((parts[q].0, parts[q].1, lca.child(q)));
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct SkipNode {
    /// Subdivision index `i` of `Q_i`; the root has level `t`.
    pub level: u32,
    pub region: Region,
    pub parent: Option<u32>,
    /// Index into [`SkipQuadtree::points`] of the point held by a level-0 leaf.
    pub point: Option<u32>,
}

#[derive(Debug, Clone)]
pub struct SkipQuadtree {
    pub frame: Frame,
    /// Distinct reference points in Z-order, as lattice coordinates.
    pub points: Vec<(u32, u32)>,
    pub nodes: Vec<SkipNode>,
    /// Node ids per subdivision level, `levels[i]` for `Q_i`.
    pub levels: Vec<Vec<u32>>,
    /// Nodes are numbered breadth-first; the children of `u` are
    /// `child_start[u]..child_start[u + 1]`.
    child_start: Vec<u32>,
}

impl SkipQuadtree {
    /// Builds the skip quadtree of `points` inside the cell `root`.
    /// Points mapping to the same lattice position are merged.
    pub fn build(points: &[Point], root: GridCell, fam: &GridFamily) -> Self {
        let frame = Frame::new(root, fam);
        let mut lp: Vec<LPoint> = points
            .iter()
            .map(|&p| {
                let (x, y) = frame.to_lattice(p);
                LPoint { key: zkey(x, y), x, y }
            })
            .collect();
        lp.sort_unstable_by_key(|p| p.key);
        lp.dedup_by_key(|p| p.key);
        Self::from_lattice(frame, lp)
    }

    fn from_lattice(frame: Frame, lp: Vec<LPoint>) -> Self {
        let points: Vec<(u32, u32)> = lp.iter().map(|p| (p.x, p.y)).collect();
        if lp.is_empty() {
            let node = SkipNode { level: 0, region: Region { outer: QCell::ROOT, hole: None }, parent: None, point: None };
            return Self { frame, points, nodes: vec![node], levels: vec![vec![0]], child_start: vec![1, 1] };
        }

        // P_0 ⊃ P_1 ⊃ ... ⊃ P_t
        let mut sets: Vec<(Vec<LPoint>, Vec<u32>)> = vec![(lp.clone(), (0..lp.len() as u32).collect())];
        while sets.last().unwrap().0.len() > 1 {
            let (prev, prev_idx) = sets.last().unwrap();
            let next: Vec<LPoint> = prev.iter().skip(1).step_by(2).copied().collect();
            let next_idx: Vec<u32> = prev_idx.iter().skip(1).step_by(2).copied().collect();
            sets.push((next, next_idx));
        }
        let t = sets.len() - 1;

        let mut nodes: Vec<SkipNode> = Vec::new();
        let mut levels: Vec<Vec<u32>> = vec![Vec::new(); t + 1];
        // sorted (interval start, interval end, node) of the level above
        let mut above: Vec<(u64, u128, u32)> = Vec::new();
        for i in (0..=t).rev() {
            let (set, idx) = &sets[i];
            let regions = subdivision(set, idx);
            let mut here: Vec<(u64, u128, u32)> = Vec::with_capacity(regions.len() + 8);
            for (region, pt) in regions {
                let id = nodes.len() as u32;
                let parent = if i == t {
                    None
                } else {
                    let (sx, sy) = region.sample();
                    let k = zkey(sx, sy);
                    let pos = above.partition_point(|iv| iv.0 <= k);
                    debug_assert!(pos > 0 && (k as u128) < above[pos - 1].1);
                    Some(above[pos - 1].2)
                };
                for (s, e) in region.key_intervals() {
                    if (s as u128) < e {
                        here.push((s, e, id));
                    }
                }
                nodes.push(SkipNode { level: i as u32, region, parent, point: if i == 0 { pt } else { None } });
                levels[i].push(id);
            }
            here.sort_unstable_by_key(|iv| iv.0);
            above = here;
        }

        // renumber breadth-first so that siblings are contiguous
        let n = nodes.len();
        let mut cstart = vec![0u32; n + 1];
        for nd in &nodes {
            if let Some(p) = nd.parent {
                cstart[p as usize + 1] += 1;
            }
        }
        for k in 0..n {
            cstart[k + 1] += cstart[k];
        }
        let mut fill = cstart.clone();
        let mut cids = vec![0u32; cstart[n] as usize];
        for (id, nd) in nodes.iter().enumerate() {
            if let Some(p) = nd.parent {
                cids[fill[p as usize] as usize] = id as u32;
                fill[p as usize] += 1;
            }
        }
        let mut order = Vec::with_capacity(n);
        order.push(levels[t][0]);
        let mut head = 0;
        while head < order.len() {
            let u = order[head] as usize;
            head += 1;
            order.extend_from_slice(&cids[cstart[u] as usize..cstart[u + 1] as usize]);
        }
        debug_assert_eq!(order.len(), n);
        let mut new_id = vec![0u32; n];
        for (k, &old) in order.iter().enumerate() {
            new_id[old as usize] = k as u32;
        }
        let mut child_start = vec![0u32; n + 1];
        let mut next = 1u32;
        let renumbered: Vec<SkipNode> = order
            .iter()
            .enumerate()
            .map(|(k, &old)| {
                let o = old as usize;
                child_start[k] = next;
                next += cstart[o + 1] - cstart[o];
                let mut nd = nodes[o].clone();
                nd.parent = nd.parent.map(|p| new_id[p as usize]);
                nd
            })
            .collect();
        child_start[n] = next;
        for lv in levels.iter_mut() {
            for id in lv.iter_mut() {
                *id = new_id[*id as usize];
            }
            lv.sort_unstable();
        }
        Self { frame, points, nodes: renumbered, levels, child_start }
    }

    #[inline]
    pub fn root(&self) -> u32 {
        self.levels.last().unwrap()[0]
    }

    /// Number of subdivision levels minus one (`t`).
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    #[inline]
    pub fn children(&self, node: u32) -> std::ops::Range<u32> {
        self.child_start[node as usize]..self.child_start[node as usize + 1]
    }

    #[inline]
    pub fn is_leaf(&self, node: u32) -> bool {
        self.nodes[node as usize].level == 0
    }

    pub fn region_rects(&self, node: u32) -> (Bbox, Option<Bbox>) {
        let r = &self.nodes[node as usize].region;
        (self.frame.cell_rect(&r.outer), r.hole.map(|h| self.frame.cell_rect(&h)))
    }

    /// Calls `f` on each root-to-leaf node whose region contains the lattice point.
    pub fn for_each_path_node(&self, x: u32, y: u32, mut f: impl FnMut(u32)) {
        let mut cur = self.root();
        f(cur);
        while !self.is_leaf(cur) {
            match self.children(cur).find(|&c| self.nodes[c as usize].region.contains(x, y)) {
                Some(c) => {
                    cur = c;
                    f(c);
                }
                None => break,
            }
        }
    }

    /// Root-to-leaf nodes whose regions contain the lattice point.
    pub fn path_lattice(&self, x: u32, y: u32) -> Vec<u32> {
        let mut path = Vec::with_capacity(self.levels.len());
        self.for_each_path_node(x, y, |u| path.push(u));
        path
    }

    /// One node per level `Q_t .. Q_0` whose region contains `q`.
    pub fn search_path(&self, q: Point) -> Vec<u32> {
        let (x, y) = self.frame.to_lattice(q);
        self.path_lattice(x, y)
    }

    /// True when `obj` meets the boundary of the node's region (outer square
    /// or hole), with an absolute slack of `1e-9` root sides.
    pub fn meets_boundary(&self, node: u32, obj: &GeomObject) -> bool {
        let eps = 1e-9 * self.frame.cell_side(&QCell::ROOT);
        let (outer, hole) = self.region_rects(node);
        meets_rect_boundary(obj, &outer, eps) || hole.is_some_and(|h| meets_rect_boundary(obj, &h, eps))
    }

    /// Descends along the path of `ref_point` and returns the first node whose
    /// boundary `obj` meets, or the leaf.
    pub fn assign(&self, obj: &GeomObject, ref_point: Point) -> u32 {
        let (x, y) = self.frame.to_lattice(ref_point);
        let mut cur = self.root();
        loop {
            if self.meets_boundary(cur, obj) || self.is_leaf(cur) {
                return cur;
            }
            match self.children(cur).find(|&c| self.nodes[c as usize].region.contains(x, y)) {
                Some(c) => cur = c,
                None => return cur,
            }
        }
    }

    pub fn max_children(&self) -> usize {
        (0..self.nodes.len() as u32).map(|n| self.children(n).len()).max().unwrap_or(0)
    }

    /// Checks refinement (each region lies in its parent's region), at most
    /// one point per leaf region, depth `t ≤ ⌈log2 n⌉` and one search path
    /// node per level.
    pub fn check_structure(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Invariant(m));
        let n = self.points.len().max(1);
        if self.depth() > (n as f64).log2().ceil() as usize {
            return fail(format!("depth {} exceeds ceil(log2 {n})", self.depth()));
        }
        for (id, node) in self.nodes.iter().enumerate() {
            let Some(par) = node.parent else { continue };
            let pr = &self.nodes[par as usize].region;
            let o = node.region.outer;
            let s = (o.side() - 1) as u32;
            for (cx, cy) in [(o.x, o.y), (o.x + s, o.y), (o.x, o.y + s), (o.x + s, o.y + s)] {
                if !pr.outer.contains(cx, cy) {
                    return fail(format!("node {id} leaves its parent square"));
                }
            }
            if let Some(h) = pr.hole {
                if h.contains_cell(&o) {
                    return fail(format!("node {id} lies in its parent's hole"));
                }
                if o.contains_cell(&h) && !node.region.hole.is_some_and(|ch| ch.contains_cell(&h)) {
                    return fail(format!("node {id} covers its parent's hole"));
                }
            }
        }
        for &leaf in &self.levels[0] {
            let r = self.nodes[leaf as usize].region;
            if self.points.iter().filter(|&&(x, y)| r.contains(x, y)).count() > 1 {
                return fail(format!("leaf {leaf} holds more than one point"));
            }
        }
        for &(x, y) in &self.points {
            if self.path_lattice(x, y).len() != self.depth() + 1 {
                return fail(format!("search path of ({x}, {y}) misses a level"));
            }
        }
        Ok(())
    }

    /// Checks that `node` is on the search path of `ref_point`, that `obj`
    /// meets its boundary unless it is the last path node, and that no
    /// earlier path node has its boundary met.
    pub fn check_assignment(&self, obj: &GeomObject, ref_point: Point, node: u32) -> Result<()> {
        let path = self.search_path(ref_point);
        let Some(k) = path.iter().position(|&u| u == node) else {
            return Err(Error::Invariant(format!("node {node} is not on the search path")));
        };
        if k + 1 < path.len() && !self.meets_boundary(node, obj) {
            return Err(Error::Invariant(format!("object misses the boundary of node {node}")));
        }
        if let Some(&u) = path[..k].iter().find(|&&u| self.meets_boundary(u, obj)) {
            return Err(Error::Invariant(format!("earlier path node {u} already meets the object")));
        }
        Ok(())
    }
}

/// Closed object meets the boundary of the closed rectangle (within `eps`).
pub fn meets_rect_boundary(obj: &GeomObject, r: &Bbox, eps: f64) -> bool {
    match obj {
        GeomObject::Disk(d) => {
            let c = d.center;
            let reach = d.radius + eps;
            if r.contains(c) {
                (c.x - r.min.x).min(r.max.x - c.x).min(c.y - r.min.y).min(r.max.y - c.y) <= reach
            } else {
                r.dist2_to(c) <= reach * reach
            }
        }
        GeomObject::Triangle(t) => {
            let b = t.bbox();
            if b.min.x > r.min.x + eps && b.max.x < r.max.x - eps && b.min.y > r.min.y + eps && b.max.y < r.max.y - eps {
                return false;
            }
            if b.min.x > r.max.x + eps || b.max.x < r.min.x - eps || b.min.y > r.max.y + eps || b.max.y < r.min.y - eps {
                return false;
            }
            let c = r.corners();
            (0..4).any(|k| obj.dist_to_segment(c[k], c[(k + 1) % 4]) <= eps)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Disk;
    use crate::grids::make_family;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_root() -> GridCell {
        GridCell { grid: 0, level: 0, i: 0, j: 0 }
    }

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    #[test]
    fn zorder_quadrants() {
        let f = make_family();
        let p = pts(&[(0.25, 0.75), (0.75, 0.75), (0.25, 0.25), (0.75, 0.25)]);
        assert_eq!(zorder_sort(&p, &unit_root(), &f).unwrap(), vec![0, 1, 2, 3]);
        let p = pts(&[(0.75, 0.25), (0.25, 0.25), (0.75, 0.75), (0.25, 0.75)]);
        assert_eq!(zorder_sort(&p, &unit_root(), &f).unwrap(), vec![3, 2, 1, 0]);
        assert_eq!(zorder_sort(&pts(&[(0.3, 0.3)]), &unit_root(), &f).unwrap(), vec![0]);
        // both NW; separated three levels down where (0.2, 0.8) falls in SE
        let p = pts(&[(0.2, 0.8), (0.1, 0.9)]);
        assert_eq!(zorder_sort(&p, &unit_root(), &f).unwrap(), vec![1, 0]);
        assert!(zorder_sort(&pts(&[(1.5, 0.5)]), &unit_root(), &f).is_err());
    }

    #[test]
    fn common_cell() {
        let c = QCell::common((0, 0), (1, 0));
        assert_eq!(c.depth, 31);
        let c = QCell::common((0, 0), (1 << 31, 0));
        assert_eq!(c, QCell::ROOT);
        let c = QCell::common((5 << 20, 7 << 20), (5 << 20, (7 << 20) + 1));
        assert!(c.contains(5 << 20, 7 << 20) && c.contains(5 << 20, (7 << 20) + 1));
        assert_eq!(c.depth, 31);
    }

    #[test]
    fn key_ranges_nest() {
        let c = QCell::ROOT.child(2).child(1);
        let (s, e) = c.key_range();
        let (ps, pe) = QCell::ROOT.child(2).key_range();
        assert!(ps <= s && e <= pe);
        let k = zkey(c.x + 5, c.y + 7);
        assert!(s <= k && (k as u128) < e);
    }

    #[test]
    fn five_point_example() {
        let f = make_family();
        let p = pts(&[(0.1, 0.9), (0.6, 0.8), (0.3, 0.3), (0.35, 0.2), (0.9, 0.1)]);
        let order = zorder_sort(&p, &unit_root(), &f).unwrap();
        assert_eq!(order, vec![0, 1, 2, 3, 4]);
        let t = SkipQuadtree::build(&p, unit_root(), &f);
        assert_eq!(t.depth(), 2);
        // P_2 = {p4}: the root region holds nothing but σ0
        assert_eq!(t.levels[2].len(), 1);
        for q in &p {
            assert_eq!(t.search_path(*q).len(), 3);
        }
        let leaves_with_points = t.levels[0].iter().filter(|&&n| t.nodes[n as usize].point.is_some()).count();
        assert_eq!(leaves_with_points, 5);
    }

    #[test]
    fn single_point_tree() {
        let f = make_family();
        let t = SkipQuadtree::build(&pts(&[(0.4, 0.4)]), unit_root(), &f);
        assert_eq!(t.depth(), 0);
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.search_path(Point::new(0.9, 0.1)), vec![t.root()]);
    }

    #[test]
    fn donut_hole_routing() {
        let f = make_family();
        // two close points force a compressed chain: the root's NE quadrant
        // becomes a donut around the tiny cell holding both points
        let p = pts(&[(0.70001, 0.70001), (0.70002, 0.70003), (0.2, 0.2)]);
        let t = SkipQuadtree::build(&p, unit_root(), &f);
        let donut = t.levels[0]
            .iter()
            .copied()
            .find(|&n| t.nodes[n as usize].region.hole.is_some())
            .expect("a donut region");
        let hole = t.nodes[donut as usize].region.hole.unwrap();
        let hole_rect = t.frame.cell_rect(&hole);
        let inside_hole = Point::new((hole_rect.min.x + hole_rect.max.x) / 2.0, (hole_rect.min.y + hole_rect.max.y) / 2.0);
        let path = t.search_path(inside_hole);
        assert!(!path.contains(&donut));
        let leaf = *path.last().unwrap();
        let (lx, ly) = t.frame.to_lattice(inside_hole);
        assert!(t.nodes[leaf as usize].region.contains(lx, ly));
        // a disk straddling only the hole boundary is assigned to the donut
        let outer_rect = t.frame.cell_rect(&t.nodes[donut as usize].region.outer);
        let r = (hole_rect.max.x - hole_rect.min.x) * 0.2;
        let c = Point::new(hole_rect.max.x + r * 0.5, (hole_rect.min.y + hole_rect.max.y) / 2.0);
        assert!(outer_rect.contains(c));
        let d = GeomObject::Disk(Disk::new(c, r).unwrap());
        let node = t.assign(&d, c);
        assert_eq!(node, donut);
    }

    fn random_tree(seed: u64, n: usize) -> (Vec<Point>, SkipQuadtree) {
        let f = make_family();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p: Vec<Point> = (0..n).map(|_| Point::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0))).collect();
        let t = SkipQuadtree::build(&p, unit_root(), &f);
        (p, t)
    }

    #[test]
    fn structural_properties() {
        for seed in 0..10 {
            let n = 1 + seed as usize * 137;
            let (p, t) = random_tree(seed, n);
            t.check_structure().unwrap();
            assert!(t.max_children() <= 16);
            for q in &p {
                assert_eq!(t.search_path(*q).len(), t.depth() + 1);
            }
        }
    }

    #[test]
    fn assignment_is_sound() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (_, t) = random_tree(9, 300);
        for _ in 0..300 {
            let c = Point::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
            let obj = GeomObject::Disk(Disk::new(c, rng.gen_range(0.001..0.05)).unwrap());
            let node = t.assign(&obj, c);
            t.check_assignment(&obj, c, node).unwrap();
        }
    }
}

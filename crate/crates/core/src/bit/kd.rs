//! Kd-tree over red items with per-node extent, center box, maximum radius
//! and minimum id.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::geom::{Bbox, Point};

const LEAF: usize = 8;

#[derive(Debug, Clone, Copy)]
pub struct KdItem {
    pub id: u32,
    pub center: Point,
    /// Extent of the object.
    pub bbox: Bbox,
    /// Additive weight; the radius for disks, 0 for points.
    pub radius: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct KdNode {
    /// Union of the item extents.
    pub ext: Bbox,
    /// Bounding box of the item centers.
    pub cbox: Bbox,
    pub max_r: f64,
    pub min_id: u32,
    lo: u32,
    hi: u32,
    /// Right child; the left child is the next node. `u32::MAX` at leaves.
    right: u32,
}

impl KdNode {
    #[inline]
    pub fn is_leaf(&self) -> bool {
        self.right == u32::MAX
    }
}

#[derive(Debug, Clone, Default)]
pub struct KdTree {
    items: Vec<KdItem>,
    nodes: Vec<KdNode>,
}

/// Reusable search state.
#[derive(Debug, Default)]
pub struct KdScratch {
    by_id: BinaryHeap<Reverse<(u32, u32)>>,
    by_bound: BinaryHeap<Reverse<(Bound, u32)>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Bound(f64);

impl Eq for Bound {}

impl PartialOrd for Bound {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Bound {
    fn cmp(&self, o: &Self) -> Ordering {
        self.0.total_cmp(&o.0)
    }
}

impl KdTree {
    pub fn build(mut items: Vec<KdItem>) -> Self {
        let mut nodes = Vec::with_capacity(2 * items.len() / LEAF + 1);
        if !items.is_empty() {
            let n = items.len();
            build_node(&mut items, &mut nodes, 0, n);
        }
        Self { items, nodes }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Lowest item id with `hit(item)`, visiting nodes in order of their
    /// minimum id and skipping nodes rejected by `may_hit`.
    pub fn lowest(
        &self,
        scratch: &mut KdScratch,
        may_hit: impl Fn(&KdNode) -> bool,
        mut hit: impl FnMut(&KdItem) -> bool,
    ) -> Option<u32> {
        self.lowest_below(scratch, u32::MAX, may_hit, &mut hit)
    }

    /// As [`KdTree::lowest`], restricted to ids below `bound`.
    pub fn lowest_below(
        &self,
        scratch: &mut KdScratch,
        bound: u32,
        may_hit: impl Fn(&KdNode) -> bool,
        mut hit: impl FnMut(&KdItem) -> bool,
    ) -> Option<u32> {
        if self.nodes.is_empty() {
            return None;
        }
        let heap = &mut scratch.by_id;
        heap.clear();
        let mut best = bound;
        heap.push(Reverse((self.nodes[0].min_id, 0)));
        while let Some(Reverse((min_id, k))) = heap.pop() {
            if min_id >= best {
                break;
            }
            let node = &self.nodes[k as usize];
            if !may_hit(node) {
                continue;
            }
            if node.is_leaf() {
                // leaf items are sorted by id
                for it in &self.items[node.lo as usize..node.hi as usize] {
                    if it.id >= best {
                        break;
                    }
                    if hit(it) {
                        best = it.id;
                        break;
                    }
                }
            } else {
                let l = k + 1;
                let r = node.right;
                heap.push(Reverse((self.nodes[l as usize].min_id, l)));
                heap.push(Reverse((self.nodes[r as usize].min_id, r)));
            }
        }
        (best < bound).then_some(best)
    }

    /// Item minimising `|q - center| - radius`, lowest id on ties, with the
    /// attained value and the number of nodes expanded.
    pub fn nearest_weighted(&self, scratch: &mut KdScratch, q: Point) -> Option<(u32, f64, usize)> {
        if self.nodes.is_empty() {
            return None;
        }
        let heap = &mut scratch.by_bound;
        heap.clear();
        let lb = |n: &KdNode| n.cbox.dist2_to(q).sqrt() - n.max_r;
        heap.push(Reverse((Bound(lb(&self.nodes[0])), 0)));
        let mut best: Option<(u32, f64)> = None;
        let mut expanded = 0;
        while let Some(Reverse((Bound(b), k))) = heap.pop() {
            if best.is_some_and(|(_, v)| b > v) {
                break;
            }
            expanded += 1;
            let node = &self.nodes[k as usize];
            if node.is_leaf() {
                for it in &self.items[node.lo as usize..node.hi as usize] {
                    let v = q.dist(it.center) - it.radius;
                    if best.is_none_or(|(bid, bv)| v < bv || (v == bv && it.id < bid)) {
                        best = Some((it.id, v));
                    }
                }
            } else {
                for c in [k + 1, node.right] {
                    let cb = lb(&self.nodes[c as usize]);
                    if best.is_none_or(|(_, v)| cb <= v) {
                        heap.push(Reverse((Bound(cb), c)));
                    }
                }
            }
        }
        best.map(|(id, v)| (id, v, expanded))
    }
}

fn build_node(items: &mut [KdItem], nodes: &mut Vec<KdNode>, lo: usize, hi: usize) -> u32 {
    let id = nodes.len() as u32;
    let mut ext = Bbox::empty();
    let mut cbox = Bbox::empty();
    let mut max_r = 0.0f64;
    let mut min_id = u32::MAX;
    for it in &items[lo..hi] {
        ext.union(&it.bbox);
        cbox.add(it.center);
        max_r = max_r.max(it.radius);
        min_id = min_id.min(it.id);
    }
    nodes.push(KdNode { ext, cbox, max_r, min_id, lo: lo as u32, hi: hi as u32, right: u32::MAX });
    if hi - lo <= LEAF {
        items[lo..hi].sort_unstable_by_key(|it| it.id);
        return id;
    }
    let mid = (lo + hi) / 2;
    let slice = &mut items[lo..hi];
    if cbox.width() >= cbox.height() {
        slice.select_nth_unstable_by(mid - lo, |a, b| a.center.x.total_cmp(&b.center.x));
    } else {
        slice.select_nth_unstable_by(mid - lo, |a, b| a.center.y.total_cmp(&b.center.y));
    }
    build_node(items, nodes, lo, mid);
    let right = build_node(items, nodes, mid, hi);
    nodes[id as usize].right = right;
    id
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn items(rng: &mut ChaCha8Rng, n: usize) -> Vec<KdItem> {
        (0..n)
            .map(|i| {
                let c = Point::new(rng.gen(), rng.gen());
                let r: f64 = rng.gen_range(0.001..0.05);
                KdItem {
                    id: (i * 7 % n) as u32,
                    center: c,
                    bbox: Bbox { min: Point::new(c.x - r, c.y - r), max: Point::new(c.x + r, c.y + r) },
                    radius: r,
                }
            })
            .collect()
    }

    #[test]
    fn lowest_matches_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let its = items(&mut rng, 700);
        let t = KdTree::build(its.clone());
        let mut s = KdScratch::default();
        for _ in 0..300 {
            let q = Point::new(rng.gen(), rng.gen());
            let expect = its.iter().filter(|it| it.bbox.contains(q)).map(|it| it.id).min();
            let got = t.lowest(&mut s, |n| n.ext.contains(q), |it| it.bbox.contains(q));
            assert_eq!(got, expect);
            let got = t.lowest_below(&mut s, 100, |n| n.ext.contains(q), |it| it.bbox.contains(q));
            assert_eq!(got, expect.filter(|&i| i < 100));
        }
    }

    #[test]
    fn nearest_weighted_matches_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [1, 2, 9, 100, 1000] {
            let its = items(&mut rng, n);
            let t = KdTree::build(its.clone());
            let mut s = KdScratch::default();
            for _ in 0..100 {
                let q = Point::new(rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5));
                let best = its.iter().map(|it| q.dist(it.center) - it.radius).fold(f64::INFINITY, f64::min);
                let (id, v, _) = t.nearest_weighted(&mut s, q).unwrap();
                assert!((v - best).abs() <= 1e-12);
                let it = its.iter().find(|it| it.id == id).unwrap();
                assert_eq!(q.dist(it.center) - it.radius, v);
            }
        }
    }
}

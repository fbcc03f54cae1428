//! Stabbing queries on red objects: the lowest red id containing a point.
//!
//! Red objects are grouped into stabbed cliques on per-grid skip quadtrees.
//! A clique whose union contains `q` sits at the root or at a child of a
//! node on the search path of `q`, and each clique answers by binary search
//! on the angular envelopes of a [`FlowerTree`].

use crate::contraction::{build_cliques, GridTree};
use crate::flower::FlowerTree;
use crate::geom::{GeomObject, Point};
use crate::grids::GridFamily;

#[derive(Debug, Clone)]
pub struct StabbingIndex {
    /// Red objects in increasing id order.
    objs: Vec<GeomObject>,
    ids: Vec<u32>,
    trees: Vec<GridTree>,
    flowers: Vec<FlowerTree>,
}

impl StabbingIndex {
    /// `reds` are `(id, object)` pairs with increasing ids.
    pub fn build(reds: &[(u32, GeomObject)], fam: &GridFamily, alpha: f64) -> Self {
        debug_assert!(reds.windows(2).all(|w| w[0].0 < w[1].0));
        let objs: Vec<GeomObject> = reds.iter().map(|r| r.1).collect();
        let ids: Vec<u32> = reds.iter().map(|r| r.0).collect();
        if objs.is_empty() {
            return Self { objs, ids, trees: Vec::new(), flowers: Vec::new() };
        }
        let (trees, cliques, _) = build_cliques(&objs, fam, alpha);
        let flowers = cliques.iter().map(|c| FlowerTree::build(&objs, &c.members, c.stab)).collect();
        Self { objs, ids, trees, flowers }
    }

    /// Lowest red id containing `q`.
    pub fn query(&self, q: Point) -> Option<u32> {
        self.query_below(q, u32::MAX)
    }

    /// Lowest red id below `bound` containing `q`.
    pub fn query_below(&self, q: Point, bound: u32) -> Option<u32> {
        // local indices are ordered like ids
        let lb = self.ids.partition_point(|&id| id < bound) as u32;
        let mut best = lb;
        for t in &self.trees {
            t.for_each_candidate_node(q, |node| {
                for &c in t.cliques_at(node) {
                    if let Some(m) = self.flowers[c as usize].lowest_containing_below(&self.objs, q, best) {
                        best = m;
                    }
                }
            });
        }
        (best < lb).then(|| self.ids[best as usize])
    }

    pub fn cliques(&self) -> usize {
        self.flowers.len()
    }
}

//! Clique-based contraction of the intersection graph.
//!
//! Objects are split by aligned grid, each grid gets a skip quadtree over the
//! objects' reference points, and every object is assigned to the first node
//! on its reference point's path whose region boundary it meets. The objects
//! at a node are grouped by a stabbing lattice into cliques sharing a point.
//! Two cliques are adjacent when their unions (flowers) intersect, found as
//! boundary crossings plus stab-point containment.

use rustc_hash::FxHashMap;

use crate::flower::{Flower, Piece};
use crate::geom::{Bbox, GeomObject, Point};
use crate::grids::{ceil_log2, find_aligned_grid, pow2, GridCell, GridFamily};
use crate::oracle::ExplicitGraph;
use crate::quadtree::{meets_rect_boundary, zkey, SkipQuadtree};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct StabbedClique {
    /// Member ids in increasing order.
    pub members: Vec<u32>,
    pub stab: Point,
    pub grid: u8,
    pub node: u32,
}

/// One grid's skip quadtree together with the cliques stored at its nodes.
#[derive(Debug, Clone)]
pub struct GridTree {
    pub grid: u8,
    pub tree: SkipQuadtree,
    node_start: Vec<u32>,
    node_cliques: Vec<u32>,
}

impl GridTree {
    pub fn cliques_at(&self, node: u32) -> &[u32] {
        &self.node_cliques[self.node_start[node as usize] as usize..self.node_start[node as usize + 1] as usize]
    }

    /// Nodes that can hold a clique whose union contains `q`: the root and
    /// every child of a node on the search path.
    pub fn for_each_candidate_node(&self, q: Point, mut f: impl FnMut(u32)) {
        if !self.tree.frame.in_root(q) {
            return;
        }
        let t = &self.tree;
        f(t.root());
        let (x, y) = t.frame.to_lattice(q);
        t.for_each_path_node(x, y, |u| {
            for c in t.children(u) {
                f(c);
            }
        });
    }
}

#[derive(Debug, Clone, Default)]
pub struct ContractionStats {
    /// Intersection points between boundary pieces of distinct flowers.
    pub crossings_k: u64,
    /// Boundary crossings per grid, attributed to the grid of the lower clique id.
    pub crossings_per_grid: [u64; 3],
    pub crossing_pairs: usize,
    pub containment_pairs: usize,
    /// Objects that hit no lattice point and became singleton cliques.
    pub lattice_fallbacks: usize,
    /// Objects with no 6-aligned grid.
    pub alignment_fallbacks: usize,
    pub nodes: usize,
    pub boundary_pieces: usize,
}

#[derive(Debug, Clone)]
pub struct Contraction {
    pub cliques: Vec<StabbedClique>,
    /// Object id to clique id.
    pub membership: Vec<u32>,
    pub flowers: Vec<Flower>,
    pub trees: Vec<GridTree>,
    adj_start: Vec<u32>,
    adj: Vec<u32>,
    pub stats: ContractionStats,
}

impl Contraction {
    pub fn neighbors(&self, c: u32) -> &[u32] {
        &self.adj[self.adj_start[c as usize] as usize..self.adj_start[c as usize + 1] as usize]
    }

    pub fn num_edges(&self) -> usize {
        self.adj.len() / 2
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.cliques.len() as u32).flat_map(move |c| self.neighbors(c).iter().filter(move |&&d| c < d).map(move |&d| (c, d)))
    }
}

/// Smallest cell of the grid containing every cell in `cells`.
fn common_root(cells: &[GridCell]) -> GridCell {
    let top = cells.iter().map(|c| c.level).max().unwrap();
    let mut level = top;
    loop {
        let first = cells[0].ancestor(level);
        if cells.iter().all(|c| c.ancestor(level) == first) {
            return first;
        }
        level += 1;
    }
}

/// Lattice of cell centers covering a box.
struct Lattice {
    min: Point,
    h: f64,
    nx: i64,
    ny: i64,
}

impl Lattice {
    fn new(cover: Bbox, diam: f64) -> Self {
        let h = diam / std::f64::consts::SQRT_2;
        let nx = (cover.width() / h).ceil() as i64;
        let ny = (cover.height() / h).ceil() as i64;
        Self { min: cover.min, h, nx, ny }
    }

    #[inline]
    fn center(&self, a: i64, b: i64) -> Point {
        Point::new(self.min.x + (a as f64 + 0.5) * self.h, self.min.y + (b as f64 + 0.5) * self.h)
    }

    /// Row-major indices of all lattice centers strictly inside `obj`.
    fn hits(&self, obj: &GeomObject, out: &mut Vec<u32>) {
        out.clear();
        let bb = obj.bbox();
        let b0 = (((bb.min.y - self.min.y) / self.h - 0.5).floor() as i64).max(0);
        let b1 = (((bb.max.y - self.min.y) / self.h - 0.5).ceil() as i64).min(self.ny - 1);
        for b in b0..=b1 {
            let y = self.min.y + (b as f64 + 0.5) * self.h;
            let Some((xl, xr)) = row_span(obj, y) else { continue };
            let a0 = (((xl - self.min.x) / self.h - 0.5).ceil() as i64).max(0);
            let a1 = (((xr - self.min.x) / self.h - 0.5).floor() as i64).min(self.nx - 1);
            for a in a0..=a1 {
                if obj.contains_strictly(self.center(a, b)) {
                    out.push((b * self.nx + a) as u32);
                }
            }
        }
    }

    fn center_of(&self, idx: u32) -> Point {
        let idx = idx as i64;
        self.center(idx % self.nx, idx / self.nx)
    }
}

/// Scratch buffers for the per-node cover.
#[derive(Default)]
struct CoverScratch {
    counts: Vec<u32>,
    hits: Vec<Vec<u32>>,
    buf: Vec<u32>,
}

/// Greedy stabbing of `members` by lattice centers: repeatedly take the
/// center inside the most unassigned objects (lowest index on ties).
/// Returns the groups and the members containing no center.
fn greedy_cover(objs: &[GeomObject], lat: &Lattice, members: &[u32], sc: &mut CoverScratch) -> (Vec<(Point, Vec<u32>)>, Vec<u32>) {
    let size = (lat.nx * lat.ny) as usize;
    if sc.counts.len() < size {
        sc.counts.resize(size, 0);
    }
    sc.hits.resize_with(members.len().max(sc.hits.len()), Vec::new);
    let mut open = Vec::with_capacity(members.len());
    let mut bare = Vec::new();
    for (i, &m) in members.iter().enumerate() {
        lat.hits(&objs[m as usize], &mut sc.buf);
        std::mem::swap(&mut sc.hits[i], &mut sc.buf);
        if sc.hits[i].is_empty() {
            bare.push(m);
        } else {
            for &c in &sc.hits[i] {
                sc.counts[c as usize] += 1;
            }
            open.push(i);
        }
    }
    let mut groups = Vec::new();
    while !open.is_empty() {
        let mut best = (0u32, u32::MAX);
        if open.len() == 1 {
            best = (1, sc.hits[open[0]][0]);
        } else {
            for &i in &open {
                for &c in &sc.hits[i] {
                    let n = sc.counts[c as usize];
                    if n > best.0 || (n == best.0 && c < best.1) {
                        best = (n, c);
                    }
                }
            }
        }
        let (take, keep): (Vec<usize>, Vec<usize>) = open.iter().partition(|&&i| sc.hits[i].binary_search(&best.1).is_ok());
        for &i in &take {
            for &c in &sc.hits[i] {
                sc.counts[c as usize] -= 1;
            }
        }
        groups.push((lat.center_of(best.1), take.iter().map(|&i| members[i]).collect()));
        open = keep;
    }
    (groups, bare)
}

/// The x-range of `obj` on the horizontal line at height `y`.
fn row_span(obj: &GeomObject, y: f64) -> Option<(f64, f64)> {
    match obj {
        GeomObject::Disk(d) => {
            let dy = y - d.center.y;
            let h2 = d.radius * d.radius - dy * dy;
            if h2 <= 0.0 {
                return None;
            }
            let h = h2.sqrt();
            Some((d.center.x - h, d.center.x + h))
        }
        GeomObject::Triangle(t) => {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for i in 0..3 {
                let (a, b) = t.edge(i);
                if (a.y <= y && y <= b.y) || (b.y <= y && y <= a.y) {
                    let x = if a.y == b.y { a.x.min(b.x) } else { a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x) };
                    let x2 = if a.y == b.y { a.x.max(b.x) } else { x };
                    lo = lo.min(x);
                    hi = hi.max(x2);
                }
            }
            (lo <= hi).then_some((lo, hi))
        }
    }
}

fn expand(b: Bbox, m: f64) -> Bbox {
    Bbox { min: Point::new(b.min.x - m, b.min.y - m), max: Point::new(b.max.x + m, b.max.y + m) }
}

/// Partitions the objects into stabbed cliques. `alpha` is the fatness bound
/// used to size the triangle lattice.
pub fn build_cliques(objs: &[GeomObject], fam: &GridFamily, alpha: f64) -> (Vec<GridTree>, Vec<StabbedClique>, ContractionStats) {
    let mut stats = ContractionStats::default();
    let mut by_grid: [Vec<u32>; 3] = Default::default();
    let mut cells = Vec::with_capacity(objs.len());
    for (i, o) in objs.iter().enumerate() {
        let a = find_aligned_grid(o, fam);
        stats.alignment_fallbacks += a.fallback as usize;
        by_grid[a.grid() as usize].push(i as u32);
        cells.push(a.cell);
    }

    let diam_factor = |o: &GeomObject| match o {
        GeomObject::Disk(_) => 1.0 / 12.0,
        GeomObject::Triangle(_) => alpha.sin() / 24.0,
    };

    let mut cliques: Vec<StabbedClique> = Vec::new();
    let mut trees = Vec::new();
    for g in 0..3u8 {
        let ids = &by_grid[g as usize];
        if ids.is_empty() {
            continue;
        }
        let gcells: Vec<GridCell> = ids.iter().map(|&i| cells[i as usize]).collect();
        let root = common_root(&gcells);
        let refs: Vec<Point> = ids.iter().map(|&i| objs[i as usize].ref_point()).collect();
        let tree = SkipQuadtree::build(&refs, root, fam);
        let eps = 1e-9 * root.side();

        let first_clique = cliques.len();
        let mut new_clique = |members: Vec<u32>, stab: Point, node: u32| {
            cliques.push(StabbedClique { members, stab, grid: g, node });
        };
        // objects meeting the outer or the hole boundary of a node share a lattice
        let mut lattice_of: FxHashMap<(u32, bool), usize> = FxHashMap::default();
        let mut lattice_groups: Vec<(u32, bool, Vec<u32>)> = Vec::new();
        // leaf objects grouped by their exact reference point
        let mut ref_of: FxHashMap<(u32, u64, u64), usize> = FxHashMap::default();
        let mut ref_groups: Vec<(u32, Point, Vec<u32>)> = Vec::new();
        for (k, &id) in ids.iter().enumerate() {
            let obj = &objs[id as usize];
            let rp = refs[k];
            let node = tree.assign(obj, rp);
            let (outer, hole) = tree.region_rects(node);
            let meets_outer = meets_rect_boundary(obj, &outer, eps);
            let meets_hole = !meets_outer && hole.is_some_and(|h| meets_rect_boundary(obj, &h, eps));
            if meets_outer || meets_hole {
                let gi = *lattice_of.entry((node, meets_hole)).or_insert_with(|| {
                    lattice_groups.push((node, meets_hole, Vec::new()));
                    lattice_groups.len() - 1
                });
                lattice_groups[gi].2.push(id);
            } else {
                let gi = *ref_of.entry((node, rp.x.to_bits(), rp.y.to_bits())).or_insert_with(|| {
                    ref_groups.push((node, rp, Vec::new()));
                    ref_groups.len() - 1
                });
                ref_groups[gi].2.push(id);
            }
        }
        for (node, rp, members) in ref_groups {
            new_clique(members, rp, node);
        }
        let mut scratch = CoverScratch::default();
        for (node, on_hole, members) in lattice_groups {
            let (outer, hole) = tree.region_rects(node);
            let sq = if on_hole { hole.unwrap() } else { outer };
            let s = sq.width();
            let lat = Lattice::new(expand(sq, s / 12.0), s * diam_factor(&objs[members[0] as usize]));
            let (groups, bare) = greedy_cover(objs, &lat, &members, &mut scratch);
            for (stab, m) in groups {
                new_clique(m, stab, node);
            }
            stats.lattice_fallbacks += bare.len();
            for m in bare {
                new_clique(vec![m], objs[m as usize].ref_point(), node);
            }
        }

        let nn = tree.nodes.len();
        stats.nodes += nn;
        let mut node_start = vec![0u32; nn + 1];
        for c in &cliques[first_clique..] {
            node_start[c.node as usize + 1] += 1;
        }
        for k in 0..nn {
            node_start[k + 1] += node_start[k];
        }
        let mut fill = node_start.clone();
        let mut node_cliques = vec![0u32; cliques.len() - first_clique];
        for (off, c) in cliques[first_clique..].iter().enumerate() {
            node_cliques[fill[c.node as usize] as usize] = (first_clique + off) as u32;
            fill[c.node as usize] += 1;
        }
        trees.push(GridTree { grid: g, tree, node_start, node_cliques });
    }
    (trees, cliques, stats)
}

pub fn build_flower(objs: &[GeomObject], clique: &StabbedClique) -> Flower {
    Flower::build(objs, &clique.members, clique.stab)
}

struct PieceRec {
    piece: Piece,
    bbox: Bbox,
    clique: u32,
    level: i32,
}

/// Clique pairs whose flower boundaries meet, with the total number of
/// intersection points `k` (per grid of the first piece).
pub fn boundary_crossing_pairs(objs: &[GeomObject], flowers: &[Flower], grid_of: &[u8]) -> (Vec<(u32, u32)>, [u64; 3], usize) {
    let mut recs: Vec<PieceRec> = Vec::new();
    for (c, f) in flowers.iter().enumerate() {
        for (piece, _) in f.pieces(objs) {
            let bbox = piece.bbox();
            let ext = bbox.width().max(bbox.height()).max(1e-300);
            recs.push(PieceRec { piece, bbox, clique: c as u32, level: ceil_log2(ext) });
        }
    }
    let cell_of = |p: Point, level: i32| -> (i64, i64) {
        let inv = pow2(-level);
        ((p.x * inv).floor() as i64, (p.y * inv).floor() as i64)
    };
    // sort pieces by (level, cell) so that each bucket is a contiguous run
    let mut keyed: Vec<((i32, i64, i64), PieceRec)> = recs
        .into_iter()
        .map(|r| {
            let (a, b) = cell_of(r.bbox.min, r.level);
            ((r.level, a, b), r)
        })
        .collect();
    keyed.sort_unstable_by_key(|e| e.0);
    let mut buckets: FxHashMap<(i32, i64, i64), (u32, u32)> = FxHashMap::default();
    let mut s = 0;
    while s < keyed.len() {
        let mut e = s + 1;
        while e < keyed.len() && keyed[e].0 == keyed[s].0 {
            e += 1;
        }
        buckets.insert(keyed[s].0, (s as u32, e as u32));
        s = e;
    }
    let mut levels: Vec<i32> = keyed.iter().map(|k| k.0 .0).collect();
    levels.dedup();
    let recs: Vec<PieceRec> = keyed.into_iter().map(|(_, r)| r).collect();

    let mut k = [0u64; 3];
    let mut pairs = Vec::new();
    for (pi, p) in recs.iter().enumerate() {
        for &lv in levels.iter().filter(|&&l| l >= p.level) {
            let (a0, b0) = cell_of(p.bbox.min, lv);
            let (a1, b1) = cell_of(p.bbox.max, lv);
            for a in a0 - 1..=a1 {
                for b in b0 - 1..=b1 {
                    let Some(&(s, e)) = buckets.get(&(lv, a, b)) else { continue };
                    for (qi, q) in recs[s as usize..e as usize].iter().enumerate() {
                        let qi = s as usize + qi;
                        if q.clique == p.clique || (lv == p.level && qi <= pi) || !p.bbox.overlaps(&q.bbox) {
                            continue;
                        }
                        let n = p.piece.crossings_with(&q.piece);
                        if n > 0 {
                            k[grid_of[p.clique.min(q.clique) as usize] as usize] += n as u64;
                            pairs.push((p.clique.min(q.clique), p.clique.max(q.clique)));
                        }
                    }
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    (pairs, k, recs.len())
}

/// Clique pairs `(F, F')` with the stab point of `F` inside `F'`.
pub fn containment_pairs(objs: &[GeomObject], cliques: &[StabbedClique], flowers: &[Flower], trees: &[GridTree]) -> Vec<(u32, u32)> {
    let mut pairs = Vec::new();
    for c in stab_order(cliques) {
        let c = c as usize;
        let q = cliques[c].stab;
        for t in trees {
            t.for_each_candidate_node(q, |node| {
                for &d in t.cliques_at(node) {
                    if d as usize != c && flowers[d as usize].locate(objs, q).is_some() {
                        let c = c as u32;
                        pairs.push((c.min(d), c.max(d)));
                    }
                }
            });
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

/// Clique indices sorted by the Z-order of their stab points, so that
/// consecutive tree queries touch nearby nodes.
fn stab_order(cliques: &[StabbedClique]) -> Vec<u32> {
    let stabs: Vec<Point> = cliques.iter().map(|c| c.stab).collect();
    let b = Bbox::of_points(&stabs);
    let side = b.width().max(b.height()).max(f64::MIN_POSITIVE);
    let scale = (u32::MAX as f64) / side;
    let mut keyed: Vec<(u64, u32)> = cliques
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let x = ((c.stab.x - b.min.x) * scale) as u32;
            let y = ((c.stab.y - b.min.y) * scale) as u32;
            (zkey(x, y), i as u32)
        })
        .collect();
    keyed.sort_unstable();
    keyed.into_iter().map(|(_, i)| i).collect()
}

/// Builds the contraction: cliques, flowers and deduplicated adjacency.
pub fn build_contraction(objs: &[GeomObject], fam: &GridFamily, alpha: f64) -> Contraction {
    let (trees, cliques, mut stats) = build_cliques(objs, fam, alpha);
    let flowers: Vec<Flower> = cliques.iter().map(|c| build_flower(objs, c)).collect();
    let grid_of: Vec<u8> = cliques.iter().map(|c| c.grid).collect();
    let (cross, k, npieces) = boundary_crossing_pairs(objs, &flowers, &grid_of);
    let contain = containment_pairs(objs, &cliques, &flowers, &trees);
    stats.crossings_per_grid = k;
    stats.crossings_k = k.iter().sum();
    stats.crossing_pairs = cross.len();
    stats.containment_pairs = contain.len();
    stats.boundary_pieces = npieces;

    let mut all = cross;
    all.extend(contain);
    all.sort_unstable();
    all.dedup();
    let nc = cliques.len();
    let mut adj_start = vec![0u32; nc + 1];
    for &(a, b) in &all {
        adj_start[a as usize + 1] += 1;
        adj_start[b as usize + 1] += 1;
    }
    for i in 0..nc {
        adj_start[i + 1] += adj_start[i];
    }
    let mut fill = adj_start.clone();
    let mut adj = vec![0u32; all.len() * 2];
    for &(a, b) in &all {
        adj[fill[a as usize] as usize] = b;
        fill[a as usize] += 1;
        adj[fill[b as usize] as usize] = a;
        fill[b as usize] += 1;
    }
    for c in 0..nc {
        adj[adj_start[c] as usize..adj_start[c + 1] as usize].sort_unstable();
    }

    let mut membership = vec![u32::MAX; objs.len()];
    for (c, cl) in cliques.iter().enumerate() {
        for &m in &cl.members {
            membership[m as usize] = c as u32;
        }
    }
    Contraction { cliques, membership, flowers, trees, adj_start, adj, stats }
}

/// Per-grid and overall ply of the flowers, sampled at every stab point and
/// every boundary piece endpoint.
#[derive(Debug, Clone, Default)]
pub struct PlyReport {
    pub max_ply: usize,
    pub per_grid: [usize; 3],
    pub samples: usize,
}

pub fn flower_ply(objs: &[GeomObject], h: &Contraction) -> PlyReport {
    let mut rep = PlyReport::default();
    let mut sample = |q: Point| {
        let mut per = [0usize; 3];
        for t in &h.trees {
            t.for_each_candidate_node(q, |node| {
                for &d in t.cliques_at(node) {
                    if h.flowers[d as usize].locate(objs, q).is_some() {
                        per[t.grid as usize] += 1;
                    }
                }
            });
        }
        let total: usize = per.iter().sum();
        rep.max_ply = rep.max_ply.max(total);
        for (m, &c) in rep.per_grid.iter_mut().zip(&per) {
            *m = (*m).max(c);
        }
        rep.samples += 1;
    };
    for c in stab_order(&h.cliques) {
        let f = &h.flowers[c as usize];
        sample(f.stab);
        for k in 0..f.len() {
            let th = f.starts[k];
            sample(f.stab + Point::polar(th) * f.radius_at(objs, th));
        }
    }
    rep
}

/// Diagnostic rows `(n, grid_id, nodes, cliques, max_ply, k)` per grid.
pub fn diagnostic_rows(objs: &[GeomObject], h: &Contraction) -> Vec<(usize, u8, usize, usize, usize, u64)> {
    let ply = flower_ply(objs, h);
    h.trees
        .iter()
        .map(|t| {
            let cl = h.cliques.iter().filter(|c| c.grid == t.grid).count();
            (objs.len(), t.grid, t.tree.nodes.len(), cl, ply.per_grid[t.grid as usize], h.stats.crossings_per_grid[t.grid as usize])
        })
        .collect()
}

/// Checks that the cliques partition the objects, that every member contains
/// its clique's stab point and that every edge joins intersecting members.
/// With the explicit graph, also checks that every intersecting pair in
/// different cliques has adjacent cliques.
pub fn check_contraction(objs: &[GeomObject], h: &Contraction, explicit: Option<&ExplicitGraph>) -> Result<()> {
    let fail = |m: String| Err(Error::Invariant(m));
    let mut seen = vec![0u32; objs.len()];
    for (c, cl) in h.cliques.iter().enumerate() {
        if cl.members.is_empty() {
            return fail(format!("clique {c} is empty"));
        }
        for &m in &cl.members {
            seen[m as usize] += 1;
            if h.membership[m as usize] != c as u32 {
                return fail(format!("object {m} listed in clique {c} but mapped elsewhere"));
            }
            if !objs[m as usize].contains(cl.stab) {
                return fail(format!("object {m} misses the stab point of clique {c}"));
            }
        }
    }
    if let Some(v) = seen.iter().position(|&k| k != 1) {
        return fail(format!("object {v} is in {} cliques", seen[v]));
    }
    for (a, b) in h.edges() {
        if a == b || h.neighbors(b).binary_search(&a).is_err() {
            return fail(format!("edge {a}-{b} is a loop or not symmetric"));
        }
        let (ca, cb) = (&h.cliques[a as usize], &h.cliques[b as usize]);
        if !ca.members.iter().any(|&x| cb.members.iter().any(|&y| objs[x as usize].intersects(&objs[y as usize]))) {
            return fail(format!("edge {a}-{b} joins disjoint flowers"));
        }
    }
    if let Some(g) = explicit {
        for (u, adj) in g.adj.iter().enumerate() {
            let cu = h.membership[u];
            for &v in adj {
                let cv = h.membership[v as usize];
                if cu != cv && h.neighbors(cu).binary_search(&cv).is_err() {
                    return fail(format!("objects {u} and {v} meet but cliques {cu} and {cv} are not adjacent"));
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{objects_intersect, Disk, Triangle, DEFAULT_ALPHA};
    use crate::grids::make_family;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn disk(x: f64, y: f64, r: f64) -> GeomObject {
        GeomObject::Disk(Disk::new(Point::new(x, y), r).unwrap())
    }

    fn check_partition_and_stabs(objs: &[GeomObject], h: &Contraction) {
        let mut seen = vec![0; objs.len()];
        for c in &h.cliques {
            for &m in &c.members {
                seen[m as usize] += 1;
                assert!(objs[m as usize].contains(c.stab));
            }
        }
        assert!(seen.iter().all(|&s| s == 1));
    }

    fn flowers_meet(objs: &[GeomObject], a: &StabbedClique, b: &StabbedClique) -> bool {
        a.members.iter().any(|&x| b.members.iter().any(|&y| objects_intersect(&objs[x as usize], &objs[y as usize]).unwrap()))
    }

    fn check_edges(objs: &[GeomObject], h: &Contraction) {
        let edges: BTreeSet<(u32, u32)> = h.edges().collect();
        for &(a, b) in &edges {
            assert!(flowers_meet(objs, &h.cliques[a as usize], &h.cliques[b as usize]), "unsound edge {a}-{b}");
        }
        for i in 0..objs.len() {
            for j in i + 1..objs.len() {
                let (ci, cj) = (h.membership[i], h.membership[j]);
                if ci != cj && objects_intersect(&objs[i], &objs[j]).unwrap() {
                    assert!(edges.contains(&(ci.min(cj), ci.max(cj))), "missing edge for objects {i},{j}");
                }
            }
        }
    }

    #[test]
    fn two_far_disks() {
        let objs = vec![disk(0.2, 0.2, 0.05), disk(0.8, 0.8, 0.05)];
        let h = build_contraction(&objs, &make_family(), DEFAULT_ALPHA);
        assert_eq!(h.cliques.len(), 2);
        assert_eq!(h.num_edges(), 0);
    }

    #[test]
    fn common_point_disks() {
        let objs: Vec<GeomObject> = (0..12)
            .map(|k| {
                let a = k as f64 * 0.5;
                disk(0.5 + 0.1 * a.cos(), 0.5 + 0.1 * a.sin(), 0.2)
            })
            .collect();
        let h = build_contraction(&objs, &make_family(), DEFAULT_ALPHA);
        check_partition_and_stabs(&objs, &h);
        check_edges(&objs, &h);
        let occupied: BTreeSet<(u8, u32)> = h.cliques.iter().map(|c| (c.grid, c.node)).collect();
        assert!(h.cliques.len() <= 400 * occupied.len());
    }

    #[test]
    fn chain_of_three() {
        let objs = vec![disk(0.2, 0.5, 0.1), disk(0.38, 0.5, 0.1), disk(0.56, 0.5, 0.1)];
        let h = build_contraction(&objs, &make_family(), DEFAULT_ALPHA);
        check_partition_and_stabs(&objs, &h);
        check_edges(&objs, &h);
        let m = &h.membership;
        if h.cliques.len() == 3 {
            let e: BTreeSet<(u32, u32)> = h.edges().collect();
            let want: BTreeSet<(u32, u32)> = [(m[0], m[1]), (m[1], m[2])].iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
            assert_eq!(e, want);
        }
    }

    #[test]
    fn figure_topology() {
        // A-B, triangle B-C-D, E isolated
        let objs = vec![
            disk(0.1, 0.5, 0.06),
            disk(0.2, 0.5, 0.06),
            disk(0.3, 0.55, 0.07),
            disk(0.28, 0.44, 0.06),
            disk(0.8, 0.2, 0.05),
        ];
        let h = build_contraction(&objs, &make_family(), DEFAULT_ALPHA);
        check_partition_and_stabs(&objs, &h);
        check_edges(&objs, &h);
        let e = h.membership[4];
        assert_eq!(h.cliques[e as usize].members, vec![4]);
        assert!(h.neighbors(e).is_empty());
    }

    #[test]
    fn nested_disks_found_by_containment() {
        let objs = vec![disk(0.5, 0.5, 0.3), disk(0.52, 0.51, 0.001)];
        let fam = make_family();
        let h = build_contraction(&objs, &fam, DEFAULT_ALPHA);
        assert_ne!(h.membership[0], h.membership[1]);
        let grid_of: Vec<u8> = h.cliques.iter().map(|c| c.grid).collect();
        let (cross, _, _) = boundary_crossing_pairs(&objs, &h.flowers, &grid_of);
        assert!(cross.is_empty());
        let cont = containment_pairs(&objs, &h.cliques, &h.flowers, &h.trees);
        assert_eq!(cont.len(), 1);
        assert_eq!(h.num_edges(), 1);
    }

    fn brute_crossing_pairs(objs: &[GeomObject], h: &Contraction) -> BTreeSet<(u32, u32)> {
        let pieces: Vec<Vec<Piece>> = h.flowers.iter().map(|f| f.pieces(objs).into_iter().map(|p| p.0).collect()).collect();
        let mut out = BTreeSet::new();
        for a in 0..pieces.len() {
            for b in a + 1..pieces.len() {
                if pieces[a].iter().any(|p| pieces[b].iter().any(|q| p.crossings_with(q) > 0)) {
                    out.insert((a as u32, b as u32));
                }
            }
        }
        out
    }

    fn random_disks(seed: u64, n: usize, rmax: f64) -> Vec<GeomObject> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                let r = (rng.gen_range((1e-3f64).ln()..rmax.ln())).exp();
                disk(rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9), r)
            })
            .collect()
    }

    fn random_triangles(seed: u64, n: usize) -> Vec<GeomObject> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        while out.len() < n {
            let c = Point::new(rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9));
            let r = (rng.gen_range((2e-3f64).ln()..(0.08f64).ln())).exp();
            let a0 = rng.gen_range(0.0..std::f64::consts::TAU);
            let v: Vec<Point> = (0..3).map(|k| c + Point::polar(a0 + k as f64 * 2.094 + rng.gen_range(-0.5..0.5)) * r).collect();
            if let Ok(t) = Triangle::new(v[0], v[1], v[2]) {
                if crate::geom::min_angle(&t).unwrap() >= DEFAULT_ALPHA {
                    out.push(GeomObject::Triangle(t));
                }
            }
        }
        out
    }

    #[test]
    fn random_disk_contraction_is_exact() {
        for seed in 0..4 {
            let objs = random_disks(seed, 300, 0.1);
            let h = build_contraction(&objs, &make_family(), DEFAULT_ALPHA);
            check_partition_and_stabs(&objs, &h);
            check_edges(&objs, &h);
            for (c, f) in h.flowers.iter().enumerate() {
                assert!(f.len() <= 6 * h.cliques[c].members.len());
            }
            let grid_of: Vec<u8> = h.cliques.iter().map(|c| c.grid).collect();
            let (cross, _, _) = boundary_crossing_pairs(&objs, &h.flowers, &grid_of);
            let cross: BTreeSet<(u32, u32)> = cross.into_iter().collect();
            assert_eq!(cross, brute_crossing_pairs(&objs, &h));
        }
    }

    #[test]
    fn random_triangle_contraction_is_exact() {
        for seed in 0..3 {
            let objs = random_triangles(seed, 250);
            let h = build_contraction(&objs, &make_family(), DEFAULT_ALPHA);
            check_partition_and_stabs(&objs, &h);
            check_edges(&objs, &h);
            check_contraction(&objs, &h, Some(&crate::oracle::build_explicit(&objs).unwrap())).unwrap();
            for (c, f) in h.flowers.iter().enumerate() {
                assert!(f.len() <= 20 * h.cliques[c].members.len());
            }
        }
    }

    #[test]
    fn checker_flags_broken_contraction() {
        let objs = random_disks(3, 120, 0.1);
        let mut h = build_contraction(&objs, &make_family(), DEFAULT_ALPHA);
        let g = crate::oracle::build_explicit(&objs).unwrap();
        check_contraction(&objs, &h, Some(&g)).unwrap();
        let (a, b) = h.edges().next().unwrap();
        let mut broken = h.clone();
        let keep: Vec<(u32, u32)> = h.edges().filter(|&e| e != (a, b)).flat_map(|(x, y)| [(x, y), (y, x)]).collect();
        broken.adj_start = vec![0; h.cliques.len() + 1];
        for &(x, _) in &keep {
            broken.adj_start[x as usize + 1] += 1;
        }
        for c in 0..h.cliques.len() {
            broken.adj_start[c + 1] += broken.adj_start[c];
        }
        let mut sorted = keep;
        sorted.sort_unstable();
        broken.adj = sorted.into_iter().map(|(_, y)| y).collect();
        let implied = (0..objs.len()).any(|u| {
            g.adj[u].iter().any(|&v| (h.membership[u], h.membership[v as usize]) == (a, b))
        });
        assert_eq!(check_contraction(&objs, &broken, Some(&g)).is_err(), implied);
        broken = h.clone();
        broken.cliques[0].stab = Point::new(-5.0, -5.0);
        assert!(check_contraction(&objs, &broken, None).is_err());
        h.membership[0] = u32::MAX - 1;
        assert!(check_contraction(&objs, &h, None).is_err());
    }

    #[test]
    fn ply_is_reported() {
        let objs = random_disks(11, 400, 0.1);
        let h = build_contraction(&objs, &make_family(), DEFAULT_ALPHA);
        let p = flower_ply(&objs, &h);
        assert!(p.max_ply >= 1);
        assert!(p.samples >= h.flowers.len());
        let rows = diagnostic_rows(&objs, &h);
        assert_eq!(rows.iter().map(|r| r.3).sum::<usize>(), h.cliques.len());
    }
}

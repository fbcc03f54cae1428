//! Intersection queries between canonical chords.
//!
//! For a data line class `D` and a query line class `Q` we use coordinates
//! `(u, v)` with `p = u d_D + v d_Q`. Data chords become horizontal
//! (`v` constant, `u` in an interval) and query chords vertical, so a data
//! chord meets a query chord iff its `v` lies in the query's `v` range and
//! its `u` interval contains the query's `u`. Data chords are sorted by `v`
//! in a segment tree whose nodes store "lowest id covering `u`" as a piecewise
//! constant function. Parallel classes are never queried: two parallel
//! chords only meet when collinear, and then the triangles already meet
//! through a chord endpoint.

use std::cell::OnceCell;

use crate::geom::{CanonicalDirectionSet, Chord, Point};
use crate::{Error, Result};

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
pub struct StoredChord {
    pub from: Point,
    pub to: Point,
    pub id: u32,
    pub class: usize,
}

/// Breakpoint `x` with the value at `x` and the value on the open gap after it.
type Step = (f64, u32, u32);

fn merge(f: &[Step], g: &[Step], out: &mut Vec<Step>) {
    let (mut i, mut j) = (0, 0);
    let (mut fa, mut ga) = (NONE, NONE);
    let mut last = NONE;
    while i < f.len() || j < g.len() {
        let x = match (f.get(i), g.get(j)) {
            (Some(a), Some(b)) => a.0.min(b.0),
            (Some(a), None) => a.0,
            (None, Some(b)) => b.0,
            (None, None) => unreachable!(),
        };
        let (mut f_at, mut g_at) = (fa, ga);
        if i < f.len() && f[i].0 == x {
            f_at = f[i].1;
            fa = f[i].2;
            i += 1;
        }
        if j < g.len() && g[j].0 == x {
            g_at = g[j].1;
            ga = g[j].2;
            j += 1;
        }
        let at = f_at.min(g_at);
        let after = fa.min(ga);
        if at == last && after == last {
            continue;
        }
        out.push((x, at, after));
        last = after;
    }
}

fn eval(f: &[Step], x: f64) -> u32 {
    let k = f.partition_point(|s| s.0 <= x);
    if k == 0 {
        return NONE;
    }
    let s = f[k - 1];
    if s.0 == x {
        s.1
    } else {
        s.2
    }
}

#[derive(Debug, Clone, Copy)]
struct Row {
    v: f64,
    u_lo: f64,
    u_hi: f64,
    id: u32,
}

/// Segment tree in heap layout over the rows; node `k` owns
/// `funcs[start[k]..end[k]]`, the lowest id covering each `u`.
#[derive(Debug)]
struct SegTree {
    start: Vec<u32>,
    end: Vec<u32>,
    node_min: Vec<u32>,
    funcs: Vec<Step>,
    size: usize,
}

impl SegTree {
    fn build(rows: &[Row]) -> Self {
        let n = rows.len();
        let size = n.next_power_of_two();
        // children are appended before their parent
        let mut start = vec![0u32; 2 * size];
        let mut end = vec![0u32; 2 * size];
        let mut funcs: Vec<Step> = Vec::with_capacity(2 * n * (1 + size.trailing_zeros() as usize));
        for k in (size..2 * size).rev() {
            start[k] = funcs.len() as u32;
            if let Some(r) = rows.get(k - size) {
                if r.u_lo == r.u_hi {
                    funcs.push((r.u_lo, r.id, NONE));
                } else {
                    funcs.push((r.u_lo, r.id, r.id));
                    funcs.push((r.u_hi, r.id, NONE));
                }
            }
            end[k] = funcs.len() as u32;
        }
        let mut tmp = Vec::new();
        for k in (1..size).rev() {
            tmp.clear();
            let (a, b) = (2 * k, 2 * k + 1);
            merge(
                &funcs[start[a] as usize..end[a] as usize],
                &funcs[start[b] as usize..end[b] as usize],
                &mut tmp,
            );
            start[k] = funcs.len() as u32;
            funcs.extend_from_slice(&tmp);
            end[k] = funcs.len() as u32;
        }
        let mut node_min = vec![NONE; 2 * size];
        for (k, r) in rows.iter().enumerate() {
            node_min[size + k] = r.id;
        }
        for k in (1..size).rev() {
            node_min[k] = node_min[2 * k].min(node_min[2 * k + 1]);
        }
        Self { start, end, node_min, funcs, size }
    }

    fn node(&self, k: usize) -> &[Step] {
        &self.funcs[self.start[k] as usize..self.end[k] as usize]
    }

    /// Lowest id below `best` over rows `l..r` covering `u`, else `best`.
    fn query(&self, l: usize, r: usize, u: f64, mut best: u32) -> u32 {
        let (mut l, mut r) = (l + self.size, r + self.size);
        while l < r {
            if l & 1 == 1 {
                if self.node_min[l] < best {
                    best = best.min(eval(self.node(l), u));
                }
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                if self.node_min[r] < best {
                    best = best.min(eval(self.node(r), u));
                }
            }
            l >>= 1;
            r >>= 1;
        }
        best
    }
}

#[derive(Debug)]
struct PairIndex {
    du: Point,
    dq: Point,
    det: f64,
    /// Data chords by increasing `v`.
    rows: Vec<Row>,
    tree: OnceCell<SegTree>,
}

impl PairIndex {
    fn build(chords: &[StoredChord], ids: &[u32], du: Point, dq: Point) -> Self {
        let det = du.cross(dq);
        let uv = |p: Point| (p.cross(dq) / det, du.cross(p) / det);
        let mut rows: Vec<Row> = ids
            .iter()
            .map(|&k| {
                let c = &chords[k as usize];
                let (u0, v0) = uv(c.from);
                let (u1, v1) = uv(c.to);
                Row { v: 0.5 * (v0 + v1), u_lo: u0.min(u1), u_hi: u0.max(u1), id: c.id }
            })
            .collect();
        rows.sort_by(|a, b| a.v.total_cmp(&b.v));
        Self { du, dq, det, rows, tree: OnceCell::new() }
    }

    /// Lowest id below `best` meeting the query chord, else `best`.
    fn query(&self, from: Point, to: Point, best: u32) -> u32 {
        let uv = |p: Point| (p.cross(self.dq) / self.det, self.du.cross(p) / self.det);
        let (u0, v0) = uv(from);
        let (u1, v1) = uv(to);
        let u = 0.5 * (u0 + u1);
        let (lo, hi) = (v0.min(v1), v0.max(v1));
        let l = self.rows.partition_point(|r| r.v < lo);
        let r = l + self.rows[l..].partition_point(|r| r.v <= hi);
        self.tree.get_or_init(|| SegTree::build(&self.rows)).query(l, r, u, best)
    }
}

/// Red chords grouped by line class with lazily built class-pair indices.
#[derive(Debug)]
pub struct ChordIndex {
    line_angles: Vec<f64>,
    line_class: Vec<usize>,
    chords: Vec<StoredChord>,
    by_class: Vec<Vec<u32>>,
    class_min: Vec<u32>,
    pairs: Vec<OnceCell<PairIndex>>,
}

impl ChordIndex {
    /// `chords` are `(red id, chord)` pairs.
    pub fn build(dirs: &CanonicalDirectionSet, chords: impl IntoIterator<Item = (u32, Chord)>) -> Self {
        let nc = dirs.line_angles.len();
        let mut by_class = vec![Vec::new(); nc];
        let chords: Vec<StoredChord> = chords
            .into_iter()
            .enumerate()
            .map(|(k, (id, c))| {
                let class = dirs.line_class[c.dir];
                by_class[class].push(k as u32);
                StoredChord { from: c.from, to: c.to, id, class }
            })
            .collect();
        let class_min = by_class.iter().map(|ks| ks.iter().map(|&k| chords[k as usize].id).min().unwrap_or(NONE)).collect();
        Self {
            class_min,
            line_angles: dirs.line_angles.clone(),
            line_class: dirs.line_class.clone(),
            chords,
            by_class,
            pairs: (0..nc * nc).map(|_| OnceCell::new()).collect(),
        }
    }

    pub fn chords(&self) -> &[StoredChord] {
        &self.chords
    }

    fn pair(&self, d: usize, q: usize) -> &PairIndex {
        let nc = self.line_angles.len();
        self.pairs[d * nc + q].get_or_init(|| {
            PairIndex::build(&self.chords, &self.by_class[d], Point::polar(self.line_angles[d]), Point::polar(self.line_angles[q]))
        })
    }

    /// Lowest red id owning a stored chord that meets the query chord.
    pub fn query(&self, from: Point, to: Point, dir: usize) -> Result<Option<u32>> {
        self.query_below(from, to, dir, NONE)
    }

    /// As [`query`](Self::query), restricted to ids below `bound`.
    pub fn query_below(&self, from: Point, to: Point, dir: usize, bound: u32) -> Result<Option<u32>> {
        let q = *self
            .line_class
            .get(dir)
            .ok_or_else(|| Error::InvalidInput(format!("direction index {dir} is not canonical")))?;
        let mut best = bound;
        for d in 0..self.line_angles.len() {
            if d != q && self.class_min[d] < best {
                best = self.pair(d, q).query(from, to, best);
            }
        }
        Ok((best != bound).then_some(best))
    }
}

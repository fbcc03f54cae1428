//! Level-by-level BFS over the implicit intersection graph.
//!
//! With `L_ℓ` the objects at distance `ℓ` and `𝒞_ℓ` their cliques, the next
//! level is `BIT(candidates, L_ℓ)` where the candidates are the not-ready
//! members of the cliques in the closed neighborhood of `𝒞_ℓ` in the
//! contraction. Each BIT witness becomes the parent of its blue object.

use std::time::{Duration, Instant};

use crate::bit::{self, BitEntry};
use crate::contraction::{build_contraction, Contraction};
use crate::geom::{GeomObject, ObjectKind};
use crate::grids::GridFamily;
use crate::instance::normalize;
use crate::oracle::{bit_brute, build_explicit, ExplicitGraph};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShortestPathTree {
    pub dist: Vec<Option<u32>>,
    pub parent: Vec<Option<u32>>,
    /// `levels[ℓ]` holds the objects at distance `ℓ`, in increasing id order.
    pub levels: Vec<Vec<u32>>,
    pub unreachable: Vec<u32>,
}

#[derive(Debug, Clone, Default)]
pub struct SsspStats {
    /// Candidate count per iteration.
    pub candidates: Vec<usize>,
    pub candidate_sum: usize,
    /// Cliques of `N[𝒞_ℓ]` per iteration, when recording is enabled.
    pub touched: Vec<Vec<u32>>,
    pub elapsed: Duration,
}

/// Clique structure and BIT, swappable for the reference implementations.
pub trait Backend {
    fn num_cliques(&self) -> usize;
    fn members(&self, c: u32) -> &[u32];
    fn clique_of(&self, obj: u32) -> u32;
    fn neighbors(&self, c: u32) -> &[u32];
    fn bit(&self, objs: &[GeomObject], blue: &[u32], red: &[u32]) -> Result<Vec<BitEntry>>;
    fn contraction(&self) -> Option<&Contraction> {
        None
    }
}

pub struct FastBackend {
    pub contraction: Contraction,
    alpha: f64,
    fam: GridFamily,
}

impl FastBackend {
    pub fn new(objs: &[GeomObject], alpha: f64) -> Self {
        let fam = GridFamily::default();
        Self { contraction: build_contraction(objs, &fam, alpha), alpha, fam }
    }
}

impl Backend for FastBackend {
    fn num_cliques(&self) -> usize {
        self.contraction.cliques.len()
    }
    fn members(&self, c: u32) -> &[u32] {
        &self.contraction.cliques[c as usize].members
    }
    fn clique_of(&self, obj: u32) -> u32 {
        self.contraction.membership[obj as usize]
    }
    fn neighbors(&self, c: u32) -> &[u32] {
        self.contraction.neighbors(c)
    }
    fn bit(&self, objs: &[GeomObject], blue: &[u32], red: &[u32]) -> Result<Vec<BitEntry>> {
        bit::bit(objs, blue, red, self.alpha, &self.fam)
    }
    fn contraction(&self) -> Option<&Contraction> {
        Some(&self.contraction)
    }
}

/// Singleton cliques over the explicit graph with all-pairs BIT.
pub struct BruteBackend {
    pub graph: ExplicitGraph,
    ids: Vec<u32>,
}

impl BruteBackend {
    pub fn new(objs: &[GeomObject]) -> Result<Self> {
        Ok(Self { graph: build_explicit(objs)?, ids: (0..objs.len() as u32).collect() })
    }
}

impl Backend for BruteBackend {
    fn num_cliques(&self) -> usize {
        self.graph.n
    }
    fn members(&self, c: u32) -> &[u32] {
        &self.ids[c as usize..c as usize + 1]
    }
    fn clique_of(&self, obj: u32) -> u32 {
        obj
    }
    fn neighbors(&self, c: u32) -> &[u32] {
        &self.graph.adj[c as usize]
    }
    fn bit(&self, objs: &[GeomObject], blue: &[u32], red: &[u32]) -> Result<Vec<BitEntry>> {
        Ok(bit_brute(objs, blue, red))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Fast,
    Brute,
}

impl std::str::FromStr for Algo {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Algo::Fast),
            "brute" => Ok(Algo::Brute),
            _ => Err(Error::InvalidInput(format!("unknown algorithm {s:?}"))),
        }
    }
}

/// Ready flags, the active cliques and epoch stamps for deduplication.
pub struct FrontierState {
    pub ready: Vec<bool>,
    pub active: Vec<u32>,
    obj_stamp: Vec<u32>,
    clique_stamp: Vec<u32>,
    epoch: u32,
}

impl FrontierState {
    pub fn new(n: usize, cliques: usize) -> Self {
        Self { ready: vec![false; n], active: Vec::new(), obj_stamp: vec![0; n], clique_stamp: vec![0; cliques], epoch: 0 }
    }

    fn bump(&mut self) -> u32 {
        self.epoch += 1;
        self.epoch
    }

    /// Sets the active cliques to those of `level`.
    pub fn activate(&mut self, b: &dyn Backend, level: &[u32]) {
        let e = self.bump();
        self.active.clear();
        for &v in level {
            let c = b.clique_of(v);
            if self.clique_stamp[c as usize] != e {
                self.clique_stamp[c as usize] = e;
                self.active.push(c);
            }
        }
    }

    /// Not-ready members of the cliques in `N[active]`, without duplicates.
    /// The touched cliques are appended to `touched` when given.
    pub fn candidate_set(&mut self, b: &dyn Backend, mut touched: Option<&mut Vec<u32>>) -> Vec<u32> {
        let e = self.bump();
        let mut out = Vec::new();
        for k in 0..self.active.len() {
            let c = self.active[k];
            for &d in std::iter::once(&c).chain(b.neighbors(c)) {
                if self.clique_stamp[d as usize] == e {
                    continue;
                }
                self.clique_stamp[d as usize] = e;
                if let Some(t) = touched.as_deref_mut() {
                    t.push(d);
                }
                for &m in b.members(d) {
                    if !self.ready[m as usize] && self.obj_stamp[m as usize] != e {
                        self.obj_stamp[m as usize] = e;
                        out.push(m);
                    }
                }
            }
        }
        out
    }
}

/// Normalized objects with a prepared backend, reusable across sources.
pub struct Solver {
    pub objs: Vec<GeomObject>,
    pub kind: ObjectKind,
    pub backend: Box<dyn Backend>,
    pub build_time: Duration,
    /// Record the touched cliques of every iteration in [`SsspStats`].
    pub record_touched: bool,
}

impl Solver {
    pub fn new(objs: &[GeomObject], alpha: f64, algo: Algo) -> Result<Self> {
        let Some(first) = objs.first() else {
            return Err(Error::InvalidInput("no objects".into()));
        };
        let kind = first.kind();
        if objs.iter().any(|o| o.kind() != kind) {
            return Err(Error::MixedKinds);
        }
        if kind == ObjectKind::Triangles {
            for o in objs {
                bit::triangle::check_fat(o.as_triangle().unwrap(), alpha)?;
            }
        }
        let (objs, _) = normalize(objs)?;
        let t0 = Instant::now();
        let backend: Box<dyn Backend> = match algo {
            Algo::Fast => Box::new(FastBackend::new(&objs, alpha)),
            Algo::Brute => Box::new(BruteBackend::new(&objs)?),
        };
        Ok(Self { objs, kind, backend, build_time: t0.elapsed(), record_touched: false })
    }

    pub fn sssp(&self, source: u32) -> Result<(ShortestPathTree, SsspStats)> {
        self.sssp_multi(&[source])
    }

    pub fn sssp_multi(&self, sources: &[u32]) -> Result<(ShortestPathTree, SsspStats)> {
        let t0 = Instant::now();
        let n = self.objs.len();
        if sources.is_empty() {
            return Err(Error::EmptySources);
        }
        if let Some(&s) = sources.iter().find(|&&s| s as usize >= n) {
            return Err(Error::InvalidSource { id: s as usize, n });
        }
        let b = self.backend.as_ref();
        let mut st = FrontierState::new(n, b.num_cliques());
        let mut dist = vec![None; n];
        let mut parent = vec![None; n];
        let mut level: Vec<u32> = sources.to_vec();
        level.sort_unstable();
        level.dedup();
        for &s in &level {
            dist[s as usize] = Some(0);
            st.ready[s as usize] = true;
        }
        let mut levels = Vec::new();
        let mut stats = SsspStats::default();
        let mut l = 0u32;
        loop {
            st.activate(b, &level);
            let mut touched = Vec::new();
            let cand = st.candidate_set(b, self.record_touched.then_some(&mut touched));
            stats.candidates.push(cand.len());
            stats.candidate_sum += cand.len();
            if self.record_touched {
                stats.touched.push(touched);
            }
            let found = if cand.is_empty() { Vec::new() } else { b.bit(&self.objs, &cand, &level)? };
            levels.push(std::mem::take(&mut level));
            if found.is_empty() {
                break;
            }
            for e in &found {
                dist[e.blue as usize] = Some(l + 1);
                parent[e.blue as usize] = Some(e.witness);
                st.ready[e.blue as usize] = true;
            }
            level = found.iter().map(|e| e.blue).collect();
            l += 1;
        }
        if stats.candidate_sum > 3 * n {
            return Err(Error::Invariant(format!("candidate sum {} exceeds 3n = {}", stats.candidate_sum, 3 * n)));
        }
        let unreachable = (0..n as u32).filter(|&v| dist[v as usize].is_none()).collect();
        stats.elapsed = t0.elapsed();
        Ok((ShortestPathTree { dist, parent, levels, unreachable }, stats))
    }
}

pub fn sssp(objs: &[GeomObject], source: u32, alpha: f64) -> Result<ShortestPathTree> {
    Ok(Solver::new(objs, alpha, Algo::Fast)?.sssp(source)?.0)
}

pub fn sssp_multi(objs: &[GeomObject], sources: &[u32], alpha: f64) -> Result<ShortestPathTree> {
    Ok(Solver::new(objs, alpha, Algo::Fast)?.sssp_multi(sources)?.0)
}

/// Checks that every parent intersects its child and sits one level up.
pub fn check_tree(objs: &[GeomObject], t: &ShortestPathTree) -> Result<()> {
    for (v, d) in t.dist.iter().enumerate() {
        match (d, t.parent[v]) {
            (Some(0), None) | (None, None) => {}
            (Some(d), Some(p)) => {
                if t.dist[p as usize] != Some(d - 1) {
                    return Err(Error::Invariant(format!("parent {p} of {v} is not one level up")));
                }
                if !objs[p as usize].intersects(&objs[v]) {
                    return Err(Error::Invariant(format!("parent {p} does not meet {v}")));
                }
            }
            _ => return Err(Error::Invariant(format!("object {v} has an inconsistent parent"))),
        }
    }
    for (l, lv) in t.levels.iter().enumerate() {
        if lv.iter().any(|&v| t.dist[v as usize] != Some(l as u32)) {
            return Err(Error::Invariant(format!("level {l} holds an object at another distance")));
        }
    }
    Ok(())
}

/// Smallest and largest `dist(C) - ℓ` over the cliques `C` touched at
/// iteration `ℓ`, where `dist(C)` is the minimum member distance.
pub fn locality_range(b: &dyn Backend, dist: &[Option<u32>], stats: &SsspStats) -> Result<Option<(i64, i64)>> {
    let mut range: Option<(i64, i64)> = None;
    for (l, cs) in stats.touched.iter().enumerate() {
        for &c in cs {
            let Some(m) = b.members(c).iter().filter_map(|&v| dist[v as usize]).min() else {
                return Err(Error::Invariant(format!("clique {c} touched at iteration {l} is unreachable")));
            };
            let off = m as i64 - l as i64;
            range = Some(range.map_or((off, off), |(lo, hi)| (lo.min(off), hi.max(off))));
        }
    }
    Ok(range)
}

/// Every clique touched at iteration `ℓ` has `dist(C)` in `[ℓ - 3, ℓ + 2]`.
/// A touched clique has a member meeting some member of an active clique,
/// so that member is at distance at least `ℓ - 2` and the clique's other
/// members at least `ℓ - 3`.
pub fn check_locality(b: &dyn Backend, dist: &[Option<u32>], stats: &SsspStats) -> Result<()> {
    match locality_range(b, dist, stats)? {
        Some((lo, hi)) if lo < -3 || hi > 2 => {
            Err(Error::Invariant(format!("touched cliques span distances [ℓ{lo:+}, ℓ{hi:+}]")))
        }
        _ => Ok(()),
    }
}

/// Objects in adjacent cliques have distances at most 3 apart.
pub fn check_neighbor_distance(b: &dyn Backend, dist: &[Option<u32>]) -> Result<()> {
    let range = |c: u32| {
        let ds = b.members(c).iter().filter_map(|&v| dist[v as usize]);
        ds.clone().min().zip(ds.max())
    };
    let ranges: Vec<Option<(u32, u32)>> = (0..b.num_cliques() as u32).map(range).collect();
    for c in 0..b.num_cliques() as u32 {
        for &d in b.neighbors(c) {
            if let (Some((lo1, hi1)), Some((lo2, hi2))) = (ranges[c as usize], ranges[d as usize]) {
                if hi1.abs_diff(lo2) > 3 || hi2.abs_diff(lo1) > 3 {
                    return Err(Error::Invariant(format!("adjacent cliques {c} and {d} are more than 3 levels apart")));
                }
            }
        }
    }
    Ok(())
}

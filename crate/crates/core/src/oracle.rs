//! Reference implementations: explicit intersection graph, breadth-first
//! search and all-pairs BIT. Quadratic on purpose.

use crate::bit::BitEntry;
use crate::geom::GeomObject;
use crate::instance::ResultRows;
use crate::{Error, Result};

/// Largest instance [`build_explicit`] accepts by default.
pub const DEFAULT_CAP: usize = 5000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitGraph {
    pub n: usize,
    /// Sorted neighbor lists.
    pub adj: Vec<Vec<u32>>,
}

impl ExplicitGraph {
    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }
}

pub fn build_explicit(objs: &[GeomObject]) -> Result<ExplicitGraph> {
    build_explicit_capped(objs, DEFAULT_CAP)
}

pub fn build_explicit_capped(objs: &[GeomObject], cap: usize) -> Result<ExplicitGraph> {
    let n = objs.len();
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    if let Some(o) = objs.first() {
        if objs.iter().any(|p| p.kind() != o.kind()) {
            return Err(Error::MixedKinds);
        }
    }
    let boxes: Vec<_> = objs.iter().map(|o| o.bbox()).collect();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            if boxes[i].overlaps(&boxes[j]) && objs[i].intersects(&objs[j]) {
                adj[i].push(j as u32);
                adj[j].push(i as u32);
            }
        }
    }
    Ok(ExplicitGraph { n, adj })
}

/// Breadth-first search from `sources`. Each level is scanned in increasing
/// id order, so the parent of a node is its lowest-id neighbor one level up.
pub fn bfs(g: &ExplicitGraph, sources: &[u32]) -> Result<ResultRows> {
    if sources.is_empty() {
        return Err(Error::EmptySources);
    }
    let mut dist = vec![None; g.n];
    let mut parent = vec![None; g.n];
    let mut frontier = Vec::new();
    for &s in sources {
        if s as usize >= g.n {
            return Err(Error::InvalidSource { id: s as usize, n: g.n });
        }
        if dist[s as usize].is_none() {
            dist[s as usize] = Some(0);
            frontier.push(s);
        }
    }
    let mut level = 0;
    while !frontier.is_empty() {
        frontier.sort_unstable();
        let mut next = Vec::new();
        for &u in &frontier {
            for &v in &g.adj[u as usize] {
                if dist[v as usize].is_none() {
                    dist[v as usize] = Some(level + 1);
                    parent[v as usize] = Some(u);
                    next.push(v);
                }
            }
        }
        frontier = next;
        level += 1;
    }
    Ok((dist, parent))
}

/// All-pairs BIT over index sets of `objs`; the witness is the lowest
/// intersecting red id.
pub fn bit_brute(objs: &[GeomObject], blue: &[u32], red: &[u32]) -> Vec<BitEntry> {
    let mut red = red.to_vec();
    red.sort_unstable();
    red.dedup();
    let mut blue = blue.to_vec();
    blue.sort_unstable();
    blue.dedup();
    blue.into_iter()
        .filter_map(|b| {
            let o = &objs[b as usize];
            red.iter().find(|&&r| objs[r as usize].intersects(o)).map(|&r| BitEntry { blue: b, witness: r })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Disk, Point};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn disk(x: f64, y: f64, r: f64) -> GeomObject {
        GeomObject::Disk(Disk::new(Point::new(x, y), r).unwrap())
    }

    #[test]
    fn small_graphs() {
        let g = build_explicit(&[disk(0.0, 0.0, 1.0), disk(1.5, 0.0, 1.0)]).unwrap();
        assert_eq!(g.adj, vec![vec![1], vec![0]]);
        let g = build_explicit(&[disk(0.0, 0.0, 1.0), disk(5.0, 0.0, 1.0), disk(10.0, 0.0, 1.0)]).unwrap();
        assert_eq!(g.num_edges(), 0);
        let objs: Vec<_> = (0..6).map(|i| disk(i as f64, 0.0, 0.1)).collect();
        assert!(matches!(build_explicit_capped(&objs, 5), Err(Error::CapExceeded { n: 6, cap: 5 })));
    }

    #[test]
    fn bfs_basics() {
        let g = ExplicitGraph { n: 1, adj: vec![vec![]] };
        assert_eq!(bfs(&g, &[0]).unwrap().0, vec![Some(0)]);
        let g = ExplicitGraph { n: 4, adj: vec![vec![1], vec![0, 2], vec![1], vec![]] };
        let (d, p) = bfs(&g, &[0]).unwrap();
        assert_eq!(d, vec![Some(0), Some(1), Some(2), None]);
        assert_eq!(p, vec![None, Some(0), Some(1), None]);
        assert!(bfs(&g, &[]).is_err());
        assert!(bfs(&g, &[4]).is_err());
    }

    #[test]
    fn bfs_parent_is_lowest_neighbor() {
        // 3 is reachable from both 1 and 2
        let g = ExplicitGraph { n: 4, adj: vec![vec![1, 2], vec![0, 3], vec![0, 3], vec![1, 2]] };
        let (d, p) = bfs(&g, &[0]).unwrap();
        assert_eq!(d[3], Some(2));
        assert_eq!(p[3], Some(1));
    }

    #[test]
    fn triangle_property_and_order_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let objs: Vec<_> = (0..300).map(|_| disk(rng.gen(), rng.gen(), rng.gen_range(0.005..0.05))).collect();
        let g = build_explicit(&objs).unwrap();
        let (d, _) = bfs(&g, &[0]).unwrap();
        for u in 0..g.n {
            for &v in &g.adj[u] {
                if let (Some(a), Some(b)) = (d[u], d[v as usize]) {
                    assert!(a <= b + 1 && b <= a + 1);
                } else {
                    assert_eq!(d[u].is_some(), d[v as usize].is_some());
                }
            }
        }
        let mut perm: Vec<usize> = (0..objs.len()).collect();
        perm.shuffle(&mut rng);
        let shuffled: Vec<_> = perm.iter().map(|&i| objs[i]).collect();
        let h = build_explicit(&shuffled).unwrap();
        for (new_u, &old_u) in perm.iter().enumerate() {
            let mut mapped: Vec<u32> = h.adj[new_u].iter().map(|&v| perm[v as usize] as u32).collect();
            mapped.sort_unstable();
            assert_eq!(mapped, g.adj[old_u]);
        }
    }

    #[test]
    fn brute_bit() {
        let objs = vec![disk(0.0, 0.0, 1.0), disk(1.0, 1.0, 0.5), disk(9.0, 9.0, 0.1)];
        assert_eq!(bit_brute(&objs, &[0, 2], &[1]), vec![BitEntry { blue: 0, witness: 1 }]);
        assert!(bit_brute(&objs, &[0], &[]).is_empty());
    }
}

//! Fat-triangle backend.
//!
//! The witness query is a lowest-id search over the red bounding boxes with
//! the exact triangle predicate. The decomposition into three conditions is
//! kept as [`TriangleBitIndex::witness_by_conditions`]; two fat triangles
//! meet iff at least one of
//! (i) the blue triangle contains a red vertex,
//! (ii) a point of `P(blue)` lies in a red triangle,
//! (iii) a canonical chord of the blue triangle meets one of a red triangle.

use std::cell::OnceCell;

use super::chord::ChordIndex;
use super::kd::{KdItem, KdScratch, KdTree};
use super::stabbing::StabbingIndex;
use crate::geom::{canonical_chords, min_angle, orient, Bbox, CanonicalDirectionSet, GeomObject, Triangle};
use crate::grids::GridFamily;
use crate::{Error, Result};

/// Relative slack on the fatness check, for triangles that went through a
/// similarity transform.
const FAT_SLACK: f64 = 1e-9;

pub fn check_fat(t: &Triangle, alpha: f64) -> Result<()> {
    let a = min_angle(t)?;
    if a < alpha * (1.0 - FAT_SLACK) {
        return Err(Error::InvalidInput(format!("triangle with minimum angle {a} is not {alpha}-fat")));
    }
    Ok(())
}

/// Closed triangle meets the closed box.
pub fn triangle_meets_box(t: &Triangle, b: &Bbox) -> bool {
    if !t.bbox().overlaps(b) {
        return false;
    }
    let cs = b.corners();
    (0..3).all(|i| {
        let (p, q) = t.edge(i);
        cs.iter().any(|&c| orient(p, q, c) >= 0.0)
    })
}

#[derive(Debug)]
struct Conditions {
    vertices: KdTree,
    stabbing: StabbingIndex,
    chords: ChordIndex,
}

#[derive(Debug)]
pub struct TriangleBitIndex {
    alpha: f64,
    fam: GridFamily,
    dirs: CanonicalDirectionSet,
    reds: Vec<(u32, Triangle)>,
    boxes: KdTree,
    conditions: OnceCell<Conditions>,
}

impl TriangleBitIndex {
    /// `reds` are `(id, triangle)` pairs with increasing ids, in normalized
    /// coordinates.
    pub fn build(reds: &[(u32, Triangle)], alpha: f64, fam: &GridFamily) -> Result<Self> {
        let dirs = CanonicalDirectionSet::new(alpha)?;
        if reds.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidInput("red ids must be increasing".into()));
        }
        let mut items = Vec::with_capacity(reds.len());
        for &(id, t) in reds {
            check_fat(&t, alpha)?;
            items.push(KdItem { id, center: t.v[0], bbox: t.bbox(), radius: 0.0 });
        }
        Ok(Self {
            alpha,
            fam: *fam,
            dirs,
            reds: reds.to_vec(),
            boxes: KdTree::build(items),
            conditions: OnceCell::new(),
        })
    }

    fn red(&self, id: u32) -> &Triangle {
        let k = self.reds.binary_search_by_key(&id, |r| r.0).expect("red id");
        &self.reds[k].1
    }

    fn conditions(&self) -> &Conditions {
        self.conditions.get_or_init(|| {
            let mut verts = Vec::with_capacity(3 * self.reds.len());
            let mut chords = Vec::with_capacity(3 * self.reds.len());
            for &(id, t) in &self.reds {
                for v in t.v {
                    verts.push(KdItem { id, center: v, bbox: Bbox { min: v, max: v }, radius: 0.0 });
                }
                let cs = canonical_chords(&t, &self.dirs).expect("fat triangle");
                chords.extend(cs.chords.into_iter().map(|c| (id, c)));
            }
            let objs: Vec<(u32, GeomObject)> = self.reds.iter().map(|&(id, t)| (id, GeomObject::Triangle(t))).collect();
            Conditions {
                vertices: KdTree::build(verts),
                stabbing: StabbingIndex::build(&objs, &self.fam, self.alpha),
                chords: ChordIndex::build(&self.dirs, chords),
            }
        })
    }

    /// Lowest red id with a vertex inside `t`.
    pub fn vertex_in(&self, scratch: &mut KdScratch, t: &Triangle) -> Option<u32> {
        self.conditions().vertices.lowest(scratch, |n| triangle_meets_box(t, &n.ext), |it| t.contains(it.center))
    }

    pub fn stabbing(&self) -> &StabbingIndex {
        &self.conditions().stabbing
    }

    pub fn chords(&self) -> &ChordIndex {
        &self.conditions().chords
    }

    /// Lowest red id intersecting the blue triangle.
    pub fn witness(&self, scratch: &mut KdScratch, t: &Triangle) -> Result<Option<u32>> {
        check_fat(t, self.alpha)?;
        let bb = t.bbox();
        Ok(self.boxes.lowest(
            scratch,
            |n| n.ext.overlaps(&bb) && triangle_meets_box(t, &n.ext),
            |it| it.bbox.overlaps(&bb) && self.red(it.id).intersects(t),
        ))
    }

    /// Same answer as [`witness`](Self::witness), computed as the minimum
    /// over the three conditions.
    pub fn witness_by_conditions(&self, scratch: &mut KdScratch, t: &Triangle) -> Result<Option<u32>> {
        check_fat(t, self.alpha)?;
        let cs = canonical_chords(t, &self.dirs)?;
        let cond = self.conditions();
        let mut best = self.vertex_in(scratch, t).unwrap_or(u32::MAX);
        for p in cs.points {
            if let Some(id) = cond.stabbing.query_below(p, best) {
                best = id;
            }
        }
        for c in cs.chords {
            if let Some(id) = cond.chords.query_below(c.from, c.to, c.dir, best)? {
                best = id;
            }
        }
        Ok((best != u32::MAX).then_some(best))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Point, DEFAULT_ALPHA};
    use crate::grids::make_family;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tri(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> Triangle {
        Triangle::new(Point::new(a.0, a.1), Point::new(b.0, b.1), Point::new(c.0, c.1)).unwrap()
    }

    fn equilateral(c: Point, r: f64, phase: f64) -> Triangle {
        let p = |k: f64| c + Point::polar(phase + k * std::f64::consts::TAU / 3.0) * r;
        Triangle::new(p(0.0), p(1.0), p(2.0)).unwrap()
    }

    #[test]
    fn box_test() {
        let t = tri((0.0, 0.0), (1.0, 0.0), (0.0, 1.0));
        let b = |x0, y0, x1, y1| Bbox { min: Point::new(x0, y0), max: Point::new(x1, y1) };
        assert!(triangle_meets_box(&t, &b(0.2, 0.2, 0.3, 0.3)));
        assert!(!triangle_meets_box(&t, &b(0.6, 0.6, 0.9, 0.9)));
        assert!(triangle_meets_box(&t, &b(0.5, 0.5, 0.9, 0.9)));
        assert!(triangle_meets_box(&t, &b(-1.0, -1.0, 2.0, 2.0)));
    }

    #[test]
    fn conditions() {
        let fam = make_family();
        let big = equilateral(Point::new(0.5, 0.5), 0.2, 0.1);
        let small = equilateral(Point::new(0.5, 0.5), 0.02, 0.3);
        let mut s = KdScratch::default();
        // red inside blue: a red vertex lies in the blue triangle
        let idx = TriangleBitIndex::build(&[(0, small)], DEFAULT_ALPHA, &fam).unwrap();
        assert_eq!(idx.vertex_in(&mut s, &big), Some(0));
        assert_eq!(idx.witness(&mut s, &big).unwrap(), Some(0));
        // blue inside red: a blue point is stabbed
        let idx = TriangleBitIndex::build(&[(0, big)], DEFAULT_ALPHA, &fam).unwrap();
        assert_eq!(idx.vertex_in(&mut s, &small), None);
        assert_eq!(idx.stabbing().query(small.v[0]), Some(0));
        assert_eq!(idx.witness(&mut s, &small).unwrap(), Some(0));
        // star of David: edges cross, no vertex inside the other
        let up = equilateral(Point::new(0.5, 0.5), 0.1, std::f64::consts::FRAC_PI_2);
        let down = equilateral(Point::new(0.5, 0.5), 0.1, -std::f64::consts::FRAC_PI_2);
        assert!(up.v.iter().all(|&v| !down.contains(v)) && down.v.iter().all(|&v| !up.contains(v)));
        let idx = TriangleBitIndex::build(&[(4, down)], DEFAULT_ALPHA, &fam).unwrap();
        assert_eq!(idx.vertex_in(&mut s, &up), None);
        assert_eq!(idx.witness(&mut s, &up).unwrap(), Some(4));
        assert_eq!(idx.witness_by_conditions(&mut s, &up).unwrap(), Some(4));
        // disjoint
        let far = equilateral(Point::new(0.9, 0.9), 0.02, 0.0);
        assert_eq!(idx.witness(&mut s, &far).unwrap(), None);
    }

    #[test]
    fn witness_paths_agree_with_scan() {
        let fam = make_family();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let tri = |rng: &mut ChaCha8Rng| loop {
            let c = Point::new(rng.gen(), rng.gen());
            let s: f64 = rng.gen_range(0.005..0.08);
            let p = |rng: &mut ChaCha8Rng| c + Point::new(rng.gen_range(-s..s), rng.gen_range(-s..s));
            if let Ok(t) = Triangle::new(p(rng), p(rng), p(rng)) {
                if min_angle(&t).unwrap() >= DEFAULT_ALPHA {
                    return t;
                }
            }
        };
        let reds: Vec<(u32, Triangle)> = (0..400).map(|i| (3 * i + 1, tri(&mut rng))).collect();
        let idx = TriangleBitIndex::build(&reds, DEFAULT_ALPHA, &fam).unwrap();
        let mut s = KdScratch::default();
        for _ in 0..1000 {
            let t = tri(&mut rng);
            let expect = reds.iter().find(|(_, r)| r.intersects(&t)).map(|r| r.0);
            assert_eq!(idx.witness(&mut s, &t).unwrap(), expect);
            assert_eq!(idx.witness_by_conditions(&mut s, &t).unwrap(), expect);
        }
    }

    #[test]
    fn thin_triangle_rejected() {
        let thin = tri((0.1, 0.1), (0.9, 0.1), (0.5, 0.12));
        assert!(TriangleBitIndex::build(&[(0, thin)], DEFAULT_ALPHA, &make_family()).is_err());
    }
}

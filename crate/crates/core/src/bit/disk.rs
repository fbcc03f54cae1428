//! Disk backend: a blue disk `D` meets `⋃R` iff `min_R |c_D - c_R| - r_R <= r_D`.

use super::kd::{KdItem, KdScratch, KdTree};
use crate::geom::{Disk, Point};

/// Index over red disk centers weighted by their radii.
#[derive(Debug, Clone, Default)]
pub struct DiskNnIndex {
    tree: KdTree,
}

impl DiskNnIndex {
    /// `reds` are `(id, disk)` pairs.
    pub fn build(reds: impl IntoIterator<Item = (u32, Disk)>) -> Self {
        let items = reds
            .into_iter()
            .map(|(id, d)| KdItem { id, center: d.center, bbox: d.bbox(), radius: d.radius })
            .collect();
        Self { tree: KdTree::build(items) }
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tree.is_empty()
    }

    /// Red disk minimising `|q - c_R| - r_R` with that value and the number
    /// of nodes expanded.
    pub fn nearest(&self, scratch: &mut KdScratch, q: Point) -> Option<(u32, f64, usize)> {
        self.tree.nearest_weighted(scratch, q)
    }

    /// Lowest red id intersecting `d`.
    pub fn witness(&self, scratch: &mut KdScratch, d: &Disk) -> Option<u32> {
        let c = d.center;
        let r = d.radius;
        self.tree.lowest(
            scratch,
            |n| {
                let reach = r + n.max_r;
                n.ext.dist2_to(c) <= r * r && n.cbox.dist2_to(c) <= reach * reach
            },
            |it| {
                let s = r + it.radius;
                c.dist2(it.center) <= s * s
            },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_disks(rng: &mut ChaCha8Rng, n: usize) -> Vec<Disk> {
        (0..n)
            .map(|_| Disk::new(Point::new(rng.gen(), rng.gen()), 10f64.powf(rng.gen_range(-3.0..-1.3))).unwrap())
            .collect()
    }

    #[test]
    fn single_pair() {
        let idx = DiskNnIndex::build([(0, Disk::new(Point::new(1.0, 1.0), 0.5).unwrap())]);
        let mut s = KdScratch::default();
        assert_eq!(idx.witness(&mut s, &Disk::new(Point::new(0.0, 0.0), 1.0).unwrap()), Some(0));
        assert_eq!(idx.witness(&mut s, &Disk::new(Point::new(0.0, 0.0), 0.9).unwrap()), None);
        assert_eq!(DiskNnIndex::build([]).witness(&mut s, &Disk::new(Point::new(0.0, 0.0), 1.0).unwrap()), None);
    }

    #[test]
    fn nearest_is_exact_and_cheap() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let reds = rand_disks(&mut rng, 4096);
        let idx = DiskNnIndex::build(reds.iter().enumerate().map(|(i, &d)| (i as u32, d)));
        let mut s = KdScratch::default();
        let mut worst = 0;
        for _ in 0..500 {
            let q = Point::new(rng.gen(), rng.gen());
            let best = reds.iter().map(|d| q.dist(d.center) - d.radius).fold(f64::INFINITY, f64::min);
            let (_, v, exp) = idx.nearest(&mut s, q).unwrap();
            assert!((v - best).abs() <= 1e-12);
            worst = worst.max(exp);
        }
        assert!(worst as f64 <= 30.0 * 12.0, "expanded {worst}");
    }

    #[test]
    fn witness_is_lowest_intersecting() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let reds = rand_disks(&mut rng, 300);
            let blues = rand_disks(&mut rng, 300);
            let idx = DiskNnIndex::build(reds.iter().enumerate().map(|(i, &d)| (i as u32, d)));
            let mut s = KdScratch::default();
            for b in &blues {
                let expect = reds.iter().position(|r| r.intersects(b)).map(|i| i as u32);
                assert_eq!(idx.witness(&mut s, b), expect);
            }
        }
    }
}

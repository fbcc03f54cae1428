//! Shifted hierarchical grids and 6-alignment.

use crate::geom::{Bbox, GeomObject, Point};

/// Alignment constant: an aligned object fits in a cell at most this many
/// times its own size.
pub const ALIGN_FACTOR: f64 = 6.0;

/// `2^level` as an exact double.
#[inline]
pub fn pow2(level: i32) -> f64 {
    f64::from_bits(((level + 1023) as u64) << 52)
}

/// `ceil(log2 x)` for finite positive `x`, from the float exponent.
pub fn ceil_log2(x: f64) -> i32 {
    debug_assert!(x > 0.0 && x.is_finite());
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i32;
    let mant = bits & ((1u64 << 52) - 1);
    if exp == 0 {
        return x.log2().ceil() as i32;
    }
    let e = exp - 1023;
    if mant == 0 {
        e
    } else {
        e + 1
    }
}

#[inline]
pub fn floor_log2(x: f64) -> i32 {
    let c = ceil_log2(x);
    if pow2(c) == x {
        c
    } else {
        c - 1
    }
}

/// Half-open square `[o.x + i 2^l, o.x + (i+1) 2^l) x [o.y + j 2^l, ...)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridCell {
    pub grid: u8,
    pub level: i32,
    pub i: i64,
    pub j: i64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridFamily {
    pub centers: [Point; 3],
}

impl Default for GridFamily {
    fn default() -> Self {
        make_family()
    }
}

pub fn make_family() -> GridFamily {
    GridFamily {
        centers: [Point::new(0.0, 0.0), Point::new(-1.0 / 3.0, -1.0 / 3.0), Point::new(-2.0 / 3.0, -2.0 / 3.0)],
    }
}

impl GridFamily {
    pub fn cell_of(&self, grid: u8, level: i32, p: Point) -> GridCell {
        let o = self.centers[grid as usize];
        let inv = pow2(-level);
        GridCell {
            grid,
            level,
            i: ((p.x - o.x) * inv).floor() as i64,
            j: ((p.y - o.y) * inv).floor() as i64,
        }
    }

    /// Lower-left corner of a cell.
    pub fn cell_min(&self, c: &GridCell) -> Point {
        let o = self.centers[c.grid as usize];
        let s = pow2(c.level);
        Point::new(o.x + c.i as f64 * s, o.y + c.j as f64 * s)
    }

    pub fn cell_bounds(&self, c: &GridCell) -> Bbox {
        let min = self.cell_min(c);
        let s = pow2(c.level);
        Bbox { min, max: Point::new(min.x + s, min.y + s) }
    }

    /// Closed box inside the half-open cell.
    pub fn cell_contains_box(&self, c: &GridCell, b: &Bbox) -> bool {
        let cb = self.cell_bounds(c);
        b.min.x >= cb.min.x && b.min.y >= cb.min.y && b.max.x < cb.max.x && b.max.y < cb.max.y
    }

    pub fn cell_contains_point(&self, c: &GridCell, p: Point) -> bool {
        self.cell_of(c.grid, c.level, p) == *c
    }
}

impl GridCell {
    #[inline]
    pub fn side(&self) -> f64 {
        pow2(self.level)
    }

    /// The ancestor cell at `level >= self.level`.
    pub fn ancestor(&self, level: i32) -> GridCell {
        debug_assert!(level >= self.level);
        let sh = (level - self.level) as u32;
        let (i, j) = if sh >= 63 {
            (if self.i < 0 { -1 } else { 0 }, if self.j < 0 { -1 } else { 0 })
        } else {
            (self.i >> sh, self.j >> sh)
        };
        GridCell { grid: self.grid, level, i, j }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alignment {
    pub cell: GridCell,
    /// Set when no grid 6-aligns the object and the best-ratio cell was used.
    pub fallback: bool,
}

impl Alignment {
    pub fn grid(&self) -> u8 {
        self.cell.grid
    }
}

fn smallest_containing(fam: &GridFamily, grid: u8, b: &Bbox, from: i32, to: i32) -> Option<GridCell> {
    (from..=to).find_map(|level| {
        let c = fam.cell_of(grid, level, b.min);
        (fam.cell_of(grid, level, b.max) == c && fam.cell_contains_box(&c, b)).then_some(c)
    })
}

/// Finds a grid and the smallest cell of it that contains `obj` with
/// `size(cell) <= 6 size(obj)`. Ties between grids go to the lowest id.
pub fn find_aligned_grid(obj: &GeomObject, fam: &GridFamily) -> Alignment {
    let b = obj.bbox();
    let size = obj.size();
    let lo = ceil_log2(size);
    for grid in 0..3u8 {
        if let Some(c) = smallest_containing(fam, grid, &b, lo, lo + 3) {
            if c.side() <= ALIGN_FACTOR * size {
                return Alignment { cell: c, fallback: false };
            }
        }
    }
    let mut best: Option<(f64, GridCell)> = None;
    for grid in 0..3u8 {
        if let Some(c) = smallest_containing(fam, grid, &b, lo, lo + 80) {
            let ratio = c.side() / size;
            if best.is_none_or(|(r, _)| ratio < r) {
                best = Some((ratio, c));
            }
        }
    }
    let (_, cell) = best.expect("bounded object fits in some cell");
    Alignment { cell, fallback: true }
}

//! Bichromatic intersection testing: report every blue object that meets
//! the union of the red objects, with the lowest-id red object it meets.

pub mod chord;
pub mod disk;
pub mod emptiness;
pub mod kd;
pub mod stabbing;
pub mod triangle;

use crate::geom::{Disk, GeomObject, ObjectKind, Triangle};
use crate::grids::GridFamily;
use crate::instance::normalize;
use crate::{Error, Result};

pub use disk::DiskNnIndex;
pub use kd::KdScratch;
pub use triangle::TriangleBitIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitEntry {
    pub blue: u32,
    pub witness: u32,
}

/// Index over a red set, rebuilt for each red set.
#[derive(Debug)]
pub enum RedIndex {
    Disks(DiskNnIndex),
    Triangles(Box<TriangleBitIndex>),
}

impl RedIndex {
    /// Builds the index over `objs[red]`. Coordinates must be normalized.
    pub fn build(objs: &[GeomObject], red: &[u32], kind: ObjectKind, alpha: f64, fam: &GridFamily) -> Result<Self> {
        let mut red = red.to_vec();
        red.sort_unstable();
        red.dedup();
        match kind {
            ObjectKind::Disks => {
                let reds = red
                    .iter()
                    .map(|&i| objs[i as usize].as_disk().map(|d| (i, *d)).ok_or(Error::MixedKinds))
                    .collect::<Result<Vec<_>>>()?;
                Ok(RedIndex::Disks(DiskNnIndex::build(reds)))
            }
            ObjectKind::Triangles => {
                let reds = red
                    .iter()
                    .map(|&i| objs[i as usize].as_triangle().map(|t| (i, *t)).ok_or(Error::MixedKinds))
                    .collect::<Result<Vec<_>>>()?;
                Ok(RedIndex::Triangles(Box::new(TriangleBitIndex::build(&reds, alpha, fam)?)))
            }
        }
    }

    /// Lowest red id meeting `obj`.
    pub fn witness(&self, scratch: &mut KdScratch, obj: &GeomObject) -> Result<Option<u32>> {
        match (self, obj) {
            (RedIndex::Disks(idx), GeomObject::Disk(d)) => Ok(idx.witness(scratch, d)),
            (RedIndex::Triangles(idx), GeomObject::Triangle(t)) => idx.witness(scratch, t),
            _ => Err(Error::MixedKinds),
        }
    }
}

/// BIT on index sets of `objs` (normalized coordinates). Entries are sorted
/// by blue id.
pub fn bit(objs: &[GeomObject], blue: &[u32], red: &[u32], alpha: f64, fam: &GridFamily) -> Result<Vec<BitEntry>> {
    if red.is_empty() || blue.is_empty() {
        return Ok(Vec::new());
    }
    let kind = objs[red[0] as usize].kind();
    let idx = RedIndex::build(objs, red, kind, alpha, fam)?;
    let mut blue = blue.to_vec();
    blue.sort_unstable();
    blue.dedup();
    let mut scratch = KdScratch::default();
    let mut out = Vec::new();
    for b in blue {
        if let Some(w) = idx.witness(&mut scratch, &objs[b as usize])? {
            out.push(BitEntry { blue: b, witness: w });
        }
    }
    Ok(out)
}

/// Normalizes `red ++ blue` together and runs [`bit`]; ids index the input slices.
fn bit_separate(red: Vec<GeomObject>, blue: Vec<GeomObject>, alpha: f64) -> Result<Vec<BitEntry>> {
    if red.is_empty() || blue.is_empty() {
        return Ok(Vec::new());
    }
    let nr = red.len() as u32;
    let nb = blue.len() as u32;
    let mut all = red;
    all.extend(blue);
    let (objs, _) = normalize(&all)?;
    let red_ids: Vec<u32> = (0..nr).collect();
    let blue_ids: Vec<u32> = (nr..nr + nb).collect();
    let fam = GridFamily::default();
    Ok(bit(&objs, &blue_ids, &red_ids, alpha, &fam)?
        .into_iter()
        .map(|e| BitEntry { blue: e.blue - nr, witness: e.witness })
        .collect())
}

/// Blue disks meeting some red disk, with the lowest-id red witness.
pub fn bit_disks(blue: &[Disk], red: &[Disk]) -> Vec<BitEntry> {
    if red.is_empty() || blue.is_empty() {
        return Vec::new();
    }
    let idx = DiskNnIndex::build(red.iter().enumerate().map(|(i, &d)| (i as u32, d)));
    let mut scratch = KdScratch::default();
    blue.iter()
        .enumerate()
        .filter_map(|(i, d)| idx.witness(&mut scratch, d).map(|w| BitEntry { blue: i as u32, witness: w }))
        .collect()
}

/// Blue triangles meeting some red triangle, with the lowest-id red witness.
/// Every triangle must be `alpha`-fat.
pub fn bit_triangles(blue: &[Triangle], red: &[Triangle], alpha: f64) -> Result<Vec<BitEntry>> {
    let wrap = |ts: &[Triangle]| ts.iter().map(|&t| GeomObject::Triangle(t)).collect::<Vec<_>>();
    for t in blue.iter().chain(red) {
        triangle::check_fat(t, alpha)?;
    }
    bit_separate(wrap(red), wrap(blue), alpha)
}

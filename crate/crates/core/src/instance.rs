//! Instance files, result files, normalization and random generators.
//!
//! Instance format (text, `#` starts a comment):
//!
//! ```text
//! disks <n>
//! <x> <y> <r>            # n lines
//! ```
//! or
//! ```text
//! triangles <n> <alpha>
//! <x1> <y1> <x2> <y2> <x3> <y3>
//! ```
//!
//! Result format: one line `<id> <dist> <parent>` per object, `-1` for
//! unreachable distances and absent parents.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::geom::{min_angle, Bbox, Disk, GeomObject, ObjectKind, Point, Triangle, DEFAULT_ALPHA};

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub kind: ObjectKind,
    /// Fatness bound for triangle instances; unused for disks.
    pub alpha: f64,
    pub objects: Vec<GeomObject>,
}

impl Instance {
    pub fn new(kind: ObjectKind, alpha: f64, objects: Vec<GeomObject>) -> Result<Self> {
        if objects.iter().any(|o| o.kind() != kind) {
            return Err(Error::MixedKinds);
        }
        Ok(Self { kind, alpha, objects })
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = tok.parse().map_err(|_| parse_err(line, format!("not a number: {tok:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite value {tok:?}")));
    }
    Ok(v)
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut lines = text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap().trim();
        (!l.is_empty()).then_some((i + 1, l))
    });
    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    let (kind, n, alpha) = match h.as_slice() {
        ["disks", n] => (ObjectKind::Disks, *n, DEFAULT_ALPHA),
        ["triangles", n, a] => (ObjectKind::Triangles, *n, parse_f64(a, hl)?),
        _ => return Err(parse_err(hl, "expected `disks <n>` or `triangles <n> <alpha>`")),
    };
    let n: usize = n.parse().map_err(|_| parse_err(hl, format!("bad count {n:?}")))?;
    if kind == ObjectKind::Triangles && !(alpha > 0.0 && alpha <= std::f64::consts::FRAC_PI_3) {
        return Err(parse_err(hl, format!("alpha {alpha} outside (0, π/3]")));
    }
    let mut objects = Vec::with_capacity(n);
    for (ln, l) in lines {
        let v: Vec<f64> = l.split_whitespace().map(|t| parse_f64(t, ln)).collect::<Result<_>>()?;
        let obj = match (kind, v.len()) {
            (ObjectKind::Disks, 3) => {
                GeomObject::Disk(Disk::new(Point::new(v[0], v[1]), v[2]).map_err(|e| parse_err(ln, e.to_string()))?)
            }
            (ObjectKind::Triangles, 6) => {
                let t = Triangle::new(Point::new(v[0], v[1]), Point::new(v[2], v[3]), Point::new(v[4], v[5]))
                    .map_err(|e| parse_err(ln, e.to_string()))?;
                let m = min_angle(&t)?;
                if m < alpha * (1.0 - 1e-9) {
                    return Err(Error::InvalidInput(format!("line {ln}: triangle min angle {m} below alpha {alpha}")));
                }
                GeomObject::Triangle(t)
            }
            _ => return Err(parse_err(ln, format!("expected {} values", if kind == ObjectKind::Disks { 3 } else { 6 }))),
        };
        objects.push(obj);
    }
    if objects.len() != n {
        return Err(parse_err(hl, format!("header says {n} objects, found {}", objects.len())));
    }
    Ok(Instance { kind, alpha, objects })
}

pub fn emit_instance(inst: &Instance) -> String {
    let mut s = String::with_capacity(inst.len() * 48 + 32);
    match inst.kind {
        ObjectKind::Disks => writeln!(s, "disks {}", inst.len()).unwrap(),
        ObjectKind::Triangles => writeln!(s, "triangles {} {}", inst.len(), inst.alpha).unwrap(),
    }
    for o in &inst.objects {
        match o {
            GeomObject::Disk(d) => writeln!(s, "{} {} {}", d.center.x, d.center.y, d.radius).unwrap(),
            GeomObject::Triangle(t) => {
                writeln!(s, "{} {} {} {} {} {}", t.v[0].x, t.v[0].y, t.v[1].x, t.v[1].y, t.v[2].x, t.v[2].y).unwrap()
            }
        }
    }
    s
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    parse_instance(&std::fs::read_to_string(path)?)
}

pub fn write_instance(path: &Path, inst: &Instance) -> Result<()> {
    std::fs::write(path, emit_instance(inst))?;
    Ok(())
}

/// Result lines for a distance and parent array.
pub fn emit_results(dist: &[Option<u32>], parent: &[Option<u32>]) -> String {
    let mut s = String::with_capacity(dist.len() * 16);
    for (i, (d, p)) in dist.iter().zip(parent).enumerate() {
        let d = d.map_or(-1, |d| d as i64);
        let p = p.map_or(-1, |p| p as i64);
        writeln!(s, "{i} {d} {p}").unwrap();
    }
    s
}

pub type ResultRows = (Vec<Option<u32>>, Vec<Option<u32>>);

pub fn parse_results(text: &str) -> Result<ResultRows> {
    let mut dist = Vec::new();
    let mut parent = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let l = l.trim();
        if l.is_empty() {
            continue;
        }
        let v: Vec<i64> = l
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(i + 1, format!("bad integer {t:?}"))))
            .collect::<Result<_>>()?;
        if v.len() != 3 || v[0] != dist.len() as i64 {
            return Err(parse_err(i + 1, "expected `<id> <dist> <parent>` in id order"));
        }
        dist.push((v[1] >= 0).then_some(v[1] as u32));
        parent.push((v[2] >= 0).then_some(v[2] as u32));
    }
    Ok((dist, parent))
}

/// Similarity map `p -> (p + shift) * scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub shift: Point,
    pub scale: f64,
}

impl Normalization {
    pub fn apply(&self, p: Point) -> Point {
        (p + self.shift) * self.scale
    }
}

/// Maps the bounding square of all objects onto `[0.05, 0.95]²`.
pub fn normalize(objs: &[GeomObject]) -> Result<(Vec<GeomObject>, Normalization)> {
    let mut b = Bbox::empty();
    for o in objs {
        b.union(&o.bbox());
    }
    let side = b.width().max(b.height());
    if !(side > 0.0 && side.is_finite()) {
        return Err(Error::Degenerate(format!("bounding square has side {side}")));
    }
    let scale = 0.9 / side;
    let shift = Point::new(0.05 / scale - b.min.x, 0.05 / scale - b.min.y);
    let map = Normalization { shift, scale };
    Ok((objs.iter().map(|o| o.translate_scale(shift, scale)).collect(), map))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    Uniform,
    Cluster,
    Path,
}

impl std::str::FromStr for Profile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(Profile::Uniform),
            "cluster" => Ok(Profile::Cluster),
            "path" => Ok(Profile::Path),
            _ => Err(Error::InvalidInput(format!("unknown profile {s:?}"))),
        }
    }
}

const SIZE_MIN: f64 = 1e-3;
const SIZE_MAX: f64 = 1e-1;
/// Generated instances avoid gaps and overlaps smaller than this.
pub const TANGENCY_TOL: f64 = 1e-9;
/// Above this size the quadratic near-tangency scan is skipped.
pub const TANGENCY_CHECK_MAX_N: usize = 5000;

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

/// A fat triangle shape centred on its incircle: vertices relative to the
/// incenter, plus the inradius.
fn fat_shape(rng: &mut ChaCha8Rng, alpha: f64, size: f64) -> ([Point; 3], f64) {
    let lo = alpha * (1.0 + 1e-9);
    loop {
        let a = rng.gen_range(lo..std::f64::consts::PI);
        let b = rng.gen_range(lo..std::f64::consts::PI);
        let c = std::f64::consts::PI - a - b;
        if c < lo {
            continue;
        }
        let r = size / 2.0;
        let phi = rng.gen_range(0.0..std::f64::consts::TAU);
        // inscribed angles: arc opposite each vertex is twice its angle
        let v0 = Point::polar(phi) * r;
        let v1 = Point::polar(phi + 2.0 * c) * r;
        let v2 = Point::polar(phi + 2.0 * c + 2.0 * a) * r;
        let Ok(t) = Triangle::new(v0, v1, v2) else { continue };
        if min_angle(&t).map_or(true, |m| m < alpha) {
            continue;
        }
        let la = t.v[1].dist(t.v[2]);
        let lb = t.v[2].dist(t.v[0]);
        let lc = t.v[0].dist(t.v[1]);
        let per = la + lb + lc;
        let inc = (t.v[0] * la + t.v[1] * lb + t.v[2] * lc) * (1.0 / per);
        let inr = 2.0 * t.area() / per;
        return ([t.v[0] - inc, t.v[1] - inc, t.v[2] - inc], inr);
    }
}

fn near_tangent(a: &GeomObject, b: &GeomObject) -> bool {
    match (a, b) {
        (GeomObject::Disk(p), GeomObject::Disk(q)) => {
            let d = p.center.dist(q.center);
            (d - (p.radius + q.radius)).abs() < TANGENCY_TOL || (d - (p.radius - q.radius).abs()).abs() < TANGENCY_TOL
        }
        (GeomObject::Triangle(p), GeomObject::Triangle(q)) => {
            let (bp, bq) = (p.bbox(), q.bbox());
            if bp.min.x > bq.max.x + TANGENCY_TOL
                || bq.min.x > bp.max.x + TANGENCY_TOL
                || bp.min.y > bq.max.y + TANGENCY_TOL
                || bq.min.y > bp.max.y + TANGENCY_TOL
            {
                return false;
            }
            if p.intersects(q) {
                // touching only at a vertex or along an edge
                let depth = (0..3)
                    .flat_map(|i| [(p, q.v[i]), (q, p.v[i])])
                    .filter(|(t, v)| t.contains(*v))
                    .map(|(t, v)| (0..3).map(|e| crate::geom::point_segment_dist(v, t.edge(e).0, t.edge(e).1)).fold(f64::INFINITY, f64::min))
                    .fold(f64::INFINITY, f64::min);
                depth < TANGENCY_TOL
            } else {
                (0..3).any(|e| q.dist_to_segment(p.edge(e).0, p.edge(e).1) < TANGENCY_TOL)
            }
        }
        _ => false,
    }
}

/// Generates a deterministic instance from `seed`.
pub fn generate(kind: ObjectKind, n: usize, seed: u64, profile: Profile, alpha: f64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let check = n <= TANGENCY_CHECK_MAX_N;
    let clusters: Vec<Point> = (0..(n / 50).max(1)).map(|_| Point::new(rng.gen_range(0.1..0.9), rng.gen_range(0.1..0.9))).collect();
    let spread = Normal::new(0.0, 0.05).unwrap();
    let mut objects: Vec<GeomObject> = Vec::with_capacity(n);
    // (incenter or center, inradius or radius) of the previous object
    let mut prev: Option<(Point, f64)> = None;
    while objects.len() < n {
        let size = log_uniform(&mut rng, SIZE_MIN, SIZE_MAX);
        let (shape, inner) = match kind {
            ObjectKind::Disks => ([Point::new(0.0, 0.0); 3], size / 2.0),
            ObjectKind::Triangles => fat_shape(&mut rng, alpha, size),
        };
        let anchor = match (profile, prev) {
            (Profile::Path, Some((c, r))) => {
                let mut p = None;
                for _ in 0..100 {
                    let d = rng.gen_range(0.3..0.9) * (r + inner);
                    let q = c + Point::polar(rng.gen_range(0.0..std::f64::consts::TAU)) * d;
                    if (0.0..1.0).contains(&q.x) && (0.0..1.0).contains(&q.y) {
                        p = Some(q);
                        break;
                    }
                }
                match p {
                    Some(q) => q,
                    None => continue,
                }
            }
            (Profile::Cluster, _) => {
                let c = clusters[rng.gen_range(0..clusters.len())];
                let q = Point::new(c.x + spread.sample(&mut rng), c.y + spread.sample(&mut rng));
                if !((0.0..1.0).contains(&q.x) && (0.0..1.0).contains(&q.y)) {
                    continue;
                }
                q
            }
            _ => Point::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)),
        };
        let obj = match kind {
            ObjectKind::Disks => GeomObject::Disk(Disk::new(anchor, inner).unwrap()),
            ObjectKind::Triangles => match Triangle::new(shape[0] + anchor, shape[1] + anchor, shape[2] + anchor) {
                Ok(t) if min_angle(&t).is_ok_and(|m| m >= alpha) => GeomObject::Triangle(t),
                _ => continue,
            },
        };
        if check && objects.iter().any(|o| near_tangent(o, &obj)) {
            continue;
        }
        prev = Some((anchor, inner));
        objects.push(obj);
    }
    Instance { kind, alpha, objects }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::objects_intersect;

    #[test]
    fn round_trip() {
        for kind in [ObjectKind::Disks, ObjectKind::Triangles] {
            let inst = generate(kind, 40, 3, Profile::Uniform, DEFAULT_ALPHA);
            let back = parse_instance(&emit_instance(&inst)).unwrap();
            assert_eq!(back, inst);
        }
    }

    #[test]
    fn parse_errors() {
        assert!(parse_instance("").is_err());
        assert!(parse_instance("disks 2\n0 0 1\n").is_err());
        assert!(parse_instance("disks 1\n0 0 -1\n").is_err());
        assert!(parse_instance("disks 1\n0 0 x\n").is_err());
        assert!(parse_instance("boxes 1\n0 0 1\n").is_err());
        // a sliver fails the fatness check
        assert!(parse_instance("triangles 1 0.5235987755982988\n0 0 1 0 0.5 0.01\n").is_err());
        let ok = parse_instance("# comment\ndisks 1\n0.5 0.5 0.1 # trailing\n").unwrap();
        assert_eq!(ok.len(), 1);
    }

    #[test]
    fn results_round_trip() {
        let d = vec![Some(0), Some(1), None];
        let p = vec![None, Some(0), None];
        let s = emit_results(&d, &p);
        assert_eq!(s, "0 0 -1\n1 1 0\n2 -1 -1\n");
        assert_eq!(parse_results(&s).unwrap(), (d, p));
    }

    #[test]
    fn normalization() {
        let objs = vec![
            GeomObject::Disk(Disk::new(Point::new(-99.0, -99.0), 1.0).unwrap()),
            GeomObject::Disk(Disk::new(Point::new(99.0, 99.0), 1.0).unwrap()),
        ];
        let (out, map) = normalize(&objs).unwrap();
        assert!((map.scale - 0.9 / 200.0).abs() < 1e-15);
        let d0 = out[0].as_disk().unwrap();
        assert!((d0.center.x - 0.05 - 0.0045).abs() < 1e-12);
        assert!((d0.radius - 0.0045).abs() < 1e-15);
        let inst = generate(ObjectKind::Disks, 200, 7, Profile::Cluster, DEFAULT_ALPHA);
        let (norm, _) = normalize(&inst.objects).unwrap();
        for i in 0..200 {
            for j in i + 1..200 {
                assert_eq!(
                    objects_intersect(&inst.objects[i], &inst.objects[j]).unwrap(),
                    objects_intersect(&norm[i], &norm[j]).unwrap()
                );
            }
        }
    }

    #[test]
    fn generator_properties() {
        let a = emit_instance(&generate(ObjectKind::Disks, 300, 1, Profile::Uniform, DEFAULT_ALPHA));
        let b = emit_instance(&generate(ObjectKind::Disks, 300, 1, Profile::Uniform, DEFAULT_ALPHA));
        assert_eq!(a, b);
        assert_eq!(generate(ObjectKind::Disks, 1, 9, Profile::Path, DEFAULT_ALPHA).len(), 1);
        let inst = generate(ObjectKind::Disks, 1000, 5, Profile::Uniform, DEFAULT_ALPHA);
        for i in 0..1000 {
            for j in i + 1..1000 {
                assert!(!near_tangent(&inst.objects[i], &inst.objects[j]));
            }
        }
        let tri = generate(ObjectKind::Triangles, 200, 2, Profile::Path, DEFAULT_ALPHA);
        for w in tri.objects.windows(2) {
            assert!(objects_intersect(&w[0], &w[1]).unwrap());
        }
        for o in &tri.objects {
            assert!(min_angle(o.as_triangle().unwrap()).unwrap() >= DEFAULT_ALPHA);
        }
        let path = generate(ObjectKind::Disks, 200, 2, Profile::Path, DEFAULT_ALPHA);
        for w in path.objects.windows(2) {
            assert!(objects_intersect(&w[0], &w[1]).unwrap());
        }
    }
}

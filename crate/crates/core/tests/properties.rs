use proptest::prelude::*;

use diskpath::bit::bit;
use diskpath::geom::{min_angle, Disk, GeomObject, Point, Triangle, DEFAULT_ALPHA};
use diskpath::grids::make_family;
use diskpath::instance::normalize;
use diskpath::oracle::{bfs, bit_brute, build_explicit};
use diskpath::sssp::{check_neighbor_distance, check_tree, Algo, Solver};

fn arb_disks(max: usize) -> impl Strategy<Value = Vec<GeomObject>> {
    prop::collection::vec((0.0..1.0f64, 0.0..1.0f64, 0.005..0.15f64), 1..max)
        .prop_map(|v| v.into_iter().map(|(x, y, r)| GeomObject::Disk(Disk::new(Point::new(x, y), r).unwrap())).collect())
}

fn arb_triangles(max: usize) -> impl Strategy<Value = Vec<GeomObject>> {
    let tri = (0.0..1.0f64, 0.0..1.0f64, 0.01..0.15f64, 0.0..6.3f64, 0.6..1.0f64, 0.6..1.0f64).prop_filter_map(
        "not fat",
        |(x, y, s, phi, a, b)| {
            let c = Point::new(x, y);
            let p = |t: f64, r: f64| c + Point::polar(phi + t) * (s * r);
            let t = Triangle::new(p(0.0, 1.0), p(2.1, a), p(4.2, b)).ok()?;
            (min_angle(&t).ok()? >= DEFAULT_ALPHA).then_some(GeomObject::Triangle(t))
        },
    );
    prop::collection::vec(tri, 1..max)
}

fn sssp_matches_bfs(objs: &[GeomObject], source: u32) -> Result<(), TestCaseError> {
    let solver = Solver::new(objs, DEFAULT_ALPHA, Algo::Fast).unwrap();
    let (t, stats) = solver.sssp(source).unwrap();
    let g = build_explicit(&solver.objs).unwrap();
    let (dist, parent) = bfs(&g, &[source]).unwrap();
    prop_assert_eq!(&t.dist, &dist);
    prop_assert_eq!(&t.parent, &parent);
    prop_assert!(stats.candidate_sum <= 3 * objs.len());
    prop_assert!(check_tree(&solver.objs, &t).is_ok());
    prop_assert!(check_neighbor_distance(solver.backend.as_ref(), &t.dist).is_ok());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn disk_sssp_matches_bfs(objs in arb_disks(120), s in any::<prop::sample::Index>()) {
        let source = s.index(objs.len()) as u32;
        sssp_matches_bfs(&objs, source)?;
    }

    #[test]
    fn triangle_sssp_matches_bfs(objs in arb_triangles(80), s in any::<prop::sample::Index>()) {
        let source = s.index(objs.len()) as u32;
        sssp_matches_bfs(&objs, source)?;
    }

    #[test]
    fn bit_matches_brute(objs in prop_oneof![arb_disks(150), arb_triangles(100)], mask in prop::collection::vec(any::<bool>(), 150)) {
        let Ok((objs, _)) = normalize(&objs) else { return Ok(()) };
        let (blue, red): (Vec<u32>, Vec<u32>) = (0..objs.len() as u32).partition(|&i| mask[i as usize]);
        let got = bit(&objs, &blue, &red, DEFAULT_ALPHA, &make_family()).unwrap();
        prop_assert_eq!(got, bit_brute(&objs, &blue, &red));
    }

    #[test]
    fn normalization_keeps_the_graph(objs in arb_disks(80), shift in -50.0..50.0f64, scale in 0.01..100.0f64) {
        let ds: Vec<Disk> = objs.iter().map(|o| *o.as_disk().unwrap()).collect();
        // near-tangent pairs may flip under rounding
        prop_assume!(ds.iter().enumerate().all(|(i, a)| ds[..i].iter().all(|b| (a.center.dist(b.center) - a.radius - b.radius).abs() > 1e-9)));
        let moved: Vec<GeomObject> = objs.iter().map(|o| o.translate_scale(Point::new(shift, -shift), scale)).collect();
        let (a, _) = normalize(&objs).unwrap();
        let (b, _) = normalize(&moved).unwrap();
        prop_assert_eq!(build_explicit(&a).unwrap(), build_explicit(&b).unwrap());
    }
}

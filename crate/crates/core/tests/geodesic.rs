use dyck::constants::SurfaceParameters;
use dyck::geodesic::*;
use dyck::surface::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

fn dyck() -> ConeSurface {
    build_extremal_dyck(&SurfaceParameters::extremal()).unwrap()
}

fn trace_key(p: &GeodesicPath) -> (i64, GeodesicKind, Vec<usize>) {
    let mut cones = p.cone_points();
    cones.sort();
    ((p.length * 1e8).round() as i64, p.kind, cones)
}

fn short_base_curve(s: &ConeSurface) -> Vec<CurveSegment> {
    let mut out = Vec::new();
    for f in 0..s.num_faces() {
        for k in 0..3 {
            if s.edge_role(f, k) == EdgeRole::ShortBase && s.face_tag(f) != FaceTag::Band {
                let c = s.face_corners(f);
                let (a, b) = (c[k], c[(k + 1) % 3]);
                out.push(CurveSegment(f, a[0], a[1], b[0], b[1]));
            }
        }
    }
    out
}

// Closed geodesics.

#[test]
fn torus_lattice_geodesics() {
    let e = enumerate_closed_geodesics(&flat_torus(1.0, 1.0), 1.5).unwrap();
    assert!(!e.partial);
    let lengths: Vec<f64> = e.paths.iter().map(|p| p.length).collect();
    assert_eq!(lengths.len(), 4, "{lengths:?}");
    for (l, want) in lengths.iter().zip([1.0, 1.0, 2f64.sqrt(), 2f64.sqrt()]) {
        assert!((l - want).abs() < 1e-12, "{lengths:?}");
    }
    assert!(e.paths.iter().all(|p| p.kind == GeodesicKind::Cylinder && !p.orientation_reversing));
}

#[test]
fn torus_and_klein_systole() {
    assert!((systole(&flat_torus(1.0, 1.0), 2.0).unwrap().length - 1.0).abs() < 1e-12);
    let k = systole(&flat_klein_bottle(1.0, 1.0), 2.0).unwrap();
    assert!((k.length - 1.0).abs() < 1e-12);
    let e = enumerate_closed_geodesics(&flat_klein_bottle(1.0, 1.0), 1.01).unwrap();
    assert!(e.paths.iter().any(|p| p.orientation_reversing));
    assert!(e.paths.iter().any(|p| !p.orientation_reversing));
}

#[test]
fn rectangular_torus_systole_is_short_side() {
    let s = systole(&flat_torus(0.7, 1.3), 2.0).unwrap();
    assert!((s.length - 0.7).abs() < 1e-12);
}

#[test]
fn dyck_has_unit_systole() {
    let s = systole(&dyck(), 1.2).unwrap();
    assert!((s.length - 1.0).abs() < 1e-6, "{}", s.length);
}

#[test]
fn dyck_no_shorter_geodesic() {
    let e = enumerate_closed_geodesics(&dyck(), 1.2).unwrap();
    assert!(!e.partial);
    let min = e.paths.iter().map(|p| p.length).fold(f64::INFINITY, f64::min);
    assert!((min - 1.0).abs() < 1e-6);
    assert!(e.paths.iter().all(|p| p.length >= 1.0 - 1e-6));
}

#[test]
fn dyck_systolic_families_present() {
    let s = dyck();
    let e = enumerate_closed_geodesics(&s, 1.01).unwrap();
    let fams: BTreeSet<Family> = e.paths.iter().map(|p| classify_family(&s, p)).collect();
    for f in [Family::MobiusSoul, Family::ShortBaseOrthogonal, Family::LegOrthogonal] {
        assert!(fams.contains(&f), "missing {f:?} in {fams:?}");
    }
    let soul = e.paths.iter().find(|p| classify_family(&s, p) == Family::MobiusSoul).unwrap();
    assert!(soul.orientation_reversing);
    assert_eq!(soul.kind, GeodesicKind::Soul);
}

#[test]
fn dyck_paths_are_local_geodesics() {
    let s = dyck();
    let e = enumerate_closed_geodesics(&s, 1.2).unwrap();
    assert!(!e.paths.is_empty());
    for p in &e.paths {
        verify_local_geodesic(&s, p).unwrap_or_else(|m| panic!("{m}: {p:?}"));
        assert!((p.segment_length_sum() - p.length).abs() < 1e-12);
        assert!(p.closed);
    }
}

#[test]
fn enumeration_sorted_and_monotone_in_bound() {
    let s = dyck();
    let small = enumerate_closed_geodesics(&s, 1.01).unwrap();
    let large = enumerate_closed_geodesics(&s, 1.2).unwrap();
    assert!(large.paths.windows(2).all(|w| w[0].length <= w[1].length + 1e-9));
    let big: BTreeSet<_> = large.paths.iter().map(trace_key).collect();
    for p in &small.paths {
        assert!(big.contains(&trace_key(p)), "{:?} missing at 1.2", trace_key(p));
    }
    let t = flat_torus(1.0, 1.0);
    let a = enumerate_closed_geodesics(&t, 1.2).unwrap();
    let b = enumerate_closed_geodesics(&t, 2.3).unwrap();
    let bk: BTreeSet<_> = b.paths.iter().map(trace_key).collect();
    assert!(a.paths.iter().all(|p| bk.contains(&trace_key(p))));
    assert!(b.paths.len() > a.paths.len());
}

#[test]
fn systole_invariant_under_refinement() {
    let s = dyck().subdivide(2);
    let sys = systole(&s, 1.05).unwrap();
    assert!((sys.length - 1.0).abs() < 1e-9);
    let t = systole(&flat_klein_bottle(1.0, 1.0).subdivide(3), 1.5).unwrap();
    assert!((t.length - 1.0).abs() < 1e-9);
}

#[test]
fn systole_invariant_under_face_relabelling() {
    let s = dyck();
    let mut perm: Vec<usize> = (0..s.num_faces()).collect();
    perm.reverse();
    perm.rotate_left(5);
    let r = s.relabel_faces(&perm).unwrap();
    let a = systole(&s, 1.2).unwrap();
    let b = systole(&r, 1.2).unwrap();
    assert!((a.length - b.length).abs() < 1e-12);
    let ea = enumerate_closed_geodesics(&s, 1.01).unwrap();
    let eb = enumerate_closed_geodesics(&r, 1.01).unwrap();
    assert_eq!(ea.paths.len(), eb.paths.len());
    assert!(s.relabel_faces(&[0, 0]).is_err());
}

#[test]
fn systole_errors() {
    let s = dyck();
    assert_eq!(systole(&s, 0.5).unwrap_err(), GeodesicError::NoneFound(0.5));
    assert!(matches!(systole(&s, 0.0), Err(GeodesicError::BadBound(_))));
    assert!(matches!(systole(&flat_cylinder(1.0, 1.0, 2, 2), 2.0), Err(GeodesicError::NotClosed)));
    let opts = EnumerationOptions { l_max: 1.2, budget: 100 };
    assert_eq!(systole_with(&s, &opts).unwrap_err(), GeodesicError::BudgetExhausted(100));
    let e = enumerate_closed_geodesics_with(&s, &opts).unwrap();
    assert!(e.partial);
}

#[test]
fn systole_refuses_positive_curvature() {
    // Doubled equilateral triangle: a flat sphere with three cone points of
    // angle 2π/3.
    let g = |k| Gluing { face: 0, slot: k, other_face: 1, other_slot: k, reversing: true };
    let pillow = ConeSurface::new("pillow", vec![[1.0; 3]; 2], vec![g(0), g(1), g(2)], Marks::default()).unwrap();
    assert!(pillow.is_closed());
    assert!(matches!(systole(&pillow, 2.0), Err(GeodesicError::PositiveCurvature(a)) if a < 2.0 * PI - 0.1));
}

#[test]
fn saddle_connections_of_dyck() {
    let s = dyck();
    let m = s.marked_points();
    let h = SurfaceParameters::extremal();
    let side = h.h / h.theta.sin();
    let list = saddle_connections(&s, 0.3).unwrap();
    let from_w: Vec<_> = list.iter().filter(|c| c.start == m.weierstrass[0]).collect();
    assert!(from_w.iter().any(|c| c.end == m.p.unwrap() && (c.length - side).abs() < 1e-12));
    assert!(list.iter().all(|c| c.length <= 0.3 + 1e-12));
}

// Distances.

#[test]
fn distance_within_a_face_is_euclidean() {
    let t = flat_torus(1.0, 1.0);
    let c = t.face_corners(0);
    let x = [(c[0][0] + c[1][0] + c[2][0]) / 3.0, (c[0][1] + c[1][1] + c[2][1]) / 3.0];
    let y = [0.5 * (x[0] + c[1][0]), 0.5 * (x[1] + c[1][1])];
    let d = point_distance(&t, &SurfacePoint::new(0, x), &SurfacePoint::new(0, y), 2.0).unwrap().unwrap();
    let e = (x[0] - y[0]).hypot(x[1] - y[1]);
    assert!((d - e).abs() < 1e-14);
}

#[test]
fn distance_wraps_around_torus() {
    let t = flat_torus(1.0, 1.0);
    let v = SurfacePoint::vertex(&t, 0);
    assert_eq!(point_distance(&t, &v, &v, 1.0).unwrap(), Some(0.0));
    let c = t.face_corners(0);
    let mid = [0.5 * (c[0][0] + c[1][0]), 0.5 * (c[0][1] + c[1][1])];
    let d = point_distance(&t, &v, &SurfacePoint::new(0, mid), 2.0).unwrap().unwrap();
    assert!((d - 0.5 * (c[1][0] - c[0][0]).hypot(c[1][1] - c[0][1])).abs() < 1e-12);
    assert_eq!(point_distance(&t, &v, &SurfacePoint::new(0, mid), 0.1).unwrap(), None);
}

#[test]
fn weierstrass_pairs_at_half() {
    let s = dyck();
    let w = s.marked_points().weierstrass;
    assert_eq!(w.len(), 3);
    for i in 0..3 {
        for j in i + 1..3 {
            let d = point_distance(&s, &SurfacePoint::vertex(&s, w[i]), &SurfacePoint::vertex(&s, w[j]), 2.0)
                .unwrap()
                .unwrap();
            assert!((d - 0.5).abs() < 1e-6, "{d}");
        }
    }
}

#[test]
fn weierstrass_points_far_from_band() {
    let s = dyck();
    let p = SurfaceParameters::extremal();
    let base = short_base_curve(&s);
    assert!(!base.is_empty());
    for &w in &s.marked_points().weierstrass {
        let d = distance_to_curve(&s, &SurfacePoint::vertex(&s, w), &base, 2.0).unwrap().unwrap();
        assert!(d >= p.h - 1e-6, "{d}");
        assert!((d - p.h).abs() < 1e-9);
    }
}

#[test]
fn collar_boundary_far_from_soul() {
    let c = build_collar_flat(&SurfaceParameters::extremal()).unwrap();
    let soul = c.marked_points().soul;
    let mut min = f64::INFINITY;
    for (f, k) in c.boundary_slots() {
        let p = c.face_corners(f);
        for i in 0..=8 {
            let t = i as f64 / 8.0;
            let x = [p[k][0] + t * (p[(k + 1) % 3][0] - p[k][0]), p[k][1] + t * (p[(k + 1) % 3][1] - p[k][1])];
            let d = distance_to_curve(&c, &SurfacePoint::new(f, x), &soul, 3.0).unwrap().unwrap();
            min = min.min(d);
        }
    }
    assert!(min >= 0.5 - 1e-6, "{min}");
    assert!(min <= 0.5 + 1e-6, "{min}");
}

#[test]
fn distance_rejects_bad_points() {
    let t = flat_torus(1.0, 1.0);
    let ok = SurfacePoint::vertex(&t, 0);
    assert!(matches!(point_distance(&t, &SurfacePoint::new(9, [0.0, 0.0]), &ok, 1.0), Err(GeodesicError::BadPoint(_))));
    assert!(matches!(point_distance(&t, &SurfacePoint::new(0, [5.0, 5.0]), &ok, 1.0), Err(GeodesicError::BadPoint(_))));
    assert!(matches!(point_distance(&t, &ok, &ok, -1.0), Err(GeodesicError::BadBound(_))));
}

// Sublevel areas.

#[test]
fn cylinder_band_area() {
    let c = flat_cylinder(2.0, 1.0, 8, 4);
    assert!((c.soul_length() - 2.0).abs() < 1e-12);
    let a = sublevel_area(&c, &c.marked_points().soul, 0.25, 0.02);
    assert!((a - 1.0).abs() < 1e-9, "{a}");
    // A soul across faces puts the kink of the field off the grid.
    let odd = flat_cylinder(2.0, 1.0, 5, 3);
    let b = sublevel_area(&odd, &odd.marked_points().soul, 0.25, 0.02);
    assert!((b - 1.0).abs() < 0.02 * 2.0, "{b}");
}

#[test]
fn sublevel_beyond_diameter_is_total_area() {
    let c = flat_cylinder(2.0, 1.0, 6, 2);
    let a = sublevel_area(&c, &c.marked_points().soul, 5.0, 0.05);
    assert!((a - c.area()).abs() < 1e-12);
    let col = build_collar_flat(&SurfaceParameters::extremal()).unwrap();
    let b = sublevel_area(&col, &col.marked_points().soul, 10.0, 0.05);
    assert!((b - col.area()).abs() < 1e-9);
}

#[test]
fn collar_sublevel_matches_closed_form() {
    let p = SurfaceParameters::extremal();
    let col = build_collar_flat(&p).unwrap();
    let r = sublevel_area_richardson(&col, &col.marked_points().soul, 0.5, 0.01);
    let closed = 2.0 * p.area() - 12.0 * ((p.theta / 2.0).tan() - p.theta / 2.0) * p.h * p.h;
    assert!((r.area - closed).abs() < 1e-3, "{r:?} vs {closed}");
    assert!(r.fine >= r.coarse - 1e-12);
}

#[test]
fn sublevel_monotone_in_radius() {
    let col = build_collar_flat(&SurfaceParameters::extremal()).unwrap();
    let g = SteinerGraph::new(&col, 0.02);
    let f = DistanceField::to_curve(&col, &g, &col.marked_points().soul);
    let mut prev = 0.0;
    for i in 0..=24 {
        let a = f.sublevel_area(0.05 * i as f64);
        assert!(a >= prev - 1e-12, "{i}: {a} < {prev}");
        prev = a;
    }
    assert!((prev - col.area()).abs() < 1e-9);
}

// Voronoi cells and comparison polygons.

#[test]
fn dyck_voronoi_cells() {
    let s = dyck();
    let p = SurfaceParameters::extremal();
    let m = s.marked_points();
    let want = p.h * (1.0 - 4.0 * p.h * p.h).sqrt();
    let cells = voronoi_cells(&s, &m.weierstrass, 0.01, 1e-9);
    assert_eq!(cells.len(), 3);
    let band: f64 = (0..s.num_faces()).filter(|&f| s.face_tag(f) == FaceTag::Band).map(|f| s.face_area(f)).sum();
    let total: f64 = cells.iter().map(|c| c.area).sum();
    assert!((total - (s.area() - band)).abs() < 1e-9);
    for c in &cells {
        assert!((c.area - want).abs() < 1e-3, "{}", c.area);
        assert!(c.boundary_vertices.contains(&m.p.unwrap()));
        assert!(c.boundary_vertices.contains(&m.q.unwrap()));
        assert!(!c.boundary.is_empty());
    }
}

#[test]
fn torus_single_cell_is_everything() {
    let t = flat_torus(1.0, 1.0);
    let cells = voronoi_cells(&t, &[0], 0.05, 1e-9);
    assert!((cells[0].area - 1.0).abs() < 1e-12);
}

fn cd(distance: f64, angle: f64) -> CenterDistance {
    CenterDistance { distance, angle }
}

#[test]
fn comparison_polygon_square() {
    let q = comparison_polygon(&[cd(1.0, 0.0), cd(1.0, FRAC_PI_2), cd(1.0, PI), cd(1.0, -FRAC_PI_2)]).unwrap();
    assert!(q.bounded);
    assert!((q.area - 1.0).abs() < 1e-12);
    assert_eq!(q.vertices.len(), 4);
}

#[test]
fn comparison_polygon_unbounded_and_invalid() {
    let q = comparison_polygon(&[cd(1.0, FRAC_PI_2), cd(1.0, -FRAC_PI_2)]).unwrap();
    assert!(!q.bounded);
    assert!(q.area.is_infinite());
    assert!(comparison_polygon(&[cd(1.0, 0.0)]).is_err());
    assert!(comparison_polygon(&[cd(-1.0, 0.0), cd(1.0, 1.0)]).is_err());
}

#[test]
fn extremal_hexagon_polygon() {
    let p = SurfaceParameters::extremal();
    let c = hexagon_constraints(p.alpha, p.h, p.short_side);
    assert_eq!(c.len(), 6);
    assert!(c.iter().filter(|x| (x.distance - 0.5).abs() < 1e-12).count() == 4);
    assert!(c.iter().filter(|x| (x.distance - 2.0 * p.h).abs() < 1e-15).count() == 2);
    let q = comparison_polygon(&c).unwrap();
    let want = p.h * (1.0 - 4.0 * p.h * p.h).sqrt();
    assert!((q.area - want).abs() < 1e-9, "{}", q.area);
    assert_eq!(q.vertices.len(), 6);
}

#[test]
fn surface_polygon_equals_voronoi_cell_on_dyck() {
    let s = dyck();
    let m = s.marked_points();
    let cells = voronoi_cells(&s, &m.weierstrass, 0.01, 1e-9);
    for (i, &w) in m.weierstrass.iter().enumerate() {
        let q = comparison_polygon(&voronoi_constraints(&s, w, &m.weierstrass, 1.2).unwrap()).unwrap();
        assert!((q.area - cells[i].area).abs() < 1e-3);
    }
}

#[test]
fn surface_polygon_below_voronoi_cell_on_random_surfaces() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for _ in 0..20 {
        let alpha = rng.gen_range(FRAC_PI_3..1.5);
        let h = rng.gen_range(0.05..0.4);
        let b = rng.gen_range(0.1..0.6);
        let delta = rng.gen_range(0.05..0.5);
        let s = build_dyck_like(alpha, h, b, delta).unwrap();
        assert!(s.min_cone_angle() >= 2.0 * PI - 1e-9);
        let m = s.marked_points();
        let cells = voronoi_cells(&s, &m.weierstrass, 0.01, 1e-9);
        for (i, &w) in m.weierstrass.iter().enumerate() {
            let q = comparison_polygon(&voronoi_constraints(&s, w, &m.weierstrass, 3.0).unwrap()).unwrap();
            assert!(q.bounded);
            assert!(q.area <= cells[i].area + 1e-3, "{alpha} {h} {b} {delta}: {} > {}", q.area, cells[i].area);
        }
    }
}

#[test]
fn saddle_connection_along_an_edge_keeps_its_length() {
    // With α = π/3 the shortest loop is a chain of saddle connections, one
    // of which runs along a mesh edge.
    let s = build_dyck_like(FRAC_PI_3, 0.05, 0.3660939523240765, 0.39349709871090793).unwrap();
    let e = enumerate_closed_geodesics(&s, 0.8).unwrap();
    assert!(e.paths.iter().any(|p| p.kind == GeodesicKind::SaddleChain));
    for p in &e.paths {
        assert!((p.segment_length_sum() - p.length).abs() < 1e-12, "{p:?}");
        verify_local_geodesic(&s, p).unwrap();
    }
    let tri = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
    let (a, b) = plane::clip_line_to_triangle([0.0, 1e-17], [1.0, 1e-17], &tri).unwrap();
    assert!(a.abs() < 1e-12 && (b - 1.0).abs() < 1e-12, "{a} {b}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn random_surface_paths_are_local_geodesics(
        alpha in FRAC_PI_3..1.5f64,
        h in 0.05..0.4f64,
        b in 0.1..0.6f64,
        delta in 0.05..0.5f64,
    ) {
        let s = build_dyck_like(alpha, h, b, delta).unwrap();
        let sys = systole(&s, 4.0).unwrap();
        let e = enumerate_closed_geodesics(&s, sys.length * 1.1).unwrap();
        prop_assert!(!e.partial);
        prop_assert!((e.paths[0].length - sys.length).abs() < 1e-12);
        for p in &e.paths {
            prop_assert!(verify_local_geodesic(&s, p).is_ok(), "{:?}", verify_local_geodesic(&s, p));
        }
    }

    #[test]
    fn sublevel_area_monotone(r1 in 0.0..0.6f64, dr in 0.0..0.3f64, half_rows in 1usize..3) {
        let c = flat_cylinder(2.0, 1.0, 6, 2 * half_rows);
        let soul = c.marked_points().soul;
        let a = sublevel_area(&c, &soul, r1, 0.05);
        let b = sublevel_area(&c, &soul, r1 + dr, 0.05);
        prop_assert!(b >= a - 1e-12);
        prop_assert!((a - 4.0 * r1.min(0.5)).abs() < 1e-9);
    }
}

use dyck::surface::{
    build_collar_flat, build_dyck_like, build_extremal_dyck, build_trapezoid, check_symmetry, collar_via_cover,
    cut_along_graph, dyck_cut_graph, export_mesh, find_isomorphism, flat_klein_bottle, flat_torus, import_json,
    orientation_double_cover, reglue, square_torus_x, to_json, to_obj, CutGraph, MeshFormat, SurfaceError, Trapezoid,
};
use dyck::{ConeSurface, SurfaceParameters};
use proptest::prelude::*;
use std::f64::consts::PI;

/// Independent oracle values at 25 digits.
const AREA: f64 = 1.152794345841759294916655;
const ALPHA: f64 = 1.104300546402908235844963;
const THETA: f64 = 0.9329915607839767667727181;
const H: f64 = 0.2248796300387821564701181;

fn dyck() -> ConeSurface {
    build_extremal_dyck(&SurfaceParameters::extremal()).unwrap()
}

fn sorted_cone_angles(s: &ConeSurface, tol: f64) -> Vec<f64> {
    let mut a: Vec<f64> = s.cone_points(tol).into_iter().map(|(_, a)| a).collect();
    a.sort_by(f64::total_cmp);
    a
}

#[test]
fn trapezoid_dimensions() {
    let t = build_trapezoid(&SurfaceParameters::extremal()).unwrap();
    let cot = 1.0 / ALPHA.tan();
    assert!((t.leg - H / ALPHA.sin()).abs() < 1e-12);
    assert!((t.long_side - (1.0 / 3.0 + 2.0 * H * cot)).abs() < 1e-12);
    assert!((t.leg - 0.2517827).abs() < 1e-6);
    assert!((t.long_side - 0.5598165).abs() < 1e-6);
    let hexagon_side = 0.25 / (THETA / 2.0).cos();
    assert!((hexagon_side - H / THETA.sin()).abs() < 1e-12);
    assert!((hexagon_side - 0.2799082).abs() < 1e-6);
    assert!((t.leg - hexagon_side).abs() > 0.02);
    let v = t.vertices;
    let signed: f64 = (0..4).map(|i| v[i][0] * v[(i + 1) % 4][1] - v[(i + 1) % 4][0] * v[i][1]).sum();
    assert!(signed > 0.0, "counterclockwise");
    assert!((0.5 * signed - t.area()).abs() < 1e-12);
}

#[test]
fn rectangle_limit() {
    let t = Trapezoid::new(PI / 2.0, 0.1, 1.0 / 3.0).unwrap();
    assert!((t.long_side - 1.0 / 3.0).abs() < 1e-15);
    assert!((t.leg - 0.1).abs() < 1e-15);
}

#[test]
fn trapezoid_rejects_broken_relations() {
    let mut p = SurfaceParameters::extremal();
    p.h += 1e-6;
    assert!(matches!(build_trapezoid(&p), Err(SurfaceError::BadParameters(_))));
    assert!(matches!(build_extremal_dyck(&p), Err(SurfaceError::BadParameters(_))));
}

#[test]
fn extremal_surface_topology_and_area() {
    let d = dyck();
    assert!(d.is_closed());
    assert!(!d.is_orientable());
    assert_eq!(d.euler_characteristic(), -1);
    assert!((d.area() - AREA).abs() < 1e-9);
    let radicand = 169.0 - 38.0 * 19f64.sqrt();
    assert!((d.area() - (1.0 + radicand.sqrt() / 12.0)).abs() < 1e-12);
    assert!(d.gauss_bonnet_residual() < 1e-9);
    assert!((d.total_curvature() + 2.0 * PI).abs() < 1e-9);
}

#[test]
fn extremal_cone_angles() {
    let d = dyck();
    let a = sorted_cone_angles(&d, 1e-9);
    assert_eq!(a.len(), 8);
    for x in &a[..2] {
        assert!((x - 6.0 * ALPHA).abs() < 1e-9, "{x}");
        assert!((x - 6.625803).abs() < 1e-6);
    }
    for x in &a[2..] {
        assert!((x - (2.0 * PI + THETA)).abs() < 1e-9, "{x}");
        assert!((x - 7.216177).abs() < 1e-6);
    }
    assert!(d.min_cone_angle() >= 2.0 * PI - 1e-9);
    let m = d.marked_points();
    assert_eq!(m.weierstrass.len(), 3);
    for &w in &m.weierstrass {
        assert!((d.vertices()[w].angle - 2.0 * PI).abs() < 1e-12);
    }
    for v in [m.p.unwrap(), m.q.unwrap()] {
        assert!((d.vertices()[v].angle - 6.0 * ALPHA).abs() < 1e-9);
    }
    assert_ne!(m.p, m.q);
}

#[test]
fn soul_is_a_unit_loop() {
    let d = dyck();
    assert!((d.soul_length() - 1.0).abs() < 1e-12);
}

#[test]
fn double_cover_of_extremal_surface() {
    let d = dyck();
    let c = orientation_double_cover(&d).unwrap();
    assert!(c.is_orientable());
    assert!(c.is_closed());
    assert_eq!(c.euler_characteristic(), -2);
    assert!((c.area() - 2.0 * AREA).abs() < 1e-9);
    assert!((c.area() - 2.305589).abs() < 1e-6);
    assert!((c.total_curvature() + 4.0 * PI).abs() < 1e-9);
    assert!(c.gauss_bonnet_residual() < 1e-9);
    let a = sorted_cone_angles(&c, 1e-9);
    assert_eq!(a.len(), 16);
    assert!(a[..4].iter().all(|x| (x - 6.0 * ALPHA).abs() < 1e-9));
    assert!(a[4..].iter().all(|x| (x - 2.0 * PI - THETA).abs() < 1e-9));
    assert_eq!(c.marks().weierstrass.len(), 6);
    assert!((c.soul_length() - 2.0).abs() < 1e-12);
}

#[test]
fn double_cover_of_klein_bottle_is_torus() {
    let k = flat_klein_bottle(1.0, 1.0);
    assert!(!k.is_orientable());
    assert_eq!(k.euler_characteristic(), 0);
    let t = orientation_double_cover(&k).unwrap();
    assert!(t.is_orientable());
    assert!(t.is_closed());
    assert_eq!(t.euler_characteristic(), 0);
    assert!((t.area() - 2.0).abs() < 1e-12);
    assert!(t.cone_points(1e-9).is_empty());
}

#[test]
fn double_cover_rejects_orientable_input() {
    assert_eq!(orientation_double_cover(&flat_torus(1.0, 1.0)).unwrap_err(), SurfaceError::AlreadyOrientable);
}

#[test]
fn cut_along_gamma() {
    let d = dyck();
    let g = dyck_cut_graph(&d).unwrap();
    assert_eq!(g.edges().len(), 6);
    let m = d.marked_points();
    let mut ends = g.endpoints.clone();
    ends.sort();
    let mut pq = vec![m.p.unwrap(), m.q.unwrap()];
    pq.sort();
    assert_eq!(ends, pq);
    assert_eq!(g.paths.len(), 3);
    let cut = cut_along_graph(&d, &g).unwrap();
    let s = &cut.surface;
    assert_eq!(s.boundary_components(), 1);
    assert_eq!(s.boundary_slots().len(), 12);
    // Γ has 5 vertices and 6 edges; its boundary circle has 12 vertices.
    assert_eq!(s.euler_characteristic(), -1 - 6 + (12 - 5));
    assert_eq!(s.euler_characteristic(), 0);
    assert!((s.area() - d.area()).abs() < 1e-12);
    assert!(s.gauss_bonnet_residual() < 1e-9);
    let back = reglue(s, &cut.removed).unwrap();
    assert_eq!(back, d);
}

#[test]
fn cut_along_empty_graph_is_identity() {
    let d = dyck();
    let cut = cut_along_graph(&d, &CutGraph::empty()).unwrap();
    assert_eq!(cut.surface, d);
    assert!(cut.removed.is_empty());
}

#[test]
fn torus_cut_along_loop_is_cylinder() {
    let t = square_torus_x();
    // Bottom side of the square: one mesh edge forming an essential loop.
    let bottom = (0..t.num_faces())
        .flat_map(|f| (0..3).map(move |k| (f, k)))
        .find(|&(f, k)| {
            let p = t.face_corners(f);
            let (a, b) = (p[k], p[(k + 1) % 3]);
            t.partner(f, k).is_some() && (t.lengths()[f][k] - 1.0).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12
        })
        .unwrap();
    let g = CutGraph::from_edges(&t, &[bottom]).unwrap();
    let cut = cut_along_graph(&t, &g).unwrap();
    assert_eq!(cut.surface.euler_characteristic(), 0);
    assert_eq!(cut.surface.boundary_components(), 2);
    assert!(cut.surface.gauss_bonnet_residual() < 1e-9);
}

#[test]
fn cut_graph_errors() {
    let d = dyck();
    let g = dyck_cut_graph(&d).unwrap();
    let one = g.paths[0][0];
    assert!(matches!(CutGraph::from_edges(&d, &[one]), Err(SurfaceError::BadCut(_))));
    let e = g.edges();
    assert!(matches!(CutGraph::from_edges(&d, &[e[0], e[0]]), Err(SurfaceError::BadCut(_))));
    let cut = cut_along_graph(&d, &g).unwrap().surface;
    let b = cut.boundary_slots()[0];
    assert!(matches!(CutGraph::from_edges(&cut, &[b]), Err(SurfaceError::BadCut(_))));
}

#[test]
fn flat_collar() {
    let p = SurfaceParameters::extremal();
    let a = build_collar_flat(&p).unwrap();
    assert!(a.is_orientable());
    assert_eq!(a.euler_characteristic(), 0);
    assert_eq!(a.boundary_components(), 2);
    assert!((a.area() - 2.0 * AREA).abs() < 1e-9);
    assert!(a.gauss_bonnet_residual() < 1e-9);
    assert!((a.soul_length() - 2.0).abs() < 1e-12);
}

#[test]
fn collar_assemblies_are_isometric() {
    let p = SurfaceParameters::extremal();
    let direct = build_collar_flat(&p).unwrap();
    let generic = collar_via_cover(&p).unwrap();
    assert_eq!(generic.euler_characteristic(), 0);
    assert_eq!(generic.boundary_components(), 2);
    assert!(find_isomorphism(&direct, &generic, 1e-9).is_some());
}

#[test]
fn symmetry_group_of_extremal_surface() {
    let r = check_symmetry(&dyck());
    assert_eq!(r.order, 12);
    assert!(r.passed);
}

#[test]
fn perturbed_surface_loses_symmetry() {
    let d = dyck();
    let l = d.lengths()[0];
    // Shrink the two sides of face 0 that are not glued along the perturbed slot.
    let broken = d.with_face_lengths_unchecked(0, [l[0], l[1] * 1.001, l[2]]);
    let r = check_symmetry(&broken);
    assert!(r.order < 12);
    assert!(!r.passed);
}

#[test]
fn square_torus_symmetries() {
    assert!(check_symmetry(&square_torus_x()).order >= 8);
}

#[test]
fn json_round_trip() {
    let d = dyck();
    let text = to_json(&d);
    let back = import_json(&text).unwrap();
    assert_eq!(back, d);
    assert_eq!(back.marked_points(), d.marked_points());
    assert_eq!(back.name(), d.name());
    let keys: Vec<usize> = ["\"name\"", "\"faces\"", "\"gluings\"", "\"marks\""]
        .iter()
        .map(|k| text.find(k).unwrap())
        .collect();
    assert!(keys.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn file_export() {
    let d = dyck();
    let dir = std::env::temp_dir().join(format!("dyck-export-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let json = dir.join("d.json");
    export_mesh(&d, &json, MeshFormat::Json).unwrap();
    assert_eq!(import_json(&std::fs::read_to_string(&json).unwrap()).unwrap(), d);
    let obj = dir.join("d.obj");
    export_mesh(&d, &obj, MeshFormat::Obj).unwrap();
    let text = std::fs::read_to_string(&obj).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), d.num_faces());
    assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 3 * d.num_faces());
    assert!(matches!(
        export_mesh(&d, &dir.join("missing").join("x.json"), MeshFormat::Json),
        Err(SurfaceError::Io(_))
    ));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn obj_faces_are_isometric() {
    let d = dyck();
    let text = to_obj(&d);
    let v: Vec<[f64; 2]> = text
        .lines()
        .filter_map(|l| l.strip_prefix("v "))
        .map(|l| {
            let x: Vec<f64> = l.split_whitespace().map(|t| t.parse().unwrap()).collect();
            [x[0], x[1]]
        })
        .collect();
    for f in 0..d.num_faces() {
        for k in 0..3 {
            let (a, b) = (v[3 * f + k], v[3 * f + (k + 1) % 3]);
            assert!(((a[0] - b[0]).hypot(a[1] - b[1]) - d.lengths()[f][k]).abs() < 1e-12);
        }
    }
}

#[test]
fn klein_bottle_golden_json() {
    let golden = include_str!("data/klein.json");
    assert_eq!(to_json(&flat_klein_bottle(1.0, 1.0)), golden);
}

#[test]
fn import_rejects_malformed_input() {
    assert!(matches!(import_json("{"), Err(SurfaceError::Format(_))));
    let bad = r#"{"name":"x","faces":[[1,1,3]],"gluings":[],"marks":{"weierstrass":[],"p":null,"q":null,"soul":[]}}"#;
    assert_eq!(import_json(bad).unwrap_err(), SurfaceError::Degenerate(0));
}

#[test]
fn length_mismatch_rejected() {
    let t = flat_torus(1.0, 1.0);
    let mut g = t.gluings().to_vec();
    let first = g[0];
    g[0].other_slot = (first.other_slot + 1) % 3;
    let l: Vec<[f64; 3]> = t.lengths().to_vec();
    assert!(ConeSurface::new("x", l, g, Default::default()).is_err());
}

#[test]
fn refinement_preserves_geometry() {
    let d = dyck();
    let r = d.subdivide(3);
    assert_eq!(r.num_faces(), 9 * d.num_faces());
    assert_eq!(r.euler_characteristic(), -1);
    assert!((r.area() - d.area()).abs() < 1e-12);
    assert_eq!(sorted_cone_angles(&r, 1e-9).len(), 8);
    assert!((r.soul_length() - 1.0).abs() < 1e-12);
    assert_eq!(r.marked_points().weierstrass.len(), 3);
}

fn random_dyck_like() -> impl Strategy<Value = ConeSurface> {
    (PI / 3.0..PI / 2.0, 0.05f64..0.4, 0.1f64..0.6, 0.05f64..0.5)
        .prop_map(|(a, h, b, delta)| build_dyck_like(a, h, b, delta).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gauss_bonnet_on_random_surfaces(s in random_dyck_like()) {
        prop_assert!(s.gauss_bonnet_residual() < 1e-9);
        prop_assert_eq!(s.euler_characteristic(), -1);
        prop_assert!(!s.is_orientable());
    }

    #[test]
    fn cover_doubles_area_and_cone_points(s in random_dyck_like()) {
        let c = orientation_double_cover(&s).unwrap();
        prop_assert!(c.is_orientable());
        prop_assert!((c.area() - 2.0 * s.area()).abs() < 1e-9);
        prop_assert_eq!(c.euler_characteristic(), 2 * s.euler_characteristic());
        let a = sorted_cone_angles(&s, 1e-9);
        let b = sorted_cone_angles(&c, 1e-9);
        prop_assert_eq!(b.len(), 2 * a.len());
        for (i, x) in a.iter().enumerate() {
            prop_assert!((b[2 * i] - x).abs() < 1e-9 && (b[2 * i + 1] - x).abs() < 1e-9);
        }
        prop_assert!(c.gauss_bonnet_residual() < 1e-9);
    }

    #[test]
    fn cut_then_reglue_is_identity(s in random_dyck_like(), mask in 0u8..8) {
        let g = dyck_cut_graph(&s).unwrap();
        let chosen: Vec<(usize, usize)> = g
            .paths
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .flat_map(|(_, p)| p.iter().copied())
            .collect();
        let sub = CutGraph::from_edges(&s, &chosen);
        prop_assume!(sub.is_ok());
        let cut = cut_along_graph(&s, &sub.unwrap()).unwrap();
        prop_assert!((cut.surface.area() - s.area()).abs() < 1e-12);
        prop_assert_eq!(cut.surface.boundary_slots().len(), 2 * chosen.len());
        prop_assert!(cut.surface.gauss_bonnet_residual() < 1e-9);
        prop_assert_eq!(reglue(&cut.surface, &cut.removed).unwrap(), s);
    }

    #[test]
    fn json_round_trip_random(s in random_dyck_like()) {
        prop_assert_eq!(import_json(&to_json(&s)).unwrap(), s);
    }

    #[test]
    fn random_surfaces_keep_symmetry(s in random_dyck_like()) {
        prop_assert_eq!(check_symmetry(&s).order, 12);
    }
}

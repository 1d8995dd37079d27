use dyck::capacity::*;
use dyck::constants::SurfaceParameters;
use dyck::surface::{build_collar_flat, build_extremal_dyck, flat_cylinder, flat_torus, planar_annulus};
use proptest::prelude::*;
use std::f64::consts::{FRAC_PI_2, PI};

// Independent high-precision values.
const ELL: f64 = 4.397_146_055_841_871_565_332_035;
const A_TWELFTH: f64 = 1.272_859_385_156_926_236_600_633;
const MUETZEL: f64 = 2.294_609_470_842_138_974_901_344;
const UPPER: f64 = 2.283_093_046_469_847_807_731_949;
const CORRECTION: f64 = 0.001_874_637_101_139;
const AREA: f64 = 1.152_794_345_841_759_294_916_655;

#[test]
fn gudermann_values() {
    assert_eq!(gudermann(0.0), FRAC_PI_2);
    for s in [0.3, 1.0, 5.0] {
        assert!((gudermann(s) + gudermann(-s) - PI).abs() < 1e-12);
    }
    assert!((gudermann(1.0994) - 2.498_564_022_691_943).abs() < 1e-12);
    assert!((gudermann(1.0994) - 2.498).abs() < 1e-3);
    assert_eq!(gudermann(1e6), PI);
}

#[test]
fn fermi_half_width_values() {
    assert!((fermi_half_width(0.0, ELL).unwrap() - ELL / 4.0).abs() < 1e-14);
    assert!((fermi_half_width(ELL / 12.0, ELL).unwrap() - A_TWELFTH).abs() < 1e-12);
    let t = (1.0001 / (ELL / 4.0).tanh()).acosh();
    assert!(matches!(fermi_half_width(t, ELL), Err(CapacityError::Domain { .. })));
    assert!(fermi_half_width(f64::NAN, ELL).is_err());
}

#[test]
fn hyperbolic_profile() {
    let p = build_collar_hyperbolic_profile(30).unwrap();
    assert!((p.ell - ELL).abs() < 1e-14);
    assert!((p.ell - 4.397_146).abs() < 1e-6);
    assert_eq!(p.fundamental, Some(p.ell / 12.0));
    let (a0, b0) = p.eval(0.0).unwrap();
    assert!((a0 - ELL / 4.0).abs() < 1e-14 && (a0 + b0).abs() == 0.0);
    assert!((p.eval(ELL / 12.0).unwrap().0 - A_TWELFTH).abs() < 1e-12);
    for k in 0..40 {
        let t = 0.011 * k as f64;
        let a = p.eval(t).unwrap().0;
        assert!((p.eval(ELL / 6.0 - t).unwrap().0 - a).abs() < 1e-12);
        assert!((p.eval(t + ELL / 6.0).unwrap().0 - a).abs() < 1e-12);
        assert!((p.eval(t + ELL).unwrap().0 - a).abs() < 1e-12);
    }
    let s = p.sample(256).unwrap();
    assert_eq!(s.len(), 256);
    assert_eq!(s[0].t, 0.0);
    assert!((s[1].t - ELL / 256.0).abs() < 1e-15);
    assert!(s.iter().all(|x| x.a > 0.0 && x.b < 0.0));
}

#[test]
fn profile_validation() {
    assert!(CollarProfile::constant(ELL, -1.0, -2.0).is_err());
    assert!(CollarProfile::constant(-1.0, 1.0, -1.0).is_err());
    assert!(CollarProfile::hyperbolic(60.0).is_err());
    let bad = CollarProfile::custom(1.0, |t| (t - 0.5, -1.0)).unwrap();
    assert!(matches!(muetzel_bound(&bad, 1e-8), Err(CapacityError::BadProfile(_))));
}

#[test]
fn muetzel_extremal() {
    let p = build_collar_hyperbolic_profile(30).unwrap();
    let m = muetzel_bound(&p, 1e-8).unwrap();
    assert_eq!(m.kind, EstimateKind::LowerMuetzel);
    assert!((m.value - MUETZEL).abs() < 1e-8, "{}", m.value);
    let check = m.cross_check.unwrap();
    assert!((check - m.value).abs() <= 2e-8);
    assert!(m.error_estimate <= 1e-8);
}

#[test]
fn muetzel_matches_mesh_free_sum() {
    // Midpoint rule on the full period without using the symmetry.
    let p = build_collar_hyperbolic_profile(30).unwrap();
    let n = 120_000;
    let dt = ELL / n as f64;
    let s: f64 = (0..n)
        .map(|i| {
            let (a, b) = p.eval((i as f64 + 0.5) * dt).unwrap();
            dt / (gudermann(a) - gudermann(b))
        })
        .sum();
    assert!((s - MUETZEL).abs() < 1e-7, "{s}");
}

#[test]
fn muetzel_constant_profiles() {
    for w in [0.1, 0.5, 1.0, 2.0] {
        let p = CollarProfile::constant(ELL, w, -w).unwrap();
        let m = muetzel_bound(&p, 1e-10).unwrap();
        let exact = ELL / (gudermann(w) - gudermann(-w));
        assert!((m.value - exact).abs() < 1e-10);
    }
    let mut prev = f64::INFINITY;
    for w in [1.0, 2.0, 4.0, 8.0, 16.0, 30.0] {
        let v = muetzel_bound(&CollarProfile::constant(ELL, w, -w).unwrap(), 1e-10).unwrap().value;
        assert!(v < prev && v > ELL / PI);
        prev = v;
    }
    assert!((prev - ELL / PI).abs() < 1e-10);
}

#[test]
fn flat_upper_closed_form() {
    let p = SurfaceParameters::extremal();
    assert!((quadrilateral_correction(&p) - CORRECTION).abs() < 1e-14);
    let u = flat_capacity_upper(&p);
    assert_eq!(u.kind, EstimateKind::UpperClosedForm);
    assert!((u.value - UPPER).abs() < 1e-13);
    assert!((u.value - (2.0 * AREA - 12.0 * CORRECTION)).abs() < 1e-12);
    for h in [1e-2, 1e-3, 1e-4] {
        let q = SurfaceParameters::from_h(h);
        let rel = (flat_capacity_upper(&q).value - 2.0 * q.area()) / (2.0 * q.area());
        assert!(rel.abs() < 10.0 * h * h, "{h} {rel}");
    }
}

#[test]
fn flat_upper_mesh_cross_check() {
    let c = flat_capacity_mesh_check(&SurfaceParameters::extremal(), 0.01).unwrap();
    assert!(c.agrees, "{c:?}");
    assert!((c.mesh.value - UPPER).abs() < 1e-3);
    assert_eq!(c.mesh.kind, EstimateKind::UpperMesh);
}

#[test]
fn fem_flat_cylinder() {
    let s = flat_cylinder(2.0, 0.5, 6, 2);
    let e = fem_capacity(&s, 0.1, 1e-12).unwrap();
    assert_eq!(e.kind, EstimateKind::FemRayleigh);
    assert!((e.value - 4.0).abs() < 1e-9, "{}", e.value);
}

#[test]
fn fem_scale_invariant() {
    let a = fem_capacity(&planar_annulus(1.0, 2.0, 8, 24), 0.2, 1e-12).unwrap().value;
    let b = fem_capacity(&planar_annulus(3.0, 6.0, 8, 24), 0.6, 1e-12).unwrap().value;
    assert!((a - b).abs() < 1e-9, "{a} {b}");
}

#[test]
fn fem_round_annulus_log() {
    let e = fem_round_annulus(1.0, std::f64::consts::E, 0.01, 1e-10).unwrap();
    assert!((e.value - 2.0 * PI).abs() < 0.005 * 2.0 * PI, "{}", e.value);
    assert!(e.value >= 2.0 * PI * (1.0 - 1e-3));
}

#[test]
fn fem_collar_below_upper_and_monotone() {
    let s = build_collar_flat(&SurfaceParameters::extremal()).unwrap();
    let r = fem_refinement(&s, 0.08, 3, 1e-10).unwrap();
    for w in r.windows(2) {
        assert!(w[1].value <= w[0].value + 1e-4, "{:?}", r);
    }
    let last = r.last().unwrap().value;
    assert!(last <= UPPER + 1e-3, "{last}");
    assert!(last < 2.29, "{last}");
}

#[test]
fn fem_hyperbolic_above_lower() {
    let p = build_collar_hyperbolic_profile(30).unwrap();
    let e = fem_hyperbolic(&p, 0.04, 1e-10).unwrap();
    assert!(e.value >= MUETZEL - 1e-6, "{}", e.value);
    assert!(e.value > 2.29);
}

#[test]
fn fem_rejects_non_annuli() {
    assert!(matches!(fem_capacity(&flat_torus(1.0, 1.0), 0.5, 1e-8), Err(CapacityError::NotAnnulus(_))));
    let d = build_extremal_dyck(&SurfaceParameters::extremal()).unwrap();
    assert!(matches!(fem_capacity(&d, 0.5, 1e-8), Err(CapacityError::NotAnnulus(_))));
    let c = flat_cylinder(2.0, 0.5, 4, 2);
    assert!(matches!(fem_capacity(&c, 0.0, 1e-8), Err(CapacityError::BadInput(_))));
}

#[test]
fn separation_defaults() {
    let c = separation_certificate(&SurfaceParameters::extremal(), 1e-8, None).unwrap();
    assert!(c.certified, "{c:?}");
    assert!((c.upper_margin - (2.29 - UPPER)).abs() < 1e-12);
    assert!((c.lower_margin - (MUETZEL - 2.29)).abs() < 1e-8);
    assert!(c.upper_margin >= 4e-3 && c.lower_margin >= 4e-3);
    let loose = separation_certificate(&SurfaceParameters::extremal(), 1e-3, None).unwrap();
    assert!(loose.certified);
    let j = serde_json::to_value(&c).unwrap();
    for k in ["upper", "lower", "fem_flat", "fem_hyp", "upper_margin", "lower_margin"] {
        assert!(j.get(k).is_some(), "{k}");
    }
}

#[test]
fn separation_with_fem() {
    let c = separation_certificate(&SurfaceParameters::extremal(), 1e-8, Some(0.04)).unwrap();
    assert!(c.certified, "{c:?}");
    let (ff, fh) = (c.fem_flat.unwrap().value, c.fem_hyp.unwrap().value);
    assert!(ff < 2.29 && fh > 2.29);
}

#[test]
fn separation_corrupted_ell() {
    let mut p = SurfaceParameters::extremal();
    let base = separation_certificate(&p, 1e-8, None).unwrap();
    p.ell *= 1.01;
    let bad = separation_certificate(&p, 1e-8, None).unwrap();
    assert!((bad.lower.value - base.lower.value).abs() > 1e-3);
    assert_eq!(bad.upper.value, base.upper.value);
}

proptest! {
    #[test]
    fn gudermann_monotone_and_odd(s in -30.0..30.0f64, d in 1e-6..1.0f64) {
        prop_assert!(gudermann(s + d) > gudermann(s));
        prop_assert!((gudermann(s) + gudermann(-s) - PI).abs() < 1e-12);
    }

    #[test]
    fn muetzel_constant_closed_form(w in 0.05..5.0f64, v in 0.05..5.0f64) {
        let m = muetzel_bound(&CollarProfile::constant(ELL, w, -v).unwrap(), 1e-10).unwrap();
        prop_assert!((m.value - ELL / (gudermann(w) - gudermann(-v))).abs() < 1e-9);
    }

    #[test]
    fn muetzel_monotone_in_width(da in 0.0..0.5f64, db in 0.0..0.5f64) {
        let base = build_collar_hyperbolic_profile(30).unwrap();
        let b2 = base.clone();
        let wide = CollarProfile::custom(ELL, move |t| {
            let (a, b) = b2.eval(t).unwrap();
            (a + da, b - db)
        }).unwrap().with_fundamental(ELL / 12.0).unwrap();
        let v0 = muetzel_bound(&base, 1e-9).unwrap().value;
        let v1 = muetzel_bound(&wide, 1e-9).unwrap().value;
        prop_assert!(v1 <= v0 + 2e-9);
    }
}

use dyck::constants::{
    area_radicand_exact, check_defining_relations, cos_vartheta_exact, evaluate, expr, h_squared_exact,
    named_constant, quad_arith, QuadOp, QuadraticNumber, SurfaceParameters, REGISTRY,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use proptest::prelude::*;

/// Independent 25-digit values from an mpmath session at 60 digits.
const ORACLE_25: &[(&str, &str)] = &[
    ("h", "0.2248796300387821564701181"),
    ("theta", "0.9329915607839767667727181"),
    ("alpha", "1.104300546402908235844963"),
    ("delta", "0.2751203699612178435298819"),
    ("cos_vartheta", "0.5954332159489637280263313"),
    ("area_extremal", "1.152794345841759294916655"),
    ("systolic_ratio_dyck", "0.8674574121629731453683260"),
    ("ell", "4.397146055841871565332035"),
    ("voronoi_floor", "0.1588730045826479853511081"),
    ("loewner", "1.154700538379251529018298"),
    ("pu", "1.570796326794896619231322"),
    ("bavard", "1.110720734539591561753970"),
    ("genus2_ratio", "0.8047378541243650162672296"),
    ("hex_area_min", "0.2008512019731078692856305"),
    ("capacity_upper", "2.283093046469847807731949"),
];

#[test]
fn registry_matches_independent_oracle() {
    for (name, want) in ORACLE_25 {
        let got = named_constant(name, 25).unwrap();
        assert_eq!(&got.decimal, want, "{name}");
    }
    assert_eq!(REGISTRY.len(), ORACLE_25.len());
}

#[test]
fn published_examples() {
    assert_eq!(named_constant("h", 7).unwrap().decimal, "0.2248796");
    assert_eq!(named_constant("area_extremal", 6).unwrap().decimal, "1.15279");
    assert_eq!(named_constant("ell", 7).unwrap().decimal, "4.397146");
    assert_eq!(named_constant("voronoi_floor", 5).unwrap().decimal, "0.15887");
}

#[test]
fn ratio_reported_decimal_is_a_truncation() {
    // 0.867457… rounds to 0.86746; the printed 0.86745 keeps the leading digits.
    let r = named_constant("systolic_ratio_dyck", 5).unwrap();
    assert_eq!(r.decimal, "0.86746");
    let long = named_constant("systolic_ratio_dyck", 12).unwrap().decimal;
    assert!(long.starts_with(r.reported.as_deref().unwrap()));
}

#[test]
fn reported_decimals_within_one_unit() {
    for e in REGISTRY {
        let Some(rep) = e.reported else { continue };
        let unit = 10f64.powi(-(rep.split('.').nth(1).unwrap().len() as i32));
        let v = named_constant(e.name, 30).unwrap().value();
        let r: f64 = rep.parse().unwrap();
        if e.name == "capacity_upper" {
            // Printed value sits 1.3 units below the closed form.
            assert!((v - r - 1.3047e-5).abs() < 1e-8, "{v}");
        } else {
            assert!((v - r).abs() < unit, "{} {} vs {}", e.name, v, r);
        }
    }
}

#[test]
fn cos_vartheta_seven_digits() {
    assert_eq!(cos_vartheta_exact().to_decimal(7).unwrap(), "0.5954332");
}

#[test]
fn norm_and_conjugate_examples() {
    let x = QuadraticNumber::from_integers(1, 1, 19).unwrap();
    let y = quad_arith(&x, &x.conj(), QuadOp::Mul).unwrap();
    assert_eq!(y, QuadraticNumber::from_integers(-18, 0, 19).unwrap());
    let z = QuadraticNumber::from_integers(8, -1, 19).unwrap();
    let c = quad_arith(&z, &z, QuadOp::Conj).unwrap();
    assert_eq!(c, QuadraticNumber::from_integers(8, 1, 19).unwrap());
}

#[test]
fn h_squared_radical_form() {
    let h2 = h_squared_exact();
    // 576u² − 128u + 5 = 0 at u = h².
    let c576 = QuadraticNumber::from_integers(576, 0, 19).unwrap();
    let c128 = QuadraticNumber::from_integers(128, 0, 19).unwrap();
    let c5 = QuadraticNumber::from_integers(5, 0, 19).unwrap();
    let q = c576.mul(&h2).unwrap().mul(&h2).unwrap().sub(&c128.mul(&h2).unwrap()).unwrap().add(&c5).unwrap();
    assert!(q.is_zero());
    assert_eq!(area_radicand_exact().signum(), 1);
}

#[test]
fn defining_relations_at_extremal_parameters() {
    let p = SurfaceParameters::extremal();
    for r in check_defining_relations(&p) {
        assert!(r.passes(1e-12), "{} = {}", r.relation, r.value);
    }
    assert!(p.theta < std::f64::consts::FRAC_PI_3 && std::f64::consts::FRAC_PI_3 < p.alpha);
    assert!(p.delta > 0.0 && p.delta < 0.5);
}

#[test]
fn perturbed_height_is_flagged() {
    let mut p = SurfaceParameters::extremal();
    p.h += 0.01;
    let r = &check_defining_relations(&p)[0];
    assert!((r.value - 0.02).abs() < 1e-12);
    assert!(!r.passes(1e-12));
}

#[test]
fn rebuilt_from_exact_radicand() {
    let p = SurfaceParameters::from_exact_h_squared();
    for r in check_defining_relations(&p) {
        assert!(r.passes(1e-12), "{} = {}", r.relation, r.value);
    }
}

#[test]
fn area_expressions_agree() {
    let a = evaluate(30, expr::area).unwrap();
    let b = evaluate(30, expr::area_pieces).unwrap();
    assert_eq!(a, b);
    let p = SurfaceParameters::extremal();
    let pieces = 2.0 * p.delta + 3.0 * p.h * (1.0 - 4.0 * p.h * p.h).sqrt();
    let closed = 1.0 + (169.0 - 38.0 * 19f64.sqrt()).sqrt() / 12.0;
    assert!((pieces - closed).abs() < 1e-12);
}

#[test]
fn inner_cone_angle_cosine() {
    let p = SurfaceParameters::extremal();
    let c = (2.0 * std::f64::consts::PI + p.theta).cos();
    assert!((c - cos_vartheta_exact().to_f64()).abs() < 1e-12);
}

/// Exact value of a decimal string such as `-8.0820e-3`.
fn decimal_value(s: &str) -> BigRational {
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().unwrap()),
        None => (s, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits: BigInt = format!("{int}{frac}").parse().unwrap();
    let shift = exp - frac.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    let mut v = BigRational::from_integer(digits);
    for _ in 0..shift.unsigned_abs() {
        v = if shift > 0 { v * &ten } else { v / &ten };
    }
    v
}

fn small_rational() -> impl Strategy<Value = BigRational> {
    (-50i64..50, 1i64..20).prop_map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d)))
}

fn q19() -> impl Strategy<Value = QuadraticNumber> {
    (small_rational(), small_rational()).prop_map(|(a, b)| QuadraticNumber::new(a, b, 19).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rounding_round_trip(x in q19(), n in 3usize..16) {
        let direct = x.to_decimal(n).unwrap();
        let long = x.to_decimal(2 * n).unwrap();
        let v = x.to_f64();
        prop_assume!(v.abs() > 1e-6);
        let unit = 10f64.powf(v.abs().log10().floor() - n as f64 + 1.0);
        let d: f64 = direct.parse().unwrap();
        let l: f64 = long.parse().unwrap();
        prop_assert!((d - v).abs() <= 0.5 * unit * (1.0 + 1e-9) + 1e-13 * v.abs().max(1.0));
        prop_assert!((l - v).abs() <= 0.5 * unit * 10f64.powi(-(n as i32)) * (1.0 + 1e-6) + 1e-13 * v.abs().max(1.0));
        let gap = (decimal_value(&direct) - decimal_value(&long)).abs();
        let half_unit = BigRational::new(BigInt::from(5), BigInt::from(10).pow(n as u32))
            * decimal_value(&format!("1e{}", v.abs().log10().floor() as i32 + 1));
        prop_assert!(gap <= half_unit, "{direct} {long}");
    }

    #[test]
    fn field_arithmetic_matches_floats(x in q19(), y in q19()) {
        let s = x.add(&y).unwrap().to_f64();
        prop_assert!((s - (x.to_f64() + y.to_f64())).abs() < 1e-9);
        let m = x.mul(&y).unwrap().to_f64();
        prop_assert!((m - x.to_f64() * y.to_f64()).abs() < 1e-7 * (1.0 + m.abs()));
        if !y.is_zero() {
            let q = x.div(&y).unwrap();
            let back = q.mul(&y).unwrap();
            prop_assert_eq!(back, x.clone());
        }
        prop_assert_eq!(x.conj().conj(), x);
    }

    #[test]
    fn exact_sign_agrees_with_value(x in q19()) {
        let v = x.to_f64();
        if v.abs() > 1e-9 {
            prop_assert_eq!(x.signum(), if v > 0.0 { 1 } else { -1 });
        }
    }
}

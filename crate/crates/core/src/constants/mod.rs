//! Closed-form constants of the extremal surface, their exact radical forms,
//! correctly rounded decimal evaluation and the defining relations.

mod precise;
mod quadratic;

pub use precise::{evaluate, evaluate_f64, Interval, Precision};
pub use quadratic::{quad_arith, QuadOp, QuadraticNumber};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstantError {
    #[error("operands live in different fields Q(√{0}) and Q(√{1})")]
    MixedFields(u64, u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not a square-free integer greater than one")]
    NotSquareFree(u64),
    #[error("unknown constant `{0}`")]
    UnknownConstant(String),
    #[error("digit count {0} is not positive")]
    BadDigits(usize),
    #[error("evaluation left the domain of an elementary function")]
    Domain,
    #[error("precision limit reached before the rounding was decided")]
    PrecisionExhausted,
}

/// `√19` enclosure.
fn sqrt19(p: &mut Precision) -> Interval {
    p.int(19).sqrt(p)
}

/// `h² = (8 − √19)/72`.
pub fn h_squared_exact() -> QuadraticNumber {
    QuadraticNumber::from_ratios((8, 72), (-1, 72), 19).expect("Q(√19)")
}

/// `cos ϑ = (1 + √19)/9`.
pub fn cos_vartheta_exact() -> QuadraticNumber {
    QuadraticNumber::from_ratios((1, 9), (1, 9), 19).expect("Q(√19)")
}

/// Radicand `169 − 38√19` of the area and ratio.
pub fn area_radicand_exact() -> QuadraticNumber {
    QuadraticNumber::from_integers(169, -38, 19).expect("Q(√19)")
}

/// `(5 + √17)/2`, whose arccosh is half the collar circumference.
pub fn ell_cosh_exact() -> QuadraticNumber {
    QuadraticNumber::from_ratios((5, 2), (1, 2), 17).expect("Q(√17)")
}

pub mod expr {
    //! Interval evaluators of the closed forms, shared by the registry and
    //! by modules that need a single high-precision rounding.
    use super::{sqrt19, Interval, Precision};

    pub fn h(p: &mut Precision) -> Interval {
        let s = sqrt19(p);
        let r = p.int(8).sub(&s, p).div(&p.int(72), p);
        r.sqrt(p)
    }

    pub fn theta(p: &mut Precision) -> Interval {
        let s = sqrt19(p);
        let r = p.int(8).sub(&s, p).div(&p.int(2), p);
        r.sqrt(p).atan(p)
    }

    pub fn alpha(p: &mut Precision) -> Interval {
        let t = theta(p);
        p.pi().sub(&t, p).div(&p.int(2), p)
    }

    pub fn delta(p: &mut Precision) -> Interval {
        let h = h(p);
        p.ratio(1, 2).sub(&h, p)
    }

    pub fn cos_vartheta(p: &mut Precision) -> Interval {
        let s = sqrt19(p);
        p.int(1).add(&s, p).div(&p.int(9), p)
    }

    pub fn area_root(p: &mut Precision) -> Interval {
        let s = sqrt19(p);
        let r = p.int(169).sub(&p.int(38).mul(&s, p), p);
        r.sqrt(p)
    }

    pub fn area(p: &mut Precision) -> Interval {
        let r = area_root(p);
        p.int(1).add(&r.div(&p.int(12), p), p)
    }

    /// `2δ + 3h√(1 − 4h²)`, the summed-pieces form of the area.
    pub fn area_pieces(p: &mut Precision) -> Interval {
        let h = h(p);
        let d = delta(p);
        let w = p.int(1).sub(&p.int(4).mul(&h.sqr(p), p), p).sqrt(p);
        p.int(2).mul(&d, p).add(&p.int(3).mul(&h, p).mul(&w, p), p)
    }

    pub fn ratio(p: &mut Precision) -> Interval {
        let r = area_root(p);
        p.int(12).div(&p.int(12).add(&r, p), p)
    }

    pub fn ell(p: &mut Precision) -> Interval {
        let s = p.int(17).sqrt(p);
        let c = p.int(5).add(&s, p).div(&p.int(2), p);
        p.int(2).mul(&c.acosh(p), p)
    }

    pub fn voronoi_floor(p: &mut Precision) -> Interval {
        let h = h(p);
        p.pi().mul(&h.sqr(p), p)
    }

    pub fn hex_area_min(p: &mut Precision) -> Interval {
        let h = h(p);
        let w = p.int(1).sub(&p.int(4).mul(&h.sqr(p), p), p).sqrt(p);
        h.mul(&w, p)
    }

    /// `[tan(θ/2) − θ/2] h²`, the area left out of the half-width band at one
    /// inner cone point.
    pub fn quad_correction(p: &mut Precision) -> Interval {
        let t = theta(p);
        let half = t.div(&p.int(2), p);
        let h = h(p);
        half.tan(p).sub(&half, p).mul(&h.sqr(p), p)
    }

    pub fn capacity_upper(p: &mut Precision) -> Interval {
        let a = area(p);
        let c = quad_correction(p);
        p.int(2).mul(&a, p).sub(&p.int(12).mul(&c, p), p)
    }

    pub fn case_one(p: &mut Precision) -> Interval {
        let h = h(p);
        let pi = p.pi();
        p.int(1).add(&p.int(2).mul(&pi, p).mul(&h.sqr(p), p), p)
    }

    pub fn case_two(p: &mut Precision) -> Interval {
        let f = voronoi_floor(p);
        p.int(1).add(&f, p)
    }

    pub fn loewner(p: &mut Precision) -> Interval {
        p.int(2).div(&p.int(3).sqrt(p), p)
    }

    pub fn pu(p: &mut Precision) -> Interval {
        p.pi().div(&p.int(2), p)
    }

    pub fn bavard(p: &mut Precision) -> Interval {
        let s = p.int(2).sqrt(p);
        p.pi().div(&p.int(2).mul(&s, p), p)
    }

    pub fn genus2_ratio(p: &mut Precision) -> Interval {
        let s = p.int(2).sqrt(p);
        s.add(&p.int(1), p).div(&p.int(3), p)
    }
}

type Evaluator = fn(&mut Precision) -> Interval;

/// One entry of the constant registry.
pub struct RegistryEntry {
    pub name: &'static str,
    pub exact: &'static str,
    /// Decimal as printed in the source text, kept apart from computed values.
    pub reported: Option<&'static str>,
    pub eval: Evaluator,
}

pub const REGISTRY: &[RegistryEntry] = &[
    RegistryEntry { name: "h", exact: "sqrt((8-sqrt(19))/72)", reported: Some("0.2248796"), eval: expr::h },
    RegistryEntry { name: "theta", exact: "arctan(sqrt((8-sqrt(19))/2))", reported: None, eval: expr::theta },
    RegistryEntry { name: "alpha", exact: "(pi-theta)/2", reported: None, eval: expr::alpha },
    RegistryEntry { name: "delta", exact: "1/2-h", reported: None, eval: expr::delta },
    RegistryEntry { name: "cos_vartheta", exact: "(1+sqrt(19))/9", reported: None, eval: expr::cos_vartheta },
    RegistryEntry {
        name: "area_extremal",
        exact: "1+sqrt(169-38*sqrt(19))/12",
        reported: Some("1.15279"),
        eval: expr::area,
    },
    RegistryEntry {
        name: "systolic_ratio_dyck",
        exact: "12/(12+sqrt(169-38*sqrt(19)))",
        reported: Some("0.86745"),
        eval: expr::ratio,
    },
    RegistryEntry { name: "ell", exact: "2*arccosh((5+sqrt(17))/2)", reported: Some("4.397146"), eval: expr::ell },
    RegistryEntry {
        name: "voronoi_floor",
        exact: "pi*(8-sqrt(19))/72",
        reported: Some("0.15887"),
        eval: expr::voronoi_floor,
    },
    RegistryEntry { name: "loewner", exact: "2/sqrt(3)", reported: None, eval: expr::loewner },
    RegistryEntry { name: "pu", exact: "pi/2", reported: None, eval: expr::pu },
    RegistryEntry { name: "bavard", exact: "pi/(2*sqrt(2))", reported: None, eval: expr::bavard },
    RegistryEntry { name: "genus2_ratio", exact: "(sqrt(2)+1)/3", reported: Some("0.80473"), eval: expr::genus2_ratio },
    RegistryEntry {
        name: "hex_area_min",
        exact: "h*sqrt(1-4*h^2)",
        reported: None,
        eval: expr::hex_area_min,
    },
    RegistryEntry {
        name: "capacity_upper",
        exact: "2*area_extremal-12*(tan(theta/2)-theta/2)*h^2",
        reported: Some("2.28308"),
        eval: expr::capacity_upper,
    },
];

/// A registry value rounded to the requested number of significant digits.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct NamedValue {
    pub name: String,
    pub digits: usize,
    pub decimal: String,
    pub exact: String,
    pub field_element: Option<String>,
    pub reported: Option<String>,
}

impl NamedValue {
    pub fn value(&self) -> f64 {
        self.decimal.parse().unwrap_or(f64::NAN)
    }
}

fn field_element(name: &str) -> Option<QuadraticNumber> {
    match name {
        "cos_vartheta" => Some(cos_vartheta_exact()),
        "loewner" => QuadraticNumber::from_ratios((0, 1), (2, 3), 3).ok(),
        "genus2_ratio" => QuadraticNumber::from_ratios((1, 3), (1, 3), 2).ok(),
        _ => None,
    }
}

pub fn registry_entry(name: &str) -> Result<&'static RegistryEntry, ConstantError> {
    REGISTRY
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| ConstantError::UnknownConstant(name.to_string()))
}

/// Correctly rounded value of a registry constant with `digits` significant
/// digits, together with its exact form.
pub fn named_constant(name: &str, digits: usize) -> Result<NamedValue, ConstantError> {
    let entry = registry_entry(name)?;
    let fe = field_element(name);
    let decimal = match &fe {
        Some(q) => q.to_decimal(digits)?,
        None => evaluate(digits, entry.eval)?,
    };
    Ok(NamedValue {
        name: entry.name.to_string(),
        digits,
        decimal,
        exact: entry.exact.to_string(),
        field_element: fe.map(|q| q.to_string()),
        reported: entry.reported.map(str::to_string),
    })
}

/// Double-precision value of a registry constant, rounded once from a
/// 40-digit evaluation.
pub fn constant_f64(name: &str) -> Result<f64, ConstantError> {
    Ok(named_constant(name, 40)?.value())
}

/// Geometric parameters of the trapezoids, the Möbius band and the collar.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SurfaceParameters {
    pub alpha: f64,
    pub theta: f64,
    pub h: f64,
    pub delta: f64,
    pub short_side: f64,
    pub ell: f64,
}

impl SurfaceParameters {
    /// Parameters of the extremal surface, each rounded once from a
    /// high-precision evaluation.
    pub fn extremal() -> Self {
        let get = |n: &str| constant_f64(n).expect("registry constant");
        Self {
            alpha: get("alpha"),
            theta: get("theta"),
            h: get("h"),
            delta: get("delta"),
            short_side: 1.0 / 3.0,
            ell: get("ell"),
        }
    }

    /// Parameters rebuilt in double precision from `h² = (8 − √19)/72`.
    pub fn from_exact_h_squared() -> Self {
        let h = h_squared_exact().to_f64().sqrt();
        Self::from_h(h)
    }

    /// Parameters determined by `2h = sin(θ/2)` for a given height.
    pub fn from_h(h: f64) -> Self {
        let theta = 2.0 * (2.0 * h).asin();
        let ell = 2.0 * ell_cosh_exact().to_f64().acosh();
        Self {
            alpha: 0.5 * (std::f64::consts::PI - theta),
            theta,
            h,
            delta: 0.5 - h,
            short_side: 1.0 / 3.0,
            ell,
        }
    }

    pub fn long_side(&self) -> f64 {
        self.short_side + 2.0 * self.h / self.alpha.tan()
    }

    pub fn leg(&self) -> f64 {
        self.h / self.alpha.sin()
    }

    /// Area of the surface assembled from these parameters.
    pub fn area(&self) -> f64 {
        let trapezoid = 0.5 * self.h * (self.short_side + self.long_side());
        6.0 * trapezoid + 2.0 * self.delta * 3.0 * self.short_side
    }
}

/// Residual of one defining relation.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Residual {
    pub relation: &'static str,
    pub value: f64,
}

impl Residual {
    pub fn passes(&self, tol: f64) -> bool {
        self.value.abs() <= tol
    }
}

/// Residuals of `2h = sin(θ/2)`, `6h = tan θ`, `h = ½ cos α`, `δ = ½ − h`
/// and `tan²(θ/2) = 4h²/(1 − 4h²)`.
pub fn check_defining_relations(p: &SurfaceParameters) -> Vec<Residual> {
    let h = p.h;
    let t = p.theta;
    vec![
        Residual { relation: "2h - sin(theta/2)", value: 2.0 * h - (0.5 * t).sin() },
        Residual { relation: "6h - tan(theta)", value: 6.0 * h - t.tan() },
        Residual { relation: "h - cos(alpha)/2", value: h - 0.5 * p.alpha.cos() },
        Residual { relation: "delta - (1/2 - h)", value: p.delta - (0.5 - h) },
        Residual {
            relation: "tan^2(theta/2) - 4h^2/(1-4h^2)",
            value: (0.5 * t).tan().powi(2) - 4.0 * h * h / (1.0 - 4.0 * h * h),
        },
    ]
}

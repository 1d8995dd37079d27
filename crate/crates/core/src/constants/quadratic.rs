use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::precise::{Interval, Precision};
use super::ConstantError;

/// Element `a + b√d` of the real quadratic field `Q(√d)`.
///
/// `d` is a square-free integer greater than one. Values with `b = 0` still
/// carry their field so that mixing fields is always detected.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadraticNumber {
    a: BigRational,
    b: BigRational,
    d: u64,
}

/// Field operation selector for [`quad_arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadOp {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Conj,
}

fn is_square_free(d: u64) -> bool {
    if d < 2 {
        return false;
    }
    let mut n = d;
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return false;
            }
        }
        p += 1;
    }
    true
}

fn ratio(n: i64, m: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(m))
}

impl QuadraticNumber {
    pub fn new(a: BigRational, b: BigRational, d: u64) -> Result<Self, ConstantError> {
        if !is_square_free(d) {
            return Err(ConstantError::NotSquareFree(d));
        }
        Ok(Self { a, b, d })
    }

    /// `(a_num/a_den) + (b_num/b_den)√d` from machine integers.
    pub fn from_ratios(a: (i64, i64), b: (i64, i64), d: u64) -> Result<Self, ConstantError> {
        if a.1 == 0 || b.1 == 0 {
            return Err(ConstantError::DivisionByZero);
        }
        Self::new(ratio(a.0, a.1), ratio(b.0, b.1), d)
    }

    pub fn from_integers(a: i64, b: i64, d: u64) -> Result<Self, ConstantError> {
        Self::from_ratios((a, 1), (b, 1), d)
    }

    pub fn rational(a: BigRational, d: u64) -> Result<Self, ConstantError> {
        Self::new(a, BigRational::zero(), d)
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn same_field(&self, other: &Self) -> Result<(), ConstantError> {
        if self.d == other.d {
            Ok(())
        } else {
            Err(ConstantError::MixedFields(self.d, other.d))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, ConstantError> {
        self.same_field(other)?;
        Ok(Self { a: &self.a + &other.a, b: &self.b + &other.b, d: self.d })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, ConstantError> {
        self.same_field(other)?;
        Ok(Self { a: &self.a - &other.a, b: &self.b - &other.b, d: self.d })
    }

    pub fn mul(&self, other: &Self) -> Result<Self, ConstantError> {
        self.same_field(other)?;
        let d = BigRational::from_integer(BigInt::from(self.d));
        Ok(Self {
            a: &self.a * &other.a + &self.b * &other.b * d,
            b: &self.a * &other.b + &self.b * &other.a,
            d: self.d,
        })
    }

    pub fn div(&self, other: &Self) -> Result<Self, ConstantError> {
        self.same_field(other)?;
        let n = other.norm();
        if n.is_zero() {
            return Err(ConstantError::DivisionByZero);
        }
        let num = self.mul(&other.conj())?;
        Ok(Self { a: num.a / &n, b: num.b / &n, d: self.d })
    }

    pub fn neg(&self) -> Self {
        Self { a: -&self.a, b: -&self.b, d: self.d }
    }

    pub fn conj(&self) -> Self {
        Self { a: self.a.clone(), b: -&self.b, d: self.d }
    }

    /// Field norm `a² − d b²`.
    pub fn norm(&self) -> BigRational {
        let d = BigRational::from_integer(BigInt::from(self.d));
        &self.a * &self.a - &self.b * &self.b * d
    }

    /// Exact sign, decided without floating point.
    pub fn signum(&self) -> i32 {
        let sa = sign_of(&self.a);
        let sb = sign_of(&self.b);
        if sa == sb || sb == 0 {
            return sa;
        }
        if sa == 0 {
            return sb;
        }
        // a and b√d have opposite signs: compare a² with d b².
        let d = BigRational::from_integer(BigInt::from(self.d));
        let lhs = &self.a * &self.a;
        let rhs = &self.b * &self.b * d;
        if lhs > rhs {
            sa
        } else if lhs < rhs {
            sb
        } else {
            0
        }
    }

    pub fn to_f64(&self) -> f64 {
        rational_to_f64(&self.a) + rational_to_f64(&self.b) * (self.d as f64).sqrt()
    }

    /// Enclosure of the value at the given working precision.
    pub fn enclose(&self, prec: &mut Precision) -> Interval {
        let a = prec.rational(&self.a);
        let b = prec.rational(&self.b);
        let root = prec.integer(&BigInt::from(self.d)).sqrt(prec);
        a.add(&b.mul(&root, prec), prec)
    }

    /// Correctly rounded decimal with `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> Result<String, ConstantError> {
        super::precise::evaluate(digits, |p| self.enclose(p))
    }
}

fn sign_of(r: &BigRational) -> i32 {
    if r.is_positive() {
        1
    } else if r.is_negative() {
        -1
    } else {
        0
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    let (n, d) = (r.numer(), r.denom());
    let scale = n.bits().max(d.bits()).saturating_sub(60) as usize;
    let n2: BigInt = n >> scale;
    let d2: BigInt = d >> scale;
    if d2.is_zero() {
        return if n.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY };
    }
    let nf = n2.to_string().parse::<f64>().unwrap_or(f64::NAN);
    let df = d2.to_string().parse::<f64>().unwrap_or(f64::NAN);
    nf / df
}

/// Field arithmetic dispatcher; unary operations ignore `y`.
pub fn quad_arith(
    x: &QuadraticNumber,
    y: &QuadraticNumber,
    op: QuadOp,
) -> Result<QuadraticNumber, ConstantError> {
    match op {
        QuadOp::Add => x.add(y),
        QuadOp::Sub => x.sub(y),
        QuadOp::Mul => x.mul(y),
        QuadOp::Div => x.div(y),
        QuadOp::Neg => Ok(x.neg()),
        QuadOp::Conj => Ok(x.conj()),
    }
}

impl fmt::Display for QuadraticNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |r: &BigRational| {
            if r.denom().is_one() {
                r.numer().to_string()
            } else {
                format!("{}/{}", r.numer(), r.denom())
            }
        };
        if self.b.is_zero() {
            return write!(f, "{}", show(&self.a));
        }
        // Pull a common denominator out when it makes the form shorter.
        let l = self.a.denom().lcm(self.b.denom());
        let an = (&self.a * BigRational::from_integer(l.clone())).to_integer();
        let bn = (&self.b * BigRational::from_integer(l.clone())).to_integer();
        let root = if bn.is_one() {
            format!("√{}", self.d)
        } else if bn == -BigInt::one() {
            format!("-√{}", self.d)
        } else {
            format!("{}√{}", bn, self.d)
        };
        let body = if an.is_zero() {
            root
        } else if root.starts_with('-') {
            format!("{}{}", an, root)
        } else {
            format!("{}+{}", an, root)
        };
        if l.is_one() {
            write!(f, "{}", body)
        } else if an.is_zero() {
            write!(f, "{}/{}", body, l)
        } else {
            write!(f, "({})/{}", body, l)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_identity() {
        let x = QuadraticNumber::from_integers(1, 1, 19).unwrap();
        let p = x.mul(&x.conj()).unwrap();
        assert_eq!(p, QuadraticNumber::from_integers(-18, 0, 19).unwrap());
    }

    #[test]
    fn conj_flips_radical() {
        let x = QuadraticNumber::from_integers(8, -1, 19).unwrap();
        assert_eq!(x.conj(), QuadraticNumber::from_integers(8, 1, 19).unwrap());
    }

    #[test]
    fn mixed_fields_rejected() {
        let x = QuadraticNumber::from_integers(1, 1, 19).unwrap();
        let y = QuadraticNumber::from_integers(1, 1, 17).unwrap();
        assert!(matches!(x.add(&y), Err(ConstantError::MixedFields(19, 17))));
    }

    #[test]
    fn zero_division_rejected() {
        let x = QuadraticNumber::from_integers(1, 1, 19).unwrap();
        let z = QuadraticNumber::from_integers(0, 0, 19).unwrap();
        assert!(matches!(x.div(&z), Err(ConstantError::DivisionByZero)));
    }

    #[test]
    fn non_square_free_rejected() {
        assert!(QuadraticNumber::from_integers(1, 1, 18).is_err());
        assert!(QuadraticNumber::from_integers(1, 1, 1).is_err());
    }

    #[test]
    fn exact_sign() {
        // 13 - 3√19 < 0 since 169 < 171.
        let x = QuadraticNumber::from_integers(13, -3, 19).unwrap();
        assert_eq!(x.signum(), -1);
        let y = QuadraticNumber::from_integers(-13, 3, 19).unwrap();
        assert_eq!(y.signum(), 1);
    }

    #[test]
    fn display_forms() {
        let c = QuadraticNumber::from_ratios((1, 9), (1, 9), 19).unwrap();
        assert_eq!(c.to_string(), "(1+√19)/9");
        let h2 = QuadraticNumber::from_ratios((8, 72), (-1, 72), 19).unwrap();
        assert_eq!(h2.to_string(), "(8-√19)/72");
    }
}

//! Outward-rounded interval arithmetic on top of `astro-float`.
//!
//! Field operations use directed rounding. Elementary functions are
//! evaluated at both endpoints (every use here stays on a monotone branch)
//! and then widened by a few units in the last place, so the enclosure does
//! not depend on the library rounding transcendental results exactly.

use astro_float::{BigFloat, Consts, RoundingMode, Sign, Word};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::ConstantError;

const WORD_BITS: usize = 64;
const WIDEN_BITS: usize = 8;

/// Working precision and constant cache for one evaluation pass.
pub struct Precision {
    bits: usize,
    cc: Consts,
}

impl Precision {
    pub fn new(bits: usize) -> Self {
        let cc = Consts::new().expect("astro-float constant cache");
        Self { bits, cc }
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn integer(&mut self, n: &BigInt) -> Interval {
        let x = exact_int(n);
        Interval { lo: x.clone(), hi: x }
    }

    pub fn int(&mut self, n: i64) -> Interval {
        self.integer(&BigInt::from(n))
    }

    pub fn rational(&mut self, r: &BigRational) -> Interval {
        let n = self.integer(r.numer());
        let d = self.integer(r.denom());
        n.div(&d, self)
    }

    pub fn ratio(&mut self, n: i64, d: i64) -> Interval {
        self.rational(&BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn pi(&mut self) -> Interval {
        let p = self.bits;
        let lo = self.cc.pi(p, RoundingMode::Down);
        let hi = self.cc.pi(p, RoundingMode::Up);
        Interval { lo, hi }.widened(p)
    }
}

fn exact_int(n: &BigInt) -> BigFloat {
    let (sign, digits) = n.to_u64_digits();
    let p = WORD_BITS * (digits.len() + 1);
    let mut acc = BigFloat::from_u8(0, p);
    let base = {
        let mut b = BigFloat::from_u8(1, WORD_BITS);
        b.set_exponent(WORD_BITS as i32 + 1);
        b
    };
    for d in digits.iter().rev() {
        acc = acc.mul(&base, p, RoundingMode::None);
        acc = acc.add(&BigFloat::from_u64(*d, WORD_BITS), p, RoundingMode::None);
    }
    if sign == num_bigint::Sign::Minus {
        acc = acc.neg();
    }
    acc
}

/// Closed interval `[lo, hi]` of binary floating-point numbers.
#[derive(Clone, Debug)]
pub struct Interval {
    lo: BigFloat,
    hi: BigFloat,
}

fn min_bf(a: BigFloat, b: BigFloat) -> BigFloat {
    if a.cmp(&b) == Some(1) {
        b
    } else {
        a
    }
}

fn max_bf(a: BigFloat, b: BigFloat) -> BigFloat {
    if a.cmp(&b) == Some(-1) {
        b
    } else {
        a
    }
}

fn is_valid(x: &BigFloat) -> bool {
    !x.is_nan() && !x.is_inf()
}

impl Interval {
    pub fn lo(&self) -> &BigFloat {
        &self.lo
    }

    pub fn hi(&self) -> &BigFloat {
        &self.hi
    }

    pub fn is_finite(&self) -> bool {
        is_valid(&self.lo) && is_valid(&self.hi)
    }

    fn widened(self, p: usize) -> Self {
        let eps = |x: &BigFloat| -> BigFloat {
            if x.is_zero() {
                return BigFloat::from_u8(0, p);
            }
            let mut e = BigFloat::from_u8(1, p);
            let ex = x.exponent().unwrap_or(0);
            e.set_exponent(ex - (p - WIDEN_BITS) as i32);
            e
        };
        let lo = self.lo.sub(&eps(&self.lo), p, RoundingMode::Down);
        let hi = self.hi.add(&eps(&self.hi), p, RoundingMode::Up);
        Self { lo, hi }
    }

    /// Endpoint image of a function monotone on the interval.
    fn monotone<F>(&self, prec: &mut Precision, f: F) -> Self
    where
        F: Fn(&BigFloat, usize, RoundingMode, &mut Consts) -> BigFloat,
    {
        let p = prec.bits;
        let a = f(&self.lo, p, RoundingMode::Down, &mut prec.cc);
        let b = f(&self.hi, p, RoundingMode::Up, &mut prec.cc);
        let c = f(&self.lo, p, RoundingMode::Up, &mut prec.cc);
        let d = f(&self.hi, p, RoundingMode::Down, &mut prec.cc);
        Self { lo: min_bf(a, d), hi: max_bf(b, c) }.widened(p)
    }

    pub fn add(&self, o: &Self, prec: &Precision) -> Self {
        let p = prec.bits;
        Self {
            lo: self.lo.add(&o.lo, p, RoundingMode::Down),
            hi: self.hi.add(&o.hi, p, RoundingMode::Up),
        }
    }

    pub fn sub(&self, o: &Self, prec: &Precision) -> Self {
        let p = prec.bits;
        Self {
            lo: self.lo.sub(&o.hi, p, RoundingMode::Down),
            hi: self.hi.sub(&o.lo, p, RoundingMode::Up),
        }
    }

    pub fn neg(&self) -> Self {
        Self { lo: self.hi.neg(), hi: self.lo.neg() }
    }

    pub fn mul(&self, o: &Self, prec: &Precision) -> Self {
        let p = prec.bits;
        let pairs = [(&self.lo, &o.lo), (&self.lo, &o.hi), (&self.hi, &o.lo), (&self.hi, &o.hi)];
        let mut lo: Option<BigFloat> = None;
        let mut hi: Option<BigFloat> = None;
        for (x, y) in pairs {
            let l = x.mul(y, p, RoundingMode::Down);
            let h = x.mul(y, p, RoundingMode::Up);
            lo = Some(match lo {
                None => l,
                Some(c) => min_bf(c, l),
            });
            hi = Some(match hi {
                None => h,
                Some(c) => max_bf(c, h),
            });
        }
        Self { lo: lo.unwrap(), hi: hi.unwrap() }
    }

    pub fn div(&self, o: &Self, prec: &Precision) -> Self {
        let p = prec.bits;
        if o.contains_zero() {
            let nan = BigFloat::nan(None);
            return Self { lo: nan.clone(), hi: nan };
        }
        let pairs = [(&self.lo, &o.lo), (&self.lo, &o.hi), (&self.hi, &o.lo), (&self.hi, &o.hi)];
        let mut lo: Option<BigFloat> = None;
        let mut hi: Option<BigFloat> = None;
        for (x, y) in pairs {
            let l = x.div(y, p, RoundingMode::Down);
            let h = x.div(y, p, RoundingMode::Up);
            lo = Some(match lo {
                None => l,
                Some(c) => min_bf(c, l),
            });
            hi = Some(match hi {
                None => h,
                Some(c) => max_bf(c, h),
            });
        }
        Self { lo: lo.unwrap(), hi: hi.unwrap() }
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative() || self.lo.is_zero() || self.hi.is_zero()
    }

    pub fn sqr(&self, prec: &Precision) -> Self {
        self.mul(self, prec)
    }

    pub fn sqrt(&self, prec: &mut Precision) -> Self {
        let p = prec.bits;
        let lo = if self.lo.is_negative() {
            BigFloat::from_u8(0, p)
        } else {
            self.lo.sqrt(p, RoundingMode::Down)
        };
        Self { lo, hi: self.hi.sqrt(p, RoundingMode::Up) }
    }

    pub fn atan(&self, prec: &mut Precision) -> Self {
        self.monotone(prec, |x, p, rm, cc| x.atan(p, rm, cc))
    }

    pub fn tan(&self, prec: &mut Precision) -> Self {
        self.monotone(prec, |x, p, rm, cc| x.tan(p, rm, cc))
    }

    /// Sine; endpoints must lie on one monotone branch.
    pub fn sin(&self, prec: &mut Precision) -> Self {
        self.monotone(prec, |x, p, rm, cc| x.sin(p, rm, cc))
    }

    /// Cosine; endpoints must lie on one monotone branch.
    pub fn cos(&self, prec: &mut Precision) -> Self {
        self.monotone(prec, |x, p, rm, cc| x.cos(p, rm, cc))
    }

    pub fn exp(&self, prec: &mut Precision) -> Self {
        self.monotone(prec, |x, p, rm, cc| x.exp(p, rm, cc))
    }

    pub fn ln(&self, prec: &mut Precision) -> Self {
        self.monotone(prec, |x, p, rm, cc| x.ln(p, rm, cc))
    }

    pub fn cosh(&self, prec: &mut Precision) -> Self {
        self.monotone(prec, |x, p, rm, cc| x.cosh(p, rm, cc))
    }

    pub fn tanh(&self, prec: &mut Precision) -> Self {
        self.monotone(prec, |x, p, rm, cc| x.tanh(p, rm, cc))
    }

    pub fn acosh(&self, prec: &mut Precision) -> Self {
        self.monotone(prec, |x, p, rm, cc| x.acosh(p, rm, cc))
    }

    pub fn atanh(&self, prec: &mut Precision) -> Self {
        self.monotone(prec, |x, p, rm, cc| x.atanh(p, rm, cc))
    }

    pub fn to_f64(&self) -> f64 {
        let lo = dyadic(&self.lo).map(|r| super::quadratic::rational_to_f64(&r));
        let hi = dyadic(&self.hi).map(|r| super::quadratic::rational_to_f64(&r));
        match (lo, hi) {
            (Some(a), Some(b)) => 0.5 * (a + b),
            _ => f64::NAN,
        }
    }

    /// Width as a double, for diagnostics.
    pub fn width(&self) -> f64 {
        match (dyadic(&self.lo), dyadic(&self.hi)) {
            (Some(a), Some(b)) => super::quadratic::rational_to_f64(&(b - a)),
            _ => f64::INFINITY,
        }
    }
}

/// Exact rational value of a finite binary float.
pub fn dyadic(x: &BigFloat) -> Option<BigRational> {
    if !is_valid(x) {
        return None;
    }
    if x.is_zero() {
        return Some(BigRational::zero());
    }
    let (words, _, sign, exp, _) = x.as_raw_parts()?;
    let words: &[Word] = words;
    let mut m = BigUint::zero();
    for w in words.iter().rev() {
        m = (m << WORD_BITS) + BigUint::from(*w);
    }
    let shift = exp as i64 - (words.len() * WORD_BITS) as i64;
    let mut m = BigInt::from(m);
    if sign == Sign::Neg {
        m = -m;
    }
    Some(if shift >= 0 {
        BigRational::from_integer(m << shift as usize)
    } else {
        BigRational::new(m, BigInt::one() << (-shift) as usize)
    })
}

/// Decimal rounding of an exact rational to `digits` significant digits.
/// Returns the digit string and the decimal exponent of the leading digit.
fn round_significant(x: &BigRational, digits: usize) -> (bool, BigInt, i64) {
    let neg = x.is_negative();
    let ax = x.abs();
    if ax.is_zero() {
        return (false, BigInt::zero(), 0);
    }
    // Leading exponent k with 10^k ≤ |x| < 10^(k+1).
    let est = (ax.numer().bits() as f64 - ax.denom().bits() as f64) * std::f64::consts::LOG10_2;
    let mut k = est.floor() as i64;
    let pow = |e: i64| -> BigRational {
        if e >= 0 {
            BigRational::from_integer(num_traits::pow(BigInt::from(10), e as usize))
        } else {
            BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(10), (-e) as usize))
        }
    };
    while pow(k) > ax {
        k -= 1;
    }
    while pow(k + 1) <= ax {
        k += 1;
    }
    let scaled = &ax * pow(digits as i64 - 1 - k);
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut q = (scaled + half).floor().to_integer();
    if q == num_traits::pow(BigInt::from(10), digits) {
        q /= 10;
        k += 1;
    }
    (neg, q, k)
}

fn format_decimal(neg: bool, q: &BigInt, k: i64, digits: usize) -> String {
    if q.is_zero() {
        return "0".to_string();
    }
    let s = q.to_string();
    debug_assert_eq!(s.len(), digits);
    let body = if k < 0 {
        format!("0.{}{}", "0".repeat((-k - 1) as usize), s)
    } else if (k as usize) + 1 >= digits {
        format!("{}{}", s, "0".repeat(k as usize + 1 - digits))
    } else {
        let (int, frac) = s.split_at(k as usize + 1);
        format!("{}.{}", int, frac)
    };
    if neg {
        format!("-{}", body)
    } else {
        body
    }
}

/// Evaluates an enclosure at increasing precision until both endpoints
/// round to the same `digits`-significant-digit decimal.
pub fn evaluate<F>(digits: usize, mut f: F) -> Result<String, ConstantError>
where
    F: FnMut(&mut Precision) -> Interval,
{
    if digits == 0 {
        return Err(ConstantError::BadDigits(digits));
    }
    let mut bits = ((digits as f64 * 3.33) as usize + 64).next_multiple_of(WORD_BITS);
    for _ in 0..12 {
        let mut prec = Precision::new(bits);
        let iv = f(&mut prec);
        if let (Some(lo), Some(hi)) = (dyadic(&iv.lo), dyadic(&iv.hi)) {
            let (nl, ql, kl) = round_significant(&lo, digits);
            let (nh, qh, kh) = round_significant(&hi, digits);
            if nl == nh && ql == qh && kl == kh {
                return Ok(format_decimal(nl, &ql, kl, digits));
            }
        } else {
            return Err(ConstantError::Domain);
        }
        bits *= 2;
    }
    Err(ConstantError::PrecisionExhausted)
}

/// Interval enclosure converted to a double (mid-point of a narrow enclosure).
pub fn evaluate_f64<F>(f: F) -> f64
where
    F: FnOnce(&mut Precision) -> Interval,
{
    let mut prec = Precision::new(192);
    f(&mut prec).to_f64()
}

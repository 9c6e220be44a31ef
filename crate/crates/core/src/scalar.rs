//! Scalar values: exact complex rationals with a floating-point fallback.
//!
//! The combinatorial oracles work in exact arithmetic only; the symbolic
//! evaluators stay exact as long as every state moment is exact and degrade
//! to `f64` pairs otherwise. Mixing an exact value with a float yields a
//! float.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

pub type ExactComplex = Complex<BigRational>;

/// Absolute tolerance used when comparing float-valued symbolic identities.
pub const SYMBOLIC_TOL: f64 = 1e-12;

/// Absolute tolerance for "exactly zero" assertions evaluated in float mode.
pub const ZERO_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(ExactComplex),
    Float(Complex<f64>),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(ExactComplex::new(BigRational::zero(), BigRational::zero()))
    }

    pub fn one() -> Self {
        Scalar::Exact(ExactComplex::new(BigRational::one(), BigRational::zero()))
    }

    pub fn from_int(v: i64) -> Self {
        Scalar::Exact(ExactComplex::new(
            BigRational::from_integer(BigInt::from(v)),
            BigRational::zero(),
        ))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar::Exact(ExactComplex::new(
            BigRational::new(BigInt::from(num), BigInt::from(den)),
            BigRational::zero(),
        ))
    }

    pub fn from_rational(re: BigRational) -> Self {
        Scalar::Exact(ExactComplex::new(re, BigRational::zero()))
    }

    pub fn from_exact(v: ExactComplex) -> Self {
        Scalar::Exact(v)
    }

    pub fn from_f64(re: f64) -> Self {
        Scalar::Float(Complex::new(re, 0.0))
    }

    pub fn from_complex_f64(v: Complex<f64>) -> Self {
        Scalar::Float(v)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(v) => v.re.is_zero() && v.im.is_zero(),
            Scalar::Float(v) => v.re == 0.0 && v.im == 0.0,
        }
    }

    pub fn to_complex_f64(&self) -> Complex<f64> {
        match self {
            Scalar::Exact(v) => Complex::new(
                v.re.to_f64().unwrap_or(f64::NAN),
                v.im.to_f64().unwrap_or(f64::NAN),
            ),
            Scalar::Float(v) => *v,
        }
    }

    /// Exact part, if this scalar is exact.
    pub fn as_exact(&self) -> Option<&ExactComplex> {
        match self {
            Scalar::Exact(v) => Some(v),
            Scalar::Float(_) => None,
        }
    }

    pub fn conj(&self) -> Self {
        match self {
            Scalar::Exact(v) => Scalar::Exact(ExactComplex::new(v.re.clone(), -v.im.clone())),
            Scalar::Float(v) => Scalar::Float(v.conj()),
        }
    }

    pub fn recip(&self) -> Self {
        match self {
            Scalar::Exact(v) => {
                let norm = v.re.clone() * v.re.clone() + v.im.clone() * v.im.clone();
                assert!(!norm.is_zero(), "division by zero scalar");
                Scalar::Exact(ExactComplex::new(
                    v.re.clone() / norm.clone(),
                    -v.im.clone() / norm,
                ))
            }
            Scalar::Float(v) => Scalar::Float(v.inv()),
        }
    }

    pub fn div(&self, other: &Scalar) -> Self {
        self.clone() * other.recip()
    }

    pub fn pow(&self, mut k: u32) -> Self {
        let mut acc = Scalar::one();
        let mut base = self.clone();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            k >>= 1;
        }
        acc
    }

    pub fn abs_sq(&self) -> Scalar {
        self.clone() * self.conj()
    }

    /// Equality up to `tol` when floats are involved; exact equality otherwise.
    pub fn approx_eq(&self, other: &Scalar, tol: f64) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => {
                let d = self.to_complex_f64() - other.to_complex_f64();
                d.norm_sqr().sqrt() <= tol
            }
        }
    }

    fn promote(&self) -> Complex<f64> {
        self.to_complex_f64()
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

/// Structural equality: exact values compare exactly, floats bitwise.
/// Exact never equals float, even at the same numeric value.
impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            (Scalar::Float(a), Scalar::Float(b)) => a == b,
            _ => false,
        }
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a + b),
            (a, b) => Scalar::Float(a.promote() + b.promote()),
        }
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        self + (-rhs)
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a * b),
            (a, b) => Scalar::Float(a.promote() * b.promote()),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(v) => Scalar::Exact(-v),
            Scalar::Float(v) => Scalar::Float(-v),
        }
    }
}

impl AddAssign for Scalar {
    fn add_assign(&mut self, rhs: Scalar) {
        *self = std::mem::take(self) + rhs;
    }
}

impl SubAssign for Scalar {
    fn sub_assign(&mut self, rhs: Scalar) {
        *self = std::mem::take(self) - rhs;
    }
}

impl MulAssign for Scalar {
    fn mul_assign(&mut self, rhs: Scalar) {
        *self = std::mem::take(self) * rhs;
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(v) => {
                if v.im.is_zero() {
                    write!(f, "{}", fmt_rational(&v.re))
                } else {
                    write!(f, "({},{})", fmt_rational(&v.re), fmt_rational(&v.im))
                }
            }
            Scalar::Float(v) => {
                if v.im == 0.0 {
                    write!(f, "{}", v.re)
                } else {
                    write!(f, "({},{})", v.re, v.im)
                }
            }
        }
    }
}

/// Parse an exact rational written as `a/b`, a decimal, or an integer.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if let Some((num, den)) = text.split_once('/') {
        let n: BigInt = num.trim().parse().ok()?;
        let d: BigInt = den.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some(dot) = text.find('.') {
        let (int_part, frac_part) = text.split_at(dot);
        let frac_part = &frac_part[1..];
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let negative = int_part.starts_with('-');
        let int_val: BigInt = if int_part == "-" || int_part.is_empty() {
            BigInt::zero()
        } else {
            int_part.parse().ok()?
        };
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let frac_val: BigInt = frac_part.parse().ok()?;
        let mag = BigRational::from_integer(int_val.abs()) + BigRational::new(frac_val, scale);
        return Some(if negative { -mag } else { mag });
    }
    let n: BigInt = text.parse().ok()?;
    Some(BigRational::from_integer(n))
}

/// Parse a scalar: rational, decimal, or complex pair `(re,im)`.
pub fn parse_scalar(text: &str) -> Option<Scalar> {
    let text = text.trim();
    if let Some(inner) = text.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
        let (re, im) = inner.split_once(',')?;
        return Some(Scalar::Exact(ExactComplex::new(
            parse_rational(re)?,
            parse_rational(im)?,
        )));
    }
    Some(Scalar::from_rational(parse_rational(text)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_arithmetic_stays_exact() {
        let a = Scalar::from_ratio(1, 3);
        let b = Scalar::from_ratio(1, 6);
        let c = a + b;
        assert_eq!(c, Scalar::from_ratio(1, 2));
        assert!(c.is_exact());
    }

    #[test]
    fn mixing_with_float_promotes() {
        let a = Scalar::from_ratio(1, 2);
        let b = Scalar::from_f64(0.25);
        let c = a * b;
        assert!(!c.is_exact());
        assert!(c.approx_eq(&Scalar::from_f64(0.125), 1e-15));
    }

    #[test]
    fn complex_conjugation_and_modulus() {
        let v = parse_scalar("(1,2)").unwrap();
        let m = v.abs_sq();
        assert_eq!(m, Scalar::from_int(5));
        assert_eq!(v.conj(), parse_scalar("(1,-2)").unwrap());
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse_scalar("2.5").unwrap(), Scalar::from_ratio(5, 2));
        assert_eq!(parse_scalar("-0.125").unwrap(), Scalar::from_ratio(-1, 8));
        assert_eq!(parse_scalar("-1/2").unwrap(), Scalar::from_ratio(-1, 2));
        assert_eq!(
            parse_scalar("(1/2,-3)").unwrap(),
            Scalar::Exact(ExactComplex::new(
                BigRational::new(1.into(), 2.into()),
                BigRational::from_integer((-3).into())
            ))
        );
    }

    #[test]
    fn reciprocal_of_complex() {
        let v = parse_scalar("(0,2)").unwrap();
        let r = v.recip();
        assert_eq!(r, parse_scalar("(0,-1/2)").unwrap());
    }

    #[test]
    fn pow_squares() {
        let v = parse_scalar("(0,1)").unwrap();
        assert_eq!(v.pow(2), Scalar::from_int(-1));
        assert_eq!(v.pow(0), Scalar::one());
    }
}

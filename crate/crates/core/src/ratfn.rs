//! Exact rational functions of the matrix dimension.
//!
//! Partition sums produce values of the form `p(sqrt(N)) / sqrt(N)^k` with
//! exact complex-rational coefficients: falling factorials contribute
//! polynomials in `N` and each edge contributes a power of `1/sqrt(N)`.
//! Coefficients are indexed by powers of `s = sqrt(N)`, so mixed parities
//! (possible for entry laws with odd moments) stay exact.

use crate::scalar::{ExactComplex, Scalar};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RatFnError {
    /// Evaluation at a finite dimension would involve sqrt(N).
    #[error("value is irrational at finite N (odd powers of sqrt(N) remain)")]
    IrrationalAtFiniteN,
    /// The value grows with N; moments of bounded families never do.
    #[error("value diverges as N grows")]
    Unbounded,
}

/// `sum_i coeffs[i] * sqrt(N)^i / sqrt(N)^den_half`.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalInN {
    coeffs: Vec<ExactComplex>,
    den_half: i64,
}

fn czero() -> ExactComplex {
    ExactComplex::new(BigRational::zero(), BigRational::zero())
}

impl RationalInN {
    pub fn zero() -> Self {
        RationalInN { coeffs: Vec::new(), den_half: 0 }
    }

    pub fn constant(v: ExactComplex) -> Self {
        let mut r = RationalInN { coeffs: vec![v], den_half: 0 };
        r.trim();
        r
    }

    pub fn one() -> Self {
        RationalInN::constant(ExactComplex::new(BigRational::one(), BigRational::zero()))
    }

    /// The falling factorial `N (N-1) ... (N-v+1)` — the number of
    /// injective maps of `v` points into `[N]`.
    pub fn falling_factorial(v: usize) -> Self {
        // polynomial in N = s^2
        let mut poly: Vec<BigRational> = vec![BigRational::one()];
        for k in 0..v {
            // multiply by (N - k)
            let kq = BigRational::from_integer(BigInt::from(k));
            let mut next = vec![BigRational::zero(); poly.len() + 1];
            for (i, c) in poly.iter().enumerate() {
                next[i + 1] += c.clone();
                next[i] -= c.clone() * kq.clone();
            }
            poly = next;
        }
        let coeffs = poly
            .into_iter()
            .flat_map(|c| [ExactComplex::new(c, BigRational::zero()), czero()])
            .collect::<Vec<_>>();
        let mut r = RationalInN { coeffs, den_half: 0 };
        r.trim();
        r
    }

    /// Divide by `sqrt(N)^k`.
    pub fn div_sqrt_pow(mut self, k: i64) -> Self {
        self.den_half += k;
        self.trim();
        self
    }

    pub fn scale(mut self, s: &ExactComplex) -> Self {
        for c in &mut self.coeffs {
            *c = c.clone() * s.clone();
        }
        self.trim();
        self
    }

    pub fn add(&self, other: &RationalInN) -> Self {
        let den = self.den_half.max(other.den_half);
        let shift_a = (den - self.den_half) as usize;
        let shift_b = (den - other.den_half) as usize;
        let len = (self.coeffs.len() + shift_a).max(other.coeffs.len() + shift_b);
        let mut coeffs = vec![czero(); len];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[i + shift_a] += c.clone();
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            coeffs[i + shift_b] += c.clone();
        }
        let mut r = RationalInN { coeffs, den_half: den };
        r.trim();
        r
    }

    pub fn sub(&self, other: &RationalInN) -> Self {
        let neg = RationalInN {
            coeffs: other.coeffs.iter().map(|c| -c.clone()).collect(),
            den_half: other.den_half,
        };
        self.add(&neg)
    }

    pub fn mul(&self, other: &RationalInN) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return RationalInN::zero();
        }
        let mut coeffs = vec![czero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.re.is_zero() && a.im.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a.clone() * b.clone();
            }
        }
        let mut r = RationalInN { coeffs, den_half: self.den_half + other.den_half };
        r.trim();
        r
    }

    fn trim(&mut self) {
        while self.coeffs.last().map_or(false, |c| c.re.is_zero() && c.im.is_zero()) {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.den_half = 0;
            return;
        }
        // cancel common powers of sqrt(N)
        let low = self
            .coeffs
            .iter()
            .position(|c| !(c.re.is_zero() && c.im.is_zero()))
            .unwrap();
        if low > 0 {
            self.coeffs.drain(..low);
            self.den_half -= low as i64;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Exact value at dimension `n`. Fails when odd powers of sqrt(N)
    /// survive, which cannot happen for entry laws supported on even
    /// total degrees.
    pub fn eval_at(&self, n: u64) -> Result<Scalar, RatFnError> {
        if self.is_zero() {
            return Ok(Scalar::zero());
        }
        for (i, c) in self.coeffs.iter().enumerate() {
            let exp = i as i64 - self.den_half;
            if exp.rem_euclid(2) == 1 && !(c.re.is_zero() && c.im.is_zero()) {
                return Err(RatFnError::IrrationalAtFiniteN);
            }
        }
        let nq = BigRational::from_integer(BigInt::from(n));
        let mut acc = czero();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.re.is_zero() && c.im.is_zero() {
                continue;
            }
            let exp = (i as i64 - self.den_half) / 2;
            let p = if exp >= 0 {
                let mut v = BigRational::one();
                for _ in 0..exp {
                    v *= nq.clone();
                }
                v
            } else {
                let mut v = BigRational::one();
                for _ in 0..(-exp) {
                    v /= nq.clone();
                }
                v
            };
            acc += c.clone() * ExactComplex::new(p, BigRational::zero());
        }
        Ok(Scalar::from_exact(acc))
    }

    /// The limit as N grows.
    pub fn limit(&self) -> Result<Scalar, RatFnError> {
        if self.is_zero() {
            return Ok(Scalar::zero());
        }
        let top = self.coeffs.len() as i64 - 1;
        match top.cmp(&self.den_half) {
            std::cmp::Ordering::Less => Ok(Scalar::zero()),
            std::cmp::Ordering::Equal => {
                Ok(Scalar::from_exact(self.coeffs.last().unwrap().clone()))
            }
            std::cmp::Ordering::Greater => Err(RatFnError::Unbounded),
        }
    }
}

impl fmt::Display for RationalInN {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.re.is_zero() && c.im.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let exp = i as i64 - self.den_half;
            let coeff = Scalar::from_exact(c.clone());
            if exp == 0 {
                write!(f, "{coeff}")?;
            } else {
                let power = if exp % 2 == 0 {
                    let e = exp / 2;
                    if e == 1 { "N".to_string() } else { format!("N^{e}") }
                } else {
                    format!("N^({exp}/2)")
                };
                if coeff == Scalar::one() {
                    write!(f, "{power}")?;
                } else {
                    write!(f, "{coeff}*{power}")?;
                }
            }
        }
        Ok(())
    }
}

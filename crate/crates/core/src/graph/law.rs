//! Entry distributions of a Wigner family: the joint moments
//! `mu(a,b) = E[x^a conj(x)^b]` of an off-diagonal entry and the moments
//! `d_k` of a diagonal entry.
//!
//! Required normalizations: centered entries, unit off-diagonal variance,
//! null pseudo-variance, entries distributed as their conjugates (so
//! `mu(a,b) = mu(b,a)`, real).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub const DEFAULT_DEGREE_CAP: usize = 12;

#[derive(Clone, Debug)]
pub struct WignerEntryLaw {
    pub name: String,
    degree_cap: usize,
    mu: Vec<BigRational>,
    diag: Vec<BigRational>,
    mu_int: Option<Vec<i64>>,
    diag_int: Option<Vec<i64>>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LawError {
    #[error("moment {what} violates the required normalization: {detail}")]
    BadNormalization { what: String, detail: String },
    #[error("mu({a},{b}) != mu({b},{a}): conjugate-symmetry fails")]
    NotSymmetric { a: usize, b: usize },
    #[error("required moment of order {order} exceeds the degree cap {cap}")]
    DegreeCapExceeded { order: usize, cap: usize },
    #[error("unknown preset {0}")]
    UnknownPreset(String),
}

impl WignerEntryLaw {
    /// `x = (g1 + i g2)/sqrt(2)` for independent standard normals:
    /// `mu(a,b) = a! 1(a=b)`; diagonal entries standard real normal.
    pub fn complex_gaussian(degree_cap: usize) -> Self {
        let side = degree_cap + 1;
        let mut mu = vec![BigRational::zero(); side * side];
        for a in 0..side {
            if 2 * a <= degree_cap {
                let mut fact = BigInt::one();
                for k in 1..=a {
                    fact *= k;
                }
                mu[a * side + a] = BigRational::from_integer(fact);
            }
        }
        let mut diag = vec![BigRational::zero(); degree_cap + 1];
        // standard normal moments: (k-1)!! for even k
        let mut dd = BigInt::one();
        diag[0] = BigRational::one();
        for k in (2..=degree_cap).step_by(2) {
            dd *= k as i64 - 1;
            diag[k] = BigRational::from_integer(dd.clone());
        }
        Self::finish("complex-gaussian", degree_cap, mu, diag)
    }

    /// `x` uniform on `{1, i, -1, -i}`: `mu(a,b) = 1(a = b mod 4)`;
    /// diagonal entries Rademacher.
    pub fn quaternary(degree_cap: usize) -> Self {
        let side = degree_cap + 1;
        let mut mu = vec![BigRational::zero(); side * side];
        for a in 0..side {
            for b in 0..side {
                if a + b <= degree_cap && (a as i64 - b as i64).rem_euclid(4) == 0 {
                    mu[a * side + b] = BigRational::one();
                }
            }
        }
        let mut diag = vec![BigRational::zero(); degree_cap + 1];
        for k in (0..=degree_cap).step_by(2) {
            diag[k] = BigRational::one();
        }
        Self::finish("quaternary", degree_cap, mu, diag)
    }

    pub fn preset(name: &str, degree_cap: usize) -> Result<Self, LawError> {
        match name {
            "complex-gaussian" => Ok(Self::complex_gaussian(degree_cap)),
            "quaternary" => Ok(Self::quaternary(degree_cap)),
            other => Err(LawError::UnknownPreset(other.to_string())),
        }
    }

    /// Free-form table, validated against the normalization invariants.
    pub fn from_tables(
        name: &str,
        degree_cap: usize,
        mu_entries: &[(usize, usize, BigRational)],
        diag_entries: &[BigRational],
    ) -> Result<Self, LawError> {
        let side = degree_cap + 1;
        let mut mu = vec![BigRational::zero(); side * side];
        for (a, b, v) in mu_entries {
            if a + b > degree_cap {
                return Err(LawError::DegreeCapExceeded { order: a + b, cap: degree_cap });
            }
            mu[a * side + b] = v.clone();
        }
        let mut diag = vec![BigRational::zero(); degree_cap + 1];
        for (k, v) in diag_entries.iter().enumerate() {
            if k > degree_cap {
                return Err(LawError::DegreeCapExceeded { order: k, cap: degree_cap });
            }
            diag[k] = v.clone();
        }
        let law = Self::finish(name, degree_cap, mu, diag);
        law.validate()?;
        Ok(law)
    }

    fn finish(
        name: &str,
        degree_cap: usize,
        mu: Vec<BigRational>,
        diag: Vec<BigRational>,
    ) -> Self {
        let to_int = |v: &[BigRational]| -> Option<Vec<i64>> {
            v.iter()
                .map(|r| {
                    if r.denom().is_one() {
                        i64::try_from(r.numer().clone()).ok()
                    } else {
                        None
                    }
                })
                .collect()
        };
        let mu_int = to_int(&mu);
        let diag_int = to_int(&diag);
        WignerEntryLaw { name: name.to_string(), degree_cap, mu, diag, mu_int, diag_int }
    }

    fn validate(&self) -> Result<(), LawError> {
        let bad = |what: &str, detail: &str| {
            Err(LawError::BadNormalization { what: what.to_string(), detail: detail.to_string() })
        };
        if !self.mu_rat(0, 0).is_one() {
            return bad("mu(0,0)", "must be 1");
        }
        if !self.mu_rat(1, 0).is_zero() || !self.mu_rat(0, 1).is_zero() {
            return bad("mu(1,0)", "entries must be centered");
        }
        if !self.mu_rat(1, 1).is_one() {
            return bad("mu(1,1)", "off-diagonal variance must be 1");
        }
        if !self.mu_rat(2, 0).is_zero() || !self.mu_rat(0, 2).is_zero() {
            return bad("mu(2,0)", "pseudo-variance must vanish");
        }
        for a in 0..=self.degree_cap {
            for b in 0..=self.degree_cap.saturating_sub(a) {
                if self.mu_rat(a, b) != self.mu_rat(b, a) {
                    return Err(LawError::NotSymmetric { a, b });
                }
            }
        }
        if !self.diag_rat(0).is_one() {
            return bad("diag(0)", "must be 1");
        }
        if !self.diag_rat(1).is_zero() {
            return bad("diag(1)", "diagonal entries must be centered");
        }
        Ok(())
    }

    pub fn degree_cap(&self) -> usize {
        self.degree_cap
    }

    /// All moments integral and within i64: enables the fast integer sweep.
    pub fn is_integral(&self) -> bool {
        self.mu_int.is_some() && self.diag_int.is_some()
    }

    pub fn mu_rat(&self, a: usize, b: usize) -> &BigRational {
        &self.mu[a * (self.degree_cap + 1) + b]
    }

    pub fn diag_rat(&self, k: usize) -> &BigRational {
        &self.diag[k]
    }

    #[inline]
    pub fn mu_i64(&self, a: usize, b: usize) -> i64 {
        self.mu_int.as_ref().unwrap()[a * (self.degree_cap + 1) + b]
    }

    #[inline]
    pub fn diag_i64(&self, k: usize) -> i64 {
        self.diag_int.as_ref().unwrap()[k]
    }

    /// The fourth moment of an off-diagonal entry, `E[|x_12|^4]`.
    pub fn m4(&self) -> &BigRational {
        self.mu_rat(2, 2)
    }

    pub fn check_order(&self, order: usize) -> Result<(), LawError> {
        if order > self.degree_cap {
            Err(LawError::DegreeCapExceeded { order, cap: self.degree_cap })
        } else {
            Ok(())
        }
    }

}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_moments() {
        let law = WignerEntryLaw::complex_gaussian(12);
        assert_eq!(law.mu_i64(1, 1), 1);
        assert_eq!(law.mu_i64(2, 2), 2);
        assert_eq!(law.mu_i64(3, 3), 6);
        assert_eq!(law.mu_i64(2, 0), 0);
        assert_eq!(law.mu_i64(2, 1), 0);
        assert_eq!(law.diag_i64(2), 1);
        assert_eq!(law.diag_i64(4), 3);
        assert_eq!(law.diag_i64(6), 15);
        assert_eq!(law.diag_i64(3), 0);
        assert!(law.is_integral());
    }

    #[test]
    fn quaternary_moments() {
        let law = WignerEntryLaw::quaternary(12);
        assert_eq!(law.mu_i64(1, 1), 1);
        assert_eq!(law.mu_i64(2, 2), 1);
        assert_eq!(law.mu_i64(4, 0), 1); // E[x^4] = 1 on fourth roots of unity
        assert_eq!(law.mu_i64(2, 0), 0);
        assert_eq!(law.mu_i64(3, 1), 0);
        assert_eq!(law.diag_i64(2), 1);
        assert_eq!(law.diag_i64(4), 1);
        assert_eq!(law.diag_i64(5), 0);
    }

    #[test]
    fn m4_distinguishes_presets() {
        assert_eq!(
            WignerEntryLaw::complex_gaussian(8).m4(),
            &BigRational::from_integer(2.into())
        );
        assert_eq!(WignerEntryLaw::quaternary(8).m4(), &BigRational::one());
    }

    #[test]
    fn validation_rejects_bad_tables() {
        let one = BigRational::one;
        // pseudo-variance 1 violates the null pseudo-variance requirement
        let bad = WignerEntryLaw::from_tables(
            "bad",
            4,
            &[(0, 0, one()), (1, 1, one()), (2, 0, one()), (0, 2, one())],
            &[one()],
        );
        assert!(matches!(bad, Err(LawError::BadNormalization { .. })));

        let asym = WignerEntryLaw::from_tables(
            "asym",
            4,
            &[(0, 0, one()), (1, 1, one()), (2, 1, one())],
            &[one()],
        );
        assert!(matches!(asym, Err(LawError::NotSymmetric { .. })));
    }

    #[test]
    fn preset_lookup() {
        assert!(WignerEntryLaw::preset("complex-gaussian", 8).is_ok());
        assert!(WignerEntryLaw::preset("quaternary", 8).is_ok());
        assert!(matches!(
            WignerEntryLaw::preset("cauchy", 8),
            Err(LawError::UnknownPreset(_))
        ));
    }
}

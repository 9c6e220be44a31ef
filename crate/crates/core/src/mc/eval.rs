//! Evaluation of bracketed expressions on concrete matrices: product for
//! concatenation, diagonal projection for the bracket, conjugate
//! transpose for the adjoint.
//!
//! Traces are computed by splitting a word in half and pairing the two
//! halves entrywise, which saves the final O(N^3) product; sub-products
//! are cached per replica, and powers of a single Wigner letter take the
//! Hermitian fast path.

use super::ensemble::{BindError, Bindings};
use super::matrix::{Matrix, C64};
use crate::expr::{Atom, DeltaMonomial, DeltaPolynomial, Kind};
use std::collections::HashMap;
use std::sync::Arc;

pub struct TraceEvaluator<'a> {
    bindings: &'a Bindings,
    cache: HashMap<DeltaMonomial, Arc<Matrix>>,
}

impl<'a> TraceEvaluator<'a> {
    pub fn new(bindings: &'a Bindings) -> Self {
        TraceEvaluator { bindings, cache: HashMap::new() }
    }

    /// Unnormalized trace of a polynomial (`Tr 1 = N`).
    pub fn trace(&mut self, p: &DeltaPolynomial) -> Result<C64, BindError> {
        let mut acc = C64::new(0.0, 0.0);
        for (m, c) in p.terms() {
            acc += c.to_complex_f64() * self.trace_monomial(m)?;
        }
        Ok(acc)
    }

    pub fn trace_monomial(&mut self, m: &DeltaMonomial) -> Result<C64, BindError> {
        let atoms = m.atoms();
        match atoms.len() {
            0 => Ok(C64::new(self.bindings.n as f64, 0.0)),
            1 => Ok(self.eval(m)?.trace()),
            _ => {
                let mid = split_point(atoms.len());
                let left = DeltaMonomial::from_atoms(atoms[..mid].to_vec());
                let right = DeltaMonomial::from_atoms(atoms[mid..].to_vec());
                let l = self.eval(&left)?;
                let r = self.eval(&right)?;
                if wigner_power_base(m).is_some() {
                    // both halves Hermitian: contiguous pairing
                    Ok(l.trace_of_product_hermitian(&r))
                } else {
                    Ok(l.trace_of_product(&r))
                }
            }
        }
    }

    /// The matrix of a monomial, cached.
    pub fn eval(&mut self, m: &DeltaMonomial) -> Result<Arc<Matrix>, BindError> {
        if let Some(hit) = self.cache.get(m) {
            return Ok(hit.clone());
        }
        let atoms = m.atoms();
        let value: Arc<Matrix> = match atoms {
            [] => Arc::new(Matrix::identity(self.bindings.n)),
            [Atom::Letter(l)] => self.bindings.get(l)?,
            [Atom::Bracket(inner)] => {
                let w = self.eval(&inner.clone())?;
                Arc::new(w.diag_projection())
            }
            _ => {
                let mid = split_point(atoms.len());
                let left = DeltaMonomial::from_atoms(atoms[..mid].to_vec());
                let right = DeltaMonomial::from_atoms(atoms[mid..].to_vec());
                let l = self.eval(&left)?;
                let r = self.eval(&right)?;
                // powers of one Hermitian letter commute
                let product = if wigner_power_base(m).is_some() {
                    l.mul_commuting_hermitian(&r)
                } else {
                    l.mul(&r)
                };
                Arc::new(product)
            }
        };
        self.cache.insert(m.clone(), value.clone());
        Ok(value)
    }
}

/// Near-middle split, rounded to an even offset so that periodic words
/// (powers of a letter or of a two-atom block) reuse their half products
/// across the whole family of traces.
fn split_point(len: usize) -> usize {
    let mid = len / 2;
    if mid % 2 == 1 && mid + 1 < len {
        mid + 1
    } else {
        mid
    }
}

/// The single Wigner letter `x` when the monomial is `x^k`, k >= 1.
fn wigner_power_base(m: &DeltaMonomial) -> Option<()> {
    let mut letters = m.atoms().iter().map(|a| match a {
        Atom::Letter(l) if l.kind == Kind::Wigner => Some(*l),
        _ => None,
    });
    let first = letters.next()??;
    for l in letters {
        if l? != first {
            return None;
        }
    }
    Some(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_polynomial, Alphabet, Letter};
    use crate::mc::ensemble::{sample_wigner, EntryLawKind};

    fn parse(text: &str) -> DeltaPolynomial {
        parse_polynomial(text, &Alphabet::permissive()).unwrap()
    }

    #[test]
    fn identity_and_unit() {
        let mut b = Bindings::empty(5);
        b.insert(Letter::hermitian(1), Matrix::identity(5));
        let mut ev = TraceEvaluator::new(&b);
        // Tr 1 = N, Tr y1 = N for the identity binding
        assert_eq!(ev.trace(&parse("1")).unwrap(), C64::new(5.0, 0.0));
        assert_eq!(ev.trace(&parse("y1")).unwrap(), C64::new(5.0, 0.0));
    }

    #[test]
    fn bracket_preserves_trace() {
        let x = sample_wigner(EntryLawKind::ComplexGaussian, 1, 16, 3, 0);
        let mut b = Bindings::empty(16);
        b.insert(Letter::wigner(1), x);
        let mut ev = TraceEvaluator::new(&b);
        let plain = ev.trace(&parse("x1^3")).unwrap();
        let wrapped = ev.trace(&parse("D[x1^3]")).unwrap();
        assert!((plain - wrapped).norm() < 1e-10);
    }

    #[test]
    fn split_trace_matches_full_product() {
        let x = sample_wigner(EntryLawKind::Quaternary, 1, 12, 5, 1);
        let y = sample_wigner(EntryLawKind::ComplexGaussian, 2, 12, 5, 1);
        let mut b = Bindings::empty(12);
        b.insert(Letter::wigner(1), x.clone());
        b.insert(Letter::wigner(2), y.clone());
        let mut ev = TraceEvaluator::new(&b);
        let fast = ev.trace(&parse("x1*x2*x1*x1*x2")).unwrap();
        let direct = x.mul(&y).mul(&x).mul(&x).mul(&y).trace();
        assert!((fast - direct).norm() < 1e-9);
    }

    #[test]
    fn bracketed_word_evaluates_as_diagonal_product() {
        let x = sample_wigner(EntryLawKind::ComplexGaussian, 1, 10, 8, 2);
        let y = sample_wigner(EntryLawKind::ComplexGaussian, 2, 10, 8, 2);
        let mut b = Bindings::empty(10);
        b.insert(Letter::wigner(1), x.clone());
        b.insert(Letter::wigner(2), y.clone());
        let mut ev = TraceEvaluator::new(&b);
        let fast = ev.trace(&parse("x1*D[x2^2]*x1")).unwrap();
        let direct = x.mul(&y.mul(&y).diag_projection()).mul(&x).trace();
        assert!((fast - direct).norm() < 1e-9);
    }

    #[test]
    fn semicircle_second_moment_at_moderate_size() {
        // (1/N) Tr x^2 concentrates near 1
        let n = 256;
        let x = sample_wigner(EntryLawKind::ComplexGaussian, 1, n, 42, 0);
        let mut b = Bindings::empty(n);
        b.insert(Letter::wigner(1), x);
        let mut ev = TraceEvaluator::new(&b);
        let tr = ev.trace(&parse("x1^2")).unwrap() / n as f64;
        assert!((tr.re - 1.0).abs() < 0.1, "{tr}");
    }
}

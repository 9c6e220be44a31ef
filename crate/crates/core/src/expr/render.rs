//! Renderer for the expression grammar. `parse(render(p)) == p` for
//! canonical polynomials with exact coefficients.

use super::{Atom, DeltaMonomial, DeltaPolynomial};
use crate::scalar::Scalar;
use num_traits::Signed;

pub fn render_monomial(m: &DeltaMonomial) -> String {
    if m.is_empty() {
        return "1".to_string();
    }
    let mut parts: Vec<String> = Vec::new();
    let atoms = m.atoms();
    let mut i = 0;
    while i < atoms.len() {
        // compress runs of equal atoms into powers
        let mut j = i + 1;
        while j < atoms.len() && atoms[j] == atoms[i] {
            j += 1;
        }
        let run = j - i;
        let base = match &atoms[i] {
            Atom::Letter(l) => l.to_string(),
            Atom::Bracket(inner) => format!("D[{}]", render_monomial(inner)),
        };
        if run == 1 {
            parts.push(base);
        } else {
            parts.push(format!("{base}^{run}"));
        }
        i = j;
    }
    parts.join("*")
}

/// Sign-split rendering of a coefficient: `(is_negative, magnitude-text)`.
/// Only exact real-rational coefficients are sign-split; everything else
/// renders inside its own parentheses or as-is.
fn coeff_text(c: &Scalar) -> (bool, String) {
    if let Some(v) = c.as_exact() {
        use num_traits::Zero;
        if v.im.is_zero() {
            let neg = v.re.is_negative();
            let mag = if neg { -v.re.clone() } else { v.re.clone() };
            let s = Scalar::from_rational(mag);
            return (neg, s.to_string());
        }
    }
    (false, c.to_string())
}

pub fn render_polynomial(p: &DeltaPolynomial) -> String {
    if p.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (idx, (m, c)) in p.terms().enumerate() {
        let (neg, mag) = coeff_text(c);
        if idx == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let unit_coeff = mag == "1";
        if m.is_empty() {
            out.push_str(&mag);
        } else if unit_coeff {
            out.push_str(&render_monomial(m));
        } else {
            out.push_str(&mag);
            out.push('*');
            out.push_str(&render_monomial(m));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_polynomial, Alphabet};

    #[test]
    fn renders_powers_and_brackets() {
        let p = parse_polynomial("x1*x1*D[y1*y1]", &Alphabet::permissive()).unwrap();
        let m = p.as_single_monomial().unwrap();
        assert_eq!(render_monomial(m), "x1^2*D[y1^2]");
    }

    #[test]
    fn renders_unit_and_zero() {
        let one = DeltaPolynomial::one();
        assert_eq!(render_polynomial(&one), "1");
        assert_eq!(render_polynomial(&DeltaPolynomial::zero()), "0");
    }

    #[test]
    fn renders_signs() {
        let p = parse_polynomial("x1 - 2*y1", &Alphabet::permissive()).unwrap();
        let text = render_polynomial(&p);
        let q = parse_polynomial(&text, &Alphabet::permissive()).unwrap();
        assert_eq!(p, q);
    }
}

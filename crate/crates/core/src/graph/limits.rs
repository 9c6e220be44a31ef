//! Large-dimension limits, computed two independent ways and compared.
//!
//! Route (a) takes the limit of the exact rational function of N. Route
//! (b) sums the structural weights over classified quotients only:
//! double trees at first order, double-unicyclic and 4-2-tree quotients
//! for covariances. The two must agree exactly; a mismatch is reported as
//! an internal error, never patched.

use super::moments::{
    assemble, exact_trace_sum, sweep_dispatch, LawSet, OracleError, SweepGraph,
};
use super::TestGraph;
use crate::expr::DeltaMonomial;
use crate::scalar::Scalar;

/// Limit of `E[(1/N) Tr m]`, asserted equal between the rational-function
/// route and the double-tree classification sum.
pub fn limit_moment(
    m: &DeltaMonomial,
    laws: &LawSet,
    cap: usize,
) -> Result<Scalar, OracleError> {
    if m.is_empty() {
        return Ok(Scalar::one());
    }
    let g = TestGraph::cactus(m)?;
    let sw = SweepGraph::prepare(&[&g], laws, cap)?;
    let res = sweep_dispatch(&sw, true);
    let exact = assemble(&res.by_blocks, sw.edges.len() as i64 + 2);
    let a = exact.limit()?;
    let b = Scalar::from_rational(res.class_sum);
    if a != b {
        return Err(OracleError::Internal(format!(
            "limit routes disagree for a first-order moment: rational-function {a}, \
             double-tree sum {b}"
        )));
    }
    Ok(a)
}

/// Limit of `Cov(Tr m1, Tr m2)`, asserted equal between the
/// rational-function route and the classification sum over
/// double-unicyclic and 4-2-tree quotients.
pub fn limit_covariance(
    m1: &DeltaMonomial,
    m2: &DeltaMonomial,
    laws: &LawSet,
    cap: usize,
) -> Result<Scalar, OracleError> {
    if m1.is_empty() || m2.is_empty() {
        return Ok(Scalar::zero());
    }
    let g1 = TestGraph::cactus(m1)?;
    let g2 = TestGraph::cactus(m2)?;
    let sw = SweepGraph::prepare(&[&g1, &g2], laws, cap)?;
    let res = sweep_dispatch(&sw, true);
    let joint = assemble(&res.by_blocks, sw.edges.len() as i64);
    let t1 = exact_trace_sum(m1, laws, cap)?;
    let t2 = exact_trace_sum(m2, laws, cap)?;
    let a = joint.sub(&t1.mul(&t2)).limit()?;
    let b = Scalar::from_rational(res.class_sum);
    if a != b {
        return Err(OracleError::Internal(format!(
            "limit routes disagree for a trace covariance: rational-function {a}, \
             classified sum {b}"
        )));
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::super::law::WignerEntryLaw;
    use super::super::moments::{exact_covariance, exact_moment};
    use super::*;
    use crate::expr::{parse_polynomial, Alphabet};

    fn mono(text: &str) -> DeltaMonomial {
        parse_polynomial(text, &Alphabet::permissive())
            .unwrap()
            .as_single_monomial()
            .unwrap()
            .clone()
    }

    fn gaussian() -> LawSet {
        LawSet::uniform(WignerEntryLaw::complex_gaussian(12))
    }

    fn quaternary() -> LawSet {
        LawSet::uniform(WignerEntryLaw::quaternary(12))
    }

    #[test]
    fn second_moment_exact_formula() {
        // E[(1/N) Tr x^2] = (N-1)/N * mu(1,1) + d2/N = 1 for both presets
        for laws in [gaussian(), quaternary()] {
            let r = exact_moment(&mono("x1^2"), &laws, 14).unwrap();
            assert_eq!(r.eval_at(5).unwrap(), Scalar::one());
            assert_eq!(r.limit().unwrap(), Scalar::one());
        }
    }

    #[test]
    fn odd_moments_vanish() {
        let r = exact_moment(&mono("x1"), &gaussian(), 14).unwrap();
        assert!(r.is_zero());
        let r3 = exact_moment(&mono("x1^3"), &gaussian(), 14).unwrap();
        assert!(r3.is_zero());
    }

    #[test]
    fn fourth_moment_limit_is_catalan_two() {
        for laws in [gaussian(), quaternary()] {
            assert_eq!(
                limit_moment(&mono("x1^4"), &laws, 14).unwrap(),
                Scalar::from_int(2)
            );
        }
    }

    #[test]
    fn catalan_limits_through_degree_ten() {
        let expected = [1i64, 2, 5, 14, 42];
        for (k, c) in expected.iter().enumerate() {
            let m = mono(&format!("x1^{}", 2 * (k + 1)));
            assert_eq!(
                limit_moment(&m, &gaussian(), 14).unwrap(),
                Scalar::from_int(*c),
                "k = {}",
                k + 1
            );
        }
    }

    #[test]
    fn trace_variance_of_x_is_d2() {
        // Cov(Tr x, Tr x) = d2 exactly, at every N
        for laws in [gaussian(), quaternary()] {
            let c = exact_covariance(&mono("x1"), &mono("x1"), &laws, 14).unwrap();
            assert_eq!(c.eval_at(3).unwrap(), Scalar::one());
            assert_eq!(c.eval_at(64).unwrap(), Scalar::one());
            assert_eq!(limit_covariance(&mono("x1"), &mono("x1"), &laws, 14).unwrap(), Scalar::one());
        }
    }

    #[test]
    fn trace_variance_of_x_squared_detects_fourth_moment() {
        // Var(Tr x^2) = 2 exactly for complex Gaussian, 0 for quaternary
        let m = mono("x1^2");
        let g = exact_covariance(&m, &m, &gaussian(), 14).unwrap();
        assert_eq!(g.eval_at(4).unwrap(), Scalar::from_int(2));
        assert_eq!(g.limit().unwrap(), Scalar::from_int(2));
        let q = exact_covariance(&m, &m, &quaternary(), 14).unwrap();
        assert!(q.is_zero());
        assert_eq!(
            limit_covariance(&m, &m, &gaussian(), 14).unwrap(),
            Scalar::from_int(2)
        );
        assert_eq!(
            limit_covariance(&m, &m, &quaternary(), 14).unwrap(),
            Scalar::zero()
        );
    }

    #[test]
    fn distinct_families_have_zero_covariance() {
        let c = exact_covariance(&mono("x1"), &mono("x2"), &gaussian(), 14).unwrap();
        assert!(c.is_zero());
        let c2 = exact_covariance(&mono("x1^2"), &mono("x2^2"), &gaussian(), 14).unwrap();
        assert!(c2.is_zero());
    }

    #[test]
    fn bracket_moments_agree_between_presets_at_first_order() {
        for text in ["D[x1^2]", "x1*D[x1^2]*x1", "D[x1*D[x1^2]*x1]"] {
            let m = mono(text);
            let g = limit_moment(&m, &gaussian(), 14).unwrap();
            let q = limit_moment(&m, &quaternary(), 14).unwrap();
            assert_eq!(g, q, "{text}");
        }
    }
}

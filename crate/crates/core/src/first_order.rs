//! The limiting trace functional, evaluated by the generalized
//! Schwinger-Dyson recursion.
//!
//! For a word starting with a Wigner letter the functional satisfies
//!
//! ```text
//! Phi[x m] = Phi[x^2] * sum over m = l x r of Phi[l] Phi[r]
//! ```
//!
//! summing over top-level occurrences of the same letter. Words whose
//! Wigner letters all sit inside brackets are first rewritten by ground
//! block change (trace-preserving) until one surfaces; bracket-only words
//! in deterministic letters factorize over the blocks of their
//! non-crossing partition and bottom out in the supplied moments.

use crate::expr::{
    render_monomial, Atom, DeltaMonomial, DeltaPolynomial, FamilyTag, Kind, Letter,
};
use crate::scalar::{Scalar, SYMBOLIC_TOL};
use std::collections::{BTreeMap, HashMap};
use std::hash::{Hash, Hasher};

/// Moment model of one deterministic family.
#[derive(Clone, Debug)]
pub enum YModel {
    /// All words evaluate to `c^length` (a scalar matrix).
    ScalarValue(Scalar),
    /// Single self-adjoint letter; a word of length `k` evaluates to
    /// `moments[k]`.
    PowerMoments(Vec<Scalar>),
}

#[derive(Clone, Debug, Default)]
pub struct FirstOrderState {
    wigner_variance: BTreeMap<u32, Scalar>,
    y_models: BTreeMap<u32, YModel>,
    /// Joint moments for words (or bracketed monomials) not covered by the
    /// per-family models, keyed by cyclic normal form.
    y_table: BTreeMap<DeltaMonomial, Scalar>,
    h5: bool,
}

impl FirstOrderState {
    pub fn new() -> Self {
        FirstOrderState { h5: true, ..Default::default() }
    }

    /// `Phi(x^2)` for one Wigner family (default 1).
    pub fn with_wigner_variance(mut self, family: u32, v: Scalar) -> Self {
        self.wigner_variance.insert(family, v);
        self
    }

    pub fn with_scalar_y(mut self, family: u32, c: Scalar) -> Self {
        self.y_models.insert(family, YModel::ScalarValue(c));
        self
    }

    pub fn with_power_y(mut self, family: u32, moments: Vec<Scalar>) -> Self {
        self.y_models.insert(family, YModel::PowerMoments(moments));
        self
    }

    pub fn with_y_word(mut self, word: DeltaMonomial, value: Scalar) -> Self {
        self.y_table.insert(word.cyclic_normal_form(), value);
        self
    }

    /// Whether evaluation may factorize bracket blocks of deterministic
    /// words into products (on by default; the engine's scope assumes it).
    pub fn with_h5(mut self, h5: bool) -> Self {
        self.h5 = h5;
        self
    }

    pub fn h5(&self) -> bool {
        self.h5
    }

    pub fn variance(&self, family: u32) -> Scalar {
        self.wigner_variance.get(&family).cloned().unwrap_or_else(Scalar::one)
    }

    /// Stable fingerprint for cache keying.
    pub fn fingerprint(&self) -> u64 {
        let mut text = String::new();
        for (f, v) in &self.wigner_variance {
            text.push_str(&format!("w{f}={v};"));
        }
        for (f, m) in &self.y_models {
            match m {
                YModel::ScalarValue(c) => text.push_str(&format!("ys{f}={c};")),
                YModel::PowerMoments(ms) => {
                    text.push_str(&format!("yp{f}="));
                    for v in ms {
                        text.push_str(&format!("{v},"));
                    }
                    text.push(';');
                }
            }
        }
        for (m, v) in &self.y_table {
            text.push_str(&format!("t{}={v};", render_monomial(m)));
        }
        text.push_str(if self.h5 { "h5" } else { "noh5" });
        let mut h = std::collections::hash_map::DefaultHasher::new();
        text.hash(&mut h);
        h.finish()
    }

    /// Moment of a plain word in deterministic letters.
    fn word_moment(&self, letters: &[Letter]) -> Result<Scalar, EvalError> {
        if letters.is_empty() {
            return Ok(Scalar::one());
        }
        // scalar families commute out
        let mut factor = Scalar::one();
        let mut rest: Vec<Letter> = Vec::with_capacity(letters.len());
        for l in letters {
            match self.y_models.get(&l.family) {
                Some(YModel::ScalarValue(c)) => factor *= c.clone(),
                _ => rest.push(*l),
            }
        }
        if rest.is_empty() {
            return Ok(factor);
        }
        let fam = rest[0].family;
        if rest.iter().all(|l| l.family == fam && l.partner == fam) {
            if let Some(YModel::PowerMoments(ms)) = self.y_models.get(&fam) {
                let v = ms.get(rest.len()).cloned().ok_or_else(|| {
                    EvalError::MissingYMoment {
                        word: format!("y{fam}^{} (power table too short)", rest.len()),
                    }
                })?;
                return Ok(factor * v);
            }
        }
        let word = DeltaMonomial::from_atoms(rest.iter().map(|l| Atom::Letter(*l)).collect());
        match self.y_table.get(&word.cyclic_normal_form()) {
            Some(v) => Ok(factor * v.clone()),
            None => Err(EvalError::MissingYMoment { word: render_monomial(&word) }),
        }
    }

    /// Moment of a monomial in deterministic letters only. Bracketed
    /// monomials factorize over blocks under H5, otherwise they must be
    /// present in the joint table.
    fn y_monomial(&self, m: &DeltaMonomial) -> Result<Scalar, EvalError> {
        if m.atoms().iter().all(|a| a.is_letter()) {
            return self.word_moment(&m.letters());
        }
        if self.h5 {
            let sigma = m.sigma();
            let mut acc = Scalar::one();
            for block in &sigma.blocks {
                let word = m.block_word(block);
                acc *= self.word_moment(&word.letters())?;
            }
            Ok(acc)
        } else {
            match self.y_table.get(&m.cyclic_normal_form()) {
                Some(v) => Ok(v.clone()),
                None => Err(EvalError::MissingYMoment { word: render_monomial(m) }),
            }
        }
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("undefined deterministic moment for {word}")]
    MissingYMoment { word: String },
    #[error("rewrite guard exceeded on {monomial}; input is not canonical")]
    DepthExceeded { monomial: String },
    #[error("tuple is not alternating at position {0}")]
    NotAlternating(usize),
}

/// Memoizing evaluator bound to one state. Construct one per thread; the
/// memo is keyed by cyclic normal form, which is sound because the
/// functional is tracial.
pub struct Evaluator<'a> {
    state: &'a FirstOrderState,
    memo: HashMap<DeltaMonomial, Scalar>,
}

impl<'a> Evaluator<'a> {
    pub fn new(state: &'a FirstOrderState) -> Self {
        Evaluator { state, memo: HashMap::new() }
    }

    pub fn state(&self) -> &FirstOrderState {
        self.state
    }

    pub fn eval(&mut self, p: &DeltaPolynomial) -> Result<Scalar, EvalError> {
        let mut acc = Scalar::zero();
        for (m, c) in p.terms() {
            acc += c.clone() * self.eval_monomial(m)?;
        }
        Ok(acc)
    }

    /// Seed the memo (entries are keyed by cyclic normal form).
    pub fn preload(&mut self, entries: impl IntoIterator<Item = (DeltaMonomial, Scalar)>) {
        for (m, v) in entries {
            self.memo.insert(m.cyclic_normal_form(), v);
        }
    }

    /// Snapshot of the memo for persistence.
    pub fn memo_entries(&self) -> impl Iterator<Item = (&DeltaMonomial, &Scalar)> {
        self.memo.iter()
    }

    pub fn eval_monomial(&mut self, m: &DeltaMonomial) -> Result<Scalar, EvalError> {
        if m.is_empty() {
            return Ok(Scalar::one());
        }
        let key = m.cyclic_normal_form();
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let value = self.compute(&key)?;
        self.memo.insert(key, value.clone());
        Ok(value)
    }

    fn compute(&mut self, m: &DeltaMonomial) -> Result<Scalar, EvalError> {
        let is_wigner = |l: &Letter| l.kind == Kind::Wigner;
        if !m.letters().iter().any(|l| is_wigner(l)) {
            return self.state.y_monomial(m);
        }
        // surface a Wigner letter at top level via ground block change,
        // targeting a bracket holding one at minimal depth so the depth
        // strictly decreases
        let mut current = m.clone();
        let mut guard = current.full_degree(None) + 2;
        while !current
            .atoms()
            .iter()
            .any(|a| matches!(a, Atom::Letter(l) if is_wigner(l)))
        {
            let idx = current
                .bracket_with_shallowest(is_wigner)
                .expect("positive Wigner degree implies a bracket holding a Wigner letter");
            current = current.ground_block_change_at(idx);
            if guard == 0 {
                return Err(EvalError::DepthExceeded { monomial: render_monomial(m) });
            }
            guard -= 1;
        }
        // rotate the first top-level Wigner letter to the front
        let first = current
            .atoms()
            .iter()
            .position(|a| matches!(a, Atom::Letter(l) if is_wigner(l)))
            .unwrap();
        let rotated = current.rotated(first);
        let Atom::Letter(x) = rotated.atoms()[0] else { unreachable!() };
        let rest = &rotated.atoms()[1..];
        let variance = self.state.variance(x.family);
        let mut sum = Scalar::zero();
        for (j, atom) in rest.iter().enumerate() {
            if !matches!(atom, Atom::Letter(l) if *l == x) {
                continue;
            }
            let left = DeltaMonomial::from_atoms(rest[..j].to_vec());
            let right = DeltaMonomial::from_atoms(rest[j + 1..].to_vec());
            sum += self.eval_monomial(&left)? * self.eval_monomial(&right)?;
        }
        Ok(variance * sum)
    }
}

/// One-shot evaluation.
pub fn eval_phi(p: &DeltaPolynomial, state: &FirstOrderState) -> Result<Scalar, EvalError> {
    Evaluator::new(state).eval(p)
}

/// Report of the block-factorization identity for one monomial.
#[derive(Clone, Debug)]
pub struct H5Report {
    pub lhs: Scalar,
    pub rhs: Scalar,
    pub equal: bool,
}

/// Check `Phi(m) = prod over blocks B of Phi(m_B)` by evaluating both
/// sides through the recursion.
pub fn check_h5(m: &DeltaMonomial, state: &FirstOrderState) -> Result<H5Report, EvalError> {
    let mut ev = Evaluator::new(state);
    let lhs = ev.eval_monomial(m)?;
    let sigma = m.sigma();
    let mut rhs = Scalar::one();
    for block in &sigma.blocks {
        rhs *= ev.eval_monomial(&m.block_word(block))?;
    }
    let equal = lhs.approx_eq(&rhs, SYMBOLIC_TOL);
    Ok(H5Report { lhs, rhs, equal })
}

/// Which notion of centering `freeness_factor` should verify.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Centering {
    Phi,
    Delta,
}

/// Value of the trace functional on a product of tagged polynomials,
/// using freeness shortcuts where they apply: a cyclically alternating
/// centered product vanishes; anything else is evaluated by expanding the
/// product through the recursion.
pub fn freeness_factor(
    entries: &[(FamilyTag, DeltaPolynomial)],
    centering: Centering,
    state: &FirstOrderState,
) -> Result<Scalar, EvalError> {
    if entries.is_empty() {
        return Ok(Scalar::one());
    }
    for i in 1..entries.len() {
        if entries[i].0 == entries[i - 1].0 {
            return Err(EvalError::NotAlternating(i));
        }
    }
    if entries.len() == 1 {
        return eval_phi(&entries[0].1, state);
    }
    let cyclic = entries.first().unwrap().0 != entries.last().unwrap().0;
    if cyclic {
        let centered = match centering {
            Centering::Delta => entries.iter().all(|(_, p)| p.is_formally_delta_centered()),
            Centering::Phi => {
                let mut all = true;
                for (_, p) in entries {
                    if !eval_phi(p, state)?.is_zero() {
                        all = false;
                        break;
                    }
                }
                all
            }
        };
        if centered {
            return Ok(Scalar::zero());
        }
    }
    let mut product = DeltaPolynomial::one();
    for (_, p) in entries {
        product = product.mul(p);
    }
    eval_phi(&product, state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_polynomial, Alphabet};

    fn parse(text: &str) -> DeltaPolynomial {
        parse_polynomial(text, &Alphabet::permissive()).unwrap()
    }

    fn mono(text: &str) -> DeltaMonomial {
        parse(text).as_single_monomial().unwrap().clone()
    }

    #[test]
    fn unit_and_square() {
        let state = FirstOrderState::new();
        assert_eq!(eval_phi(&parse("1"), &state).unwrap(), Scalar::one());
        assert_eq!(eval_phi(&parse("x1^2"), &state).unwrap(), Scalar::one());
        assert_eq!(eval_phi(&parse("x1"), &state).unwrap(), Scalar::zero());
    }

    #[test]
    fn even_moments_are_catalan_numbers() {
        let state = FirstOrderState::new();
        let catalan = [1i64, 2, 5, 14, 42, 132];
        for (k, c) in catalan.iter().enumerate() {
            let p = parse(&format!("x1^{}", 2 * (k + 1)));
            assert_eq!(eval_phi(&p, &state).unwrap(), Scalar::from_int(*c));
        }
    }

    #[test]
    fn variance_scales_moments() {
        let state = FirstOrderState::new().with_wigner_variance(1, Scalar::from_int(4));
        // semicircle with variance v: moment 2k is C_k v^k
        assert_eq!(eval_phi(&parse("x1^2"), &state).unwrap(), Scalar::from_int(4));
        assert_eq!(eval_phi(&parse("x1^4"), &state).unwrap(), Scalar::from_int(32));
    }

    #[test]
    fn worked_bracket_example() {
        // Phi[x^2 D[x^2 y] y x y x] = 2 Phi[D[y]^2] Phi[y] = 2 c^3 for a
        // scalar deterministic family
        for c in [Scalar::from_int(1), Scalar::from_int(2), Scalar::from_ratio(-1, 2)] {
            let state = FirstOrderState::new().with_scalar_y(1, c.clone());
            let p = parse("x1^2*D[x1^2*y1]*y1*x1*y1*x1");
            let expected = Scalar::from_int(2) * c.pow(3);
            assert_eq!(eval_phi(&p, &state).unwrap(), expected);
            // and the symbolic shape: 2 * Phi(D[y]^2) * Phi(y)
            let shape = Scalar::from_int(2)
                * eval_phi(&parse("D[y1]^2"), &state).unwrap()
                * eval_phi(&parse("y1"), &state).unwrap();
            assert_eq!(eval_phi(&p, &state).unwrap(), shape);
        }
    }

    #[test]
    fn bracketed_wigner_squares() {
        let state = FirstOrderState::new();
        // Phi(D[x^2] x^2) = Phi(x^2)^2 = 1
        assert_eq!(eval_phi(&parse("D[x1^2]*x1^2"), &state).unwrap(), Scalar::one());
        // Delta-invariance: Phi(D[m]) = Phi(m)
        assert_eq!(eval_phi(&parse("D[x1^4]"), &state).unwrap(), Scalar::from_int(2));
        assert_eq!(eval_phi(&parse("D[x1^2]"), &state).unwrap(), Scalar::one());
    }

    #[test]
    fn traciality_on_samples() {
        let state = FirstOrderState::new().with_scalar_y(1, Scalar::from_ratio(1, 3));
        for text in ["x1*y1*x1*x1", "x1*D[x1^2]*x1*y1", "D[x1*y1]*x1^2*y1"] {
            let m = mono(text);
            let v = eval_phi(&parse(text), &state).unwrap();
            for k in 1..m.atoms().len() {
                let rotated = m.rotated(k);
                let mut ev = Evaluator::new(&state);
                assert_eq!(ev.eval_monomial(&rotated).unwrap(), v, "{text} rot {k}");
            }
            // Delta-invariance
            let wrapped = m.bracketed();
            let mut ev = Evaluator::new(&state);
            assert_eq!(ev.eval_monomial(&wrapped).unwrap(), v, "D[{text}]");
        }
    }

    #[test]
    fn missing_moment_is_an_error() {
        let state = FirstOrderState::new();
        let err = eval_phi(&parse("y1*x1^2"), &state).unwrap_err();
        assert!(matches!(err, EvalError::MissingYMoment { .. }));
    }

    #[test]
    fn sd_consistency_from_scratch() {
        // for monomials x m, the value equals the plain sum over
        // decompositions computed without memoization
        let state = FirstOrderState::new();
        for text in ["x1^6", "x1^2*D[x1^2]", "x1*x2*x1*x2", "x1*D[x1*x2^2]*x1"] {
            let m = mono(text);
            let value = eval_phi(&parse(text), &state).unwrap();
            // brute-force convolution over the first letter
            let atoms = m.atoms();
            let Atom::Letter(x) = atoms[0] else { panic!() };
            let rest = &atoms[1..];
            let mut sum = Scalar::zero();
            for (j, a) in rest.iter().enumerate() {
                if matches!(a, Atom::Letter(l) if *l == x) {
                    let l = DeltaMonomial::from_atoms(rest[..j].to_vec());
                    let r = DeltaMonomial::from_atoms(rest[j + 1..].to_vec());
                    let mut e1 = Evaluator::new(&state);
                    let mut e2 = Evaluator::new(&state);
                    sum += e1.eval_monomial(&l).unwrap() * e2.eval_monomial(&r).unwrap();
                }
            }
            assert_eq!(value, sum, "{text}");
        }
    }

    #[test]
    fn h5_check_examples() {
        let state = FirstOrderState::new().with_scalar_y(1, Scalar::from_int(3));
        for text in ["D[x1^2]*x1^2", "x1^2", "D[x1^2*y1]*y1"] {
            let report = check_h5(&mono(text), &state).unwrap();
            assert!(report.equal, "{text}: {} vs {}", report.lhs, report.rhs);
        }
    }

    #[test]
    fn freeness_factor_shortcuts() {
        let state = FirstOrderState::new();
        let x1 = FamilyTag::Wigner(1);
        let x2 = FamilyTag::Wigner(2);
        // centered alternating pair vanishes
        let c1 = parse("x1");
        let c2 = parse("x2");
        assert_eq!(
            freeness_factor(&[(x1, c1.clone()), (x2, c2.clone())], Centering::Phi, &state)
                .unwrap(),
            Scalar::zero()
        );
        // single entry is a plain evaluation
        assert_eq!(
            freeness_factor(&[(x1, parse("x1^2"))], Centering::Phi, &state).unwrap(),
            Scalar::one()
        );
        // non-cyclic tuple falls back to expansion
        let p = parse("x1^2 - 1");
        let q = parse("x2^2 - 1");
        let tuple = [(x1, p.clone()), (x2, q.clone()), (x1, p.clone())];
        let direct = eval_phi(&p.mul(&q).mul(&p), &state).unwrap();
        assert_eq!(
            freeness_factor(&tuple, Centering::Phi, &state).unwrap(),
            direct
        );
        // malformed: consecutive equal tags
        assert!(matches!(
            freeness_factor(&[(x1, c1.clone()), (x1, c1)], Centering::Phi, &state),
            Err(EvalError::NotAlternating(1))
        ));
    }

    #[test]
    fn delta_centered_alternating_vanishes() {
        let state = FirstOrderState::new().with_scalar_y(1, Scalar::from_int(2));
        let f = parse("x1^2").delta_centered();
        let g = parse("y1").delta_centered();
        assert!(g.is_formally_delta_centered());
        assert_eq!(
            freeness_factor(
                &[(FamilyTag::Wigner(1), f), (FamilyTag::Deterministic, g)],
                Centering::Delta,
                &state
            )
            .unwrap(),
            Scalar::zero()
        );
    }

    #[test]
    fn agreement_with_partition_oracle_small() {
        use crate::graph::law::WignerEntryLaw;
        use crate::graph::limits::limit_moment;
        use crate::graph::moments::LawSet;
        let state = FirstOrderState::new();
        let laws = LawSet::uniform(WignerEntryLaw::quaternary(12));
        for text in [
            "x1^2", "x1^4", "x1^6", "D[x1^2]*x1^2", "x1*D[x1^2]*x1",
            "D[x1^2]*D[x1^2]", "x1*x2*x1*x2", "x1^2*x2^2", "D[x1*x2^2*x1]",
            "x1*D[x1*x2*x2]*x1",
        ] {
            let m = mono(text);
            let sd = eval_phi(&parse(text), &state).unwrap();
            let oracle = limit_moment(&m, &laws, 14).unwrap();
            assert_eq!(sd, oracle, "{text}");
        }
    }
}

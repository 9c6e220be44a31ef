//! Bracketed noncommutative words and their canonical form.
//!
//! A monomial is a word in family letters and a bracket symbol `D[..]`
//! (the conditional expectation onto the diagonal), taken in the quotient
//! monoid where `D[1] = 1` and a bracket factor sitting at the border of an
//! enclosing bracket can be pulled out:
//! `D[D[a] b D[c]] = D[a] D[b] D[c]`.
//!
//! The canonical representative is fully flattened: no empty bracket, no
//! bracket whose content is a single bracket, and no bracket whose content
//! begins or ends with a bracket. `normalize` rewrites innermost-first,
//! left to right, and is idempotent.

mod parse;
mod render;

pub use parse::{parse_polynomial, ParseError};
pub use render::{render_monomial, render_polynomial};

use crate::scalar::Scalar;
use std::collections::BTreeMap;
use std::fmt;

/// Letter kind: an independent Wigner family or a deterministic family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Wigner,
    Deterministic,
}

/// One letter of the alphabet. Wigner letters are self-adjoint; a
/// deterministic letter carries the family index of its adjoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub kind: Kind,
    pub family: u32,
    pub partner: u32,
}

impl Letter {
    pub fn wigner(family: u32) -> Self {
        Letter { kind: Kind::Wigner, family, partner: family }
    }

    /// Self-adjoint deterministic letter.
    pub fn hermitian(family: u32) -> Self {
        Letter { kind: Kind::Deterministic, family, partner: family }
    }

    pub fn deterministic(family: u32, partner: u32) -> Self {
        Letter { kind: Kind::Deterministic, family, partner }
    }

    pub fn adjoint(&self) -> Letter {
        Letter { kind: self.kind, family: self.partner, partner: self.family }
    }

    /// Tag used for freeness alternation: each Wigner family is its own
    /// free family, the deterministic letters form one joint family.
    pub fn tag(&self) -> FamilyTag {
        match self.kind {
            Kind::Wigner => FamilyTag::Wigner(self.family),
            Kind::Deterministic => FamilyTag::Deterministic,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            Kind::Wigner => write!(f, "x{}", self.family),
            Kind::Deterministic => write!(f, "y{}", self.family),
        }
    }
}

/// Freeness family tag: the collections that are asymptotically free from
/// each other are the individual Wigner matrices and the deterministic
/// family as a single block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FamilyTag {
    Wigner(u32),
    Deterministic,
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyTag::Wigner(fam) => write!(f, "x{fam}"),
            FamilyTag::Deterministic => write!(f, "y"),
        }
    }
}

/// Declared letters. Parsing rejects undeclared letters and adjoints of
/// deterministic letters without a declared partner.
#[derive(Clone, Debug, Default)]
pub struct Alphabet {
    wigner: Vec<u32>,
    deterministic: Vec<(u32, Option<u32>)>,
    /// Auto-declare letters on first use (deterministic ones as Hermitian).
    pub permissive: bool,
}

impl Alphabet {
    pub fn new() -> Self {
        Alphabet::default()
    }

    /// Alphabet that accepts any letter, treating every deterministic
    /// family as self-adjoint.
    pub fn permissive() -> Self {
        Alphabet { permissive: true, ..Alphabet::default() }
    }

    pub fn declare_wigner(&mut self, family: u32) {
        if !self.wigner.contains(&family) {
            self.wigner.push(family);
        }
    }

    /// Declare a deterministic family together with its adjoint partner
    /// (use `family == partner` for a Hermitian family). Declares both
    /// directions so the involution invariant holds by construction.
    pub fn declare_deterministic(&mut self, family: u32, partner: u32) {
        if !self.deterministic.iter().any(|&(f, _)| f == family) {
            self.deterministic.push((family, Some(partner)));
        }
        if !self.deterministic.iter().any(|&(f, _)| f == partner) {
            self.deterministic.push((partner, Some(family)));
        }
    }

    /// Declare a deterministic family without an adjoint partner; applying
    /// `'` to it is a parse error.
    pub fn declare_deterministic_no_adjoint(&mut self, family: u32) {
        if !self.deterministic.iter().any(|&(f, _)| f == family) {
            self.deterministic.push((family, None));
        }
    }

    pub fn wigner(&self, family: u32) -> Option<Letter> {
        if self.wigner.contains(&family) || self.permissive {
            Some(Letter::wigner(family))
        } else {
            None
        }
    }

    pub fn deterministic(&self, family: u32) -> Option<Letter> {
        match self.deterministic.iter().find(|&&(f, _)| f == family) {
            Some(&(f, p)) => Some(Letter::deterministic(f, p.unwrap_or(f))),
            None if self.permissive => Some(Letter::hermitian(family)),
            None => None,
        }
    }

    /// Whether `'` may be applied to the deterministic family.
    pub fn has_adjoint(&self, family: u32) -> bool {
        match self.deterministic.iter().find(|&&(f, _)| f == family) {
            Some(&(_, p)) => p.is_some(),
            None => self.permissive,
        }
    }

    pub fn wigner_families(&self) -> &[u32] {
        &self.wigner
    }

    pub fn deterministic_families(&self) -> &[(u32, Option<u32>)] {
        &self.deterministic
    }
}

/// One atom of a monomial: a letter or a bracketed sub-monomial.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Letter(Letter),
    Bracket(DeltaMonomial),
}

impl Atom {
    pub fn is_letter(&self) -> bool {
        matches!(self, Atom::Letter(_))
    }

    pub fn is_bracket(&self) -> bool {
        matches!(self, Atom::Bracket(_))
    }
}

/// A canonical bracketed word. The `Ord` derived here (letters before
/// brackets, letters by `(kind, family)`, brackets by recursive content
/// comparison) is the fixed total order used by `cyclic_normal_form`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct DeltaMonomial {
    atoms: Vec<Atom>,
}

impl DeltaMonomial {
    /// The empty word `1`.
    pub fn unit() -> Self {
        DeltaMonomial { atoms: Vec::new() }
    }

    pub fn letter(l: Letter) -> Self {
        DeltaMonomial { atoms: vec![Atom::Letter(l)] }
    }

    /// Build from raw atoms, normalizing to canonical form.
    pub fn from_atoms(atoms: Vec<Atom>) -> Self {
        DeltaMonomial { atoms: normalize_atoms(atoms) }
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Concatenation in the monoid (then canonicalized; concatenation of
    /// canonical words is already canonical, so this is cheap).
    pub fn concat(&self, other: &DeltaMonomial) -> DeltaMonomial {
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        // Border conditions are local to brackets: a concatenation of two
        // canonical words is canonical.
        DeltaMonomial { atoms }
    }

    /// Wrap in a bracket and canonicalize: `D[self]`.
    pub fn bracketed(&self) -> DeltaMonomial {
        DeltaMonomial::from_atoms(vec![Atom::Bracket(self.clone())])
    }

    /// True when the word equals its own bracketing, i.e. every top-level
    /// atom is a bracket (or the word is empty).
    pub fn is_delta_invariant(&self) -> bool {
        self.atoms.iter().all(|a| a.is_bracket())
    }

    /// Letters in reading order, recursing through brackets.
    pub fn letters(&self) -> Vec<Letter> {
        let mut out = Vec::new();
        collect_letters(&self.atoms, &mut out);
        out
    }

    /// Number of letters, optionally restricted to one family letter.
    pub fn full_degree(&self, filter: Option<Letter>) -> usize {
        self.letters()
            .into_iter()
            .filter(|l| filter.map_or(true, |f| *l == f))
            .count()
    }

    /// Number of top-level letters, optionally restricted.
    pub fn ground_degree(&self, filter: Option<Letter>) -> usize {
        self.atoms
            .iter()
            .filter(|a| match a {
                Atom::Letter(l) => filter.map_or(true, |f| *l == f),
                Atom::Bracket(_) => false,
            })
            .count()
    }

    /// Reverse the word, replace each letter by its adjoint partner, and
    /// push the involution through brackets.
    pub fn adjoint(&self) -> DeltaMonomial {
        fn adj(atoms: &[Atom]) -> Vec<Atom> {
            atoms
                .iter()
                .rev()
                .map(|a| match a {
                    Atom::Letter(l) => Atom::Letter(l.adjoint()),
                    Atom::Bracket(m) => {
                        Atom::Bracket(DeltaMonomial { atoms: adj(&m.atoms) })
                    }
                })
                .collect()
        }
        // Reversal preserves the border invariants, but normalize anyway.
        DeltaMonomial::from_atoms(adj(&self.atoms))
    }

    /// Rotate the top-level atom sequence left by `k`.
    pub fn rotated(&self, k: usize) -> DeltaMonomial {
        if self.atoms.is_empty() {
            return self.clone();
        }
        let k = k % self.atoms.len();
        let mut atoms = Vec::with_capacity(self.atoms.len());
        atoms.extend_from_slice(&self.atoms[k..]);
        atoms.extend_from_slice(&self.atoms[..k]);
        DeltaMonomial { atoms }
    }

    /// Lexicographically least rotation of the top-level atom sequence.
    /// A cache key for tracial functionals; never used to report values.
    pub fn cyclic_normal_form(&self) -> DeltaMonomial {
        if self.atoms.len() <= 1 {
            return self.clone();
        }
        let mut best = self.clone();
        for k in 1..self.atoms.len() {
            let cand = self.rotated(k);
            if cand < best {
                best = cand;
            }
        }
        best
    }

    /// The non-crossing partition of letter positions induced by the
    /// bracket nesting, with its ground block (positions outside every
    /// bracket) when the word is not Delta-invariant.
    pub fn sigma(&self) -> NCPartition {
        let mut blocks = Vec::new();
        let mut ground = Vec::new();
        let mut pos = 0usize;
        sigma_walk(&self.atoms, &mut pos, &mut ground, &mut blocks);
        let n = pos;
        let ground_index = if ground.is_empty() {
            None
        } else {
            blocks.push(ground);
            Some(blocks.len() - 1)
        };
        NCPartition { n, blocks, ground: ground_index }
    }

    /// The plain word (no brackets) of the letters at `positions`,
    /// in reading order. Positions are 0-based letter indices.
    pub fn block_word(&self, positions: &[usize]) -> DeltaMonomial {
        let letters = self.letters();
        let atoms = positions
            .iter()
            .map(|&p| Atom::Letter(letters[p]))
            .collect();
        DeltaMonomial { atoms }
    }

    /// Trace-preserving rewrite `m1 D[p] m2 -> p D[m2 m1]` applied to the
    /// leftmost top-level bracket. Valid for any tracial Delta-invariant
    /// functional.
    pub fn ground_block_change(&self) -> Result<DeltaMonomial, ExprError> {
        let idx = self
            .atoms
            .iter()
            .position(|a| a.is_bracket())
            .ok_or(ExprError::NotApplicable)?;
        Ok(self.ground_block_change_at(idx))
    }

    /// Ground block change targeting the top-level bracket at `idx`.
    pub(crate) fn ground_block_change_at(&self, idx: usize) -> DeltaMonomial {
        let Atom::Bracket(content) = &self.atoms[idx] else {
            panic!("ground_block_change_at: atom {idx} is not a bracket");
        };
        let mut tail: Vec<Atom> = self.atoms[idx + 1..].to_vec();
        tail.extend_from_slice(&self.atoms[..idx]);
        let mut atoms = content.atoms.clone();
        if !tail.is_empty() {
            atoms.push(Atom::Bracket(DeltaMonomial { atoms: tail }));
        }
        DeltaMonomial::from_atoms(atoms)
    }

    /// Index of a top-level bracket containing a letter satisfying `pred`
    /// at minimal bracket depth, if any.
    pub(crate) fn bracket_with_shallowest(
        &self,
        pred: impl Fn(&Letter) -> bool + Copy,
    ) -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        for (i, atom) in self.atoms.iter().enumerate() {
            if let Atom::Bracket(m) = atom {
                if let Some(d) = min_depth(&m.atoms, pred) {
                    if best.map_or(true, |(bd, _)| d < bd) {
                        best = Some((d, i));
                    }
                }
            }
        }
        best.map(|(_, i)| i)
    }
}

fn min_depth(atoms: &[Atom], pred: impl Fn(&Letter) -> bool + Copy) -> Option<usize> {
    let mut best = None;
    for atom in atoms {
        match atom {
            Atom::Letter(l) if pred(l) => return Some(0),
            Atom::Letter(_) => {}
            Atom::Bracket(m) => {
                if let Some(d) = min_depth(&m.atoms, pred) {
                    let d = d + 1;
                    if best.map_or(true, |b| d < b) {
                        best = Some(d);
                    }
                }
            }
        }
    }
    best
}

fn collect_letters(atoms: &[Atom], out: &mut Vec<Letter>) {
    for atom in atoms {
        match atom {
            Atom::Letter(l) => out.push(*l),
            Atom::Bracket(m) => collect_letters(&m.atoms, out),
        }
    }
}

fn sigma_walk(
    atoms: &[Atom],
    pos: &mut usize,
    own: &mut Vec<usize>,
    blocks: &mut Vec<Vec<usize>>,
) {
    for atom in atoms {
        match atom {
            Atom::Letter(_) => {
                own.push(*pos);
                *pos += 1;
            }
            Atom::Bracket(m) => {
                let mut inner = Vec::new();
                sigma_walk(&m.atoms, pos, &mut inner, blocks);
                // A canonical bracket has at least one direct letter.
                blocks.push(inner);
            }
        }
    }
}

/// Rewrite a raw atom sequence to canonical form: innermost first, then
/// drop empty brackets, unwrap nested single brackets, and hoist bracket
/// atoms off the borders of their enclosing bracket.
fn normalize_atoms(atoms: Vec<Atom>) -> Vec<Atom> {
    let mut out = Vec::with_capacity(atoms.len());
    for atom in atoms {
        match atom {
            Atom::Letter(l) => out.push(Atom::Letter(l)),
            Atom::Bracket(inner) => {
                let mut content = normalize_atoms(inner.atoms);
                // Hoist leading brackets out.
                let mut lead = 0;
                while lead < content.len() && content[lead].is_bracket() {
                    lead += 1;
                }
                let rest = content.split_off(lead);
                out.extend(content);
                // Hoist trailing brackets out, preserving their order.
                let mut core = rest;
                let mut tail = Vec::new();
                while core.last().map_or(false, |a| a.is_bracket()) {
                    tail.push(core.pop().unwrap());
                }
                tail.reverse();
                if !core.is_empty() {
                    out.push(Atom::Bracket(DeltaMonomial { atoms: core }));
                }
                out.extend(tail);
            }
        }
    }
    out
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ExprError {
    /// Ground block change on a word with no top-level bracket.
    #[error("not applicable: no top-level bracket")]
    NotApplicable,
}

/// Non-crossing partition of the letter positions of a monomial.
/// Positions are 0-based. `ground` is `None` exactly when the monomial is
/// Delta-invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NCPartition {
    pub n: usize,
    pub blocks: Vec<Vec<usize>>,
    pub ground: Option<usize>,
}

impl NCPartition {
    pub fn ground_block(&self) -> Option<&[usize]> {
        self.ground.map(|i| self.blocks[i].as_slice())
    }

    pub fn paddle_blocks(&self) -> impl Iterator<Item = &Vec<usize>> {
        let ground = self.ground;
        self.blocks
            .iter()
            .enumerate()
            .filter(move |(i, _)| Some(*i) != ground)
            .map(|(_, b)| b)
    }

    /// Four-index crossing test: true when no `a < b < c < d` has `a, c`
    /// in one block and `b, d` in another.
    pub fn is_non_crossing(&self) -> bool {
        let mut block_of = vec![usize::MAX; self.n];
        for (i, b) in self.blocks.iter().enumerate() {
            for &p in b {
                block_of[p] = i;
            }
        }
        if block_of.iter().any(|&b| b == usize::MAX) {
            return false;
        }
        for a in 0..self.n {
            for b in a + 1..self.n {
                for c in b + 1..self.n {
                    for d in c + 1..self.n {
                        if block_of[a] == block_of[c]
                            && block_of[b] == block_of[d]
                            && block_of[a] != block_of[b]
                        {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// Finite linear combination of canonical monomials with nonzero
/// coefficients.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct DeltaPolynomial {
    terms: BTreeMap<DeltaMonomial, Scalar>,
}

impl DeltaPolynomial {
    pub fn zero() -> Self {
        DeltaPolynomial::default()
    }

    pub fn one() -> Self {
        DeltaPolynomial::monomial(DeltaMonomial::unit(), Scalar::one())
    }

    pub fn monomial(m: DeltaMonomial, coeff: Scalar) -> Self {
        let mut p = DeltaPolynomial::default();
        p.add_term(m, coeff);
        p
    }

    pub fn from_letter(l: Letter) -> Self {
        DeltaPolynomial::monomial(DeltaMonomial::letter(l), Scalar::one())
    }

    pub fn add_term(&mut self, m: DeltaMonomial, coeff: Scalar) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += coeff;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&DeltaMonomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The single monomial of a unit-coefficient polynomial, if that is
    /// what this is.
    pub fn as_single_monomial(&self) -> Option<&DeltaMonomial> {
        if self.terms.len() == 1 {
            let (m, c) = self.terms.iter().next().unwrap();
            if *c == Scalar::one() {
                return Some(m);
            }
        }
        None
    }

    pub fn scale(&self, s: &Scalar) -> DeltaPolynomial {
        let mut out = DeltaPolynomial::default();
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.clone() * s.clone());
        }
        out
    }

    pub fn add(&self, other: &DeltaPolynomial) -> DeltaPolynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &DeltaPolynomial) -> DeltaPolynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn mul(&self, other: &DeltaPolynomial) -> DeltaPolynomial {
        let mut out = DeltaPolynomial::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.concat(m2), c1.clone() * c2.clone());
            }
        }
        out
    }

    /// Apply the bracket to every monomial (linear extension of `D`).
    pub fn delta(&self) -> DeltaPolynomial {
        let mut out = DeltaPolynomial::default();
        for (m, c) in &self.terms {
            out.add_term(m.bracketed(), c.clone());
        }
        out
    }

    /// `p - D[p]`; evaluates to zero under the bracket, formally.
    pub fn delta_centered(&self) -> DeltaPolynomial {
        self.sub(&self.delta())
    }

    /// Formal test that `D[p] = 0` in the quotient algebra.
    pub fn is_formally_delta_centered(&self) -> bool {
        self.delta().is_empty()
    }

    pub fn adjoint(&self) -> DeltaPolynomial {
        let mut out = DeltaPolynomial::default();
        for (m, c) in &self.terms {
            out.add_term(m.adjoint(), c.conj());
        }
        out
    }

    /// All distinct family tags appearing in the polynomial.
    pub fn tags(&self) -> Vec<FamilyTag> {
        let mut tags: Vec<FamilyTag> = Vec::new();
        for (m, _) in &self.terms {
            for l in m.letters() {
                if !tags.contains(&l.tag()) {
                    tags.push(l.tag());
                }
            }
        }
        tags.sort();
        tags
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(f: u32) -> Letter {
        Letter::wigner(f)
    }
    fn y(f: u32) -> Letter {
        Letter::hermitian(f)
    }
    fn la(l: Letter) -> Atom {
        Atom::Letter(l)
    }
    fn br(atoms: Vec<Atom>) -> Atom {
        Atom::Bracket(DeltaMonomial { atoms })
    }

    #[test]
    fn normalize_unwraps_nested_bracket() {
        // D[D[w]] -> D[w]
        let m = DeltaMonomial::from_atoms(vec![br(vec![br(vec![la(x(1))])])]);
        let expected = DeltaMonomial::from_atoms(vec![br(vec![la(x(1))])]);
        assert_eq!(m, expected);
    }

    #[test]
    fn normalize_hoists_border_brackets() {
        // D[D[a] b D[c]] -> D[a] D[b] D[c]
        let m = DeltaMonomial::from_atoms(vec![br(vec![
            br(vec![la(x(1))]),
            la(x(2)),
            br(vec![la(x(3))]),
        ])]);
        let expected = DeltaMonomial {
            atoms: vec![
                br(vec![la(x(1))]),
                br(vec![la(x(2))]),
                br(vec![la(x(3))]),
            ],
        };
        assert_eq!(m, expected);
    }

    #[test]
    fn normalize_drops_empty_bracket() {
        // D[1] -> 1
        let m = DeltaMonomial::from_atoms(vec![br(vec![])]);
        assert!(m.is_empty());
    }

    #[test]
    fn normalize_is_idempotent_on_samples() {
        let samples = vec![
            vec![br(vec![br(vec![la(x(1)), la(y(1))]), la(x(2))])],
            vec![la(y(1)), br(vec![br(vec![br(vec![la(x(1))])])]), la(y(2))],
            vec![br(vec![br(vec![]), la(x(1)), br(vec![la(y(1))])])],
        ];
        for atoms in samples {
            let once = DeltaMonomial::from_atoms(atoms);
            let twice = DeltaMonomial::from_atoms(once.atoms.clone());
            assert_eq!(once, twice);
        }
    }

    #[test]
    fn sigma_of_plain_word_is_single_ground_block() {
        let m = DeltaMonomial::from_atoms(vec![la(x(1)), la(x(1)), la(x(1))]);
        let s = m.sigma();
        assert_eq!(s.blocks.len(), 1);
        assert_eq!(s.ground_block().unwrap(), &[0, 1, 2]);
        assert!(s.is_non_crossing());
    }

    #[test]
    fn sigma_of_paddle_example() {
        // y D[x y] y: ground {0,3}, paddle {1,2}
        let m = DeltaMonomial::from_atoms(vec![
            la(y(1)),
            br(vec![la(x(1)), la(y(1))]),
            la(y(1)),
        ]);
        let s = m.sigma();
        assert_eq!(s.n, 4);
        assert_eq!(s.ground_block().unwrap(), &[0, 3]);
        let paddles: Vec<_> = s.paddle_blocks().collect();
        assert_eq!(paddles, vec![&vec![1, 2]]);
    }

    #[test]
    fn sigma_of_delta_invariant_has_no_ground() {
        let m = DeltaMonomial::from_atoms(vec![br(vec![la(x(1)), la(x(1))])]);
        let s = m.sigma();
        assert_eq!(s.ground, None);
        assert_eq!(s.blocks, vec![vec![0, 1]]);
    }

    #[test]
    fn degrees_match_ground_and_full() {
        // y D[x y] y has full degree 4, ground degree 2; in x: 1 and 0.
        let m = DeltaMonomial::from_atoms(vec![
            la(y(1)),
            br(vec![la(x(1)), la(y(1))]),
            la(y(1)),
        ]);
        assert_eq!(m.full_degree(None), 4);
        assert_eq!(m.ground_degree(None), 2);
        assert_eq!(m.full_degree(Some(x(1))), 1);
        assert_eq!(m.ground_degree(Some(x(1))), 0);
        assert_eq!(DeltaMonomial::unit().full_degree(None), 0);
    }

    #[test]
    fn ground_block_change_examples() {
        // D[x x y] y -> x x y D[y]
        let m = DeltaMonomial::from_atoms(vec![
            br(vec![la(x(1)), la(x(1)), la(y(1))]),
            la(y(1)),
        ]);
        let got = m.ground_block_change().unwrap();
        let expected = DeltaMonomial::from_atoms(vec![
            la(x(1)),
            la(x(1)),
            la(y(1)),
            br(vec![la(y(1))]),
        ]);
        assert_eq!(got, expected);

        // x D[y] x -> y D[x x]
        let m = DeltaMonomial::from_atoms(vec![la(x(1)), br(vec![la(y(1))]), la(x(1))]);
        let got = m.ground_block_change().unwrap();
        let expected =
            DeltaMonomial::from_atoms(vec![la(y(1)), br(vec![la(x(1)), la(x(1))])]);
        assert_eq!(got, expected);

        // no bracket -> not applicable
        let m = DeltaMonomial::from_atoms(vec![la(x(1))]);
        assert_eq!(m.ground_block_change(), Err(ExprError::NotApplicable));
    }

    #[test]
    fn ground_block_change_preserves_letter_multiset() {
        let m = DeltaMonomial::from_atoms(vec![
            la(y(2)),
            br(vec![la(x(1)), la(y(1))]),
            la(x(2)),
            br(vec![la(y(1))]),
        ]);
        let g = m.ground_block_change().unwrap();
        let mut a = m.letters();
        let mut b = g.letters();
        a.sort();
        b.sort();
        assert_eq!(a, b);
        assert_eq!(m.full_degree(None), g.full_degree(None));
    }

    #[test]
    fn cyclic_normal_form_examples() {
        let m = DeltaMonomial::from_atoms(vec![la(x(2)), la(x(1))]);
        assert_eq!(
            m.cyclic_normal_form(),
            DeltaMonomial::from_atoms(vec![la(x(1)), la(x(2))])
        );

        let single = DeltaMonomial::from_atoms(vec![br(vec![la(x(1)), la(y(1))])]);
        assert_eq!(single.cyclic_normal_form(), single);

        let m = DeltaMonomial::from_atoms(vec![la(x(1)), la(y(1)), la(x(1)), la(x(1))]);
        let expected =
            DeltaMonomial::from_atoms(vec![la(x(1)), la(x(1)), la(x(1)), la(y(1))]);
        assert_eq!(m.cyclic_normal_form(), expected);
    }

    #[test]
    fn adjoint_is_involution_and_reverses() {
        // (x1 y1)* = y1 x1 for Hermitian y1
        let m = DeltaMonomial::from_atoms(vec![la(x(1)), la(y(1))]);
        let adj = m.adjoint();
        assert_eq!(adj, DeltaMonomial::from_atoms(vec![la(y(1)), la(x(1))]));
        assert_eq!(adj.adjoint(), m);

        // (D[x1 y1])* = D[y1 x1]
        let m = DeltaMonomial::from_atoms(vec![br(vec![la(x(1)), la(y(1))])]);
        assert_eq!(
            m.adjoint(),
            DeltaMonomial::from_atoms(vec![br(vec![la(y(1)), la(x(1))])])
        );

        // non-Hermitian partner swaps family
        let u = Letter::deterministic(1, 2);
        let m = DeltaMonomial::from_atoms(vec![la(u)]);
        assert_eq!(
            m.adjoint(),
            DeltaMonomial::from_atoms(vec![la(Letter::deterministic(2, 1))])
        );
    }

    #[test]
    fn polynomial_zero_coefficients_vanish() {
        let m = DeltaMonomial::letter(x(1));
        let mut p = DeltaPolynomial::monomial(m.clone(), Scalar::one());
        p.add_term(m, Scalar::from_int(-1));
        assert!(p.is_empty());
    }

    #[test]
    fn delta_centered_is_formally_centered() {
        let p = parse_polynomial("x1*y1 + 2*x1^2", &Alphabet::permissive()).unwrap();
        assert!(p.delta_centered().is_formally_delta_centered());
        assert!(!p.is_formally_delta_centered());
    }

    #[test]
    fn removing_a_paddle_block_shortens_sigma_consistently() {
        // m = y D[x D[y] x] y — blocks: {2} (inner), {1,3} (outer paddle),
        // {0,4} ground. Removing paddle {1,3} leaves y D[y] y with blocks
        // {1}, {0,2}.
        let m = DeltaMonomial::from_atoms(vec![
            la(y(1)),
            br(vec![la(x(1)), br(vec![la(y(1))]), la(x(1))]),
            la(y(1)),
        ]);
        let s = m.sigma();
        assert!(s.is_non_crossing());
        assert_eq!(s.ground_block().unwrap(), &[0, 4]);
        assert!(s.blocks.contains(&vec![1, 3]));
        assert!(s.blocks.contains(&vec![2]));
    }
}

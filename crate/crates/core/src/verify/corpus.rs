//! Exhaustive enumeration of canonical bracketed words, plus the
//! independent counting oracles used to pin expected values.

use crate::expr::{Atom, DeltaMonomial, Letter};

/// All canonical monomials with exactly `degree` letters drawn from
/// `letters`. Bracket contents start and end with a letter, so the
/// output is canonical by construction.
pub fn canonical_monomials(letters: &[Letter], degree: usize) -> Vec<DeltaMonomial> {
    let mut gen = Generator { letters, seq_memo: Vec::new(), core_memo: Vec::new() };
    gen.sequences(degree)
        .iter()
        .map(|atoms| {
            let m = DeltaMonomial::from_atoms(atoms.clone());
            debug_assert_eq!(m.atoms(), atoms.as_slice(), "generator output not canonical");
            m
        })
        .collect()
}

/// Representatives of cyclic rotation classes (monomials equal to their
/// own cyclic normal form).
pub fn cyclic_representatives(letters: &[Letter], degree: usize) -> Vec<DeltaMonomial> {
    canonical_monomials(letters, degree)
        .into_iter()
        .filter(|m| &m.cyclic_normal_form() == m)
        .collect()
}

struct Generator<'a> {
    letters: &'a [Letter],
    seq_memo: Vec<Option<Vec<Vec<Atom>>>>,
    core_memo: Vec<Option<Vec<Vec<Atom>>>>,
}

impl<'a> Generator<'a> {
    /// Atom sequences holding exactly `n` letters.
    fn sequences(&mut self, n: usize) -> Vec<Vec<Atom>> {
        if self.seq_memo.len() <= n {
            self.seq_memo.resize(n + 1, None);
            self.core_memo.resize(n + 1, None);
        }
        if let Some(hit) = &self.seq_memo[n] {
            return hit.clone();
        }
        let mut out = Vec::new();
        if n == 0 {
            out.push(Vec::new());
        } else {
            for &l in self.letters {
                for rest in self.sequences(n - 1) {
                    let mut v = Vec::with_capacity(rest.len() + 1);
                    v.push(Atom::Letter(l));
                    v.extend(rest);
                    out.push(v);
                }
            }
            for k in 1..=n {
                for core in self.cores(k) {
                    for rest in self.sequences(n - k) {
                        let mut v = Vec::with_capacity(rest.len() + 1);
                        v.push(Atom::Bracket(DeltaMonomial::from_atoms(core.clone())));
                        v.extend(rest);
                        out.push(v);
                    }
                }
            }
        }
        self.seq_memo[n] = Some(out.clone());
        out
    }

    /// Bracket contents: sequences of `k` letters whose first and last
    /// atoms are letters, i.e. a letter, then any sequence of `k - 2`
    /// letters, then a letter.
    fn cores(&mut self, k: usize) -> Vec<Vec<Atom>> {
        if let Some(hit) = &self.core_memo[k] {
            return hit.clone();
        }
        let mut out = Vec::new();
        if k == 1 {
            for &l in self.letters {
                out.push(vec![Atom::Letter(l)]);
            }
        } else {
            for &first in self.letters {
                for mid in self.sequences(k - 2) {
                    for &last in self.letters {
                        let mut v = Vec::with_capacity(mid.len() + 2);
                        v.push(Atom::Letter(first));
                        v.extend(mid.iter().cloned());
                        v.push(Atom::Letter(last));
                        out.push(v);
                    }
                }
            }
        }
        self.core_memo[k] = Some(out.clone());
        out
    }
}

/// Number of non-crossing pairings of `n` points (0 for odd `n`):
/// independent oracle for the even moments of the semicircle law.
pub fn non_crossing_pairings(n: usize) -> u64 {
    if n % 2 == 1 {
        return 0;
    }
    let m = n / 2;
    // f[j] = pairings of 2j points; point 1 pairs with an even-offset
    // partner splitting the rest into two independent intervals
    let mut f = vec![0u64; m + 1];
    f[0] = 1;
    for j in 1..=m {
        let mut acc = 0u64;
        for inner in 0..j {
            acc += f[inner] * f[j - 1 - inner];
        }
        f[j] = acc;
    }
    f[m]
}

pub fn catalan(k: usize) -> u64 {
    non_crossing_pairings(2 * k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_follow_the_shifted_catalan_sequence() {
        // canonical bracketed words over one letter: degree n has
        // Catalan(n+1) of them
        let x = [Letter::wigner(1)];
        for n in 1..=7 {
            assert_eq!(
                canonical_monomials(&x, n).len() as u64,
                catalan(n + 1),
                "degree {n}"
            );
        }
        // two letters multiply the letter choices
        let xy = [Letter::wigner(1), Letter::wigner(2)];
        for n in 1..=5 {
            assert_eq!(
                canonical_monomials(&xy, n).len() as u64,
                catalan(n + 1) * (1 << n),
                "degree {n}"
            );
        }
    }

    #[test]
    fn degree_one_monomials() {
        let x = [Letter::wigner(1)];
        let ms = canonical_monomials(&x, 1);
        // the letter and its bracket
        assert_eq!(ms.len(), 2);
    }

    #[test]
    fn representatives_are_fixed_points() {
        let x = [Letter::wigner(1)];
        for m in cyclic_representatives(&x, 5) {
            assert_eq!(m.cyclic_normal_form(), m);
        }
        // every class has exactly one representative
        let all = canonical_monomials(&x, 5);
        let reps = cyclic_representatives(&x, 5);
        let mut classes = std::collections::HashSet::new();
        for m in &all {
            classes.insert(m.cyclic_normal_form());
        }
        assert_eq!(classes.len(), reps.len());
    }

    #[test]
    fn pairing_counts_are_catalan() {
        assert_eq!(
            (1..=6).map(catalan).collect::<Vec<_>>(),
            vec![1, 2, 5, 14, 42, 132]
        );
        assert_eq!(non_crossing_pairings(7), 0);
    }
}

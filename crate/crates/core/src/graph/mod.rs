//! Finite directed labeled multigraphs and the cactus associated to a
//! bracketed word.
//!
//! The trace of a graph in matrices sums, over all maps of vertices to
//! indices, the product of matrix entries `M(target, source)` over edges.
//! A word maps to a cycle read against edge orientation; a bracket pinches
//! its subword into its own cycle attached at the pinch vertex, giving a
//! well-oriented cactus whose cycles match the blocks of the word's
//! non-crossing partition.

pub mod classify;
pub mod law;
pub mod limits;
pub mod moments;
pub mod partitions;

use crate::expr::{Atom, DeltaMonomial, Kind, Letter};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub letter: Letter,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TestGraph {
    pub n_vertices: usize,
    pub edges: Vec<Edge>,
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("empty monomial has no test graph")]
    EmptyMonomial,
    #[error("partition does not cover the vertex set")]
    BadPartition,
}

impl TestGraph {
    /// The w.o. cactus of a canonical monomial. `edges[i]` carries the
    /// `i`-th letter of the word in reading order.
    pub fn cactus(m: &DeltaMonomial) -> Result<TestGraph, GraphError> {
        if m.is_empty() {
            return Err(GraphError::EmptyMonomial);
        }
        let mut g = TestGraph { n_vertices: 1, edges: Vec::new() };
        build_cycle(&mut g, m.atoms(), 0);
        Ok(g)
    }

    /// Disjoint union; the second graph's vertices are shifted.
    pub fn disjoint_union(&self, other: &TestGraph) -> TestGraph {
        let mut edges = self.edges.clone();
        edges.extend(other.edges.iter().map(|e| Edge {
            src: e.src + self.n_vertices,
            dst: e.dst + self.n_vertices,
            letter: e.letter,
        }));
        TestGraph { n_vertices: self.n_vertices + other.n_vertices, edges }
    }

    /// Quotient by a vertex partition given as a block index per vertex.
    /// The edge multiset is preserved; loops may appear.
    pub fn quotient(&self, block_of: &[usize]) -> Result<TestGraph, GraphError> {
        if block_of.len() != self.n_vertices {
            return Err(GraphError::BadPartition);
        }
        let n_blocks = block_of.iter().copied().max().map_or(0, |m| m + 1);
        Ok(TestGraph {
            n_vertices: n_blocks,
            edges: self
                .edges
                .iter()
                .map(|e| Edge { src: block_of[e.src], dst: block_of[e.dst], letter: e.letter })
                .collect(),
        })
    }

    pub fn is_pure_wigner(&self) -> bool {
        self.edges.iter().all(|e| e.letter.kind == Kind::Wigner)
    }
}

/// Walk the atoms of one cycle anchored at `base`: a letter advances
/// around the cycle (its edge points from the next vertex back to the
/// current one, so the word reads against edge orientation), the final
/// letter closes the cycle at `base`, and a bracket attaches its own cycle
/// at the current vertex without advancing.
fn build_cycle(g: &mut TestGraph, atoms: &[Atom], base: usize) {
    let letters_total = atoms.iter().filter(|a| a.is_letter()).count();
    let mut seen = 0usize;
    let mut current = base;
    for atom in atoms {
        match atom {
            Atom::Letter(l) => {
                seen += 1;
                let next = if seen == letters_total {
                    base
                } else {
                    g.n_vertices += 1;
                    g.n_vertices - 1
                };
                g.edges.push(Edge { src: next, dst: current, letter: *l });
                current = next;
            }
            Atom::Bracket(inner) => {
                build_cycle(g, inner.atoms(), current);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_polynomial, Alphabet};

    fn cactus_of(text: &str) -> TestGraph {
        let p = parse_polynomial(text, &Alphabet::permissive()).unwrap();
        TestGraph::cactus(p.as_single_monomial().unwrap()).unwrap()
    }

    #[test]
    fn word_becomes_directed_cycle() {
        let g = cactus_of("x1^3");
        assert_eq!(g.n_vertices, 3);
        assert_eq!(g.edges.len(), 3);
        // consecutive edges chain: dst of edge i+1 equals src of edge i
        for i in 0..3 {
            assert_eq!(g.edges[(i + 1) % 3].dst, g.edges[i].src);
        }
    }

    #[test]
    fn single_letter_is_a_loop() {
        let g = cactus_of("x1");
        assert_eq!(g.n_vertices, 1);
        assert_eq!(g.edges, vec![Edge { src: 0, dst: 0, letter: Letter::wigner(1) }]);
    }

    #[test]
    fn bracket_pinches_a_second_cycle() {
        // D[x1^2*y1]*y1: two cycles sharing one vertex, matching the two
        // blocks of sigma
        let g = cactus_of("D[x1^2*y1]*y1");
        assert_eq!(g.n_vertices, 1 + 2);
        assert_eq!(g.edges.len(), 4);
        let p = parse_polynomial("D[x1^2*y1]*y1", &Alphabet::permissive()).unwrap();
        let sigma = p.as_single_monomial().unwrap().sigma();
        assert_eq!(sigma.blocks.len(), 2);
        // the ground letter y1 forms a loop at the pinch vertex
        assert_eq!(g.edges[3].src, g.edges[3].dst);
    }

    #[test]
    fn cycles_match_sigma_blocks() {
        for text in ["x1*D[y1*x1]*y1", "D[D[x1^2]*y1^2]", "x1*D[x1]*x1*D[y1*D[x2]*y1]"] {
            let p = parse_polynomial(text, &Alphabet::permissive()).unwrap();
            let m = p.as_single_monomial().unwrap();
            let g = TestGraph::cactus(m).unwrap();
            let sigma = m.sigma();
            assert_eq!(g.edges.len(), m.full_degree(None));
            // Euler: a cactus with b cycles and e edges has e - b + 1 vertices
            assert_eq!(g.n_vertices, g.edges.len() - sigma.blocks.len() + 1, "{text}");
        }
    }

    #[test]
    fn quotient_preserves_edge_multiset() {
        let g = cactus_of("x1^3");
        let q = g.quotient(&[0, 1, 0]).unwrap();
        assert_eq!(q.n_vertices, 2);
        assert_eq!(q.edges.len(), 3);
        // one loop plus a 2-cycle
        let loops = q.edges.iter().filter(|e| e.src == e.dst).count();
        assert_eq!(loops, 1);

        let all_in_one = g.quotient(&[0, 0, 0]).unwrap();
        assert_eq!(all_in_one.n_vertices, 1);
        assert!(all_in_one.edges.iter().all(|e| e.src == 0 && e.dst == 0));

        let discrete = g.quotient(&[0, 1, 2]).unwrap();
        assert_eq!(&discrete, &g);
    }
}

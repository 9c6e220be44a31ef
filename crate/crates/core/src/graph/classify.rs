//! Classification of partition quotients of cacti.
//!
//! With no deterministic edges, the graph of deterministic components of a
//! quotient is the quotient itself plus one pendant vertex per block, so
//! tree and cycle structure can be read off the block graph directly.
//!
//! Edges of the quotient are grouped by (family, endpoint pair); each
//! group is one edge of the collapsed multigraph (two families between
//! the same blocks give two parallel collapsed edges).
//!
//! * double tree: collapsed graph is a tree and every group carries
//!   exactly two edges — the quotients that survive in first-order
//!   limits;
//! * double unicyclic: collapsed graph has a unique cycle along which the
//!   two cacti are identified group-for-group with opposite orientations,
//!   everything off the cycle doubled within its own side;
//! * 4-2 tree: a tree with one group of four edges (two from each side),
//!   each side separately a double tree — the quotients carrying the
//!   fourth-moment dependence of trace covariances.

use super::moments::SweepEdge;
use super::TestGraph;
use crate::expr::Kind;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuotientClass {
    DoubleTree,
    DoubleUnicyclic,
    FourTwoTree,
    Other,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum PairClass {
    DoubleUnicyclic,
    FourTwoTree,
    Other,
}

impl PairClass {
    pub fn counts_for_limit(&self) -> bool {
        !matches!(self, PairClass::Other)
    }
}

#[derive(Clone, Copy, Debug)]
struct Group {
    lo: u8,
    hi: u8,
    count: u8,
    fwd: u8,
    bwd: u8,
    side: [u8; 2],
}

fn collect_groups(edges: &[SweepEdge], rgs: &[u8]) -> Vec<Group> {
    // key by (law, lo, hi); the law index is only needed for grouping
    let mut keys: Vec<u32> = Vec::with_capacity(edges.len());
    let mut groups: Vec<Group> = Vec::with_capacity(edges.len());
    for e in edges {
        let bu = rgs[e.src as usize];
        let bv = rgs[e.dst as usize];
        let (lo, hi) = if bu <= bv { (bu, bv) } else { (bv, bu) };
        let key = ((e.law as u32) << 16) | ((lo as u32) << 8) | hi as u32;
        let idx = match keys.iter().position(|&k| k == key) {
            Some(i) => i,
            None => {
                keys.push(key);
                groups.push(Group { lo, hi, count: 0, fwd: 0, bwd: 0, side: [0, 0] });
                keys.len() - 1
            }
        };
        let g = &mut groups[idx];
        g.count += 1;
        g.side[e.side as usize] += 1;
        if lo != hi {
            if bv == lo {
                g.fwd += 1;
            } else {
                g.bwd += 1;
            }
        }
    }
    groups
}

struct UnionFind {
    parent: [u8; 32],
}

impl UnionFind {
    fn new(n: usize) -> Self {
        let mut parent = [0u8; 32];
        for (i, p) in parent.iter_mut().enumerate().take(n) {
            *p = i as u8;
        }
        UnionFind { parent }
    }
    fn find(&mut self, mut v: u8) -> u8 {
        while self.parent[v as usize] != v {
            let p = self.parent[v as usize];
            self.parent[v as usize] = self.parent[p as usize];
            v = p;
        }
        v
    }
    fn union(&mut self, a: u8, b: u8) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            self.parent[ra as usize] = rb;
        }
    }
}

/// Components and cyclomatic number of the collapsed multigraph whose
/// edges are `pairs`, over the blocks marked `active`.
fn structure(pairs: &[(u8, u8)], active: &[bool]) -> (usize, i64) {
    let n = active.len();
    let mut uf = UnionFind::new(n);
    for &(a, b) in pairs {
        if a != b {
            uf.union(a, b);
        }
    }
    let mut roots: Vec<u8> = Vec::new();
    let mut vcount = 0usize;
    for v in 0..n {
        if !active[v] {
            continue;
        }
        vcount += 1;
        let r = uf.find(v as u8);
        if !roots.contains(&r) {
            roots.push(r);
        }
    }
    let comps = roots.len();
    let cyc = pairs.len() as i64 - vcount as i64 + comps as i64;
    (comps, cyc)
}

/// Mask of the edges on the unique cycle of a connected unicyclic
/// collapsed multigraph, found by peeling degree-one blocks. A loop or a
/// doubled pair is a cycle.
fn cycle_mask(pairs: &[(u8, u8)], nblocks: usize) -> Vec<bool> {
    let mut alive = vec![true; pairs.len()];
    let mut deg = vec![0u8; nblocks];
    for &(a, b) in pairs {
        deg[a as usize] += 1;
        deg[b as usize] += 1;
    }
    loop {
        let mut peeled = false;
        for v in 0..nblocks {
            if deg[v] == 1 {
                let i = (0..pairs.len())
                    .find(|&i| {
                        alive[i]
                            && (pairs[i].0 as usize == v || pairs[i].1 as usize == v)
                    })
                    .unwrap();
                alive[i] = false;
                deg[pairs[i].0 as usize] -= 1;
                deg[pairs[i].1 as usize] -= 1;
                peeled = true;
            }
        }
        if !peeled {
            break;
        }
    }
    alive
}

/// Double-tree test for a single-cactus quotient.
pub(crate) fn is_double_tree(edges: &[SweepEdge], rgs: &[u8], nblocks: usize) -> bool {
    let groups = collect_groups(edges, rgs);
    for g in &groups {
        if g.lo == g.hi || g.count != 2 {
            return false;
        }
    }
    let pairs: Vec<(u8, u8)> = groups.iter().map(|g| (g.lo, g.hi)).collect();
    let active = vec![true; nblocks];
    let (comps, cyc) = structure(&pairs, &active);
    comps == 1 && cyc == 0
}

/// Classification of a two-cactus quotient.
pub(crate) fn classify_pair(edges: &[SweepEdge], rgs: &[u8], nblocks: usize) -> PairClass {
    let groups = collect_groups(edges, rgs);
    let pairs: Vec<(u8, u8)> = groups.iter().map(|g| (g.lo, g.hi)).collect();
    let active = vec![true; nblocks];
    let (comps, cyc) = structure(&pairs, &active);
    if comps != 1 {
        return PairClass::Other;
    }
    match cyc {
        1 => classify_du(&groups, &pairs, edges, rgs, nblocks),
        0 => classify_ft(&groups, edges, rgs, nblocks),
        _ => PairClass::Other,
    }
}

/// Collapsed structure of one side: its groups (as collapsed edges with
/// side multiplicities) and the component/cycle counts.
fn side_structure(
    edges: &[SweepEdge],
    rgs: &[u8],
    nblocks: usize,
    side: u8,
) -> (Vec<(u8, u8)>, Vec<u8>, usize, i64) {
    let mut keys: Vec<u32> = Vec::new();
    let mut pairs: Vec<(u8, u8)> = Vec::new();
    let mut mult: Vec<u8> = Vec::new();
    let mut active = vec![false; nblocks];
    for e in edges.iter().filter(|e| e.side == side) {
        let bu = rgs[e.src as usize];
        let bv = rgs[e.dst as usize];
        let (lo, hi) = if bu <= bv { (bu, bv) } else { (bv, bu) };
        active[lo as usize] = true;
        active[hi as usize] = true;
        let key = ((e.law as u32) << 16) | ((lo as u32) << 8) | hi as u32;
        match keys.iter().position(|&k| k == key) {
            Some(i) => mult[i] += 1,
            None => {
                keys.push(key);
                pairs.push((lo, hi));
                mult.push(1);
            }
        }
    }
    let (comps, cyc) = structure(&pairs, &active);
    (pairs, mult, comps, cyc)
}

fn classify_du(
    groups: &[Group],
    pairs: &[(u8, u8)],
    edges: &[SweepEdge],
    rgs: &[u8],
    nblocks: usize,
) -> PairClass {
    // every group doubled, off-diagonal twins opposite
    for g in groups {
        if g.count != 2 {
            return PairClass::Other;
        }
        if g.lo != g.hi && !(g.fwd == 1 && g.bwd == 1) {
            return PairClass::Other;
        }
    }
    let on_cycle = cycle_mask(pairs, nblocks);
    // cross-side groups sit exactly on the cycle, one edge from each side
    for (g, &cyc) in groups.iter().zip(&on_cycle) {
        let crosses = g.side[0] > 0 && g.side[1] > 0;
        if crosses != cyc {
            return PairClass::Other;
        }
        if crosses && !(g.side[0] == 1 && g.side[1] == 1) {
            return PairClass::Other;
        }
    }
    // each side alone: one cycle made of its single edges (which must be
    // the shared groups), everything else doubled off the cycle
    for side in 0..2u8 {
        let (spairs, mult, comps, cyc) = side_structure(edges, rgs, nblocks, side);
        if comps != 1 || cyc != 1 {
            return PairClass::Other;
        }
        let s_on_cycle = cycle_mask(&spairs, nblocks);
        for ((_, m), &on) in spairs.iter().zip(&mult).zip(&s_on_cycle) {
            let expected = if on { 1 } else { 2 };
            if *m != expected {
                return PairClass::Other;
            }
        }
    }
    PairClass::DoubleUnicyclic
}

fn classify_ft(
    groups: &[Group],
    edges: &[SweepEdge],
    rgs: &[u8],
    nblocks: usize,
) -> PairClass {
    let mut quads = 0usize;
    for g in groups {
        match g.count {
            4 => {
                if g.side[0] != 2 || g.side[1] != 2 {
                    return PairClass::Other;
                }
                quads += 1;
            }
            2 => {
                // doubled edges come from a single side in a tree quotient
                if g.side[0] != 0 && g.side[1] != 0 {
                    return PairClass::Other;
                }
            }
            _ => return PairClass::Other,
        }
    }
    if quads != 1 {
        return PairClass::Other;
    }
    // both sides are double trees (their half of the quad group included)
    for side in 0..2u8 {
        let (spairs, mult, comps, cyc) = side_structure(edges, rgs, nblocks, side);
        if comps != 1 || cyc != 0 {
            return PairClass::Other;
        }
        if mult.iter().any(|&m| m != 2) {
            return PairClass::Other;
        }
        if spairs.iter().any(|&(a, b)| a == b) {
            return PairClass::Other;
        }
    }
    PairClass::FourTwoTree
}

fn to_sweep_edges(
    graphs: &[&TestGraph],
    block_of: &[usize],
) -> Result<(Vec<SweepEdge>, usize), super::moments::OracleError> {
    let mut families: Vec<u32> = Vec::new();
    let mut edges = Vec::new();
    let mut offset = 0usize;
    for (side, g) in graphs.iter().enumerate() {
        for e in &g.edges {
            if e.letter.kind != Kind::Wigner {
                return Err(super::moments::OracleError::MixedLetters);
            }
            let law = match families.iter().position(|&f| f == e.letter.family) {
                Some(i) => i,
                None => {
                    families.push(e.letter.family);
                    families.len() - 1
                }
            };
            edges.push(SweepEdge {
                src: block_of[e.src + offset] as u8,
                dst: block_of[e.dst + offset] as u8,
                law: law as u8,
                side: side as u8,
            });
        }
        offset += g.n_vertices;
    }
    let nblocks = block_of.iter().copied().max().map_or(0, |m| m + 1);
    Ok((edges, nblocks))
}

/// Classify a quotient of a single cactus (first-order context).
pub fn classify_first_order(
    g: &TestGraph,
    block_of: &[usize],
) -> Result<QuotientClass, super::moments::OracleError> {
    let (edges, nblocks) = to_sweep_edges(&[g], block_of)?;
    let rgs: Vec<u8> = (0..nblocks as u8).collect();
    Ok(if is_double_tree(&edges, &rgs, nblocks) {
        QuotientClass::DoubleTree
    } else {
        QuotientClass::Other
    })
}

/// Classify a quotient of a disjoint pair of cacti (second-order context).
pub fn classify_second_order(
    g1: &TestGraph,
    g2: &TestGraph,
    block_of: &[usize],
) -> Result<QuotientClass, super::moments::OracleError> {
    let (edges, nblocks) = to_sweep_edges(&[g1, g2], block_of)?;
    let rgs: Vec<u8> = (0..nblocks as u8).collect();
    Ok(match classify_pair(&edges, &rgs, nblocks) {
        PairClass::DoubleUnicyclic => QuotientClass::DoubleUnicyclic,
        PairClass::FourTwoTree => QuotientClass::FourTwoTree,
        PairClass::Other => {
            if is_double_tree(&edges, &rgs, nblocks) {
                QuotientClass::DoubleTree
            } else {
                QuotientClass::Other
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_polynomial, Alphabet};

    fn cactus(text: &str) -> TestGraph {
        let p = parse_polynomial(text, &Alphabet::permissive()).unwrap();
        TestGraph::cactus(p.as_single_monomial().unwrap()).unwrap()
    }

    #[test]
    fn two_cycle_with_distinct_vertices_is_double_tree() {
        let g = cactus("x1^2");
        assert_eq!(
            classify_first_order(&g, &[0, 1]).unwrap(),
            QuotientClass::DoubleTree
        );
        // collapsing to a point makes both edges loops
        assert_eq!(
            classify_first_order(&g, &[0, 0]).unwrap(),
            QuotientClass::Other
        );
    }

    #[test]
    fn mismatched_families_are_not_double_trees() {
        // one edge of each family between two blocks: two collapsed edges
        // forming a 2-cycle, not a tree
        let g = cactus("x1*x2");
        assert_eq!(
            classify_first_order(&g, &[0, 1]).unwrap(),
            QuotientClass::Other
        );
    }

    #[test]
    fn four_edges_on_one_pair_is_a_4_2_tree() {
        let g = cactus("x1^2");
        // identify the two 2-cycles vertex-wise: v0~v2, v1~v3
        assert_eq!(
            classify_second_order(&g, &g, &[0, 1, 0, 1]).unwrap(),
            QuotientClass::FourTwoTree
        );
    }

    #[test]
    fn glued_triangles_are_double_unicyclic() {
        // two 3-cycles identified along their cycles with reversed
        // orientation
        let g = cactus("x1^3");
        assert_eq!(
            classify_second_order(&g, &g, &[0, 1, 2, 0, 2, 1]).unwrap(),
            QuotientClass::DoubleUnicyclic
        );
    }

    #[test]
    fn two_family_digon_is_double_unicyclic() {
        // Tr(x1 x2) vs Tr(x2 x1): the surviving quotient glues the two
        // 2-cycles into a digon whose two collapsed edges carry different
        // families
        let g1 = cactus("x1*x2");
        let g2 = cactus("x2*x1");
        assert_eq!(
            classify_second_order(&g1, &g2, &[0, 1, 0, 1]).unwrap(),
            QuotientClass::DoubleUnicyclic
        );
    }

    #[test]
    fn loop_pair_is_double_unicyclic_of_length_one() {
        // Tr x vs Tr x: two loops on one merged vertex
        let g = cactus("x1");
        assert_eq!(
            classify_second_order(&g, &g, &[0, 0]).unwrap(),
            QuotientClass::DoubleUnicyclic
        );
        // unmerged: disconnected, not classified
        assert_eq!(
            classify_second_order(&g, &g, &[0, 1]).unwrap(),
            QuotientClass::Other
        );
    }
}

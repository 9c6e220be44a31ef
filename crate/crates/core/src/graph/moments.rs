//! Exact partition sums over quotients of test graphs.
//!
//! For a pure-Wigner word `m` with cactus `T`, the expected normalized
//! trace at dimension `N` is exactly
//!
//! ```text
//! E[(1/N) Tr m] = sum over partitions pi of V(T) of
//!     (N)_(|pi|) * N^(-|E|/2 - 1) * omega(pi)
//! ```
//!
//! where `(N)_v` is the falling factorial (injective maps) and
//! `omega(pi)` groups the edges of the quotient by (family, endpoint
//! pair) and takes the product of entry moments, one factor per group.
//! Covariances of traces run the same sum over the disjoint union of two
//! cacti, subtracting the product of the single-graph sums.
//!
//! Partitions where some group has odd total multiplicity or a single
//! edge contribute nothing for the shipped entry laws; the sweep exits
//! those groups early.

use super::law::WignerEntryLaw;
use super::partitions::{prefixes, SetPartitions};
use super::TestGraph;
use crate::expr::{DeltaMonomial, Kind};
use crate::ratfn::RationalInN;
use crate::scalar::{ExactComplex, Scalar};
use num_rational::BigRational;
use rayon::prelude::*;

pub const DEFAULT_VERTEX_CAP: usize = 14;

/// Entry laws per Wigner family.
#[derive(Clone, Debug)]
pub struct LawSet {
    default: Option<WignerEntryLaw>,
    per_family: Vec<(u32, WignerEntryLaw)>,
}

impl LawSet {
    /// The same law for every family.
    pub fn uniform(law: WignerEntryLaw) -> Self {
        LawSet { default: Some(law), per_family: Vec::new() }
    }

    pub fn assign(mut self, family: u32, law: WignerEntryLaw) -> Self {
        self.per_family.retain(|(f, _)| *f != family);
        self.per_family.push((family, law));
        self
    }

    pub fn empty() -> Self {
        LawSet { default: None, per_family: Vec::new() }
    }

    pub fn for_family(&self, family: u32) -> Option<&WignerEntryLaw> {
        self.per_family
            .iter()
            .find(|(f, _)| *f == family)
            .map(|(_, l)| l)
            .or(self.default.as_ref())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("vertex count {got} exceeds the cap {cap}")]
    VertexCapExceeded { got: usize, cap: usize },
    #[error("monomial contains deterministic letters; the symbolic oracle is pure-Wigner")]
    MixedLetters,
    #[error("no entry law for Wigner family {0}")]
    MissingLaw(u32),
    #[error("degree {degree} exceeds the entry-law degree cap {cap}")]
    DegreeCap { degree: usize, cap: usize },
    #[error(transparent)]
    Graph(#[from] super::GraphError),
    #[error(transparent)]
    RatFn(#[from] crate::ratfn::RatFnError),
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

/// Ring of partition-sum accumulators. Moments are real, so sums are
/// real rationals; the i128 instance serves integral entry laws.
pub trait Ring: Clone + Send + Sync + PartialEq {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn one() -> Self;
    fn add_assign(&mut self, o: &Self);
    fn mul_assign(&mut self, o: &Self);
    fn sub(a: &Self, b: &Self) -> Self;
    fn mul(a: &Self, b: &Self) -> Self;
    fn to_rational(&self) -> BigRational;
}

impl Ring for i128 {
    fn zero() -> Self {
        0
    }
    fn is_zero(&self) -> bool {
        *self == 0
    }
    fn one() -> Self {
        1
    }
    fn add_assign(&mut self, o: &Self) {
        *self += o;
    }
    fn mul_assign(&mut self, o: &Self) {
        *self *= o;
    }
    fn sub(a: &Self, b: &Self) -> Self {
        a - b
    }
    fn mul(a: &Self, b: &Self) -> Self {
        a * b
    }
    fn to_rational(&self) -> BigRational {
        BigRational::from_integer((*self).into())
    }
}

impl Ring for BigRational {
    fn zero() -> Self {
        num_traits::Zero::zero()
    }
    fn is_zero(&self) -> bool {
        num_traits::Zero::is_zero(self)
    }
    fn one() -> Self {
        num_traits::One::one()
    }
    fn add_assign(&mut self, o: &Self) {
        *self += o;
    }
    fn mul_assign(&mut self, o: &Self) {
        *self *= o;
    }
    fn sub(a: &Self, b: &Self) -> Self {
        a - b
    }
    fn mul(a: &Self, b: &Self) -> Self {
        a * b
    }
    fn to_rational(&self) -> BigRational {
        self.clone()
    }
}

pub(crate) const MAX_EDGES: usize = 32;

/// A cactus (or pair of cacti) prepared for sweeping: per edge, endpoint
/// vertices, the law index, and which side of a covariance it came from.
#[derive(Clone)]
pub(crate) struct SweepGraph {
    pub n_vertices: usize,
    pub edges: Vec<SweepEdge>,
    pub laws: Vec<WignerEntryLaw>,
    pub sides: bool,
}

#[derive(Clone, Copy)]
pub(crate) struct SweepEdge {
    pub src: u8,
    pub dst: u8,
    pub law: u8,
    pub side: u8,
}

impl SweepGraph {
    pub fn prepare(
        graphs: &[&TestGraph],
        laws: &LawSet,
        cap: usize,
    ) -> Result<SweepGraph, OracleError> {
        let mut total_vertices = 0usize;
        let mut edges = Vec::new();
        let mut used: Vec<(u32, WignerEntryLaw)> = Vec::new();
        for (side, g) in graphs.iter().enumerate() {
            for e in &g.edges {
                if e.letter.kind != Kind::Wigner {
                    return Err(OracleError::MixedLetters);
                }
                let family = e.letter.family;
                let law_idx = match used.iter().position(|(f, _)| *f == family) {
                    Some(i) => i,
                    None => {
                        let law = laws
                            .for_family(family)
                            .ok_or(OracleError::MissingLaw(family))?;
                        used.push((family, law.clone()));
                        used.len() - 1
                    }
                };
                edges.push(SweepEdge {
                    src: (e.src + total_vertices) as u8,
                    dst: (e.dst + total_vertices) as u8,
                    law: law_idx as u8,
                    side: side as u8,
                });
            }
            total_vertices += g.n_vertices;
        }
        if total_vertices > cap || total_vertices > u8::MAX as usize {
            return Err(OracleError::VertexCapExceeded { got: total_vertices, cap });
        }
        if edges.len() > MAX_EDGES {
            return Err(OracleError::VertexCapExceeded { got: edges.len(), cap: MAX_EDGES });
        }
        for (_, law) in &used {
            if edges.len() > law.degree_cap() {
                return Err(OracleError::DegreeCap {
                    degree: edges.len(),
                    cap: law.degree_cap(),
                });
            }
        }
        Ok(SweepGraph {
            n_vertices: total_vertices,
            edges,
            laws: used.into_iter().map(|(_, l)| l).collect(),
            sides: graphs.len() > 1,
        })
    }

    pub fn integral(&self) -> bool {
        // Keep the i128 fast path for laws whose accumulated products
        // provably fit: preset-sized moments with <= 16 groups are far
        // below the i128 range.
        self.laws.iter().all(|l| l.is_integral())
    }
}

/// Per-edge-group counts under a partition.
#[derive(Clone, Copy, Default)]
struct GroupCounts {
    loop_edges: u8,
    fwd: u8, // edges oriented toward the lexicographically smaller block
    bwd: u8,
    side_loop: [u8; 2],
    side_fwd: [u8; 2],
    side_bwd: [u8; 2],
}

/// Group the edges of the quotient by (law, endpoint pair); calls `f`
/// once per group. Returns false if `f` asked to stop.
#[inline]
fn for_each_group(
    g: &SweepGraph,
    rgs: &[u8],
    mut f: impl FnMut(u8, bool, u8, u8, &GroupCounts) -> bool,
) -> bool {
    let ne = g.edges.len();
    let mut keys = [0u32; MAX_EDGES];
    let mut order = [0u8; MAX_EDGES];
    for (i, e) in g.edges.iter().enumerate() {
        let bu = rgs[e.src as usize];
        let bv = rgs[e.dst as usize];
        let (lo, hi) = if bu <= bv { (bu, bv) } else { (bv, bu) };
        keys[i] = ((e.law as u32) << 16) | ((lo as u32) << 8) | hi as u32;
        order[i] = i as u8;
    }
    // insertion sort of edge indices by key
    for i in 1..ne {
        let oi = order[i];
        let ki = keys[oi as usize];
        let mut j = i;
        while j > 0 && keys[order[j - 1] as usize] > ki {
            order[j] = order[j - 1];
            j -= 1;
        }
        order[j] = oi;
    }
    let mut i = 0;
    while i < ne {
        let key = keys[order[i] as usize];
        let mut counts = GroupCounts::default();
        let lo = ((key >> 8) & 0xff) as u8;
        let hi = (key & 0xff) as u8;
        let law = (key >> 16) as u8;
        let is_loop = lo == hi;
        let mut j = i;
        while j < ne && keys[order[j] as usize] == key {
            let e = &g.edges[order[j] as usize];
            let side = e.side as usize;
            if is_loop {
                counts.loop_edges += 1;
                counts.side_loop[side] += 1;
            } else {
                // entry reference: the group's variable is the entry at
                // (smaller block, larger block); an edge contributes the
                // plain variable when its target lies in the smaller block
                let toward_lo = rgs[e.dst as usize] == lo;
                if toward_lo {
                    counts.fwd += 1;
                    counts.side_fwd[side] += 1;
                } else {
                    counts.bwd += 1;
                    counts.side_bwd[side] += 1;
                }
            }
            j += 1;
        }
        if !f(law, is_loop, lo, hi, &counts) {
            return false;
        }
        i = j;
    }
    true
}

pub(crate) trait MomentLookup<R: Ring> {
    fn mu(&self, law: u8, a: u8, b: u8) -> R;
    fn diag(&self, law: u8, k: u8) -> R;
}

struct IntLookup<'a>(&'a [WignerEntryLaw]);
impl MomentLookup<i128> for IntLookup<'_> {
    #[inline]
    fn mu(&self, law: u8, a: u8, b: u8) -> i128 {
        self.0[law as usize].mu_i64(a as usize, b as usize) as i128
    }
    #[inline]
    fn diag(&self, law: u8, k: u8) -> i128 {
        self.0[law as usize].diag_i64(k as usize) as i128
    }
}

struct RatLookup<'a>(&'a [WignerEntryLaw]);
impl MomentLookup<BigRational> for RatLookup<'_> {
    fn mu(&self, law: u8, a: u8, b: u8) -> BigRational {
        self.0[law as usize].mu_rat(a as usize, b as usize).clone()
    }
    fn diag(&self, law: u8, k: u8) -> BigRational {
        self.0[law as usize].diag_rat(k as usize).clone()
    }
}

/// Joint moment product over groups; `R::zero()` when any group vanishes.
#[inline]
fn omega_joint<R: Ring>(g: &SweepGraph, rgs: &[u8], look: &impl MomentLookup<R>) -> R {
    let mut acc = R::one();
    let complete = for_each_group(g, rgs, |law, is_loop, _lo, _hi, c| {
        let m = if is_loop {
            look.diag(law, c.loop_edges)
        } else {
            look.mu(law, c.fwd, c.bwd)
        };
        if m.is_zero() {
            return false;
        }
        acc.mul_assign(&m);
        true
    });
    if complete {
        acc
    } else {
        R::zero()
    }
}

/// Joint and per-side moment products in one pass.
#[inline]
fn omega_joint_and_sides<R: Ring>(
    g: &SweepGraph,
    rgs: &[u8],
    look: &impl MomentLookup<R>,
) -> (R, R, R) {
    let mut joint = R::one();
    let mut joint_live = true;
    let mut side = [R::one(), R::one()];
    let mut side_live = [true, true];
    for_each_group(g, rgs, |law, is_loop, _lo, _hi, c| {
        if joint_live {
            let m = if is_loop {
                look.diag(law, c.loop_edges)
            } else {
                look.mu(law, c.fwd, c.bwd)
            };
            if m.is_zero() {
                joint_live = false;
            } else {
                joint.mul_assign(&m);
            }
        }
        for s in 0..2 {
            if !side_live[s] {
                continue;
            }
            let (l, f, b) = (c.side_loop[s], c.side_fwd[s], c.side_bwd[s]);
            if l == 0 && f == 0 && b == 0 {
                continue;
            }
            let m = if is_loop { look.diag(law, l) } else { look.mu(law, f, b) };
            if m.is_zero() {
                side_live[s] = false;
            } else {
                side[s].mul_assign(&m);
            }
        }
        joint_live || side_live[0] || side_live[1]
    });
    let [s1, s2] = side;
    (
        if joint_live { joint } else { R::zero() },
        if side_live[0] { s1 } else { R::zero() },
        if side_live[1] { s2 } else { R::zero() },
    )
}

pub(crate) struct SweepOutput<R> {
    /// omega sums indexed by block count (1-based; index 0 unused).
    pub by_blocks: Vec<R>,
    /// classification-weighted sum: for a single graph, omega over
    /// double-tree quotients; for a pair, the centered weight over
    /// double-unicyclic and 4-2-tree quotients.
    pub class_sum: R,
}

pub(crate) fn sweep<R: Ring>(
    g: &SweepGraph,
    classify: bool,
    look: &(impl MomentLookup<R> + Sync),
) -> SweepOutput<R> {
    let n = g.n_vertices;
    let run = |prefix: Option<&[u8]>| -> SweepOutput<R> {
        let mut parts = match prefix {
            Some(p) => SetPartitions::with_prefix(n, p),
            None => SetPartitions::new(n),
        };
        let mut out = SweepOutput {
            by_blocks: vec![R::zero(); n + 1],
            class_sum: R::zero(),
        };
        while parts.advance() {
            let rgs = parts.current();
            if g.sides {
                let (joint, s1, s2) = omega_joint_and_sides(g, rgs, look);
                if !joint.is_zero() {
                    out.by_blocks[parts.block_count()].add_assign(&joint);
                }
                if classify {
                    let centered = R::sub(&joint, &R::mul(&s1, &s2));
                    if !centered.is_zero() {
                        let nb = parts.block_count();
                        if super::classify::classify_pair(&g.edges, rgs, nb).counts_for_limit() {
                            out.class_sum.add_assign(&centered);
                        }
                    }
                }
            } else {
                let w = omega_joint(g, rgs, look);
                if !w.is_zero() {
                    out.by_blocks[parts.block_count()].add_assign(&w);
                    if classify {
                        let nb = parts.block_count();
                        if super::classify::is_double_tree(&g.edges, rgs, nb) {
                            out.class_sum.add_assign(&w);
                        }
                    }
                }
            }
        }
        out
    };

    if n >= 12 {
        let chunks = prefixes(n, 6);
        let partials: Vec<SweepOutput<R>> =
            chunks.par_iter().map(|p| run(Some(p))).collect();
        let mut total = SweepOutput {
            by_blocks: vec![R::zero(); n + 1],
            class_sum: R::zero(),
        };
        for p in partials {
            for (t, v) in total.by_blocks.iter_mut().zip(&p.by_blocks) {
                t.add_assign(v);
            }
            total.class_sum.add_assign(&p.class_sum);
        }
        total
    } else {
        run(None)
    }
}

pub(crate) struct SweepResult {
    pub by_blocks: Vec<BigRational>,
    pub class_sum: BigRational,
}

pub(crate) fn sweep_dispatch(g: &SweepGraph, classify: bool) -> SweepResult {
    if g.integral() {
        let out = sweep::<i128>(g, classify, &IntLookup(&g.laws));
        SweepResult {
            by_blocks: out.by_blocks.iter().map(|v| v.to_rational()).collect(),
            class_sum: out.class_sum.to_rational(),
        }
    } else {
        let out = sweep::<BigRational>(g, classify, &RatLookup(&g.laws));
        SweepResult { by_blocks: out.by_blocks, class_sum: out.class_sum }
    }
}

fn to_complex(r: &BigRational) -> ExactComplex {
    ExactComplex::new(r.clone(), num_traits::Zero::zero())
}

/// Assemble `sum_v acc[v] (N)_v / sqrt(N)^den` from block-count sums.
pub(crate) fn assemble(by_blocks: &[BigRational], den_half: i64) -> RationalInN {
    let mut total = RationalInN::zero();
    for (v, w) in by_blocks.iter().enumerate() {
        if num_traits::Zero::is_zero(w) {
            continue;
        }
        let term = RationalInN::falling_factorial(v).scale(&to_complex(w));
        total = total.add(&term);
    }
    total.div_sqrt_pow(den_half)
}

/// Entry-moment weight of a quotient graph: group the Wigner edges by
/// (family, endpoint pair), take `mu(a, b)` for an off-diagonal group
/// with `a` edges toward the smaller endpoint and `b` the other way (or
/// the diagonal moment for a loop group), and multiply — independence
/// across groups. The graph is taken as already quotiented.
pub fn omega_x(g: &TestGraph, laws: &LawSet) -> Result<Scalar, OracleError> {
    let sw = SweepGraph::prepare(&[g], laws, g.n_vertices.max(1))?;
    let rgs: Vec<u8> = (0..g.n_vertices as u8).collect();
    let w = omega_joint::<BigRational>(&sw, &rgs, &RatLookup(&sw.laws));
    Ok(Scalar::from_rational(w))
}

/// `E[Tr m]` as an exact rational function of the dimension.
pub(crate) fn exact_trace_sum(
    m: &DeltaMonomial,
    laws: &LawSet,
    cap: usize,
) -> Result<RationalInN, OracleError> {
    if m.is_empty() {
        // Tr 1 = N
        return Ok(RationalInN::falling_factorial(1));
    }
    let g = TestGraph::cactus(m)?;
    let sw = SweepGraph::prepare(&[&g], laws, cap)?;
    let res = sweep_dispatch(&sw, false);
    Ok(assemble(&res.by_blocks, sw.edges.len() as i64))
}

/// `E[(1/N) Tr m]` as an exact rational function of the dimension.
pub fn exact_moment(
    m: &DeltaMonomial,
    laws: &LawSet,
    cap: usize,
) -> Result<RationalInN, OracleError> {
    Ok(exact_trace_sum(m, laws, cap)?.div_sqrt_pow(2))
}

/// Exact covariance of `(Tr m1, Tr m2)` as a rational function of the
/// dimension: the partition sum over the disjoint union minus the product
/// of the single-graph sums.
pub fn exact_covariance(
    m1: &DeltaMonomial,
    m2: &DeltaMonomial,
    laws: &LawSet,
    cap: usize,
) -> Result<RationalInN, OracleError> {
    if m1.is_empty() || m2.is_empty() {
        return Ok(RationalInN::zero());
    }
    let g1 = TestGraph::cactus(m1)?;
    let g2 = TestGraph::cactus(m2)?;
    let sw = SweepGraph::prepare(&[&g1, &g2], laws, cap)?;
    let res = sweep_dispatch(&sw, false);
    let joint = assemble(&res.by_blocks, sw.edges.len() as i64);
    let t1 = exact_trace_sum(m1, laws, cap)?;
    let t2 = exact_trace_sum(m2, laws, cap)?;
    Ok(joint.sub(&t1.mul(&t2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Letter;
    use crate::graph::Edge;

    fn quotient_graph(n: usize, edges: &[(usize, usize)]) -> TestGraph {
        TestGraph {
            n_vertices: n,
            edges: edges
                .iter()
                .map(|&(src, dst)| Edge { src, dst, letter: Letter::wigner(1) })
                .collect(),
        }
    }

    #[test]
    fn omega_weights_by_entry_moments() {
        let gauss = LawSet::uniform(WignerEntryLaw::complex_gaussian(8));
        let quat = LawSet::uniform(WignerEntryLaw::quaternary(8));
        // two opposite edges on one pair: mu(1,1) = 1
        let opposite = quotient_graph(2, &[(0, 1), (1, 0)]);
        assert_eq!(omega_x(&opposite, &gauss).unwrap(), Scalar::one());
        // two same-oriented edges: the pseudo-variance, 0
        let same = quotient_graph(2, &[(0, 1), (0, 1)]);
        assert_eq!(omega_x(&same, &gauss).unwrap(), Scalar::zero());
        // four edges, two each way: the fourth moment
        let four = quotient_graph(2, &[(0, 1), (1, 0), (0, 1), (1, 0)]);
        assert_eq!(omega_x(&four, &gauss).unwrap(), Scalar::from_int(2));
        assert_eq!(omega_x(&four, &quat).unwrap(), Scalar::one());
        // loops use the diagonal law
        let loops = quotient_graph(1, &[(0, 0), (0, 0)]);
        assert_eq!(omega_x(&loops, &gauss).unwrap(), Scalar::one());
    }
}

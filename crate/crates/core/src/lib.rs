//! Limiting first- and second-order trace distributions of independent
//! Wigner matrices with deterministic matrices, taken over the diagonal.
//!
//! The crate has four engines:
//!
//! * [`expr`] — bracketed noncommutative words (`D[...]` is the projection
//!   onto the diagonal), canonical forms, and their structural
//!   combinatorics;
//! * [`first_order`] — the limiting trace functional, evaluated through
//!   the generalized Schwinger-Dyson recursion;
//! * [`second_order`] — the limiting covariance of traces, evaluated
//!   through orthogonal decomposition, the spoke (Mingo-Speicher) formula
//!   and the Leibniz rule;
//! * [`graph`] — an exact finite-dimension combinatorial oracle over test
//!   graphs, with partition sums as rational functions of the dimension;
//! * [`mc`] — a Monte-Carlo oracle sampling actual matrices.
//!
//! `verify` wires the engines against each other into the acceptance
//! suites exposed by the CLI.

pub mod expr;
pub mod scalar;

pub use expr::{
    parse_polynomial, render_monomial, render_polynomial, Alphabet, Atom, DeltaMonomial,
    DeltaPolynomial, FamilyTag, Kind, Letter, NCPartition,
};
pub use scalar::Scalar;

pub mod graph;
pub mod ratfn;
pub mod first_order;
pub mod second_order;
pub mod mc;
pub mod io;
pub mod verify;

//! Matrix ensembles: Wigner sampling and the deterministic-family catalog.
//!
//! Deterministic builders are restricted to analytically tractable shapes
//! so every expected value used in verification has a closed form:
//! Hermitian circulants (eigenvalues `f(k/N)` on Fourier eigenvectors,
//! delocalized), diagonal profiles (`diag f(k/N)`, the scalar-diagonal
//! negative control), the Fourier unitary, and scalar matrices.

use super::matrix::{Matrix, C64};
use super::rng::{self, StreamPurpose};
use crate::expr::{Kind, Letter};
use num_complex::Complex;
use std::collections::HashMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EntryLawKind {
    ComplexGaussian,
    Quaternary,
}

impl EntryLawKind {
    pub fn name(&self) -> &'static str {
        match self {
            EntryLawKind::ComplexGaussian => "complex-gaussian",
            EntryLawKind::Quaternary => "quaternary",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "complex-gaussian" => Some(EntryLawKind::ComplexGaussian),
            "quaternary" => Some(EntryLawKind::Quaternary),
            _ => None,
        }
    }

    /// The matching exact-oracle moment table.
    pub fn oracle_law(&self, cap: usize) -> crate::graph::law::WignerEntryLaw {
        match self {
            EntryLawKind::ComplexGaussian => {
                crate::graph::law::WignerEntryLaw::complex_gaussian(cap)
            }
            EntryLawKind::Quaternary => crate::graph::law::WignerEntryLaw::quaternary(cap),
        }
    }
}

/// Polynomial symbol `f(t) = c0 + c1 t + ...` with real coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct Symbol(pub Vec<f64>);

impl Symbol {
    pub fn eval(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    /// `\int_0^1 f`.
    pub fn integral(&self) -> f64 {
        self.0
            .iter()
            .enumerate()
            .map(|(k, c)| c / (k as f64 + 1.0))
            .sum()
    }

    /// `\int_0^1 f^2`.
    pub fn integral_sq(&self) -> f64 {
        let mut acc = 0.0;
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in self.0.iter().enumerate() {
                acc += a * b / ((i + j) as f64 + 1.0);
            }
        }
        acc
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DetBuilder {
    HermitianCirculant(Symbol),
    DiagonalProfile(Symbol),
    FourierUnitary,
    ScalarMatrix(f64),
}

impl DetBuilder {
    pub fn build(&self, n: usize) -> Matrix {
        match self {
            DetBuilder::HermitianCirculant(f) => {
                // Y = F diag(f(k/N)) F*; entries c_(j-l) with
                // c_d = (1/N) sum_k f(k/N) e^(2 pi i k d / N)
                let mut c = vec![C64::new(0.0, 0.0); n];
                let lambdas: Vec<f64> = (0..n).map(|k| f.eval(k as f64 / n as f64)).collect();
                for (d, cd) in c.iter_mut().enumerate() {
                    let mut acc = C64::new(0.0, 0.0);
                    for (k, l) in lambdas.iter().enumerate() {
                        let phase = std::f64::consts::TAU * (k * d % n) as f64 / n as f64;
                        acc += Complex::new(l * phase.cos(), l * phase.sin());
                    }
                    *cd = acc / n as f64;
                }
                let mut m = Matrix::zeros(n);
                for j in 0..n {
                    for l in 0..n {
                        m.set(j, l, c[(j + n - l) % n]);
                    }
                }
                m
            }
            DetBuilder::DiagonalProfile(f) => {
                let mut m = Matrix::zeros(n);
                for k in 0..n {
                    m.set(k, k, C64::new(f.eval(k as f64 / n as f64), 0.0));
                }
                m
            }
            DetBuilder::FourierUnitary => {
                let mut m = Matrix::zeros(n);
                let scale = 1.0 / (n as f64).sqrt();
                for j in 0..n {
                    for k in 0..n {
                        let phase = std::f64::consts::TAU * ((j * k) % n) as f64 / n as f64;
                        m.set(j, k, Complex::new(phase.cos() * scale, phase.sin() * scale));
                    }
                }
                m
            }
            DetBuilder::ScalarMatrix(c) => Matrix::scalar(n, *c),
        }
    }

    pub fn is_hermitian(&self) -> bool {
        !matches!(self, DetBuilder::FourierUnitary)
    }
}

#[derive(Clone, Debug)]
pub struct DetFamily {
    pub family: u32,
    pub builder: DetBuilder,
    /// Family index bound to the adjoint matrix, when distinct.
    pub partner: Option<u32>,
}

#[derive(Clone, Debug)]
pub struct EnsembleSpec {
    pub wigner: Vec<(u32, EntryLawKind)>,
    pub deterministic: Vec<DetFamily>,
    pub sizes: Vec<usize>,
    pub samples: usize,
    pub master_seed: u64,
}

impl EnsembleSpec {
    pub fn law_of(&self, family: u32) -> Option<EntryLawKind> {
        self.wigner.iter().find(|(f, _)| *f == family).map(|(_, l)| *l)
    }
}

/// Sample one Wigner matrix: i.i.d. entries above the diagonal from the
/// preset law, conjugate-mirrored, real diagonal from the preset's
/// diagonal law, all scaled by 1/sqrt(N). Deterministic given the key.
pub fn sample_wigner(
    law: EntryLawKind,
    family: u32,
    n: usize,
    master_seed: u64,
    replica: u32,
) -> Matrix {
    let mut rng = rng::stream(
        master_seed,
        StreamPurpose::WignerEntries,
        family,
        n as u32,
        replica,
    );
    let scale = 1.0 / (n as f64).sqrt();
    let mut m = Matrix::zeros(n);
    for i in 0..n {
        let d = match law {
            EntryLawKind::ComplexGaussian => rng::standard_normal(&mut rng),
            EntryLawKind::Quaternary => rng::rademacher(&mut rng),
        };
        m.set(i, i, C64::new(d * scale, 0.0));
        for j in i + 1..n {
            let z = match law {
                EntryLawKind::ComplexGaussian => rng::complex_gaussian(&mut rng),
                EntryLawKind::Quaternary => rng::quaternary(&mut rng),
            };
            m.set(i, j, z * scale);
            m.set(j, i, z.conj() * scale);
        }
    }
    m
}

/// All matrices bound for one replica at one size, keyed by family (the
/// adjoint-partner normalization of a letter does not change which matrix
/// it denotes).
pub struct Bindings {
    pub n: usize,
    map: HashMap<(Kind, u32), std::sync::Arc<Matrix>>,
}

#[derive(Debug, thiserror::Error)]
pub enum BindError {
    #[error("letter {0} is not bound to a matrix")]
    Unbound(String),
    #[error("matrix size mismatch for {0}")]
    SizeMismatch(String),
}

impl Bindings {
    pub fn for_replica(
        spec: &EnsembleSpec,
        det_cache: &HashMap<(u32, usize), std::sync::Arc<Matrix>>,
        n: usize,
        replica: u32,
    ) -> Bindings {
        let mut map = HashMap::new();
        for &(family, law) in &spec.wigner {
            let m = sample_wigner(law, family, n, spec.master_seed, replica);
            map.insert((Kind::Wigner, family), std::sync::Arc::new(m));
        }
        for fam in &spec.deterministic {
            let built = det_cache
                .get(&(fam.family, n))
                .cloned()
                .unwrap_or_else(|| std::sync::Arc::new(fam.builder.build(n)));
            if let Some(p) = fam.partner {
                if p != fam.family {
                    let adj = std::sync::Arc::new(built.adjoint());
                    map.insert((Kind::Deterministic, p), adj);
                }
            }
            map.insert((Kind::Deterministic, fam.family), built);
        }
        Bindings { n, map }
    }

    pub fn insert(&mut self, letter: Letter, m: Matrix) {
        self.map.insert((letter.kind, letter.family), std::sync::Arc::new(m));
    }

    pub fn empty(n: usize) -> Bindings {
        Bindings { n, map: HashMap::new() }
    }

    pub fn get(&self, letter: &Letter) -> Result<std::sync::Arc<Matrix>, BindError> {
        let m = self
            .map
            .get(&(letter.kind, letter.family))
            .cloned()
            .ok_or_else(|| BindError::Unbound(letter.to_string()))?;
        if m.dim() != self.n {
            return Err(BindError::SizeMismatch(letter.to_string()));
        }
        Ok(m)
    }

    /// Precompute deterministic matrices once per size.
    pub fn det_cache(
        spec: &EnsembleSpec,
        n: usize,
    ) -> HashMap<(u32, usize), std::sync::Arc<Matrix>> {
        let mut cache = HashMap::new();
        for fam in &spec.deterministic {
            cache.insert((fam.family, n), std::sync::Arc::new(fam.builder.build(n)));
        }
        cache
    }
}

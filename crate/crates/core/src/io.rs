//! JSON documents for states, ensembles, entry laws, and reports.
//!
//! Numeric fields that feed exact computations are strings in the
//! expression-coefficient syntax (`"3/4"`, `"2.5"`, `"(1,-1/2)"`) so
//! exactness survives the round trip.

use crate::expr::{parse_polynomial, Alphabet, DeltaMonomial, FamilyTag};
use crate::first_order::FirstOrderState;
use crate::graph::law::WignerEntryLaw;
use crate::graph::moments::LawSet;
use crate::mc::{DetBuilder, DetFamily, EnsembleSpec, EntryLawKind, Symbol};
use crate::scalar::{parse_scalar, Scalar};
use crate::second_order::SecondOrderState;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("bad scalar literal {0:?}")]
    BadScalar(String),
    #[error("bad expression {text:?}: {err}")]
    BadExpr { text: String, err: String },
    #[error("expression {0:?} must be a single monomial with coefficient 1")]
    NotMonomial(String),
    #[error("bad family tag {0:?} (expected \"x<k>\" or \"y\")")]
    BadTag(String),
    #[error("unknown preset or builder {0:?}")]
    Unknown(String),
    #[error(transparent)]
    Law(#[from] crate::graph::law::LawError),
}

fn scalar(text: &str) -> Result<Scalar, IoError> {
    parse_scalar(text).ok_or_else(|| IoError::BadScalar(text.to_string()))
}

fn scalar_f64(text: &str) -> Result<f64, IoError> {
    Ok(scalar(text)?.to_complex_f64().re)
}

fn monomial(text: &str, alphabet: &Alphabet) -> Result<DeltaMonomial, IoError> {
    let p = parse_polynomial(text, alphabet).map_err(|e| IoError::BadExpr {
        text: text.to_string(),
        err: e.to_string(),
    })?;
    p.as_single_monomial()
        .cloned()
        .ok_or_else(|| IoError::NotMonomial(text.to_string()))
}

fn tag(text: &str) -> Result<FamilyTag, IoError> {
    if text == "y" {
        return Ok(FamilyTag::Deterministic);
    }
    if let Some(k) = text.strip_prefix('x') {
        if let Ok(f) = k.parse() {
            return Ok(FamilyTag::Wigner(f));
        }
    }
    Err(IoError::BadTag(text.to_string()))
}

// ---------------------------------------------------------------- states

#[derive(Serialize, Deserialize, Default)]
pub struct FirstOrderDoc {
    #[serde(default)]
    pub h5: Option<bool>,
    #[serde(default)]
    pub wigner: Vec<WignerDoc>,
    #[serde(default)]
    pub deterministic: Vec<DeterministicDoc>,
    /// Joint word moments `[expr, value]` for words the per-family models
    /// do not cover.
    #[serde(default)]
    pub words: Vec<(String, String)>,
}

#[derive(Serialize, Deserialize)]
pub struct WignerDoc {
    pub family: u32,
    #[serde(default)]
    pub variance: Option<String>,
}

#[derive(Serialize, Deserialize)]
pub struct DeterministicDoc {
    pub family: u32,
    pub model: String,
    #[serde(default)]
    pub value: Option<String>,
    #[serde(default)]
    pub moments: Option<Vec<String>>,
}

impl FirstOrderDoc {
    pub fn build(&self, alphabet: &Alphabet) -> Result<FirstOrderState, IoError> {
        let mut state = FirstOrderState::new();
        if let Some(h5) = self.h5 {
            state = state.with_h5(h5);
        }
        for w in &self.wigner {
            if let Some(v) = &w.variance {
                state = state.with_wigner_variance(w.family, scalar(v)?);
            }
        }
        for d in &self.deterministic {
            match d.model.as_str() {
                "scalar" => {
                    let v = d.value.as_deref().ok_or_else(|| {
                        IoError::BadScalar("scalar model requires \"value\"".into())
                    })?;
                    state = state.with_scalar_y(d.family, scalar(v)?);
                }
                "power-moments" => {
                    let ms = d.moments.as_ref().ok_or_else(|| {
                        IoError::BadScalar("power-moments model requires \"moments\"".into())
                    })?;
                    let parsed: Result<Vec<_>, _> = ms.iter().map(|m| scalar(m)).collect();
                    state = state.with_power_y(d.family, parsed?);
                }
                other => return Err(IoError::Unknown(other.to_string())),
            }
        }
        for (expr, value) in &self.words {
            state = state.with_y_word(monomial(expr, alphabet)?, scalar(value)?);
        }
        Ok(state)
    }
}

#[derive(Serialize, Deserialize, Default)]
pub struct SecondOrderDoc {
    #[serde(default)]
    pub first: FirstOrderDoc,
    /// Entry law preset for every Wigner family.
    #[serde(default)]
    pub law: Option<String>,
    /// Per-family overrides of the preset.
    #[serde(default)]
    pub laws: Vec<(u32, String)>,
    #[serde(default)]
    pub vertex_cap: Option<usize>,
    /// Explicit marginal covariances `[family-tag, p, q, value]`.
    #[serde(default)]
    pub marginals: Vec<(String, String, String, String)>,
}

impl SecondOrderDoc {
    pub fn build(&self, alphabet: &Alphabet) -> Result<SecondOrderState, IoError> {
        let first = self.first.build(alphabet)?;
        let cap = self.vertex_cap.unwrap_or(crate::graph::moments::DEFAULT_VERTEX_CAP);
        let mut laws = match &self.law {
            Some(name) => LawSet::uniform(WignerEntryLaw::preset(name, cap.max(12))?),
            None => LawSet::empty(),
        };
        for (family, name) in &self.laws {
            laws = laws.assign(*family, WignerEntryLaw::preset(name, cap.max(12))?);
        }
        let mut state = SecondOrderState::new(first).with_laws(laws).with_vertex_cap(cap);
        for (t, p, q, v) in &self.marginals {
            state = state.with_marginal(
                tag(t)?,
                monomial(p, alphabet)?,
                monomial(q, alphabet)?,
                scalar(v)?,
            );
        }
        Ok(state)
    }
}

// --------------------------------------------------------------- ensemble

#[derive(Serialize, Deserialize)]
pub struct EnsembleDoc {
    #[serde(default)]
    pub seed: u64,
    pub sizes: Vec<usize>,
    pub samples: usize,
    #[serde(default)]
    pub wigner: Vec<EnsembleWignerDoc>,
    #[serde(default)]
    pub deterministic: Vec<EnsembleDetDoc>,
}

#[derive(Serialize, Deserialize)]
pub struct EnsembleWignerDoc {
    pub family: u32,
    pub law: String,
}

#[derive(Serialize, Deserialize)]
pub struct EnsembleDetDoc {
    pub family: u32,
    pub builder: String,
    #[serde(default)]
    pub symbol: Option<Vec<String>>,
    #[serde(default)]
    pub value: Option<String>,
    #[serde(default)]
    pub partner: Option<u32>,
}

impl EnsembleDoc {
    pub fn build(&self) -> Result<EnsembleSpec, IoError> {
        let mut wigner = Vec::new();
        for w in &self.wigner {
            let law =
                EntryLawKind::parse(&w.law).ok_or_else(|| IoError::Unknown(w.law.clone()))?;
            wigner.push((w.family, law));
        }
        let mut deterministic = Vec::new();
        for d in &self.deterministic {
            let symbol = || -> Result<Symbol, IoError> {
                let coeffs = d
                    .symbol
                    .as_ref()
                    .ok_or_else(|| IoError::BadScalar("builder requires \"symbol\"".into()))?;
                let parsed: Result<Vec<f64>, _> = coeffs.iter().map(|c| scalar_f64(c)).collect();
                Ok(Symbol(parsed?))
            };
            let builder = match d.builder.as_str() {
                "hermitian-circulant" => DetBuilder::HermitianCirculant(symbol()?),
                "diagonal-profile" => DetBuilder::DiagonalProfile(symbol()?),
                "fourier-unitary" => DetBuilder::FourierUnitary,
                "scalar" => DetBuilder::ScalarMatrix(scalar_f64(
                    d.value
                        .as_deref()
                        .ok_or_else(|| IoError::BadScalar("scalar builder requires \"value\"".into()))?,
                )?),
                other => return Err(IoError::Unknown(other.to_string())),
            };
            deterministic.push(DetFamily { family: d.family, builder, partner: d.partner });
        }
        Ok(EnsembleSpec {
            wigner,
            deterministic,
            sizes: self.sizes.clone(),
            samples: self.samples,
            master_seed: self.seed,
        })
    }
}

// ------------------------------------------------------------- entry laws

#[derive(Serialize, Deserialize)]
pub struct LawDoc {
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub degree_cap: Option<usize>,
    /// `[a, b, value]` rows of the off-diagonal moment table.
    #[serde(default)]
    pub mu: Vec<(usize, usize, String)>,
    /// Diagonal moments by order.
    #[serde(default)]
    pub diag: Vec<String>,
}

impl LawDoc {
    pub fn build(&self) -> Result<WignerEntryLaw, IoError> {
        let cap = self.degree_cap.unwrap_or(crate::graph::law::DEFAULT_DEGREE_CAP);
        if let Some(p) = &self.preset {
            return Ok(WignerEntryLaw::preset(p, cap)?);
        }
        let mut mu = Vec::new();
        for (a, b, v) in &self.mu {
            let s = scalar(v)?;
            let exact = s
                .as_exact()
                .ok_or_else(|| IoError::BadScalar(v.clone()))?
                .re
                .clone();
            mu.push((*a, *b, exact));
        }
        let mut diag = Vec::new();
        for v in &self.diag {
            let s = scalar(v)?;
            diag.push(s.as_exact().ok_or_else(|| IoError::BadScalar(v.clone()))?.re.clone());
        }
        Ok(WignerEntryLaw::from_tables(
            self.name.as_deref().unwrap_or("custom"),
            cap,
            &mu,
            &diag,
        )?)
    }
}

// -------------------------------------------------------------- alphabet

#[derive(Serialize, Deserialize, Default)]
pub struct AlphabetDoc {
    #[serde(default)]
    pub wigner: Vec<u32>,
    #[serde(default)]
    pub deterministic: Vec<AlphabetDetDoc>,
}

#[derive(Serialize, Deserialize)]
pub struct AlphabetDetDoc {
    pub family: u32,
    #[serde(default)]
    pub partner: Option<u32>,
}

impl AlphabetDoc {
    pub fn build(&self) -> Alphabet {
        let mut a = Alphabet::new();
        for &f in &self.wigner {
            a.declare_wigner(f);
        }
        for d in &self.deterministic {
            match d.partner {
                Some(p) => a.declare_deterministic(d.family, p),
                None => a.declare_deterministic_no_adjoint(d.family),
            }
        }
        a
    }
}

// --------------------------------------------------------------- reports

#[derive(Serialize)]
pub struct ReportDoc {
    pub seed: u64,
    pub sizes: Vec<SizeDoc>,
    pub diagnostics: Vec<DiagnosticDoc>,
}

#[derive(Serialize)]
pub struct DiagnosticDoc {
    pub label: String,
    pub values: Vec<(usize, f64)>,
    pub decaying: bool,
}

#[derive(Serialize)]
pub struct SizeDoc {
    pub n: usize,
    pub replicas: usize,
    pub means: Vec<MeanDoc>,
    pub pairs: Vec<CovDoc>,
}

#[derive(Serialize)]
pub struct MeanDoc {
    pub expr: String,
    pub mean: [f64; 2],
    pub se: f64,
}

#[derive(Serialize)]
pub struct CovDoc {
    pub p: String,
    pub q: String,
    pub cov: [f64; 2],
    pub se: f64,
}

pub fn report_doc(
    report: &crate::mc::Report,
    diagnostics: &[crate::mc::estimate::DiagnosticReport],
) -> ReportDoc {
    ReportDoc {
        seed: report.master_seed,
        diagnostics: diagnostics
            .iter()
            .map(|d| DiagnosticDoc {
                label: d.label.clone(),
                values: d.values.clone(),
                decaying: d.decaying,
            })
            .collect(),
        sizes: report
            .sizes
            .iter()
            .map(|s| SizeDoc {
                n: s.n,
                replicas: s.replicas,
                means: s
                    .means
                    .iter()
                    .map(|m| MeanDoc {
                        expr: m.expr.clone(),
                        mean: [m.mean.re, m.mean.im],
                        se: m.se,
                    })
                    .collect(),
                pairs: s
                    .covs
                    .iter()
                    .map(|c| CovDoc {
                        p: c.p.clone(),
                        q: c.q.clone(),
                        cov: [c.cov.re, c.cov.im],
                        se: c.se,
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// Flatten a report to CSV rows.
pub fn report_csv(report: &crate::mc::Report) -> String {
    let mut out = String::from("kind,n,p,q,re,im,se\n");
    for s in &report.sizes {
        for m in &s.means {
            out.push_str(&format!(
                "mean,{},{},,{},{},{}\n",
                s.n, m.expr, m.mean.re, m.mean.im, m.se
            ));
        }
        for c in &s.covs {
            out.push_str(&format!(
                "cov,{},{},{},{},{},{}\n",
                s.n, c.p, c.q, c.cov.re, c.cov.im, c.se
            ));
        }
    }
    out
}

/// `to_f64` helper for rational scalars in documents.
pub fn rational_to_f64(r: &num_rational::BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_order_doc_roundtrip() {
        let text = r#"{
            "h5": true,
            "wigner": [{"family": 1, "variance": "1"}],
            "deterministic": [
                {"family": 1, "model": "scalar", "value": "2"},
                {"family": 2, "model": "power-moments", "moments": ["1", "0", "1/3"]}
            ],
            "words": [["y3*y3", "1/2"]]
        }"#;
        let doc: FirstOrderDoc = serde_json::from_str(text).unwrap();
        let state = doc.build(&Alphabet::permissive()).unwrap();
        let p = parse_polynomial("y1*y1", &Alphabet::permissive()).unwrap();
        let v = crate::first_order::eval_phi(&p, &state).unwrap();
        assert_eq!(v, Scalar::from_int(4));
        let p2 = parse_polynomial("y2*y2", &Alphabet::permissive()).unwrap();
        assert_eq!(
            crate::first_order::eval_phi(&p2, &state).unwrap(),
            Scalar::from_ratio(1, 3)
        );
        let p3 = parse_polynomial("y3^2", &Alphabet::permissive()).unwrap();
        assert_eq!(
            crate::first_order::eval_phi(&p3, &state).unwrap(),
            Scalar::from_ratio(1, 2)
        );
    }

    #[test]
    fn second_order_doc_with_marginals() {
        let text = r#"{
            "first": {},
            "law": "quaternary",
            "marginals": [["x1", "x1", "x1", "7"]]
        }"#;
        let doc: SecondOrderDoc = serde_json::from_str(text).unwrap();
        let state = doc.build(&Alphabet::permissive()).unwrap();
        let p = parse_polynomial("x1", &Alphabet::permissive()).unwrap();
        let v = crate::second_order::eval_phi2(&p, &p, &state).unwrap();
        assert_eq!(v, Scalar::from_int(7));
    }

    #[test]
    fn ensemble_doc_builds() {
        let text = r#"{
            "seed": 11,
            "sizes": [32, 64],
            "samples": 10,
            "wigner": [{"family": 1, "law": "complex-gaussian"}],
            "deterministic": [
                {"family": 1, "builder": "hermitian-circulant", "symbol": ["-1", "2"]},
                {"family": 2, "builder": "fourier-unitary", "partner": 3},
                {"family": 4, "builder": "scalar", "value": "1/2"}
            ]
        }"#;
        let doc: EnsembleDoc = serde_json::from_str(text).unwrap();
        let spec = doc.build().unwrap();
        assert_eq!(spec.sizes, vec![32, 64]);
        assert_eq!(spec.deterministic.len(), 3);
        assert_eq!(spec.law_of(1), Some(EntryLawKind::ComplexGaussian));
    }

    #[test]
    fn law_doc_preset_and_table() {
        let preset: LawDoc = serde_json::from_str(r#"{"preset": "quaternary"}"#).unwrap();
        assert_eq!(preset.build().unwrap().name, "quaternary");
        let custom: LawDoc = serde_json::from_str(
            r#"{
                "name": "custom",
                "degree_cap": 6,
                "mu": [[0,0,"1"],[1,1,"1"],[2,2,"3/2"]],
                "diag": ["1", "0", "2"]
            }"#,
        )
        .unwrap();
        let law = custom.build().unwrap();
        assert_eq!(law.mu_rat(2, 2), &num_rational::BigRational::new(3.into(), 2.into()));
        // validation catches broken tables
        let broken: LawDoc =
            serde_json::from_str(r#"{"mu": [[0,0,"1"],[1,1,"2"]], "diag": ["1"]}"#).unwrap();
        assert!(broken.build().is_err());
    }

    #[test]
    fn alphabet_doc_strictness() {
        let doc: AlphabetDoc = serde_json::from_str(
            r#"{"wigner": [1], "deterministic": [{"family": 1}, {"family": 2, "partner": 3}]}"#,
        )
        .unwrap();
        let a = doc.build();
        assert!(parse_polynomial("x1*y2'", &a).is_ok());
        assert!(parse_polynomial("y1'", &a).is_err());
        assert!(parse_polynomial("x2", &a).is_err());
    }
}

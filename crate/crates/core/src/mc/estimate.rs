//! Replica statistics: means of normalized traces, covariances of traces
//! with jackknife standard errors, Gaussianity cumulants, and the
//! scalar-diagonal diagnostics.
//!
//! Replicas are embarrassingly parallel; per-replica work is
//! single-threaded and every replica draws from its own keyed stream, so
//! reports are identical whatever the worker count.

use super::ensemble::{Bindings, EnsembleSpec};
use super::eval::TraceEvaluator;
use super::matrix::C64;
use crate::expr::DeltaPolynomial;
use rayon::prelude::*;

#[derive(Clone, Debug)]
pub struct MeanReport {
    pub expr: String,
    /// Sample mean of `(1/N) Tr p`.
    pub mean: C64,
    /// Standard error of the mean (componentwise variances combined).
    pub se: f64,
}

#[derive(Clone, Debug)]
pub struct CovReport {
    pub p: String,
    pub q: String,
    /// Bilinear sample covariance of `(Tr p, Tr q)` (no conjugation; pass
    /// the adjoint explicitly for the starred convention).
    pub cov: C64,
    /// Jackknife standard error.
    pub se: f64,
}

#[derive(Clone, Debug)]
pub struct SizeReport {
    pub n: usize,
    pub replicas: usize,
    pub means: Vec<MeanReport>,
    pub covs: Vec<CovReport>,
    /// Per expression: sample variance of `Tr p` (real part), for
    /// boundedness checks.
    pub trace_variances: Vec<f64>,
    /// Standardized third and fourth cumulants of `Re Tr p`.
    pub cumulants: Vec<(f64, f64)>,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub master_seed: u64,
    pub sizes: Vec<SizeReport>,
}

#[derive(Debug, thiserror::Error)]
pub enum EstimateError {
    #[error(transparent)]
    Bind(#[from] super::ensemble::BindError),
    #[error("covariance needs at least two replicas")]
    TooFewReplicas,
}

/// Estimate means and covariances for the given expressions, at every
/// size in the spec.
pub fn estimate(
    spec: &EnsembleSpec,
    exprs: &[(String, DeltaPolynomial)],
    pairs: &[(usize, usize)],
) -> Result<Report, EstimateError> {
    if spec.samples < 2 && !pairs.is_empty() {
        return Err(EstimateError::TooFewReplicas);
    }
    let mut sizes = Vec::with_capacity(spec.sizes.len());
    for &n in &spec.sizes {
        sizes.push(estimate_at_size(spec, exprs, pairs, n)?);
    }
    Ok(Report { master_seed: spec.master_seed, sizes })
}

fn estimate_at_size(
    spec: &EnsembleSpec,
    exprs: &[(String, DeltaPolynomial)],
    pairs: &[(usize, usize)],
    n: usize,
) -> Result<SizeReport, EstimateError> {
    let det_cache = Bindings::det_cache(spec, n);
    let s = spec.samples;
    // per replica, all unnormalized traces
    let traces: Vec<Result<Vec<C64>, EstimateError>> = (0..s as u32)
        .into_par_iter()
        .map(|replica| {
            let bindings = Bindings::for_replica(spec, &det_cache, n, replica);
            let mut ev = TraceEvaluator::new(&bindings);
            let mut row = Vec::with_capacity(exprs.len());
            for (_, p) in exprs {
                row.push(ev.trace(p)?);
            }
            Ok(row)
        })
        .collect();
    let mut table: Vec<Vec<C64>> = Vec::with_capacity(s);
    for row in traces {
        table.push(row?);
    }

    let nf = n as f64;
    let sf = s as f64;
    let mut means = Vec::with_capacity(exprs.len());
    let mut trace_variances = Vec::with_capacity(exprs.len());
    let mut cumulants = Vec::with_capacity(exprs.len());
    for (e, (name, _)) in exprs.iter().enumerate() {
        let values: Vec<C64> = table.iter().map(|row| row[e] / nf).collect();
        let mean: C64 = values.iter().sum::<C64>() / sf;
        let var_re =
            values.iter().map(|v| (v.re - mean.re).powi(2)).sum::<f64>() / (sf - 1.0);
        let var_im =
            values.iter().map(|v| (v.im - mean.im).powi(2)).sum::<f64>() / (sf - 1.0);
        means.push(MeanReport {
            expr: name.clone(),
            mean,
            se: ((var_re + var_im) / sf).sqrt(),
        });

        let raw: Vec<f64> = table.iter().map(|row| row[e].re).collect();
        let raw_mean = raw.iter().sum::<f64>() / sf;
        let m2 = raw.iter().map(|v| (v - raw_mean).powi(2)).sum::<f64>() / sf;
        let m3 = raw.iter().map(|v| (v - raw_mean).powi(3)).sum::<f64>() / sf;
        let m4 = raw.iter().map(|v| (v - raw_mean).powi(4)).sum::<f64>() / sf;
        trace_variances.push(m2 * sf / (sf - 1.0));
        if m2 > 0.0 {
            cumulants.push((m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0));
        } else {
            cumulants.push((0.0, 0.0));
        }
    }

    let mut covs = Vec::with_capacity(pairs.len());
    for &(ip, iq) in pairs {
        let ps: Vec<C64> = table.iter().map(|row| row[ip]).collect();
        let qs: Vec<C64> = table.iter().map(|row| row[iq]).collect();
        let pmean: C64 = ps.iter().sum::<C64>() / sf;
        let qmean: C64 = qs.iter().sum::<C64>() / sf;
        let cov: C64 = ps
            .iter()
            .zip(&qs)
            .map(|(p, q)| (p - pmean) * (q - qmean))
            .sum::<C64>()
            / (sf - 1.0);
        // jackknife over replicas
        let sum_pq: C64 = ps.iter().zip(&qs).map(|(p, q)| p * q).sum();
        let sum_p: C64 = ps.iter().sum();
        let sum_q: C64 = qs.iter().sum();
        let mut jack = Vec::with_capacity(s);
        for i in 0..s {
            let sp = sum_p - ps[i];
            let sq = sum_q - qs[i];
            let spq = sum_pq - ps[i] * qs[i];
            let m = sf - 1.0;
            jack.push((spq - sp * sq / m) / (m - 1.0));
        }
        let jmean: C64 = jack.iter().sum::<C64>() / sf;
        let jvar: f64 =
            jack.iter().map(|v| (v - jmean).norm_sqr()).sum::<f64>() * (sf - 1.0) / sf;
        covs.push(CovReport {
            p: exprs[ip].0.clone(),
            q: exprs[iq].0.clone(),
            cov,
            se: jvar.sqrt(),
        });
    }

    Ok(SizeReport { n, replicas: s, means, covs, trace_variances, cumulants })
}

/// The scalar-diagonal diagnostic `(1/N) Tr[D(A) D(A)*] - |(1/N) Tr A|^2`
/// for `A = p(bindings)` across sizes, with a monotone-decay verdict.
#[derive(Clone, Debug)]
pub struct DiagnosticReport {
    pub label: String,
    pub values: Vec<(usize, f64)>,
    pub decaying: bool,
}

pub fn h5_diagnostic(
    spec: &EnsembleSpec,
    label: &str,
    p: &DeltaPolynomial,
) -> Result<DiagnosticReport, EstimateError> {
    let mut values = Vec::with_capacity(spec.sizes.len());
    for &n in &spec.sizes {
        let det_cache = Bindings::det_cache(spec, n);
        let bindings = Bindings::for_replica(spec, &det_cache, n, 0);
        let mut ev = TraceEvaluator::new(&bindings);
        // evaluate the polynomial as a single matrix: sum of monomials
        let mut acc = super::matrix::Matrix::zeros(n);
        for (m, c) in p.terms() {
            let mm = ev.eval(m)?;
            let cv = c.to_complex_f64();
            for i in 0..n {
                for j in 0..n {
                    let v = acc.get(i, j) + cv * mm.get(i, j);
                    acc.set(i, j, v);
                }
            }
        }
        values.push((n, acc.h5_diagnostic()));
    }
    let decaying = values.windows(2).all(|w| w[1].1 <= w[0].1 + 1e-12);
    Ok(DiagnosticReport { label: label.to_string(), values, decaying })
}

/// Ordinary-least-squares slope with its standard error, for the
/// variance-vs-size boundedness regression.
pub fn regression_slope(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let residuals: f64 = points
        .iter()
        .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
        .sum();
    let dof = (points.len().max(3) - 2) as f64;
    let se = (residuals / dof / sxx).sqrt();
    (slope, se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_polynomial, Alphabet};
    use crate::mc::ensemble::{DetBuilder, DetFamily, EntryLawKind, Symbol};

    fn parse(text: &str) -> DeltaPolynomial {
        parse_polynomial(text, &Alphabet::permissive()).unwrap()
    }

    fn small_spec() -> EnsembleSpec {
        EnsembleSpec {
            wigner: vec![(1, EntryLawKind::ComplexGaussian), (2, EntryLawKind::Quaternary)],
            deterministic: vec![DetFamily {
                family: 1,
                builder: DetBuilder::HermitianCirculant(Symbol(vec![-1.0, 2.0])),
                partner: None,
            }],
            sizes: vec![32],
            samples: 64,
            master_seed: 2024,
        }
    }

    #[test]
    fn reproducible_across_worker_counts() {
        let spec = small_spec();
        let exprs = vec![
            ("x1^2".to_string(), parse("x1^2")),
            ("x1*y1".to_string(), parse("x1*y1")),
        ];
        let pairs = vec![(0, 1)];
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool2 = rayon::ThreadPoolBuilder::new().num_threads(2).build().unwrap();
        let r1 = pool1.install(|| estimate(&spec, &exprs, &pairs)).unwrap();
        let r2 = pool2.install(|| estimate(&spec, &exprs, &pairs)).unwrap();
        for (a, b) in r1.sizes[0].means.iter().zip(&r2.sizes[0].means) {
            assert_eq!(a.mean, b.mean);
            assert_eq!(a.se, b.se);
        }
        assert_eq!(r1.sizes[0].covs[0].cov, r2.sizes[0].covs[0].cov);
    }

    #[test]
    fn mean_of_x_squared_matches_exact_moment() {
        use crate::graph::moments::{exact_moment, LawSet};
        let spec = EnsembleSpec { sizes: vec![48], samples: 200, ..small_spec() };
        let exprs = vec![("x1^2".to_string(), parse("x1^2"))];
        let report = estimate(&spec, &exprs, &[]).unwrap();
        let m = &report.sizes[0].means[0];
        let laws = LawSet::uniform(EntryLawKind::ComplexGaussian.oracle_law(8));
        let expected = exact_moment(
            parse("x1^2").as_single_monomial().unwrap(),
            &laws,
            14,
        )
        .unwrap()
        .eval_at(48)
        .unwrap()
        .to_complex_f64();
        assert!(
            (m.mean - expected).norm() <= 3.5 * m.se.max(1e-9),
            "mean {} expected {} se {}",
            m.mean,
            expected,
            m.se
        );
    }

    #[test]
    fn independent_families_have_small_covariance() {
        let spec = EnsembleSpec { samples: 128, ..small_spec() };
        let exprs = vec![
            ("x1".to_string(), parse("x1")),
            ("x2".to_string(), parse("x2")),
        ];
        let report = estimate(&spec, &exprs, &[(0, 1)]).unwrap();
        let c = &report.sizes[0].covs[0];
        assert!(c.cov.norm() <= 4.0 * c.se.max(1e-9), "cov {} se {}", c.cov, c.se);
    }

    #[test]
    fn variance_of_trace_x_matches_d2() {
        // Cov(Tr x, Tr x) = d2 = 1 exactly at any size
        let spec = EnsembleSpec { samples: 400, ..small_spec() };
        let exprs = vec![("x1".to_string(), parse("x1"))];
        let report = estimate(&spec, &exprs, &[(0, 0)]).unwrap();
        let c = &report.sizes[0].covs[0];
        assert!(
            (c.cov - C64::new(1.0, 0.0)).norm() <= 4.0 * c.se,
            "cov {} se {}",
            c.cov,
            c.se
        );
    }

    #[test]
    fn diagnostics_by_family_kind() {
        let spec = EnsembleSpec {
            wigner: vec![],
            deterministic: vec![
                DetFamily {
                    family: 1,
                    builder: DetBuilder::HermitianCirculant(Symbol(vec![-1.0, 2.0])),
                    partner: None,
                },
                DetFamily {
                    family: 2,
                    builder: DetBuilder::DiagonalProfile(Symbol(vec![-1.0, 2.0])),
                    partner: None,
                },
                DetFamily { family: 3, builder: DetBuilder::ScalarMatrix(2.5), partner: None },
            ],
            sizes: vec![64, 128, 256],
            samples: 1,
            master_seed: 1,
        };
        let circ = h5_diagnostic(&spec, "circulant", &parse("y1")).unwrap();
        assert!(circ.decaying);
        assert!(circ.values.last().unwrap().1.abs() < 1e-10);
        let diag = h5_diagnostic(&spec, "diagonal-profile", &parse("y2")).unwrap();
        let last = diag.values.last().unwrap().1;
        assert!((last - 1.0 / 3.0).abs() < 0.05, "{last}");
        let scalar = h5_diagnostic(&spec, "scalar", &parse("y3")).unwrap();
        assert!(scalar.values.iter().all(|&(_, v)| v.abs() < 1e-12));
    }

    #[test]
    fn regression_slope_flat_line() {
        let (slope, se) = regression_slope(&[(1.0, 2.0), (2.0, 2.1), (3.0, 1.9), (4.0, 2.0)]);
        assert!(slope.abs() < 2.0 * se + 0.2);
    }
}

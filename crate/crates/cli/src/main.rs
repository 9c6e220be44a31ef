//! Command-line front end: canonical forms, first- and second-order
//! values, exact oracle computations, Monte-Carlo estimation, and the
//! verification suites.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use deltadist::expr::{parse_polynomial, render_monomial, render_polynomial, Alphabet};
use deltadist::first_order::Evaluator;
use deltadist::graph::moments::{exact_covariance, exact_moment, DEFAULT_VERTEX_CAP};
use deltadist::io::{
    report_csv, report_doc, AlphabetDoc, EnsembleDoc, FirstOrderDoc, LawDoc, SecondOrderDoc,
};
use deltadist::scalar::Scalar;
use deltadist::second_order::SecondOrderEngine;
use deltadist::verify;
use std::path::PathBuf;

/// First- and second-order trace distributions of Wigner and
/// deterministic matrices over the diagonal.
#[derive(Parser)]
#[command(name = "deltadist", version, about)]
struct Cli {
    /// Master seed for everything random.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output format for reports.
    #[arg(long, global = true, default_value = "json")]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Alphabet declarations (JSON); default accepts any letter and
    /// treats deterministic families as self-adjoint.
    #[arg(long, global = true)]
    alphabet: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Print the canonical form and block structure of expressions.
    Normalize { exprs: Vec<String> },
    /// Evaluate the limiting trace functional.
    Phi1(Phi1Args),
    /// Evaluate the limiting covariance of traces.
    Phi2(Phi2Args),
    /// Exact expected normalized trace as a rational function of N.
    OracleMoment(OracleArgs),
    /// Exact covariance of traces as a rational function of N.
    OracleCov(OracleCovArgs),
    /// Monte-Carlo estimation of trace means and covariances.
    Mc(McArgs),
    /// Run verification suites; nonzero exit on failure.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Phi1Args {
    exprs: Vec<String>,
    /// First-order state document (JSON).
    #[arg(long)]
    state: Option<PathBuf>,
}

#[derive(Args)]
struct Phi2Args {
    p: String,
    q: String,
    /// Second-order state document (JSON).
    #[arg(long)]
    state: Option<PathBuf>,
    /// Entry-law preset backing Wigner marginals when no state document
    /// is given.
    #[arg(long, default_value = "complex-gaussian")]
    law: String,
}

#[derive(Args)]
struct OracleArgs {
    exprs: Vec<String>,
    /// Entry-law document (JSON path), or a preset name.
    #[arg(long, default_value = "complex-gaussian")]
    law: String,
    /// Evaluate at this dimension instead of printing only the rational
    /// function.
    #[arg(long)]
    at: Option<u64>,
    /// Print the large-N limit.
    #[arg(long)]
    limit: bool,
    #[arg(long, default_value_t = DEFAULT_VERTEX_CAP)]
    cap: usize,
}

#[derive(Args)]
struct OracleCovArgs {
    p: String,
    q: String,
    #[arg(long, default_value = "complex-gaussian")]
    law: String,
    #[arg(long)]
    at: Option<u64>,
    #[arg(long)]
    limit: bool,
    #[arg(long, default_value_t = DEFAULT_VERTEX_CAP)]
    cap: usize,
}

#[derive(Args)]
struct McArgs {
    /// Ensemble specification (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Expressions to average.
    exprs: Vec<String>,
    /// Covariance pairs `i:j` indexing the expression list.
    #[arg(long)]
    pair: Vec<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suites to run (names or numbers); "all" runs everything.
    suites: Vec<String>,
}

fn main() {
    let code = match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    };
    std::process::exit(code);
}

fn run() -> Result<i32> {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("building the worker pool")?;
    }
    let alphabet = match &cli.alphabet {
        Some(path) => {
            let doc: AlphabetDoc = serde_json::from_str(
                &std::fs::read_to_string(path).context("reading alphabet")?,
            )?;
            doc.build()
        }
        None => Alphabet::permissive(),
    };

    let mut output = String::new();
    let code = dispatch(&cli, &alphabet, &mut output)?;
    match &cli.out {
        Some(path) => std::fs::write(path, output).context("writing output")?,
        None => print!("{output}"),
    }
    Ok(code)
}

fn parse_expr(text: &str, alphabet: &Alphabet) -> Result<deltadist::DeltaPolynomial> {
    parse_polynomial(text, alphabet).map_err(|e| anyhow!("{e}"))
}

fn law_set(name_or_path: &str, cap: usize) -> Result<deltadist::graph::moments::LawSet> {
    let law = if name_or_path.ends_with(".json") {
        let doc: LawDoc = serde_json::from_str(&std::fs::read_to_string(name_or_path)?)?;
        doc.build()?
    } else {
        deltadist::graph::law::WignerEntryLaw::preset(name_or_path, cap.max(12))
            .map_err(|e| anyhow!("{e}"))?
    };
    Ok(deltadist::graph::moments::LawSet::uniform(law))
}

fn scalar_json(v: &Scalar) -> serde_json::Value {
    let c = v.to_complex_f64();
    serde_json::json!({
        "exact": v.is_exact().then(|| v.to_string()),
        "re": c.re,
        "im": c.im,
    })
}

fn dispatch(cli: &Cli, alphabet: &Alphabet, out: &mut String) -> Result<i32> {
    use std::fmt::Write;
    match &cli.command {
        Command::Normalize { exprs } => {
            if exprs.is_empty() {
                bail!("no expressions given");
            }
            for text in exprs {
                let p = parse_expr(text, alphabet)?;
                writeln!(out, "{}", render_polynomial(&p))?;
                for (m, _) in p.terms() {
                    let sigma = m.sigma();
                    let ground = sigma
                        .ground_block()
                        .map(|b| format!("{b:?}"))
                        .unwrap_or_else(|| "none".to_string());
                    writeln!(
                        out,
                        "  {}: blocks {:?} ground {}",
                        render_monomial(m),
                        sigma.blocks,
                        ground
                    )?;
                }
            }
            Ok(0)
        }
        Command::Phi1(args) => {
            if args.exprs.is_empty() {
                bail!("no expressions given");
            }
            let state = match &args.state {
                Some(path) => {
                    let doc: FirstOrderDoc =
                        serde_json::from_str(&std::fs::read_to_string(path)?)?;
                    doc.build(alphabet)?
                }
                None => deltadist::first_order::FirstOrderState::new(),
            };
            let mut ev = Evaluator::new(&state);
            let cache = memo_cache_path(&state);
            if let Some(path) = &cache {
                load_memo(&mut ev, path, alphabet);
            }
            let mut rows = Vec::new();
            for text in &args.exprs {
                let p = parse_expr(text, alphabet)?;
                let v = ev.eval(&p).map_err(|e| anyhow!("{e}"))?;
                rows.push(serde_json::json!({ "expr": text, "value": scalar_json(&v) }));
            }
            if let Some(path) = &cache {
                save_memo(&ev, path);
            }
            writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?;
            Ok(0)
        }
        Command::Phi2(args) => {
            let state = match &args.state {
                Some(path) => {
                    let doc: SecondOrderDoc =
                        serde_json::from_str(&std::fs::read_to_string(path)?)?;
                    doc.build(alphabet)?
                }
                None => deltadist::second_order::SecondOrderState::new(
                    deltadist::first_order::FirstOrderState::new(),
                )
                .with_laws(law_set(&args.law, DEFAULT_VERTEX_CAP)?),
            };
            let p = parse_expr(&args.p, alphabet)?;
            let q = parse_expr(&args.q, alphabet)?;
            let mut engine = SecondOrderEngine::new(&state);
            let v = engine.eval_phi2(&p, &q).map_err(|e| anyhow!("{e}"))?;
            writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&serde_json::json!({
                    "p": args.p, "q": args.q, "value": scalar_json(&v),
                }))?
            )?;
            Ok(0)
        }
        Command::OracleMoment(args) => {
            if args.exprs.is_empty() {
                bail!("no expressions given");
            }
            let laws = law_set(&args.law, args.cap)?;
            let mut rows = Vec::new();
            for text in &args.exprs {
                let p = parse_expr(text, alphabet)?;
                let mut value = serde_json::Map::new();
                value.insert("expr".into(), text.clone().into());
                let mut total = deltadist::ratfn::RationalInN::zero();
                for (m, c) in p.terms() {
                    let r = if m.is_empty() {
                        deltadist::ratfn::RationalInN::one()
                    } else {
                        exact_moment(m, &laws, args.cap).map_err(|e| anyhow!("{e}"))?
                    };
                    let coeff = c
                        .as_exact()
                        .ok_or_else(|| anyhow!("oracle requires exact coefficients"))?;
                    total = total.add(&r.scale(coeff));
                }
                value.insert("rational".into(), total.to_string().into());
                if let Some(n) = args.at {
                    let v = total.eval_at(n).map_err(|e| anyhow!("{e}"))?;
                    value.insert(
                        "at".into(),
                        serde_json::json!({"n": n, "value": scalar_json(&v)}),
                    );
                }
                if args.limit {
                    let v = total.limit().map_err(|e| anyhow!("{e}"))?;
                    value.insert("limit".into(), scalar_json(&v));
                }
                rows.push(serde_json::Value::Object(value));
            }
            writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?;
            Ok(0)
        }
        Command::OracleCov(args) => {
            let laws = law_set(&args.law, args.cap)?;
            let p = parse_expr(&args.p, alphabet)?;
            let q = parse_expr(&args.q, alphabet)?;
            let mut total = deltadist::ratfn::RationalInN::zero();
            for (m1, c1) in p.terms() {
                for (m2, c2) in q.terms() {
                    let r = exact_covariance(m1, m2, &laws, args.cap)
                        .map_err(|e| anyhow!("{e}"))?;
                    let coeff = (c1.clone() * c2.clone())
                        .as_exact()
                        .cloned()
                        .ok_or_else(|| anyhow!("oracle requires exact coefficients"))?;
                    total = total.add(&r.scale(&coeff));
                }
            }
            let mut value = serde_json::Map::new();
            value.insert("p".into(), args.p.clone().into());
            value.insert("q".into(), args.q.clone().into());
            value.insert("rational".into(), total.to_string().into());
            if let Some(n) = args.at {
                let v = total.eval_at(n).map_err(|e| anyhow!("{e}"))?;
                value.insert(
                    "at".into(),
                    serde_json::json!({"n": n, "value": scalar_json(&v)}),
                );
            }
            if args.limit {
                let v = total.limit().map_err(|e| anyhow!("{e}"))?;
                value.insert("limit".into(), scalar_json(&v));
            }
            writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&serde_json::Value::Object(value))?
            )?;
            Ok(0)
        }
        Command::Mc(args) => {
            let doc: EnsembleDoc = serde_json::from_str(&std::fs::read_to_string(&args.spec)?)?;
            let mut spec = doc.build()?;
            if cli.seed != 0 {
                spec.master_seed = cli.seed;
            }
            if args.exprs.is_empty() {
                bail!("no expressions given");
            }
            let mut exprs = Vec::new();
            for text in &args.exprs {
                exprs.push((text.clone(), parse_expr(text, alphabet)?));
            }
            let mut pairs = Vec::new();
            for pair in &args.pair {
                let (i, j) = pair
                    .split_once(':')
                    .ok_or_else(|| anyhow!("pair must be i:j"))?;
                pairs.push((i.parse::<usize>()?, j.parse::<usize>()?));
            }
            let report =
                deltadist::mc::estimate(&spec, &exprs, &pairs).map_err(|e| anyhow!("{e}"))?;
            match cli.format {
                Format::Json => {
                    writeln!(out, "{}", serde_json::to_string_pretty(&report_doc(&report))?)?
                }
                Format::Csv => out.push_str(&report_csv(&report)),
            }
            Ok(0)
        }
        Command::Verify(args) => {
            if args.suites.is_empty() {
                bail!("no suites selected; use \"all\" or names like sd-vs-oracle");
            }
            let ids: Vec<usize> = if args.suites.len() == 1 && args.suites[0] == "all" {
                verify::SUITES.iter().map(|(id, _)| *id).collect()
            } else {
                let mut ids = Vec::new();
                for name in &args.suites {
                    let id = name
                        .parse::<usize>()
                        .ok()
                        .filter(|id| verify::SUITES.iter().any(|(i, _)| i == id))
                        .or_else(|| verify::suite_id(name))
                        .ok_or_else(|| anyhow!("unknown suite {name:?}"))?;
                    ids.push(id);
                }
                ids
            };
            let mut all_passed = true;
            let mut rows = Vec::new();
            for id in ids {
                let report = verify::run(id);
                eprintln!("{}", report.line());
                for d in &report.details {
                    eprintln!("  {d}");
                }
                all_passed &= report.passed;
                rows.push(serde_json::json!({
                    "id": report.id,
                    "name": report.name,
                    "passed": report.passed,
                    "seconds": report.seconds,
                    "details": report.details,
                }));
            }
            writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?;
            Ok(if all_passed { 0 } else { 1 })
        }
    }
}

/// Optional persistent memo for first-order values, keyed by the state
/// fingerprint under `DM_CACHE_DIR`.
fn memo_cache_path(state: &deltadist::first_order::FirstOrderState) -> Option<PathBuf> {
    let dir = std::env::var_os("DM_CACHE_DIR")?;
    let dir = PathBuf::from(dir);
    std::fs::create_dir_all(&dir).ok()?;
    Some(dir.join(format!("phi1-{:016x}.json", state.fingerprint())))
}

fn load_memo(ev: &mut Evaluator, path: &PathBuf, alphabet: &Alphabet) {
    let Ok(text) = std::fs::read_to_string(path) else { return };
    let Ok(entries) = serde_json::from_str::<Vec<(String, String)>>(&text) else { return };
    let mut loaded = Vec::new();
    for (expr, value) in entries {
        let (Ok(p), Some(v)) = (
            parse_polynomial(&expr, alphabet),
            deltadist::scalar::parse_scalar(&value),
        ) else {
            continue;
        };
        if let Some(m) = p.as_single_monomial() {
            loaded.push((m.clone(), v));
        }
    }
    ev.preload(loaded);
}

fn save_memo(ev: &Evaluator, path: &PathBuf) {
    let entries: Vec<(String, String)> = ev
        .memo_entries()
        .filter(|(_, v)| v.is_exact())
        .map(|(m, v)| (render_monomial(m), v.to_string()))
        .collect();
    if let Ok(text) = serde_json::to_string(&entries) {
        let _ = std::fs::write(path, text);
    }
}

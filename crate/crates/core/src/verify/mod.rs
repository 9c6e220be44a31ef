//! Verification suites wiring the engines against each other: the
//! symbolic evaluators against the exact partition oracle, and both
//! against the Monte-Carlo sampler. Every tolerance is pinned here.

pub mod corpus;
mod montecarlo;
mod symbolic;

use std::time::Instant;

#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub seconds: f64,
    pub details: Vec<String>,
}

impl CriterionReport {
    pub fn line(&self) -> String {
        format!(
            "{} criterion {:2} ({}) [{:.1}s]",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds
        )
    }
}

pub const SUITES: &[(usize, &str)] = &[
    (1, "semicircle"),
    (2, "bracket-moment"),
    (3, "sd-vs-oracle"),
    (4, "limit-classification"),
    (5, "second-order-vs-oracle"),
    (6, "collinearity"),
    (7, "orthogonality"),
    (8, "two-family-covariance"),
    (9, "h5"),
    (10, "mixed-mc"),
    (11, "fluctuations"),
];

pub fn suite_id(name: &str) -> Option<usize> {
    SUITES
        .iter()
        .find(|(_, n)| *n == name)
        .map(|(id, _)| *id)
}

/// Wall-clock budgets (seconds) that are part of the criterion.
fn runtime_budget(id: usize) -> Option<f64> {
    match id {
        1 => Some(60.0),
        3 => Some(600.0),
        10 => Some(900.0),
        _ => None,
    }
}

pub fn run(id: usize) -> CriterionReport {
    let name = SUITES
        .iter()
        .find(|(i, _)| *i == id)
        .map(|(_, n)| *n)
        .unwrap_or("unknown");
    let start = Instant::now();
    let (mut passed, mut details) = match id {
        1 => montecarlo::semicircle(),
        2 => symbolic::bracket_moment(),
        3 => symbolic::sd_vs_oracle(),
        4 => symbolic::limit_classification(),
        5 => symbolic::second_order_vs_oracle(),
        6 => symbolic::collinearity(),
        7 => montecarlo::orthogonality(),
        8 => symbolic::two_family_covariance(),
        9 => montecarlo::h5_suite(),
        10 => montecarlo::mixed_mc(),
        11 => montecarlo::fluctuations(),
        _ => (false, vec![format!("unknown criterion {id}")]),
    };
    let seconds = start.elapsed().as_secs_f64();
    if let Some(budget) = runtime_budget(id) {
        if seconds <= budget {
            details.push(format!("ok: runtime {seconds:.1}s within {budget:.0}s"));
        } else {
            passed = false;
            details.push(format!("FAILED: runtime {seconds:.1}s exceeds {budget:.0}s"));
        }
    }
    CriterionReport { id, name, passed, seconds, details }
}

pub fn run_all() -> Vec<CriterionReport> {
    SUITES.iter().map(|(id, _)| run(*id)).collect()
}

/// Pass/fail accumulator for suite bodies.
pub(crate) struct Check {
    pub passed: bool,
    pub details: Vec<String>,
}

impl Check {
    pub fn new() -> Self {
        Check { passed: true, details: Vec::new() }
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.details.push(text.into());
    }

    pub fn require(&mut self, ok: bool, text: impl Into<String>) {
        let text = text.into();
        if ok {
            self.details.push(format!("ok: {text}"));
        } else {
            self.passed = false;
            self.details.push(format!("FAILED: {text}"));
        }
    }

    pub fn finish(self) -> (bool, Vec<String>) {
        (self.passed, self.details)
    }
}

/// Deterministic splitmix stream for randomized suite inputs.
pub(crate) struct SuiteRng(u64);

impl SuiteRng {
    pub fn new(seed: u64) -> Self {
        SuiteRng(seed ^ 0x9e3779b97f4a7c15)
    }

    pub fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next() % n
    }
}

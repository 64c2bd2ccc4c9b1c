//! Measurement harness over the exploding family.

use std::fmt::Write;
use std::time::Duration;

use serde::Serialize;

use crate::families::FamilySpec;
use crate::metrics::RunMetrics;
use crate::oracle::{normalize, Mode, Policy, RuleKind};
use crate::sesame;
use crate::term::Term;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Engine {
    Sesame,
    Oracle,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub spec: String,
    pub initial_size: usize,
    pub principal_total: u64,
    pub search_total: u64,
    pub multiplicative_total: u64,
    pub exponential_total: u64,
    pub counts: Vec<(String, u64)>,
    /// Median over the repetitions.
    pub elapsed: Duration,
    pub overhead_ratio: f64,
    /// Zero multiplicative steps and only exponential tags, where that is
    /// expected of the family.
    pub family_facts_hold: bool,
    #[serde(skip)]
    pub result: Term,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchFailure {
    pub spec: String,
    pub error: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BenchReport {
    pub engine: Option<Engine>,
    pub rows: Vec<BenchRow>,
    pub failures: Vec<BenchFailure>,
}

/// Elapsed nanoseconds per unit of `|t|·(|r|_pr + 1)`.
pub fn overhead_ratio(elapsed: Duration, initial_size: usize, principal_total: u64) -> f64 {
    elapsed.as_nanos() as f64 / (initial_size as f64 * (principal_total as f64 + 1.0))
}

/// Room for `2^n` steps and then some.
pub fn step_limit_for(spec: FamilySpec) -> usize {
    let exp = |n: u32| 1usize.checked_shl(n.min(40)).unwrap_or(usize::MAX);
    let base = match spec {
        FamilySpec::Pi(_) => 1,
        FamilySpec::Delta(n) | FamilySpec::Sigma(n) => exp(n + 1),
        FamilySpec::CutPi(k, h) => (k as usize) * (h as usize),
    };
    base.saturating_mul(64).saturating_add(10_000)
}

fn median(mut xs: Vec<Duration>) -> Duration {
    xs.sort();
    xs[xs.len() / 2]
}

fn run_once(spec: FamilySpec, engine: Engine) -> Result<(RunMetrics, Term), String> {
    let t = spec.generate();
    let limit = step_limit_for(spec);
    match engine {
        Engine::Sesame => {
            let r = sesame::run(&t, limit).map_err(|e| e.to_string())?;
            let result = r.result();
            Ok((r.state.metrics, result))
        }
        Engine::Oracle => {
            let start = std::time::Instant::now();
            let n = normalize(&t, Mode::GoodNonErasing, Policy::Leftmost, limit).map_err(|e| e.to_string())?;
            let mut m = RunMetrics::new(t.size());
            m.elapsed = start.elapsed();
            Ok((oracle_metrics(m, &n.steps.iter().map(|r| r.kind).collect::<Vec<_>>()), sesame::gc(&n.term)))
        }
    }
}

/// Oracle steps reported in the same shape as machine metrics; there are no
/// search steps.
fn oracle_metrics(mut m: RunMetrics, steps: &[RuleKind]) -> RunMetrics {
    use crate::metrics::Transition;
    for k in steps {
        let t = Transition::ALL.iter().find(|t| t.rule() == Some(*k)).copied();
        if let Some(t) = t {
            m.record(t);
        }
    }
    m
}

fn facts_hold(spec: FamilySpec, m: &RunMetrics) -> bool {
    match spec {
        FamilySpec::Sigma(n) => m.multiplicative_total() == 0 && m.exponential_total() >= 1u64 << n.min(63),
        FamilySpec::Delta(_) | FamilySpec::CutPi(..) | FamilySpec::Pi(_) => m.multiplicative_total() == 0,
    }
}

/// Runs each spec `repetitions` times (at least once) and keeps the median
/// time. Rows come back sorted by spec.
pub fn bench(specs: &[FamilySpec], engine: Engine, repetitions: usize) -> BenchReport {
    let mut specs = specs.to_vec();
    specs.sort();
    let mut report = BenchReport { engine: Some(engine), ..BenchReport::default() };
    for spec in specs {
        let mut times = Vec::new();
        let mut last = None;
        let mut failed = None;
        for _ in 0..repetitions.max(1) {
            match run_once(spec, engine) {
                Ok((m, result)) => {
                    times.push(m.elapsed);
                    last = Some((m, result));
                }
                Err(e) => {
                    failed = Some(e);
                    break;
                }
            }
        }
        if let Some(error) = failed {
            report.failures.push(BenchFailure { spec: spec.to_string(), error });
            continue;
        }
        let (m, result) = last.expect("at least one repetition");
        let elapsed = median(times);
        report.rows.push(BenchRow {
            spec: spec.to_string(),
            initial_size: m.initial_size,
            principal_total: m.principal_total(),
            search_total: m.search_total(),
            multiplicative_total: m.multiplicative_total(),
            exponential_total: m.exponential_total(),
            counts: m.nonzero().map(|(t, n)| (t.tag().to_string(), n)).collect(),
            elapsed,
            overhead_ratio: overhead_ratio(elapsed, m.initial_size, m.principal_total()),
            family_facts_hold: facts_hold(spec, &m),
            result,
        });
    }
    report
}

impl BenchReport {
    /// max/min of the overhead ratios, if there are at least two rows.
    pub fn ratio_spread(&self) -> Option<f64> {
        if self.rows.len() < 2 {
            return None;
        }
        let ratios = self.rows.iter().map(|r| r.overhead_ratio);
        let max = ratios.clone().fold(f64::MIN, f64::max);
        let min = ratios.fold(f64::MAX, f64::min);
        (min > 0.0).then(|| max / min)
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<12} {:>6} {:>10} {:>10} {:>6} {:>10} {:>12} {:>10}  facts",
            "spec", "size", "principal", "search", "mult", "exp", "elapsed_us", "ratio_ns"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:<12} {:>6} {:>10} {:>10} {:>6} {:>10} {:>12.1} {:>10.3}  {}",
                r.spec,
                r.initial_size,
                r.principal_total,
                r.search_total,
                r.multiplicative_total,
                r.exponential_total,
                r.elapsed.as_secs_f64() * 1e6,
                r.overhead_ratio,
                if r.family_facts_hold { "ok" } else { "FAIL" }
            );
        }
        for f in &self.failures {
            let _ = writeln!(out, "{:<12} error: {}", f.spec, f.error);
        }
        if let Some(s) = self.ratio_spread() {
            let _ = writeln!(out, "ratio spread (max/min): {s:.2}");
        }
        out
    }

    /// One `key=value` record per row.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let _ = write!(
                out,
                "spec={} size={} principal={} search={} multiplicative={} exponential={} elapsed_ns={} ratio={:.6} facts={}",
                r.spec,
                r.initial_size,
                r.principal_total,
                r.search_total,
                r.multiplicative_total,
                r.exponential_total,
                r.elapsed.as_nanos(),
                r.overhead_ratio,
                r.family_facts_hold
            );
            for (tag, n) in &r.counts {
                let _ = write!(out, " {tag}={n}");
            }
            out.push('\n');
        }
        for f in &self.failures {
            let _ = writeln!(out, "spec={} error={:?}", f.spec, f.error);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::pi;
    use crate::names::alpha_eq;
    use crate::syntax::parse;

    #[test]
    fn sigma_three_uses_no_multiplicative_step() {
        let report = bench(&[FamilySpec::Sigma(3)], Engine::Sesame, 1);
        let row = &report.rows[0];
        assert_eq!(row.multiplicative_total, 0);
        assert!(row.exponential_total >= 8);
        assert!(row.family_facts_hold);
        assert!(alpha_eq(&row.result, &parse("!\\m1m1").unwrap()));
    }

    #[test]
    fn cut_pi_multiplies() {
        for engine in [Engine::Sesame, Engine::Oracle] {
            let report = bench(&[FamilySpec::CutPi(3, 4)], engine, 1);
            assert!(alpha_eq(&report.rows[0].result, &pi(12)), "{engine:?}");
        }
    }

    #[test]
    fn engines_agree_on_principal_counts() {
        let specs = [FamilySpec::Sigma(2), FamilySpec::Delta(3), FamilySpec::CutPi(2, 3)];
        let a = bench(&specs, Engine::Sesame, 1);
        let b = bench(&specs, Engine::Oracle, 1);
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.principal_total, y.principal_total, "{}", x.spec);
            assert!(alpha_eq(&x.result, &y.result));
        }
    }

    #[test]
    fn rows_are_sorted_and_printed() {
        let report = bench(&[FamilySpec::Sigma(2), FamilySpec::Sigma(1)], Engine::Sesame, 3);
        assert_eq!(report.rows[0].spec, "sigma:1");
        assert!(report.to_table().contains("sigma:2"));
        assert_eq!(report.to_lines().lines().count(), 2);
        assert!(report.ratio_spread().is_some());
    }

    #[test]
    fn sigma_doubles() {
        let specs: Vec<FamilySpec> = (4..=10).map(FamilySpec::Sigma).collect();
        let report = bench(&specs, Engine::Sesame, 1);
        for pair in report.rows.windows(2) {
            let ratio = pair[1].principal_total as f64 / pair[0].principal_total as f64;
            assert!((1.8..=2.2).contains(&ratio), "{} -> {}: {ratio}", pair[0].spec, pair[1].spec);
        }
        for (row, n) in report.rows.iter().zip(4..) {
            assert!(row.principal_total >= 1 << n);
        }
    }

    #[test]
    fn sigma_one_on_the_oracle() {
        let row = &bench(&[FamilySpec::Sigma(1)], Engine::Oracle, 1).rows[0];
        assert_eq!(row.principal_total, 3);
        assert!(alpha_eq(&row.result, &parse("!\\m1m1").unwrap()));
    }

    #[test]
    fn ratio_formula() {
        assert_eq!(overhead_ratio(Duration::from_nanos(100), 5, 3), 5.0);
    }
}

//! Acceptance suite: one PASS/FAIL line per criterion. Runs as a plain
//! binary so that the verdict lines always reach the output.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use sesame_core::bam;
use sesame_core::bench::{bench, Engine};
use sesame_core::cli::{run_source, RunConfig};
use sesame_core::corpus::{for_each_term_with_cut, CorpusConfig, RandomTerms, Universe};
use sesame_core::families::{cut_pi, pi, sigma, FamilySpec};
use sesame_core::inspect::{find_clash, is_answer};
use sesame_core::metrics::{RunMetrics, Transition};
use sesame_core::names::{alpha_eq, ensure_well_bound, NameSource};
use sesame_core::oracle::{
    apply_redex, basic_redexes, check_diamond, good_redexes, normalize, step, Mode, Policy, Redex, RuleKind,
};
use sesame_core::sesame::{self, Sesame};
use sesame_core::syntax::parse;
use sesame_core::term::Term;
use sesame_core::typing::is_typable;

const EXAMPLE: &str = "[!\\m1m1-e1][e1?m2][e1?m3][m2>m3,m4]m4";
const GOLDEN: &str = include_str!("golden/running_example.txt");

const CORPUS_SEED: u64 = 0x005E_5A3E;
const CORPUS_SIZE: usize = 1000;
const MAX_TERM_SIZE: usize = 30;
const BAM_SEED: u64 = 0xBA3;
const BAM_CORPUS_SIZE: usize = 500;
const STEP_LIMIT: usize = 1_000_000;

const GOLDEN_RUNTIME: Duration = Duration::from_millis(1);
const DIFFERENTIAL_BUDGET: Duration = Duration::from_secs(60);
const DIAMOND_BUDGET: Duration = Duration::from_secs(300);
/// Largest enumerated size per universe.
const DIAMOND_CLOSED_MAX: usize = 10;
const DIAMOND_OPEN_MAX: usize = 8;
const OVERHEAD_SPREAD: f64 = 5.0;

/// σ_n step counts of the oracle's non-erasing good normalization:
/// (n, `!` steps, `axe1` steps, `axe2` steps). Rows up to `LIVE_ORACLE_MAX`
/// are re-derived on every run; the larger ones took minutes on the tree
/// oracle and stay pinned.
const SIGMA_COUNTS: [(u32, u64, u64, u64); 10] = [
    (1, 2, 1, 0),
    (2, 6, 2, 0),
    (3, 14, 3, 0),
    (4, 30, 4, 0),
    (5, 62, 5, 0),
    (6, 126, 6, 0),
    (7, 254, 7, 0),
    (8, 510, 8, 0),
    (9, 1022, 9, 0),
    (10, 2046, 10, 0),
];
const LIVE_ORACLE_MAX: u32 = 7;

struct Verdict {
    criterion: u8,
    pass: bool,
    soft: bool,
    detail: String,
}

/// Runs `f` on a thread with a large stack.
fn big_stack<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    std::thread::Builder::new().stack_size(512 << 20).spawn(f).expect("spawn").join().expect("criterion panicked")
}

/// Renames `m`/`e` indices in order of first appearance, per sort.
fn normalize_indices(text: &str) -> String {
    let mut maps: HashMap<char, HashMap<String, usize>> = HashMap::new();
    let mut out = String::new();
    for line in text.lines() {
        let split = if line.starts_with("->") || line.starts_with("       ") {
            7
        } else {
            line.find(": ").map_or(0, |i| i + 2)
        };
        let (head, body) = line.split_at(split.min(line.len()));
        out.push_str(head);
        let chars: Vec<char> = body.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let mut j = i + 1;
            while j < chars.len() && chars[j].is_ascii_digit() {
                j += 1;
            }
            if (c == 'm' || c == 'e') && j > i + 1 {
                let digits: String = chars[i + 1..j].iter().collect();
                let map = maps.entry(c).or_default();
                let next = map.len() + 1;
                let k = *map.entry(digits).or_insert(next);
                let _ = write!(out, "{c}{k}");
                i = j;
            } else {
                out.push(c);
                i += 1;
            }
        }
        out.push('\n');
    }
    out
}

fn bounds_hold(m: &RunMetrics) -> bool {
    m.search_bound_holds() && m.subterm_bound_holds()
}

/// Tracks criterion 5 across every machine run of criteria 1 to 4.
#[derive(Default)]
struct BoundLedger {
    runs: usize,
    violations: Vec<String>,
}

impl BoundLedger {
    fn record(&mut self, label: &str, m: &RunMetrics) {
        self.runs += 1;
        if !bounds_hold(m) {
            self.violations.push(format!(
                "{label}: search {} vs {}·({}+1), copy {} vs {}",
                m.search_total(),
                m.initial_size,
                m.principal_total(),
                m.max_copied_value_size,
                m.initial_size
            ));
        }
    }
}

fn criterion_1(bounds: &mut BoundLedger) -> Verdict {
    let cfg = RunConfig { trace: true, ..RunConfig::default() };
    let (mut out, mut err) = (Vec::new(), Vec::new());
    run_source(&cfg, EXAMPLE, &mut out, &mut err).expect("in-memory io");
    let printed = String::from_utf8(out).expect("utf-8");
    let transcript: String = printed.lines().filter(|l| !l.starts_with("Metrics:")).map(|l| format!("{l}\n")).collect();
    let trace_ok = normalize_indices(&transcript) == normalize_indices(GOLDEN);

    let t = parse(EXAMPLE).expect("example parses");
    let run = sesame::run(&t, 100).expect("example runs");
    use Transition::*;
    let tags_ok = run.transitions == [Sea1, Bang, Sea1, Bang, Sea1, Lolli, Sea1, Sea1, AxM1, AxM1, AxM1, Sea4, Sea6];
    let readback_ok = alpha_eq(&run.readback(), &parse("[!\\m1m1-e1]\\m6m6").expect("literal"));
    let gc_ok = alpha_eq(&run.result(), &parse("\\m6m6").expect("literal"));
    bounds.record("running example", run.metrics());

    let mut times: Vec<Duration> = (0..11)
        .map(|_| {
            let start = Instant::now();
            let r = sesame::run(&t, 100).expect("example runs");
            std::hint::black_box(r.result());
            start.elapsed()
        })
        .collect();
    times.sort();
    let median = times[times.len() / 2];
    let fast = median < GOLDEN_RUNTIME;
    Verdict {
        criterion: 1,
        pass: trace_ok && tags_ok && readback_ok && gc_ok && fast,
        soft: false,
        detail: format!(
            "golden trace {}, 13 tags {}, read-back {}, gc {}, median runtime {:?} (< {:?})",
            ok(trace_ok),
            ok(tags_ok),
            ok(readback_ok),
            ok(gc_ok),
            median,
            GOLDEN_RUNTIME
        ),
    }
}

fn ok(b: bool) -> &'static str {
    if b {
        "ok"
    } else {
        "MISMATCH"
    }
}

fn oracle_counts(n: &sesame_core::oracle::Normalization) -> (u64, u64, u64) {
    (n.count(RuleKind::Bang) as u64, n.count(RuleKind::AxE1) as u64, n.count(RuleKind::AxE2) as u64)
}

fn criterion_2(bounds: &mut BoundLedger) -> Verdict {
    let mut problems = Vec::new();
    let bang_lm = parse("!\\m1m1").expect("literal");
    for (n, bang, axe1, axe2) in SIGMA_COUNTS {
        let t = sigma(n);
        if n <= LIVE_ORACLE_MAX {
            match normalize(&t, Mode::GoodNonErasing, Policy::Leftmost, STEP_LIMIT) {
                Ok(o) if oracle_counts(&o) == (bang, axe1, axe2) && o.multiplicative_steps() == 0 => {}
                Ok(o) => problems.push(format!("σ_{n}: oracle counts {:?} differ from pinned", oracle_counts(&o))),
                Err(e) => problems.push(format!("σ_{n}: oracle {e}")),
            }
        }
        let run = match sesame::run(&t, STEP_LIMIT) {
            Ok(r) => r,
            Err(e) => {
                problems.push(format!("σ_{n}: {e}"));
                continue;
            }
        };
        let m = run.metrics();
        bounds.record(&format!("σ_{n}"), m);
        let mult = m.count(Transition::AxM1)
            + m.count(Transition::AxM2)
            + m.count(Transition::AxM2Unpair)
            + m.count(Transition::Lolli)
            + m.count(Transition::Tensor);
        if mult != 0 {
            problems.push(format!("σ_{n}: {mult} multiplicative transitions"));
        }
        if m.exponential_total() < 1 << n {
            problems.push(format!("σ_{n}: {} exponential transitions < 2^{n}", m.exponential_total()));
        }
        let got = (m.count(Transition::Bang), m.count(Transition::AxE1), m.count(Transition::AxE2));
        if got != (bang, axe1, axe2) {
            problems.push(format!("σ_{n}: machine counts {got:?} != pinned {:?}", (bang, axe1, axe2)));
        }
        if !alpha_eq(&run.result(), &bang_lm) {
            problems.push(format!("σ_{n}: result {}", run.result()));
        }
    }
    let cp = cut_pi(3, 4);
    match sesame::run(&cp, STEP_LIMIT) {
        Ok(r) => {
            bounds.record("cutpi:3,4", r.metrics());
            if !alpha_eq(&r.result(), &pi(12)) {
                problems.push(format!("[!π_3−f]π_4 gave {}", r.result()));
            }
        }
        Err(e) => problems.push(format!("[!π_3−f]π_4: {e}")),
    }
    Verdict {
        criterion: 2,
        pass: problems.is_empty(),
        soft: false,
        detail: if problems.is_empty() {
            format!(
                "σ_1..σ_10 exponential only, counts match the oracle table ({} live), results !λm.m; cutpi:3,4 gives π_12",
                LIVE_ORACLE_MAX
            )
        } else {
            problems.join("; ")
        },
    }
}

fn corpus(seed: u64, config: CorpusConfig, count: usize) -> Vec<Term> {
    let mut g = RandomTerms::new(seed, config);
    (0..count).map(|_| g.typable()).collect()
}

fn criterion_3(corpus: &[Term], bounds: &mut BoundLedger) -> Verdict {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    let mut steps = 0u64;
    for t in corpus {
        let run = match sesame::run(t, STEP_LIMIT) {
            Ok(r) => r,
            Err(e) => {
                mismatches.push(format!("{t}: machine {e}"));
                continue;
            }
        };
        bounds.record("differential", run.metrics());
        let full = match normalize(t, Mode::GoodFull, Policy::Leftmost, STEP_LIMIT) {
            Ok(n) => n,
            Err(e) => {
                mismatches.push(format!("{t}: oracle {e}"));
                continue;
            }
        };
        let non_erasing = full.steps.iter().filter(|r| !r.kind.is_erasing()).count() as u64;
        steps += non_erasing;
        if !alpha_eq(&run.result(), &full.term) {
            mismatches.push(format!("{t}: machine {} vs oracle {}", run.result(), full.term));
        } else if run.metrics().principal_total() != non_erasing {
            mismatches
                .push(format!("{t}: {} principal vs {non_erasing} oracle steps", run.metrics().principal_total()));
        }
    }
    let elapsed = start.elapsed();
    let within = elapsed < DIFFERENTIAL_BUDGET;
    Verdict {
        criterion: 3,
        pass: mismatches.is_empty() && within && corpus.len() >= CORPUS_SIZE,
        soft: false,
        detail: format!(
            "{} typable terms of size <= {MAX_TERM_SIZE}, {steps} non-erasing steps, {} mismatches{}, {:.1?} (< {:?})",
            corpus.len(),
            mismatches.len(),
            mismatches.first().map(|m| format!(" (first: {m})")).unwrap_or_default(),
            elapsed,
            DIFFERENTIAL_BUDGET
        ),
    }
}

/// Whether `before → after` is a step of `kind` among `candidates`.
fn projects(before: &Term, after: &Term, kind: RuleKind, candidates: Vec<Redex>) -> bool {
    let mut names = NameSource::above(before).max_with(after);
    candidates
        .into_iter()
        .filter(|r| r.kind == kind)
        .any(|r| apply_redex(before, &r, &mut names).is_ok_and(|s| alpha_eq(&s, after)))
}

trait MaxWith {
    fn max_with(self, t: &Term) -> NameSource;
}

impl MaxWith for NameSource {
    fn max_with(self, t: &Term) -> NameSource {
        NameSource::starting_at(self.peek().max(t.max_index() + 1))
    }
}

/// Criteria 4 and the invariant half of 5 on one run.
struct ProjectionTally {
    principal: u64,
    search: u64,
    failures: Vec<String>,
    states: u64,
    dirty_states: Vec<String>,
}

fn criterion_4(corpus: &[Term], bounds: &mut BoundLedger) -> (Verdict, ProjectionTally) {
    let mut tally =
        ProjectionTally { principal: 0, search: 0, failures: Vec::new(), states: 0, dirty_states: Vec::new() };
    for t in corpus {
        let mut prev: Option<Term> = None;
        let mut local_fail: Option<String> = None;
        let mut dirty: Option<String> = None;
        let (mut principal, mut search, mut states) = (0u64, 0u64, 0u64);
        let mut watch = |e: sesame_core::metrics::TraceEvent, q: &Sesame| {
            let now = q.readback();
            states += 1;
            let report = q.check_invariants();
            if !report.is_clean() && dirty.is_none() {
                dirty = Some(format!("{t} after step {}: {report}", e.step));
            }
            if let (Some(before), Some(tr)) = (prev.as_ref(), e.transition) {
                match tr.rule() {
                    Some(kind) => {
                        principal += 1;
                        if !projects(before, &now, kind, good_redexes(before)) && local_fail.is_none() {
                            local_fail = Some(format!("{t}: {tr} step {} is not a good {kind} step", e.step));
                        }
                    }
                    None => {
                        search += 1;
                        if before != &now && local_fail.is_none() {
                            local_fail = Some(format!("{t}: {tr} step {} changed the read-back", e.step));
                        }
                    }
                }
            }
            prev = Some(now);
        };
        match sesame::run_with(t, STEP_LIMIT, Some(&mut watch)) {
            Ok(run) => bounds.record("projection", run.metrics()),
            Err(e) => tally.failures.push(format!("{t}: {e}")),
        }
        tally.principal += principal;
        tally.search += search;
        tally.states += states;
        tally.failures.extend(local_fail);
        tally.dirty_states.extend(dirty);
    }
    let v = Verdict {
        criterion: 4,
        pass: tally.failures.is_empty(),
        soft: false,
        detail: format!(
            "{} principal transitions projected onto good redexes, {} search transitions left the read-back unchanged, {} failures{}",
            tally.principal,
            tally.search,
            tally.failures.len(),
            tally.failures.first().map(|m| format!(" (first: {m})")).unwrap_or_default()
        ),
    };
    (v, tally)
}

fn criterion_5(bounds: &BoundLedger, tally: &ProjectionTally) -> Verdict {
    let clean = bounds.violations.is_empty() && tally.dirty_states.is_empty();
    Verdict {
        criterion: 5,
        pass: clean,
        soft: false,
        detail: format!(
            "search and sub-term bounds on {} runs: {} violations; invariants on {} states: {} dirty{}",
            bounds.runs,
            bounds.violations.len(),
            tally.states,
            tally.dirty_states.len(),
            bounds
                .violations
                .first()
                .or(tally.dirty_states.first())
                .map(|m| format!(" (first: {m})"))
                .unwrap_or_default()
        ),
    }
}

fn criterion_6() -> Verdict {
    let start = Instant::now();
    let universes = [
        (Universe::CLOSED, DIAMOND_CLOSED_MAX),
        (Universe { free_exponential: true, free_linear: false, tensor: true }, DIAMOND_OPEN_MAX),
        (Universe { free_exponential: true, free_linear: true, tensor: true }, DIAMOND_OPEN_MAX),
    ];
    let (mut terms, mut pairs, mut kind_mismatches) = (0u64, 0usize, 0usize);
    let mut failures = Vec::new();
    for (universe, max) in universes {
        for size in 1..=max {
            for_each_term_with_cut(size, universe, &|_| true, &mut |t| {
                if good_redexes(&t).len() < 2 || !is_typable(&t) {
                    return;
                }
                terms += 1;
                match check_diamond(&t) {
                    Ok(r) => {
                        pairs += r.pairs;
                        kind_mismatches += r.kind_mismatches;
                    }
                    Err(f) => failures.push(format!("{}: {} vs {}", f.term, f.left.kind, f.right.kind)),
                }
            });
        }
    }
    let elapsed = start.elapsed();
    Verdict {
        criterion: 6,
        pass: failures.is_empty() && elapsed < DIAMOND_BUDGET,
        soft: false,
        detail: format!(
            "closed terms up to size {DIAMOND_CLOSED_MAX}, open up to {DIAMOND_OPEN_MAX}: {terms} typable terms with two or more good redexes, {pairs} pairs joined ({kind_mismatches} with other step kinds), {} failures{}, {:.1?} (< {:?})",
            failures.len(),
            failures.first().map(|m| format!(" (first: {m})")).unwrap_or_default(),
            elapsed,
            DIAMOND_BUDGET
        ),
    }
}

fn criterion_7() -> Verdict {
    let terms = corpus(BAM_SEED, CorpusConfig { closed: true, ..CorpusConfig::default() }, BAM_CORPUS_SIZE);
    let mut failures = Vec::new();
    let mut principal = 0u64;
    for t in &terms {
        let mut prev: Option<Term> = None;
        let mut local: Option<String> = None;
        let mut watch = |e: sesame_core::metrics::TraceEvent, q: &bam::BamState| {
            let now = q.readback();
            if let (Some(before), Some(tr)) = (prev.as_ref(), e.transition) {
                match tr.rule() {
                    Some(kind) => {
                        principal += 1;
                        let basic: Vec<Redex> =
                            basic_redexes(before).into_iter().filter(|r| !r.kind.is_erasing()).collect();
                        if !projects(before, &now, kind, basic) && local.is_none() {
                            local = Some(format!("{t}: {tr} step {} is not a basic {kind} step", e.step));
                        }
                    }
                    None if before != &now && local.is_none() => {
                        local = Some(format!("{t}: search step {} changed the read-back", e.step));
                    }
                    None => {}
                }
            }
            prev = Some(now);
        };
        match bam::run_with(t, STEP_LIMIT, Some(&mut watch)) {
            Ok(run) => {
                let rb = run.state.readback();
                let normal = basic_redexes(&rb).iter().all(|r| r.kind.is_erasing());
                if !is_answer(&rb) || !normal {
                    failures.push(format!("{t}: halted on {rb}"));
                }
            }
            Err(e) => failures.push(format!("{t}: {e}")),
        }
        failures.extend(local);
    }
    Verdict {
        criterion: 7,
        pass: failures.is_empty() && terms.len() >= BAM_CORPUS_SIZE,
        soft: false,
        detail: format!(
            "{} closed typable terms halted on basic normal answers, {principal} principal transitions projected onto basic steps, {} failures{}",
            terms.len(),
            failures.len(),
            failures.first().map(|m| format!(" (first: {m})")).unwrap_or_default()
        ),
    }
}

/// Follows one reduction path and reports the first clash met.
fn clash_along(t: &Term, mode: Mode, seed: Option<u64>) -> Option<String> {
    let mut names = NameSource::above(t);
    let mut cur = ensure_well_bound(t, &mut names);
    let mut state = seed.unwrap_or(0);
    let mut pick = |n: usize| match seed {
        // a small LCG keeps the path reproducible without threading an rng
        Some(_) => {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 33) as usize % n
        }
        None => 0,
    };
    for _ in 0..STEP_LIMIT {
        if let Some(p) = find_clash(&cur) {
            return Some(format!("{t}: clash at {p} in {cur}"));
        }
        match step(&cur, mode, &mut pick, &mut names) {
            Some((next, _)) => cur = next,
            None => return None,
        }
    }
    None
}

fn criterion_8(random: &[Term]) -> Verdict {
    let mut checked = 0u64;
    let mut failures = Vec::new();
    let mut small = Vec::new();
    for size in 1..=7 {
        for universe in [Universe::CLOSED, Universe { free_exponential: true, free_linear: true, tensor: true }] {
            for_each_term_with_cut(size, universe, &|_| true, &mut |t| {
                if is_typable(&t) {
                    small.push(t)
                }
            });
        }
    }
    for (i, t) in random.iter().chain(small.iter()).enumerate() {
        checked += 1;
        for (mode, seed) in
            [(Mode::GoodFull, None), (Mode::GoodFull, Some(i as u64 + 1)), (Mode::BasicNonErasing, None)]
        {
            if let Some(f) = clash_along(t, mode, seed) {
                failures.push(f);
            }
        }
    }
    Verdict {
        criterion: 8,
        pass: failures.is_empty(),
        soft: false,
        detail: format!(
            "{checked} typable terms ({} random, {} enumerated up to size 7) reduced on three paths each: {} clashes{}",
            random.len(),
            small.len(),
            failures.len(),
            failures.first().map(|m| format!(" (first: {m})")).unwrap_or_default()
        ),
    }
}

fn criterion_9() -> Verdict {
    let specs: Vec<FamilySpec> = (4..=12).map(FamilySpec::Sigma).collect();
    let report = bench(&specs, Engine::Sesame, 3);
    let spread = report.ratio_spread();
    let pass = report.failures.is_empty() && spread.is_some_and(|s| s <= OVERHEAD_SPREAD);
    let ratios: Vec<String> = report.rows.iter().map(|r| format!("{}={:.2}", r.spec, r.overhead_ratio)).collect();
    Verdict {
        criterion: 9,
        pass,
        soft: true,
        detail: format!(
            "overhead ns/(|t|·(pr+1)) over σ_4..σ_12: spread {} (<= {OVERHEAD_SPREAD}) [{}]",
            spread.map_or("n/a".to_string(), |s| format!("{s:.2}")),
            ratios.join(" ")
        ),
    }
}

fn main() {
    // `cargo test` passes harness flags; a name filter that excludes us means skip
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return;
    }
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }

    let verdicts = big_stack(|| {
        let mut bounds = BoundLedger::default();
        let mut out = vec![criterion_1(&mut bounds), criterion_2(&mut bounds)];
        let random =
            corpus(CORPUS_SEED, CorpusConfig { max_size: MAX_TERM_SIZE, ..CorpusConfig::default() }, CORPUS_SIZE);
        out.push(criterion_3(&random, &mut bounds));
        let (v4, tally) = criterion_4(&random, &mut bounds);
        out.push(v4);
        out.push(criterion_5(&bounds, &tally));
        out.push(criterion_6());
        out.push(criterion_7());
        out.push(criterion_8(&random));
        out.push(criterion_9());
        out
    });

    let mut hard_failures = 0;
    for v in &verdicts {
        let tag = match (v.pass, v.soft) {
            (true, _) => "PASS",
            (false, true) => "WARN",
            (false, false) => "FAIL",
        };
        if !v.pass && !v.soft {
            hard_failures += 1;
        }
        println!("criterion {}: {tag} - {}", v.criterion, v.detail);
    }
    if hard_failures > 0 {
        eprintln!("{hard_failures} acceptance criteria failed");
        std::process::exit(1);
    }
}

//! Command-line front end: batch files, a REPL on standard input, the
//! exploding family and a startup self-test.

use std::fs;
use std::io::{self, BufRead, IsTerminal, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use serde_json::json;

use crate::bam::{self, BamError};
use crate::families::{pi, FamilySpec};
use crate::metrics::{Observer, RunMetrics, TraceEvent};
use crate::names::{alpha_eq, ensure_well_bound, NameSource};
use crate::oracle::{self, OracleError};
use crate::proper::check_proper;
use crate::sesame::{self, SesameError};
use crate::syntax::{parse, print, ParseError, Style, GRAMMAR};
use crate::term::Term;
use crate::typing::infer_type;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EngineMode {
    /// Strong machine followed by garbage collection.
    Sesame,
    /// Basic machine; closed terms only.
    Bam,
    /// Tree rewriting with the good strategy.
    #[value(alias = "oracle-good")]
    Good,
    /// Tree rewriting with basic non-erasing steps.
    #[value(alias = "oracle-basic")]
    Basic,
}

#[derive(Clone, Debug, Parser)]
#[command(name = "sesame", version, about = "Cut elimination for exponential substitution proof terms")]
pub struct Args {
    /// Evaluation engine.
    #[arg(long, value_enum, default_value_t = EngineMode::Sesame)]
    pub mode: EngineMode,
    /// Print every intermediate state.
    #[arg(long)]
    pub trace: bool,
    /// Skip the final garbage collection.
    #[arg(long)]
    pub no_gc: bool,
    /// Infer and print an IMELL type before running.
    #[arg(long = "type")]
    pub type_check: bool,
    /// Stop after this many transitions.
    #[arg(long, value_name = "N", default_value_t = 10_000_000)]
    pub max_steps: usize,
    /// Run a member of the exploding family, e.g. `sigma:3` or `cutpi:3,4`.
    #[arg(long, value_name = "NAME:PARAMS", conflicts_with = "files")]
    pub family: Option<FamilySpec>,
    /// Random redex choice for the tree engines; leftmost otherwise.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Emit JSON lines instead of text.
    #[arg(long)]
    pub json: bool,
    /// Run the built-in examples and exit.
    #[arg(long)]
    pub self_test: bool,
    /// Files with one term per line; standard input otherwise.
    pub files: Vec<PathBuf>,
}

/// Process exit statuses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok = 0,
    Failure = 1,
    Usage = 2,
    Syntax = 3,
    Improper = 4,
    Clash = 5,
    StepLimit = 6,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> ExitCode {
        ExitCode::from(s as u8)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub mode: EngineMode,
    pub trace: bool,
    pub gc: bool,
    pub type_check: bool,
    pub step_limit: usize,
    pub seed: Option<u64>,
    pub json: bool,
}

impl From<&Args> for RunConfig {
    fn from(a: &Args) -> RunConfig {
        RunConfig {
            mode: a.mode,
            trace: a.trace,
            gc: !a.no_gc,
            type_check: a.type_check,
            step_limit: a.max_steps,
            seed: a.seed,
            json: a.json,
        }
    }
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            mode: EngineMode::Sesame,
            trace: false,
            gc: true,
            type_check: false,
            step_limit: 10_000_000,
            seed: None,
            json: false,
        }
    }
}

/// Output sink for one run, text or JSON lines.
struct Report<'a> {
    json: bool,
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Report<'_> {
    fn line(&mut self, text: impl FnOnce() -> String, record: impl FnOnce() -> serde_json::Value) -> io::Result<()> {
        if self.json {
            writeln!(self.out, "{}", record())
        } else {
            writeln!(self.out, "{}", text())
        }
    }

    fn fail(&mut self, status: Status, kind: &str, message: String) -> io::Result<Status> {
        if self.json {
            writeln!(
                self.out,
                "{}",
                json!({"event": "error", "kind": kind, "message": message, "status": status as u8})
            )?;
        } else {
            writeln!(self.err, "error: {message}")?;
        }
        Ok(status)
    }

    fn event(&mut self, e: &TraceEvent) -> io::Result<()> {
        self.line(|| e.to_line(), || with_event("step", e.to_json()))
    }
}

fn with_event(name: &str, mut v: serde_json::Value) -> serde_json::Value {
    if let Some(m) = v.as_object_mut() {
        m.insert("event".into(), name.into());
    }
    v
}

fn caret(src: &str, e: &ParseError) -> String {
    let span = e.span();
    let width = src[span.start.min(src.len())..span.end.min(src.len())].chars().count().max(1);
    let pad = src[..span.start.min(src.len())].chars().count();
    format!("  {src}\n  {}{}", " ".repeat(pad), "^".repeat(width))
}

/// Parses and runs one line of input.
pub fn run_source(cfg: &RunConfig, src: &str, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<Status> {
    let mut r = Report { json: cfg.json, out, err };
    r.line(|| format!("Input: {src}"), || json!({"event": "input", "input": src}))?;
    match parse(src) {
        Ok(t) => run_parsed(cfg, &t, &mut r),
        Err(e) => {
            if !cfg.json {
                writeln!(r.err, "{}", caret(src, &e))?;
            }
            let kind = match e {
                ParseError::Syntax(_) => "syntax",
                ParseError::Binding(_) => "binding",
            };
            r.fail(Status::Syntax, kind, e.to_string())
        }
    }
}

/// Generates and runs a family member.
pub fn run_family(cfg: &RunConfig, spec: FamilySpec, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<Status> {
    let mut r = Report { json: cfg.json, out, err };
    r.line(|| format!("Family: {spec}"), || json!({"event": "family", "family": spec.to_string()}))?;
    run_parsed(cfg, &spec.generate(), &mut r)
}

fn run_parsed(cfg: &RunConfig, t: &Term, r: &mut Report) -> io::Result<Status> {
    let shown = print(t, Style::Unicode);
    r.line(|| format!("Parsed: {shown}"), || json!({"event": "parsed", "term": print(t, Style::Ascii)}))?;
    if let Err(e) = check_proper(t) {
        return r.fail(Status::Improper, "improper", e.to_string());
    }
    r.line(|| "The term is proper.".to_string(), || json!({"event": "proper"}))?;
    if cfg.type_check {
        match infer_type(t) {
            Ok(ty) => r.line(|| format!("Type: {ty}"), || json!({"event": "type", "typing": ty.to_string()}))?,
            Err(e) => {
                r.line(|| format!("The term is not typable: {e}"), || json!({"event": "type", "error": e.to_string()}))?
            }
        }
    }
    match cfg.mode {
        EngineMode::Sesame => run_sesame(cfg, t, r),
        EngineMode::Bam => run_bam(cfg, t, r),
        EngineMode::Good => run_oracle(cfg, t, oracle::Mode::GoodNonErasing, r),
        EngineMode::Basic => run_oracle(cfg, t, oracle::Mode::BasicNonErasing, r),
    }
}

fn finish(cfg: &RunConfig, result: &Term, metrics: &RunMetrics, r: &mut Report) -> io::Result<Status> {
    if cfg.gc {
        let g = sesame::gc(result);
        r.line(
            || format!("->{:<5}{}", "*GC", print(&g, Style::Unicode)),
            || json!({"event": "gc", "term": print(&g, Style::Ascii)}),
        )?;
    } else {
        r.line(
            || format!("Result: {}", print(result, Style::Unicode)),
            || json!({"event": "result", "term": print(result, Style::Ascii)}),
        )?;
    }
    r.line(|| format!("Metrics: {}", metrics.summary()), || with_event("metrics", metrics.to_json()))?;
    Ok(Status::Ok)
}

fn run_sesame(cfg: &RunConfig, t: &Term, r: &mut Report) -> io::Result<Status> {
    let mut events = Vec::new();
    let mut sink = |e: TraceEvent, _: &sesame::Sesame| events.push(e);
    let on_event: Observer<'_, sesame::Sesame> = if cfg.trace { Some(&mut sink) } else { None };
    let outcome = sesame::run_with(t, cfg.step_limit, on_event);
    for e in &events {
        r.event(e)?;
    }
    match outcome {
        Ok(run) => finish(cfg, &run.readback(), run.metrics(), r),
        Err(e @ (SesameError::Clash(_) | SesameError::ClashHalt { .. })) => {
            r.fail(Status::Clash, "clash", e.to_string())
        }
        Err(e @ SesameError::StepLimitExceeded { .. }) => r.fail(Status::StepLimit, "step-limit", e.to_string()),
        Err(e @ SesameError::Improper(_)) => r.fail(Status::Improper, "improper", e.to_string()),
        Err(e @ SesameError::InternalInvariant(_)) => r.fail(Status::Failure, "internal", e.to_string()),
    }
}

fn run_bam(cfg: &RunConfig, t: &Term, r: &mut Report) -> io::Result<Status> {
    let mut events = Vec::new();
    let mut sink = |e: TraceEvent, _: &bam::BamState| events.push(e);
    let on_event: Observer<'_, bam::BamState> = if cfg.trace { Some(&mut sink) } else { None };
    let outcome = bam::run_with(t, cfg.step_limit, on_event);
    for e in &events {
        r.event(e)?;
    }
    match outcome {
        Ok(run) => {
            // answers keep their cuts: collecting them would lose the environment
            let answer = run.state.readback();
            r.line(
                || format!("Answer: {}", print(&answer, Style::Unicode)),
                || json!({"event": "answer", "term": print(&answer, Style::Ascii)}),
            )?;
            r.line(
                || format!("Metrics: {}", run.metrics().summary()),
                || with_event("metrics", run.metrics().to_json()),
            )?;
            Ok(Status::Ok)
        }
        Err(e @ (BamError::Clash(_) | BamError::ClashHalt { .. })) => r.fail(Status::Clash, "clash", e.to_string()),
        Err(e @ BamError::StepLimitExceeded { .. }) => r.fail(Status::StepLimit, "step-limit", e.to_string()),
        Err(e @ BamError::Improper(_)) => r.fail(Status::Improper, "improper", e.to_string()),
        Err(e @ (BamError::OpenTerm(_) | BamError::UnboundVariable(_))) => {
            r.fail(Status::Failure, "open-term", e.to_string())
        }
    }
}

fn run_oracle(cfg: &RunConfig, t: &Term, mode: oracle::Mode, r: &mut Report) -> io::Result<Status> {
    if let Some(p) = crate::inspect::find_clash(t) {
        return r.fail(Status::Clash, "clash", format!("clash at {p}"));
    }
    let mut names = NameSource::above(t);
    let mut cur = ensure_well_bound(t, &mut names);
    let mut rng = cfg.seed.map(StdRng::seed_from_u64);
    let mut pick = |n: usize| rng.as_mut().map_or(0, |g| g.random_range(0..n));
    let mut metrics = RunMetrics::new(t.size());
    let start = std::time::Instant::now();
    if cfg.trace {
        r.event(&TraceEvent { step: 0, transition: None, state: print(&cur, Style::Unicode) })?;
    }
    let mut steps = 0;
    while let Some((next, redex)) = oracle::step(&cur, mode, &mut pick, &mut names) {
        if steps >= cfg.step_limit {
            let e = OracleError::StepLimitExceeded { limit: cfg.step_limit, partial: Box::new(cur), steps };
            return r.fail(Status::StepLimit, "step-limit", e.to_string());
        }
        steps += 1;
        if let Some(n) = oracle::duplicated_value_size(&cur, &redex) {
            metrics.record_copy(n);
        }
        cur = next;
        if let Some(tr) = crate::metrics::Transition::ALL.iter().copied().find(|tr| tr.rule() == Some(redex.kind)) {
            metrics.record(tr);
        }
        if cfg.trace {
            let line = format!("->{:<5}{}", redex.kind.tag(), print(&cur, Style::Unicode));
            let record =
                json!({"event": "step", "step": steps, "tag": redex.kind.tag(), "state": print(&cur, Style::Unicode)});
            r.line(|| line, || record)?;
        }
    }
    metrics.elapsed = start.elapsed();
    if let Some(p) = crate::inspect::find_clash(&cur) {
        return r.fail(Status::Clash, "clash", format!("clash at {p}"));
    }
    finish(cfg, &cur, &metrics, r)
}

/// Lines worth running: not blank, not a `#` comment.
fn term_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'))
}

/// Runs every term of every file. The status is the first failure, if any.
pub fn run_files(cfg: &RunConfig, files: &[PathBuf], out: &mut dyn Write, err: &mut dyn Write) -> io::Result<Status> {
    let mut status = Status::Ok;
    for f in files {
        let text = match fs::read_to_string(f) {
            Ok(t) => t,
            Err(e) => {
                writeln!(err, "error: cannot read {}: {e}", f.display())?;
                status = status.max(Status::Failure);
                continue;
            }
        };
        for line in term_lines(&text) {
            let s = run_source(cfg, line, out, err)?;
            if status == Status::Ok {
                status = s;
            }
        }
    }
    Ok(status)
}

/// Reads terms line by line until end of input.
pub fn repl(
    cfg: &RunConfig,
    input: &mut dyn BufRead,
    interactive: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> io::Result<Status> {
    if !cfg.json {
        writeln!(out, "Enter a term per line. Accepted grammar:\n{GRAMMAR}")?;
    }
    let mut status = Status::Ok;
    let mut buf = String::new();
    loop {
        if interactive {
            write!(err, "> ")?;
            err.flush()?;
        }
        buf.clear();
        if input.read_line(&mut buf)? == 0 {
            break;
        }
        if let Some(line) = term_lines(&buf).next() {
            let s = run_source(cfg, line, out, err)?;
            if status == Status::Ok {
                status = s;
            }
        }
    }
    Ok(status)
}

const EXAMPLE: &str = "[!\\m1m1-e1][e1?m2][e1?m3][m2>m3,m4]m4";

type Check = dyn Fn() -> Result<bool, String>;

/// The startup battery: the running example and three family members.
pub fn self_test(out: &mut dyn Write) -> io::Result<Status> {
    let checks: Vec<(&str, Box<Check>)> = vec![
        (
            "running example",
            Box::new(|| {
                let t = parse(EXAMPLE).map_err(|e| e.to_string())?;
                let run = sesame::run(&t, 1000).map_err(|e| e.to_string())?;
                Ok(run.transitions.len() == 13 && alpha_eq(&run.result(), &parse("\\m1m1").expect("literal")))
            }),
        ),
        ("cutpi:3,4", Box::new(|| family_result(FamilySpec::CutPi(3, 4)).map(|g| alpha_eq(&g, &pi(12))))),
        ("delta:3", Box::new(|| family_result(FamilySpec::Delta(3)).map(|g| alpha_eq(&g, &pi(8))))),
        (
            "sigma:3",
            Box::new(|| family_result(FamilySpec::Sigma(3)).map(|g| alpha_eq(&g, &parse("!\\m1m1").expect("literal")))),
        ),
    ];
    let mut status = Status::Ok;
    for (name, check) in checks {
        let verdict = match check() {
            Ok(true) => "ok".to_string(),
            Ok(false) => {
                status = Status::Failure;
                "FAIL".to_string()
            }
            Err(e) => {
                status = Status::Failure;
                format!("FAIL ({e})")
            }
        };
        writeln!(out, "self-test {name}: {verdict}")?;
    }
    Ok(status)
}

fn family_result(spec: FamilySpec) -> Result<Term, String> {
    let run = sesame::run(&spec.generate(), 1_000_000).map_err(|e| e.to_string())?;
    if !run.state.check_invariants().is_clean() {
        return Err("invariant violated".into());
    }
    Ok(run.result())
}

/// Entry point behind `main`, with the streams passed in.
pub fn main_with(args: &Args, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<Status> {
    let cfg = RunConfig::from(args);
    if args.self_test {
        return self_test(out);
    }
    if let Some(spec) = args.family {
        return run_family(&cfg, spec, out, err);
    }
    if !args.files.is_empty() {
        return run_files(&cfg, &args.files, out, err);
    }
    repl(&cfg, stdin, io::stdin().is_terminal(), out, err)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn capture(cfg: &RunConfig, src: &str) -> (Status, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let s = run_source(cfg, src, &mut out, &mut err).unwrap();
        (s, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn trace_of_the_running_example() {
        let cfg = RunConfig { trace: true, ..RunConfig::default() };
        let (s, out, _) = capture(&cfg, EXAMPLE);
        assert_eq!(s, Status::Ok);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[0], format!("Input: {EXAMPLE}"));
        assert_eq!(lines[1], "Parsed: [!λm1m1→e1][e1?m2][e1?m3][m2▷m3,m4]m4");
        assert_eq!(lines[2], "The term is proper.");
        assert_eq!(lines[3], "       <[!λm1m1→e1][e1?m2][e1?m3][m2▷m3,m4]m4>1");
        assert_eq!(lines[17], "->*GC  λm6m6");
        assert!(lines[18].starts_with("Metrics: size="));
    }

    #[test]
    fn statuses_distinguish_failures() {
        let cfg = RunConfig::default();
        assert_eq!(capture(&cfg, "[m1-").0, Status::Syntax);
        assert_eq!(capture(&cfg, "\\m1m2").0, Status::Improper);
        assert_eq!(capture(&cfg, "[\\m1m1-e1]e1").0, Status::Clash);
        let tight = RunConfig { step_limit: 2, ..RunConfig::default() };
        assert_eq!(capture(&tight, EXAMPLE).0, Status::StepLimit);
    }

    #[test]
    fn syntax_errors_point_at_the_span() {
        let (_, _, err) = capture(&RunConfig::default(), "[m1-");
        assert!(err.contains("  [m1-\n"), "{err}");
        assert!(err.contains('^'));
    }

    #[test]
    fn json_lines_parse() {
        let cfg = RunConfig { trace: true, json: true, ..RunConfig::default() };
        let (_, out, _) = capture(&cfg, EXAMPLE);
        let events: Vec<serde_json::Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(events.iter().filter(|e| e["event"] == "step").count(), 14);
        assert_eq!(events.last().unwrap()["event"], "metrics");
    }

    #[test]
    fn engines_agree_on_the_running_example() {
        for mode in [EngineMode::Sesame, EngineMode::Good, EngineMode::Basic] {
            let (s, out, _) = capture(&RunConfig { mode, ..RunConfig::default() }, EXAMPLE);
            assert_eq!(s, Status::Ok);
            assert!(out.contains("->*GC  λm"), "{mode:?}: {out}");
        }
        let (s, out, _) = capture(&RunConfig { mode: EngineMode::Bam, ..RunConfig::default() }, EXAMPLE);
        assert_eq!(s, Status::Ok);
        assert!(out.contains("Answer: "));
    }

    #[test]
    fn family_runs_without_multiplicative_steps() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        run_family(&RunConfig::default(), FamilySpec::Sigma(3), &mut out, &mut err).unwrap();
        let out = String::from_utf8(out).unwrap();
        assert!(out.contains("multiplicative=0"), "{out}");
    }

    #[test]
    fn repl_matches_batch() {
        let cfg = RunConfig { trace: true, ..RunConfig::default() };
        let (_, batch, _) = capture(&cfg, EXAMPLE);
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let mut input = io::Cursor::new(format!("{EXAMPLE}\n"));
        repl(&cfg, &mut input, false, &mut out, &mut err).unwrap();
        let repl_out = String::from_utf8(out).unwrap();
        assert!(repl_out.starts_with("Enter a term"));
        assert!(repl_out.ends_with(&batch));
    }

    #[test]
    fn self_test_passes() {
        let mut out = Vec::new();
        assert_eq!(self_test(&mut out).unwrap(), Status::Ok);
        assert_eq!(String::from_utf8(out).unwrap().lines().count(), 4);
    }
}

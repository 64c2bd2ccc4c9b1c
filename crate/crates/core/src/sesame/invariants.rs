use std::collections::{BTreeSet, HashSet};
use std::fmt;

use super::store::Binding;
use super::Sesame;
use crate::inspect::{cuts, occurrences};
use crate::names::is_well_bound;
use crate::oracle::is_good;
use crate::path::{Node, Path, Selector};
use crate::term::{Term, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    UniqueNames(String),
    Approximant(String),
    WellBound,
    ContextualDecoding(Path),
    Domain(String),
    SubtermBound { size: usize, bound: usize },
    SearchBound { search: u64, bound: u64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UniqueNames(m) => write!(f, "unique names: {m}"),
            Violation::Approximant(m) => write!(f, "approximant: {m}"),
            Violation::WellBound => f.write_str("well-bound: read-back has a repeated or free-clashing binder"),
            Violation::ContextualDecoding(p) => {
                write!(f, "contextual decoding: topmost job at {p} is not a good position")
            }
            Violation::Domain(m) => write!(f, "domain: {m}"),
            Violation::SubtermBound { size, bound } => write!(f, "sub-term: value of size {size} exceeds {bound}"),
            Violation::SearchBound { search, bound } => write!(f, "search bound: {search} > {bound}"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InvariantReport {
    pub violations: Vec<Violation>,
}

impl InvariantReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for InvariantReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("all invariants hold");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

fn under_any(p: &Path, jobs: &[(u32, Path)]) -> bool {
    jobs.iter().any(|(_, j)| p.starts_with(j))
}

pub(super) fn check(q: &Sesame) -> InvariantReport {
    let mut out = Vec::new();

    let mut slots = HashSet::new();
    let mut names = HashSet::new();
    for j in &q.pool {
        if !slots.insert(j.slot) {
            out.push(Violation::UniqueNames(format!("slot {:?} is in the pool twice", j.slot)));
        }
        if !names.insert(j.name) {
            out.push(Violation::UniqueNames(format!("job name {} is used twice", j.name)));
        }
    }

    let (t, jobs) = q.readback_with_jobs();
    if jobs.len() != q.pool.len() {
        out.push(Violation::UniqueNames(format!("{} jobs but {} holes reached", q.pool.len(), jobs.len())));
    }
    for (i, (_, a)) in jobs.iter().enumerate() {
        for (_, b) in &jobs[i + 1..] {
            if a.starts_with(b) || b.starts_with(a) {
                out.push(Violation::UniqueNames(format!("jobs at {a} and {b} overlap")));
            }
        }
    }

    approximant(&t, &jobs, &mut out);

    if !is_well_bound(&t) {
        out.push(Violation::WellBound);
    }

    if let Some((_, top)) = jobs.first() {
        if !is_good(&t, top) {
            out.push(Violation::ContextualDecoding(top.clone()));
        }
    }

    domain(q, &t, &jobs, &mut out);

    let bound = q.metrics.initial_size;
    let mut biggest = q.metrics.max_copied_value_size;
    for c in cuts(&t) {
        if let Some(Node::Term(Term::Cut { value, .. })) = t.at(&c) {
            biggest = biggest.max(value.size());
        }
    }
    for (_, p) in &jobs {
        if let Some(v) = t.at(p).and_then(|n| n.as_value()) {
            biggest = biggest.max(v.size());
        }
    }
    if biggest > bound {
        out.push(Violation::SubtermBound { size: biggest, bound });
    }

    if !q.metrics.search_bound_holds() {
        let bound = q.metrics.initial_size as u64 * (q.metrics.principal_total() + 1);
        out.push(Violation::SearchBound { search: q.metrics.search_total(), bound });
    }

    InvariantReport { violations: out }
}

/// Out cuts of the multi-context are hole-free and bind no out occurrence
/// outside the jobs.
fn approximant(t: &Term, jobs: &[(u32, Path)], out: &mut Vec<Violation>) {
    for (_, j) in jobs {
        if j.selectors().contains(&Selector::CutValue) {
            out.push(Violation::Approximant(format!("job at {j} sits in a cut value")));
        }
    }
    for site in cuts(t) {
        if site.selectors().contains(&Selector::CutValue) || under_any(&site, jobs) {
            continue;
        }
        let Some(Node::Term(Term::Cut { var, body, .. })) = t.at(&site) else { continue };
        let body_path = site.child(Selector::CutBody);
        for (d, _) in occurrences(body, *var) {
            let full = body_path.join(&d);
            if !d.selectors().contains(&Selector::CutValue) && !under_any(&full, jobs) {
                out.push(Violation::Approximant(format!("out cut on {var} at {site} has an out occurrence at {full}")));
            }
        }
    }
}

/// A variable counts as cut-bound exactly when a cut on it encloses the job.
fn domain(q: &Sesame, t: &Term, jobs: &[(u32, Path)], out: &mut Vec<Violation>) {
    let cut_bound: BTreeSet<Var> =
        q.store.variables().filter(|(_, b)| matches!(b, Binding::Cut { .. })).map(|(v, _)| v).collect();
    for (_, p) in jobs {
        let mut dom = BTreeSet::new();
        let mut node = Node::Term(t);
        for s in p.selectors() {
            if let (Node::Term(Term::Cut { var, .. }), Selector::CutBody) = (node, s) {
                dom.insert(*var);
            }
            match node.step(*s) {
                Some(n) => node = n,
                None => break,
            }
        }
        let free = match node {
            Node::Term(sub) => sub.free_vars(),
            Node::Value(v) => v.free_vars(),
        };
        for x in free {
            if dom.contains(&x) != cut_bound.contains(&x) {
                out.push(Violation::Domain(format!(
                    "{x} at job {p}: enclosing cut {}, cut binding {}",
                    dom.contains(&x),
                    cut_bound.contains(&x)
                )));
            }
        }
    }
}

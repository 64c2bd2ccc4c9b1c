//! Properness: the multiplicative linearity conditions that every proof term
//! satisfies, checked without types.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::path::{Path, Selector};
use crate::term::{Term, Value, Var};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ImproperReason {
    /// A multiplicative binder with no occurrence in its scope.
    UnusedBinder(Var),
    /// Two linear parts share multiplicative variables.
    SharedVariables(Vec<Var>),
    /// The head of a left rule occurs again in its continuation.
    HeadReused(Var),
    /// A box over free multiplicative variables.
    BoxOverLinear(Vec<Var>),
}

impl fmt::Display for ImproperReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |xs: &[Var]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        match self {
            ImproperReason::UnusedBinder(x) => write!(f, "multiplicative binder {x} is not used"),
            ImproperReason::SharedVariables(xs) => write!(f, "multiplicative variables {} are shared", list(xs)),
            ImproperReason::HeadReused(x) => write!(f, "head {x} occurs again in the continuation"),
            ImproperReason::BoxOverLinear(xs) => write!(f, "box over free multiplicative variables {}", list(xs)),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("improper term at {position}: {reason}")]
pub struct ImproperTerm {
    pub position: Path,
    pub reason: ImproperReason,
}

/// Checks properness. On failure reports the outermost violation: the
/// shallowest one, leftmost among equals.
pub fn check_proper(t: &Term) -> Result<(), ImproperTerm> {
    let mut c = Checker { path: Vec::new(), found: Vec::new() };
    c.term(t);
    match c.found.into_iter().min_by(|a, b| (a.position.len(), &a.position).cmp(&(b.position.len(), &b.position))) {
        Some(v) => Err(v),
        None => Ok(()),
    }
}

pub fn is_proper(t: &Term) -> bool {
    check_proper(t).is_ok()
}

type Mfv = BTreeSet<Var>;

struct Checker {
    path: Vec<Selector>,
    found: Vec<ImproperTerm>,
}

impl Checker {
    fn report(&mut self, depth: usize, reason: ImproperReason) {
        self.found.push(ImproperTerm { position: Path(self.path[..depth].to_vec()), reason });
    }

    fn under<T>(&mut self, s: Selector, f: impl FnOnce(&mut Self) -> T) -> T {
        self.path.push(s);
        let r = f(self);
        self.path.pop();
        r
    }

    fn value(&mut self, v: &Value) -> Mfv {
        let here = self.path.len();
        match v {
            Value::Var(x) => {
                if x.is_mult() {
                    BTreeSet::from([*x])
                } else {
                    BTreeSet::new()
                }
            }
            Value::Abs(x, t) => {
                let mut body = self.under(Selector::AbsBody, |c| c.term(t));
                if x.is_mult() && !body.remove(x) {
                    self.report(here, ImproperReason::UnusedBinder(*x));
                }
                body
            }
            Value::Bang(t) => {
                let body = self.under(Selector::BangBody, |c| c.term(t));
                if !body.is_empty() {
                    self.report(here, ImproperReason::BoxOverLinear(body.iter().copied().collect()));
                }
                body
            }
            Value::Pair(l, r) => {
                let ml = self.under(Selector::PairLeft, |c| c.term(l));
                let mr = self.under(Selector::PairRight, |c| c.term(r));
                let shared: Vec<Var> = ml.intersection(&mr).copied().collect();
                if !shared.is_empty() {
                    self.report(here, ImproperReason::SharedVariables(shared));
                }
                ml.union(&mr).copied().collect()
            }
        }
    }

    fn term(&mut self, t: &Term) -> Mfv {
        // Walk down the spine recording each binder's own data, then fold the
        // conditions back up.
        struct Frame<'a> {
            depth: usize,
            node: &'a Term,
            value_mfv: Mfv,
        }
        let start = self.path.len();
        let mut frames = Vec::new();
        let mut cur = t;
        let mut acc = loop {
            let depth = self.path.len();
            match cur {
                Term::Val(v) => break self.value(v),
                Term::Cut { value, body, .. } => {
                    let vm = self.under(Selector::CutValue, |c| c.value(value));
                    frames.push(Frame { depth, node: cur, value_mfv: vm });
                    self.path.push(Selector::CutBody);
                    cur = body;
                }
                Term::Subtract { value, body, .. } => {
                    let vm = self.under(Selector::SubValue, |c| c.value(value));
                    frames.push(Frame { depth, node: cur, value_mfv: vm });
                    self.path.push(Selector::SubBody);
                    cur = body;
                }
                Term::Derelict { body, .. } => {
                    frames.push(Frame { depth, node: cur, value_mfv: BTreeSet::new() });
                    self.path.push(Selector::DerBody);
                    cur = body;
                }
                Term::Unpair { body, .. } => {
                    frames.push(Frame { depth, node: cur, value_mfv: BTreeSet::new() });
                    self.path.push(Selector::UnpairBody);
                    cur = body;
                }
            }
        };
        for f in frames.into_iter().rev() {
            let d = f.depth;
            match f.node {
                Term::Cut { var, .. } => {
                    let used = acc.remove(var);
                    if var.is_mult() && !used {
                        self.report(d, ImproperReason::UnusedBinder(*var));
                    }
                    self.disjoint(d, &f.value_mfv, &acc);
                    acc.extend(f.value_mfv);
                }
                Term::Subtract { head, var, .. } => {
                    let used = acc.remove(var);
                    if var.is_mult() && !used {
                        self.report(d, ImproperReason::UnusedBinder(*var));
                    }
                    self.disjoint(d, &f.value_mfv, &acc);
                    if acc.contains(head) {
                        self.report(d, ImproperReason::HeadReused(*head));
                    }
                    acc.extend(f.value_mfv);
                    acc.insert(*head);
                }
                Term::Derelict { var, .. } => {
                    let used = acc.remove(var);
                    if var.is_mult() && !used {
                        self.report(d, ImproperReason::UnusedBinder(*var));
                    }
                }
                Term::Unpair { head, left, right, .. } => {
                    for x in [left, right] {
                        let used = acc.remove(x);
                        if x.is_mult() && !used {
                            self.report(d, ImproperReason::UnusedBinder(*x));
                        }
                    }
                    if acc.contains(head) {
                        self.report(d, ImproperReason::HeadReused(*head));
                    }
                    acc.insert(*head);
                }
                Term::Val(_) => unreachable!(),
            }
        }
        self.path.truncate(start);
        acc
    }

    fn disjoint(&mut self, depth: usize, a: &Mfv, b: &Mfv) {
        let shared: Vec<Var> = a.intersection(b).copied().collect();
        if !shared.is_empty() {
            self.report(depth, ImproperReason::SharedVariables(shared));
        }
    }
}

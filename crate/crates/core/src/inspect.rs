//! Structural queries: traversal, occurrences, clashes, garbage and answers.

use std::collections::BTreeSet;

use rustc_hash::FxHashMap as HashMap;

use crate::path::{Node, Path, Selector};
use crate::term::{Kind, Term, Value, Var};

/// What a visitor wants done with the children of the current node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Walk {
    Continue,
    SkipChildren,
    /// Visit value children but not the body of the binder.
    SkipBinderBody,
}

/// Pre-order traversal over every term and value slot, children in selector
/// order. Runs on an explicit stack so long spines do not grow the call stack.
pub fn walk<'a>(t: &'a Term, mut f: impl FnMut(&[Selector], Node<'a>) -> Walk) {
    let mut path: Vec<Selector> = Vec::new();
    let mut stack: Vec<(Node<'a>, usize, Option<Selector>)> = vec![(Node::Term(t), 0, None)];
    while let Some((node, depth, sel)) = stack.pop() {
        path.truncate(depth);
        if let Some(s) = sel {
            path.push(s);
        }
        let action = f(&path, node);
        if action == Walk::SkipChildren {
            continue;
        }
        let d = path.len();
        let mut kids: Vec<(Node<'a>, Selector)> = Vec::with_capacity(2);
        match node.as_value() {
            Some(Value::Var(_)) => {}
            Some(Value::Abs(_, b)) => kids.push((Node::Term(b), Selector::AbsBody)),
            Some(Value::Bang(b)) => kids.push((Node::Term(b), Selector::BangBody)),
            Some(Value::Pair(l, r)) => {
                kids.push((Node::Term(l), Selector::PairLeft));
                kids.push((Node::Term(r), Selector::PairRight));
            }
            None => {
                let Node::Term(t) = node else { unreachable!() };
                let skip_body = action == Walk::SkipBinderBody;
                match t {
                    Term::Val(_) => unreachable!(),
                    Term::Cut { value, body, .. } => {
                        kids.push((Node::Value(value), Selector::CutValue));
                        if !skip_body {
                            kids.push((Node::Term(body), Selector::CutBody));
                        }
                    }
                    Term::Subtract { value, body, .. } => {
                        kids.push((Node::Value(value), Selector::SubValue));
                        if !skip_body {
                            kids.push((Node::Term(body), Selector::SubBody));
                        }
                    }
                    Term::Derelict { body, .. } => {
                        if !skip_body {
                            kids.push((Node::Term(body), Selector::DerBody));
                        }
                    }
                    Term::Unpair { body, .. } => {
                        if !skip_body {
                            kids.push((Node::Term(body), Selector::UnpairBody));
                        }
                    }
                }
            }
        }
        for (n, s) in kids.into_iter().rev() {
            stack.push((n, d, Some(s)));
        }
    }
}

/// How a variable occurs at a position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Occurrence {
    /// A plain variable, in a term slot or a value slot.
    Plain,
    SubHead,
    DerHead,
    UnpairHead,
}

/// Free occurrences of `x` in `t`, with their paths relative to `t`.
pub fn occurrences(t: &Term, x: Var) -> Vec<(Path, Occurrence)> {
    let mut out = Vec::new();
    walk(t, |path, node| {
        if let Some(v) = node.as_value() {
            return match v {
                Value::Var(y) if *y == x => {
                    out.push((Path(path.to_vec()), Occurrence::Plain));
                    Walk::Continue
                }
                Value::Abs(y, _) if *y == x => Walk::SkipChildren,
                _ => Walk::Continue,
            };
        }
        let Node::Term(t) = node else { unreachable!() };
        let (head, rebinds) = match t {
            Term::Cut { var, .. } => (None, *var == x),
            Term::Subtract { head, var, .. } => (Some((*head, Occurrence::SubHead)), *var == x),
            Term::Derelict { head, var, .. } => (Some((*head, Occurrence::DerHead)), *var == x),
            Term::Unpair { head, left, right, .. } => {
                (Some((*head, Occurrence::UnpairHead)), *left == x || *right == x)
            }
            Term::Val(_) => unreachable!(),
        };
        if let Some((h, kind)) = head {
            if h == x {
                out.push((Path(path.to_vec()), kind));
            }
        }
        if rebinds {
            Walk::SkipBinderBody
        } else {
            Walk::Continue
        }
    });
    out
}

/// Every cut in `t`, pre-order, with its path.
pub fn cuts(t: &Term) -> Vec<Path> {
    let mut out = Vec::new();
    walk(t, |path, node| {
        if let Node::Term(Term::Cut { .. }) = node {
            out.push(Path(path.to_vec()));
        }
        Walk::Continue
    });
    out
}

/// Cuts that are not inside the value of another cut.
pub fn out_cuts(t: &Term) -> Vec<Path> {
    let mut out = Vec::new();
    walk(t, |path, node| {
        if path.last() == Some(&Selector::CutValue) {
            return Walk::SkipChildren;
        }
        if let Node::Term(Term::Cut { .. }) = node {
            out.push(Path(path.to_vec()));
        }
        Walk::Continue
    });
    out
}

/// Free variables with an occurrence outside every cut value.
pub fn out_vars(t: &Term) -> BTreeSet<Var> {
    let mut c = OutVarCollector::default();
    c.term(t);
    c.found
}

#[derive(Default)]
struct OutVarCollector {
    bound: HashMap<Var, u32>,
    found: BTreeSet<Var>,
}

impl OutVarCollector {
    fn occ(&mut self, x: Var) {
        if self.bound.get(&x).copied().unwrap_or(0) == 0 {
            self.found.insert(x);
        }
    }
    fn bind(&mut self, x: Var) {
        *self.bound.entry(x).or_insert(0) += 1;
    }
    fn unbind(&mut self, x: Var) {
        if let Some(c) = self.bound.get_mut(&x) {
            *c -= 1;
        }
    }
    fn value(&mut self, v: &Value) {
        match v {
            Value::Var(x) => self.occ(*x),
            Value::Abs(x, t) => {
                self.bind(*x);
                self.term(t);
                self.unbind(*x);
            }
            Value::Bang(t) => self.term(t),
            Value::Pair(l, r) => {
                self.term(l);
                self.term(r);
            }
        }
    }
    fn term(&mut self, t: &Term) {
        let mut opened = Vec::new();
        let mut cur = t;
        loop {
            match cur {
                Term::Val(v) => {
                    self.value(v);
                    break;
                }
                Term::Cut { var, body, .. } => {
                    self.bind(*var);
                    opened.push(*var);
                    cur = body;
                }
                Term::Subtract { head, value, var, body } => {
                    self.occ(*head);
                    self.value(value);
                    self.bind(*var);
                    opened.push(*var);
                    cur = body;
                }
                Term::Derelict { head, var, body } => {
                    self.occ(*head);
                    self.bind(*var);
                    opened.push(*var);
                    cur = body;
                }
                Term::Unpair { head, left, right, body } => {
                    self.occ(*head);
                    self.bind(*left);
                    self.bind(*right);
                    opened.extend([*left, *right]);
                    cur = body;
                }
            }
        }
        for x in opened {
            self.unbind(x);
        }
    }
}

/// Every out cut `[v - x]s` has `x` outside the out variables of `s`.
pub fn is_cut_free_up_to_garbage(t: &Term) -> bool {
    out_cuts(t).iter().all(|p| match t.at(p) {
        Some(Node::Term(Term::Cut { var, body, .. })) => !out_vars(body).contains(var),
        _ => false,
    })
}

/// A value under a cut context, other than a variable.
pub fn is_answer(t: &Term) -> bool {
    let mut cur = t;
    loop {
        match cur {
            Term::Cut { body, .. } => cur = body,
            Term::Val(Value::Var(_)) => return false,
            Term::Val(_) => return true,
            _ => return false,
        }
    }
}

/// First cut whose value cannot interact with its variable: the sorts differ,
/// or a multiplicative value meets the left rule of the other connective.
pub fn find_clash(t: &Term) -> Option<Path> {
    let mut found = None;
    walk(t, |path, node| {
        if found.is_some() {
            return Walk::SkipChildren;
        }
        if let Node::Term(Term::Cut { value, var, body }) = node {
            if cut_clashes(value, *var, body) {
                found = Some(Path(path.to_vec()));
                return Walk::SkipChildren;
            }
        }
        Walk::Continue
    });
    found
}

pub(crate) fn cut_clashes(value: &Value, var: Var, body: &Term) -> bool {
    if value.kind() != var.kind {
        return true;
    }
    if var.kind == Kind::Multiplicative {
        let bad = match value {
            Value::Abs(..) => Occurrence::UnpairHead,
            Value::Pair(..) => Occurrence::SubHead,
            _ => return false,
        };
        return occurrences(body, var).iter().any(|(_, o)| *o == bad);
    }
    false
}

/// Garbage collection: erases every cut, recursing everywhere else.
pub fn collect_garbage(t: &Term) -> Term {
    enum Frame {
        Subtract(Var, Value, Var),
        Derelict(Var, Var),
        Unpair(Var, Var, Var),
    }
    let mut frames = Vec::new();
    let mut cur = t;
    let tail = loop {
        match cur {
            Term::Val(v) => break collect_garbage_value(v),
            Term::Cut { body, .. } => cur = body,
            Term::Subtract { head, value, var, body } => {
                frames.push(Frame::Subtract(*head, collect_garbage_value(value), *var));
                cur = body;
            }
            Term::Derelict { head, var, body } => {
                frames.push(Frame::Derelict(*head, *var));
                cur = body;
            }
            Term::Unpair { head, left, right, body } => {
                frames.push(Frame::Unpair(*head, *left, *right));
                cur = body;
            }
        }
    };
    let mut out = Term::Val(tail);
    for f in frames.into_iter().rev() {
        out = match f {
            Frame::Subtract(h, v, x) => Term::subtract(h, v, x, out),
            Frame::Derelict(h, x) => Term::derelict(h, x, out),
            Frame::Unpair(h, l, r) => Term::unpair(h, l, r, out),
        };
    }
    out
}

fn collect_garbage_value(v: &Value) -> Value {
    match v {
        Value::Var(x) => Value::Var(*x),
        Value::Abs(x, t) => Value::Abs(*x, Box::new(collect_garbage(t))),
        Value::Bang(t) => Value::Bang(Box::new(collect_garbage(t))),
        Value::Pair(l, r) => Value::Pair(Box::new(collect_garbage(l)), Box::new(collect_garbage(r))),
    }
}

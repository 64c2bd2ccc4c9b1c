//! Positions inside a term, described as the path from the root to a hole.
//!
//! A path plays the role of a one-hole context: left contexts only go through
//! binder bodies, cut contexts only through cut bodies, value contexts only
//! through abstraction and box bodies.

use std::fmt;

use thiserror::Error;

use crate::term::{placeholder, Term, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Selector {
    AbsBody,
    BangBody,
    CutValue,
    CutBody,
    SubValue,
    SubBody,
    DerBody,
    PairLeft,
    PairRight,
    UnpairBody,
}

impl Selector {
    /// Selectors landing on a value slot rather than a term slot.
    pub fn targets_value(self) -> bool {
        matches!(self, Selector::CutValue | Selector::SubValue)
    }

    pub fn is_binder_body(self) -> bool {
        matches!(self, Selector::CutBody | Selector::SubBody | Selector::DerBody | Selector::UnpairBody)
    }
}

/// Root-to-hole path. Ordered lexicographically, prefixes first.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Path(pub Vec<Selector>);

impl Path {
    pub fn root() -> Path {
        Path(Vec::new())
    }

    pub fn child(&self, s: Selector) -> Path {
        let mut v = self.0.clone();
        v.push(s);
        Path(v)
    }

    pub fn join(&self, rest: &Path) -> Path {
        let mut v = self.0.clone();
        v.extend_from_slice(&rest.0);
        Path(v)
    }

    pub fn selectors(&self) -> &[Selector] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn starts_with(&self, prefix: &Path) -> bool {
        self.0.starts_with(&prefix.0)
    }

    /// Only binder bodies: the hole sits on the spine.
    pub fn is_left_context(&self) -> bool {
        self.0.iter().all(|s| s.is_binder_body())
    }

    /// Only cut bodies.
    pub fn is_cut_context(&self) -> bool {
        self.0.iter().all(|s| *s == Selector::CutBody)
    }

    pub fn is_value_context(&self) -> bool {
        self.0.iter().all(|s| matches!(s, Selector::AbsBody | Selector::BangBody))
    }

    pub fn ends_in_value_slot(&self) -> bool {
        self.0.last().is_some_and(|s| s.targets_value())
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("<root>");
        }
        for (i, s) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("/")?;
            }
            write!(f, "{s:?}")?;
        }
        Ok(())
    }
}

impl From<Vec<Selector>> for Path {
    fn from(v: Vec<Selector>) -> Path {
        Path(v)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlugError {
    #[error("path {0} does not exist in the term")]
    NoSuchPosition(Path),
    #[error("only a value may fill the value slot at {0}")]
    SplitViolation(Path),
}

/// A subterm seen through a path: either a term slot or a value slot.
#[derive(Clone, Copy, Debug)]
pub enum Node<'a> {
    Term(&'a Term),
    Value(&'a Value),
}

impl<'a> Node<'a> {
    /// The value at this node, if it is one (a term slot holding a value counts).
    pub fn as_value(self) -> Option<&'a Value> {
        match self {
            Node::Value(v) | Node::Term(Term::Val(v)) => Some(v),
            Node::Term(_) => None,
        }
    }

    pub(crate) fn step(self, s: Selector) -> Option<Node<'a>> {
        use Selector::*;
        if let Some(v) = self.as_value() {
            return match (v, s) {
                (Value::Abs(_, t), AbsBody) | (Value::Bang(t), BangBody) => Some(Node::Term(t)),
                (Value::Pair(l, _), PairLeft) => Some(Node::Term(l)),
                (Value::Pair(_, r), PairRight) => Some(Node::Term(r)),
                _ => None,
            };
        }
        let Node::Term(t) = self else { return None };
        match (t, s) {
            (Term::Cut { value, .. }, CutValue) | (Term::Subtract { value, .. }, SubValue) => Some(Node::Value(value)),
            (Term::Cut { body, .. }, CutBody)
            | (Term::Subtract { body, .. }, SubBody)
            | (Term::Derelict { body, .. }, DerBody)
            | (Term::Unpair { body, .. }, UnpairBody) => Some(Node::Term(body)),
            _ => None,
        }
    }
}

impl Term {
    pub fn at(&self, path: &Path) -> Option<Node<'_>> {
        self.at_slice(&path.0)
    }

    pub fn at_slice(&self, path: &[Selector]) -> Option<Node<'_>> {
        let mut n = Node::Term(self);
        for s in path {
            n = n.step(*s)?;
        }
        Some(n)
    }

    /// Mutable access to the term slot at `path`. Fails on value slots.
    pub fn term_at_mut(&mut self, path: &[Selector]) -> Option<&mut Term> {
        let mut cur = self;
        let mut i = 0;
        while i < path.len() {
            use Selector::*;
            let s = path[i];
            cur = match (cur, s) {
                (Term::Val(Value::Abs(_, t)), AbsBody) | (Term::Val(Value::Bang(t)), BangBody) => t,
                (Term::Val(Value::Pair(l, _)), PairLeft) => l,
                (Term::Val(Value::Pair(_, r)), PairRight) => r,
                (Term::Cut { value, .. }, CutValue) | (Term::Subtract { value, .. }, SubValue) => {
                    // A value slot: continue inside the value.
                    let next = *path.get(i + 1)?;
                    i += 1;
                    match (value, next) {
                        (Value::Abs(_, t), AbsBody) | (Value::Bang(t), BangBody) => t,
                        (Value::Pair(l, _), PairLeft) => l,
                        (Value::Pair(_, r), PairRight) => r,
                        _ => return None,
                    }
                }
                (Term::Cut { body, .. }, CutBody)
                | (Term::Subtract { body, .. }, SubBody)
                | (Term::Derelict { body, .. }, DerBody)
                | (Term::Unpair { body, .. }, UnpairBody) => body,
                _ => return None,
            };
            i += 1;
        }
        Some(cur)
    }

    /// Mutable access to the value at `path`: either a value slot or a term
    /// slot currently holding a value.
    pub fn value_at_mut(&mut self, path: &[Selector]) -> Option<&mut Value> {
        match path.split_last() {
            Some((last, prefix)) if last.targets_value() => {
                let parent = self.term_at_mut(prefix)?;
                match (parent, last) {
                    (Term::Cut { value, .. }, Selector::CutValue)
                    | (Term::Subtract { value, .. }, Selector::SubValue) => Some(value),
                    _ => None,
                }
            }
            _ => match self.term_at_mut(path)? {
                Term::Val(v) => Some(v),
                _ => None,
            },
        }
    }

    /// Replaces the subterm at `path` with `filler`, in place.
    pub fn replace_at(&mut self, path: &Path, filler: Term) -> Result<Term, PlugError> {
        if path.ends_in_value_slot() {
            let v = filler.into_value().map_err(|_| PlugError::SplitViolation(path.clone()))?;
            let slot = self.value_at_mut(&path.0).ok_or_else(|| PlugError::NoSuchPosition(path.clone()))?;
            Ok(Term::Val(std::mem::replace(slot, v)))
        } else {
            let slot = self.term_at_mut(&path.0).ok_or_else(|| PlugError::NoSuchPosition(path.clone()))?;
            Ok(std::mem::replace(slot, filler))
        }
    }

    /// Moves the subterm at `path` out, leaving a placeholder behind.
    pub fn take_at(&mut self, path: &Path) -> Result<Term, PlugError> {
        if path.ends_in_value_slot() {
            self.replace_at(path, placeholder())
        } else {
            let slot = self.term_at_mut(&path.0).ok_or_else(|| PlugError::NoSuchPosition(path.clone()))?;
            Ok(std::mem::replace(slot, placeholder()))
        }
    }
}

/// Fills the hole of the context `(root, path)` with `filler`, returning a new
/// term. A non-value filler in a value slot is rejected.
pub fn plug(root: &Term, path: &Path, filler: Term) -> Result<Term, PlugError> {
    let mut out = root.clone();
    out.replace_at(path, filler)?;
    Ok(out)
}

/// Like [`plug`] for values; always split-preserving.
pub fn plug_value(root: &Term, path: &Path, filler: Value) -> Result<Term, PlugError> {
    plug(root, path, Term::Val(filler))
}

/// The unique decomposition of a term as a left context around a value.
pub fn split(t: &Term) -> (Path, &Value) {
    let mut path = Vec::new();
    let mut cur = t;
    loop {
        match cur {
            Term::Val(v) => return (Path(path), v),
            Term::Cut { .. } => path.push(Selector::CutBody),
            Term::Subtract { .. } => path.push(Selector::SubBody),
            Term::Derelict { .. } => path.push(Selector::DerBody),
            Term::Unpair { .. } => path.push(Selector::UnpairBody),
        }
        cur = cur.body().expect("binder node");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Var;

    fn sample() -> Term {
        // [\m1 m1 - m2] [m2 > e1, m3] m3
        Term::cut(
            Value::Abs(Var::mult(1), Box::new(Term::var(Var::mult(1)))),
            Var::mult(2),
            Term::subtract(Var::mult(2), Value::Var(Var::exp(1)), Var::mult(3), Term::var(Var::mult(3))),
        )
    }

    #[test]
    fn split_reaches_the_tail() {
        let t = sample();
        let (p, v) = split(&t);
        assert_eq!(p.0, vec![Selector::CutBody, Selector::SubBody]);
        assert_eq!(v, &Value::Var(Var::mult(3)));
        assert!(p.is_left_context());
        assert!(!p.is_cut_context());
    }

    #[test]
    fn navigation_through_value_slots() {
        let t = sample();
        let p = Path(vec![Selector::CutValue, Selector::AbsBody]);
        assert!(matches!(t.at(&p), Some(Node::Term(Term::Val(Value::Var(x)))) if *x == Var::mult(1)));
        let p = Path(vec![Selector::CutBody, Selector::SubValue]);
        assert_eq!(t.at(&p).and_then(|n| n.as_value()), Some(&Value::Var(Var::exp(1))));
        assert!(t.at(&Path(vec![Selector::DerBody])).is_none());
    }

    #[test]
    fn plugging_a_value_slot_requires_a_value() {
        let t = sample();
        let p = Path(vec![Selector::CutBody, Selector::SubValue]);
        let bad = Term::derelict(Var::exp(1), Var::exp(2), Term::var(Var::exp(2)));
        assert_eq!(plug(&t, &p, bad), Err(PlugError::SplitViolation(p.clone())));
        let ok = plug_value(&t, &p, Value::Var(Var::exp(9))).unwrap();
        assert_eq!(ok.at(&p).and_then(|n| n.as_value()), Some(&Value::Var(Var::exp(9))));
    }

    #[test]
    fn plug_inside_a_cut_value() {
        let t = sample();
        let p = Path(vec![Selector::CutValue, Selector::AbsBody]);
        let r = plug(&t, &p, Term::var(Var::mult(7))).unwrap();
        assert_eq!(r.at(&p).and_then(|n| n.as_value()), Some(&Value::Var(Var::mult(7))));
    }

    #[test]
    fn path_order_is_lexicographic() {
        let a = Path(vec![Selector::CutBody]);
        let b = Path(vec![Selector::CutBody, Selector::SubBody]);
        let c = Path(vec![Selector::CutValue]);
        assert!(a < b);
        assert!(c < a);
    }
}

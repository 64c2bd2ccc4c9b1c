//! Proof terms in split form.
//!
//! A term is a spine of binders (cuts, subtractions, derelictions and
//! unpairings) ending in a value. Cut and subtraction carry a value, never an
//! arbitrary term, so every term decomposes uniquely as a left context around
//! a value.

use std::collections::BTreeSet;

use rustc_hash::FxHashMap as HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// The two sorts of variables. Multiplicative variables are used exactly once,
/// exponential ones any number of times.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Kind {
    Multiplicative,
    Exponential,
}

impl Kind {
    pub fn prefix(self) -> char {
        match self {
            Kind::Multiplicative => 'm',
            Kind::Exponential => 'e',
        }
    }
}

/// A variable name. `wildcard` marks an exponential binder written `_`, which
/// has no occurrences; it still carries a unique index so binders stay distinct.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Var {
    pub kind: Kind,
    pub index: u32,
    pub wildcard: bool,
}

impl Var {
    pub const fn mult(index: u32) -> Var {
        Var { kind: Kind::Multiplicative, index, wildcard: false }
    }

    pub const fn exp(index: u32) -> Var {
        Var { kind: Kind::Exponential, index, wildcard: false }
    }

    pub const fn wildcard(index: u32) -> Var {
        Var { kind: Kind::Exponential, index, wildcard: true }
    }

    pub fn is_mult(self) -> bool {
        self.kind == Kind::Multiplicative
    }

    pub fn is_exp(self) -> bool {
        self.kind == Kind::Exponential
    }

    /// Same sort and wildcard flag, new index.
    pub fn with_index(self, index: u32) -> Var {
        Var { index, ..self }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.wildcard {
            f.write_str("_")
        } else {
            write!(f, "{}{}", self.kind.prefix(), self.index)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Value {
    Var(Var),
    Abs(Var, Box<Term>),
    Bang(Box<Term>),
    Pair(Box<Term>, Box<Term>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Val(Value),
    /// `[value - var] body`
    Cut {
        value: Value,
        var: Var,
        body: Box<Term>,
    },
    /// `[head > value, var] body`: left rule for linear implication.
    Subtract {
        head: Var,
        value: Value,
        var: Var,
        body: Box<Term>,
    },
    /// `[head ? var] body`: dereliction of an exponential.
    Derelict {
        head: Var,
        var: Var,
        body: Box<Term>,
    },
    /// `[head @ left, right] body`: left rule for tensor.
    Unpair {
        head: Var,
        left: Var,
        right: Var,
        body: Box<Term>,
    },
}

impl Value {
    /// Sort of the value: abstractions and pairs are multiplicative, boxes are
    /// exponential, a variable has its own sort.
    pub fn kind(&self) -> Kind {
        match self {
            Value::Var(x) => x.kind,
            Value::Abs(..) | Value::Pair(..) => Kind::Multiplicative,
            Value::Bang(_) => Kind::Exponential,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Value::Var(_) => 1,
            Value::Abs(_, t) | Value::Bang(t) => 1 + t.size(),
            Value::Pair(l, r) => 1 + l.size() + r.size(),
        }
    }

    pub fn as_var(&self) -> Option<Var> {
        match self {
            Value::Var(x) => Some(*x),
            _ => None,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut acc = FreeVarCollector::default();
        acc.value(self);
        acc.found
    }

    pub fn into_term(self) -> Term {
        Term::Val(self)
    }
}

impl From<Value> for Term {
    fn from(v: Value) -> Term {
        Term::Val(v)
    }
}

impl Term {
    pub fn var(x: Var) -> Term {
        Term::Val(Value::Var(x))
    }

    pub fn abs(x: Var, body: Term) -> Term {
        Term::Val(Value::Abs(x, Box::new(body)))
    }

    pub fn bang(body: Term) -> Term {
        Term::Val(Value::Bang(Box::new(body)))
    }

    pub fn pair(left: Term, right: Term) -> Term {
        Term::Val(Value::Pair(Box::new(left), Box::new(right)))
    }

    pub fn cut(value: Value, var: Var, body: Term) -> Term {
        Term::Cut { value, var, body: Box::new(body) }
    }

    pub fn subtract(head: Var, value: Value, var: Var, body: Term) -> Term {
        Term::Subtract { head, value, var, body: Box::new(body) }
    }

    pub fn derelict(head: Var, var: Var, body: Term) -> Term {
        Term::Derelict { head, var, body: Box::new(body) }
    }

    pub fn unpair(head: Var, left: Var, right: Var, body: Term) -> Term {
        Term::Unpair { head, left, right, body: Box::new(body) }
    }

    pub fn as_value(&self) -> Option<&Value> {
        match self {
            Term::Val(v) => Some(v),
            _ => None,
        }
    }

    pub fn into_value(self) -> Result<Value, Term> {
        match self {
            Term::Val(v) => Ok(v),
            t => Err(t),
        }
    }

    /// Number of constructors. Binding occurrences are part of their
    /// constructor; every other variable occurrence counts one.
    pub fn size(&self) -> usize {
        let mut total = 0;
        let mut cur = self;
        loop {
            match cur {
                Term::Val(v) => return total + v.size(),
                Term::Cut { value, body, .. } | Term::Subtract { value, body, .. } => {
                    total += 1 + value.size();
                    cur = body;
                }
                Term::Derelict { body, .. } | Term::Unpair { body, .. } => {
                    total += 1;
                    cur = body;
                }
            }
        }
    }

    /// Body of a binder node, `None` on values.
    pub fn body(&self) -> Option<&Term> {
        match self {
            Term::Val(_) => None,
            Term::Cut { body, .. }
            | Term::Subtract { body, .. }
            | Term::Derelict { body, .. }
            | Term::Unpair { body, .. } => Some(body),
        }
    }

    pub fn body_mut(&mut self) -> Option<&mut Term> {
        match self {
            Term::Val(_) => None,
            Term::Cut { body, .. }
            | Term::Subtract { body, .. }
            | Term::Derelict { body, .. }
            | Term::Unpair { body, .. } => Some(body),
        }
    }

    /// The value at the end of the binder spine.
    pub fn tail(&self) -> &Value {
        let mut cur = self;
        while let Some(b) = cur.body() {
            cur = b;
        }
        match cur {
            Term::Val(v) => v,
            _ => unreachable!("spine ends in a value"),
        }
    }

    /// Replaces the value at the end of the spine by `f(value)`, keeping the
    /// left context around it.
    pub fn replace_tail(mut self, f: impl FnOnce(Value) -> Term) -> Term {
        let mut cur = &mut self;
        while cur.body().is_some() {
            cur = cur.body_mut().expect("checked above");
        }
        let old = std::mem::replace(cur, placeholder());
        let Term::Val(v) = old else { unreachable!("spine ends in a value") };
        *cur = f(v);
        self
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut acc = FreeVarCollector::default();
        acc.term(self);
        acc.found
    }

    pub fn mult_free_vars(&self) -> BTreeSet<Var> {
        self.free_vars().into_iter().filter(|x| x.is_mult()).collect()
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn has_free(&self, x: Var) -> bool {
        self.count_free(x) > 0
    }

    /// Number of free occurrences of `x`, heads of left rules included.
    pub fn count_free(&self, x: Var) -> usize {
        let mut acc = FreeVarCollector { target: Some(x), ..Default::default() };
        acc.term(self);
        acc.target_count
    }

    /// Every binder in pre-order.
    pub fn binders(&self) -> Vec<Var> {
        let mut out = Vec::new();
        collect_binders_term(self, &mut out);
        out
    }

    /// Largest index used by any variable, bound or free.
    pub fn max_index(&self) -> u32 {
        let mut m = 0;
        self.visit_vars(&mut |x| m = m.max(x.index));
        m
    }

    /// Calls `f` on every variable, binders and occurrences alike.
    pub fn visit_vars(&self, f: &mut impl FnMut(Var)) {
        let mut cur = self;
        loop {
            match cur {
                Term::Val(v) => return visit_value_vars(v, f),
                Term::Cut { value, var, body } => {
                    visit_value_vars(value, f);
                    f(*var);
                    cur = body;
                }
                Term::Subtract { head, value, var, body } => {
                    f(*head);
                    visit_value_vars(value, f);
                    f(*var);
                    cur = body;
                }
                Term::Derelict { head, var, body } => {
                    f(*head);
                    f(*var);
                    cur = body;
                }
                Term::Unpair { head, left, right, body } => {
                    f(*head);
                    f(*left);
                    f(*right);
                    cur = body;
                }
            }
        }
    }

    /// True when no cut appears anywhere.
    pub fn is_cut_free(&self) -> bool {
        let mut cur = self;
        loop {
            match cur {
                Term::Val(v) => return value_is_cut_free(v),
                Term::Cut { .. } => return false,
                Term::Subtract { value, body, .. } => {
                    if !value_is_cut_free(value) {
                        return false;
                    }
                    cur = body;
                }
                Term::Derelict { body, .. } | Term::Unpair { body, .. } => cur = body,
            }
        }
    }
}

fn value_is_cut_free(v: &Value) -> bool {
    match v {
        Value::Var(_) => true,
        Value::Abs(_, t) | Value::Bang(t) => t.is_cut_free(),
        Value::Pair(l, r) => l.is_cut_free() && r.is_cut_free(),
    }
}

fn visit_value_vars(v: &Value, f: &mut impl FnMut(Var)) {
    match v {
        Value::Var(x) => f(*x),
        Value::Abs(x, t) => {
            f(*x);
            t.visit_vars(f);
        }
        Value::Bang(t) => t.visit_vars(f),
        Value::Pair(l, r) => {
            l.visit_vars(f);
            r.visit_vars(f);
        }
    }
}

fn collect_binders_term(t: &Term, out: &mut Vec<Var>) {
    let mut cur = t;
    loop {
        match cur {
            Term::Val(v) => return collect_binders_value(v, out),
            Term::Cut { value, var, body } => {
                collect_binders_value(value, out);
                out.push(*var);
                cur = body;
            }
            Term::Subtract { value, var, body, .. } => {
                collect_binders_value(value, out);
                out.push(*var);
                cur = body;
            }
            Term::Derelict { var, body, .. } => {
                out.push(*var);
                cur = body;
            }
            Term::Unpair { left, right, body, .. } => {
                out.push(*left);
                out.push(*right);
                cur = body;
            }
        }
    }
}

fn collect_binders_value(v: &Value, out: &mut Vec<Var>) {
    match v {
        Value::Var(_) => {}
        Value::Abs(x, t) => {
            out.push(*x);
            collect_binders_term(t, out);
        }
        Value::Bang(t) => collect_binders_term(t, out),
        Value::Pair(l, r) => {
            collect_binders_term(l, out);
            collect_binders_term(r, out);
        }
    }
}

/// Cheap filler used while moving subterms out of a `&mut Term`.
pub(crate) fn placeholder() -> Term {
    Term::Val(Value::Var(Var::mult(0)))
}

/// Scoped free-variable walk. Binders are tracked with a multiset so that
/// shadowing in non-hygienic input is handled.
#[derive(Default)]
struct FreeVarCollector {
    bound: HashMap<Var, u32>,
    found: BTreeSet<Var>,
    target: Option<Var>,
    target_count: usize,
}

impl FreeVarCollector {
    fn occ(&mut self, x: Var) {
        if self.bound.get(&x).copied().unwrap_or(0) == 0 {
            match self.target {
                Some(t) if t == x => self.target_count += 1,
                Some(_) => {}
                None => {
                    self.found.insert(x);
                }
            }
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
        // Binders along the spine are released after the whole spine is done.
        let mut opened: Vec<Var> = Vec::new();
        let mut cur = t;
        loop {
            match cur {
                Term::Val(v) => {
                    self.value(v);
                    break;
                }
                Term::Cut { value, var, body } => {
                    self.value(value);
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
                    opened.push(*left);
                    opened.push(*right);
                    cur = body;
                }
            }
        }
        for x in opened {
            self.unbind(x);
        }
    }
}

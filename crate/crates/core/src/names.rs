//! Fresh names, hygienic renaming and alpha-equivalence.

use rustc_hash::{FxHashMap as HashMap, FxHashSet as HashSet};

use crate::term::{Kind, Term, Value, Var};

/// Monotone supply of variable indices, shared by both sorts.
#[derive(Clone, Debug)]
pub struct NameSource {
    next: u32,
}

impl NameSource {
    pub fn starting_at(next: u32) -> NameSource {
        NameSource { next }
    }

    /// A source whose names are all unused in `t`.
    pub fn above(t: &Term) -> NameSource {
        NameSource { next: t.max_index() + 1 }
    }

    pub fn peek(&self) -> u32 {
        self.next
    }

    pub fn fresh_index(&mut self) -> u32 {
        let i = self.next;
        self.next += 1;
        i
    }

    pub fn fresh(&mut self, kind: Kind) -> Var {
        let index = self.fresh_index();
        Var { kind, index, wildcard: false }
    }

    /// Fresh variable with the same sort and wildcard flag as `like`.
    pub fn fresh_like(&mut self, like: Var) -> Var {
        like.with_index(self.fresh_index())
    }
}

/// Scoped renaming map used by both renaming passes. `shadowed` undoes
/// bindings in reverse order.
struct Renamer<F: FnMut(Var) -> Var> {
    env: HashMap<Var, Var>,
    shadowed: Vec<(Var, Option<Var>)>,
    pick: F,
}

impl<F: FnMut(Var) -> Var> Renamer<F> {
    fn new(pick: F) -> Renamer<F> {
        Renamer { env: HashMap::default(), shadowed: Vec::new(), pick }
    }

    fn lookup(&self, x: Var) -> Var {
        self.env.get(&x).copied().unwrap_or(x)
    }

    fn bind(&mut self, x: Var) -> Var {
        let y = (self.pick)(x);
        let previous = self.env.insert(x, y);
        self.shadowed.push((x, previous));
        y
    }

    fn unbind(&mut self, x: Var) {
        let (bound, previous) = self.shadowed.pop().expect("unbind without bind");
        debug_assert_eq!(bound, x);
        match previous {
            Some(y) => self.env.insert(x, y),
            None => self.env.remove(&x),
        };
    }

    fn value(&mut self, v: &Value) -> Value {
        match v {
            Value::Var(x) => Value::Var(self.lookup(*x)),
            Value::Abs(x, t) => {
                let y = self.bind(*x);
                let body = self.term(t);
                self.unbind(*x);
                Value::Abs(y, Box::new(body))
            }
            Value::Bang(t) => Value::Bang(Box::new(self.term(t))),
            Value::Pair(l, r) => Value::Pair(Box::new(self.term(l)), Box::new(self.term(r))),
        }
    }

    fn term(&mut self, t: &Term) -> Term {
        // Rename the spine front to back, then rebuild it back to front.
        enum Frame {
            Cut(Value, Var),
            Subtract(Var, Value, Var),
            Derelict(Var, Var),
            Unpair(Var, Var, Var),
        }
        let mut frames = Vec::new();
        let mut opened = Vec::new();
        let mut cur = t;
        let tail = loop {
            match cur {
                Term::Val(v) => break self.value(v),
                Term::Cut { value, var, body } => {
                    let v = self.value(value);
                    let y = self.bind(*var);
                    opened.push(*var);
                    frames.push(Frame::Cut(v, y));
                    cur = body;
                }
                Term::Subtract { head, value, var, body } => {
                    let h = self.lookup(*head);
                    let v = self.value(value);
                    let y = self.bind(*var);
                    opened.push(*var);
                    frames.push(Frame::Subtract(h, v, y));
                    cur = body;
                }
                Term::Derelict { head, var, body } => {
                    let h = self.lookup(*head);
                    let y = self.bind(*var);
                    opened.push(*var);
                    frames.push(Frame::Derelict(h, y));
                    cur = body;
                }
                Term::Unpair { head, left, right, body } => {
                    let h = self.lookup(*head);
                    let l = self.bind(*left);
                    let r = self.bind(*right);
                    opened.push(*left);
                    opened.push(*right);
                    frames.push(Frame::Unpair(h, l, r));
                    cur = body;
                }
            }
        };
        for x in opened.into_iter().rev() {
            self.unbind(x);
        }
        let mut out = Term::Val(tail);
        for f in frames.into_iter().rev() {
            out = match f {
                Frame::Cut(v, x) => Term::cut(v, x, out),
                Frame::Subtract(h, v, x) => Term::subtract(h, v, x, out),
                Frame::Derelict(h, x) => Term::derelict(h, x, out),
                Frame::Unpair(h, l, r) => Term::unpair(h, l, r, out),
            };
        }
        out
    }
}

/// Renames every bound variable of `t` to a fresh one; free variables are
/// kept. The result is well-bound whatever the input.
pub fn rename_fresh(t: &Term, names: &mut NameSource) -> Term {
    let mut r = Renamer::new(|x: Var| names.fresh_like(x));
    r.term(t)
}

pub fn rename_fresh_value(v: &Value, names: &mut NameSource) -> Value {
    let mut r = Renamer::new(|x: Var| names.fresh_like(x));
    r.value(v)
}

/// Canonical representative of the alpha class of `t`: binders are numbered in
/// pre-order starting above every free index, and the wildcard flag is dropped.
pub fn alpha_canonical(t: &Term) -> Term {
    let base = t.free_vars().iter().map(|x| x.index).max().map_or(1, |m| m + 1);
    let mut next = base;
    let mut r = Renamer::new(|x: Var| {
        let y = Var { kind: x.kind, index: next, wildcard: false };
        next += 1;
        y
    });
    r.term(t)
}

pub fn alpha_eq(a: &Term, b: &Term) -> bool {
    alpha_canonical(a) == alpha_canonical(b)
}

/// Applies `f` to every variable, binding or not, without any scoping.
pub fn map_vars(t: Term, f: &mut impl FnMut(Var) -> Var) -> Term {
    enum Frame {
        Cut(Value, Var),
        Subtract(Var, Value, Var),
        Derelict(Var, Var),
        Unpair(Var, Var, Var),
    }
    let mut frames = Vec::new();
    let mut cur = t;
    let tail = loop {
        cur = match cur {
            Term::Val(v) => break map_value_vars(v, f),
            Term::Cut { value, var, body } => {
                frames.push(Frame::Cut(map_value_vars(value, f), f(var)));
                *body
            }
            Term::Subtract { head, value, var, body } => {
                let h = f(head);
                frames.push(Frame::Subtract(h, map_value_vars(value, f), f(var)));
                *body
            }
            Term::Derelict { head, var, body } => {
                frames.push(Frame::Derelict(f(head), f(var)));
                *body
            }
            Term::Unpair { head, left, right, body } => {
                frames.push(Frame::Unpair(f(head), f(left), f(right)));
                *body
            }
        };
    };
    let mut out = Term::Val(tail);
    for fr in frames.into_iter().rev() {
        out = match fr {
            Frame::Cut(v, x) => Term::cut(v, x, out),
            Frame::Subtract(h, v, x) => Term::subtract(h, v, x, out),
            Frame::Derelict(h, x) => Term::derelict(h, x, out),
            Frame::Unpair(h, l, r) => Term::unpair(h, l, r, out),
        };
    }
    out
}

fn map_value_vars(v: Value, f: &mut impl FnMut(Var) -> Var) -> Value {
    match v {
        Value::Var(x) => Value::Var(f(x)),
        Value::Abs(x, t) => {
            let y = f(x);
            Value::Abs(y, Box::new(map_vars(*t, f)))
        }
        Value::Bang(t) => Value::Bang(Box::new(map_vars(*t, f))),
        Value::Pair(l, r) => {
            let l = map_vars(*l, f);
            Value::Pair(Box::new(l), Box::new(map_vars(*r, f)))
        }
    }
}

/// Binders pairwise distinct and disjoint from the free variables.
pub fn is_well_bound(t: &Term) -> bool {
    let mut seen = HashSet::default();
    for x in t.binders() {
        if !seen.insert(x) {
            return false;
        }
    }
    t.free_vars().iter().all(|x| !seen.contains(x))
}

/// `t` itself when already well-bound, otherwise a fresh renaming.
pub fn ensure_well_bound(t: &Term, names: &mut NameSource) -> Term {
    if is_well_bound(t) {
        t.clone()
    } else {
        rename_fresh(t, names)
    }
}

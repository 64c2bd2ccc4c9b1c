//! Test corpora: random proper terms and exhaustive enumeration by size.
//!
//! Both generators thread the multiplicative variables that must be used
//! exactly once, so every term they produce is proper by construction.
//! Typability is a filter on top.

use std::borrow::Cow;

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use crate::names::{rename_fresh, NameSource};
use crate::term::{Kind, Term, Value, Var};
use crate::typing::is_typable;

/// Shape of the generated terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorpusConfig {
    pub max_size: usize,
    /// Produce closed terms only.
    pub closed: bool,
    /// Allow pairs and unpairings.
    pub tensor: bool,
}

impl Default for CorpusConfig {
    fn default() -> CorpusConfig {
        CorpusConfig { max_size: 30, closed: false, tensor: true }
    }
}

const TYPABLE_RETRIES: usize = 64;

/// Seeded source of random proper terms.
pub struct RandomTerms {
    rng: StdRng,
    names: NameSource,
    config: CorpusConfig,
}

impl RandomTerms {
    pub fn new(seed: u64, config: CorpusConfig) -> RandomTerms {
        RandomTerms { rng: StdRng::seed_from_u64(seed), names: NameSource::starting_at(1), config }
    }

    /// A random proper, well-bound term of size at most `max_size`.
    pub fn proper(&mut self) -> Term {
        let budget = self.budget();
        self.proper_near(budget)
    }

    /// A random typable term. The size budget is drawn first and kept across
    /// retries, so that the filter does not skew the corpus towards tiny terms.
    pub fn typable(&mut self) -> Term {
        loop {
            let budget = self.budget();
            for _ in 0..TYPABLE_RETRIES {
                let t = self.proper_near(budget);
                if 2 * t.size() >= budget && is_typable(&t) {
                    return t;
                }
            }
        }
    }

    fn budget(&mut self) -> usize {
        self.rng.random_range(3..=self.config.max_size.max(3))
    }

    fn proper_near(&mut self, budget: usize) -> Term {
        loop {
            self.names = NameSource::starting_at(1);
            let (lin, exps) = if self.config.closed {
                (Vec::new(), Vec::new())
            } else {
                let lin =
                    if self.rng.random_bool(0.3) { vec![self.names.fresh(Kind::Multiplicative)] } else { Vec::new() };
                (lin, vec![self.names.fresh(Kind::Exponential)])
            };
            let t = self.term(budget, lin, exps);
            if t.size() <= self.config.max_size {
                return t;
            }
        }
    }

    fn fresh(&mut self, kind: Kind) -> Var {
        self.names.fresh(kind)
    }

    fn any_kind(&mut self) -> Kind {
        if self.rng.random_bool(0.5) {
            Kind::Multiplicative
        } else {
            Kind::Exponential
        }
    }

    fn split(&mut self, lin: Vec<Var>) -> (Vec<Var>, Vec<Var>) {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for x in lin {
            if self.rng.random_bool(0.5) {
                a.push(x)
            } else {
                b.push(x)
            }
        }
        (a, b)
    }

    fn pick(&mut self, xs: &[Var]) -> Var {
        xs[self.rng.random_range(0..xs.len())]
    }

    fn bind(&mut self, x: Var, lin: &mut Vec<Var>, exps: &mut Vec<Var>) {
        if x.is_mult() {
            lin.push(x)
        } else {
            exps.push(x)
        }
    }

    fn term(&mut self, budget: usize, mut lin: Vec<Var>, mut exps: Vec<Var>) -> Term {
        let small = budget <= lin.len().max(1) + 1;
        // 0 value, 1 cut, 2 subtraction, 3 dereliction, 4 unpairing
        let choice = if small {
            if lin.len() <= 1 {
                0
            } else {
                2
            }
        } else {
            let weights = [
                if budget > 6 { 1 } else { 3 },
                6,
                if lin.is_empty() { 0 } else { 3 },
                if exps.is_empty() { 0 } else { 2 },
                if self.config.tensor && !lin.is_empty() { 1 } else { 0 },
            ];
            let total: u32 = weights.iter().sum();
            let mut r = self.rng.random_range(0..total);
            let mut i = 0;
            while r >= weights[i] {
                r -= weights[i];
                i += 1;
            }
            i
        };
        let rest = budget.saturating_sub(1);
        match choice {
            1 => {
                let (a, b) = self.split(lin);
                let share = self.rng.random_range(1..=rest.max(2) - 1);
                let v = self.value(share, a, exps.clone());
                let x = self.fresh(v.kind());
                let (mut lin, mut exps) = (b, exps);
                self.bind(x, &mut lin, &mut exps);
                Term::cut(v, x, self.term(rest.saturating_sub(share), lin, exps))
            }
            2 => {
                let head = lin.swap_remove(self.rng.random_range(0..lin.len()));
                let (a, b) = self.split(lin);
                let share = self.rng.random_range(1..=rest.max(2) - 1);
                let v = self.value(share, a, exps.clone());
                let k = self.any_kind();
                let x = self.fresh(k);
                let (mut lin, mut exps) = (b, exps);
                self.bind(x, &mut lin, &mut exps);
                Term::subtract(head, v, x, self.term(rest.saturating_sub(share), lin, exps))
            }
            3 => {
                let head = self.pick(&exps);
                let k = self.any_kind();
                let x = self.fresh(k);
                self.bind(x, &mut lin, &mut exps);
                Term::derelict(head, x, self.term(rest, lin, exps))
            }
            4 => {
                let head = lin.swap_remove(self.rng.random_range(0..lin.len()));
                let l = self.fresh(Kind::Multiplicative);
                let r = self.fresh(Kind::Multiplicative);
                lin.push(l);
                lin.push(r);
                Term::unpair(head, l, r, self.term(rest, lin, exps))
            }
            _ => Term::Val(self.value(budget, lin, exps)),
        }
    }

    fn value(&mut self, budget: usize, lin: Vec<Var>, mut exps: Vec<Var>) -> Value {
        match lin.len() {
            0 if budget <= 1 && !exps.is_empty() => return Value::Var(self.pick(&exps)),
            1 if budget <= 1 || self.rng.random_bool(0.25) => return Value::Var(lin[0]),
            _ => {}
        }
        let rest = budget.saturating_sub(1).max(1);
        let mut options = vec![0u8];
        if lin.is_empty() {
            options.push(1);
            if !exps.is_empty() {
                options.push(2);
            }
        }
        if self.config.tensor && lin.len() >= 2 && rest >= 2 {
            options.push(3);
        }
        match options[self.rng.random_range(0..options.len())] {
            1 => Value::Bang(Box::new(self.term(rest, Vec::new(), exps))),
            2 => Value::Var(self.pick(&exps)),
            3 => {
                let (a, b) = self.split(lin);
                let share = self.rng.random_range(1..rest);
                let l = self.term(share, a, exps.clone());
                Value::Pair(Box::new(l), Box::new(self.term(rest - share, b, exps)))
            }
            _ => {
                let k = self.any_kind();
                let x = self.fresh(k);
                let mut lin = lin;
                self.bind(x, &mut lin, &mut exps);
                Value::Abs(x, Box::new(self.term(rest, lin, exps)))
            }
        }
    }
}

/// Which free variables an enumeration may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Universe {
    /// One free exponential variable, usable any number of times.
    pub free_exponential: bool,
    /// One free multiplicative variable that must occur exactly once.
    pub free_linear: bool,
    pub tensor: bool,
}

impl Universe {
    pub const CLOSED: Universe = Universe { free_exponential: false, free_linear: false, tensor: true };
}

/// Calls `f` on every proper term of exactly `size` constructors in the
/// universe, once per renaming class. Terms are well-bound.
pub fn for_each_term(size: usize, universe: Universe, f: &mut dyn FnMut(Term)) {
    for_each_term_where(size, universe, &|_| true, f)
}

/// [`for_each_term`] restricted to terms passing `keep`, which sees them
/// before renaming. Binder names in what `keep` sees may repeat across
/// siblings.
pub fn for_each_term_where(size: usize, universe: Universe, keep: &dyn Fn(&Term) -> bool, f: &mut dyn FnMut(Term)) {
    enumerate_with(size, universe, Cuts::Any, keep, f)
}

/// [`for_each_term_where`] over the terms that contain a cut. Cut-free terms
/// are never built, which is most of the universe.
pub fn for_each_term_with_cut(size: usize, universe: Universe, keep: &dyn Fn(&Term) -> bool, f: &mut dyn FnMut(Term)) {
    enumerate_with(size, universe, Cuts::Required, keep, f)
}

fn enumerate_with(size: usize, universe: Universe, cuts: Cuts, keep: &dyn Fn(&Term) -> bool, f: &mut dyn FnMut(Term)) {
    let lin = if universe.free_linear { vec![Var::mult(2)] } else { Vec::new() };
    let exps = if universe.free_exponential { vec![Var::exp(1)] } else { Vec::new() };
    let e = Enumerator { tensor: universe.tensor };
    e.terms(size, &lin, &exps, 3, cuts, &mut |t| {
        if keep(&t) {
            let mut names = NameSource::starting_at(3);
            f(rename_fresh(&t, &mut names))
        }
    });
}

/// The terms of [`for_each_term`] with a free exponential variable, collected.
pub fn enumerate(size: usize, open_linear: bool, tensor: bool) -> Vec<Term> {
    let mut out = Vec::new();
    let universe = Universe { free_exponential: true, free_linear: open_linear, tensor };
    for_each_term(size, universe, &mut |t| out.push(t));
    out
}

struct Enumerator {
    tensor: bool,
}

/// Whether the enumerated terms must, may or must not contain a cut.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Cuts {
    Any,
    Required,
    Forbidden,
}

impl Cuts {
    /// Demands on two children, covering each combination once.
    fn split(self) -> &'static [(Cuts, Cuts)] {
        match self {
            Cuts::Any => &[(Cuts::Any, Cuts::Any)],
            Cuts::Required => &[(Cuts::Required, Cuts::Any), (Cuts::Forbidden, Cuts::Required)],
            Cuts::Forbidden => &[(Cuts::Forbidden, Cuts::Forbidden)],
        }
    }
}

/// Ordered splits of `lin` into two parts.
fn splits(lin: &[Var]) -> Vec<(Vec<Var>, Vec<Var>)> {
    let n = lin.len();
    (0u32..1 << n)
        .map(|mask| {
            let mut a = Vec::new();
            let mut b = Vec::new();
            for (i, x) in lin.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    a.push(*x)
                } else {
                    b.push(*x)
                }
            }
            (a, b)
        })
        .collect()
}

fn with(xs: &[Var], x: Var) -> Vec<Var> {
    let mut v = Vec::with_capacity(xs.len() + 2);
    v.extend_from_slice(xs);
    v.push(x);
    v
}

fn without(xs: &[Var], i: usize) -> Vec<Var> {
    let mut v = xs.to_vec();
    v.remove(i);
    v
}

/// Scope of the body under a new binder `x`.
fn scope_with<'a>(lin: &'a [Var], exps: &'a [Var], x: Var) -> (Cow<'a, [Var]>, Cow<'a, [Var]>) {
    if x.is_mult() {
        (Cow::Owned(with(lin, x)), Cow::Borrowed(exps))
    } else {
        (Cow::Borrowed(lin), Cow::Owned(with(exps, x)))
    }
}

const KINDS: [Kind; 2] = [Kind::Multiplicative, Kind::Exponential];

impl Enumerator {
    /// Binder indices follow the depth, so siblings may repeat a name; the
    /// caller renames.
    fn terms(&self, size: usize, lin: &[Var], exps: &[Var], next: u32, cuts: Cuts, f: &mut dyn FnMut(Term)) {
        // a term needs at least one node per linear variable
        if size == 0 || size < lin.len() {
            return;
        }
        self.values(size, lin, exps, next, cuts, &mut |v| f(Term::Val(v)));
        let rest = size - 1;
        if cuts != Cuts::Forbidden {
            for (a, b) in splits(lin) {
                for vs in 1..rest {
                    self.values(vs, &a, exps, next, Cuts::Any, &mut |v| {
                        let x = Var { kind: v.kind(), index: next, wildcard: false };
                        let (bl, be) = scope_with(&b, exps, x);
                        self.terms(rest - vs, &bl, &be, next + 1, Cuts::Any, &mut |t| f(Term::cut(v.clone(), x, t)));
                    });
                }
            }
        }
        for h in 0..lin.len() {
            let others = without(lin, h);
            for (a, b) in splits(&others) {
                for vs in 1..rest {
                    for &(in_value, in_body) in cuts.split() {
                        self.values(vs, &a, exps, next, in_value, &mut |v| {
                            for kind in KINDS {
                                let x = Var { kind, index: next, wildcard: false };
                                let (bl, be) = scope_with(&b, exps, x);
                                self.terms(rest - vs, &bl, &be, next + 1, in_body, &mut |t| {
                                    f(Term::subtract(lin[h], v.clone(), x, t))
                                });
                            }
                        });
                    }
                }
            }
        }
        for head in exps {
            for kind in KINDS {
                let x = Var { kind, index: next, wildcard: false };
                let (bl, be) = scope_with(lin, exps, x);
                self.terms(rest, &bl, &be, next + 1, cuts, &mut |t| f(Term::derelict(*head, x, t)));
            }
        }
        if self.tensor {
            for h in 0..lin.len() {
                let l = Var::mult(next);
                let r = Var::mult(next + 1);
                let bl = with(&with(&without(lin, h), l), r);
                self.terms(rest, &bl, exps, next + 2, cuts, &mut |t| f(Term::unpair(lin[h], l, r, t)));
            }
        }
    }

    fn values(&self, size: usize, lin: &[Var], exps: &[Var], next: u32, cuts: Cuts, f: &mut dyn FnMut(Value)) {
        if size == 0 {
            return;
        }
        if size == 1 {
            match lin {
                _ if cuts == Cuts::Required => {}
                [] => exps.iter().for_each(|e| f(Value::Var(*e))),
                [m] => f(Value::Var(*m)),
                _ => {}
            }
            return;
        }
        let rest = size - 1;
        for kind in KINDS {
            let x = Var { kind, index: next, wildcard: false };
            let (bl, be) = scope_with(lin, exps, x);
            self.terms(rest, &bl, &be, next + 1, cuts, &mut |t| f(Value::Abs(x, Box::new(t))));
        }
        if lin.is_empty() {
            self.terms(rest, &[], exps, next, cuts, &mut |t| f(Value::Bang(Box::new(t))));
        }
        if self.tensor {
            for (a, b) in splits(lin) {
                for ls in 1..rest {
                    for &(in_left, in_right) in cuts.split() {
                        self.terms(ls, &a, exps, next, in_left, &mut |l| {
                            self.terms(rest - ls, &b, exps, next, in_right, &mut |r| {
                                f(Value::Pair(Box::new(l.clone()), Box::new(r)))
                            });
                        });
                    }
                }
            }
        }
    }
}

//! Type inference for intuitionistic multiplicative exponential linear logic.
//!
//! Every variable gets a formula variable; exponential variables are forced to
//! box formulas. Equations come from the rules, multiplicative linearity is a
//! use count, and the side condition of the multiplicative axiom (its formula
//! is not a box) is checked once the equations are solved. Unsolved formula
//! variables in the result stand for any non-box formula where they are
//! constrained, and for any formula otherwise.

use std::collections::{BTreeMap, BTreeSet};

use rustc_hash::FxHashMap as HashMap;
use std::fmt;

use thiserror::Error;

use crate::inspect::{walk, Walk};
use crate::path::{Node, Path, Selector};
use crate::proper::{check_proper, ImproperTerm};
use crate::term::{Kind, Term, Value, Var};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    /// A multiplicative atom.
    Atom(u32),
    Tensor(Box<Formula>, Box<Formula>),
    Lolli(Box<Formula>, Box<Formula>),
    Bang(Box<Formula>),
    /// An unknown, to be solved.
    Meta(u32),
}

impl Formula {
    pub fn lolli(a: Formula, b: Formula) -> Formula {
        Formula::Lolli(Box::new(a), Box::new(b))
    }
    pub fn tensor(a: Formula, b: Formula) -> Formula {
        Formula::Tensor(Box::new(a), Box::new(b))
    }
    pub fn bang(a: Formula) -> Formula {
        Formula::Bang(Box::new(a))
    }
    pub fn is_bang(&self) -> bool {
        matches!(self, Formula::Bang(_))
    }

    fn metas(&self, out: &mut Vec<u32>) {
        match self {
            Formula::Meta(i) => {
                if !out.contains(i) {
                    out.push(*i)
                }
            }
            Formula::Atom(_) => {}
            Formula::Bang(a) => a.metas(out),
            Formula::Tensor(a, b) | Formula::Lolli(a, b) => {
                a.metas(out);
                b.metas(out);
            }
        }
    }

    fn rename_metas(&self, map: &HashMap<u32, u32>) -> Formula {
        match self {
            Formula::Meta(i) => Formula::Meta(map.get(i).copied().unwrap_or(*i)),
            Formula::Atom(a) => Formula::Atom(*a),
            Formula::Bang(a) => Formula::bang(a.rename_metas(map)),
            Formula::Tensor(a, b) => Formula::tensor(a.rename_metas(map), b.rename_metas(map)),
            Formula::Lolli(a, b) => Formula::lolli(a.rename_metas(map), b.rename_metas(map)),
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn atomic(g: &Formula) -> bool {
            matches!(g, Formula::Atom(_) | Formula::Meta(_) | Formula::Bang(_))
        }
        fn wrap(f: &mut fmt::Formatter<'_>, g: &Formula) -> fmt::Result {
            if atomic(g) {
                write!(f, "{g}")
            } else {
                write!(f, "({g})")
            }
        }
        match self {
            Formula::Atom(i) => write!(f, "Xm{i}"),
            Formula::Meta(i) => write!(f, "X{i}"),
            Formula::Bang(a) => {
                f.write_str("!")?;
                wrap(f, a)
            }
            Formula::Tensor(a, b) => {
                wrap(f, a)?;
                f.write_str(" * ")?;
                wrap(f, b)
            }
            Formula::Lolli(a, b) => {
                wrap(f, a)?;
                f.write_str(" -o ")?;
                // right associative
                match b.as_ref() {
                    Formula::Lolli(..) => write!(f, "{b}"),
                    _ => wrap(f, b),
                }
            }
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TypeError {
    #[error(transparent)]
    NotProper(#[from] ImproperTerm),
    #[error("cannot unify {left} with {right} at {position}")]
    UnificationFailure { position: Path, left: Formula, right: Formula },
    #[error("cyclic formula at {position}")]
    OccursCheck { position: Path },
    #[error("multiplicative variable {var} is used {uses} times")]
    LinearityViolation { var: Var, uses: usize },
    #[error("{var} would need a box formula at {position}")]
    BangShapeViolation { position: Path, var: Var },
}

impl TypeError {
    pub fn position(&self) -> Option<&Path> {
        match self {
            TypeError::NotProper(e) => Some(&e.position),
            TypeError::UnificationFailure { position, .. }
            | TypeError::OccursCheck { position }
            | TypeError::BangShapeViolation { position, .. } => Some(position),
            TypeError::LinearityViolation { .. } => None,
        }
    }
}

/// A principal typing: free variables, the formula of the term, and the
/// unknowns that must not be instantiated by a box.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Typing {
    pub context: BTreeMap<Var, Formula>,
    pub formula: Formula,
    pub not_bang: BTreeSet<u32>,
}

impl fmt::Display for Typing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ctx: Vec<String> = self.context.iter().map(|(x, a)| format!("{x} : {a}")).collect();
        write!(f, "{} |- {}", ctx.join(", "), self.formula)?;
        if !self.not_bang.is_empty() {
            let ms: Vec<String> = self.not_bang.iter().map(|i| format!("X{i}")).collect();
            write!(f, "  where {} not boxes", ms.join(", "))?;
        }
        Ok(())
    }
}

pub fn infer_type(t: &Term) -> Result<Typing, TypeError> {
    infer_type_with(t, &BTreeMap::new())
}

/// Infers a typing, with optional formulas for some free variables.
pub fn infer_type_with(t: &Term, assumptions: &BTreeMap<Var, Formula>) -> Result<Typing, TypeError> {
    check_proper(t)?;
    check_linear(t)?;
    let mut inf = Inference::default();
    for (x, a) in assumptions {
        let m = inf.var_type(*x);
        inf.unify(m, a.clone(), &[])?;
    }
    let result = inf.term(t)?;
    // side condition of the multiplicative axiom
    let mut not_bang = BTreeSet::new();
    for (x, pos) in &inf.axioms {
        let ty = inf.resolve(&Formula::Meta(inf.vars[x]));
        match ty {
            Formula::Bang(_) => return Err(TypeError::BangShapeViolation { position: pos.clone(), var: *x }),
            Formula::Meta(i) => {
                not_bang.insert(i);
            }
            _ => {}
        }
    }
    let free = t.free_vars();
    let raw_ctx: Vec<(Var, Formula)> = free.iter().map(|x| (*x, inf.resolve(&Formula::Meta(inf.vars[x])))).collect();
    let raw_ty = inf.resolve(&result);
    // number the remaining unknowns by first appearance
    let mut order = Vec::new();
    raw_ty.metas(&mut order);
    for (_, a) in &raw_ctx {
        a.metas(&mut order);
    }
    let map: HashMap<u32, u32> = order.iter().enumerate().map(|(i, m)| (*m, i as u32 + 1)).collect();
    Ok(Typing {
        context: raw_ctx.into_iter().map(|(x, a)| (x, a.rename_metas(&map))).collect(),
        formula: raw_ty.rename_metas(&map),
        not_bang: not_bang.into_iter().filter_map(|i| map.get(&i).copied()).collect(),
    })
}

/// Each multiplicative variable, bound or free, is used exactly once.
fn check_linear(t: &Term) -> Result<(), TypeError> {
    let mut uses: BTreeMap<Var, usize> = BTreeMap::new();
    for x in t.binders() {
        if x.is_mult() {
            uses.insert(x, 0);
        }
    }
    walk(t, |_, node| {
        let used = match node.as_value() {
            Some(Value::Var(x)) => Some(*x),
            Some(_) => None,
            None => match node {
                Node::Term(Term::Subtract { head, .. }) | Node::Term(Term::Unpair { head, .. }) => Some(*head),
                _ => None,
            },
        };
        if let Some(x) = used.filter(|x| x.is_mult()) {
            *uses.entry(x).or_insert(0) += 1;
        }
        Walk::Continue
    });
    match uses.into_iter().find(|(_, n)| *n != 1) {
        Some((var, uses)) => Err(TypeError::LinearityViolation { var, uses }),
        None => Ok(()),
    }
}

pub fn is_typable(t: &Term) -> bool {
    infer_type(t).is_ok()
}

#[derive(Default)]
struct Inference {
    subst: Vec<Option<Formula>>,
    vars: HashMap<Var, u32>,
    axioms: Vec<(Var, Path)>,
    path: Vec<Selector>,
}

impl Inference {
    fn fresh(&mut self) -> Formula {
        self.subst.push(None);
        Formula::Meta(self.subst.len() as u32 - 1)
    }

    /// The formula variable of `x`; exponential variables get `!X`.
    fn var_type(&mut self, x: Var) -> Formula {
        if let Some(i) = self.vars.get(&x) {
            return Formula::Meta(*i);
        }
        let Formula::Meta(i) = self.fresh() else { unreachable!() };
        self.vars.insert(x, i);
        if x.kind == Kind::Exponential {
            let inner = self.fresh();
            self.subst[i as usize] = Some(Formula::bang(inner));
        }
        Formula::Meta(i)
    }

    fn use_var(&mut self, x: Var) -> Formula {
        self.var_type(x)
    }

    fn resolve(&self, a: &Formula) -> Formula {
        match a {
            Formula::Meta(i) => match &self.subst[*i as usize] {
                Some(b) => self.resolve(b),
                None => a.clone(),
            },
            Formula::Atom(_) => a.clone(),
            Formula::Bang(b) => Formula::bang(self.resolve(b)),
            Formula::Tensor(b, c) => Formula::tensor(self.resolve(b), self.resolve(c)),
            Formula::Lolli(b, c) => Formula::lolli(self.resolve(b), self.resolve(c)),
        }
    }

    fn shallow(&self, a: Formula) -> Formula {
        let mut a = a;
        while let Formula::Meta(i) = a {
            match &self.subst[i as usize] {
                Some(b) => a = b.clone(),
                None => break,
            }
        }
        a
    }

    fn occurs(&self, i: u32, a: &Formula) -> bool {
        match self.shallow(a.clone()) {
            Formula::Meta(j) => i == j,
            Formula::Atom(_) => false,
            Formula::Bang(b) => self.occurs(i, &b),
            Formula::Tensor(b, c) | Formula::Lolli(b, c) => self.occurs(i, &b) || self.occurs(i, &c),
        }
    }

    fn unify(&mut self, a: Formula, b: Formula, at: &[Selector]) -> Result<(), TypeError> {
        let a = self.shallow(a);
        let b = self.shallow(b);
        match (a, b) {
            (Formula::Meta(i), Formula::Meta(j)) if i == j => Ok(()),
            (Formula::Meta(i), other) | (other, Formula::Meta(i)) => {
                if self.occurs(i, &other) {
                    return Err(TypeError::OccursCheck { position: Path(at.to_vec()) });
                }
                self.subst[i as usize] = Some(other);
                Ok(())
            }
            (Formula::Atom(x), Formula::Atom(y)) if x == y => Ok(()),
            (Formula::Bang(x), Formula::Bang(y)) => self.unify(*x, *y, at),
            (Formula::Tensor(a1, b1), Formula::Tensor(a2, b2)) | (Formula::Lolli(a1, b1), Formula::Lolli(a2, b2)) => {
                self.unify(*a1, *a2, at)?;
                self.unify(*b1, *b2, at)
            }
            (l, r) => Err(TypeError::UnificationFailure {
                position: Path(at.to_vec()),
                left: self.resolve(&l),
                right: self.resolve(&r),
            }),
        }
    }

    fn eq(&mut self, a: Formula, b: Formula) -> Result<(), TypeError> {
        let at = self.path.clone();
        self.unify(a, b, &at)
    }

    fn under<T>(&mut self, s: Selector, f: impl FnOnce(&mut Self) -> T) -> T {
        self.path.push(s);
        let r = f(self);
        self.path.pop();
        r
    }

    fn value(&mut self, v: &Value) -> Result<Formula, TypeError> {
        match v {
            Value::Var(x) => {
                if x.is_mult() {
                    self.axioms.push((*x, Path(self.path.clone())));
                }
                Ok(self.use_var(*x))
            }
            Value::Abs(x, t) => {
                let a = self.var_type(*x);
                let b = self.under(Selector::AbsBody, |s| s.term(t))?;
                Ok(Formula::lolli(a, b))
            }
            Value::Bang(t) => {
                let a = self.under(Selector::BangBody, |s| s.term(t))?;
                Ok(Formula::bang(a))
            }
            Value::Pair(l, r) => {
                let a = self.under(Selector::PairLeft, |s| s.term(l))?;
                let b = self.under(Selector::PairRight, |s| s.term(r))?;
                Ok(Formula::tensor(a, b))
            }
        }
    }

    fn term(&mut self, t: &Term) -> Result<Formula, TypeError> {
        let start = self.path.len();
        let mut cur = t;
        let result = loop {
            match cur {
                Term::Val(v) => break self.value(v),
                Term::Cut { value, var, body } => {
                    let a = self.under(Selector::CutValue, |s| s.value(value))?;
                    let x = self.var_type(*var);
                    self.eq(a, x)?;
                    self.path.push(Selector::CutBody);
                    cur = body;
                }
                Term::Subtract { head, value, var, body } => {
                    let h = self.use_var(*head);
                    let a = self.under(Selector::SubValue, |s| s.value(value))?;
                    let x = self.var_type(*var);
                    self.eq(h, Formula::lolli(a, x))?;
                    self.path.push(Selector::SubBody);
                    cur = body;
                }
                Term::Derelict { head, var, body } => {
                    let h = self.use_var(*head);
                    let x = self.var_type(*var);
                    self.eq(h, Formula::bang(x))?;
                    self.path.push(Selector::DerBody);
                    cur = body;
                }
                Term::Unpair { head, left, right, body } => {
                    let h = self.use_var(*head);
                    let l = self.var_type(*left);
                    let r = self.var_type(*right);
                    self.eq(h, Formula::tensor(l, r))?;
                    self.path.push(Selector::UnpairBody);
                    cur = body;
                }
            }
        };
        self.path.truncate(start);
        result
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    fn ty(src: &str) -> Result<Typing, TypeError> {
        infer_type(&parse(src).unwrap())
    }

    #[test]
    fn boxed_identity() {
        let t = ty("!(\\m1 m1)").unwrap();
        assert_eq!(t.formula.to_string(), "!(X1 -o X1)");
        assert_eq!(t.not_bang, BTreeSet::from([1]));
    }

    #[test]
    fn box_mismatch_is_rejected() {
        // a box cut against a multiplicative variable used as an axiom
        let err = ty("[!\\m1m1 - m3] m3").unwrap_err();
        assert!(matches!(err, TypeError::BangShapeViolation { .. }), "{err:?}");
        let err = ty("\\m2 [!\\m1 m1 - e3] e3").unwrap_err();
        assert!(matches!(err, TypeError::NotProper(_)), "{err:?}");
    }

    #[test]
    fn self_application_of_one_box_is_cyclic() {
        // both copies of the boxed identity share one formula
        let err = ty("[!\\m1m1-e1][e1?m2][e1?m3][m2>m3,m4]m4").unwrap_err();
        assert!(matches!(err, TypeError::OccursCheck { .. }), "{err:?}");
        let t = ty("[!\\m1m1-e1][!\\m5m5-e2][e1?m2][e2?m3][m2>m3,m4]m4").unwrap();
        assert_eq!(t.formula.to_string(), "X1 -o X1");
    }

    #[test]
    fn connective_mismatch() {
        let err = ty("[\\m1 m1 - m2][m2@m3,m4]<m3,m4>").unwrap_err();
        assert!(matches!(err, TypeError::UnificationFailure { .. }), "{err:?}");
    }

    #[test]
    fn linearity_through_head_and_value() {
        let err = ty("\\m1 [m1>m1,m2]m2").unwrap_err();
        assert!(matches!(err, TypeError::LinearityViolation { .. }), "{err:?}");
    }

    #[test]
    fn occurs_check() {
        // e1 applied to itself after dereliction
        let err = ty("\\e1 [e1?m1][m1>e1,m2]m2");
        assert!(err.is_err());
        let err = ty("\\e1 [e1?m1][e1?m3][m1>m3,m2]m2").unwrap_err();
        assert!(matches!(err, TypeError::OccursCheck { .. }), "{err:?}");
    }

    #[test]
    fn tensor_and_assumptions() {
        let t = ty("\\m1 [m1@m2,m3] <m3,m2>").unwrap();
        assert_eq!(t.formula.to_string(), "(X1 * X2) -o (X2 * X1)");
        let mut assume = BTreeMap::new();
        assume.insert(Var::exp(1), Formula::bang(Formula::Atom(0)));
        let t = infer_type_with(&parse("[e1?m1]m1").unwrap(), &assume).unwrap();
        assert_eq!(t.formula, Formula::Atom(0));
    }

    #[test]
    fn formula_printing() {
        let a = Formula::Meta(1);
        let f = Formula::lolli(Formula::lolli(a.clone(), a.clone()), Formula::lolli(a.clone(), a.clone()));
        assert_eq!(f.to_string(), "(X1 -o X1) -o X1 -o X1");
        assert_eq!(Formula::bang(Formula::tensor(a.clone(), a)).to_string(), "!(X1 * X1)");
    }
}

//! Reference implementation of the rewriting rules, by explicit search over
//! tree terms. Slow and simple on purpose: the machines are checked against it.

mod diamond;
mod strategy;

pub use diamond::{check_diamond, DiamondFailure, DiamondReport};
pub use strategy::{
    basic_redexes, dominating_free_vars, good_redexes, is_basic, is_good, normalize, step, Mode, Normalization, Policy,
};

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::inspect::{cuts, occurrences, Occurrence};
use crate::names::{rename_fresh, rename_fresh_value, NameSource};
use crate::path::{Node, Path, Selector};
use crate::term::{placeholder, Kind, Term, Value, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub enum RuleKind {
    /// A multiplicative value replaces the unique occurrence of the variable.
    AxM1,
    /// A multiplicative variable becomes the new head of a left rule.
    AxM2,
    /// An abstraction meets a subtraction.
    Lolli,
    /// A pair meets an unpairing.
    Tensor,
    /// A copy of an exponential value replaces one occurrence.
    AxE1,
    /// An exponential variable becomes the new head of a dereliction.
    AxE2,
    /// A copy of a box body is opened at a dereliction.
    Bang,
    /// An exponential cut with no occurrence is erased.
    Weakening,
}

impl RuleKind {
    pub fn tag(self) -> &'static str {
        match self {
            RuleKind::AxM1 => "axm1",
            RuleKind::AxM2 => "axm2",
            RuleKind::Lolli => "-o",
            RuleKind::Tensor => "*",
            RuleKind::AxE1 => "axe1",
            RuleKind::AxE2 => "axe2",
            RuleKind::Bang => "!",
            RuleKind::Weakening => "w",
        }
    }

    pub fn is_multiplicative(self) -> bool {
        matches!(self, RuleKind::AxM1 | RuleKind::AxM2 | RuleKind::Lolli | RuleKind::Tensor)
    }

    pub fn is_exponential(self) -> bool {
        matches!(self, RuleKind::AxE1 | RuleKind::AxE2 | RuleKind::Bang)
    }

    pub fn is_erasing(self) -> bool {
        self == RuleKind::Weakening
    }

    pub const ALL: [RuleKind; 8] = [
        RuleKind::AxM1,
        RuleKind::AxM2,
        RuleKind::Lolli,
        RuleKind::Tensor,
        RuleKind::AxE1,
        RuleKind::AxE2,
        RuleKind::Bang,
        RuleKind::Weakening,
    ];
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// A redex: the cut that acts, the occurrence it acts on (relative to the cut
/// body, absent for weakening) and the redex position used by the strategies.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Redex {
    pub kind: RuleKind,
    pub cut_site: Path,
    pub occurrence: Option<Path>,
    /// The hole of the context closing the step: the occurrence for
    /// non-erasing steps, the cut itself for weakening.
    pub position: Path,
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("redex at {0} does not match the term")]
    StaleRedex(Path),
    #[error("step limit of {limit} reached")]
    StepLimitExceeded { limit: usize, partial: Box<Term>, steps: usize },
    #[error("no redex left but a clash at {position}")]
    ClashEncountered { term: Box<Term>, position: Path },
}

/// Every redex of `t`, ordered by position.
pub fn enumerate_redexes(t: &Term) -> Vec<Redex> {
    let mut out = Vec::new();
    for site in cuts(t) {
        let Some(Node::Term(Term::Cut { value, var, body })) = t.at(&site) else { continue };
        if value.kind() != var.kind {
            continue;
        }
        let occs = occurrences(body, *var);
        if var.is_exp() && occs.is_empty() {
            out.push(Redex {
                kind: RuleKind::Weakening,
                cut_site: site.clone(),
                occurrence: None,
                position: site.clone(),
            });
            continue;
        }
        let fv = value.free_vars();
        for (d, occ) in occs {
            let Some(kind) = rule_for(value, var.kind, occ) else { continue };
            if captures(body, &d, &fv) {
                continue;
            }
            let position = site.child(Selector::CutBody).join(&d);
            out.push(Redex { kind, cut_site: site.clone(), occurrence: Some(d), position });
        }
    }
    out.sort_by(|a, b| a.position.cmp(&b.position));
    out
}

fn rule_for(value: &Value, kind: Kind, occ: Occurrence) -> Option<RuleKind> {
    use Occurrence::*;
    Some(match (kind, occ, value) {
        (Kind::Multiplicative, Plain, _) => RuleKind::AxM1,
        (Kind::Multiplicative, SubHead | UnpairHead, Value::Var(_)) => RuleKind::AxM2,
        (Kind::Multiplicative, SubHead, Value::Abs(..)) => RuleKind::Lolli,
        (Kind::Multiplicative, UnpairHead, Value::Pair(..)) => RuleKind::Tensor,
        (Kind::Exponential, Plain, _) => RuleKind::AxE1,
        (Kind::Exponential, DerHead, Value::Var(_)) => RuleKind::AxE2,
        (Kind::Exponential, DerHead, Value::Bang(_)) => RuleKind::Bang,
        _ => return None,
    })
}

/// Whether a binder crossed by `path` inside `body` would capture one of `fv`.
fn captures(body: &Term, path: &Path, fv: &BTreeSet<Var>) -> bool {
    if fv.is_empty() {
        return false;
    }
    let mut node = Node::Term(body);
    for s in path.selectors() {
        let bound: Vec<Var> = match (node, s) {
            (Node::Term(Term::Cut { var, .. }), Selector::CutBody)
            | (Node::Term(Term::Subtract { var, .. }), Selector::SubBody)
            | (Node::Term(Term::Derelict { var, .. }), Selector::DerBody) => vec![*var],
            (Node::Term(Term::Unpair { left, right, .. }), Selector::UnpairBody) => vec![*left, *right],
            _ => match node.as_value() {
                Some(Value::Abs(x, _)) if *s == Selector::AbsBody => vec![*x],
                _ => Vec::new(),
            },
        };
        if bound.iter().any(|x| fv.contains(x)) {
            return true;
        }
        match node.step(*s) {
            Some(n) => node = n,
            None => return false,
        }
    }
    false
}

/// Size of the value copied or erased by a redex, if any.
pub fn duplicated_value_size(t: &Term, r: &Redex) -> Option<usize> {
    match r.kind {
        RuleKind::AxE1 | RuleKind::Bang | RuleKind::Weakening => match t.at(&r.cut_site) {
            Some(Node::Term(Term::Cut { value, .. })) => Some(value.size()),
            _ => None,
        },
        _ => None,
    }
}

/// Fires `r` on `t`. Copies are renamed with names drawn from `names`.
pub fn apply_redex(t: &Term, r: &Redex, names: &mut NameSource) -> Result<Term, OracleError> {
    let stale = || OracleError::StaleRedex(r.position.clone());
    let mut out = t.clone();
    let cut = out.take_at(&r.cut_site).map_err(|_| stale())?;
    let Term::Cut { value, var, body } = cut else { return Err(stale()) };
    let mut body = *body;
    if value.kind() != var.kind {
        return Err(stale());
    }
    if r.kind == RuleKind::Weakening {
        if !var.is_exp() || body.has_free(var) {
            return Err(stale());
        }
        out.replace_at(&r.cut_site, body).map_err(|_| stale())?;
        return Ok(out);
    }
    let d = r.occurrence.as_ref().ok_or_else(stale)?;
    let occ = occurrences(&body, var).into_iter().find(|(p, _)| p == d).map(|(_, o)| o).ok_or_else(stale)?;
    if rule_for(&value, var.kind, occ) != Some(r.kind) {
        return Err(stale());
    }
    let keep_cut = match r.kind {
        RuleKind::AxM1 => {
            body.replace_at(d, Term::Val(value.clone())).map_err(|_| stale())?;
            false
        }
        RuleKind::AxE1 => {
            let copy = rename_fresh_value(&value, names);
            body.replace_at(d, Term::Val(copy)).map_err(|_| stale())?;
            true
        }
        RuleKind::AxM2 | RuleKind::AxE2 => {
            let Value::Var(n) = value else { return Err(stale()) };
            let node = body.term_at_mut(d.selectors()).ok_or_else(stale)?;
            match node {
                Term::Subtract { head, .. } | Term::Derelict { head, .. } | Term::Unpair { head, .. } => *head = n,
                _ => return Err(stale()),
            }
            r.kind == RuleKind::AxE2
        }
        RuleKind::Lolli => {
            let Value::Abs(y, s) = value.clone() else { return Err(stale()) };
            let node = body.term_at_mut(d.selectors()).ok_or_else(stale)?;
            let Term::Subtract { value: v, var: x, body: tt, .. } = std::mem::replace(node, placeholder()) else {
                return Err(stale());
            };
            *node = Term::cut(v, y, s.replace_tail(|v2| Term::cut(v2, x, *tt)));
            false
        }
        RuleKind::Tensor => {
            let Value::Pair(s, u) = value.clone() else { return Err(stale()) };
            let node = body.term_at_mut(d.selectors()).ok_or_else(stale)?;
            let Term::Unpair { left, right, body: tt, .. } = std::mem::replace(node, placeholder()) else {
                return Err(stale());
            };
            let inner = u.replace_tail(|v2| Term::cut(v2, right, *tt));
            *node = s.replace_tail(|v1| Term::cut(v1, left, inner));
            false
        }
        RuleKind::Bang => {
            let Value::Bang(s) = &value else { return Err(stale()) };
            let copy = rename_fresh(s, names);
            let node = body.term_at_mut(d.selectors()).ok_or_else(stale)?;
            let Term::Derelict { var: x, body: tt, .. } = std::mem::replace(node, placeholder()) else {
                return Err(stale());
            };
            *node = copy.replace_tail(|v2| Term::cut(v2, x, *tt));
            true
        }
        RuleKind::Weakening => unreachable!(),
    };
    let rebuilt = if keep_cut { Term::cut(value, var, body) } else { body };
    out.replace_at(&r.cut_site, rebuilt).map_err(|_| stale())?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::names::alpha_eq;
    use crate::syntax::parse;

    fn fire(src: &str, kind: RuleKind) -> Term {
        let t = parse(src).unwrap();
        let rs: Vec<_> = enumerate_redexes(&t).into_iter().filter(|r| r.kind == kind).collect();
        assert_eq!(rs.len(), 1, "{rs:?}");
        let mut ns = NameSource::above(&t);
        apply_redex(&t, &rs[0], &mut ns).unwrap()
    }

    #[test]
    fn lolli_step() {
        let t = parse("[\\e1[e1?m1]m1-m2][m2>!e2,m3]m3").unwrap();
        let rs = enumerate_redexes(&t);
        assert_eq!(rs.len(), 1);
        assert_eq!(rs[0].kind, RuleKind::Lolli);
        let r = fire("[\\e1[e1?m1]m1-m2][m2>!e2,m3]m3", RuleKind::Lolli);
        assert!(alpha_eq(&r, &parse("[!e2-e1][e1?m1][m1-m3]m3").unwrap()));
    }

    #[test]
    fn bang_step_renames_the_copy() {
        let src = "[![e1-e2]e2-e3]\\m1[e3?e4][m1>e4,m2]m2";
        let r = fire(src, RuleKind::Bang);
        let expected = parse("[![e1-e2]e2-e3]\\m1[e1-e5][e5-e4][m1>e4,m2]m2").unwrap();
        assert!(alpha_eq(&r, &expected), "{r}");
        assert!(crate::names::is_well_bound(&r));
    }

    #[test]
    fn axiom_steps() {
        let r = fire("[\\m1m1-m2]m2", RuleKind::AxM1);
        assert_eq!(r, parse("\\m1m1").unwrap());
        let r = fire("\\m3[m3-m2][m2>e1,m4]m4", RuleKind::AxM2);
        assert_eq!(r, parse("\\m3[m3>e1,m4]m4").unwrap());
        let r = fire("\\e2[e2-e1][e1?m4]m4", RuleKind::AxE2);
        assert_eq!(r, parse("\\e2[e2-e1][e2?m4]m4").unwrap());
        let r = fire("[!\\m1m1-e1]e1", RuleKind::AxE1);
        assert!(alpha_eq(&r, &parse("[!\\m1m1-e1]!\\m2m2").unwrap()));
        let r = fire("[!\\m1m1-e1]\\m2m2", RuleKind::Weakening);
        assert_eq!(r, parse("\\m2m2").unwrap());
    }

    #[test]
    fn tensor_step() {
        let r = fire("[<\\m1m1,[e1?m2]m2>-m3][m3@m4,m5]<m5,m4>", RuleKind::Tensor);
        let expected = parse("[\\m1m1-m4][e1?m2][m2-m5]<m5,m4>").unwrap();
        assert!(alpha_eq(&r, &expected), "{r}");
    }

    #[test]
    fn clashing_cuts_have_no_redex() {
        let t = parse("[!\\m1m1-m2]m2").unwrap();
        assert!(enumerate_redexes(&t).is_empty());
    }

    #[test]
    fn stale_redex_is_rejected() {
        let t = parse("[\\m1m1-m2]m2").unwrap();
        let r = enumerate_redexes(&t).remove(0);
        let other = parse("\\m1m1").unwrap();
        let mut ns = NameSource::above(&t);
        assert!(matches!(apply_redex(&other, &r, &mut ns), Err(OracleError::StaleRedex(_))));
    }
}

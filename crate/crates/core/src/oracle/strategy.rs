use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

use super::{apply_redex, enumerate_redexes, OracleError, Redex, RuleKind};
use crate::inspect::find_clash;
use crate::names::{ensure_well_bound, NameSource};
use crate::path::{Node, Path, Selector};
use crate::term::{Term, Value, Var};

/// Which redexes a strategy may fire.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Good redexes, weakening included.
    GoodFull,
    /// Good redexes except weakening.
    GoodNonErasing,
    /// Redexes under cuts only, except weakening.
    BasicNonErasing,
}

/// How to choose among the allowed redexes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Policy {
    Leftmost,
    Random(u64),
}

#[derive(Clone, Debug)]
pub struct Normalization {
    pub term: Term,
    pub steps: Vec<Redex>,
}

impl Normalization {
    pub fn count(&self, kind: RuleKind) -> usize {
        self.steps.iter().filter(|r| r.kind == kind).count()
    }

    pub fn multiplicative_steps(&self) -> usize {
        self.steps.iter().filter(|r| r.kind.is_multiplicative()).count()
    }

    pub fn exponential_steps(&self) -> usize {
        self.steps.iter().filter(|r| r.kind.is_exponential()).count()
    }
}

/// The nodes crossed by `path`, paired with the selector leaving each one.
fn frames<'a>(t: &'a Term, path: &Path) -> Option<Vec<(Node<'a>, Selector)>> {
    let mut node = Node::Term(t);
    let mut out = Vec::with_capacity(path.len());
    for s in path.selectors() {
        out.push((node, *s));
        node = node.step(*s)?;
    }
    Some(out)
}

/// Folds the context from the hole outwards; `on_cut` sees each cut binder
/// crossed through its body together with the dfv of the context below it.
fn fold_dfv<'a>(
    frames: &[(Node<'a>, Selector)],
    mut on_cut: impl FnMut(Var, &BTreeSet<Var>) -> bool,
) -> Option<BTreeSet<Var>> {
    let mut acc = BTreeSet::new();
    for (node, s) in frames.iter().rev() {
        match (node, s) {
            (Node::Term(Term::Cut { var, .. }), Selector::CutBody) => {
                if !on_cut(*var, &acc) {
                    return None;
                }
                acc.remove(var);
            }
            (Node::Term(Term::Cut { .. }), Selector::CutValue) => {}
            (Node::Term(Term::Subtract { head, .. }), Selector::SubValue) => {
                acc.insert(*head);
            }
            (Node::Term(Term::Subtract { head, var, .. }), Selector::SubBody)
            | (Node::Term(Term::Derelict { head, var, .. }), Selector::DerBody) => {
                if acc.remove(var) {
                    acc.insert(*head);
                }
            }
            // Extrapolated from the dereliction clause.
            (Node::Term(Term::Unpair { head, left, right, .. }), Selector::UnpairBody) => {
                let l = acc.remove(left);
                let r = acc.remove(right);
                if l || r {
                    acc.insert(*head);
                }
            }
            _ => {
                // Abstraction bodies drop the binder; boxes and both pair
                // components pass through (extrapolated clause for pairs).
                if let (Some(Value::Abs(x, _)), Selector::AbsBody) = (node.as_value(), s) {
                    acc.remove(x);
                }
            }
        }
    }
    Some(acc)
}

/// The dominating free variables of the context `(t, path)`.
pub fn dominating_free_vars(t: &Term, path: &Path) -> Option<BTreeSet<Var>> {
    fold_dfv(&frames(t, path)?, |_, _| true)
}

/// Good contexts never enter a cut value, and no cut they cross binds a
/// dominating variable of the context below it.
pub fn is_good(t: &Term, path: &Path) -> bool {
    if path.selectors().contains(&Selector::CutValue) {
        return false;
    }
    match frames(t, path) {
        Some(fs) => fold_dfv(&fs, |x, below| !below.contains(&x)).is_some(),
        None => false,
    }
}

pub fn is_basic(path: &Path) -> bool {
    path.is_cut_context()
}

pub fn good_redexes(t: &Term) -> Vec<Redex> {
    enumerate_redexes(t).into_iter().filter(|r| is_good(t, &r.position)).collect()
}

pub fn basic_redexes(t: &Term) -> Vec<Redex> {
    enumerate_redexes(t).into_iter().filter(|r| is_basic(&r.position)).collect()
}

fn allowed(t: &Term, mode: Mode) -> Vec<Redex> {
    match mode {
        Mode::GoodFull => good_redexes(t),
        Mode::GoodNonErasing => good_redexes(t).into_iter().filter(|r| !r.kind.is_erasing()).collect(),
        Mode::BasicNonErasing => basic_redexes(t).into_iter().filter(|r| !r.kind.is_erasing()).collect(),
    }
}

/// One step of `mode`, or `None` in normal form.
pub fn step(
    t: &Term,
    mode: Mode,
    pick: &mut impl FnMut(usize) -> usize,
    names: &mut NameSource,
) -> Option<(Term, Redex)> {
    let mut rs = allowed(t, mode);
    if rs.is_empty() {
        return None;
    }
    let r = rs.swap_remove(pick(rs.len()).min(rs.len() - 1));
    let next = apply_redex(t, &r, names).expect("enumerated redexes apply");
    Some((next, r))
}

/// Rewrites to normal form under `mode`. The input is first renamed apart if
/// it is not well-bound.
pub fn normalize(t: &Term, mode: Mode, policy: Policy, step_limit: usize) -> Result<Normalization, OracleError> {
    let mut names = NameSource::above(t);
    let mut cur = ensure_well_bound(t, &mut names);
    let mut rng = match policy {
        Policy::Random(seed) => Some(StdRng::seed_from_u64(seed)),
        Policy::Leftmost => None,
    };
    let mut pick = |n: usize| match rng.as_mut() {
        Some(r) => r.random_range(0..n),
        None => 0,
    };
    let mut steps = Vec::new();
    loop {
        if steps.len() >= step_limit {
            if allowed(&cur, mode).is_empty() {
                break;
            }
            return Err(OracleError::StepLimitExceeded {
                limit: step_limit,
                partial: Box::new(cur),
                steps: steps.len(),
            });
        }
        // Leftmost needs the minimum position; the list is sorted, so
        // `swap_remove(0)` picks it.
        match step(&cur, mode, &mut pick, &mut names) {
            Some((next, r)) => {
                steps.push(r);
                cur = next;
            }
            None => break,
        }
    }
    if let Some(position) = find_clash(&cur) {
        return Err(OracleError::ClashEncountered { term: Box::new(cur), position });
    }
    Ok(Normalization { term: cur, steps })
}

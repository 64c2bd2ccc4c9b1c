//! The strong machine: good, non-erasing evaluation on a term graph with a
//! LIFO pool of jobs, followed by a final garbage collection.
//!
//! A job is a slot of the graph. The approximant is everything outside the
//! job slots; a job's subterm is already in place, so read-back never
//! plugs anything.

mod invariants;
pub mod store;

pub use invariants::{InvariantReport, Violation};

use rustc_hash::FxHashMap as HashMap;
use std::time::Instant;

use thiserror::Error;

use crate::inspect::{collect_garbage, find_clash};
use crate::metrics::{Observer, RunMetrics, TraceEvent, Transition};
use crate::names::{ensure_well_bound, NameSource};
use crate::path::Path;
use crate::proper::{check_proper, ImproperTerm};
use crate::syntax::Style;
use crate::term::{Kind, Term, Var};
use store::{Binding, Slot, Store, TermId, TermNode, ValId, ValueNode, VarId};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SesameError {
    #[error(transparent)]
    Improper(#[from] ImproperTerm),
    #[error("clash at {0}")]
    Clash(Path),
    #[error("clash: the cut on {var} holds a value of the wrong shape")]
    ClashHalt { var: Var },
    #[error("internal invariant broken: {0}")]
    InternalInvariant(String),
    #[error("step limit of {limit} reached")]
    StepLimitExceeded { limit: usize, partial: Box<Term> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Job {
    pub name: u32,
    pub slot: Slot,
}

#[derive(Clone, Debug)]
pub struct Sesame {
    store: Store,
    /// Topmost job last.
    pool: Vec<Job>,
    next_job: u32,
    pub metrics: RunMetrics,
}

impl Sesame {
    /// Accepts proper, clash-free terms, open ones included. Terms that are
    /// not well-bound are renamed first.
    pub fn init(t: &Term) -> Result<Sesame, SesameError> {
        check_proper(t)?;
        if let Some(p) = find_clash(t) {
            return Err(SesameError::Clash(p));
        }
        let mut names = NameSource::above(t);
        let t0 = ensure_well_bound(t, &mut names);
        Ok(Sesame {
            store: Store::build(&t0),
            pool: vec![Job { name: 1, slot: Slot::Root }],
            next_job: 2,
            metrics: RunMetrics::new(t.size()),
        })
    }

    pub fn pool(&self) -> &[Job] {
        &self.pool
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn is_final(&self) -> bool {
        self.pool.is_empty()
    }

    fn marks(&self) -> HashMap<Slot, u32> {
        self.pool.iter().map(|j| (j.slot, j.name)).collect()
    }

    pub fn readback(&self) -> Term {
        self.store.readback(&HashMap::default()).0
    }

    /// Read-back with the position of each job, topmost first.
    pub fn readback_with_jobs(&self) -> (Term, Vec<(u32, Path)>) {
        let (t, found) = self.store.readback(&self.marks());
        let mut jobs = Vec::with_capacity(self.pool.len());
        for j in self.pool.iter().rev() {
            if let Some((_, p)) = found.iter().find(|(k, _)| *k == j.name) {
                jobs.push((j.name, p.clone()));
            }
        }
        (t, jobs)
    }

    /// The read-back with every job's subterm shown as `<…>k`.
    pub fn render(&self, style: Style) -> String {
        self.store.render(&self.marks(), style.symbols())
    }

    pub fn check_invariants(&self) -> InvariantReport {
        invariants::check(self)
    }

    fn fresh_job(&mut self) -> u32 {
        let k = self.next_job;
        self.next_job += 1;
        k
    }

    fn top(&self) -> Job {
        *self.pool.last().expect("nonempty pool")
    }

    fn set_top_slot(&mut self, slot: Slot) {
        self.pool.last_mut().expect("nonempty pool").slot = slot;
    }

    fn broken(msg: impl Into<String>) -> SesameError {
        SesameError::InternalInvariant(msg.into())
    }

    /// The cut binding `x`, if `x` is in the domain of the multi-context.
    fn cut_of(&self, x: VarId) -> Option<(ValId, Option<Slot>)> {
        match self.store.binding(x) {
            Binding::Cut { value, parent } => Some((value, parent)),
            _ => None,
        }
    }

    /// Removes the entered cut on `x` from the approximant: its parent slot
    /// now holds its body. Returns the freed binder node.
    fn splice(&mut self, x: VarId, parent: Option<Slot>) -> Result<TermId, SesameError> {
        let parent =
            parent.ok_or_else(|| Self::broken(format!("cut on {} used before being entered", self.store.to_var(x))))?;
        let cut = self.store.get(parent);
        let TermNode::Bind { var, body } = self.store.term(cut) else {
            return Err(Self::broken("cut back-reference does not point at a binder"));
        };
        if var != x {
            return Err(Self::broken("cut back-reference points at another binder"));
        }
        self.store.set(parent, body);
        if let TermNode::Bind { var: below, .. } = self.store.term(body) {
            if let Binding::Cut { parent: p @ Some(_), .. } = &mut self.store.var_mut(below).binding {
                *p = Some(parent);
            }
        }
        if self.top().slot == Slot::BindBody(cut) {
            self.set_top_slot(parent);
        }
        Ok(cut)
    }

    /// Fires one transition; `None` once the pool is empty.
    pub fn step(&mut self) -> Result<Option<Transition>, SesameError> {
        let Some(job) = self.pool.last().copied() else { return Ok(None) };
        let id = self.store.get(job.slot);
        let t = match self.store.term(id) {
            TermNode::Bind { var, body: _ } => self.step_binder(job, id, var)?,
            TermNode::Val(v) => self.step_value(job, id, v)?,
        };
        self.metrics.record(t);
        Ok(Some(t))
    }

    fn step_binder(&mut self, job: Job, id: TermId, x: VarId) -> Result<Transition, SesameError> {
        let clash = |s: &Self, m: VarId| Err(SesameError::ClashHalt { var: s.store.to_var(m) });
        match self.store.binding(x) {
            Binding::Cut { value, .. } => {
                self.store.var_mut(x).binding = Binding::Cut { value, parent: Some(job.slot) };
                self.set_top_slot(Slot::BindBody(id));
                Ok(Transition::Sea1)
            }
            Binding::Sub { head, value } => {
                let Some((w, parent)) = self.cut_of(head) else {
                    self.pool.pop();
                    self.pool.push(Job { name: job.name, slot: Slot::BindBody(id) });
                    let b = self.fresh_job();
                    self.pool.push(Job { name: b, slot: Slot::SubValue(x) });
                    return Ok(Transition::Sea2);
                };
                match self.store.value(w) {
                    ValueNode::Var(n) if self.store.var(n).kind == Kind::Multiplicative => {
                        self.splice(head, parent)?;
                        self.store.var_mut(x).binding = Binding::Sub { head: n, value };
                        Ok(Transition::AxM2)
                    }
                    ValueNode::Abs { var: y, body: s } => {
                        let TermNode::Val(arg) = self.store.term(value) else {
                            return Err(Self::broken("subtraction value slot holds a binder"));
                        };
                        let TermNode::Bind { body: rest, .. } = self.store.term(id) else { unreachable!() };
                        let cut = self.splice(head, parent)?;
                        let slot = self.top().slot;
                        let (z, v2) = self.store.tail(s);
                        self.store.set_term(z, TermNode::Bind { var: x, body: rest });
                        self.store.var_mut(x).binding = Binding::Cut { value: v2, parent: None };
                        self.store.set_term(cut, TermNode::Bind { var: y, body: s });
                        self.store.var_mut(y).binding = Binding::Cut { value: arg, parent: None };
                        self.store.set(slot, cut);
                        Ok(Transition::Lolli)
                    }
                    _ => clash(self, head),
                }
            }
            Binding::Der { head } => {
                let Some((w, _)) = self.cut_of(head) else {
                    self.set_top_slot(Slot::BindBody(id));
                    return Ok(Transition::Sea3);
                };
                match self.store.value(w) {
                    ValueNode::Var(f) if self.store.var(f).kind == Kind::Exponential => {
                        self.store.var_mut(x).binding = Binding::Der { head: f };
                        Ok(Transition::AxE2)
                    }
                    ValueNode::Bang { body: s } => {
                        let size = self.store.value_size(w);
                        self.metrics.record_copy(size);
                        let TermNode::Bind { body: rest, .. } = self.store.term(id) else { unreachable!() };
                        let copy = self.store.copy_term(s);
                        let (z, v2) = self.store.tail(copy);
                        self.store.set_term(z, TermNode::Bind { var: x, body: rest });
                        self.store.var_mut(x).binding = Binding::Cut { value: v2, parent: None };
                        self.store.set(job.slot, copy);
                        Ok(Transition::Bang)
                    }
                    _ => clash(self, head),
                }
            }
            Binding::Unpair { head, right } => {
                let Some((w, parent)) = self.cut_of(head) else {
                    self.set_top_slot(Slot::BindBody(id));
                    return Ok(Transition::Sea7);
                };
                match self.store.value(w) {
                    ValueNode::Var(n) if self.store.var(n).kind == Kind::Multiplicative => {
                        self.splice(head, parent)?;
                        self.store.var_mut(x).binding = Binding::Unpair { head: n, right };
                        Ok(Transition::AxM2Unpair)
                    }
                    ValueNode::Pair { left: ls, right: lu } => {
                        let TermNode::Bind { body: rest, .. } = self.store.term(id) else { unreachable!() };
                        self.splice(head, parent)?;
                        let slot = self.top().slot;
                        let (zu, v2) = self.store.tail(lu);
                        self.store.set_term(zu, TermNode::Bind { var: right, body: rest });
                        self.store.var_mut(right).binding = Binding::Cut { value: v2, parent: None };
                        let (zs, v1) = self.store.tail(ls);
                        self.store.set_term(zs, TermNode::Bind { var: x, body: lu });
                        self.store.var_mut(x).binding = Binding::Cut { value: v1, parent: None };
                        self.store.set(slot, ls);
                        Ok(Transition::Tensor)
                    }
                    _ => clash(self, head),
                }
            }
            Binding::Unbound | Binding::UnpairRight => {
                Err(Self::broken(format!("binder node for {} has no binding", self.store.to_var(x))))
            }
        }
    }

    fn step_value(&mut self, job: Job, id: TermId, v: ValId) -> Result<Transition, SesameError> {
        match self.store.value(v) {
            ValueNode::Var(x) => {
                let Some((w, parent)) = self.cut_of(x) else {
                    self.pool.pop();
                    return Ok(Transition::Sea6);
                };
                if self.store.value_kind(w) != self.store.var(x).kind {
                    return Err(SesameError::ClashHalt { var: self.store.to_var(x) });
                }
                if self.store.var(x).kind == Kind::Multiplicative {
                    self.splice(x, parent)?;
                    self.store.set_term(id, TermNode::Val(w));
                    Ok(Transition::AxM1)
                } else {
                    let size = self.store.value_size(w);
                    self.metrics.record_copy(size);
                    let copy = self.store.copy_value(w);
                    self.store.set_term(id, TermNode::Val(copy));
                    Ok(Transition::AxE1)
                }
            }
            ValueNode::Abs { .. } => {
                self.set_top_slot(Slot::AbsBody(v));
                Ok(Transition::Sea4)
            }
            ValueNode::Bang { .. } => {
                self.set_top_slot(Slot::BangBody(v));
                Ok(Transition::Sea5)
            }
            ValueNode::Pair { .. } => {
                self.pool.pop();
                let b = self.fresh_job();
                self.pool.push(Job { name: b, slot: Slot::PairRight(v) });
                self.pool.push(Job { name: job.name, slot: Slot::PairLeft(v) });
                Ok(Transition::Sea8)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct SesameRun {
    pub state: Sesame,
    pub transitions: Vec<Transition>,
}

impl SesameRun {
    pub fn metrics(&self) -> &RunMetrics {
        &self.state.metrics
    }

    pub fn readback(&self) -> Term {
        self.state.readback()
    }

    /// The read-back with its garbage cuts removed.
    pub fn result(&self) -> Term {
        gc(&self.state.readback())
    }
}

/// Final garbage collection: removes every cut.
pub fn gc(t: &Term) -> Term {
    collect_garbage(t)
}

/// Runs to an empty pool. `on_event` sees the initial state and the state after
/// every transition.
pub fn run_with(t: &Term, step_limit: usize, mut on_event: Observer<'_, Sesame>) -> Result<SesameRun, SesameError> {
    let start = Instant::now();
    let mut state = Sesame::init(t)?;
    let mut transitions = Vec::new();
    if let Some(f) = on_event.as_mut() {
        f(TraceEvent { step: 0, transition: None, state: state.render(Style::Unicode) }, &state);
    }
    while !state.is_final() {
        if transitions.len() >= step_limit {
            return Err(SesameError::StepLimitExceeded { limit: step_limit, partial: Box::new(state.readback()) });
        }
        let tr = state.step()?.expect("nonempty pool steps");
        transitions.push(tr);
        if let Some(f) = on_event.as_mut() {
            f(
                TraceEvent { step: transitions.len(), transition: Some(tr), state: state.render(Style::Unicode) },
                &state,
            );
        }
    }
    state.metrics.elapsed = start.elapsed();
    Ok(SesameRun { state, transitions })
}

pub fn run(t: &Term, step_limit: usize) -> Result<SesameRun, SesameError> {
    run_with(t, step_limit, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::names::alpha_eq;
    use crate::syntax::parse;
    use Transition::*;

    const EXAMPLE: &str = "[!\\m1m1-e1][e1?m2][e1?m3][m2>m3,m4]m4";

    #[test]
    fn running_example() {
        let r = run(&parse(EXAMPLE).unwrap(), 100).unwrap();
        assert_eq!(r.transitions, vec![Sea1, Bang, Sea1, Bang, Sea1, Lolli, Sea1, Sea1, AxM1, AxM1, AxM1, Sea4, Sea6]);
        assert_eq!(r.readback(), parse("[!\\m1m1-e1]\\m6m6").unwrap());
        assert_eq!(r.result(), parse("\\m6m6").unwrap());
        assert_eq!(r.metrics().principal_total(), 6);
    }

    #[test]
    fn sea2_forks_the_value_on_top() {
        let mut q = Sesame::init(&parse("[m2>m3,m4]m4").unwrap()).unwrap();
        assert_eq!(q.step().unwrap(), Some(Sea2));
        assert_eq!(q.render(Style::Ascii), "[m2><m3>2,m4]<m4>1");
        assert_eq!(q.pool().last().unwrap().name, 2);
    }

    #[test]
    fn sea8_forks_the_left_component_on_top() {
        let mut q = Sesame::init(&parse("<m1,m2>").unwrap()).unwrap();
        assert_eq!(q.step().unwrap(), Some(Sea8));
        assert_eq!(q.render(Style::Ascii), "<<m1>1,<m2>2>");
        assert_eq!(q.pool().last().unwrap().name, 1);
    }

    #[test]
    fn cut_free_input_has_no_principal_transition() {
        let r = run(&parse("\\m1m1").unwrap(), 100).unwrap();
        assert_eq!(r.transitions, vec![Sea4, Sea6]);
        assert_eq!(r.metrics().principal_total(), 0);
    }

    #[test]
    fn bang_opens_a_renamed_copy() {
        let mut q = Sesame::init(&parse("\\e9[![e9?m1]m1-e1][e1?m2]m2").unwrap()).unwrap();
        assert_eq!(q.step().unwrap(), Some(Sea4));
        assert_eq!(q.step().unwrap(), Some(Sea1));
        assert_eq!(q.step().unwrap(), Some(Bang));
        assert!(alpha_eq(&q.readback(), &parse("\\e9[![e9?m1]m1-e1][e9?m3][m3-m2]m2").unwrap()));
        let r = run(&parse("\\e9[![e9?m1]m1-e1][e1?m2]m2").unwrap(), 100).unwrap();
        assert!(alpha_eq(&r.result(), &parse("\\e9[e9?m3]m3").unwrap()));
    }

    #[test]
    fn tensor_transitions() {
        let t = parse("[<\\m1m1,\\m2m2>-m3][m3@m4,m5][m4>m5,m6]m6").unwrap();
        let r = run(&t, 100).unwrap();
        assert_eq!(r.metrics().count(Tensor), 1);
        assert!(alpha_eq(&r.result(), &parse("\\m2m2").unwrap()));
        let t = parse("\\m7[m7-m3][m3@m4,m5]<m5,m4>").unwrap();
        let r = run(&t, 100).unwrap();
        assert_eq!(r.metrics().count(AxM2Unpair), 1);
        assert_eq!(r.result(), parse("\\m7[m7@m4,m5]<m5,m4>").unwrap());
    }

    #[test]
    fn step_limit_returns_the_partial_readback() {
        let err = run(&parse(EXAMPLE).unwrap(), 3).unwrap_err();
        let SesameError::StepLimitExceeded { partial, .. } = err else { panic!() };
        assert!(alpha_eq(&partial, &parse("[!\\m1m1-e1][\\m5m5-m2][e1?m3][m2>m3,m4]m4").unwrap()));
    }

    #[test]
    fn clash_halts() {
        let t = parse("[!\\e1[e1?m1]m1-e2][e2?m2][m2>!!\\m3m3,m4]m4").unwrap();
        assert!(matches!(run(&t, 100), Err(SesameError::ClashHalt { .. })));
    }

    #[test]
    fn invariants_hold_along_the_running_example() {
        let mut reports = Vec::new();
        let mut check = |_: TraceEvent, q: &Sesame| reports.push(q.check_invariants());
        run_with(&parse(EXAMPLE).unwrap(), 100, Some(&mut check)).unwrap();
        assert_eq!(reports.len(), 14);
        for r in reports {
            assert!(r.is_clean(), "{r}");
        }
    }

    #[test]
    fn duplicate_job_breaks_unique_names() {
        let mut q = Sesame::init(&parse(EXAMPLE).unwrap()).unwrap();
        q.step().unwrap();
        let top = *q.pool.last().unwrap();
        q.pool.push(top);
        let report = q.check_invariants();
        assert!(report.violations.iter().any(|v| matches!(v, Violation::UniqueNames(_))), "{report}");
    }
}

//! The basic abstract machine: closed, basic, non-erasing evaluation with a
//! global cut context.

use rustc_hash::FxHashMap as HashMap;
use std::time::Instant;

use thiserror::Error;

use crate::inspect::find_clash;
use crate::metrics::{Observer, RunMetrics, TraceEvent, Transition};
use crate::names::{ensure_well_bound, rename_fresh, rename_fresh_value, NameSource};
use crate::path::Path;
use crate::proper::{check_proper, ImproperTerm};
use crate::syntax::{write_term, write_value, Style};
use crate::term::{placeholder, Term, Value, Var};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum BamError {
    #[error("the basic machine only runs closed terms; free: {}", list(.0))]
    OpenTerm(Vec<Var>),
    #[error(transparent)]
    Improper(#[from] ImproperTerm),
    #[error("clash at {0}")]
    Clash(Path),
    #[error("clash: the cut on {var} holds a value of the wrong shape")]
    ClashHalt { var: Var },
    #[error("variable {0} has no cut in the context")]
    UnboundVariable(Var),
    #[error("step limit of {limit} reached")]
    StepLimitExceeded { limit: usize },
}

fn list(xs: &[Var]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutEntry {
    pub value: Value,
    pub var: Var,
}

/// A state `(E, t)`. Entries are kept in order, innermost last; consumed
/// entries leave a tombstone so that lookups stay O(1).
#[derive(Clone, Debug)]
pub struct BamState {
    entries: Vec<Option<CutEntry>>,
    index: HashMap<Var, usize>,
    active: Term,
    names: NameSource,
    pub metrics: RunMetrics,
}

impl BamState {
    pub fn init(t: &Term) -> Result<BamState, BamError> {
        let free = t.free_vars();
        if !free.is_empty() {
            return Err(BamError::OpenTerm(free.into_iter().collect()));
        }
        check_proper(t)?;
        if let Some(p) = find_clash(t) {
            return Err(BamError::Clash(p));
        }
        let mut names = NameSource::above(t);
        let active = ensure_well_bound(t, &mut names);
        Ok(BamState {
            entries: Vec::new(),
            index: HashMap::default(),
            active,
            names,
            metrics: RunMetrics::new(t.size()),
        })
    }

    pub fn active(&self) -> &Term {
        &self.active
    }

    /// The live cut entries, outermost first.
    pub fn context(&self) -> impl Iterator<Item = &CutEntry> {
        self.entries.iter().flatten()
    }

    pub fn is_final(&self) -> bool {
        match &self.active {
            Term::Val(Value::Var(x)) => !self.index.contains_key(x),
            Term::Val(_) => true,
            _ => false,
        }
    }

    fn push(&mut self, value: Value, var: Var) {
        self.index.insert(var, self.entries.len());
        self.entries.push(Some(CutEntry { value, var }));
    }

    fn lookup(&self, x: Var) -> Result<&CutEntry, BamError> {
        self.index.get(&x).and_then(|i| self.entries[*i].as_ref()).ok_or(BamError::UnboundVariable(x))
    }

    fn remove(&mut self, x: Var) -> CutEntry {
        let i = self.index.remove(&x).expect("looked up before removal");
        self.entries[i].take().expect("live entry")
    }

    /// Fires one transition; `None` on final states.
    pub fn step(&mut self) -> Result<Option<Transition>, BamError> {
        if self.is_final() {
            return Ok(None);
        }
        let active = std::mem::replace(&mut self.active, placeholder());
        match self.transition(active) {
            Ok((next, t)) => {
                self.active = next;
                self.metrics.record(t);
                Ok(Some(t))
            }
            Err((back, e)) => {
                self.active = back;
                Err(e)
            }
        }
    }

    fn transition(&mut self, active: Term) -> Result<(Term, Transition), (Term, BamError)> {
        macro_rules! look {
            ($x:expr, $back:expr) => {
                match self.lookup($x) {
                    Ok(e) => e.value.clone(),
                    Err(err) => return Err(($back, err)),
                }
            };
        }
        let clash = |back: Term, var: Var| Err((back, BamError::ClashHalt { var }));
        match active {
            Term::Cut { value, var, body } => {
                self.push(value, var);
                Ok((*body, Transition::Sea))
            }
            Term::Subtract { head, value, var, body } => {
                let back = Term::Subtract { head, value, var, body };
                let cut_value = look!(head, back);
                let Term::Subtract { value, var, body, .. } = back else { unreachable!() };
                match cut_value {
                    Value::Var(n) if n.is_mult() => {
                        self.remove(head);
                        Ok((Term::subtract(n, value, var, *body), Transition::AxM2))
                    }
                    Value::Abs(y, s) => {
                        self.remove(head);
                        self.push(value, y);
                        Ok((s.replace_tail(|v2| Term::cut(v2, var, *body)), Transition::Lolli))
                    }
                    _ => clash(Term::subtract(head, value, var, *body), head),
                }
            }
            Term::Unpair { head, left, right, body } => {
                let back = Term::Unpair { head, left, right, body };
                let cut_value = look!(head, back);
                let Term::Unpair { body, .. } = back else { unreachable!() };
                match cut_value {
                    Value::Var(n) if n.is_mult() => {
                        self.remove(head);
                        Ok((Term::unpair(n, left, right, *body), Transition::AxM2Unpair))
                    }
                    Value::Pair(s, u) => {
                        self.remove(head);
                        let inner = u.replace_tail(|v2| Term::cut(v2, right, *body));
                        Ok((s.replace_tail(|v1| Term::cut(v1, left, inner)), Transition::Tensor))
                    }
                    _ => clash(Term::unpair(head, left, right, *body), head),
                }
            }
            Term::Derelict { head, var, body } => {
                let back = Term::Derelict { head, var, body };
                let cut_value = look!(head, back);
                let Term::Derelict { body, .. } = back else { unreachable!() };
                match cut_value {
                    Value::Var(f) if f.is_exp() => Ok((Term::derelict(f, var, *body), Transition::AxE2)),
                    Value::Bang(s) => {
                        self.metrics.record_copy(1 + s.size());
                        let copy = rename_fresh(&s, &mut self.names);
                        Ok((copy.replace_tail(|v2| Term::cut(v2, var, *body)), Transition::Bang))
                    }
                    _ => clash(Term::derelict(head, var, *body), head),
                }
            }
            Term::Val(Value::Var(x)) => {
                let back = Term::var(x);
                let cut_value = look!(x, back);
                if cut_value.kind() != x.kind {
                    return clash(Term::var(x), x);
                }
                if x.is_mult() {
                    self.remove(x);
                    Ok((Term::Val(cut_value), Transition::AxM1))
                } else {
                    self.metrics.record_copy(cut_value.size());
                    Ok((Term::Val(rename_fresh_value(&cut_value, &mut self.names)), Transition::AxE1))
                }
            }
            Term::Val(v) => Ok((Term::Val(v), Transition::Sea)),
        }
    }

    /// `E⟨t⟩`.
    pub fn readback(&self) -> Term {
        let mut out = self.active.clone();
        for e in self.entries.iter().rev().flatten() {
            out = Term::cut(e.value.clone(), e.var, out);
        }
        out
    }

    /// The cut context followed by the active term in angle brackets.
    pub fn render(&self, style: Style) -> String {
        let s = style.symbols();
        let mut out = String::new();
        for e in self.context() {
            out.push('[');
            write_value(&mut out, &e.value, s);
            out.push_str(s.cut);
            out.push_str(&e.var.to_string());
            out.push(']');
        }
        out.push('<');
        write_term(&mut out, &self.active, s);
        out.push('>');
        out
    }
}

#[derive(Clone, Debug)]
pub struct BamRun {
    pub state: BamState,
    pub transitions: Vec<Transition>,
}

impl BamRun {
    pub fn metrics(&self) -> &RunMetrics {
        &self.state.metrics
    }
}

/// Runs to a final state, reporting each printed state to `on_event` if given.
pub fn run_with(t: &Term, step_limit: usize, mut on_event: Observer<'_, BamState>) -> Result<BamRun, BamError> {
    let start = Instant::now();
    let mut state = BamState::init(t)?;
    let mut transitions = Vec::new();
    if let Some(f) = on_event.as_mut() {
        f(TraceEvent { step: 0, transition: None, state: state.render(Style::Unicode) }, &state);
    }
    loop {
        if transitions.len() >= step_limit && !state.is_final() {
            return Err(BamError::StepLimitExceeded { limit: step_limit });
        }
        match state.step()? {
            Some(tr) => {
                transitions.push(tr);
                if let Some(f) = on_event.as_mut() {
                    let ev = TraceEvent {
                        step: transitions.len(),
                        transition: Some(tr),
                        state: state.render(Style::Unicode),
                    };
                    f(ev, &state);
                }
            }
            None => break,
        }
    }
    state.metrics.elapsed = start.elapsed();
    Ok(BamRun { state, transitions })
}

pub fn run(t: &Term, step_limit: usize) -> Result<BamRun, BamError> {
    run_with(t, step_limit, None)
}

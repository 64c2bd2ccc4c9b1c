//! The term graph. Variable nodes are shared by their binder and all their
//! occurrences; every other node has exactly one parent slot.

use rustc_hash::FxHashMap as HashMap;
use std::fmt::Write;

use crate::path::{Path, Selector};
use crate::syntax::Symbols;
use crate::term::{Kind, Term, Value, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermId(u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ValId(u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TermNode {
    Val(ValId),
    /// A left constructor; what it is depends on the binding of `var`.
    Bind {
        var: VarId,
        body: TermId,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ValueNode {
    Var(VarId),
    Abs { var: VarId, body: TermId },
    Bang { body: TermId },
    Pair { left: TermId, right: TermId },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Binding {
    /// Free, or bound by an abstraction.
    Unbound,
    /// `[v−x]`. `parent` is the slot holding the cut, set once the cut has
    /// been entered.
    Cut {
        value: ValId,
        parent: Option<Slot>,
    },
    /// `[m▷v,x]`; the value sits in a term node so that it can be a job.
    Sub {
        head: VarId,
        value: TermId,
    },
    Der {
        head: VarId,
    },
    /// Left variable of `[m⊗x,y]`.
    Unpair {
        head: VarId,
        right: VarId,
    },
    /// Right variable of an unpairing, bound by the node of its left partner.
    UnpairRight,
}

#[derive(Clone, Copy, Debug)]
pub struct VarNode {
    pub kind: Kind,
    pub index: u32,
    pub wildcard: bool,
    pub binding: Binding,
    /// Target of the copy in progress; the node itself otherwise.
    pub copy: VarId,
}

/// A place holding a term: the root or a child field of some node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Root,
    AbsBody(ValId),
    BangBody(ValId),
    BindBody(TermId),
    SubValue(VarId),
    PairLeft(ValId),
    PairRight(ValId),
}

#[derive(Clone, Debug)]
pub struct Store {
    terms: Vec<TermNode>,
    values: Vec<ValueNode>,
    vars: Vec<VarNode>,
    root: TermId,
    next_index: u32,
}

impl Store {
    /// Builds the graph of a well-bound term. Fresh indices start above `t`.
    pub fn build(t: &Term) -> Store {
        let n = t.size();
        let mut s = Store {
            terms: Vec::with_capacity(2 * n),
            values: Vec::with_capacity(n),
            vars: Vec::with_capacity(n),
            root: TermId(0),
            next_index: t.max_index() + 1,
        };
        let mut scope = HashMap::with_capacity_and_hasher(n, Default::default());
        s.root = s.build_term(t, &mut scope);
        s
    }

    pub fn root(&self) -> TermId {
        self.root
    }

    pub fn term(&self, id: TermId) -> TermNode {
        self.terms[id.0 as usize]
    }

    pub fn value(&self, id: ValId) -> ValueNode {
        self.values[id.0 as usize]
    }

    pub fn var(&self, id: VarId) -> &VarNode {
        &self.vars[id.0 as usize]
    }

    pub fn var_mut(&mut self, id: VarId) -> &mut VarNode {
        &mut self.vars[id.0 as usize]
    }

    pub fn set_term(&mut self, id: TermId, node: TermNode) {
        self.terms[id.0 as usize] = node;
    }

    pub fn node_count(&self) -> usize {
        self.terms.len() + self.values.len() + self.vars.len()
    }

    pub fn to_var(&self, id: VarId) -> Var {
        let n = self.var(id);
        Var { kind: n.kind, index: n.index, wildcard: n.wildcard }
    }

    /// Every variable node with its binding.
    pub fn variables(&self) -> impl Iterator<Item = (Var, Binding)> + '_ {
        self.vars.iter().map(|n| (Var { kind: n.kind, index: n.index, wildcard: n.wildcard }, n.binding))
    }

    pub fn binding(&self, id: VarId) -> Binding {
        self.var(id).binding
    }

    pub fn value_kind(&self, id: ValId) -> Kind {
        match self.value(id) {
            ValueNode::Var(x) => self.var(x).kind,
            ValueNode::Abs { .. } | ValueNode::Pair { .. } => Kind::Multiplicative,
            ValueNode::Bang { .. } => Kind::Exponential,
        }
    }

    fn alloc_term(&mut self, n: TermNode) -> TermId {
        self.terms.push(n);
        TermId(self.terms.len() as u32 - 1)
    }

    fn alloc_value(&mut self, n: ValueNode) -> ValId {
        self.values.push(n);
        ValId(self.values.len() as u32 - 1)
    }

    fn alloc_var(&mut self, kind: Kind, index: u32, wildcard: bool, binding: Binding) -> VarId {
        let id = VarId(self.vars.len() as u32);
        self.vars.push(VarNode { kind, index, wildcard, binding, copy: id });
        id
    }

    /// The term in `slot`.
    pub fn get(&self, slot: Slot) -> TermId {
        match slot {
            Slot::Root => self.root,
            Slot::BindBody(t) => match self.term(t) {
                TermNode::Bind { body, .. } => body,
                TermNode::Val(_) => panic!("slot {slot:?} is not a binder body"),
            },
            Slot::SubValue(x) => match self.binding(x) {
                Binding::Sub { value, .. } => value,
                b => panic!("slot {slot:?} has binding {b:?}"),
            },
            Slot::AbsBody(v) | Slot::BangBody(v) | Slot::PairLeft(v) | Slot::PairRight(v) => {
                match (slot, self.value(v)) {
                    (Slot::AbsBody(_), ValueNode::Abs { body, .. }) | (Slot::BangBody(_), ValueNode::Bang { body }) => {
                        body
                    }
                    (Slot::PairLeft(_), ValueNode::Pair { left, .. }) => left,
                    (Slot::PairRight(_), ValueNode::Pair { right, .. }) => right,
                    (_, n) => panic!("slot {slot:?} does not match {n:?}"),
                }
            }
        }
    }

    pub fn set(&mut self, slot: Slot, new: TermId) {
        match slot {
            Slot::Root => self.root = new,
            Slot::BindBody(t) => match &mut self.terms[t.0 as usize] {
                TermNode::Bind { body, .. } => *body = new,
                TermNode::Val(_) => panic!("slot {slot:?} is not a binder body"),
            },
            Slot::SubValue(x) => match &mut self.vars[x.0 as usize].binding {
                Binding::Sub { value, .. } => *value = new,
                b => panic!("slot {slot:?} has binding {b:?}"),
            },
            Slot::AbsBody(v) | Slot::BangBody(v) | Slot::PairLeft(v) | Slot::PairRight(v) => {
                match (slot, &mut self.values[v.0 as usize]) {
                    (Slot::AbsBody(_), ValueNode::Abs { body, .. }) | (Slot::BangBody(_), ValueNode::Bang { body }) => {
                        *body = new
                    }
                    (Slot::PairLeft(_), ValueNode::Pair { left, .. }) => *left = new,
                    (Slot::PairRight(_), ValueNode::Pair { right, .. }) => *right = new,
                    (_, n) => panic!("slot {slot:?} does not match {n:?}"),
                }
            }
        }
    }

    /// The value node at the end of the spine starting at `t`, and the term
    /// node holding it.
    pub fn tail(&self, mut t: TermId) -> (TermId, ValId) {
        loop {
            match self.term(t) {
                TermNode::Val(v) => return (t, v),
                TermNode::Bind { body, .. } => t = body,
            }
        }
    }

    pub fn value_size(&self, v: ValId) -> usize {
        match self.value(v) {
            ValueNode::Var(_) => 1,
            ValueNode::Abs { body, .. } | ValueNode::Bang { body } => 1 + self.term_size(body),
            ValueNode::Pair { left, right } => 1 + self.term_size(left) + self.term_size(right),
        }
    }

    pub fn term_size(&self, mut t: TermId) -> usize {
        let mut n = 0;
        loop {
            match self.term(t) {
                TermNode::Val(v) => return n + self.value_size(v),
                TermNode::Bind { var, body } => {
                    n += match self.binding(var) {
                        Binding::Cut { value, .. } => 1 + self.value_size(value),
                        Binding::Sub { value, .. } => 1 + self.term_size(value),
                        _ => 1,
                    };
                    t = body;
                }
            }
        }
    }

    pub fn fresh_index(&mut self) -> u32 {
        let i = self.next_index;
        self.next_index += 1;
        i
    }

    fn build_value(&mut self, v: &Value, scope: &mut HashMap<Var, VarId>) -> ValId {
        match v {
            Value::Var(x) => {
                let id = self.occurrence(*x, scope);
                self.alloc_value(ValueNode::Var(id))
            }
            Value::Abs(x, body) => {
                let var = self.binder(*x, Binding::Unbound, scope);
                let body = self.build_term(body, scope);
                self.alloc_value(ValueNode::Abs { var, body })
            }
            Value::Bang(body) => {
                let body = self.build_term(body, scope);
                self.alloc_value(ValueNode::Bang { body })
            }
            Value::Pair(l, r) => {
                let left = self.build_term(l, scope);
                let right = self.build_term(r, scope);
                self.alloc_value(ValueNode::Pair { left, right })
            }
        }
    }

    fn build_term(&mut self, t: &Term, scope: &mut HashMap<Var, VarId>) -> TermId {
        let mut spine = Vec::new();
        let mut cur = t;
        let tail = loop {
            match cur {
                Term::Val(v) => break self.build_value(v, scope),
                Term::Cut { value, var, body } => {
                    let value = self.build_value(value, scope);
                    spine.push(self.binder(*var, Binding::Cut { value, parent: None }, scope));
                    cur = body;
                }
                Term::Subtract { head, value, var, body } => {
                    let head = self.occurrence(*head, scope);
                    let v = self.build_value(value, scope);
                    let value = self.alloc_term(TermNode::Val(v));
                    spine.push(self.binder(*var, Binding::Sub { head, value }, scope));
                    cur = body;
                }
                Term::Derelict { head, var, body } => {
                    let head = self.occurrence(*head, scope);
                    spine.push(self.binder(*var, Binding::Der { head }, scope));
                    cur = body;
                }
                Term::Unpair { head, left, right, body } => {
                    let head = self.occurrence(*head, scope);
                    let right = self.binder(*right, Binding::UnpairRight, scope);
                    spine.push(self.binder(*left, Binding::Unpair { head, right }, scope));
                    cur = body;
                }
            }
        };
        let mut out = self.alloc_term(TermNode::Val(tail));
        for var in spine.into_iter().rev() {
            out = self.alloc_term(TermNode::Bind { var, body: out });
        }
        out
    }

    fn occurrence(&mut self, x: Var, scope: &mut HashMap<Var, VarId>) -> VarId {
        if let Some(id) = scope.get(&x) {
            return *id;
        }
        let id = self.alloc_var(x.kind, x.index, x.wildcard, Binding::Unbound);
        scope.insert(x, id);
        id
    }

    fn binder(&mut self, x: Var, binding: Binding, scope: &mut HashMap<Var, VarId>) -> VarId {
        let id = self.alloc_var(x.kind, x.index, x.wildcard, binding);
        scope.insert(x, id);
        id
    }

    /// Copies the term at `t` with fresh binders, in time linear in its size.
    /// Free variables of the copied term are shared with the original.
    pub fn copy_term(&mut self, t: TermId) -> TermId {
        let mut touched = Vec::new();
        let out = self.copy_term_rec(t, &mut touched);
        for x in touched {
            self.var_mut(x).copy = x;
        }
        out
    }

    pub fn copy_value(&mut self, v: ValId) -> ValId {
        let mut touched = Vec::new();
        let out = self.copy_value_rec(v, &mut touched);
        for x in touched {
            self.var_mut(x).copy = x;
        }
        out
    }

    fn fresh_copy_of(&mut self, x: VarId, binding: Binding, touched: &mut Vec<VarId>) -> VarId {
        let n = *self.var(x);
        let index = self.fresh_index();
        let y = self.alloc_var(n.kind, index, n.wildcard, binding);
        self.var_mut(x).copy = y;
        touched.push(x);
        y
    }

    fn follow(&self, x: VarId) -> VarId {
        self.var(x).copy
    }

    fn copy_value_rec(&mut self, v: ValId, touched: &mut Vec<VarId>) -> ValId {
        let node = match self.value(v) {
            ValueNode::Var(x) => ValueNode::Var(self.follow(x)),
            ValueNode::Abs { var, body } => {
                let var = self.fresh_copy_of(var, Binding::Unbound, touched);
                ValueNode::Abs { var, body: self.copy_term_rec(body, touched) }
            }
            ValueNode::Bang { body } => ValueNode::Bang { body: self.copy_term_rec(body, touched) },
            ValueNode::Pair { left, right } => {
                let left = self.copy_term_rec(left, touched);
                ValueNode::Pair { left, right: self.copy_term_rec(right, touched) }
            }
        };
        self.alloc_value(node)
    }

    fn copy_term_rec(&mut self, t: TermId, touched: &mut Vec<VarId>) -> TermId {
        let mut spine = Vec::new();
        let mut cur = t;
        let tail = loop {
            match self.term(cur) {
                TermNode::Val(v) => break self.copy_value_rec(v, touched),
                TermNode::Bind { var, body } => {
                    let binding = match self.binding(var) {
                        Binding::Cut { value, .. } => {
                            Binding::Cut { value: self.copy_value_rec(value, touched), parent: None }
                        }
                        Binding::Sub { head, value } => {
                            let head = self.follow(head);
                            Binding::Sub { head, value: self.copy_term_rec(value, touched) }
                        }
                        Binding::Der { head } => Binding::Der { head: self.follow(head) },
                        Binding::Unpair { head, right } => {
                            let head = self.follow(head);
                            let right = self.fresh_copy_of(right, Binding::UnpairRight, touched);
                            Binding::Unpair { head, right }
                        }
                        b @ (Binding::Unbound | Binding::UnpairRight) => b,
                    };
                    spine.push(self.fresh_copy_of(var, binding, touched));
                    cur = body;
                }
            }
        };
        let mut out = self.alloc_term(TermNode::Val(tail));
        for var in spine.into_iter().rev() {
            out = self.alloc_term(TermNode::Bind { var, body: out });
        }
        out
    }

    /// The tree denoted by the graph, with the path of every marked slot.
    pub fn readback(&self, marks: &HashMap<Slot, u32>) -> (Term, Vec<(u32, Path)>) {
        let mut r = Reader { store: self, marks, path: Vec::new(), found: Vec::new() };
        let t = r.term(Slot::Root);
        (t, r.found)
    }

    /// Prints the graph, wrapping the content of every marked slot as `<…>k`.
    pub fn render(&self, marks: &HashMap<Slot, u32>, s: Symbols) -> String {
        let mut p = Printer { store: self, marks, out: String::new(), s };
        p.term(Slot::Root);
        p.out
    }
}

struct Reader<'a> {
    store: &'a Store,
    marks: &'a HashMap<Slot, u32>,
    path: Vec<Selector>,
    found: Vec<(u32, Path)>,
}

impl Reader<'_> {
    fn mark(&mut self, slot: Slot) {
        if let Some(k) = self.marks.get(&slot) {
            self.found.push((*k, Path(self.path.clone())));
        }
    }

    fn var(&self, x: VarId) -> Var {
        self.store.to_var(x)
    }

    fn value(&mut self, v: ValId) -> Value {
        let under = |r: &mut Self, sel: Selector, slot: Slot| {
            r.path.push(sel);
            let t = r.term(slot);
            r.path.pop();
            Box::new(t)
        };
        match self.store.value(v) {
            ValueNode::Var(x) => Value::Var(self.var(x)),
            ValueNode::Abs { var, .. } => Value::Abs(self.var(var), under(self, Selector::AbsBody, Slot::AbsBody(v))),
            ValueNode::Bang { .. } => Value::Bang(under(self, Selector::BangBody, Slot::BangBody(v))),
            ValueNode::Pair { .. } => {
                let l = under(self, Selector::PairLeft, Slot::PairLeft(v));
                Value::Pair(l, under(self, Selector::PairRight, Slot::PairRight(v)))
            }
        }
    }

    fn term(&mut self, slot: Slot) -> Term {
        enum Frame {
            Cut(Value, Var),
            Sub(Var, Value, Var),
            Der(Var, Var),
            Unpair(Var, Var, Var),
        }
        let depth = self.path.len();
        let mut frames = Vec::new();
        let mut slot = slot;
        let tail = loop {
            self.mark(slot);
            let id = self.store.get(slot);
            match self.store.term(id) {
                TermNode::Val(v) => break self.value(v),
                TermNode::Bind { var, .. } => {
                    let x = self.var(var);
                    let (frame, sel) = match self.store.binding(var) {
                        Binding::Cut { value, .. } => {
                            self.path.push(Selector::CutValue);
                            let v = self.value(value);
                            self.path.pop();
                            (Frame::Cut(v, x), Selector::CutBody)
                        }
                        Binding::Sub { head, .. } => {
                            self.path.push(Selector::SubValue);
                            self.mark(Slot::SubValue(var));
                            let TermNode::Val(arg) = self.store.term(self.store.get(Slot::SubValue(var))) else {
                                panic!("subtraction value slot holds a binder")
                            };
                            let v = self.value(arg);
                            self.path.pop();
                            (Frame::Sub(self.var(head), v, x), Selector::SubBody)
                        }
                        Binding::Der { head } => (Frame::Der(self.var(head), x), Selector::DerBody),
                        Binding::Unpair { head, right } => {
                            (Frame::Unpair(self.var(head), x, self.var(right)), Selector::UnpairBody)
                        }
                        Binding::Unbound | Binding::UnpairRight => panic!("binder node for {x} without binding"),
                    };
                    frames.push(frame);
                    self.path.push(sel);
                    slot = Slot::BindBody(id);
                }
            }
        };
        self.path.truncate(depth);
        let mut out = Term::Val(tail);
        for f in frames.into_iter().rev() {
            out = match f {
                Frame::Cut(v, x) => Term::cut(v, x, out),
                Frame::Sub(h, v, x) => Term::subtract(h, v, x, out),
                Frame::Der(h, x) => Term::derelict(h, x, out),
                Frame::Unpair(h, l, r) => Term::unpair(h, l, r, out),
            };
        }
        out
    }
}

struct Printer<'a> {
    store: &'a Store,
    marks: &'a HashMap<Slot, u32>,
    out: String,
    s: Symbols,
}

impl Printer<'_> {
    fn var(&mut self, x: VarId) {
        let _ = write!(self.out, "{}", self.store.to_var(x));
    }

    fn open(&mut self, slot: Slot) -> Option<u32> {
        let k = self.marks.get(&slot).copied();
        if k.is_some() {
            self.out.push('<');
        }
        k
    }

    fn close(&mut self, k: u32) {
        let _ = write!(self.out, ">{k}");
    }

    fn value(&mut self, v: ValId) {
        match self.store.value(v) {
            ValueNode::Var(x) => self.var(x),
            ValueNode::Abs { var, .. } => {
                self.out.push_str(self.s.lambda);
                self.var(var);
                self.term(Slot::AbsBody(v));
            }
            ValueNode::Bang { .. } => {
                self.out.push('!');
                self.term(Slot::BangBody(v));
            }
            ValueNode::Pair { .. } => {
                self.out.push_str(self.s.pair_open);
                self.term(Slot::PairLeft(v));
                self.out.push(',');
                self.term(Slot::PairRight(v));
                self.out.push_str(self.s.pair_close);
            }
        }
    }

    fn term(&mut self, slot: Slot) {
        let mut closes = Vec::new();
        let mut slot = slot;
        loop {
            if let Some(k) = self.open(slot) {
                closes.push(k);
            }
            let id = self.store.get(slot);
            match self.store.term(id) {
                TermNode::Val(v) => {
                    self.value(v);
                    break;
                }
                TermNode::Bind { var, .. } => {
                    match self.store.binding(var) {
                        Binding::Cut { value, .. } => {
                            self.out.push('[');
                            self.value(value);
                            self.out.push_str(self.s.cut);
                            self.var(var);
                            self.out.push(']');
                        }
                        Binding::Sub { head, .. } => {
                            self.out.push('[');
                            self.var(head);
                            self.out.push_str(self.s.sub);
                            self.term(Slot::SubValue(var));
                            self.out.push(',');
                            self.var(var);
                            self.out.push(']');
                        }
                        Binding::Der { head } => {
                            self.out.push('[');
                            self.var(head);
                            self.out.push('?');
                            self.var(var);
                            self.out.push(']');
                        }
                        Binding::Unpair { head, right } => {
                            self.out.push('[');
                            self.var(head);
                            self.out.push_str(self.s.unpair);
                            self.var(var);
                            self.out.push(',');
                            self.var(right);
                            self.out.push(']');
                        }
                        Binding::Unbound | Binding::UnpairRight => self.out.push_str("[?]"),
                    }
                    slot = Slot::BindBody(id);
                }
            }
        }
        for k in closes.into_iter().rev() {
            self.close(k);
        }
    }
}

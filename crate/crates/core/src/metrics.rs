//! Transition tags, run counters and trace events shared by both machines.

use std::fmt;
use std::time::Duration;

use serde::Serialize;

use crate::oracle::RuleKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Transition {
    /// The single search transition of the basic machine.
    Sea,
    Sea1,
    Sea2,
    Sea3,
    Sea4,
    Sea5,
    Sea6,
    Sea7,
    Sea8,
    AxM1,
    AxM2,
    /// Variable-for-variable at an unpairing head.
    AxM2Unpair,
    Lolli,
    Tensor,
    AxE1,
    AxE2,
    Bang,
}

impl Transition {
    pub const ALL: [Transition; 17] = [
        Transition::Sea,
        Transition::Sea1,
        Transition::Sea2,
        Transition::Sea3,
        Transition::Sea4,
        Transition::Sea5,
        Transition::Sea6,
        Transition::Sea7,
        Transition::Sea8,
        Transition::AxM1,
        Transition::AxM2,
        Transition::AxM2Unpair,
        Transition::Lolli,
        Transition::Tensor,
        Transition::AxE1,
        Transition::AxE2,
        Transition::Bang,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Transition::Sea => "sea",
            Transition::Sea1 => "sea1",
            Transition::Sea2 => "sea2",
            Transition::Sea3 => "sea3",
            Transition::Sea4 => "sea4",
            Transition::Sea5 => "sea5",
            Transition::Sea6 => "sea6",
            Transition::Sea7 => "sea7",
            Transition::Sea8 => "sea8",
            Transition::AxM1 => "axm1",
            Transition::AxM2 => "axm2",
            Transition::AxM2Unpair => "axm2'",
            Transition::Lolli => "-o",
            Transition::Tensor => "*",
            Transition::AxE1 => "axe1",
            Transition::AxE2 => "axe2",
            Transition::Bang => "!",
        }
    }

    /// The calculus rule a principal transition simulates.
    pub fn rule(self) -> Option<RuleKind> {
        Some(match self {
            Transition::AxM1 => RuleKind::AxM1,
            Transition::AxM2 | Transition::AxM2Unpair => RuleKind::AxM2,
            Transition::Lolli => RuleKind::Lolli,
            Transition::Tensor => RuleKind::Tensor,
            Transition::AxE1 => RuleKind::AxE1,
            Transition::AxE2 => RuleKind::AxE2,
            Transition::Bang => RuleKind::Bang,
            _ => return None,
        })
    }

    pub fn is_principal(self) -> bool {
        self.rule().is_some()
    }

    pub fn is_search(self) -> bool {
        !self.is_principal()
    }

    fn slot(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Transition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunMetrics {
    counts: [u64; Transition::ALL.len()],
    pub initial_size: usize,
    pub max_copied_value_size: usize,
    pub elapsed: Duration,
}

impl RunMetrics {
    pub fn new(initial_size: usize) -> RunMetrics {
        RunMetrics { initial_size, ..RunMetrics::default() }
    }

    pub fn record(&mut self, t: Transition) {
        self.counts[t.slot()] += 1;
    }

    pub fn record_copy(&mut self, size: usize) {
        self.max_copied_value_size = self.max_copied_value_size.max(size);
    }

    pub fn count(&self, t: Transition) -> u64 {
        self.counts[t.slot()]
    }

    pub fn principal_total(&self) -> u64 {
        Transition::ALL.iter().filter(|t| t.is_principal()).map(|t| self.count(*t)).sum()
    }

    pub fn search_total(&self) -> u64 {
        Transition::ALL.iter().filter(|t| t.is_search()).map(|t| self.count(*t)).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn multiplicative_total(&self) -> u64 {
        self.rule_total(RuleKind::is_multiplicative)
    }

    pub fn exponential_total(&self) -> u64 {
        self.rule_total(RuleKind::is_exponential)
    }

    fn rule_total(&self, pred: impl Fn(RuleKind) -> bool) -> u64 {
        Transition::ALL.iter().filter(|t| t.rule().is_some_and(&pred)).map(|t| self.count(*t)).sum()
    }

    /// Searches at most |t0| per principal transition, plus one initial run.
    pub fn search_bound_holds(&self) -> bool {
        self.search_total() <= self.initial_size as u64 * (self.principal_total() + 1)
    }

    pub fn subterm_bound_holds(&self) -> bool {
        self.max_copied_value_size <= self.initial_size
    }

    /// Nonzero counters in tag order.
    pub fn nonzero(&self) -> impl Iterator<Item = (Transition, u64)> + '_ {
        Transition::ALL.iter().map(|t| (*t, self.count(*t))).filter(|(_, n)| *n > 0)
    }

    /// `key=value` pairs, stable order.
    pub fn summary(&self) -> String {
        let mut parts = vec![
            format!("size={}", self.initial_size),
            format!("principal={}", self.principal_total()),
            format!("search={}", self.search_total()),
            format!("multiplicative={}", self.multiplicative_total()),
            format!("exponential={}", self.exponential_total()),
            format!("max_copy={}", self.max_copied_value_size),
        ];
        parts.extend(self.nonzero().map(|(t, n)| format!("{}={}", t.tag(), n)));
        parts.join(" ")
    }

    pub fn to_json(&self) -> serde_json::Value {
        let counts: serde_json::Map<String, serde_json::Value> =
            self.nonzero().map(|(t, n)| (t.tag().to_string(), n.into())).collect();
        serde_json::json!({
            "initial_size": self.initial_size,
            "principal_total": self.principal_total(),
            "search_total": self.search_total(),
            "multiplicative_total": self.multiplicative_total(),
            "exponential_total": self.exponential_total(),
            "max_copied_value_size": self.max_copied_value_size,
            "elapsed_ns": self.elapsed.as_nanos() as u64,
            "counts": counts,
        })
    }
}

/// Optional callback seeing each machine state of a run.
pub type Observer<'a, S> = Option<&'a mut dyn FnMut(TraceEvent, &S)>;

/// One printed machine state. `transition` is absent for the initial state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceEvent {
    pub step: usize,
    pub transition: Option<Transition>,
    pub state: String,
}

impl TraceEvent {
    /// `->tag  state`, tags padded to five columns.
    pub fn to_line(&self) -> String {
        match self.transition {
            Some(t) => format!("->{:<5}{}", t.tag(), self.state),
            None => format!("       {}", self.state),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "step": self.step,
            "tag": self.transition.map(|t| t.tag()),
            "state": self.state,
        })
    }
}

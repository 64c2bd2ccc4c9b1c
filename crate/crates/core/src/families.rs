//! The exponential exploding family and its building blocks.
//!
//! Terms are built as trees so that every promoted copy of `π_2` can reuse
//! the same free head `f`; the machines restore well-boundness on entry.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::term::{Term, Value, Var};

/// The free exponential head shared by every `π_k`.
pub const HEAD: Var = Var::exp(1);
const BODY: Var = Var::exp(2);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FamilySpec {
    Pi(u32),
    Delta(u32),
    Sigma(u32),
    CutPi(u32, u32),
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum FamilyError {
    #[error("unknown family `{0}`; expected pi, delta, sigma or cutpi")]
    UnknownFamily(String),
    #[error("family `{family}` takes {expected} parameter(s), got `{params}`")]
    Arity { family: &'static str, expected: usize, params: String },
    #[error("family parameters must be positive integers, got `{0}`")]
    BadParameter(String),
}

impl FamilySpec {
    pub fn name(self) -> &'static str {
        match self {
            FamilySpec::Pi(_) => "pi",
            FamilySpec::Delta(_) => "delta",
            FamilySpec::Sigma(_) => "sigma",
            FamilySpec::CutPi(..) => "cutpi",
        }
    }

    pub fn generate(self) -> Term {
        match self {
            FamilySpec::Pi(k) => pi(k),
            FamilySpec::Delta(n) => delta(n),
            FamilySpec::Sigma(n) => sigma(n),
            FamilySpec::CutPi(k, h) => cut_pi(k, h),
        }
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Pi(k) => write!(f, "pi:{k}"),
            FamilySpec::Delta(n) => write!(f, "delta:{n}"),
            FamilySpec::Sigma(n) => write!(f, "sigma:{n}"),
            FamilySpec::CutPi(k, h) => write!(f, "cutpi:{k},{h}"),
        }
    }
}

impl FromStr for FamilySpec {
    type Err = FamilyError;

    /// `NAME:PARAMS`, e.g. `sigma:3` or `cutpi:3,4`.
    fn from_str(s: &str) -> Result<FamilySpec, FamilyError> {
        let (name, params) = s.split_once(':').unwrap_or((s, ""));
        let nums = params
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| match p.trim().parse::<u32>() {
                Ok(n) if n >= 1 => Ok(n),
                _ => Err(FamilyError::BadParameter(p.trim().to_string())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let arity = |family: &'static str, expected: usize| {
            if nums.len() == expected {
                Ok(())
            } else {
                Err(FamilyError::Arity { family, expected, params: params.to_string() })
            }
        };
        match name.trim().to_ascii_lowercase().as_str() {
            "pi" => arity("pi", 1).map(|_| FamilySpec::Pi(nums[0])),
            "delta" => arity("delta", 1).map(|_| FamilySpec::Delta(nums[0])),
            "sigma" => arity("sigma", 1).map(|_| FamilySpec::Sigma(nums[0])),
            "cutpi" => arity("cutpi", 2).map(|_| FamilySpec::CutPi(nums[0], nums[1])),
            other => Err(FamilyError::UnknownFamily(other.to_string())),
        }
    }
}

/// `[f?_]…[f?_][f?e]e` with `k` derelictions.
pub fn pi(k: u32) -> Term {
    assert!(k >= 1, "pi needs k >= 1");
    let mut t = Term::derelict(HEAD, BODY, Term::var(BODY));
    for i in 1..k {
        t = Term::derelict(HEAD, Var::wildcard(2 + i), t);
    }
    t
}

fn cut_on_head(value: Value, body: Term) -> Term {
    Term::cut(value, HEAD, body)
}

/// `n − 1` cuts of `!π_2` on `f` around `π_2`.
pub fn delta(n: u32) -> Term {
    assert!(n >= 1, "delta needs n >= 1");
    let mut t = pi(2);
    for _ in 1..n {
        t = cut_on_head(Value::Bang(Box::new(pi(2))), t);
    }
    t
}

/// `[!!λm.m − f]δ_n`, closed.
pub fn sigma(n: u32) -> Term {
    let m = Var::mult(1);
    let inner = Term::bang(Term::abs(m, Term::var(m)));
    cut_on_head(Value::Bang(Box::new(inner)), delta(n))
}

/// `[!π_k − f]π_h`, which reduces to `π_{k·h}`.
pub fn cut_pi(k: u32, h: u32) -> Term {
    cut_on_head(Value::Bang(Box::new(pi(k))), pi(h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::names::alpha_eq;
    use crate::proper::is_proper;
    use crate::syntax::parse;

    #[test]
    fn small_members_match_their_definitions() {
        assert_eq!(pi(1), parse("[e1?e2]e2").unwrap());
        assert!(alpha_eq(&sigma(1), &parse("[!!\\m1m1-e1][e1?_][e1?e2]e2").unwrap()));
        assert!(alpha_eq(&pi(3), &parse("[e1?_][e1?_][e1?e2]e2").unwrap()));
    }

    #[test]
    fn sigma_is_closed_proper_and_grows_linearly() {
        let step = sigma(2).size() - sigma(1).size();
        for n in 1..12 {
            let s = sigma(n);
            assert!(s.is_closed());
            assert!(is_proper(&s));
            assert_eq!(sigma(n + 1).size() - s.size(), step);
        }
        assert_eq!(step, 2 + pi(2).size());
    }

    #[test]
    fn specs_parse_and_print() {
        for s in ["pi:4", "delta:3", "sigma:10", "cutpi:3,4"] {
            assert_eq!(s.parse::<FamilySpec>().unwrap().to_string(), s);
        }
        assert_eq!("Sigma: 2".parse::<FamilySpec>().unwrap(), FamilySpec::Sigma(2));
        assert!(matches!("cutpi:3".parse::<FamilySpec>(), Err(FamilyError::Arity { .. })));
        assert!(matches!("sigma:0".parse::<FamilySpec>(), Err(FamilyError::BadParameter(_))));
        assert!(matches!("omega:1".parse::<FamilySpec>(), Err(FamilyError::UnknownFamily(_))));
    }
}

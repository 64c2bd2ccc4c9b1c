//! One-step joinability of distinct good reducts.

use std::collections::HashMap;

use super::strategy::good_redexes;
use super::{apply_redex, Redex, RuleKind};
use crate::names::{alpha_canonical, ensure_well_bound, NameSource};
use crate::term::Term;

/// Two good reducts that do not join in one good step each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiamondFailure {
    pub term: Term,
    pub left: Redex,
    pub right: Redex,
}

/// How a term fared: the number of pairs of distinct reducts that joined,
/// and how many of them joined only with different step kinds than the
/// crossing ones.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DiamondReport {
    pub pairs: usize,
    pub kind_mismatches: usize,
}

/// Good one-step reducts keyed by their canonical form, with the kind of the
/// step producing them.
fn reducts(t: &Term, names: &mut NameSource) -> Vec<(Redex, Term)> {
    good_redexes(t)
        .into_iter()
        .map(|r| {
            let s = apply_redex(t, &r, names).expect("enumerated redexes apply");
            (r, alpha_canonical(&s))
        })
        .collect()
}

fn next_steps(t: &Term, names: &mut NameSource) -> HashMap<Term, Vec<RuleKind>> {
    let mut out: HashMap<Term, Vec<RuleKind>> = HashMap::new();
    for (r, s) in reducts(t, names) {
        out.entry(s).or_default().push(r.kind);
    }
    out
}

/// Checks that every two good steps from `t` to different terms close with
/// one further good step on each side.
pub fn check_diamond(t: &Term) -> Result<DiamondReport, Box<DiamondFailure>> {
    let mut names = NameSource::above(t);
    let t = ensure_well_bound(t, &mut names);
    let first = reducts(&t, &mut names);
    let mut report = DiamondReport::default();
    let mut seconds: Vec<Option<HashMap<Term, Vec<RuleKind>>>> = vec![None; first.len()];
    for i in 0..first.len() {
        for j in i + 1..first.len() {
            if first[i].1 == first[j].1 {
                continue;
            }
            for k in [i, j] {
                if seconds[k].is_none() {
                    seconds[k] = Some(next_steps(&first[k].1, &mut names));
                }
            }
            let (a, b) = (seconds[i].as_ref().unwrap(), seconds[j].as_ref().unwrap());
            let joins: Vec<&Term> = a.keys().filter(|u| b.contains_key(*u)).collect();
            if joins.is_empty() {
                return Err(Box::new(DiamondFailure {
                    term: t.clone(),
                    left: first[i].0.clone(),
                    right: first[j].0.clone(),
                }));
            }
            report.pairs += 1;
            let (ki, kj) = (first[i].0.kind, first[j].0.kind);
            let crossed = joins.iter().any(|u| a[*u].contains(&kj) && b[*u].contains(&ki));
            if !crossed {
                report.kind_mismatches += 1;
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    #[test]
    fn independent_redexes_commute() {
        let t = parse("[\\m1m1-m2][\\m3m3-m4][m5>m2,m6][m6>m4,m7]m7").unwrap();
        let r = check_diamond(&t).unwrap();
        assert_eq!(r.pairs, 1);
        assert_eq!(r.kind_mismatches, 0);
    }

    #[test]
    fn single_redex_has_no_pairs() {
        assert_eq!(check_diamond(&parse("[\\m1m1-m2]m2").unwrap()).unwrap().pairs, 0);
    }

    #[test]
    fn copies_of_one_box_commute() {
        let t = parse("[!\\m1m1-e1][e1?m2][e1?m3][m2>m3,m4]m4").unwrap();
        let r = check_diamond(&t).unwrap();
        assert!(r.pairs >= 1);
    }
}

//! Binding `In` patterns against attacker knowledge.
//!
//! A pattern is matched either against a term the attacker already holds or
//! by composing it from parts. Variables that only occur under composition
//! are resolved last, once the other parts have fixed them.

use std::collections::BTreeSet;

use super::knowledge::Knowledge;
use crate::term::{match_term, normalize, substitute, Sort, Substitution, Term, Var};

/// The value the attacker injects for an unconstrained message variable.
pub const ADVERSARY_VALUE: &str = "adv";

type Partial = (Substitution, Vec<Var>);

/// Whether every variable of `t` unbound under `s` satisfies `f`.
fn unbound_all(t: &Term, s: &Substitution, f: &impl Fn(&Var) -> bool) -> bool {
    match t {
        Term::Var(v) => s.get(v).is_some() || f(v),
        Term::App(_, args) => args.iter().all(|a| unbound_all(a, s, f)),
        _ => true,
    }
}

/// Cheap necessary condition for `match_term`, without allocating.
fn may_match(p: &Term, t: &Term, s: &Substitution) -> bool {
    match (p, t) {
        (Term::Var(v), _) => s.get(v).is_none_or(|b| b == t),
        (Term::App(f, ps), Term::App(g, ts)) => {
            f == g && ps.len() == ts.len() && ps.iter().zip(ts.iter()).all(|(a, b)| may_match(a, b, s))
        }
        _ => p == t,
    }
}

fn go(p: &Term, s: Substitution, pending: Vec<Var>, k: &Knowledge, budget: usize, top: bool) -> Vec<Partial> {
    if unbound_all(p, &s, &|_| false) {
        return if k.derivable(&normalize(&substitute(p, &s))) {
            vec![(s, pending)]
        } else {
            vec![]
        };
    }
    match p {
        Term::Var(v) => {
            if top {
                k.terms()
                    .filter(|t| v.sort.admits(t.sort()))
                    .map(|t| {
                        let mut s2 = s.clone();
                        s2.insert(v.clone(), t.clone());
                        (s2, pending.clone())
                    })
                    .collect()
            } else {
                let mut pending = pending;
                if !pending.contains(v) {
                    pending.push(v.clone());
                }
                vec![(s, pending)]
            }
        }
        Term::App(f, args) => {
            let mut out = Vec::new();
            for t in k.with_head(f).filter(|t| may_match(p, t, &s)) {
                let mut s2 = s.clone();
                if match_term(p, t, &mut s2) {
                    out.push((s2, pending.clone()));
                }
            }
            // Variables already left to the attacker's choice stay that way:
            // composing around them again only repeats earlier work.
            if unbound_all(p, &s, &|v| pending.contains(v)) {
                out.push((s, pending));
                return out;
            }
            if budget > 0 {
                let mut partial = vec![(s, pending)];
                for a in args.iter() {
                    partial = partial
                        .into_iter()
                        .flat_map(|(s, pend)| go(a, s, pend, k, budget - 1, false))
                        .collect();
                    let mut seen = BTreeSet::new();
                    partial.retain(|x| seen.insert(x.clone()));
                }
                out.extend(partial);
            }
            out
        }
        _ => vec![],
    }
}

fn candidates(v: &Var, k: &Knowledge) -> Vec<Term> {
    match v.sort {
        Sort::Fresh => k.names().cloned().collect(),
        Sort::Public | Sort::Msg => vec![Term::constant(ADVERSARY_VALUE)],
    }
}

/// Every extension of `s` under which `pattern` becomes a term the attacker
/// can derive. Matches against received terms come before composed ones;
/// duplicates are dropped.
pub fn match_input(pattern: &Term, s: &Substitution, k: &Knowledge) -> Vec<Substitution> {
    let mut seen: BTreeSet<Substitution> = BTreeSet::new();
    let mut out = Vec::new();
    for (sub, pending) in go(pattern, s.clone(), Vec::new(), k, k.depth_limit(), true) {
        let open: Vec<&Var> = pending.iter().filter(|v| sub.get(v).is_none()).collect();
        let mut subs = vec![sub];
        for v in open {
            let cands = candidates(v, k);
            subs = subs
                .into_iter()
                .flat_map(|s| {
                    cands.iter().map(move |c| {
                        let mut s2 = s.clone();
                        s2.insert(v.clone(), c.clone());
                        s2
                    })
                })
                .collect();
        }
        for s in subs {
            let inst = normalize(&substitute(pattern, &s));
            if inst.is_ground() && k.derivable(&inst) && seen.insert(s.clone()) {
                out.push(s);
            }
        }
    }
    out
}

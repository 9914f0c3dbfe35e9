//! Trace properties keyed to action naming conventions:
//! `Secret_key(P, x)`, `Honest(P, n)`, `Rev('c', n, k)`, `Running(m, n, t)`,
//! `Commit(n, m, t)`, `Sent(type, m)` and `Message(x, n)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use super::knowledge::Knowledge;
use super::state::{State, Trace};
use crate::keydep::KeyClassDag;
use crate::term::Term;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub property: String,
    pub step: usize,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} violated at step {}: {}", self.property, self.step, self.detail)
    }
}

/// No receiver accepts the same message twice.
pub fn check_replay_restriction(t: &Trace) -> bool {
    let mut seen = BTreeSet::new();
    t.actions_named("Message").all(|(_, a)| seen.insert(&a.args))
}

/// Key instance to class, read from `!Key('class', owner, key)` facts, plus
/// the classes each class depends on (reflexive).
#[derive(Debug, Clone, Default)]
pub struct SecretClasses {
    class_of: BTreeMap<Term, String>,
    deps: Option<BTreeMap<String, BTreeSet<String>>>,
}

impl SecretClasses {
    pub fn new(state: &State, dag: Option<&KeyClassDag>) -> Self {
        let mut class_of = BTreeMap::new();
        for f in state.persistent_named("Key") {
            if let [Term::Const(c), _, key] = &f.args[..] {
                class_of.insert(key.clone(), c.to_string());
            }
        }
        let deps = dag.map(|d| {
            d.labels()
                .iter()
                .map(|l| (l.clone(), d.dependencies(l).expect("label from dag")))
                .collect()
        });
        SecretClasses { class_of, deps }
    }

    pub fn class_of(&self, key: &Term) -> Option<&str> {
        self.class_of.get(key).map(String::as_str)
    }

    /// Key instances of one class.
    pub fn instances(&self, class: &str) -> Vec<&Term> {
        self.class_of
            .iter()
            .filter(|(_, c)| c.as_str() == class)
            .map(|(k, _)| k)
            .collect()
    }

    /// Whether a reveal of class `revealed` may excuse a leak of `key`.
    fn excuses(&self, key: &Term, revealed: &str) -> bool {
        match (self.class_of(key), &self.deps) {
            (Some(c), Some(deps)) => deps.get(c).is_some_and(|d| d.contains(revealed)),
            _ => true,
        }
    }
}

/// Secrets the attacker knows without an honest party of the same platoon
/// having revealed a key the secret depends on.
pub fn check_secrecy(t: &Trace, k: &Knowledge, classes: &SecretClasses) -> Vec<Violation> {
    let honest: BTreeSet<(&Term, &Term)> = t
        .actions_named("Honest")
        .filter_map(|(_, a)| match &a.args[..] {
            [p, n] => Some((p, n)),
            _ => None,
        })
        .collect();
    let reveals: Vec<(&str, &Term)> = t
        .actions_named("Rev")
        .filter_map(|(_, a)| match &a.args[..] {
            [Term::Const(c), n, _] => Some((c.as_str(), n)),
            _ => None,
        })
        .collect();
    let mut out = Vec::new();
    for (step, a) in t.actions_named("Secret_key") {
        let [p, x] = &a.args[..] else { continue };
        if !k.derivable(x) {
            continue;
        }
        let excused = reveals
            .iter()
            .any(|(c, n)| honest.contains(&(p, *n)) && classes.excuses(x, c));
        if !excused {
            out.push(Violation {
                property: "secrecy".into(),
                step,
                detail: format!(
                    "attacker knows {x} ({})",
                    classes.class_of(x).unwrap_or("unclassified")
                ),
            });
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AgreementKind {
    Aliveness,
    WeakAgreement,
    NonInjectiveAgreement,
}

impl AgreementKind {
    pub const ALL: [AgreementKind; 3] = [
        AgreementKind::Aliveness,
        AgreementKind::WeakAgreement,
        AgreementKind::NonInjectiveAgreement,
    ];
}

impl fmt::Display for AgreementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AgreementKind::Aliveness => "aliveness",
            AgreementKind::WeakAgreement => "weak-agreement",
            AgreementKind::NonInjectiveAgreement => "non-injective-agreement",
        })
    }
}

impl FromStr for AgreementKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        AgreementKind::ALL
            .into_iter()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| format!("unknown agreement property `{s}`"))
    }
}

/// Commits without the matching earlier claim by the peer. Commits involving
/// a party whose key was revealed are not counted.
pub fn check_agreement(t: &Trace, kind: AgreementKind) -> Vec<Violation> {
    let revealed: BTreeSet<&Term> = t
        .actions_named("Rev")
        .filter_map(|(_, a)| a.args.get(1))
        .collect();
    let mut out = Vec::new();
    for (i, c) in t.actions_named("Commit") {
        let [n, m, data] = &c.args[..] else { continue };
        if revealed.contains(n) || revealed.contains(m) {
            continue;
        }
        let prior = || t.actions().filter(|(j, _)| *j < i);
        let ok = match kind {
            AgreementKind::Aliveness => prior().any(|(_, a)| {
                (a.is("Running") && a.args.first() == Some(m)) || (a.is("Sent") && a.args.get(1) == Some(m))
            }),
            AgreementKind::WeakAgreement => prior()
                .any(|(_, a)| a.is("Running") && a.args.first() == Some(m) && a.args.get(1) == Some(n)),
            AgreementKind::NonInjectiveAgreement => prior().any(|(_, a)| {
                a.is("Running") && a.args.first() == Some(m) && a.args.get(1) == Some(n) && a.args.get(2) == Some(data)
            }),
        };
        if !ok {
            out.push(Violation {
                property: kind.to_string(),
                step: i,
                detail: format!("{n} commits to {m} on {data} without a matching claim"),
            });
        }
    }
    out
}

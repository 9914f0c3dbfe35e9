//! Breadth-first bounded search for a trace violating a property.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use super::props::{check_agreement, check_replay_restriction, check_secrecy, AgreementKind, SecretClasses, Violation};
use super::state::{applicable_instances, State};
use super::ExecError;
use crate::keydep::KeyClassDag;
use crate::model::{Fact, Model, Rule};
use crate::term::{Name, Substitution, Term};

/// Rules with this prefix build the initial configuration.
pub const SETUP_PREFIX: &str = "Setup_";
/// Rules with this prefix leak keys and are off unless reveals are enabled.
pub const REVEAL_PREFIX: &str = "Reveal_";

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Property {
    /// Secrecy of every declared secret, or of one key class.
    Secrecy(Option<String>),
    Agreement(AgreementKind),
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::Secrecy(None) => f.write_str("secrecy"),
            Property::Secrecy(Some(c)) => write!(f, "secrecy:{c}"),
            Property::Agreement(k) => k.fmt(f),
        }
    }
}

impl FromStr for Property {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.split_once(':') {
            _ if s == "secrecy" => Ok(Property::Secrecy(None)),
            Some(("secrecy", c)) if !c.is_empty() => Ok(Property::Secrecy(Some(c.to_string()))),
            _ => s.parse().map(Property::Agreement),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    /// Rule firings after setup.
    pub max_steps: usize,
    /// Fresh values minted after setup.
    pub fresh: usize,
    /// Attacker composition depth; defaults to the model's deepest message plus two.
    pub depth: Option<usize>,
    pub reveal: bool,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_steps: 12,
            fresh: 6,
            depth: None,
            reveal: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// First violating state found, with what it violates.
    pub counterexample: Option<(State, Vec<Violation>)>,
    /// Distinct states visited.
    pub explored: usize,
}

impl SearchOutcome {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Fire every setup rule once, in file order.
pub fn initial_state(model: &Model, depth: Option<usize>) -> Result<State, ExecError> {
    let mut state = match depth {
        Some(d) => State::new(d),
        None => State::for_model(model),
    };
    let publics: Vec<Term> = model.constants().into_iter().collect();
    for (i, r) in model.rules.iter().filter(|r| r.name.starts_with(SETUP_PREFIX)).enumerate() {
        let mut inst = applicable_instances(r, &state, &Substitution::new(), &publics);
        if inst.is_empty() {
            return Err(ExecError::StuckScenario {
                step: i + 1,
                rule: r.name.clone(),
            });
        }
        state = inst.swap_remove(0).next;
    }
    Ok(state)
}

fn violations(p: &Property, state: &State, dag: Option<&KeyClassDag>) -> Result<Vec<Violation>, ExecError> {
    Ok(match p {
        Property::Agreement(k) => check_agreement(&state.trace, *k),
        Property::Secrecy(class) => {
            let classes = SecretClasses::new(state, dag);
            if let (Some(c), Some(d)) = (class, dag) {
                if d.index_of(c).is_none() {
                    return Err(ExecError::UnknownClass(c.clone()));
                }
            }
            check_secrecy(&state.trace, &state.knowledge, &classes)
                .into_iter()
                .filter(|v| match class {
                    None => true,
                    Some(c) => v.detail.ends_with(&format!("({c})")),
                })
                .collect()
        }
    })
}

const TRACKED: [&str; 7] = ["Running", "Commit", "Rev", "Honest", "Secret_key", "Message", "Sent"];

type StateKey = (Vec<(Fact, usize)>, Vec<Fact>, Vec<Term>, Vec<Fact>);

/// State identity up to renaming of fresh values: each value becomes its
/// rank among the values of the same label.
fn canonical(s: &State) -> StateKey {
    let mut names = BTreeSet::new();
    let facts = s.linear.keys().chain(&s.persistent).chain(s.trace.steps.iter().flat_map(|x| &x.actions));
    for f in facts {
        f.args.iter().for_each(|a| a.names(&mut names));
    }
    s.knowledge.terms().for_each(|t| t.names(&mut names));
    let mut rank: BTreeMap<&str, u64> = BTreeMap::new();
    let map: BTreeMap<&Name, Term> = names
        .iter()
        .map(|n| {
            let r = rank.entry(n.label.as_str()).or_insert(0);
            *r += 1;
            let t = Term::Name(Name {
                label: n.label.clone(),
                id: *r,
            });
            (n, t)
        })
        .collect();
    let ren = |t: &Term| t.map_names(&mut |n| map[n].clone());
    let linear = s.linear.iter().map(|(f, c)| (f.map_terms(ren), *c)).collect();
    let mut persistent: Vec<Fact> = s.persistent.iter().map(|f| f.map_terms(ren)).collect();
    persistent.sort();
    let mut known: Vec<Term> = s.knowledge.terms().map(ren).collect();
    known.sort();
    let mut acts: Vec<Fact> = s
        .trace
        .actions()
        .filter(|(_, a)| TRACKED.contains(&a.name.as_str()))
        .map(|(_, a)| a.map_terms(ren))
        .collect();
    acts.sort();
    acts.dedup();
    (linear, persistent, known, acts)
}

/// Search all executions within `limits` for one violating `property`.
/// Levels are explored in order, rules by name, so the first counterexample
/// is a shortest one.
pub fn search(
    model: &Model,
    property: &Property,
    limits: &SearchLimits,
    dag: Option<&KeyClassDag>,
) -> Result<SearchOutcome, ExecError> {
    Ok(search_many(model, std::slice::from_ref(property), limits, dag)?.remove(0))
}

/// One exploration answering several properties. Each outcome is what
/// [`search`] would return for that property alone.
pub fn search_many(
    model: &Model,
    properties: &[Property],
    limits: &SearchLimits,
    dag: Option<&KeyClassDag>,
) -> Result<Vec<SearchOutcome>, ExecError> {
    let start = initial_state(model, limits.depth)?;
    let publics: Vec<Term> = model.constants().into_iter().collect();
    let mut rules: Vec<&Rule> = model
        .rules
        .iter()
        .filter(|r| !r.name.starts_with(SETUP_PREFIX))
        .filter(|r| limits.reveal || !r.name.starts_with(REVEAL_PREFIX))
        .collect();
    rules.sort_by(|a, b| a.name.cmp(&b.name));
    let replay = model.declares_replay_protection();

    let mut found: Vec<Option<SearchOutcome>> = vec![None; properties.len()];
    let mut seen = BTreeSet::new();
    // true once every property has a counterexample
    let record = |state: &State, explored: usize, found: &mut Vec<Option<SearchOutcome>>| -> Result<bool, ExecError> {
        for (p, slot) in properties.iter().zip(found.iter_mut()) {
            if slot.is_none() {
                let v = violations(p, state, dag)?;
                if !v.is_empty() {
                    *slot = Some(SearchOutcome {
                        counterexample: Some((state.clone(), v)),
                        explored,
                    });
                }
            }
        }
        Ok(found.iter().all(Option::is_some))
    };
    seen.insert(canonical(&start));
    let mut done = record(&start, 1, &mut found)?;
    let mut frontier = vec![(start, 0usize)];
    'levels: for _ in 0..limits.max_steps {
        if done {
            break;
        }
        let mut next = Vec::new();
        for (state, minted) in &frontier {
            for r in &rules {
                for inst in applicable_instances(r, state, &Substitution::new(), &publics) {
                    let used = minted + inst.minted;
                    if used > limits.fresh {
                        continue;
                    }
                    if replay && !check_replay_restriction(&inst.next.trace) {
                        continue;
                    }
                    if !seen.insert(canonical(&inst.next)) {
                        continue;
                    }
                    done = record(&inst.next, seen.len(), &mut found)?;
                    if done {
                        break 'levels;
                    }
                    next.push((inst.next, used));
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    let explored = seen.len();
    Ok(found
        .into_iter()
        .map(|f| {
            f.unwrap_or(SearchOutcome {
                counterexample: None,
                explored,
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_model;

    #[test]
    fn property_names() {
        assert_eq!("secrecy".parse(), Ok(Property::Secrecy(None)));
        assert_eq!("secrecy:pgk".parse(), Ok(Property::Secrecy(Some("pgk".into()))));
        assert_eq!(
            "aliveness".parse(),
            Ok(Property::Agreement(AgreementKind::Aliveness))
        );
        assert!("bogus".parse::<Property>().is_err());
        assert_eq!(Property::Secrecy(Some("k".into())).to_string(), "secrecy:k");
    }

    #[test]
    fn finds_leak_of_unprotected_secret() {
        let m = parse_model(
            "theory T begin
             rule Setup_A: [Fr(~k)] --> [!Key('k', 'A', ~k)]
             rule Send: [!Key('k', 'A', k), Fr(~s)] --[Secret_key('P', ~s)]-> [Out(senc(~s, k)), Out(~s)]
             end",
        )
        .unwrap();
        let out = search(&m, &Property::Secrecy(None), &SearchLimits::default(), None).unwrap();
        let (state, v) = out.counterexample.expect("leak found");
        assert_eq!(state.trace.rules(), vec!["Setup_A", "Send"]);
        assert_eq!(v.len(), 1);
    }

    #[test]
    fn protected_secret_holds() {
        let m = parse_model(
            "theory T begin
             rule Setup_A: [Fr(~k)] --> [!Key('k', 'A', ~k)]
             rule Send: [!Key('k', 'A', k), Fr(~s)] --[Secret_key('P', ~s)]-> [Out(senc(~s, k))]
             rule Reveal_k: [!Key('k', n, k)] --[Rev('k', n, k)]-> [Out(k)]
             end",
        )
        .unwrap();
        let lim = SearchLimits {
            max_steps: 3,
            ..SearchLimits::default()
        };
        let out = search(&m, &Property::Secrecy(None), &lim, None).unwrap();
        assert!(out.holds());
        // with reveals on, the leak exists but has no honest owner to excuse it
        let lim = SearchLimits { reveal: true, ..lim };
        let out = search(&m, &Property::Secrecy(None), &lim, None).unwrap();
        assert!(!out.holds());
    }
}

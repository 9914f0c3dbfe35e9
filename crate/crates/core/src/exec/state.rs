use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use super::knowledge::Knowledge;
use super::matching::match_input;
use crate::model::{Fact, Model, Rule};
use crate::term::{normalize, substitute, Name, Sort, Substitution, Term, Var};

/// One executed rule instance with its ground actions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub index: usize,
    pub rule: String,
    pub actions: Vec<Fact>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub steps: Vec<Step>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Every action with the index of its step.
    pub fn actions(&self) -> impl Iterator<Item = (usize, &Fact)> {
        self.steps
            .iter()
            .flat_map(|s| s.actions.iter().map(move |a| (s.index, a)))
    }

    pub fn actions_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = (usize, &'a Fact)> {
        self.actions().filter(move |(_, a)| a.name == name)
    }

    pub fn rules(&self) -> Vec<&str> {
        self.steps.iter().map(|s| s.rule.as_str()).collect()
    }

    /// `step rule action(args)` lines; a step without actions prints just the rule.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.steps {
            if s.actions.is_empty() {
                writeln!(out, "{} {}", s.index, s.rule).unwrap();
            }
            for a in &s.actions {
                writeln!(out, "{} {} {}", s.index, s.rule, a).unwrap();
            }
        }
        out
    }

    /// Structured form: `{"steps": [{"step", "rule", "actions": [..]}], "knowledge": [..]}`.
    pub fn to_json(&self, knowledge: &Knowledge) -> serde_json::Value {
        let steps: Vec<serde_json::Value> = self
            .steps
            .iter()
            .map(|s| {
                serde_json::json!({
                    "step": s.index,
                    "rule": s.rule,
                    "actions": s.actions.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({
            "steps": steps,
            "knowledge": knowledge.terms().map(|t| t.to_string()).collect::<Vec<_>>(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct State {
    /// Linear facts with multiplicity.
    pub linear: BTreeMap<Fact, usize>,
    pub persistent: BTreeSet<Fact>,
    pub next_fresh: u64,
    pub knowledge: Knowledge,
    pub trace: Trace,
}

impl State {
    pub fn new(depth_limit: usize) -> Self {
        State {
            linear: BTreeMap::new(),
            persistent: BTreeSet::new(),
            next_fresh: 1,
            knowledge: Knowledge::new(depth_limit),
            trace: Trace::default(),
        }
    }

    /// Composition limit used when none is given: deepest protocol message plus two.
    pub fn for_model(m: &Model) -> Self {
        State::new(m.max_message_depth() + 2)
    }

    pub fn persistent_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Fact> {
        self.persistent.iter().filter(move |f| f.name == name)
    }

    fn in_normal_form(&self) -> bool {
        let ok = |f: &Fact| f.args.iter().all(|a| a.is_ground() && normalize(a) == *a);
        self.linear.keys().all(ok) && self.persistent.iter().all(ok)
    }
}

/// A way to fire a rule and the state it leads to.
#[derive(Debug, Clone)]
pub struct Instance {
    pub subst: Substitution,
    pub next: State,
    /// Fresh values minted by this step.
    pub minted: usize,
}

fn ground_fact(f: &Fact, s: &Substitution) -> Fact {
    Fact {
        name: f.name.clone(),
        persistent: f.persistent,
        args: f.args.iter().map(|a| normalize(&substitute(a, s))).collect(),
        annotation: None,
    }
}

/// Match state premises in order, consuming linear facts.
fn match_premises(
    prems: &[&Fact],
    s: Substitution,
    used: &mut BTreeMap<Fact, usize>,
    state: &State,
    out: &mut Vec<(Substitution, Vec<Fact>)>,
) {
    let Some((p, rest)) = prems.split_first() else {
        let consumed = used
            .iter()
            .flat_map(|(f, n)| std::iter::repeat_n(f.clone(), *n))
            .collect();
        out.push((s, consumed));
        return;
    };
    let try_fact = |fact: &Fact, s: &Substitution| -> Option<Substitution> {
        if fact.args.len() != p.args.len() {
            return None;
        }
        let mut s2 = s.clone();
        p.args
            .iter()
            .zip(&fact.args)
            .all(|(pa, fa)| crate::term::match_term(pa, fa, &mut s2))
            .then_some(s2)
    };
    if p.persistent {
        for fact in state.persistent_named(&p.name) {
            if let Some(s2) = try_fact(fact, &s) {
                match_premises(rest, s2, used, state, out);
            }
        }
    } else {
        for (fact, &count) in state.linear.range(..) {
            if fact.name != p.name || used.get(fact).copied().unwrap_or(0) >= count {
                continue;
            }
            if let Some(s2) = try_fact(fact, &s) {
                *used.entry(fact.clone()).or_insert(0) += 1;
                match_premises(rest, s2, used, state, out);
                let e = used.get_mut(fact).unwrap();
                *e -= 1;
                if *e == 0 {
                    used.remove(fact);
                }
            }
        }
    }
}

/// All ground instances of `rule` enabled in `state`, extending `seed`.
/// Public variables left open after matching range over `publics`.
pub fn applicable_instances(rule: &Rule, state: &State, seed: &Substitution, publics: &[Term]) -> Vec<Instance> {
    let facts: Vec<&Fact> = rule
        .premises
        .iter()
        .filter(|f| !f.is("Fr") && !f.is("In"))
        .collect();
    let mut matched = Vec::new();
    match_premises(&facts, seed.clone(), &mut BTreeMap::new(), state, &mut matched);

    let fresh: Vec<Var> = rule.fresh_vars();
    let mut out = Vec::new();
    for (s, consumed) in matched {
        let mut subs = vec![s];
        for input in rule.inputs() {
            subs = subs
                .iter()
                .flat_map(|s| match_input(input, s, &state.knowledge))
                .collect();
        }
        for mut s in subs {
            let mut next_fresh = state.next_fresh;
            for v in &fresh {
                s.insert(
                    v.clone(),
                    Term::Name(Name {
                        label: v.name.clone(),
                        id: next_fresh,
                    }),
                );
                next_fresh += 1;
            }
            let open: BTreeSet<Var> = rule
                .actions
                .iter()
                .chain(&rule.conclusions)
                .flat_map(Fact::vars)
                .filter(|v| s.get(v).is_none())
                .collect();
            if open.iter().any(|v| v.sort != Sort::Public) {
                continue;
            }
            let mut full = vec![s];
            for v in &open {
                full = full
                    .into_iter()
                    .flat_map(|s| {
                        publics.iter().map(move |c| {
                            let mut s2 = s.clone();
                            s2.insert(v.clone(), c.clone());
                            s2
                        })
                    })
                    .collect();
            }
            for s in full {
                out.push(fire(rule, state, &consumed, s, next_fresh, fresh.len()));
            }
        }
    }
    out
}

fn fire(rule: &Rule, state: &State, consumed: &[Fact], s: Substitution, next_fresh: u64, minted: usize) -> Instance {
    let mut next = state.clone();
    for f in consumed {
        let e = next.linear.get_mut(f).expect("consumed fact present");
        *e -= 1;
        if *e == 0 {
            next.linear.remove(f);
        }
    }
    next.next_fresh = next_fresh;
    let mut outs = Vec::new();
    for c in &rule.conclusions {
        let g = ground_fact(c, &s);
        if g.is("Out") {
            outs.push(g.args[0].clone());
        } else if g.persistent {
            next.persistent.insert(g);
        } else {
            *next.linear.entry(g).or_insert(0) += 1;
        }
    }
    next.knowledge.extend(outs);
    let actions = rule.actions.iter().map(|a| ground_fact(a, &s)).collect();
    next.trace.steps.push(Step {
        index: state.trace.len() + 1,
        rule: rule.name.clone(),
        actions,
    });
    debug_assert!(next.in_normal_form());
    Instance {
        subst: s,
        next,
        minted,
    }
}

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{Fact, Model, BUILTIN_FACTS};
use crate::term::{Sort, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DiagnosticKind {
    DuplicateRule,
    DuplicateLemma,
    ArityConflict,
    PersistenceConflict,
    Misplaced,
    FreshNotFreshVar,
    FreeVariable,
    UnknownSymbol,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub rule: Option<String>,
    pub severity: Severity,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        match &self.rule {
            Some(r) => write!(f, "{sev}: rule {r}: {}", self.message),
            None => write!(f, "{sev}: {}", self.message),
        }
    }
}

fn error(rule: Option<&str>, kind: DiagnosticKind, message: String) -> Diagnostic {
    Diagnostic {
        rule: rule.map(str::to_string),
        severity: Severity::Error,
        kind,
        message,
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Place {
    Premise,
    Action,
    Conclusion,
}

fn misplaced(name: &str, place: Place) -> Option<&'static str> {
    match (name, place) {
        ("Out", Place::Premise) => Some("Out not allowed in premise"),
        ("Out", Place::Action) => Some("Out not allowed in action"),
        ("In", Place::Action) => Some("In not allowed in action"),
        ("In", Place::Conclusion) => Some("In not allowed in conclusion"),
        ("Fr", Place::Action) => Some("Fr not allowed in action"),
        ("Fr", Place::Conclusion) => Some("Fr not allowed in conclusion"),
        ("K", Place::Premise) => Some("K not allowed in premise"),
        ("K", Place::Conclusion) => Some("K not allowed in conclusion"),
        _ => None,
    }
}

/// Check every model invariant. An empty result means the model is well formed.
pub fn validate(m: &Model) -> Vec<Diagnostic> {
    use DiagnosticKind::*;
    let mut out = Vec::new();
    let sig = m.signature();

    let mut seen = BTreeSet::new();
    for r in &m.rules {
        if !seen.insert(&r.name) {
            out.push(error(Some(&r.name), DuplicateRule, format!("duplicate rule name `{}`", r.name)));
        }
    }
    let mut seen = BTreeSet::new();
    for l in &m.lemmas {
        if !seen.insert(&l.name) {
            out.push(error(None, DuplicateLemma, format!("duplicate lemma name `{}`", l.name)));
        }
    }

    // Arity and persistence per fact name, in first-use order.
    let mut arities: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
    let mut persistence: BTreeMap<&str, BTreeSet<bool>> = BTreeMap::new();
    let mut first_rule: BTreeMap<&str, &str> = BTreeMap::new();
    for (name, n) in BUILTIN_FACTS {
        arities.entry(name).or_default().insert(*n);
    }
    for r in &m.rules {
        for f in r.facts() {
            arities.entry(&f.name).or_default().insert(f.args.len());
            persistence.entry(&f.name).or_default().insert(f.persistent);
            first_rule.entry(&f.name).or_insert(&r.name);
        }
    }
    for (name, set) in &arities {
        if set.len() > 1 {
            let list: Vec<String> = set.iter().map(usize::to_string).collect();
            out.push(error(
                first_rule.get(name).copied(),
                ArityConflict,
                format!("fact `{name}` used with arity {}", list.join(" and ")),
            ));
        }
    }
    for (name, set) in &persistence {
        let builtin = BUILTIN_FACTS.iter().any(|(b, _)| b == name);
        if set.len() > 1 || (builtin && set.contains(&true)) {
            out.push(error(
                first_rule.get(name).copied(),
                PersistenceConflict,
                format!("fact `{name}` used both persistent and linear"),
            ));
        }
    }

    for r in &m.rules {
        let rn = Some(r.name.as_str());
        let placed = r
            .premises
            .iter()
            .map(|f| (f, Place::Premise))
            .chain(r.actions.iter().map(|f| (f, Place::Action)))
            .chain(r.conclusions.iter().map(|f| (f, Place::Conclusion)));
        for (f, place) in placed {
            if let Some(msg) = misplaced(&f.name, place) {
                out.push(error(rn, Misplaced, msg.to_string()));
            }
            for a in &f.args {
                check_symbols(a, &sig, rn, &mut out);
            }
        }
        for f in r.premises.iter().filter(|f| f.is("Fr")) {
            let ok = matches!(f.args.first(), Some(Term::Var(v)) if v.sort == Sort::Fresh);
            if !ok {
                out.push(error(rn, FreshNotFreshVar, format!("`{f}` must bind a fresh variable")));
            }
        }
        let bound = r.premise_vars();
        let mut reported = BTreeSet::new();
        for f in r.actions.iter().chain(&r.conclusions) {
            for v in Fact::vars(f) {
                // Public variables range over public names and may be chosen freely.
                if v.sort != Sort::Public && !bound.contains(&v) && reported.insert(v.clone()) {
                    out.push(error(rn, FreeVariable, format!("free variable `{v}` in rule `{}`", r.name)));
                }
            }
        }
    }
    out
}

fn check_symbols(t: &Term, sig: &crate::term::Signature, rule: Option<&str>, out: &mut Vec<Diagnostic>) {
    if let Term::App(f, args) = t {
        match sig.arity(f) {
            None => out.push(error(rule, DiagnosticKind::UnknownSymbol, format!("unknown function symbol `{f}`"))),
            Some(n) if n != args.len() => out.push(error(
                rule,
                DiagnosticKind::UnknownSymbol,
                format!("`{f}` expects {n} arguments, got {}", args.len()),
            )),
            _ => {}
        }
        for a in args.iter() {
            check_symbols(a, sig, rule, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Model, Rule};

    fn model(rules: Vec<Rule>) -> Model {
        Model {
            name: "T".into(),
            rules,
            ..Model::default()
        }
    }

    fn ok_rule(name: &str) -> Rule {
        Rule::new(
            name,
            vec![Fact::new("Fr", vec![Term::fresh("k")])],
            vec![],
            vec![Fact::new("Out", vec![Term::fresh("k")])],
        )
    }

    #[test]
    fn valid_model_is_clean() {
        assert!(validate(&model(vec![ok_rule("A"), ok_rule("B")])).is_empty());
    }

    #[test]
    fn duplicate_rule_one_error() {
        let d = validate(&model(vec![ok_rule("A"), ok_rule("A")]));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::DuplicateRule);
        assert_eq!(d[0].severity, Severity::Error);
    }

    #[test]
    fn arity_conflict_names_fact() {
        let a = Rule::new(
            "A",
            vec![Fact::new("Fr", vec![Term::fresh("k")])],
            vec![],
            vec![Fact::new("Cert", vec![Term::fresh("k")])],
        );
        let b = Rule::new(
            "B",
            vec![Fact::new("Cert", vec![Term::msg("a"), Term::msg("b"), Term::msg("c")])],
            vec![],
            vec![],
        );
        let d = validate(&model(vec![a, b]));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::ArityConflict);
        assert_eq!(d[0].message, "fact `Cert` used with arity 1 and 3");
    }

    #[test]
    fn free_variable_named() {
        let r = Rule::new("A", vec![], vec![], vec![Fact::new("St", vec![Term::msg("x"), Term::public("B")])]);
        let d = validate(&model(vec![r]));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].rule.as_deref(), Some("A"));
        assert!(d[0].message.contains("`x`"));
    }

    #[test]
    fn fr_must_bind_fresh() {
        let r = Rule::new("A", vec![Fact::new("Fr", vec![Term::msg("k")])], vec![], vec![]);
        let d = validate(&model(vec![r]));
        assert_eq!(d[0].kind, DiagnosticKind::FreshNotFreshVar);
    }
}

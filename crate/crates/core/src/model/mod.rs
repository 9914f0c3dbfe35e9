//! Protocol models: facts, multiset-rewriting rules, lemmas and restrictions.

mod parse;
mod print;
mod validate;

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::term::{Signature, Term, Var};

pub use parse::{parse_model, parse_term};
pub use print::serialize;
pub use validate::{validate, Diagnostic, DiagnosticKind, Severity};

pub const BUILTIN_FACTS: &[(&str, usize)] = &[("Fr", 1), ("In", 1), ("Out", 1), ("K", 1)];

/// Prover goal-priority annotation on a premise fact: `F(x)[+]` / `F(x)[-]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FactAnnotation {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fact {
    pub name: String,
    pub persistent: bool,
    pub args: Vec<Term>,
    pub annotation: Option<FactAnnotation>,
}

impl Fact {
    pub fn new(name: &str, args: Vec<Term>) -> Self {
        Fact {
            name: name.to_string(),
            persistent: false,
            args,
            annotation: None,
        }
    }

    pub fn persistent(name: &str, args: Vec<Term>) -> Self {
        Fact {
            persistent: true,
            ..Fact::new(name, args)
        }
    }

    pub fn annotated(mut self, a: FactAnnotation) -> Self {
        self.annotation = Some(a);
        self
    }

    pub fn is(&self, name: &str) -> bool {
        self.name == name
    }

    pub fn is_builtin(&self) -> bool {
        BUILTIN_FACTS.iter().any(|(n, _)| *n == self.name)
    }

    pub fn map_terms(&self, f: impl FnMut(&Term) -> Term) -> Fact {
        Fact {
            args: self.args.iter().map(f).collect(),
            ..self.clone()
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out: Vec<Var> = Vec::new();
        for a in &self.args {
            for v in a.vars() {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.persistent {
            write!(f, "!")?;
        }
        write!(f, "{}(", self.name)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")?;
        match self.annotation {
            Some(FactAnnotation::Plus) => write!(f, "[+]"),
            Some(FactAnnotation::Minus) => write!(f, "[-]"),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    /// Sequential `let` bindings, each already expanded with the earlier ones.
    pub let_bindings: Vec<(Var, Term)>,
    pub premises: Vec<Fact>,
    pub actions: Vec<Fact>,
    pub conclusions: Vec<Fact>,
}

impl Rule {
    pub fn new(name: &str, premises: Vec<Fact>, actions: Vec<Fact>, conclusions: Vec<Fact>) -> Self {
        Rule {
            name: name.to_string(),
            let_bindings: Vec::new(),
            premises,
            actions,
            conclusions,
        }
    }

    pub fn facts(&self) -> impl Iterator<Item = &Fact> {
        self.premises
            .iter()
            .chain(&self.actions)
            .chain(&self.conclusions)
    }

    /// Payloads of `In` premises.
    pub fn inputs(&self) -> impl Iterator<Item = &Term> {
        self.premises
            .iter()
            .filter(|f| f.is("In"))
            .flat_map(|f| f.args.first())
    }

    /// Payloads of `Out` conclusions.
    pub fn outputs(&self) -> impl Iterator<Item = &Term> {
        self.conclusions
            .iter()
            .filter(|f| f.is("Out"))
            .flat_map(|f| f.args.first())
    }

    /// Variables bound by `Fr` premises.
    pub fn fresh_vars(&self) -> Vec<Var> {
        self.premises
            .iter()
            .filter(|f| f.is("Fr"))
            .flat_map(|f| f.args.first().and_then(Term::as_var).cloned())
            .collect()
    }

    pub fn premise_vars(&self) -> BTreeSet<Var> {
        self.premises.iter().flat_map(Fact::vars).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lemma {
    pub name: String,
    /// Attribute text kept verbatim, e.g. `reuse`, `use_induction`.
    pub attributes: Vec<String>,
    /// `all-traces` / `exists-trace` when given.
    pub quantifier: Option<String>,
    pub formula: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Restriction {
    pub name: String,
    pub formula: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Model {
    pub name: String,
    /// Function symbols declared beyond the fixed signature.
    pub functions: Vec<(String, usize)>,
    pub rules: Vec<Rule>,
    pub lemmas: Vec<Lemma>,
    pub restrictions: Vec<Restriction>,
}

impl Model {
    pub fn signature(&self) -> Signature {
        Signature::with_declared(&self.functions)
    }

    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }

    /// Public constants occurring anywhere in the rules.
    pub fn constants(&self) -> BTreeSet<Term> {
        let mut out = BTreeSet::new();
        for r in &self.rules {
            for f in r.facts() {
                for a in &f.args {
                    for s in a.subterms() {
                        if let Term::Const(_) = s {
                            out.insert(s.clone());
                        }
                    }
                }
            }
        }
        out
    }

    /// Deepest constructor nesting of any message sent or received.
    pub fn max_message_depth(&self) -> usize {
        self.rules
            .iter()
            .flat_map(|r| r.inputs().chain(r.outputs()))
            .map(Term::depth)
            .max()
            .unwrap_or(0)
    }

    /// Whether a restriction forbids duplicate `Message(x, n)` receptions.
    pub fn declares_replay_protection(&self) -> bool {
        self.restrictions.iter().any(|r| r.formula.contains("Message("))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: unknown function symbol `{symbol}`")]
    UnknownSymbol { line: usize, col: usize, symbol: String },
    #[error("{line}:{col}: multiset union is not supported; encode positions with a counter instead")]
    UnionNotSupported { line: usize, col: usize },
    #[error("{0}")]
    Invalid(Diagnostic),
}

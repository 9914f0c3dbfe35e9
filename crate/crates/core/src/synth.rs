//! Synthetic ping-pong key-chain models.
//!
//! Two roles share `k0`. In step `i` the active role mints `k_i` and sends
//! it encrypted under the key it received last, so the keys form a chain
//! `k_d -> ... -> k1 -> k0`.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{Fact, FactAnnotation, Lemma, Model, Rule};
use crate::term::Term;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LemmaOrdering {
    /// `k1` first.
    Dependency,
    /// Permutation drawn from ChaCha8 seeded with the value.
    Random(u64),
    /// Dependency order, lemmas not marked for reuse.
    None,
}

impl FromStr for LemmaOrdering {
    type Err = SynthError;

    fn from_str(s: &str) -> Result<Self, SynthError> {
        match s {
            "dep" | "dependency" => Ok(LemmaOrdering::Dependency),
            "none" => Ok(LemmaOrdering::None),
            _ => s
                .strip_prefix("rand:")
                .and_then(|n| n.parse().ok())
                .map(LemmaOrdering::Random)
                .ok_or_else(|| SynthError::BadOrdering(s.to_string())),
        }
    }
}

impl fmt::Display for LemmaOrdering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LemmaOrdering::Dependency => write!(f, "dep"),
            LemmaOrdering::Random(s) => write!(f, "rand:{s}"),
            LemmaOrdering::None => write!(f, "none"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChainSpec {
    pub depth: usize,
    pub reuse: bool,
    pub ordering: LemmaOrdering,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SynthError {
    #[error("chain depth must be an even number of at least 2, got {0}")]
    BadDepth(usize),
    #[error("unknown lemma ordering `{0}` (expected dep, none or rand:SEED)")]
    BadOrdering(String),
}

fn role(i: usize) -> &'static str {
    if i % 2 == 1 {
        "A"
    } else {
        "B"
    }
}

fn key(i: usize) -> String {
    format!("k{i}")
}

fn state(i: usize, arg: Term) -> Fact {
    Fact::new(&format!("St_{}_{i}", role(i)), vec![arg])
}

fn message(i: usize, payload: Term, under: Term) -> Term {
    Term::pair(Term::constant(&format!("msg{i}")), Term::senc(payload, under))
}

fn secret_action(i: usize) -> Fact {
    Fact::new(&format!("Secret_{}", key(i)), vec![Term::fresh(&key(i))])
}

/// Key indices in the order their lemmas are emitted.
pub fn lemma_order(depth: usize, ordering: LemmaOrdering) -> Vec<usize> {
    let mut order: Vec<usize> = (1..=depth).collect();
    if let LemmaOrdering::Random(seed) = ordering {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    order
}

pub fn generate_chain_model(spec: &ChainSpec) -> Result<Model, SynthError> {
    let d = spec.depth;
    if d < 2 || d % 2 == 1 {
        return Err(SynthError::BadDepth(d));
    }
    let plus = FactAnnotation::Plus;
    let mut rules = vec![Rule::new(
        "Setup",
        vec![Fact::new("Fr", vec![Term::fresh("k0")])],
        vec![],
        vec![
            Fact::persistent("PSK", vec![Term::fresh("k0")]),
            state(1, Term::fresh("k0")),
            state(2, Term::fresh("k0")),
        ],
    )];
    let next_state = |i: usize| (i + 2 <= d).then(|| state(i + 2, Term::fresh(&key(i))));

    let mut conclusions = vec![Fact::new(
        "Out",
        vec![message(1, Term::fresh("k1"), Term::msg("k0"))],
    )];
    conclusions.extend(next_state(1));
    rules.push(Rule::new(
        "Step_1",
        vec![
            state(1, Term::msg("k0")).annotated(plus),
            Fact::persistent("PSK", vec![Term::msg("k0")]).annotated(plus),
            Fact::new("Fr", vec![Term::fresh("k1")]),
        ],
        vec![secret_action(1)],
        conclusions,
    ));
    for i in 2..=d {
        let (kold, knew) = (Term::msg("kold"), Term::msg("knew"));
        let mut conclusions = vec![Fact::new(
            "Out",
            vec![message(i, Term::fresh(&key(i)), knew.clone())],
        )];
        conclusions.extend(next_state(i));
        rules.push(Rule::new(
            &format!("Step_{i}"),
            vec![
                state(i, kold.clone()).annotated(plus),
                Fact::new("In", vec![message(i - 1, knew, kold)]).annotated(plus),
                Fact::new("Fr", vec![Term::fresh(&key(i))]),
            ],
            vec![secret_action(i)],
            conclusions,
        ));
    }

    let attributes = if spec.reuse && spec.ordering != LemmaOrdering::None {
        vec!["reuse".to_string()]
    } else {
        vec![]
    };
    let lemmas = lemma_order(d, spec.ordering)
        .into_iter()
        .map(|i| Lemma {
            name: format!("secret_{}", key(i)),
            attributes: attributes.clone(),
            quantifier: Some("all-traces".into()),
            formula: format!(
                "All x #i. Secret_{}(x) @ #i ==> not (Ex #j. K(x) @ #j)",
                key(i)
            ),
        })
        .collect();
    Ok(Model {
        name: format!("PingPong_{d}"),
        functions: vec![],
        rules,
        lemmas,
        restrictions: vec![],
    })
}
